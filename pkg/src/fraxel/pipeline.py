"""End-to-end orchestration: manifests in, features and reports out.

Feature extraction walks a corpus manifest, cuts seeded random windows
from every image, runs the configured descriptor on each window across
a thread pool, and persists rows to features.csv in manifest order, so
a fixed configuration always produces byte-identical outputs no matter
how many workers ran. Evaluation reads such rows back, optionally pairs
the two faces of each sample, and hands a FeatureMatrix to the
classifier stack.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .baselines import (
    DEFAULT_GABOR_FREQ_RANGE,
    DEFAULT_GABOR_ORIENTATIONS,
    DEFAULT_GABOR_SCALES,
    DEFAULT_RINGS,
    BaselineConfig,
    fourier_descriptors,
    gabor_descriptors,
)
from .classify import DEFAULT_C, DEFAULT_FOLDS, EvalReport, cross_validate
from .errors import ConfigError, FormatError, FraxelError, PairingError, ParameterError
from .fusion import FeatureMatrix
from .images import load_image, load_manifest, to_surface
from .minkowski import (
    DEFAULT_R_MAX,
    DEFAULT_VOXEL_BUDGET,
    bm_descriptors,
    dilation_volumes,
)
from .preprocess import extract_windows, radon_align
from .voss import DEFAULT_DELTAS, probability_curve, voss_descriptors

METHODS = ("proposed", "fourier", "gabor")
GROUP_MODES = ("none", "sample_id")
_FIXED_COLUMNS = ("sample_id", "face", "window", "label")


@dataclass(frozen=True)
class SignatureRecord:
    """One feature row: which window of which sample face, and its vector."""

    sample_id: str
    face: str
    window: int
    label: str
    features: np.ndarray


@dataclass(frozen=True)
class RunConfig:
    """Everything a pipeline run needs, mirroring the CLI flags."""

    manifest: str = ""
    out_dir: str = "."
    method: str = "proposed"
    window_size: int = 200
    windows_per_image: int = 20
    seed: int = 0
    align: bool = False
    angle_step: float = 1.0
    margin: int = 0
    r_max: float = DEFAULT_R_MAX
    deltas: tuple[int, ...] = DEFAULT_DELTAS
    voxel_budget: int = DEFAULT_VOXEL_BUDGET
    rings: int = DEFAULT_RINGS
    gabor_scales: int = DEFAULT_GABOR_SCALES
    gabor_orientations: int = DEFAULT_GABOR_ORIENTATIONS
    gabor_freq_range: tuple[float, float] = DEFAULT_GABOR_FREQ_RANGE
    transform: str = "scatter"
    components: int = 10
    ridge: float | None = None
    folds: int = DEFAULT_FOLDS
    svm_c: float = DEFAULT_C
    group_by: str = "none"
    threads: int | None = None

    def validate(self, need_manifest: bool = True) -> None:
        problems = []
        if need_manifest and not os.path.isfile(self.manifest):
            problems.append(f"manifest not found: {self.manifest!r}")
        if self.method not in METHODS:
            problems.append(f"method must be one of {METHODS}")
        if self.window_size < 1:
            problems.append("window-size must be >= 1")
        if self.windows_per_image < 1:
            problems.append("windows-per-image must be >= 1")
        if self.seed < 0:
            problems.append("seed must be non-negative")
        if not 0.0 < self.angle_step <= 5.0:
            problems.append("angle-step must lie in (0, 5]")
        if self.margin < 0:
            problems.append("margin must be >= 0")
        if self.r_max < 1.0:
            problems.append("r-max must be >= 1")
        if len(self.deltas) == 0 or any(d < 2 for d in self.deltas):
            problems.append("deltas must be integers >= 2")
        elif any(b <= a for a, b in zip(self.deltas, self.deltas[1:])):
            problems.append("deltas must be strictly increasing")
        if self.voxel_budget < 1:
            problems.append("voxel-budget must be >= 1")
        if self.rings < 1:
            problems.append("rings must be >= 1")
        if self.gabor_scales < 1 or self.gabor_orientations < 1:
            problems.append("gabor bank needs >= 1 scale and orientation")
        low, high = self.gabor_freq_range
        if not 0.0 < low < high <= 0.5:
            problems.append("gabor-freq must satisfy 0 < low < high <= 0.5")
        if self.transform not in ("scatter", "pca", "none"):
            problems.append("transform must be scatter, pca, or none")
        if self.components < 1:
            problems.append("components must be >= 1")
        if self.ridge is not None and self.ridge < 0.0:
            problems.append("ridge must be >= 0")
        if self.folds < 2:
            problems.append("folds must be >= 2")
        if self.svm_c <= 0.0:
            problems.append("svm-c must be positive")
        if self.group_by not in GROUP_MODES:
            problems.append(f"group-by must be one of {GROUP_MODES}")
        if self.threads is not None and self.threads < 1:
            problems.append("threads must be >= 1")
        if problems:
            raise ConfigError("; ".join(problems))


def write_features(path: str | os.PathLike, records: list[SignatureRecord]) -> None:
    """Persist rows as CSV: sample_id,face,window,label,f0..f{n-1}.

    Floats are written with 17 significant digits so reading the file
    back reproduces every float64 bit-exactly.
    """
    if not records:
        raise ParameterError("no records to write")
    n = records[0].features.shape[0]
    if any(r.features.shape != (n,) for r in records):
        raise ParameterError("all feature vectors must share one length")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(_FIXED_COLUMNS) + [f"f{t}" for t in range(n)])
        for r in records:
            writer.writerow(
                [r.sample_id, r.face, str(r.window), r.label]
                + [f"{v:.17g}" for v in r.features]
            )


def read_features(path: str | os.PathLike) -> list[SignatureRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if (
            header is None
            or tuple(header[:4]) != _FIXED_COLUMNS
            or any(h != f"f{t}" for t, h in enumerate(header[4:]))
            or len(header) == 4
        ):
            raise FormatError(
                "features header must be sample_id,face,window,label,f0.."
            )
        n = len(header) - 4
        records = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != n + 4:
                raise FormatError(f"features line {lineno}: wrong field count")
            try:
                window = int(row[2])
                vec = np.array(row[4:], dtype=np.float64)
            except ValueError as exc:
                raise FormatError(f"features line {lineno}: {exc}") from exc
            records.append(
                SignatureRecord(
                    sample_id=row[0],
                    face=row[1],
                    window=window,
                    label=row[3],
                    features=vec,
                )
            )
    if not records:
        raise FormatError("features file holds no rows")
    return records


def records_to_matrix(records: list[SignatureRecord]) -> FeatureMatrix:
    """Stack records into a FeatureMatrix; row ids are
    'sample_id:face:window' so pairing and grouping can recover them."""
    rows = np.vstack([r.features for r in records])
    return FeatureMatrix(
        rows=rows,
        labels=tuple(r.label for r in records),
        ids=tuple(f"{r.sample_id}:{r.face}:{r.window}" for r in records),
    )


def matrix_to_records(m: FeatureMatrix) -> list[SignatureRecord]:
    records = []
    for row, label, rid in zip(m.rows, m.labels, m.ids):
        sample_id, face, window = _split_id(rid)
        records.append(
            SignatureRecord(
                sample_id=sample_id,
                face=face,
                window=window,
                label=label,
                features=row,
            )
        )
    return records


def _split_id(rid: str) -> tuple[str, str, int]:
    parts = rid.rsplit(":", 2)
    if len(parts) != 3:
        raise ParameterError(f"row id {rid!r} is not sample_id:face:window")
    try:
        return parts[0], parts[1], int(parts[2])
    except ValueError as exc:
        raise ParameterError(f"row id {rid!r} has no window index") from exc


def sample_groups(m: FeatureMatrix) -> tuple[str, ...]:
    """Group key (the sample_id) of every row, for grouped CV."""
    return tuple(_split_id(rid)[0] for rid in m.ids)


def pair_faces(m: FeatureMatrix) -> FeatureMatrix:
    """Merge the two faces of each sample window into one signature.

    For every (sample_id, window) there must be exactly one 'superior'
    and one 'inferior' row with the same label; the output row is the
    superior vector followed by the inferior one, ordered as the
    superior rows were. Unpaired rows raise PairingError naming them.
    """
    sup: dict[tuple[str, int], int] = {}
    inf: dict[tuple[str, int], int] = {}
    order: list[tuple[str, int]] = []
    for t, rid in enumerate(m.ids):
        sample_id, face, window = _split_id(rid)
        key = (sample_id, window)
        if face == "superior":
            if key in sup:
                raise PairingError(f"duplicate superior row {rid!r}")
            sup[key] = t
            order.append(key)
        elif face == "inferior":
            if key in inf:
                raise PairingError(f"duplicate inferior row {rid!r}")
            inf[key] = t
        else:
            raise ParameterError(f"row {rid!r} has face {face!r}")

    missing = [f"{s}:inferior:{w}" for s, w in order if (s, w) not in inf]
    missing += sorted(
        f"{s}:superior:{w}" for (s, w) in inf if (s, w) not in sup
    )
    if missing:
        raise PairingError("unpaired rows: " + ", ".join(missing))

    rows = []
    labels = []
    ids = []
    for key in order:
        a, b = sup[key], inf[key]
        if m.labels[a] != m.labels[b]:
            raise PairingError(
                f"faces of {key[0]}:{key[1]} disagree on label: "
                f"{m.labels[a]!r} vs {m.labels[b]!r}"
            )
        rows.append(np.concatenate((m.rows[a], m.rows[b])))
        labels.append(m.labels[a])
        ids.append(f"{key[0]}:pair:{key[1]}")
    return FeatureMatrix(
        rows=np.vstack(rows), labels=tuple(labels), ids=tuple(ids)
    )


def _descriptor_vector(window: np.ndarray, cfg: RunConfig) -> np.ndarray:
    if cfg.method == "proposed":
        surf = to_surface(window)
        curve = dilation_volumes(surf, cfg.r_max, cfg.voxel_budget)
        pcurve = probability_curve(surf, cfg.deltas)
        return np.concatenate(
            (bm_descriptors(curve), voss_descriptors(pcurve))
        )
    if cfg.method == "fourier":
        return fourier_descriptors(window, cfg.rings)
    return gabor_descriptors(
        window,
        BaselineConfig(
            fourier_rings=cfg.rings,
            gabor_scales=cfg.gabor_scales,
            gabor_orientations=cfg.gabor_orientations,
            gabor_freq_range=cfg.gabor_freq_range,
        ),
    )


def extract_features(cfg: RunConfig) -> FeatureMatrix:
    """Compute descriptors for every window of every manifest entry.

    Work is spread over a thread pool (numba and FFT kernels release
    the GIL) but rows land in features.csv in manifest order, windows
    seeded per entry as (seed, entry index), so output is reproducible
    byte for byte. Per-entry failures are logged to errors.log and
    skipped; only a fully failed run raises.
    """
    cfg.validate()
    try:
        entries = load_manifest(cfg.manifest)
    except FraxelError as exc:
        raise ConfigError(f"bad manifest: {exc}") from exc
    if not entries:
        raise ConfigError("manifest lists no images")
    os.makedirs(cfg.out_dir, exist_ok=True)
    workers = cfg.threads or os.cpu_count() or 1

    def prep(item):
        t, entry = item
        try:
            img = load_image(entry.path)
            if cfg.align:
                img, _ = radon_align(img, cfg.angle_step)
            ws = extract_windows(
                img,
                cfg.window_size,
                cfg.windows_per_image,
                [cfg.seed, t],
                cfg.margin,
            )
            return t, ws.windows, None
        except (FraxelError, OSError) as exc:
            return t, (), f"{entry.path}: {exc}"

    with ThreadPoolExecutor(max_workers=workers) as pool:
        prepped = list(pool.map(prep, enumerate(entries)))

    failures: dict[tuple[int, int], str] = {}
    tasks = []
    for t, windows, err in prepped:
        if err is not None:
            failures[(t, -1)] = err
            continue
        for wi, win in enumerate(windows):
            tasks.append((t, wi, win))

    def describe(task):
        t, wi, win = task
        try:
            return t, wi, _descriptor_vector(win, cfg), None
        except FraxelError as exc:
            return t, wi, None, f"{entries[t].path}: window {wi}: {exc}"

    with ThreadPoolExecutor(max_workers=workers) as pool:
        outcomes = list(pool.map(describe, tasks))

    vectors: dict[tuple[int, int], np.ndarray] = {}
    for t, wi, vec, err in outcomes:
        if err is not None:
            failures[(t, wi)] = err
        else:
            vectors[(t, wi)] = vec

    log_path = os.path.join(cfg.out_dir, "errors.log")
    with open(log_path, "w", encoding="utf-8") as fh:
        for key in sorted(failures):
            fh.write(failures[key] + "\n")

    records = []
    for t, entry in enumerate(entries):
        for wi in sorted(wi for (tt, wi) in vectors if tt == t):
            records.append(
                SignatureRecord(
                    sample_id=entry.sample_id,
                    face=entry.face,
                    window=wi,
                    label=entry.label,
                    features=vectors[(t, wi)],
                )
            )
    if not records:
        raise FraxelError(
            f"no manifest entry produced features; see {log_path}"
        )
    write_features(os.path.join(cfg.out_dir, "features.csv"), records)
    return records_to_matrix(records)


def write_report(
    path: str | os.PathLike, report: EvalReport, extra: dict | None = None
) -> None:
    """Emit one evaluation as JSON with sorted keys (stable bytes)."""
    payload = {
        "nd": report.nd,
        "cr": report.cr,
        "kappa": report.kappa,
        "ae1": report.ae1,
        "ae2": report.ae2,
        "class_names": list(report.confusion.class_names),
        "confusion": report.confusion.counts.tolist(),
    }
    if extra:
        payload.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def write_sweep(path: str | os.PathLike, reports: list[EvalReport]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["k", "cr", "kappa", "ae1", "ae2"])
        for rep in reports:
            writer.writerow(
                [rep.nd]
                + [f"{v:.10g}" for v in (rep.cr, rep.kappa, rep.ae1, rep.ae2)]
            )


def sweep_descriptors(
    m: FeatureMatrix, k_max: int, cfg: RunConfig
) -> list[EvalReport]:
    """Cross-validate at every projection size k = 1..k_max and write
    the curve to sweep.csv under cfg.out_dir."""
    n = m.rows.shape[1]
    if not 1 <= k_max <= n:
        raise ParameterError(f"k_max must lie in [1, {n}]")
    if cfg.transform == "none":
        raise ParameterError("a sweep needs a projection transform")
    groups = sample_groups(m) if cfg.group_by == "sample_id" else None
    reports = []
    for k in range(1, k_max + 1):
        reports.append(
            cross_validate(
                m,
                folds=cfg.folds,
                seed=cfg.seed,
                c=cfg.svm_c,
                transform=cfg.transform,
                components=k,
                ridge=cfg.ridge,
                groups=groups,
            )
        )
    os.makedirs(cfg.out_dir, exist_ok=True)
    write_sweep(os.path.join(cfg.out_dir, "sweep.csv"), reports)
    return reports


def parse_config_file(path: str | os.PathLike) -> dict[str, str]:
    """Read `key = value` lines; '#' starts a comment, blanks ignored.

    Keys are normalized to lower-case with dashes turned into
    underscores so they mirror the CLI flag names.
    """
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path!r}")
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(
                    f"{path}:{lineno}: expected 'key = value', got {raw!r}"
                )
            key, value = line.split("=", 1)
            key = key.strip().lower().replace("-", "_")
            if not key:
                raise ConfigError(f"{path}:{lineno}: empty key")
            out[key] = value.strip()
    return out
