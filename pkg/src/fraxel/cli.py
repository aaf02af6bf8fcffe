"""Command-line entry point: `fraxel <subcommand> [flags]`.

Subcommands: synth (fBm corpus), extract (descriptors to features.csv),
pair (merge faces), eval (cross-validated report), sweep (CR versus
projection size), metrics (recompute scores from a confusion matrix).

Every flag may also come from a `key = value` config file passed with
--config; explicit flags win over the file, the file wins over built-in
defaults. Exit codes: 0 success, 1 run error, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from .baselines import DEFAULT_GABOR_FREQ_RANGE, DEFAULT_RINGS
from .classify import (
    ConfusionMatrix,
    cross_validate,
    format_report_table,
    metrics_from_confusion,
)
from .errors import ConfigError, FraxelError
from .images import ManifestEntry, save_image, save_manifest, synth_fbm
from .minkowski import DEFAULT_R_MAX, DEFAULT_VOXEL_BUDGET
from .pipeline import (
    GROUP_MODES,
    METHODS,
    RunConfig,
    extract_features,
    matrix_to_records,
    pair_faces,
    parse_config_file,
    read_features,
    records_to_matrix,
    sample_groups,
    sweep_descriptors,
    write_features,
    write_report,
)
from .voss import DEFAULT_DELTAS


def _ints(text: str) -> tuple[int, ...]:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ValueError("expected a comma-separated integer list")
    return tuple(int(p) for p in parts)


def _floats(text: str) -> tuple[float, ...]:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ValueError("expected a comma-separated number list")
    return tuple(float(p) for p in parts)


def _freq_pair(text: str) -> tuple[float, float]:
    vals = _floats(text)
    if len(vals) != 2:
        raise ValueError("expected exactly two numbers: low,high")
    return vals[0], vals[1]


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _choice(options):
    def conv(text: str) -> str:
        if text not in options:
            raise ValueError(f"must be one of {', '.join(options)}")
        return text

    return conv


# Per-subcommand option schema: dest -> (default, converter applied to
# config-file strings). CLI-provided values are already converted by
# argparse and simply take precedence.
_COMMON_EVAL = {
    "folds": (10, int),
    "seed": (0, int),
    "svm_c": (1.0, float),
    "transform": ("scatter", _choice(("scatter", "pca", "none"))),
    "ridge": (None, float),
    "group_by": ("none", _choice(GROUP_MODES)),
    "out_dir": (".", str),
}

_SCHEMAS: dict[str, dict] = {
    "synth": {
        "out_dir": (None, str),
        "hurst": ((0.2, 0.5, 0.8), _floats),
        "images": (3, int),
        "width": (1000, int),
        "height": (1000, int),
        "seed": (0, int),
    },
    "extract": {
        "manifest": (None, str),
        "out_dir": (".", str),
        "method": ("proposed", _choice(METHODS)),
        "window_size": (200, int),
        "windows_per_image": (20, int),
        "seed": (0, int),
        "align": (False, _bool),
        "angle_step": (1.0, float),
        "margin": (0, int),
        "r_max": (DEFAULT_R_MAX, float),
        "deltas": (DEFAULT_DELTAS, _ints),
        "voxel_budget": (DEFAULT_VOXEL_BUDGET, int),
        "rings": (DEFAULT_RINGS, int),
        "gabor_scales": (4, int),
        "gabor_orientations": (6, int),
        "gabor_freq": (DEFAULT_GABOR_FREQ_RANGE, _freq_pair),
        "threads": (None, int),
    },
    "pair": {
        "features": (None, str),
        "out": (None, str),
    },
    "eval": {
        "features": (None, str),
        "components": (10, int),
        "name": ("run", str),
        **_COMMON_EVAL,
    },
    "sweep": {
        "features": (None, str),
        "k_max": (30, int),
        **_COMMON_EVAL,
    },
    "metrics": {
        "confusion": (None, str),
        "labels": (None, lambda s: tuple(p.strip() for p in s.split(","))),
        "out": (None, str),
    },
}


def _merge(args: argparse.Namespace, command: str) -> dict:
    """CLI value if given, else config-file value, else default."""
    schema = _SCHEMAS[command]
    file_vals = {}
    if getattr(args, "config", None):
        file_vals = parse_config_file(args.config)
    out = {}
    for key, (default, conv) in schema.items():
        value = getattr(args, key, None)
        if value is None and key in file_vals:
            try:
                value = conv(file_vals[key])
            except ValueError as exc:
                raise ConfigError(f"config key {key!r}: {exc}") from exc
        if value is None:
            value = default
        out[key] = value
    return out


def _require(ns: dict, key: str) -> None:
    if ns[key] is None:
        raise ConfigError(f"--{key.replace('_', '-')} is required")


def _load_matrix(path: str):
    if not path or not os.path.isfile(path):
        raise ConfigError(f"features file not found: {path!r}")
    return records_to_matrix(read_features(path))


def cmd_synth(args: argparse.Namespace) -> int:
    ns = _merge(args, "synth")
    _require(ns, "out_dir")
    if ns["images"] < 1:
        raise ConfigError("--images must be >= 1")
    if ns["width"] < 16 or ns["height"] < 16:
        raise ConfigError("--width and --height must be >= 16")
    if ns["seed"] < 0:
        raise ConfigError("--seed must be non-negative")
    if any(not 0.0 < h < 1.0 for h in ns["hurst"]):
        raise ConfigError("every hurst exponent must lie in (0, 1)")
    labels = [f"h{round(h * 100):03d}" for h in ns["hurst"]]
    if len(set(labels)) != len(labels):
        raise ConfigError("hurst values collide after rounding to 0.01")

    os.makedirs(ns["out_dir"], exist_ok=True)
    entries = []
    for ci, (h, label) in enumerate(zip(ns["hurst"], labels)):
        for t in range(ns["images"]):
            img = synth_fbm(
                ns["width"], ns["height"], h, ns["seed"] + 1000 * ci + t
            )
            name = f"{label}-{t}.pgm"
            save_image(os.path.join(ns["out_dir"], name), img)
            entries.append(
                ManifestEntry(
                    path=name,
                    label=label,
                    sample_id=f"{label}-{t}",
                    face="superior",
                )
            )
    save_manifest(os.path.join(ns["out_dir"], "manifest.csv"), entries)
    print(f"wrote {len(entries)} images and manifest.csv to {ns['out_dir']}")
    return 0


def cmd_extract(args: argparse.Namespace) -> int:
    ns = _merge(args, "extract")
    _require(ns, "manifest")
    cfg = RunConfig(
        manifest=ns["manifest"],
        out_dir=ns["out_dir"],
        method=ns["method"],
        window_size=ns["window_size"],
        windows_per_image=ns["windows_per_image"],
        seed=ns["seed"],
        align=bool(ns["align"]),
        angle_step=ns["angle_step"],
        margin=ns["margin"],
        r_max=ns["r_max"],
        deltas=tuple(ns["deltas"]),
        voxel_budget=ns["voxel_budget"],
        rings=ns["rings"],
        gabor_scales=ns["gabor_scales"],
        gabor_orientations=ns["gabor_orientations"],
        gabor_freq_range=tuple(ns["gabor_freq"]),
        threads=ns["threads"],
    )
    m = extract_features(cfg)
    print(
        f"wrote {m.rows.shape[0]} rows x {m.rows.shape[1]} features to "
        f"{os.path.join(cfg.out_dir, 'features.csv')}"
    )
    return 0


def cmd_pair(args: argparse.Namespace) -> int:
    ns = _merge(args, "pair")
    _require(ns, "features")
    m = _load_matrix(ns["features"])
    paired = pair_faces(m)
    out = ns["out"] or os.path.join(
        os.path.dirname(os.path.abspath(ns["features"])),
        "features_paired.csv",
    )
    write_features(out, matrix_to_records(paired))
    print(
        f"wrote {paired.rows.shape[0]} paired rows x "
        f"{paired.rows.shape[1]} features to {out}"
    )
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    ns = _merge(args, "eval")
    _require(ns, "features")
    m = _load_matrix(ns["features"])
    n = m.rows.shape[1]
    if ns["transform"] != "none" and not 1 <= ns["components"] <= n:
        raise ConfigError(f"--components must lie in [1, {n}]")
    groups = sample_groups(m) if ns["group_by"] == "sample_id" else None
    report = cross_validate(
        m,
        folds=ns["folds"],
        seed=ns["seed"],
        c=ns["svm_c"],
        transform=ns["transform"],
        components=ns["components"],
        ridge=ns["ridge"],
        groups=groups,
    )
    os.makedirs(ns["out_dir"], exist_ok=True)
    write_report(
        os.path.join(ns["out_dir"], "report.json"),
        report,
        extra={
            "method": ns["name"],
            "folds": ns["folds"],
            "seed": ns["seed"],
            "svm_c": ns["svm_c"],
            "transform": ns["transform"],
            "components": ns["components"],
            "ridge": ns["ridge"],
            "group_by": ns["group_by"],
        },
    )
    print(format_report_table([(ns["name"], report)]))
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    ns = _merge(args, "sweep")
    _require(ns, "features")
    if ns["transform"] == "none":
        raise ConfigError("--transform none makes a sweep meaningless")
    m = _load_matrix(ns["features"])
    n = m.rows.shape[1]
    if not 1 <= ns["k_max"] <= n:
        raise ConfigError(f"--k-max must lie in [1, {n}]")
    cfg = RunConfig(
        out_dir=ns["out_dir"],
        transform=ns["transform"],
        ridge=ns["ridge"],
        folds=ns["folds"],
        seed=ns["seed"],
        svm_c=ns["svm_c"],
        group_by=ns["group_by"],
    )
    cfg.validate(need_manifest=False)
    reports = sweep_descriptors(m, ns["k_max"], cfg)
    best = max(reports, key=lambda r: r.cr)
    print(
        f"wrote {len(reports)} rows to "
        f"{os.path.join(ns['out_dir'], 'sweep.csv')}; "
        f"best k={best.nd} with CR={best.cr:.2f}"
    )
    return 0


def _read_confusion(path: str) -> np.ndarray:
    if not path or not os.path.isfile(path):
        raise ConfigError(f"confusion file not found: {path!r}")
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for line in csv.reader(fh):
            if not line or all(not cell.strip() for cell in line):
                continue
            try:
                rows.append([int(cell) for cell in line])
            except ValueError as exc:
                raise FraxelError(f"confusion matrix: {exc}") from exc
    if not rows or any(len(r) != len(rows) for r in rows):
        raise FraxelError("confusion matrix must be square and non-empty")
    return np.array(rows, dtype=np.int64)


def cmd_metrics(args: argparse.Namespace) -> int:
    ns = _merge(args, "metrics")
    _require(ns, "confusion")
    counts = _read_confusion(ns["confusion"])
    k = counts.shape[0]
    labels = ns["labels"] or tuple(f"c{t}" for t in range(k))
    if len(labels) != k:
        raise ConfigError(f"--labels must name exactly {k} classes")
    cm = ConfusionMatrix(counts=counts, class_names=labels)
    cr, kappa, ae1, ae2 = metrics_from_confusion(cm)
    print(f"CR={cr:.6f}")
    print(f"kappa={kappa:.6f}")
    print(f"AE1={ae1:.6f}")
    print(f"AE2={ae2:.6f}")
    if ns["out"]:
        payload = {
            "cr": cr,
            "kappa": kappa,
            "ae1": ae1,
            "ae2": ae2,
            "class_names": list(labels),
            "confusion": counts.tolist(),
        }
        with open(ns["out"], "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True, indent=2)
            fh.write("\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fraxel",
        description="Multiscale fractal texture descriptors and evaluation",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    def add_config(p):
        p.add_argument(
            "--config", help="key = value file supplying flag defaults"
        )

    p = subs.add_parser("synth", help="generate a synthetic fBm corpus")
    p.add_argument("--out-dir", help="directory for images and manifest.csv")
    p.add_argument(
        "--hurst",
        type=_floats,
        help="comma-separated Hurst exponents, one class each (default 0.2,0.5,0.8)",
    )
    p.add_argument("--images", type=int, help="images per class (default 3)")
    p.add_argument("--width", type=int, help="image width (default 1000)")
    p.add_argument("--height", type=int, help="image height (default 1000)")
    p.add_argument("--seed", type=int, help="base seed (default 0)")
    add_config(p)
    p.set_defaults(func=cmd_synth)

    p = subs.add_parser("extract", help="compute window descriptors")
    p.add_argument("--manifest", help="corpus manifest CSV")
    p.add_argument("--out-dir", help="output directory (default .)")
    p.add_argument(
        "--method",
        choices=METHODS,
        help="descriptor family (default proposed)",
    )
    p.add_argument("--window-size", type=int, help="square window side (default 200)")
    p.add_argument(
        "--windows-per-image", type=int, help="windows sampled per image (default 20)"
    )
    p.add_argument("--seed", type=int, help="window sampling seed (default 0)")
    p.add_argument(
        "--align",
        action="store_const",
        const=True,
        help="rotate each image to its dominant axis first",
    )
    p.add_argument(
        "--angle-step", type=float, help="alignment search step, degrees (default 1)"
    )
    p.add_argument("--margin", type=int, help="border margin in pixels (default 0)")
    p.add_argument("--r-max", type=float, help="largest dilation radius (default 10)")
    p.add_argument(
        "--deltas",
        type=_ints,
        help="cube sides for the probability curve (default 2,3,4,6,8,11,16,23,32)",
    )
    p.add_argument(
        "--voxel-budget", type=int, help="distance-volume size cap (default 2^31)"
    )
    p.add_argument("--rings", type=int, help="Fourier ring count (default 30)")
    p.add_argument("--gabor-scales", type=int, help="Gabor scale count (default 4)")
    p.add_argument(
        "--gabor-orientations", type=int, help="Gabor orientation count (default 6)"
    )
    p.add_argument(
        "--gabor-freq",
        type=_freq_pair,
        help="Gabor frequency range low,high (default 0.05,0.4)",
    )
    p.add_argument("--threads", type=int, help="worker threads (default: logical CPUs)")
    add_config(p)
    p.set_defaults(func=cmd_extract)

    p = subs.add_parser("pair", help="concatenate superior and inferior faces")
    p.add_argument("--features", help="features.csv produced by extract")
    p.add_argument("--out", help="output CSV (default features_paired.csv)")
    add_config(p)
    p.set_defaults(func=cmd_pair)

    def add_eval_flags(p, with_components: bool):
        p.add_argument("--features", help="features CSV to evaluate")
        p.add_argument("--out-dir", help="output directory (default .)")
        p.add_argument("--folds", type=int, help="cross-validation folds (default 10)")
        p.add_argument("--seed", type=int, help="fold shuffle seed (default 0)")
        p.add_argument("--svm-c", type=float, help="SVM regularization C (default 1)")
        p.add_argument(
            "--transform",
            choices=("scatter", "pca", "none"),
            help="projection fitted on training folds (default scatter)",
        )
        if with_components:
            p.add_argument(
                "--components", type=int, help="projected feature count (default 10)"
            )
        p.add_argument(
            "--ridge",
            type=float,
            help="scatter ridge; default 1e-6 * trace/n",
        )
        p.add_argument(
            "--group-by",
            choices=GROUP_MODES,
            help="fold windows by sample_id instead of individually",
        )
        add_config(p)

    p = subs.add_parser("eval", help="cross-validated classification report")
    add_eval_flags(p, with_components=True)
    p.add_argument("--name", help="method name for the report table")
    p.set_defaults(func=cmd_eval)

    p = subs.add_parser("sweep", help="evaluate across projection sizes 1..k")
    add_eval_flags(p, with_components=False)
    p.add_argument("--k-max", type=int, help="largest projection size (default 30)")
    p.set_defaults(func=cmd_sweep)

    p = subs.add_parser("metrics", help="recompute scores from a confusion matrix")
    p.add_argument("--confusion", help="CSV of integer counts, rows = true class")
    p.add_argument(
        "--labels",
        type=lambda s: tuple(x.strip() for x in s.split(",")),
        help="class names (default c0..cK-1)",
    )
    p.add_argument("--out", help="also write the metrics as JSON here")
    add_config(p)
    p.set_defaults(func=cmd_metrics)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"fraxel: config error: {exc}", file=sys.stderr)
        return 2
    except FraxelError as exc:
        print(f"fraxel: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
