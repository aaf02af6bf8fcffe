import json
import os

import numpy as np
import pytest

from fraxel.errors import ConfigError, FraxelError, PairingError, ParameterError
from fraxel.fusion import FeatureMatrix
from fraxel.images import ManifestEntry, save_image, save_manifest, synth_fbm
from fraxel.pipeline import (
    RunConfig,
    SignatureRecord,
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


def _records(rows):
    out = []
    for sample_id, face, window, label, feats in rows:
        out.append(
            SignatureRecord(
                sample_id=sample_id,
                face=face,
                window=window,
                label=label,
                features=np.asarray(feats, dtype=np.float64),
            )
        )
    return out


def _write_corpus(tmp_path, images_per_class=1, size=256, classes=(0.2, 0.8)):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    entries = []
    for ci, hurst in enumerate(classes):
        label = f"h{round(hurst * 100):03d}"
        for t in range(images_per_class):
            img = synth_fbm(size, size, hurst=hurst, seed=1000 * ci + t)
            name = f"{label}-{t}.pgm"
            save_image(corpus / name, img)
            entries.append(
                ManifestEntry(
                    path=corpus / name,
                    label=label,
                    sample_id=f"{label}-{t}",
                    face="superior",
                )
            )
    manifest = corpus / "manifest.csv"
    save_manifest(manifest, entries)
    return manifest


def test_feature_file_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(0)
    records = _records(
        [
            ("s0", "superior", 0, "a", rng.normal(size=5) * 1e-7),
            ("s0", "superior", 1, "a", rng.normal(size=5) * 1e9),
            ("s1", "inferior", 0, "b", rng.normal(size=5)),
        ]
    )
    path = tmp_path / "features.csv"
    write_features(path, records)
    text = path.read_text()
    assert text.startswith("sample_id,face,window,label,f0,f1,f2,f3,f4\n")
    assert "\r" not in text
    back = read_features(path)
    assert len(back) == 3
    for orig, loaded in zip(records, back):
        assert loaded.sample_id == orig.sample_id
        assert loaded.face == orig.face
        assert loaded.window == orig.window
        assert loaded.label == orig.label
        assert loaded.features.tobytes() == orig.features.tobytes()


def test_read_features_rejects_malformed_files(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("sample,face,window,label,f0\na,sup,0,l,1.0\n")
    with pytest.raises(FraxelError):
        read_features(path)
    path.write_text("sample_id,face,window,label,f0\na,superior,0,l\n")
    with pytest.raises(FraxelError):
        read_features(path)
    path.write_text("sample_id,face,window,label,f0\na,superior,zero,l,1.0\n")
    with pytest.raises(FraxelError):
        read_features(path)


def test_matrix_record_round_trip():
    records = _records(
        [
            ("s0", "superior", 0, "a", [1.0, 2.0]),
            ("s1", "inferior", 3, "b", [3.0, 4.0]),
        ]
    )
    m = records_to_matrix(records)
    assert m.ids == ("s0:superior:0", "s1:inferior:3")
    assert m.labels == ("a", "b")
    back = matrix_to_records(m)
    assert [(r.sample_id, r.face, r.window, r.label) for r in back] == [
        ("s0", "superior", 0, "a"),
        ("s1", "inferior", 3, "b"),
    ]
    assert sample_groups(m) == ("s0", "s1")


def test_sample_ids_may_contain_colons():
    records = _records([("run:3:s0", "superior", 2, "a", [1.0])])
    m = records_to_matrix(records)
    assert m.ids == ("run:3:s0:superior:2",)
    back = matrix_to_records(m)
    assert back[0].sample_id == "run:3:s0"
    assert back[0].window == 2


def test_pair_faces_concatenates_partner_features():
    records = _records(
        [
            ("s0", "superior", 0, "a", [1.0, 2.0]),
            ("s0", "inferior", 0, "a", [3.0, 4.0]),
            ("s1", "inferior", 0, "b", [7.0, 8.0]),
            ("s1", "superior", 0, "b", [5.0, 6.0]),
        ]
    )
    paired = pair_faces(records_to_matrix(records))
    assert paired.ids == ("s0:pair:0", "s1:pair:0")
    assert paired.labels == ("a", "b")
    assert paired.rows.tolist() == [[1.0, 2.0, 3.0, 4.0], [5.0, 6.0, 7.0, 8.0]]


def test_pair_faces_reports_missing_partners():
    records = _records(
        [
            ("s0", "superior", 0, "a", [1.0]),
            ("s0", "superior", 1, "a", [2.0]),
            ("s0", "inferior", 0, "a", [3.0]),
        ]
    )
    with pytest.raises(PairingError, match="s0:inferior:1"):
        pair_faces(records_to_matrix(records))


def test_pair_faces_rejects_label_conflicts_and_foreign_faces():
    conflicted = _records(
        [
            ("s0", "superior", 0, "a", [1.0]),
            ("s0", "inferior", 0, "b", [2.0]),
        ]
    )
    with pytest.raises(PairingError):
        pair_faces(records_to_matrix(conflicted))
    foreign = _records([("s0", "pair", 0, "a", [1.0])])
    with pytest.raises(ParameterError):
        pair_faces(records_to_matrix(foreign))


def test_run_config_validation_collects_problems():
    cfg = RunConfig(manifest="/nonexistent/m.csv", method="wavelet", folds=1)
    with pytest.raises(ConfigError) as err:
        cfg.validate()
    text = str(err.value)
    assert "manifest" in text
    assert "method" in text
    assert "folds" in text
    RunConfig(method="proposed").validate(need_manifest=False)
    with pytest.raises(ConfigError):
        RunConfig(deltas=(4, 2)).validate(need_manifest=False)
    with pytest.raises(ConfigError):
        RunConfig(gabor_freq_range=(0.4, 0.1)).validate(need_manifest=False)
    with pytest.raises(ConfigError):
        RunConfig(transform="fisher").validate(need_manifest=False)


def test_extract_features_end_to_end(tmp_path):
    manifest = _write_corpus(tmp_path)
    out_dir = tmp_path / "run"
    cfg = RunConfig(
        manifest=str(manifest),
        out_dir=str(out_dir),
        window_size=64,
        windows_per_image=4,
        seed=0,
        r_max=3.0,
        deltas=(2, 4, 8),
    )
    m = extract_features(cfg)
    radii_count = 8
    assert m.rows.shape == (8, radii_count + 3)
    assert set(m.labels) == {"h020", "h080"}
    assert (out_dir / "features.csv").exists()
    assert (out_dir / "errors.log").read_text() == ""
    loaded = records_to_matrix(read_features(out_dir / "features.csv"))
    assert loaded.rows.tobytes() == m.rows.tobytes()
    assert loaded.ids == m.ids


def test_extract_features_is_thread_count_invariant(tmp_path):
    manifest = _write_corpus(tmp_path)
    outs = []
    for threads in (1, 4):
        out_dir = tmp_path / f"run-t{threads}"
        cfg = RunConfig(
            manifest=str(manifest),
            out_dir=str(out_dir),
            window_size=48,
            windows_per_image=3,
            seed=5,
            r_max=2.0,
            deltas=(2, 4),
            threads=threads,
        )
        extract_features(cfg)
        outs.append((out_dir / "features.csv").read_bytes())
    assert outs[0] == outs[1]


def test_extract_features_logs_failures_and_continues(tmp_path):
    manifest = _write_corpus(tmp_path)
    corpus = manifest.parent
    (corpus / "broken.pgm").write_bytes(b"P5\n64 64\n255\nshort")
    rows = manifest.read_text().splitlines()
    rows.append("broken.pgm,h020,broken-0,superior")
    manifest.write_text("\n".join(rows) + "\n")
    out_dir = tmp_path / "run"
    cfg = RunConfig(
        manifest=str(manifest),
        out_dir=str(out_dir),
        window_size=64,
        windows_per_image=2,
        seed=0,
        r_max=2.0,
        deltas=(2, 4),
    )
    m = extract_features(cfg)
    assert m.rows.shape[0] == 4
    log = (out_dir / "errors.log").read_text()
    assert "broken.pgm" in log


def test_extract_features_fails_when_nothing_extracts(tmp_path):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    (corpus / "only.pgm").write_bytes(b"P5\n2 2\n255\nnope")
    manifest = corpus / "manifest.csv"
    manifest.write_text("path,label,sample_id,face\nonly.pgm,l,s,superior\n")
    cfg = RunConfig(manifest=str(manifest), out_dir=str(tmp_path / "run"))
    with pytest.raises(FraxelError):
        extract_features(cfg)


def test_report_and_sweep_outputs(tmp_path):
    rng = np.random.default_rng(1)
    rows = np.vstack(
        [
            rng.normal(size=(20, 4)) + (0.0, 0.0, 0.0, 6.0),
            rng.normal(size=(20, 4)),
        ]
    )
    labels = ("a",) * 20 + ("b",) * 20
    ids = tuple(f"s{t}:superior:0" for t in range(40))
    m = FeatureMatrix(rows=rows, labels=labels, ids=ids)
    cfg = RunConfig(out_dir=str(tmp_path), folds=4, transform="scatter")
    reports = sweep_descriptors(m, k_max=3, cfg=cfg)
    assert [r.nd for r in reports] == [1, 2, 3]
    sweep = (tmp_path / "sweep.csv").read_text().splitlines()
    assert sweep[0] == "k,cr,kappa,ae1,ae2"
    assert len(sweep) == 4

    path = tmp_path / "report.json"
    write_report(path, reports[-1], {"seed": 0, "method": "proposed"})
    raw = path.read_text()
    assert raw.endswith("\n")
    payload = json.loads(raw)
    assert payload["seed"] == 0
    assert payload["method"] == "proposed"
    assert payload["nd"] == 3
    assert payload["confusion"] == reports[-1].confusion.counts.tolist()

    with pytest.raises(ParameterError):
        sweep_descriptors(m, k_max=9, cfg=cfg)
    with pytest.raises(ParameterError):
        sweep_descriptors(m, k_max=2, cfg=RunConfig(out_dir=str(tmp_path), transform="none"))


def test_parse_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(
        "# run settings\n"
        "Window-Size = 96   # px\n"
        "method=gabor\n"
        "\n"
        "unknown-key = whatever\n"
    )
    cfg = parse_config_file(path)
    assert cfg["window_size"] == "96"
    assert cfg["method"] == "gabor"
    assert cfg["unknown_key"] == "whatever"
    bad = tmp_path / "bad.cfg"
    bad.write_text("just some words\n")
    with pytest.raises(ConfigError):
        parse_config_file(bad)
    with pytest.raises(ConfigError):
        parse_config_file(tmp_path / "missing.cfg")
