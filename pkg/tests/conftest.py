import json
import time

import pytest

from fraxel.cli import main


def run_pipeline(base, tag):
    """Synthesize the 3-class fBm corpus and run extract + eval on it
    with stock settings. Returns paths and per-phase wall times."""
    corpus = base / f"corpus-{tag}"
    run = base / f"run-{tag}"
    evaldir = base / f"eval-{tag}"

    t0 = time.perf_counter()
    assert main(["synth", "--out-dir", str(corpus), "--seed", "0"]) == 0
    t1 = time.perf_counter()
    assert (
        main(
            [
                "extract",
                "--manifest",
                str(corpus / "manifest.csv"),
                "--out-dir",
                str(run),
                "--seed",
                "0",
            ]
        )
        == 0
    )
    t2 = time.perf_counter()
    assert (
        main(
            [
                "eval",
                "--features",
                str(run / "features.csv"),
                "--out-dir",
                str(evaldir),
                "--name",
                "proposed",
            ]
        )
        == 0
    )
    t3 = time.perf_counter()
    report = json.loads((evaldir / "report.json").read_text())
    return {
        "features": run / "features.csv",
        "report_path": evaldir / "report.json",
        "report": report,
        "synth_s": t1 - t0,
        "extract_s": t2 - t1,
        "eval_s": t3 - t2,
        "total_s": t3 - t0,
    }


@pytest.fixture(scope="session")
def synthetic_run(tmp_path_factory):
    """One full synth -> extract -> eval pass, shared by the end-to-end
    acceptance checks."""
    base = tmp_path_factory.mktemp("acceptance")
    return run_pipeline(base, "a")
