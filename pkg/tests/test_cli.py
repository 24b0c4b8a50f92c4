"""End-to-end command line checks, run through subprocesses like a user would.

Exit code contract: 2 bad flags/params, 3 unreadable or malformed files,
4 infeasible detection, 5 breakpoint validation failures.
"""

import csv
import json
import os
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest


def run_cli(*args, env_extra=None):
    env = dict(os.environ)
    if env_extra:
        env.update(env_extra)
    return subprocess.run(
        [sys.executable, "-m", "segscan", *args],
        capture_output=True,
        text=True,
        env=env,
    )


@pytest.fixture(scope="module")
def clean_case(tmp_path_factory):
    """Noiseless piecewise constant data: detection should be exact."""
    out = tmp_path_factory.mktemp("clean")
    proc = run_cli(
        "generate", "--kind", "constant", "--T", "180", "--dims", "2",
        "--n-bkps", "3", "--noise", "0", "--seed", "14", "--out", str(out),
    )
    assert proc.returncode == 0, proc.stderr
    return out


def test_generate_writes_csv_and_truth(clean_case):
    csv_path = clean_case / "signal.csv"
    truth_path = clean_case / "truth.json"
    assert csv_path.is_file() and truth_path.is_file()
    with open(csv_path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 180
    assert all(len(row) == 2 for row in rows)
    truth = json.loads(truth_path.read_text())
    assert truth["T"] == 180
    assert truth["bkps"][-1] == 180
    assert len(truth["bkps"]) == 4


def test_generate_header_flag(tmp_path):
    proc = run_cli(
        "generate", "--kind", "linear", "--T", "30", "--dims", "3",
        "--n-bkps", "1", "--out", str(tmp_path), "--header",
    )
    assert proc.returncode == 0, proc.stderr
    with open(tmp_path / "signal.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["dim0", "dim1", "dim2"]
    assert len(rows) == 31


def test_generate_normal_flag_rules(tmp_path):
    ok = run_cli("generate", "--kind", "normal", "--T", "100", "--n-bkps", "2",
                 "--out", str(tmp_path / "a"))
    assert ok.returncode == 0, ok.stderr
    bad_dims = run_cli("generate", "--kind", "normal", "--T", "100", "--dims", "3",
                       "--out", str(tmp_path / "b"))
    assert bad_dims.returncode == 2
    bad_noise = run_cli("generate", "--kind", "normal", "--T", "100", "--noise", "1.0",
                        "--out", str(tmp_path / "c"))
    assert bad_noise.returncode == 2


def test_generate_infeasible_spacing(tmp_path):
    proc = run_cli("generate", "--kind", "constant", "--T", "9", "--n-bkps", "4",
                   "--out", str(tmp_path))
    assert proc.returncode == 2
    assert "SpacingInfeasibleError" in proc.stderr


def test_detect_roundtrip_and_eval(clean_case, tmp_path):
    truth = json.loads((clean_case / "truth.json").read_text())
    detect = run_cli(
        "detect", "--input", str(clean_case / "signal.csv"),
        "--method", "dynp", "--cost", "l2", "--n-bkps", "3",
    )
    assert detect.returncode == 0, detect.stderr
    payload = json.loads(detect.stdout)
    assert payload["bkps"] == truth["bkps"]
    assert set(payload) == {
        "bkps", "contrast", "method", "cost", "stopping",
        "n_cost_evals", "n_pruned", "elapsed_ms",
    }
    assert payload["method"] == "dynp"
    assert payload["cost"] == "l2"
    assert payload["stopping"] == {"rule": "n-bkps", "value": 3}

    pred_path = tmp_path / "pred.json"
    pred_path.write_text(detect.stdout)
    evaled = run_cli("eval", "--truth", str(clean_case / "truth.json"),
                     "--pred", str(pred_path), "--margin", "0")
    assert evaled.returncode == 0, evaled.stderr
    scores = json.loads(evaled.stdout)
    assert set(scores) == {"hausdorff", "rand_index", "precision", "recall"}
    assert scores["hausdorff"] == 0
    assert scores["rand_index"] == 1.0
    assert scores["precision"] == 1.0 and scores["recall"] == 1.0


def test_detect_is_deterministic_apart_from_timing(clean_case):
    args = ("detect", "--input", str(clean_case / "signal.csv"),
            "--method", "pelt", "--pen", "0.5")
    first = json.loads(run_cli(*args).stdout)
    second = json.loads(run_cli(*args).stdout)
    first.pop("elapsed_ms")
    second.pop("elapsed_ms")
    assert first == second


def test_detect_every_method_runs(clean_case):
    variants = [
        ("dynp", ["--n-bkps", "3"]),
        ("dynp", ["--epsilon", "1e-6"]),
        ("pelt", ["--pen", "0.5"]),
        ("binseg", ["--n-bkps", "3"]),
        ("bottomup", ["--epsilon", "1e-6"]),
        ("window", ["--n-bkps", "3", "--window-width", "24"]),
    ]
    for method, extra in variants:
        proc = run_cli("detect", "--input", str(clean_case / "signal.csv"),
                       "--method", method, *extra)
        assert proc.returncode == 0, (method, proc.stderr)
        assert json.loads(proc.stdout)["method"] == method


def test_detect_cost_variants(clean_case):
    for cost, extra in [
        ("normal", []),
        ("linear", []),
        ("ar", ["--order", "2"]),
        ("rbf", ["--gamma", "0.5"]),
        ("rbf", []),
        ("mahalanobis", []),
    ]:
        proc = run_cli("detect", "--input", str(clean_case / "signal.csv"),
                       "--method", "binseg", "--cost", cost, "--n-bkps", "2",
                       "--min-size", "6", *extra)
        assert proc.returncode == 0, (cost, proc.stderr)


def test_detect_flag_combinations_rejected(clean_case):
    signal = str(clean_case / "signal.csv")
    cases = [
        ["--method", "pelt", "--n-bkps", "2"],
        ["--method", "pelt", "--pen", "1", "--n-bkps", "2"],
        ["--method", "dynp", "--pen", "1"],
        ["--method", "dynp"],
        ["--method", "binseg", "--n-bkps", "2", "--gamma", "0.5"],
        ["--method", "binseg", "--n-bkps", "2", "--order", "3"],
        ["--method", "binseg", "--n-bkps", "2", "--window-width", "20"],
        ["--method", "window", "--n-bkps", "2"],
        ["--method", "dynp", "--n-bkps", "2", "--min-size", "0"],
    ]
    for extra in cases:
        proc = run_cli("detect", "--input", signal, *extra)
        assert proc.returncode == 2, extra


def test_detect_io_errors(tmp_path, clean_case):
    missing = run_cli("detect", "--input", str(tmp_path / "nope.csv"),
                      "--method", "pelt", "--pen", "1")
    assert missing.returncode == 3

    ragged = tmp_path / "ragged.csv"
    ragged.write_text("1.0,2.0\n3.0\n")
    proc = run_cli("detect", "--input", str(ragged), "--method", "pelt", "--pen", "1")
    assert proc.returncode == 3
    assert "line 2" in proc.stderr

    words = tmp_path / "words.csv"
    words.write_text("1.0\nbanana\n")
    proc = run_cli("detect", "--input", str(words), "--method", "pelt", "--pen", "1")
    assert proc.returncode == 3
    assert "line 2" in proc.stderr

    empty = tmp_path / "empty.csv"
    empty.write_text("")
    proc = run_cli("detect", "--input", str(empty), "--method", "pelt", "--pen", "1")
    assert proc.returncode == 3

    holes = tmp_path / "holes.csv"
    holes.write_text("1.0\nnan\n")
    proc = run_cli("detect", "--input", str(holes), "--method", "pelt", "--pen", "1")
    assert proc.returncode == 3


def test_detect_infeasible_is_exit_4(clean_case):
    proc = run_cli("detect", "--input", str(clean_case / "signal.csv"),
                   "--method", "dynp", "--n-bkps", "400")
    assert proc.returncode == 4
    assert "InfeasibleError" in proc.stderr
    proc = run_cli("detect", "--input", str(clean_case / "signal.csv"),
                   "--method", "window", "--n-bkps", "1", "--window-width", "500")
    assert proc.returncode == 4
    assert "WindowTooLargeError" in proc.stderr


def test_eval_validation_failures(clean_case, tmp_path):
    truth_path = str(clean_case / "truth.json")

    unsorted = tmp_path / "unsorted.json"
    unsorted.write_text(json.dumps({"bkps": [90, 30, 180]}))
    proc = run_cli("eval", "--truth", truth_path, "--pred", str(unsorted))
    assert proc.returncode == 5
    assert "NotSortedError" in proc.stderr

    wrong_t = tmp_path / "wrong_t.json"
    wrong_t.write_text(json.dumps({"T": 200, "bkps": [50, 200]}))
    proc = run_cli("eval", "--truth", truth_path, "--pred", str(wrong_t))
    assert proc.returncode == 5
    assert "MismatchedLengthError" in proc.stderr

    short = tmp_path / "short.json"
    short.write_text(json.dumps({"bkps": [50, 170]}))
    proc = run_cli("eval", "--truth", truth_path, "--pred", str(short))
    assert proc.returncode == 5
    assert "MissingTerminalError" in proc.stderr

    nokey = tmp_path / "nokey.json"
    nokey.write_text(json.dumps({"ends": [180]}))
    proc = run_cli("eval", "--truth", truth_path, "--pred", str(nokey))
    assert proc.returncode == 3

    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    proc = run_cli("eval", "--truth", truth_path, "--pred", str(broken))
    assert proc.returncode == 3

    fine = tmp_path / "fine.json"
    fine.write_text(json.dumps({"bkps": [60, 180]}))
    proc = run_cli("eval", "--truth", truth_path, "--pred", str(fine), "--margin", "-2")
    assert proc.returncode == 2
    assert "BadParamError" in proc.stderr


def test_threads_env_var(clean_case):
    signal = str(clean_case / "signal.csv")
    good = run_cli("detect", "--input", signal, "--method", "pelt", "--pen", "1",
                   env_extra={"SEGSCAN_THREADS": "4"})
    assert good.returncode == 0, good.stderr
    auto = run_cli("detect", "--input", signal, "--method", "pelt", "--pen", "1",
                   env_extra={"SEGSCAN_THREADS": "0"})
    assert auto.returncode == 0
    bad = run_cli("detect", "--input", signal, "--method", "pelt", "--pen", "1",
                  env_extra={"SEGSCAN_THREADS": "many"})
    assert bad.returncode == 2
    negative = run_cli("detect", "--input", signal, "--method", "pelt", "--pen", "1",
                       env_extra={"SEGSCAN_THREADS": "-2"})
    assert negative.returncode == 2


def test_plot_writes_svg(clean_case, tmp_path):
    detect = run_cli("detect", "--input", str(clean_case / "signal.csv"),
                     "--method", "binseg", "--n-bkps", "3")
    pred_path = tmp_path / "pred.json"
    pred_path.write_text(detect.stdout)
    svg_path = tmp_path / "plot.svg"
    proc = run_cli("plot", "--input", str(clean_case / "signal.csv"),
                   "--segmentation", str(pred_path),
                   "--truth", str(clean_case / "truth.json"),
                   "--out", str(svg_path))
    assert proc.returncode == 0, proc.stderr
    root = ET.parse(svg_path).getroot()
    assert root.tag.endswith("svg")
    ns = {"s": "http://www.w3.org/2000/svg"}
    regimes = root.findall(".//s:rect[@class='regime']", ns)
    assert len(regimes) == 4 * 2  # segments times dimensions
    polylines = root.findall(".//s:polyline", ns)
    assert len(polylines) == 2
    truth_lines = root.findall(".//s:g[@class='truth']/s:line", ns)
    assert len(truth_lines) == 3


def test_plot_rejects_bad_segmentation(clean_case, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"bkps": [400]}))
    proc = run_cli("plot", "--input", str(clean_case / "signal.csv"),
                   "--segmentation", str(bad), "--out", str(tmp_path / "x.svg"))
    assert proc.returncode == 5
    assert "OutOfRangeError" in proc.stderr


def test_no_subcommand_exits_2():
    proc = run_cli()
    assert proc.returncode == 2
