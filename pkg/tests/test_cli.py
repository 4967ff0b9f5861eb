import json
import subprocess
import sys

import pytest

from qsub.cli import EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, main
from qsub.harness import CSV_COLUMNS, JSON_KEYS


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_run_json(capsys):
    code, out, err = run(
        capsys, "run", "--predicate", "x*x - 4 = 0", "--bits", "3", "--mode", "ideal",
        "--trials", "2000", "--seed", "7", "--format", "json",
    )
    assert code == EXIT_OK
    doc = json.loads(out)
    assert tuple(doc) == JSON_KEYS
    assert doc["expected_p_flag1"] == 0.125
    assert doc["n"] == 1
    assert err == ""


def test_run_defaults(capsys):
    code, out, _ = run(capsys, "run", "--predicate", "x = 1", "--bits", "2")
    doc = json.loads(out)
    assert code == 0
    assert (doc["trials"], doc["seed"], doc["mode"]) == (10000, 0, "ideal")


def test_run_csv(capsys):
    code, out, _ = run(capsys, "run", "--predicate", "x = 1", "--bits", "2", "--trials", "5", "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 6


def test_certify_pair(capsys):
    code, out, _ = run(capsys, "certify", "--bits", "2", "--pair", "0,1")
    assert code == 0
    doc = json.loads(out)
    (w,) = doc["reports"]
    assert abs(w["mismatch"] - 2 / 3) < 1e-12
    assert w["verdict"] is True
    assert w["set_a"] == [0] and w["set_b"] == [1]


def test_certify_all_pairs(capsys):
    code, out, _ = run(capsys, "certify", "--bits", "3", "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 1 + 28
    assert all(line.endswith(",true") for line in lines[1:])


def test_syntax_error_is_usage(capsys):
    code, out, err = run(capsys, "run", "--predicate", "x +", "--bits", "3")
    assert code == EXIT_USAGE
    assert out == ""
    assert "position 3" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["run", "--predicate", "x = 1", "--bits", "3", "--bogus"],
        ["run", "--bits", "3"],
        ["run", "--predicate", "x = 1", "--bits", "0"],
        ["run", "--predicate", "x = 1", "--bits", "3", "--trials", "0"],
        ["run", "--predicate", "x = 1", "--bits", "3", "--mode", "magic"],
        ["run", "--predicate", "x + 1", "--bits", "3"],
        ["certify", "--bits", "2", "--pair", "0"],
        ["certify", "--bits", "2", "--pair", "0,4"],
        ["certify", "--bits", "2", "--mode", "ideal"],
        ["frobnicate"],
        [],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == EXIT_USAGE
    assert out == ""
    assert err


def test_layout_too_large_is_runtime(capsys, monkeypatch):
    code, out, err = run(capsys, "run", "--predicate", "x = 1", "--bits", "17")
    assert code == EXIT_RUNTIME
    assert "LayoutTooLarge" in err and out == ""
    monkeypatch.setenv("QSUB_MAX_BITS", "2")
    code, _, err = run(capsys, "run", "--predicate", "x = 1", "--bits", "3", "--trials", "5")
    assert code == EXIT_RUNTIME
    monkeypatch.setenv("QSUB_MAX_BITS", "18")
    code, _, _ = run(capsys, "solve-classical", "--predicate", "x = 131000", "--bits", "17")
    assert code == EXIT_OK


def test_compare_without_solutions_is_runtime(capsys):
    code, _, err = run(capsys, "compare", "--predicate", "x = 9", "--bits", "3", "--trials", "10")
    assert code == EXIT_RUNTIME
    assert "NoSolutions" in err


def test_compare(capsys):
    code, out, _ = run(capsys, "compare", "--predicate", "x*x - 4 = 0", "--bits", "3", "--trials", "500")
    assert code == 0
    doc = json.loads(out)
    modes = [r["mode"] for r in doc["reports"]]
    assert modes == ["ideal", "postselected"]
    assert all(r["classical_expected_checks"] == 4.5 for r in doc["reports"])
    assert doc["grover_simulation"]["agrees_with_closed_form"] is True


def test_solve_classical(capsys):
    code, out, _ = run(capsys, "solve-classical", "--predicate", "x*x - 4 = 0", "--bits", "3", "--seed", "3")
    assert code == 0
    doc = json.loads(out)
    assert doc["solution"] == 2
    assert 1 <= doc["checks"] <= 8
    assert doc["classical_expected_checks"] == 4.5


def test_out_file(tmp_path, capsys):
    path = tmp_path / "report.json"
    code, out, _ = run(capsys, "run", "--predicate", "x = 1", "--bits", "2", "--trials", "50", "--out", str(path))
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["trials"] == 50


def test_unwritable_out_is_runtime(tmp_path, capsys):
    code, _, _ = run(
        capsys, "run", "--predicate", "x = 1", "--bits", "2", "--out", str(tmp_path / "missing" / "r.json")
    )
    assert code == EXIT_RUNTIME


def test_stdout_is_byte_identical_across_processes():
    argv = [sys.executable, "-m", "qsub", "run", "--predicate", "x = 3 or x = 5", "--bits", "4",
            "--mode", "postselected", "--trials", "800", "--seed", "11", "--format", "csv"]
    first = subprocess.run(argv, capture_output=True, check=True).stdout
    second = subprocess.run(argv, capture_output=True, check=True).stdout
    assert first == second and first
