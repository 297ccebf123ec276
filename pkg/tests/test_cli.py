import csv
import io
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from lcmpsi.cli import EXIT_CAP, EXIT_OK, EXIT_USAGE, run

SETS = Path(__file__).resolve().parents[1] / "sets"


def call(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr().out
    return code, out


def rows(out):
    return list(csv.DictReader(io.StringIO(out)))


@pytest.mark.parametrize(
    "argv, column, expected",
    [
        (["expect", "--n", "2", "--delta", "0.5"], "expectation", 0.346574),
        (["expect", "--n", "2", "--delta", "0.5", "--method", "grouped"], "expectation", 0.346574),
        (["meank", "--n", "4", "--k", "2"], "expectation", 1.473503),
        (["psi", "--n", "10", "--input", str(SETS / "one_to_ten.txt")], "psi", 7.832014),
        (["variance", "--n", "2", "--delta", "0.5"], "variance", 0.120113),
        (["predict", "--n", "1000000", "--theta", "0.5", "--c", "1"], "predict_mean", 6907.755),
    ],
)
def test_documented_examples(capsys, argv, column, expected):
    code, out = call(capsys, *argv)
    assert code == EXIT_OK
    (row,) = rows(out)
    assert float(row[column]) == pytest.approx(expected, abs=1e-3)


def test_moment_schema(capsys):
    _, out = call(capsys, "meank", "--n", "4", "--k", "2", "--second-moment")
    (row,) = rows(out)
    assert list(row) == ["n", "delta_or_k", "expectation", "second_moment", "variance", "method"]
    assert row["method"] == "pairwise"


def test_nine_significant_digits(capsys):
    _, out = call(capsys, "psi", "--n", "10", "--input", str(SETS / "one_to_ten.txt"))
    assert rows(out)[0]["psi"] == f"{math.log(2520):.9g}"


def test_json_output(capsys):
    code, out = call(capsys, "expect", "--n", "10", "--delta", "0.3", "--json")
    obj = json.loads(out)
    assert code == EXIT_OK
    assert obj["schema_version"] == 1
    assert {"n", "delta_or_k", "expectation", "second_moment", "variance", "method"} <= set(obj)
    assert obj["second_moment"] is None


def test_sample_deterministic_and_thread_invariant(capsys, tmp_path):
    argv = ["sample", "--model", "bernoulli", "--n", "5000", "--delta", "0.02", "--trials", "12", "--seed", "3"]
    _, a = call(capsys, *argv)
    _, b = call(capsys, *argv, "--threads", "0")
    _, c = call(capsys, *argv[:-1], "4")
    assert a == b
    assert a != c
    dump = tmp_path / "psis.txt"
    _, d = call(capsys, *argv, "--dump-psis", str(dump))
    assert d == a
    values = [float(x) for x in dump.read_text().split()]
    assert len(values) == 12
    assert float(rows(a)[0]["mean_psi"]) == pytest.approx(sum(values) / 12, rel=1e-8)


def test_sample_uniform(capsys):
    code, out = call(capsys, "sample", "--model", "uniform-k", "--n", "1000", "--k", "30", "--trials", "5")
    assert code == EXIT_OK and rows(out)[0]["mean_size"] == "30"


def test_oracle_modes(capsys):
    _, out = call(capsys, "oracle", "--n", "4", "--k", "2", "--extremal")
    row = rows(out)[0]
    assert row["argmin"] == "1 2" and row["argmax"] == "3 4"
    _, out = call(capsys, "oracle", "--n", "4", "--k", "2")
    assert float(rows(out)[0]["expectation"]) == pytest.approx(1.473503, abs=1e-6)
    _, out = call(capsys, "oracle", "--n", "2", "--delta", "0.5")
    assert float(rows(out)[0]["variance"]) == pytest.approx(0.120113, abs=1e-6)


def test_extremal_command(capsys, tmp_path):
    path = tmp_path / "set.txt"
    code, out = call(capsys, "extremal", "--n", "100", "--k", "34", "--kind", "smooth", "--output", str(path),
                     "--report-bounds", "--theta", "0.5", "--c", "1")
    row = rows(out)[0]
    assert code == EXIT_OK and row["y"] == "5"
    assert float(row["psi"]) == pytest.approx(math.log(129600), abs=1e-6)
    assert "min_reference" in row
    _, out = call(capsys, "psi", "--n", "100", "--input", str(path))
    assert float(rows(out)[0]["psi"]) == pytest.approx(math.log(129600), abs=1e-6)


def test_poly_command(capsys):
    _, out = call(capsys, "poly", "--coeffs=-1,0,1", "--n", "10", "--predict")
    row = rows(out)[0]
    assert list(row) == ["n", "set_size", "psi", "predictor_name", "predicted"]
    assert row["set_size"] == "2" and row["predictor_name"] == "reducible_x2m1"
    _, out = call(capsys, "poly", "--coeffs", "1,0,1", "--n", "10000", "--predict", "--estimate-B", "1000")
    row = rows(out)[0]
    assert row["predictor_name"] == "quadratic_irreducible"
    assert float(row["B_estimate"]) < 0


def test_sieve_command(capsys):
    _, out = call(capsys, "sieve", "--limit", "100000", "--stats")
    assert rows(out)[0]["prime_count"] == "9592"


def test_suite_quick_subset(capsys):
    code, out = call(capsys, "suite", "--only", "1,3,4")
    assert code == EXIT_OK
    assert [r["status"] for r in rows(out)] == ["pass"] * 3


@pytest.mark.parametrize(
    "argv",
    [
        ["bogus"],
        ["expect", "--n", "10"],
        ["expect", "--n", "10", "--delta", "1.5"],
        ["meank", "--n", "4", "--k", "9"],
        ["sample", "--model", "bernoulli", "--n", "10"],
        ["psi", "--n", "5", "--input", str(SETS / "one_to_ten.txt")],
        ["predict", "--n", "100", "--theta", "1", "--c", "2"],
        ["expect", "--n", "100", "--delta", "0.5", "--limit", "50"],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    assert run(argv) == EXIT_USAGE


@pytest.mark.parametrize(
    "argv, flag",
    [
        (["variance", "--n", "2000", "--delta", "0.5", "--cap", "1000"], "--cap"),
        (["sieve", "--limit", "5000", "--max-limit", "1000"], "--max-limit"),
        (["oracle", "--n", "30", "--delta", "0.5"], "oracle n"),
    ],
)
def test_cap_errors_exit_3(capsys, argv, flag):
    assert run(argv) == EXIT_CAP
    assert flag in capsys.readouterr().err


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "lcmpsi", "expect", "--n", "2", "--delta", "0.5", "--json"],
        capture_output=True, text=True, check=True,
    )
    assert json.loads(proc.stdout)["expectation"] == pytest.approx(0.346574, abs=1e-6)


def test_help_lists_schema(capsys):
    with pytest.raises(SystemExit):
        from lcmpsi.cli import build_parser

        build_parser().parse_args(["poly", "--help"])
    assert "set_size" in capsys.readouterr().out
