import csv
import io
import json
import math
import subprocess
import sys

import pytest

from qrms.cli import SIMULATE_COLUMNS, main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_counterexample(capsys):
    code, out, _ = run(["counterexample"], capsys)
    assert code == 0
    assert "eps_NO = 0.000000000000" in out and "2.449489742783" in out


def test_profile_stdout_csv(capsys):
    code, out, err = run(["profile", "--measurement", "unsharp", "--alpha-steps", "5"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 5
    assert float(rows[2]["epsilon"]) == pytest.approx(math.sqrt(6))
    assert json.loads(err)["eps_bar"] == pytest.approx(math.sqrt(6))


def test_simulate_csv_and_summary(tmp_path, capsys):
    out = tmp_path / "sim.csv"
    code, stdout, _ = run(["simulate", "--seed", "3", "--out", str(out)], capsys)
    assert code == 0
    rows = list(csv.reader(out.open()))
    assert tuple(rows[0]) == SIMULATE_COLUMNS
    assert len(rows) == 18
    summary = json.loads(out.with_suffix(".json").read_text())
    assert summary == json.loads(stdout)
    assert summary["seed"] == 3 and summary["config"]["rate"] == 350.0
    assert summary["sigma_on_square_rows"] == [0, 16]


def test_simulate_is_byte_identical(tmp_path, capsys):
    a, b, c = (tmp_path / f"{n}.csv" for n in "abc")
    for path, seed in ((a, "11"), (b, "11"), (c, "12")):
        assert main(["simulate", "--measurement", "unsharp", "--seed", seed, "--out", str(path)]) == 0
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes() != c.read_bytes()


@pytest.mark.parametrize(
    "argv",
    [
        ["simulate", "--rate", "0"],
        ["simulate", "--rate", "abc"],
        ["simulate", "--time", "-5"],
        ["simulate", "--seed", "-1"],
        ["simulate", "--alpha-steps", "1"],
        ["simulate", "--measurement", "fuzzy"],
        ["check", "--trials", "0"],
        ["frobnicate"],
    ],
)
def test_validation_errors_exit_1(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 1
    capsys.readouterr()


def test_unwritable_output_exit_1(tmp_path, capsys):
    code, _, err = run(["profile", "--out", str(tmp_path / "missing" / "p.csv")], capsys)
    assert code == 1 and "cannot write" in err


def test_check_passes_and_broken_povm_exits_1(tmp_path, capsys):
    code, out, _ = run(["check", "--trials", "10"], capsys)
    report = json.loads(out)
    assert code == 0 and report["passed"]
    code, out, _ = run(["check", "--trials", "5", "--inject-broken-povm"], capsys)
    assert code == 1
    assert "identity" in json.loads(out)["validation"]["error"]


def test_dilate(capsys):
    code, out, _ = run(["dilate", "--trials", "20"], capsys)
    report = json.loads(out)
    assert code == 0 and report["sharp"]["passed"] and report["unsharp"]["passed"]


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "qrms", "profile", "--alpha-steps", "3"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "alpha_rad,epsilon"
