import csv
import io
import json
import shutil
import subprocess
import sys
from importlib import resources
from pathlib import Path

import jsonschema
import pytest

from qsymex.cli import main

PROGRAMS = Path(__file__).resolve().parent.parent / "programs"
needs_solver = pytest.mark.skipif(not (shutil.which("z3") or shutil.which("bitwuzla")),
                                  reason="no SMT solver on PATH")
REPORT_SCHEMA = json.loads(resources.files("qsymex").joinpath("schemas/verify_report.schema.json").read_text())
TERMINAL_SCHEMA = json.loads(resources.files("qsymex").joinpath("schemas/terminal.schema.json").read_text())


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@needs_solver
def test_verify_correct_and_buggy(capsys):
    code, out, _ = run(capsys, "verify", "--code", "repetition", "--n", "3", "--dmax", "1")
    assert code == 0
    rep = json.loads(out)
    jsonschema.validate(rep, REPORT_SCHEMA)
    assert rep["verdict"] == "Verified" and rep["counterexample"] is None
    code, out, _ = run(capsys, "verify", "--code", "repetition", "--n", "5", "--buggy")
    assert code == 1
    rep = json.loads(out)
    jsonschema.validate(rep, REPORT_SCHEMA)
    assert rep["verdict"] == "Bug" and rep["counterexample"]["replay_confirmed"]
    assert rep["decoder"] == {"variant": "buggy", "nerr_x": 2, "nerr_z": 0}


@needs_solver
def test_verify_toric_and_report_file(capsys, tmp_path):
    out_path, fig = tmp_path / "r.json", tmp_path / "t.png"
    code, out, _ = run(capsys, "verify", "--code", "toric", "--d", "3", "--basis", "Z",
                       "--out", str(out_path), "--figure", str(fig))
    assert code == 0 and out == ""
    rep = json.loads(out_path.read_text())
    jsonschema.validate(rep, REPORT_SCHEMA)
    assert rep["code"] == {"name": "toric-3", "n": 18, "k": 2}
    assert fig.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


@needs_solver
def test_findbug_prints_counterexample_only(capsys):
    code, out, _ = run(capsys, "findbug", "--code", "repetition", "--n", "5")
    assert code == 1
    cex = json.loads(out)
    assert cex["basis"] in ("Z", "X") and cex["replay_confirmed"]
    code, out, _ = run(capsys, "findbug", "--code", "repetition", "--n", "5", "--decoder", "correct")
    assert code == 0 and json.loads(out) is None


@needs_solver
def test_inconclusive_on_exhausted_deadline(capsys):
    code, out, _ = run(capsys, "verify", "--code", "toric", "--d", "3", "--deadline", "0")
    assert code == 2
    assert json.loads(out)["verdict"] == "Inconclusive"


@pytest.mark.parametrize("argv", [
    ["verify", "--code", "repetition"],
    ["verify", "--code", "repetition", "--n", "2"],
    ["verify", "--code", "toric", "--d", "1"],
    ["verify", "--code", "steane", "--n", "7"],
    ["sample", "--shots", "0", "--random-circuit", "4"],
    ["bench", "--ns", "4,x"],
    [],
])
def test_usage_errors(capsys, argv):
    with pytest.raises(SystemExit) as info:
        code = main(argv)
        raise SystemExit(code)
    assert info.value.code == 64
    assert capsys.readouterr().err


def test_missing_solver_is_unavailable(capsys):
    code, _, err = run(capsys, "verify", "--code", "repetition", "--n", "3",
                       "--solver", "definitely-not-a-solver-xyz")
    assert code == 69 and "solver" in err.lower()


def test_bad_program_is_data_error(capsys, tmp_path):
    bad = tmp_path / "bad.qp"
    bad.write_text("qubits 2; measure q9 -> m;")
    code, _, err = run(capsys, "run", "--program", str(bad))
    assert code == 65 and "out of range" in err
    code, _, _ = run(capsys, "run", "--program", str(tmp_path / "missing.qp"))
    assert code == 65
    undefined = tmp_path / "undef.qp"
    undefined.write_text("qubits 1; X[zz] q1;")
    assert run(capsys, "run", "--program", str(undefined))[0] == 65


def test_run_symbolic_and_concrete(capsys):
    code, out, _ = run(capsys, "run", "--program", str(PROGRAMS / "bitflip3.qp"))
    assert code == 0
    terms = json.loads(out)["terminals"]
    assert len(terms) == 1
    jsonschema.validate(terms[0], TERMINAL_SCHEMA)
    code, out, _ = run(capsys, "run", "--program", str(PROGRAMS / "bitflip3.qp"), "--no-sym-pauli")
    # all six ifs fork without pruning; only 8 paths are feasible
    assert len(json.loads(out)["terminals"]) == 64
    if shutil.which("z3") or shutil.which("bitwuzla"):
        code, out, _ = run(capsys, "run", "--program", str(PROGRAMS / "bitflip3.qp"), "--no-sym-pauli", "--prune")
        assert code == 0 and len(json.loads(out)["terminals"]) == 8
    code, out, _ = run(capsys, "run", "--program", str(PROGRAMS / "bitflip3.qp"), "--concrete",
                       "--inputs", "e1=0,e2=1,e3=0")
    doc = json.loads(out)
    assert code == 0 and doc["store"]["m1"] == 1 and doc["store"]["m2"] == 1
    assert doc["stabilizers"] and [s[0] for s in doc["trace"]].count("measure") == 2
    code, _, _ = run(capsys, "run", "--program", str(PROGRAMS / "bitflip3.qp"), "--concrete")
    assert code == 64


def test_sample_formats(capsys, tmp_path):
    ghz = str(PROGRAMS / "ghz.qp")
    code, out, _ = run(capsys, "sample", "--program", ghz, "--shots", "20", "--seed", "3")
    rows = out.split()
    assert code == 0 and len(rows) == 20 and all(r in ("0000", "1111") for r in rows)
    code, out, _ = run(capsys, "sample", "--program", ghz, "--shots", "5", "--format", "csv")
    table = list(csv.reader(io.StringIO(out)))
    assert table[0] == ["m_1", "m_2", "m_3", "m_4"] and len(table) == 6
    code, out, _ = run(capsys, "sample", "--program", ghz, "--shots", "5", "--format", "json")
    doc = json.loads(out)
    assert doc["names"] == ["m_1", "m_2", "m_3", "m_4"] and len(doc["shots"]) == 5
    dest = tmp_path / "s.txt"
    assert run(capsys, "sample", "--random-circuit", "6", "--shots", "3", "--out", str(dest))[0] == 0
    lines = dest.read_text().split()
    assert len(lines) == 3 and all(len(r) == 6 * 1 + 6 for r in lines)


def test_bench_writes_csv_and_png(capsys, tmp_path):
    dest = tmp_path / "b" / "bench.csv"
    code, out, err = run(capsys, "bench", "--ns", "8,12", "--shots", "1000", "--baseline-shots", "1",
                         "--out", str(dest))
    assert code == 0
    table = list(csv.DictReader(io.StringIO(dest.read_text())))
    assert [r["n"] for r in table] == ["8", "12"]
    assert all(float(r["samples_per_sec"]) > 0 for r in table)
    assert dest.with_suffix(".png").read_bytes()[:4] == b"\x89PNG"
    assert "figure:" in err


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "qsymex.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "0.1.0" in res.stdout
