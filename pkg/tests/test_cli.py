import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from depmod import cli
from depmod.specfile import tomllib

SPECS = Path(__file__).resolve().parent.parent / "specs"


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def _rows(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return lines[0].split(","), np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])


# --- sample ----------------------------------------------------------------------------


def test_sample_writes_header_and_provenance(tmp_path, capsys):
    out = tmp_path / "s2.csv"
    code, stdout, _ = run(capsys, "sample", "--spec", SPECS / "gaussian_s2.toml", "--n", 10, "--seed", 42, "--out", out)
    assert code == 0 and stdout == ""
    text = out.read_bytes().decode()
    assert "\r" not in text
    assert text.startswith("# seed=42\n# spec-digest=")
    header, rows = _rows(text)
    assert header == ["x1", "x2", "x3"] and rows.shape == (10, 3)


def test_sample_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        run(capsys, "sample", "--spec", SPECS / "gaussian_s2.toml", "--n", 10, "--seed", 42, "--out", path)
    assert a.read_bytes() == b.read_bytes()


def test_sample_round_trips_floats(capsys):
    _, stdout, _ = run(capsys, "sample", "--spec", SPECS / "trapezoid.toml", "--n", 5)
    for token in stdout.splitlines()[-1].split(","):
        assert format(float(token), ".17g") == token


def test_sample_dirichlet_inside_simplex(capsys):
    _, stdout, _ = run(capsys, "sample", "--spec", SPECS / "dirichlet.toml", "--n", 2000)
    _, rows = _rows(stdout)
    assert np.all(rows.sum(axis=1) < 1) and np.all(rows > 0)


def test_sample_uses_spec_seed(capsys):
    _, stdout, _ = run(capsys, "sample", "--spec", SPECS / "dirichlet.toml", "--n", 2)
    assert stdout.startswith("# seed=7\n")


def test_malformed_spec_exits_nonzero(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text('schema = 1\nfamily = "dirichlet"\n[params]\nalpah = [1.0, 2.0]\n')
    code, stdout, err = run(capsys, "sample", "--spec", bad)
    assert code == 1 and stdout == ""
    assert "params.alpah" in err


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["sample"])
    assert info.value.code == 2


# --- gsi and select ----------------------------------------------------------------------


def test_gsi_s3_analytic(capsys):
    code, stdout, _ = run(capsys, "gsi", "--spec", SPECS / "gaussian_s3.toml", "--method", "analytic")
    assert code == 0
    header, rows = _rows(stdout.replace("analytic", "0"))
    col = header.index("gsi_tot_frob")
    assert np.allclose(rows[:, col], [0.3032177042381441, 0.17649404626772122, 0.0], atol=1e-12)
    assert list(rows[:, header.index("pivot")]) == [1, 2, 3]


def test_gsi_kv_output_parses(capsys):
    _, stdout, _ = run(capsys, "gsi", "--spec", SPECS / "gaussian_s3.toml", "--format", "kv")
    doc = tomllib.loads(stdout)
    assert [r["pivot"] for r in doc["report"]] == [1, 2, 3]
    assert doc["report"][0]["method"] == "analytic"


def test_gsi_cauchy_infinite_variance(capsys):
    code, stdout, err = run(capsys, "gsi", "--spec", SPECS / "cauchy.toml", "--method", "pick_freeze", "--n", 1024)
    assert code == 1 and stdout == "" and "InfiniteVariance" in err


def test_gsi_analytic_unsupported(capsys):
    code, _, err = run(capsys, "gsi", "--spec", SPECS / "dirichlet.toml", "--method", "analytic")
    assert code == 1 and "UnsupportedAnalytic" in err


def test_gsi_trapezoid_unit_beta_equal(capsys):
    _, stdout, _ = run(capsys, "gsi", "--spec", SPECS / "trapezoid_unit.toml")
    header, rows = _rows(stdout.replace("analytic", "0"))
    for name in ("gsi_fo_frob", "gsi_tot_frob"):
        col = header.index(name)
        assert abs(rows[0, col] - rows[1, col]) <= 1e-8


def test_gsi_pick_freeze_default_for_other_families(capsys):
    _, stdout, _ = run(capsys, "gsi", "--spec", SPECS / "student_t.toml", "--n", 4096, "--format", "kv")
    doc = tomllib.loads(stdout)
    assert {r["method"] for r in doc["report"]} == {"pick_freeze"}
    assert all(r["seed"] == 5 and r["n"] == 4096 for r in doc["report"])


@pytest.mark.parametrize("name,j_star,tie", [("gaussian_s3", 1, False), ("gaussian_s5", 3, False), ("gaussian_s4", 1, True)])
def test_select(capsys, name, j_star, tie):
    code, stdout, _ = run(capsys, "select", "--spec", SPECS / f"{name}.toml")
    doc = tomllib.loads(stdout)
    assert code == 0 and doc["j_star"] == j_star and doc["tie"] is tie
    if tie:
        assert doc["tie_resolution"] == "equivalent"
    assert len(doc["report"]) == 3


def test_select_csv(capsys):
    _, stdout, _ = run(capsys, "select", "--spec", SPECS / "gaussian_s2.toml", "--format", "csv")
    assert stdout.splitlines()[-2:] == ["j_star,tie,tie_resolution,tol", "3,false,second_type_total,9.9999999999999998e-13"]


# --- reproduce -----------------------------------------------------------------------------


def test_reproduce_gaussian_table(capsys):
    _, stdout, _ = run(capsys, "reproduce", "gaussian_d3")
    lines = [ln for ln in stdout.splitlines() if not ln.startswith("#")]
    header = lines[0].split(",")
    rows = [dict(zip(header, ln.split(","))) for ln in lines[1:]]
    assert len(rows) == 21
    s1 = [float(r["gsi_tot_frob"]) for r in rows if r["set"] == "S1"]
    assert max(s1) - min(s1) <= 1e-3


def test_reproduce_trapezoid_table(capsys):
    _, stdout, _ = run(capsys, "reproduce", "trapezoid")
    lines = [ln for ln in stdout.splitlines() if not ln.startswith("#")]
    header = lines[0].split(",")
    rows = [dict(zip(header, ln.split(","))) for ln in lines[1:]]
    table = {(float(r["beta"]), r["model"]): (float(r["first_order"]), float(r["total"])) for r in rows}
    assert all(v <= 1e-3 for k, pair in table.items() if k[0] == 0.0001 for v in pair)
    for beta in (0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875):
        assert table[(beta, "r2")][1] > table[(beta, "r1")][1]


def test_reproduce_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(capsys, "reproduce", "trapezoid", "--out", a)
    run(capsys, "reproduce", "trapezoid", "--out", b)
    assert a.read_bytes() == b.read_bytes()


# --- thread count --------------------------------------------------------------------------


def _subprocess(args, threads):
    env = dict(os.environ, DEPMOD_THREADS=str(threads))
    return subprocess.run([sys.executable, "-m", "depmod.cli", *map(str, args)], env=env, capture_output=True, check=True).stdout


@pytest.mark.parametrize(
    "args",
    [
        ["sample", "--spec", SPECS / "gamma_sum.toml", "--n", 20_000],
        ["gsi", "--spec", SPECS / "student_t.toml", "--n", 8192],
        ["reproduce", "gaussian_d3"],
    ],
    ids=["sample", "gsi", "reproduce"],
)
def test_output_independent_of_threads(args):
    assert _subprocess(args, 1) == _subprocess(args, 4)
