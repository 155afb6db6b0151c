import subprocess
import sys

import pytest

from dissolab.cli import main, read_csv, write_csv

SCAN_HEADER = ["alpha", "I_alpha", "I_complement", "sum"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_analytic(capsys):
    code, out, _ = run(capsys, "analytic", "--alpha", "1", "--cxc", "1")
    assert code == 0
    assert "b=1.5 " in out
    assert "energy=-0.7916667" in out
    assert "splitting_sum=-1.5833333" in out


def test_analytic_zero_mass(capsys):
    code, out, _ = run(capsys, "analytic", "--alpha", "0", "--cxc", "1")
    assert code == 0
    assert "energy=0.0000000" in out


def test_analytic_domain_error(capsys):
    code, _, err = run(capsys, "analytic", "--alpha", "1", "--cxc", "0.3")
    assert code == 2
    assert "closed form invalid" in err


def test_bad_arguments(capsys):
    assert run(capsys, "analytic", "--alpha", "x", "--cxc", "1")[0] == 2
    assert run(capsys, "nosuchcommand")[0] == 2
    assert run(capsys, "--help")[0] == 0


def test_scan_1d(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, text, _ = run(capsys, "scan", "--model", "1d", "--n", "1", "--cxc", "1", "--step", "0.25", "--out", str(out))
    assert code == 0
    assert "argmin=0.0000" in text
    header, rows = read_csv(out)
    assert header == SCAN_HEADER
    assert len(rows) == 5
    assert min(float(r[3]) for r in rows) == pytest.approx(-7 / 3, abs=1e-3)


def test_scan_3d_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    svg = tmp_path / "scan.svg"
    args = ["scan", "--model", "3d", "--n", "1", "--cxc", "0.7386", "--step", "0.05"]
    code, text, _ = run(capsys, *args, "--out", str(a), "--plot", str(svg))
    assert code == 0
    assert "argmin=1.0000" in text and "symmetric=True" in text
    assert run(capsys, *args, "--out", str(b), "--jobs", "2")[0] == 0
    assert a.read_bytes() == b.read_bytes()
    header, rows = read_csv(a)
    assert header == SCAN_HEADER and len(rows) == 21
    assert svg.read_text().startswith("<svg")


def test_scan_rejects_bad_step(tmp_path, capsys):
    code, _, err = run(capsys, "scan", "--step", "0.3", "--out", str(tmp_path / "x.csv"))
    assert code == 2
    assert not (tmp_path / "x.csv").exists()


def test_solver_failure_leaves_no_file(tmp_path, capsys):
    out = tmp_path / "f.csv"
    code, _, err = run(capsys, "scan", "--model", "1d", "--cxc", "1", "--step", "0.25", "--max-iter", "1", "--out", str(out))
    assert code == 1
    assert "solver failure" in err
    assert not out.exists()
    assert list(tmp_path.iterdir()) == []


def test_unwritable_output(tmp_path, capsys):
    code, _, _ = run(capsys, "scan", "--model", "1d", "--cxc", "1", "--step", "0.25",
                     "--out", str(tmp_path / "missing" / "s.csv"))
    assert code == 2


@pytest.mark.parametrize("c,asym", [("1", -7 / 3), ("0.5", -1.0)])
def test_dissociate(tmp_path, capsys, c, asym):
    out = tmp_path / "d.csv"
    code, _, _ = run(capsys, "dissociate", "--lambda", "2", "--cxc", c, "--r-max", "30", "--r-step", "2", "--out", str(out))
    assert code == 0
    header, rows = read_csv(out)
    assert header == ["R", "energy", "gap_to_asymptote"]
    assert len(rows) == 16
    assert float(rows[-1][0]) == 30
    assert abs(float(rows[-1][2])) <= 1e-3
    assert float(rows[-1][1]) == pytest.approx(asym, abs=1e-3)


def test_dissociate_single_point(tmp_path, capsys):
    out = tmp_path / "d.csv"
    assert run(capsys, "dissociate", "--cxc", "1", "--r-max", "0", "--out", str(out))[0] == 0
    _, rows = read_csv(out)
    assert len(rows) == 1 and float(rows[0][0]) == 0


def test_threshold_bound_only(capsys):
    code, out, _ = run(capsys, "threshold", "--n", "1", "--bound-only")
    assert code == 0 and out.strip() == "5.1615"


def test_threshold_bad_bracket(tmp_path, capsys):
    code, _, err = run(capsys, "threshold", "--c-lo", "0", "--c-hi", "0.7386", "--out", str(tmp_path / "t.csv"))
    assert code == 2
    assert "does not bracket" in err


def test_twobody_small(capsys):
    code, out, _ = run(capsys, "twobody", "--r", "6", "--compare", "8", "--spacing", "0.4", "--margin", "8")
    assert code == 0
    assert out.count("energy=") == 2


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    out = tmp_path / "c.csv"
    cfg.write_text(f"# recipe\nmodel = 1d\ncxc = 1\nstep = 0.25\nout = {out}\n")
    code, text, _ = run(capsys, "--config", str(cfg), "scan")
    assert code == 0 and out.exists()
    # command-line flags win over the file
    code, text, _ = run(capsys, "--config", str(cfg), "scan", "--step", "0.5")
    assert len(read_csv(out)[1]) == 3


def test_config_file_errors(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("no_such_option = 3\n")
    assert run(capsys, "--config", str(bad), "analytic", "--alpha", "1", "--cxc", "1")[0] == 2
    bad.write_text("bound_only = maybe\n")
    assert run(capsys, "--config", str(bad), "threshold")[0] == 2
    assert run(capsys, "--config", str(tmp_path / "absent.cfg"), "threshold", "--bound-only")[0] == 2
    ok = tmp_path / "ok.cfg"
    ok.write_text("bound-only = true\n")
    code, out, _ = run(capsys, "--config", str(ok), "threshold")
    assert code == 0 and out.strip() == "5.1615"


def test_csv_round_trip(tmp_path):
    rows = [(0.1, 1 / 3, -2.0 / 7, 1e-17), (1.0, -0.7916666666666666, 2.220446049250313e-16, 12345.678901234567)]
    path = tmp_path / "r.csv"
    write_csv(path, SCAN_HEADER, rows)
    header, back = read_csv(path)
    assert header == SCAN_HEADER
    assert [tuple(float(v) for v in r) for r in back] == rows


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "dissolab", "analytic", "--alpha", "2", "--cxc", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "energy=-2.3333333" in proc.stdout
