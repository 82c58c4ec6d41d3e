import numpy as np
import pytest

from affectdyn import (OutputError, emit_csv, parse_manifest_text,
                       read_series_csv, run_manifest)
from affectdyn.cli import main

MANIFEST = """\
name = smoke
discrete.horizon = 250
continuous.horizon = 250
continuous.step = 0.1
scenario.n_groups = 2
scenario.n_alternatives = 2
scenario.f[1][1] = 0.4
scenario.f[1][2] = 0.6
scenario.f[2][1] = 0.1
scenario.f[2][2] = 0.9
scenario.q0[1][1] = 0.59
scenario.q0[1][2] = -0.59
scenario.q0[2][1] = 0.6
scenario.q0[2][2] = -0.6
scenario.eps[1] = 0.0
scenario.eps[2] = 0.0
scenario.memory[1] = long
scenario.memory[2] = short
scenario.J = 1.0
scenario.tau = 0.1
expected.dis.p1.terminal = 0.4
expected.dis.p2.terminal = 0.636
expected.con.p2.terminal = 0.636
"""


@pytest.fixture(scope="module")
def manifest_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "smoke.txt"
    path.write_text(MANIFEST)
    return path


@pytest.fixture(scope="module")
def result():
    return run_manifest(parse_manifest_text(MANIFEST))


# ------------------------------------------------------------------ outputs

def test_csv_round_trip(result, tmp_path):
    path = tmp_path / "series.csv"
    emit_csv(result, path)
    header = path.read_text().splitlines()[0]
    assert header == "t,dis_p1_a1,dis_p2_a1,con_p1_a1,con_p2_a1"
    times, series = read_series_csv(path)
    assert times[0] == 0.0 and times[-1] == 250.0
    assert len(times) == 251  # shared integer grid
    # the t=0 row is the unmodified initial state
    assert series["dis_p1_a1"][0] == pytest.approx(0.99)
    assert series["con_p1_a1"][0] == pytest.approx(0.99)
    dis = result.trajectories["discrete"]
    assert series["dis_p2_a1"][-1] == pytest.approx(dis.probabilities[250, 1, 0], abs=1e-9)


def test_csv_bytes_stable(result, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    emit_csv(result, a)
    emit_csv(result, b)
    assert a.read_bytes() == b.read_bytes()


def test_csv_write_failure(result, tmp_path):
    with pytest.raises(OutputError, match="cannot write"):
        emit_csv(result, tmp_path / "no" / "dir.csv")


def test_read_series_rejects_malformed(tmp_path):
    bad_header = tmp_path / "h.csv"
    bad_header.write_text("time,x\n0,1\n")
    with pytest.raises(OutputError, match="header"):
        read_series_csv(bad_header)
    ragged = tmp_path / "r.csv"
    ragged.write_text("t,x\n0,1\n1\n")
    with pytest.raises(OutputError, match="ragged"):
        read_series_csv(ragged)
    empty = tmp_path / "e.csv"
    empty.write_text("t,x\n")
    with pytest.raises(OutputError, match="no data"):
        read_series_csv(empty)


# ---------------------------------------------------------------------- cli

def test_run_command_passes(manifest_path, capsys):
    assert main(["run", str(manifest_path)]) == 0
    out = capsys.readouterr().out
    assert "discrete: t = 250" in out
    assert "continuous: t = 250" in out
    assert out.count("PASS") == 3
    assert "FAIL" not in out


def test_run_command_flags_failures(tmp_path, capsys):
    path = tmp_path / "wrong.txt"
    path.write_text(MANIFEST.replace("expected.dis.p2.terminal = 0.636",
                                     "expected.dis.p2.terminal = 0.9"))
    assert main(["run", str(path)]) == 1
    assert "FAIL  dis p2 terminal" in capsys.readouterr().out


def test_run_command_engine_override(manifest_path, capsys):
    # restricting to dis leaves the con expectation unmet
    assert main(["run", str(manifest_path), "--engine", "dis"]) == 1
    out = capsys.readouterr().out
    assert "continuous engine not run" in out
    assert "discrete: t = 250" in out


def test_run_command_writes_artifacts(manifest_path, tmp_path, capsys):
    csv = tmp_path / "out.csv"
    svg = tmp_path / "out.svg"
    assert main(["run", str(manifest_path),
                 "--csv", str(csv), "--svg", str(svg)]) == 0
    assert csv.read_text().startswith("t,dis_p1_a1")
    assert b"<svg" in svg.read_bytes()[:200]


def test_run_command_missing_manifest(tmp_path, capsys):
    assert main(["run", str(tmp_path / "absent.txt")]) == 2
    assert "error:" in capsys.readouterr().err


def test_run_command_reports_parse_line(tmp_path, capsys):
    path = tmp_path / "broken.txt"
    path.write_text("garbage! = 1\n" + MANIFEST)
    assert main(["run", str(path)]) == 2
    assert "line 1" in capsys.readouterr().err


def test_classify_command_round_trip(manifest_path, tmp_path, capsys):
    csv = tmp_path / "series.csv"
    assert main(["run", str(manifest_path), "--csv", str(csv)]) == 0
    capsys.readouterr()
    assert main(["classify", str(csv)]) == 0
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 4
    assert all("StableNode" in line for line in out)
    assert out[0].startswith("dis_p1_a1:")


def test_classify_command_short_series(tmp_path, capsys):
    path = tmp_path / "short.csv"
    rows = "\n".join(f"{t},{0.5}" for t in range(50))
    path.write_text("t,dis_p1_a1\n" + rows + "\n")
    assert main(["classify", str(path)]) == 2
    assert "100" in capsys.readouterr().err


def test_fixed_point_command(manifest_path, capsys):
    assert main(["fixed-point", str(manifest_path)]) == 0
    out = capsys.readouterr().out
    assert "p1* = (0.4, 0.6)" in out
    assert "converged" in out


def test_lyapunov_command(manifest_path, capsys):
    assert main(["lyapunov", str(manifest_path)]) == 0
    value = float(capsys.readouterr().out.strip())
    assert abs(value) < 0.01


def test_reproduce_figures_subset(tmp_path, capsys):
    assert main(["reproduce-figures", "--only", "fig1",
                 "--out", str(tmp_path)]) == 0
    assert (tmp_path / "fig1.csv").exists()
    assert (tmp_path / "fig1.svg").exists()
    out = capsys.readouterr().out
    assert "fig1" in out


def test_single_engine_csv_keeps_native_grid(manifest_path, tmp_path, capsys):
    csv = tmp_path / "con.csv"
    main(["run", str(manifest_path), "--engine", "con", "--csv", str(csv)])
    capsys.readouterr()
    times, series = read_series_csv(csv)
    assert list(series) == ["con_p1_a1", "con_p2_a1"]
    assert len(times) == 2501  # every RK4 step at h = 0.1
    assert np.allclose(np.diff(times), 0.1)
