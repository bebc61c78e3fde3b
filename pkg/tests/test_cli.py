import csv
import subprocess
import sys

import numpy as np
import pytest

from lyapcl.cli import DEFAULTS, main, read_config, ConfigError

SMALL = ["--set", "grid.n=80", "--set", "grid.h=0.05", "--set", "grid.x_left=-2",
         "--set", "data.support=-2,2", "--set", "t_end=0.5"]


def run_cli(tmp_path, command, *extra, config=None):
    out = tmp_path / "out"
    argv = [command] + ([str(config)] if config else []) + ["--set", f"output.dir={out}", *extra]
    return main(argv), out


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_verify_passes_and_writes_outputs(tmp_path):
    rc, out = run_cli(tmp_path, "verify", *SMALL, "--set", "targets=monotone,relative_entropy,norms")
    assert rc == 0
    assert (out / "summary.txt").read_text().splitlines()[0] == "PASS"
    header = read_rows(out / "report.csv")[0]
    assert header == ["t", "d2_monotone", "delta_relative_entropy", "l1", "l2", "linf", "tv", "mass"]
    manifest = (out / "manifest.txt").read_text()
    assert "command = verify" in manifest and "grid.n = 80" in manifest


def test_config_file_and_override_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("scheme = lax_friedrichs\ngrid.n = 50\n")
    resolved = read_config(str(cfg), ["grid.n=60"])
    assert resolved["scheme"] == "lax_friedrichs" and resolved["grid.n"] == "60"
    assert set(resolved) == set(DEFAULTS)


def test_injected_violation_is_reported(tmp_path):
    report = tmp_path / "report.csv"
    report.write_text("t,d2_monotone,l1\n0,1.0,5\n0.1,0.5,6\n0.2,1.5,7\n0.3,0.2,8\n")
    rc, out = run_cli(tmp_path, "verify", "--report", str(report))
    assert rc == 1
    lines = (out / "summary.txt").read_text().splitlines()
    assert lines[:2] == ["FAIL", "violations 1"]
    series, t0, t1, inc = lines[3].split()
    assert series == "d2_monotone" and float(t0) == 0.1 and float(t1) == 0.2
    assert float(inc) == pytest.approx(1.0)


@pytest.mark.parametrize("extra", [
    ["--set", "grid.m=3"],
    ["--set", "cfl=0.6"],
    ["--set", "data.preset=sine"],
    ["--set", "targets=monotone,banana"],
    ["--set", "grid.n=ten"],
    ["--set", "flux.coeffs=" + ",".join(["0"] * 17 + ["1"])],
    ["--bogus"],
])
def test_config_errors_exit_2(tmp_path, extra):
    rc, _ = run_cli(tmp_path, "verify", *extra)
    assert rc == 2


def test_unreadable_config_exit_2(tmp_path):
    rc, _ = run_cli(tmp_path, "verify", config=tmp_path / "missing.cfg")
    assert rc == 2
    with pytest.raises(ConfigError):
        read_config(None, ["noequals"])


def test_runtime_error_exit_3(tmp_path):
    rc, _ = run_cli(tmp_path, "verify", "--set", "data.preset=step", "--set", "farfield.u_minus=inf")
    assert rc == 3


def test_runs_are_byte_identical(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    a.mkdir(), b.mkdir()
    args = SMALL + ["--set", "targets=monotone,norms", "--set", "flux.coeffs=0,0,0,1",
                    "--set", "data.seed=7"]
    assert run_cli(a, "verify", *args)[0] == 0
    assert run_cli(b, "verify", *args)[0] == 0
    assert (a / "out" / "report.csv").read_bytes() == (b / "out" / "report.csv").read_bytes()


def test_riemann_cubic_waves(tmp_path):
    rc, out = run_cli(tmp_path, "riemann", "--set", "flux.coeffs=0,0,0,1")
    assert rc == 0
    waves = read_rows(out / "waves.csv")
    assert waves[0] == ["kind", "speed_lo", "speed_hi", "u_start", "u_end"]
    shock, raref = waves[1], waves[2]
    assert shock[0] == "shock" and float(shock[1]) == pytest.approx(0.75, abs=1e-14)
    assert float(shock[4]) == pytest.approx(0.5, abs=1e-14)
    assert raref[0] == "rarefaction" and float(raref[2]) == pytest.approx(3.0, abs=1e-13)
    fan = np.array([[float(x) for x in r] for r in read_rows(out / "fan.csv")[1:]])
    # the sample grid plus the wave breakpoints
    assert fan.shape[1] == 2 and fan.shape[0] >= 1001
    assert 0.75 in fan[:, 0]
    assert np.all(np.diff(fan[:, 1]) >= -1e-15)


def test_project_monotone_data_is_identity(tmp_path):
    rc, out = run_cli(tmp_path, "project", "--set", "data.preset=step",
                      "--set", "targets=monotone,interval")
    assert rc == 0
    dist = dict((r[0], float(r[1])) for r in read_rows(out / "distances.csv")[1:])
    assert dist == {"monotone": 0.0, "interval": 0.0}
    proj = read_rows(out / "projected_monotone.csv")
    assert proj[0] == ["x_center", "u"] and len(proj) == 401


def test_project_ball_rejects_nonzero_far_field(tmp_path):
    rc, _ = run_cli(tmp_path, "project", "--set", "data.preset=step", "--set", "targets=l2ball")
    assert rc == 2
    rc, out = run_cli(tmp_path, "project", "--set", "data.preset=random_l1", "--set",
                      "targets=l1ball,l2ball", "--set", "target.r=1")
    assert rc == 0
    rows = read_rows(out / "distances.csv")
    assert [r[0] for r in rows[1:]] == ["l1ball", "l2ball"]
    assert all(float(r[1]) > 0 for r in rows[1:])


def test_project_needs_a_projection_target(tmp_path):
    rc, _ = run_cli(tmp_path, "project", "--set", "targets=norms")
    assert rc == 2


def test_evolve_writes_snapshots_and_round_trips(tmp_path):
    rc, out = run_cli(tmp_path, "evolve", *SMALL, "--set", "snapshot.stride=10")
    assert rc == 0
    snaps = sorted(out.glob("snapshot_*.csv"))
    assert snaps and snaps[0].name == "snapshot_000000.csv"
    assert (out / "final.csv").exists() and (out / "report.csv").exists()
    # a snapshot is valid input data
    rc2, out2 = run_cli(tmp_path / "again", "verify", "--set", "data.preset=from_file",
                        "--set", f"data.path={snaps[-1]}", "--set", "t_end=0.2")
    assert rc2 == 0


def test_convergence_rate(tmp_path):
    rc, out = run_cli(tmp_path, "convergence", "--set", "convergence.meshes=0.05,0.025,0.0125",
                      "--set", "convergence.t_end=0.5")
    assert rc == 0
    rows = read_rows(out / "rate.csv")
    assert rows[-1][0] == "slope" and float(rows[-1][1]) >= 0.5


def test_sweep_over_seeds(tmp_path):
    rc, out = run_cli(tmp_path, "verify", *SMALL, "--sweep", "data.seed=0:3", "--workers", "2")
    assert rc == 0
    assert read_rows(out / "sweep.csv") == [["data.seed", "exit_code"], ["0", "0"], ["1", "0"],
                                            ["2", "0"]]
    assert (out / "summary_data.seed_2.txt").exists()


def test_two_dimensional_verify(tmp_path):
    rc, out = run_cli(tmp_path, "verify", "--set", "dimension=2", "--set", "data.preset=random_l1",
                      "--set", "grid.n=30", "--set", "grid.h=0.1", "--set", "grid.x_left=-1.5",
                      "--set", "targets=l1ball,ball_entropy", "--set", "t_end=0.2",
                      "--set", "farfield.u_minus=0", "--set", "farfield.u_plus=0")
    assert rc == 0


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "lyapcl", "riemann",
                           "--set", f"output.dir={tmp_path}"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert (tmp_path / "waves.csv").exists()
