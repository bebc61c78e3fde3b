"""Command-line entry point.

Every subcommand reads a flat ``key = value`` config (dotted keys, no
sections) plus ``--set key=value`` overrides, writes its CSV outputs and a
``manifest.txt`` echoing the resolved config into ``output.dir``.

Exit codes: 0 pass, 1 decay violation, 2 config error, 3 CFL/runtime error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .fields import CellField, Field2D, Grid1D
from .flux import MAX_DEGREE, PolyFlux
from .lyapunov import (DecayReport, EntropyPair, audit_decay, ball_distance_observer,
                       ball_entropy_observer, interval_distance_observer,
                       monotone_distance_observer, norms_observer, relative_entropy_observer)
from .oracle import CASES, fit_rate
from .project import IntervalSet, L1Ball, L2Ball, Monotone, distance_l2, project
from .riemann import Shock, fan_profile, solve_riemann
from .solver import CFLError, SchemeConfig, evolve, run, run_2d
from .studies import (CONVERGENCE_MESHES, convergence_error, random_bv, random_l1_data,
                      random_l1_data_2d, step_data)

EXIT_PASS, EXIT_VIOLATION, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3

DEFAULTS = {
    "dimension": "1",
    "flux.coeffs": "0,0,0.5",
    "flux.fy": "",
    "scheme": "godunov",
    "cfl": "0.45",
    "t_end": "1.0",
    "grid.x_left": "-5.0",
    "grid.h": "0.025",
    "grid.n": "400",
    "farfield.u_minus": "-1.0",
    "farfield.u_plus": "1.0",
    "data.preset": "random_bv",
    "data.seed": "0",
    "data.amplitude": "2.0",
    "data.support": "-5,5",
    "data.shift": "0.0",
    "data.l1_range": "2,4",
    "data.path": "",
    "targets": "monotone",
    "target.r": "1.0",
    "target.lo": "-1.0",
    "target.hi": "1.0",
    "entropy.kind": "power_even",
    "entropy.p": "2",
    "tol.abs": "1e-8",
    "tol.rel": "1e-10",
    "observer.stride": "1",
    "output.dir": "out",
    "riemann.xi_lo": "-4.0",
    "riemann.xi_hi": "4.0",
    "riemann.points": "1001",
    "convergence.case": "burgers_rarefaction",
    "convergence.meshes": ",".join(repr(h) for h in CONVERGENCE_MESHES),
    "convergence.t_end": "1.0",
    "snapshot.stride": "0",
}

PRESETS = ("step", "riemann", "random_bv", "random_l1", "from_file")
TARGETS = ("monotone", "interval", "l1ball", "l2ball", "relative_entropy", "ball_entropy", "norms")


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# config


def read_config(path: str | None, overrides=()) -> dict:
    cfg = dict(DEFAULTS)
    if path:
        parser = configparser.ConfigParser(interpolation=None, delimiters=("=",))
        parser.optionxform = str
        try:
            with open(path) as fh:
                parser.read_string("[root]\n" + fh.read())
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        cfg.update(parser["root"])
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        k, v = item.split("=", 1)
        cfg[k.strip()] = v.strip()
    unknown = sorted(set(cfg) - set(DEFAULTS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    return cfg


def _float(cfg: dict, key: str) -> float:
    try:
        return float(cfg[key])
    except ValueError:
        raise ConfigError(f"{key} must be a number, got {cfg[key]!r}") from None


def _int(cfg: dict, key: str) -> int:
    try:
        return int(cfg[key])
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {cfg[key]!r}") from None


def _floats(cfg: dict, key: str) -> list[float]:
    try:
        return [float(x) for x in cfg[key].split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"{key} must be a comma-separated list of numbers") from None


def _flux(cfg: dict, key: str = "flux.coeffs") -> PolyFlux:
    coeffs = _floats(cfg, key)
    if not coeffs:
        raise ConfigError(f"{key} is empty")
    try:
        return PolyFlux(coeffs)
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc} (degree cap {MAX_DEGREE})") from None


def scheme_config(cfg: dict) -> SchemeConfig:
    try:
        return SchemeConfig(cfg["scheme"], _float(cfg, "cfl"), _float(cfg, "t_end"),
                            _int(cfg, "observer.stride"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _grid(cfg: dict) -> Grid1D:
    try:
        return Grid1D(_float(cfg, "grid.x_left"), _float(cfg, "grid.h"), _int(cfg, "grid.n"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def read_field_csv(path: str, u_minus: float, u_plus: float) -> CellField:
    """Load an ``x_center,u`` CSV written by this tool onto its uniform grid."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ConfigError(f"cannot read data file {path}: {exc}") from None
    if not rows or rows[0] != ["x_center", "u"]:
        raise ConfigError(f"{path}: expected header x_center,u")
    data = np.array([[float(a), float(b)] for a, b in rows[1:]])
    if data.shape[0] < 2:
        raise ConfigError(f"{path}: need at least two cells")
    h = data[1, 0] - data[0, 0]
    if not np.allclose(np.diff(data[:, 0]), h, rtol=1e-9, atol=0.0):
        raise ConfigError(f"{path}: cell centres are not uniform")
    return CellField(Grid1D(data[0, 0] - 0.5 * h, h, data.shape[0]), data[:, 1], u_minus, u_plus)


def initial_data(cfg: dict):
    preset = cfg["data.preset"]
    if preset not in PRESETS:
        raise ConfigError(f"unknown data.preset {preset!r}; choose from {PRESETS}")
    um, up = _float(cfg, "farfield.u_minus"), _float(cfg, "farfield.u_plus")
    seed = _int(cfg, "data.seed")
    if _int(cfg, "dimension") == 2:
        if preset != "random_l1":
            raise ConfigError("dimension 2 supports data.preset = random_l1 only")
        return random_l1_data_2d(_int(cfg, "grid.n"), _float(cfg, "grid.h"),
                                 _float(cfg, "grid.x_left"), seed, tuple(_floats(cfg, "data.l1_range")),
                                 _float(cfg, "data.amplitude"))
    grid = _grid(cfg)
    if preset in ("step", "riemann"):
        return step_data(grid, um, up, _float(cfg, "data.shift"))
    if preset == "random_bv":
        support = _floats(cfg, "data.support")
        if len(support) != 2:
            raise ConfigError("data.support needs two numbers")
        try:
            return random_bv(grid, seed, _float(cfg, "data.amplitude"), tuple(support), um, up)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    if preset == "random_l1":
        return random_l1_data(grid, seed, tuple(_floats(cfg, "data.l1_range")),
                              _float(cfg, "data.amplitude"))
    if not cfg["data.path"]:
        raise ConfigError("data.preset = from_file needs data.path")
    return read_field_csv(cfg["data.path"], um, up)


def _entropy(cfg: dict) -> EntropyPair:
    try:
        return EntropyPair(cfg["entropy.kind"], _int(cfg, "entropy.p"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def observers(cfg: dict) -> list:
    names = [t.strip() for t in cfg["targets"].split(",") if t.strip()]
    bad = [t for t in names if t not in TARGETS]
    if bad:
        raise ConfigError(f"unknown targets {bad}; choose from {TARGETS}")
    r = _float(cfg, "target.r")
    out = []
    for name in names:
        if name == "monotone":
            out.append(monotone_distance_observer())
        elif name == "interval":
            out.append(interval_distance_observer(_float(cfg, "target.lo"), _float(cfg, "target.hi")))
        elif name == "l1ball":
            out.append(ball_distance_observer(r))
        elif name == "l2ball":
            tgt = L2Ball(r)
            out.append(lambda u, tgt=tgt: {"d2_l2ball": distance_l2(u, tgt)})
        elif name == "relative_entropy":
            out.append(relative_entropy_observer(_entropy(cfg)))
        elif name == "ball_entropy":
            out.append(ball_entropy_observer(r, _entropy(cfg)))
        else:
            out.append(norms_observer())
    return out


def target_sets(cfg: dict) -> list:
    out = []
    for name in (t.strip() for t in cfg["targets"].split(",")):
        if name == "monotone":
            out.append(("monotone", Monotone(_float(cfg, "farfield.u_minus"),
                                             _float(cfg, "farfield.u_plus"))))
        elif name == "interval":
            out.append(("interval", IntervalSet(_float(cfg, "target.lo"), _float(cfg, "target.hi"))))
        elif name == "l1ball":
            out.append(("l1ball", L1Ball(_float(cfg, "target.r"))))
        elif name == "l2ball":
            out.append(("l2ball", L2Ball(_float(cfg, "target.r"))))
    if not out:
        raise ConfigError("project needs a projection target (monotone, interval, l1ball, l2ball)")
    return out


# ---------------------------------------------------------------------------
# output helpers


def _outdir(cfg: dict) -> str:
    d = cfg["output.dir"]
    os.makedirs(d, exist_ok=True)
    return d


def write_manifest(cfg: dict, command: str) -> None:
    with open(os.path.join(_outdir(cfg), "manifest.txt"), "w") as fh:
        fh.write(f"command = {command}\n")
        for k in sorted(cfg):
            fh.write(f"{k} = {cfg[k]}\n")


def _write_field(u, path: str) -> None:
    if isinstance(u, Field2D):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x_center", "y_center", "u"])
            xs = u.x_left + u.h * (np.arange(u.nx) + 0.5)
            ys = u.y_left + u.h * (np.arange(u.ny) + 0.5)
            for i, x in enumerate(xs):
                for j, y in enumerate(ys):
                    w.writerow([f"{x:.17g}", f"{y:.17g}", f"{u.values[i, j]:.17g}"])
    else:
        u.to_csv(path)


# ---------------------------------------------------------------------------
# commands


def _evolution_report(cfg: dict) -> DecayReport:
    a = initial_data(cfg)
    sc = scheme_config(cfg)
    obs = observers(cfg)
    if isinstance(a, Field2D):
        fy = _flux(cfg, "flux.fy") if cfg["flux.fy"] else _flux(cfg)
        return run_2d(a, _flux(cfg), fy, sc.cfl_ratio, sc.t_end, obs, sc.observer_stride)
    return run(a, _flux(cfg), sc, obs)


def _audit(cfg: dict, report: DecayReport, tag: str = "") -> int:
    out = _outdir(cfg)
    report.to_csv(os.path.join(out, f"report{tag}.csv"))
    summary = audit_decay(report, _float(cfg, "tol.abs"), _float(cfg, "tol.rel"))
    with open(os.path.join(out, f"summary{tag}.txt"), "w") as fh:
        fh.write("PASS\n" if summary.passed else "FAIL\n")
        fh.write("\n".join(summary.lines()) + "\n")
    return summary.exit_code


def _sweep_one(args):
    cfg, tag = args
    try:
        return _audit(cfg, _evolution_report(cfg), tag)
    except ConfigError:
        return EXIT_CONFIG
    except (CFLError, RuntimeError, ValueError, FloatingPointError):
        return EXIT_RUNTIME


def cmd_verify(cfg: dict, report_path: str | None = None, sweep: str | None = None,
               workers: int | None = None) -> int:
    write_manifest(cfg, "verify")
    if report_path:
        try:
            report = DecayReport.from_csv(report_path)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read report {report_path}: {exc}") from None
        return _audit(cfg, report)
    if sweep:
        key, _, choices = sweep.partition("=")
        if key not in DEFAULTS or not choices:
            raise ConfigError("--sweep expects key=v1,v2,... or key=start:stop")
        if ":" in choices:
            lo, hi = choices.split(":")
            values = [str(v) for v in range(int(lo), int(hi))]
        else:
            values = choices.split(",")
        jobs = [({**cfg, key: v}, f"_{key}_{v}") for v in values]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            codes = list(pool.map(_sweep_one, jobs))
        with open(os.path.join(_outdir(cfg), "sweep.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([key, "exit_code"])
            w.writerows(zip(values, codes))
        return max(codes)
    return _audit(cfg, _evolution_report(cfg))


def cmd_evolve(cfg: dict) -> int:
    write_manifest(cfg, "evolve")
    out = _outdir(cfg)
    a = initial_data(cfg)
    if isinstance(a, Field2D):
        raise ConfigError("evolve writes 1-D snapshots; use verify for dimension 2")
    sc = scheme_config(cfg)
    snap = _int(cfg, "snapshot.stride")
    f = _flux(cfg)
    obs = observers(cfg)
    report = DecayReport()
    last = None
    for k, t, u in evolve(a, f, sc):
        if k % sc.observer_stride == 0:
            report.record(t, {kk: v for o in obs for kk, v in o(u).items()})
            last = t
        if snap and k % snap == 0:
            u.to_csv(os.path.join(out, f"snapshot_{k:06d}.csv"))
        final = (t, u)
    if last != final[0]:
        report.record(final[0], {kk: v for o in obs for kk, v in o(final[1]).items()})
    final[1].to_csv(os.path.join(out, "final.csv"))
    report.to_csv(os.path.join(out, "report.csv"))
    return EXIT_PASS


def cmd_project(cfg: dict) -> int:
    write_manifest(cfg, "project")
    out = _outdir(cfg)
    u = initial_data(cfg)
    rows = []
    for name, tgt in target_sets(cfg):
        try:
            p = project(u, tgt)
            d = distance_l2(u, tgt)
        except ValueError as exc:
            raise ConfigError(f"target {name}: {exc}") from None
        _write_field(p, os.path.join(out, f"projected_{name}.csv"))
        rows.append((name, d))
    with open(os.path.join(out, "distances.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["target", "distance"])
        w.writerows((n, f"{d:.17g}") for n, d in rows)
    return EXIT_PASS


def cmd_riemann(cfg: dict) -> int:
    write_manifest(cfg, "riemann")
    out = _outdir(cfg)
    fan = solve_riemann(_flux(cfg), _float(cfg, "farfield.u_minus"), _float(cfg, "farfield.u_plus"))
    xi, u = fan_profile(fan, _float(cfg, "riemann.xi_lo"), _float(cfg, "riemann.xi_hi"),
                        _int(cfg, "riemann.points"))
    with open(os.path.join(out, "fan.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["xi", "u"])
        w.writerows((f"{a:.17g}", f"{b:.17g}") for a, b in zip(xi, u))
    with open(os.path.join(out, "waves.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["kind", "speed_lo", "speed_hi", "u_start", "u_end"])
        for p in fan.pieces:
            if isinstance(p, Shock):
                w.writerow(["shock", f"{p.speed:.17g}", f"{p.speed:.17g}",
                            f"{p.u_before:.17g}", f"{p.u_after:.17g}"])
            else:
                w.writerow(["rarefaction", f"{p.speed_lo:.17g}", f"{p.speed_hi:.17g}",
                            f"{p.u_start:.17g}", f"{p.u_end:.17g}"])
    return EXIT_PASS


def cmd_convergence(cfg: dict) -> int:
    write_manifest(cfg, "convergence")
    case = cfg["convergence.case"]
    if case not in CASES:
        raise ConfigError(f"unknown convergence.case {case!r}; choose from {CASES}")
    meshes = _floats(cfg, "convergence.meshes")
    t_end = _float(cfg, "convergence.t_end")
    errors = [convergence_error(case, h, t_end, _float(cfg, "cfl")) for h in meshes]
    try:
        fit = fit_rate(meshes, errors)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    with open(os.path.join(_outdir(cfg), "rate.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["h", "l1_error"])
        w.writerows((f"{h:.17g}", f"{e:.17g}") for h, e in zip(fit.mesh_sizes, fit.errors))
        w.writerow(["slope", f"{fit.slope:.17g}"])
    return EXIT_PASS


@dataclass
class _Cmd:
    func: object
    help: str


COMMANDS = {
    "verify": _Cmd(cmd_verify, "evolve and audit the decay of the configured targets"),
    "evolve": _Cmd(cmd_evolve, "evolve and write snapshots plus the diagnostic report"),
    "project": _Cmd(cmd_project, "project the initial data onto the configured targets"),
    "riemann": _Cmd(cmd_riemann, "exact Riemann fan for u_minus -> u_plus"),
    "convergence": _Cmd(cmd_convergence, "Godunov L1 error rate against an exact fan"),
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lyapcl", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, c in COMMANDS.items():
        s = sub.add_parser(name, help=c.help)
        s.add_argument("config", nargs="?", help="key = value config file")
        s.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config key (repeatable)")
        if name == "verify":
            s.add_argument("--report", help="audit an existing report CSV instead of running")
            s.add_argument("--sweep", help="KEY=v1,v2,... or KEY=start:stop, run in parallel")
            s.add_argument("--workers", type=int, default=None)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_PASS
    try:
        cfg = read_config(args.config, args.set)
        if args.command == "verify":
            return cmd_verify(cfg, args.report, args.sweep, args.workers)
        return COMMANDS[args.command].func(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CFLError, RuntimeError, ValueError, FloatingPointError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
