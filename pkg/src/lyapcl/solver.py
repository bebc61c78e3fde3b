"""Monotone finite-volume schemes on a growing uniform grid.

Cells outside the stored grid carry the far-field states. Every step adds
one cell on each side, kept only when its new value differs from the
far-field state, so the ghost states never truncate a wave.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .envelope import PiecewiseLinear
from .fields import CellField, Field2D, Grid1D, PiecewiseConstant
from .flux import PolyFlux, lipschitz_bound
from .lyapunov import DecayReport
from .riemann import godunov_flux

SCHEMES = ("godunov", "lax_friedrichs")
CFL_LIMIT = 0.5


class CFLError(RuntimeError):
    pass


@dataclass(frozen=True)
class SchemeConfig:
    scheme: str = "godunov"
    cfl_ratio: float = 0.45
    t_end: float = 1.0
    observer_stride: int = 1

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if not 0.0 < self.cfl_ratio < CFL_LIMIT:
            raise ValueError("cfl_ratio must lie in (0, 1/2)")
        if not self.t_end >= 0.0:
            raise ValueError("t_end must be nonnegative")
        if self.observer_stride < 1:
            raise ValueError("observer_stride must be a positive integer")


# ---------------------------------------------------------------------------
# averaging onto a mesh


def mesh_project(w, grid: Grid1D, u_minus: float | None = None,
                 u_plus: float | None = None, quadrature: int = 8) -> CellField:
    """Cell averages of ``w`` on ``grid``.

    Exact for step functions, for objects exposing ``primitive()`` (cell
    fields on another grid) and for piecewise-linear functions; other callables use Gauss-Legendre
    quadrature per cell. Far-field states default to the source's own, or to
    the outermost cell means.
    """
    edges = grid.edges()
    if isinstance(w, CellField) and w.grid == grid:
        vals = np.array(w.values)
    elif isinstance(w, PiecewiseConstant):
        vals = _step_means(w, edges, grid.h)
        u_minus = w.u_minus if u_minus is None else u_minus
        u_plus = w.u_plus if u_plus is None else u_plus
    elif hasattr(w, "primitive"):
        prim = w.primitive()
        vals = np.diff(prim(edges)) / grid.h
        u_minus = w.u_minus if u_minus is None else u_minus
        u_plus = w.u_plus if u_plus is None else u_plus
    elif isinstance(w, PiecewiseLinear):
        inner = w.x[(w.x > edges[0]) & (w.x < edges[-1])]
        pts = np.union1d(edges, inner)
        vals_at = w(pts)
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (vals_at[1:] + vals_at[:-1]) * np.diff(pts))])
        at_edges = cum[np.searchsorted(pts, edges)]
        vals = np.diff(at_edges) / grid.h
    else:
        nodes, weights = np.polynomial.legendre.leggauss(quadrature)
        mid = 0.5 * (edges[:-1] + edges[1:])
        x = mid[:, None] + 0.5 * grid.h * nodes[None, :]
        vals = 0.5 * np.sum(np.asarray(w(x), dtype=float) * weights[None, :], axis=1)
    if isinstance(w, CellField):
        u_minus = w.u_minus if u_minus is None else u_minus
        u_plus = w.u_plus if u_plus is None else u_plus
    if u_minus is None:
        u_minus = float(vals[0]) if vals.size else 0.0
    if u_plus is None:
        u_plus = float(vals[-1]) if vals.size else 0.0
    return CellField(grid, vals, u_minus, u_plus)


def _step_means(w: PiecewiseConstant, edges: np.ndarray, h: float) -> np.ndarray:
    """Cell means of a step function. Cells inside a single piece take its
    value exactly, so constant stretches stay exactly constant."""
    lo, hi = edges[:-1], edges[1:]
    k_lo = np.searchsorted(w.breaks, lo, side="right")
    k_hi = np.searchsorted(w.breaks, hi, side="left")
    padded = np.concatenate([[w.u_minus], w.values, [w.u_plus]])
    vals = padded[k_lo].astype(float)
    for j in np.nonzero(k_hi > k_lo)[0]:
        pts = np.concatenate([[lo[j]], w.breaks[k_lo[j]:k_hi[j]], [hi[j]]])
        vals[j] = float(np.sum(padded[k_lo[j]:k_hi[j] + 1] * np.diff(pts))) / h
    return vals


# ---------------------------------------------------------------------------
# one-dimensional schemes


def numerical_flux(f: PolyFlux, u_l, u_r, dt: float, h: float, scheme: str):
    if scheme == "godunov":
        return godunov_flux(f, u_l, u_r)
    if scheme == "lax_friedrichs":
        return 0.5 * (f(u_l) + f(u_r)) - (h / (2.0 * dt)) * (u_r - u_l)
    raise ValueError(f"unknown scheme {scheme!r}")


def step(field: CellField, f: PolyFlux, dt: float, scheme: str = "godunov",
         lip: float | None = None) -> CellField:
    """One conservative update. ``lip`` (a bound for |f'| on [-M, M]) skips
    recomputing the Lipschitz constant; it must still be an upper bound."""
    if not (math.isfinite(field.u_minus) and math.isfinite(field.u_plus)):
        raise ValueError("the solver needs finite far-field states")
    if not dt > 0:
        raise ValueError("dt must be positive")
    h = field.h
    if lip is None:
        M = field.bound()
        lip = lipschitz_bound(f, -M, M)
    if dt * lip / h >= CFL_LIMIT:
        raise CFLError(f"CFL violated: dt*Lip/h = {dt * lip / h:.6g} >= {CFL_LIMIT}")
    um, up = field.u_minus, field.u_plus
    ext = np.concatenate([[um, um], field.values, [up, up]])
    F = numerical_flux(f, ext[:-1], ext[1:], dt, h, scheme)
    new = ext[1:-1] - (dt / h) * (F[1:] - F[:-1])
    x_left = field.grid.x_left - h
    if new[0] == um:
        new = new[1:]
        x_left += h
    if new[-1] == up:
        new = new[:-1]
    return CellField(Grid1D(x_left, h, new.size), new, um, up)


def time_step(a: CellField, f: PolyFlux, cfl_ratio: float, t_end: float) -> tuple[float, float]:
    """(dt, Lip) from the initial bound M; the maximum principle keeps it valid."""
    M = a.bound()
    lip = lipschitz_bound(f, -M, M)
    if lip == 0.0:
        return (t_end if t_end > 0 else a.h), 0.0
    return cfl_ratio * a.h / lip, lip


def _schedule(dt: float, t_end: float):
    """Step end-times k*dt, with the last one clipped to t_end."""
    k = 0
    t = 0.0
    while t < t_end:
        k += 1
        t_next = min(k * dt, t_end)
        yield t, t_next - t, t_next
        t = t_next


def evolve(a: CellField, f: PolyFlux, cfg: SchemeConfig):
    """Yield (k, t, field) for the initial field and after every step."""
    dt, lip = time_step(a, f, cfg.cfl_ratio, cfg.t_end)
    u = a
    yield 0, 0.0, u
    for k, (_, dt_k, t_next) in enumerate(_schedule(dt, cfg.t_end), start=1):
        u = step(u, f, dt_k, cfg.scheme, lip=lip)
        yield k, t_next, u


def run(a: CellField, f: PolyFlux, cfg: SchemeConfig, observers=()) -> DecayReport:
    """Evolve to t_end and sample each observer every ``observer_stride``
    steps (and at the final time). The last field is kept in ``report.final``."""
    report = DecayReport()
    last = None
    for k, t, u in evolve(a, f, cfg):
        if k % cfg.observer_stride == 0:
            report.record(t, _observe(u, observers))
            last = t
        final = (k, t, u)
    k, t, u = final
    if last != t:
        report.record(t, _observe(u, observers))
    report.final = u
    return report


def _observe(u, observers) -> dict:
    values = {}
    for obs in observers:
        values.update(obs(u))
    return values


# ---------------------------------------------------------------------------
# two-dimensional Lax-Friedrichs


def _trim_zero_border(vals: np.ndarray, x_left: float, y_left: float, h: float):
    if vals.shape[0] and not np.any(vals[0]):
        vals, x_left = vals[1:], x_left + h
    if vals.shape[0] and not np.any(vals[-1]):
        vals = vals[:-1]
    if vals.shape[1] and not np.any(vals[:, 0]):
        vals, y_left = vals[:, 1:], y_left + h
    if vals.shape[1] and not np.any(vals[:, -1]):
        vals = vals[:, :-1]
    return vals, x_left, y_left


def step_2d(field: Field2D, fx: PolyFlux, fy: PolyFlux, dt: float,
            lips: tuple[float, float] | None = None) -> Field2D:
    """Unsplit Lax-Friedrichs update; monotone when dt*(Lx+Ly)/h < 1/2.

    The added border layer is dropped again wherever it stays exactly zero.
    """
    h = field.h
    if lips is None:
        M = field.bound()
        lips = (lipschitz_bound(fx, -M, M), lipschitz_bound(fy, -M, M))
    ratio = dt * (lips[0] + lips[1]) / h
    if ratio >= CFL_LIMIT:
        raise CFLError(f"CFL violated: dt*(Lx+Ly)/h = {ratio:.6g} >= {CFL_LIMIT}")
    ext = np.pad(field.values, 2)
    visc = h / (4.0 * dt)
    Fx = 0.5 * (fx(ext[:-1, :]) + fx(ext[1:, :])) - visc * (ext[1:, :] - ext[:-1, :])
    Fy = 0.5 * (fy(ext[:, :-1]) + fy(ext[:, 1:])) - visc * (ext[:, 1:] - ext[:, :-1])
    c = dt / h
    new = (ext[1:-1, 1:-1]
           - c * (Fx[1:, 1:-1] - Fx[:-1, 1:-1])
           - c * (Fy[1:-1, 1:] - Fy[1:-1, :-1]))
    vals, x_left, y_left = _trim_zero_border(new, field.x_left - h, field.y_left - h, h)
    return Field2D(vals, h, x_left, y_left)


def evolve_2d(a: Field2D, fx: PolyFlux, fy: PolyFlux, cfl_ratio: float, t_end: float):
    if not 0.0 < cfl_ratio < CFL_LIMIT:
        raise ValueError("cfl_ratio must lie in (0, 1/2)")
    M = a.bound()
    lips = (lipschitz_bound(fx, -M, M), lipschitz_bound(fy, -M, M))
    total = lips[0] + lips[1]
    dt = cfl_ratio * a.h / total if total > 0 else (t_end if t_end > 0 else a.h)
    u = a
    yield 0, 0.0, u
    for k, (_, dt_k, t_next) in enumerate(_schedule(dt, t_end), start=1):
        u = step_2d(u, fx, fy, dt_k, lips)
        yield k, t_next, u


def run_2d(a: Field2D, fx: PolyFlux, fy: PolyFlux, cfl_ratio: float, t_end: float,
           observers=(), observer_stride: int = 1) -> DecayReport:
    report = DecayReport()
    last = None
    for k, t, u in evolve_2d(a, fx, fy, cfl_ratio, t_end):
        if k % observer_stride == 0:
            report.record(t, _observe(u, observers))
            last = t
        final = (k, t, u)
    if last != final[1]:
        report.record(final[1], _observe(final[2], observers))
    report.final = final[2]
    return report
