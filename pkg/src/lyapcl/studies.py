"""Initial-data presets and the convergence study against exact fans."""

from __future__ import annotations

import numpy as np

from .fields import CellField, Field2D, Grid1D, PiecewiseConstant, step_profile
from .flux import PolyFlux
from .oracle import RateFit, analytic_data, analytic_flux_coeffs, analytic_solution, fit_rate
from .solver import SchemeConfig, evolve, mesh_project

CONVERGENCE_MESHES = (1 / 50, 1 / 100, 1 / 200, 1 / 400, 1 / 800)


def grid_on(x_lo: float, x_hi: float, n: int) -> Grid1D:
    return Grid1D(float(x_lo), (x_hi - x_lo) / n, int(n))


def step_data(grid: Grid1D, u_minus: float, u_plus: float, shift: float = 0.0) -> CellField:
    return mesh_project(step_profile(u_minus, u_plus, shift), grid)


def random_bv(grid: Grid1D, seed: int, amplitude: float = 2.0,
              support: tuple[float, float] = (-5.0, 5.0), u_minus: float = -1.0,
              u_plus: float = 1.0, pieces: tuple[int, int] = (3, 20)) -> CellField:
    """Random step function on ``support`` with values in [-amplitude, amplitude],
    equal to the far-field step (jump at 0) elsewhere, averaged onto ``grid``."""
    lo, hi = support
    if lo > 0 or hi < 0:
        raise ValueError("the support must contain the jump of the step at 0")
    rng = np.random.default_rng(seed)
    k = int(rng.integers(pieces[0], pieces[1] + 1))
    breaks = np.concatenate([[lo], np.sort(rng.uniform(lo, hi, k - 1)), [hi]])
    vals = rng.uniform(-amplitude, amplitude, k)
    w = PiecewiseConstant(breaks, vals, u_minus, u_plus)
    return mesh_project(w, grid, u_minus, u_plus)


def random_l1_data(grid: Grid1D, seed: int, l1_range: tuple[float, float] = (2.0, 4.0),
                   amplitude: float = 1.0, support: tuple[float, float] | None = None) -> CellField:
    """Zero far field; random steps rescaled so that ||a||_1 lies in ``l1_range``."""
    rng = np.random.default_rng(seed)
    lo, hi = support if support is not None else (grid.x_left, grid.x_right)
    k = int(rng.integers(3, 16))
    breaks = np.concatenate([[lo], np.sort(rng.uniform(lo, hi, k - 1)), [hi]])
    vals = rng.uniform(-amplitude, amplitude, k)
    u = mesh_project(PiecewiseConstant(breaks, vals, 0.0, 0.0), grid, 0.0, 0.0)
    norm = float(np.sum(np.abs(u.values))) * grid.h
    target = rng.uniform(*l1_range)
    return u.with_values(u.values * (target / norm))


def random_l1_data_2d(n: int, h: float, x_left: float, seed: int,
                      l1_range: tuple[float, float] = (2.0, 4.0),
                      amplitude: float = 1.0) -> Field2D:
    """Random possibly overlapping blobs (constant on rectangles), rescaled so ||a||_1 lands in
    ``l1_range``; blobs are added until the rescaled peak stays below
    ``amplitude``."""
    rng = np.random.default_rng(seed)
    target = rng.uniform(*l1_range)
    vals = np.zeros((n, n))
    for _ in range(64):
        i0, j0 = rng.integers(n // 8, n // 2, 2)
        di, dj = rng.integers(n // 10, n // 3, 2)
        vals[i0:i0 + di, j0:j0 + dj] = rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 1.0)
        norm = float(np.sum(np.abs(vals))) * h * h
        if norm > 0 and float(np.max(np.abs(vals))) * target / norm <= amplitude:
            break
    else:
        raise ValueError("could not meet the L1 target below the amplitude")
    vals *= target / norm
    return Field2D(vals, h, x_left, x_left)


# ---------------------------------------------------------------------------
# convergence against exact Riemann solutions


def convergence_error(case: str, h: float, t_end: float = 1.0,
                      cfl_ratio: float = 0.45, half_width: float = 1.0) -> float:
    """L1 error of the Godunov solution at t_end, measured at cell centres
    against the closed-form solution (far field included, where both agree).

    The initial jump sits at a cell centre so no case is reproduced exactly.
    """
    u_minus, u_plus = analytic_data(case)
    f = PolyFlux(analytic_flux_coeffs(case))
    n = int(round(2 * half_width / h)) + 1
    grid = Grid1D(-half_width - 0.5 * h, h, n)
    a = step_data(grid, u_minus, u_plus)
    cfg = SchemeConfig("godunov", cfl_ratio, t_end, 1)
    for _, _, u in evolve(a, f, cfg):
        pass
    exact = analytic_solution(case, t_end, u.grid.centers())
    return float(np.sum(np.abs(u.values - exact))) * h


def convergence_study(case: str, meshes=CONVERGENCE_MESHES, t_end: float = 1.0,
                      cfl_ratio: float = 0.45) -> RateFit:
    errors = [convergence_error(case, h, t_end, cfl_ratio) for h in meshes]
    return fit_rate(meshes, errors)
