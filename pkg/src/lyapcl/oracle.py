"""Brute-force references used to check the fast routines."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MAX_BRUTEFORCE_SIZE = 14
CASES = ("burgers_shock", "burgers_rarefaction", "cubic_composite")
# bitangent state and speed of the cubic fan joining -1 to 1
CUBIC_SHOCK_STATE = 0.5
CUBIC_SHOCK_SPEED = 0.75


def monotone_projection_bruteforce(values, cell_width: float = 1.0) -> np.ndarray:
    """Nondecreasing L2 projection by enumerating every partition into blocks.

    Each of the 2**(n-1) partitions replaces its blocks by their means; among
    the candidates whose block means increase, the closest one wins. The cell
    width scales every distance equally and does not change the minimiser.
    """
    v = np.asarray(values, dtype=float).ravel()
    n = v.size
    if n > MAX_BRUTEFORCE_SIZE:
        raise ValueError(f"brute force is limited to n <= {MAX_BRUTEFORCE_SIZE}")
    if not cell_width > 0:
        raise ValueError("cell width must be positive")
    if n <= 1:
        return v.copy()
    masks = np.arange(2 ** (n - 1))
    # cut[m, k] is True when a block ends after cell k
    cut = ((masks[:, None] >> np.arange(n - 1)[None, :]) & 1).astype(bool)
    cut = np.concatenate([cut, np.ones((masks.size, 1), dtype=bool)], axis=1)
    idx = np.arange(n)[None, :]
    prev_cut = np.concatenate([np.zeros((masks.size, 1), dtype=bool), cut[:, :-1]], axis=1)
    start = np.maximum.accumulate(np.where(prev_cut | (idx == 0), idx, 0), axis=1)
    end = np.minimum.accumulate(np.where(cut, idx, n)[:, ::-1], axis=1)[:, ::-1]
    prefix = np.concatenate([[0.0], np.cumsum(v)])
    fitted = (prefix[end + 1] - prefix[start]) / (end + 1 - start)
    feasible = np.all(np.diff(fitted, axis=1) >= 0.0, axis=1)
    dist = np.sum((fitted - v[None, :]) ** 2, axis=1) * cell_width
    dist[~feasible] = np.inf
    return fitted[int(np.argmin(dist))]


def analytic_solution(case: str, t: float, x):
    """Closed-form entropy solutions of three Riemann problems."""
    if not t > 0:
        raise ValueError("t must be positive")
    xi = np.asarray(x, dtype=float) / t
    if case == "burgers_shock":
        out = np.where(xi < 0.0, 1.0, -1.0)
    elif case == "burgers_rarefaction":
        out = np.clip(xi, -1.0, 1.0)
    elif case == "cubic_composite":
        fan = np.sqrt(np.clip(xi, CUBIC_SHOCK_SPEED, 3.0) / 3.0)
        out = np.where(xi < CUBIC_SHOCK_SPEED, -1.0, np.where(xi > 3.0, 1.0, fan))
    else:
        raise ValueError(f"unknown case {case!r}; choose from {CASES}")
    return float(out) if out.ndim == 0 else out


def analytic_data(case: str) -> tuple[float, float]:
    """(u_minus, u_plus) of each case."""
    return {"burgers_shock": (1.0, -1.0), "burgers_rarefaction": (-1.0, 1.0),
            "cubic_composite": (-1.0, 1.0)}[case]


def analytic_flux_coeffs(case: str) -> tuple[float, ...]:
    return (0.0, 0.0, 0.0, 1.0) if case == "cubic_composite" else (0.0, 0.0, 0.5)


@dataclass(frozen=True)
class RateFit:
    mesh_sizes: tuple
    errors: tuple
    slope: float
    intercept: float


def fit_rate(mesh_sizes, errors) -> RateFit:
    """Least-squares slope of log(error) against log(h)."""
    h = np.asarray(mesh_sizes, dtype=float).ravel()
    e = np.asarray(errors, dtype=float).ravel()
    if h.size != e.size:
        raise ValueError("mesh sizes and errors differ in length")
    if h.size < 3:
        raise ValueError("need at least three points")
    if np.any(h <= 0) or np.any(e <= 0):
        raise ValueError("mesh sizes and errors must be positive")
    slope, intercept = np.polyfit(np.log(h), np.log(e), 1)
    if not math.isfinite(slope):
        raise ValueError("rate fit failed")
    return RateFit(tuple(h.tolist()), tuple(e.tolist()), float(slope), float(intercept))
