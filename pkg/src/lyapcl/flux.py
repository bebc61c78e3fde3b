"""Polynomial flux functions and the small amount of calculus the solvers need."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

MAX_DEGREE = 16

# sign-change isolation of critical points of f'
_ISOLATION_CELLS = 1024
_ROOT_TOL = 1e-13


@dataclass(frozen=True)
class PolyFlux:
    """Polynomial flux, coefficients lowest degree first.

    Trailing zero coefficients are trimmed, so ``degree`` is the true degree
    (0 for the zero polynomial).
    """

    coeffs: tuple[float, ...]

    def __init__(self, coeffs):
        c = [float(x) for x in coeffs]
        while len(c) > 1 and c[-1] == 0.0:
            c.pop()
        if not c:
            c = [0.0]
        if not all(np.isfinite(c)):
            raise ValueError("flux coefficients must be finite")
        if len(c) - 1 > MAX_DEGREE:
            raise ValueError(f"flux degree {len(c) - 1} exceeds cap {MAX_DEGREE}")
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def burgers(cls) -> PolyFlux:
        return cls([0.0, 0.0, 0.5])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, u):
        return eval_flux(self, u)

    def derivative(self) -> PolyFlux:
        return derivative(self)

    @cached_property
    def critical_points(self) -> np.ndarray:
        """Real roots of f', sorted. Near-real complex roots are kept too;
        extra candidate points are harmless for min/max searches."""
        d = self.derivative()
        if d.degree == 0:
            return np.empty(0)
        roots = np.roots(d.coeffs[::-1])
        real = roots[np.abs(roots.imag) <= 1e-7 * (1.0 + np.abs(roots.real))].real
        dd = d.derivative()
        # two Newton polishing steps where f'' does not vanish
        for _ in range(2):
            slope = dd(real)
            ok = np.abs(slope) > 1e-300
            real = np.where(ok, real - d(real) / np.where(ok, slope, 1.0), real)
        return np.unique(real)

    def __repr__(self):
        return f"PolyFlux({list(self.coeffs)})"


def eval_flux(f: PolyFlux, u):
    """Horner evaluation; accepts scalars or arrays."""
    acc = np.zeros_like(np.asarray(u, dtype=float)) if np.ndim(u) else 0.0
    for c in reversed(f.coeffs):
        acc = acc * u + c
    return acc


def derivative(f: PolyFlux) -> PolyFlux:
    if f.degree == 0:
        return PolyFlux([0.0])
    return PolyFlux([k * c for k, c in enumerate(f.coeffs) if k > 0])


def _bisect_roots(g, a: float, b: float, cells: int = _ISOLATION_CELLS,
                  tol: float = _ROOT_TOL) -> np.ndarray:
    """Roots of g on [a, b] by sign-change isolation on a uniform grid and
    simultaneous bisection of every bracket. Exact grid zeros are included."""
    if b <= a:
        return np.empty(0)
    grid = np.linspace(a, b, cells + 1)
    vals = g(grid)
    zeros = grid[vals == 0.0]
    idx = np.nonzero(vals[:-1] * vals[1:] < 0.0)[0]
    lo, hi = grid[idx], grid[idx + 1]
    glo = vals[idx]
    while lo.size and np.max(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        # no representable midpoint left in any bracket
        if np.all((mid == lo) | (mid == hi)):
            break
        gm = g(mid)
        left = np.sign(gm) == np.sign(glo)
        lo = np.where(left, mid, lo)
        glo = np.where(left, gm, glo)
        hi = np.where(left, hi, mid)
    return np.sort(np.concatenate([zeros, 0.5 * (lo + hi)]))


def lipschitz_bound(f: PolyFlux, a: float, b: float) -> float:
    """max |f'| over [a, b]."""
    if a > b:
        raise ValueError("lipschitz_bound needs a <= b")
    d1 = derivative(f)
    if a == b:
        return float(abs(d1(a)))
    d2 = derivative(d1)
    candidates = [np.array([a, b]), np.linspace(a, b, _ISOLATION_CELLS + 1)]
    if d2.degree > 0 or d2.coeffs[0] != 0.0:
        candidates.append(_bisect_roots(d2, a, b))
    pts = np.clip(np.concatenate(candidates), a, b)
    return float(np.max(np.abs(d1(pts))))


@dataclass(frozen=True)
class Chord:
    """Secant line of the flux graph between two states; ``slope`` is the
    Rankine-Hugoniot speed [f]/[u]."""

    left_state: float
    right_state: float
    slope: float
    intercept: float

    def __call__(self, s):
        return self.slope * s + self.intercept


def chord(f: PolyFlux, u_l: float, u_r: float) -> Chord:
    if u_l == u_r:
        raise ValueError("chord needs two distinct states")
    fl = float(f(u_l))
    slope = (float(f(u_r)) - fl) / (u_r - u_l)
    return Chord(float(u_l), float(u_r), slope, fl - slope * u_l)


def bitangent_slopes(f: PolyFlux, interval_1, interval_2, offsets, t: float,
                     cells: int = 2048) -> list[float]:
    """Slopes of bitangents joining the convex graph pieces of two meshes.

    Solves ``spacing*theta + t*E2(theta) - t*E1(theta) = c2 - c1`` where
    ``E1``/``E2`` are the lower convex envelopes of ``f`` restricted to the
    state intervals (the Legendre transforms of the Kunik value functions)
    and ``offsets = (spacing, c1, c2)``. An empty list means no bitangent.
    """
    from .envelope import flux_envelope

    if t <= 0:
        raise ValueError("t must be positive")
    spacing, c1, c2 = (float(v) for v in offsets)
    a1, b1 = sorted(map(float, interval_1))
    a2, b2 = sorted(map(float, interval_2))
    lo, hi = max(a1, a2), min(b1, b2)
    if lo > hi:
        return []
    e1 = flux_envelope(f, a1, b1)
    e2 = flux_envelope(f, a2, b2)

    def g(theta):
        return spacing * theta + t * (e2(theta) - e1(theta)) - (c2 - c1)

    if lo == hi:
        return [lo] if g(np.array([lo]))[0] == 0.0 else []
    return [float(r) for r in _bisect_roots(g, lo, hi, cells=cells, tol=1e-14)]
