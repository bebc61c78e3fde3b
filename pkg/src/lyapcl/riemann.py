"""Exact self-similar Riemann solutions for polynomial fluxes.

The fan is read off the envelope of the flux over the state interval: for
increasing data the lower convex envelope, for decreasing data the upper
concave one. Affine envelope pieces are shocks travelling at their slope,
curved pieces are rarefactions along which ``f'(u) = x/t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .envelope import FluxEnvelope, PiecewiseLinear, flux_envelope
from .flux import PolyFlux, derivative


@dataclass(frozen=True)
class Shock:
    speed: float
    u_before: float
    u_after: float


@dataclass(frozen=True)
class Rarefaction:
    """Centred rarefaction between ``u_start`` (at ``speed_lo``) and ``u_end``
    (at ``speed_hi``); on it ``f'(u) = xi``."""

    flux: PolyFlux
    u_start: float
    u_end: float
    speed_lo: float
    speed_hi: float

    def state_of_speed(self, xi: float) -> float:
        if xi <= self.speed_lo:
            return self.u_start
        if xi >= self.speed_hi:
            return self.u_end
        fp = derivative(self.flux)
        lo, hi = self.u_start, self.u_end
        # f'(u) - xi changes sign across the arc; bisect to the last ulp
        g_lo = float(fp(lo)) - xi
        while True:
            mid = 0.5 * (lo + hi)
            if mid == lo or mid == hi:
                break
            g = float(fp(mid)) - xi
            if g == 0.0:
                return mid
            if (g > 0) == (g_lo > 0):
                lo, g_lo = mid, g
            else:
                hi = mid
        return 0.5 * (lo + hi)


@dataclass(frozen=True)
class RiemannFan:
    left_state: float
    right_state: float
    pieces: tuple
    envelope: FluxEnvelope | None = None

    def speeds(self) -> list[float]:
        out = []
        for p in self.pieces:
            if isinstance(p, Shock):
                out.append(p.speed)
            else:
                out.extend([p.speed_lo, p.speed_hi])
        return out


def solve_riemann(f: PolyFlux, v_minus: float, v_plus: float) -> RiemannFan:
    v_minus, v_plus = float(v_minus), float(v_plus)
    if v_minus == v_plus:
        return RiemannFan(v_minus, v_plus, ())
    increasing = v_minus < v_plus
    lo, hi = min(v_minus, v_plus), max(v_minus, v_plus)
    env = flux_envelope(f, lo, hi, upper=not increasing)
    fp = derivative(f)
    pieces = []
    # walk the states from v_minus to v_plus; speeds then increase
    ordered = env.pieces if increasing else tuple(reversed(env.pieces))
    for p in ordered:
        start, end = (p.start, p.end) if increasing else (p.end, p.start)
        if p.kind == "chord":
            pieces.append(Shock(float(p.slope), start, end))
        elif end != start:
            pieces.append(Rarefaction(f, start, end, float(fp(start)), float(fp(end))))
    return RiemannFan(v_minus, v_plus, tuple(pieces), env)


def sample_fan(fan: RiemannFan, xi: float) -> float:
    """State at x/t = xi. At a shock speed the right state is returned."""
    state = fan.left_state
    for p in fan.pieces:
        if isinstance(p, Shock):
            if xi < p.speed:
                return state
            state = p.u_after
        else:
            if xi < p.speed_lo:
                return state
            if xi < p.speed_hi:
                return p.state_of_speed(xi)
            state = p.u_end
    return state


def _primitive(fan: RiemannFan, f: PolyFlux, xi: float) -> float:
    """An antiderivative of xi -> R(xi), continuous in xi.

    On a rarefaction, d/dxi [u*xi - f(u)] = u because f'(u) = xi there; on a
    constant part it is u*xi - f(u) as well, and the jumps of u*xi - f(u)
    across a shock vanish by Rankine-Hugoniot. So one formula covers all.
    """
    u = sample_fan(fan, xi)
    return u * xi - float(f(u))


def cell_average_fan(fan: RiemannFan, f: PolyFlux, xi_a: float, xi_b: float) -> float:
    """Mean of R over (xi_a, xi_b), exact up to the rarefaction inversion."""
    if not xi_a < xi_b:
        raise ValueError("need xi_a < xi_b")
    return (_primitive(fan, f, xi_b) - _primitive(fan, f, xi_a)) / (xi_b - xi_a)


def godunov_flux(f: PolyFlux, u_l, u_r):
    """min f over [u_l, u_r] if u_l <= u_r, else max f over [u_r, u_l].

    Vectorised over interfaces; the extremum is taken over the interval ends
    and the critical points of f inside, so it is exact.
    """
    ul = np.asarray(u_l, dtype=float)
    ur = np.asarray(u_r, dtype=float)
    lo = np.minimum(ul, ur)
    hi = np.maximum(ul, ur)
    flo, fhi = f(lo), f(hi)
    fmin = np.minimum(flo, fhi)
    fmax = np.maximum(flo, fhi)
    for c in f.critical_points:
        inside = (lo <= c) & (c <= hi)
        fc = float(f(c))
        fmin = np.where(inside, np.minimum(fmin, fc), fmin)
        fmax = np.where(inside, np.maximum(fmax, fc), fmax)
    out = np.where(ul <= ur, fmin, fmax)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class KunikValue:
    """P(xi) = sup_{v- <= s <= v+} (s*xi - f(s)), the self-similar primitive.

    ``P`` is a piecewise-linear copy (breakpoints at the slopes of a
    piecewise-linear envelope); ``value`` and ``slope`` are evaluated
    through the exact fan, P(xi) = u*xi - f(u) and P'(xi) = u with u = R(xi).
    """

    v_minus: float
    v_plus: float
    P: PiecewiseLinear
    fan: RiemannFan
    flux: PolyFlux

    def value(self, xi):
        return _primitive(self.fan, self.flux, xi)

    def slope(self, xi):
        return sample_fan(self.fan, xi)


def kunik_value(f: PolyFlux, v_minus: float, v_plus: float,
                tol: float | None = None) -> KunikValue:
    if v_minus > v_plus:
        raise ValueError("Kunik's value function is built for v_minus <= v_plus")
    fan = solve_riemann(f, v_minus, v_plus)
    if v_minus == v_plus:
        c = float(v_minus)
        P = PiecewiseLinear([0.0], [-float(f(c))], c, c)
        return KunikValue(c, c, P, fan, f)
    env_pl = fan.envelope.as_piecewise_linear(tol)
    s, e = env_pl.x, env_pl.y
    sigma = np.diff(e) / np.diff(s)
    # Legendre transform of a piecewise-linear convex function on [s0, sn]
    vals = s[:-1] * sigma - e[:-1]
    keep = np.concatenate([[True], sigma[1:] > np.maximum.accumulate(sigma)[:-1]])
    P = PiecewiseLinear(sigma[keep], vals[keep], s[0], s[-1])
    return KunikValue(float(v_minus), float(v_plus), P, fan, f)


def fan_profile(fan: RiemannFan, xi_lo: float, xi_hi: float, points: int = 401):
    """(xi, u) samples for output, with every wave edge included."""
    xi = np.linspace(xi_lo, xi_hi, points)
    edges = [s for s in fan.speeds() if xi_lo <= s <= xi_hi and math.isfinite(s)]
    xi = np.unique(np.concatenate([xi, edges]))
    return xi, np.array([sample_fan(fan, x) for x in xi])
