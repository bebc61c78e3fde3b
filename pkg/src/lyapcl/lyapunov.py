"""Lyapunov functionals along a run and the decay audit."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .fields import CellField, Field2D
from .project import (IntervalSet, L1Ball, Monotone, distance_l2, project_monotone,
                      soft_threshold_level)

DEFAULT_TOL_ABS = 1e-8
DEFAULT_TOL_REL = 1e-10
# non-quadratic entropies are only approximated by the discrete flow
LOOSE_TOL_ABS = 1e-4


@dataclass(frozen=True)
class EntropyPair:
    """Convex entropy with eta(0) = 0 and its first two derivatives.

    kind: "power_even" (s**p, p even), "cosh_minus_one", or "custom_poly"
    (coefficients lowest degree first; convexity is checked on a sample
    range when ``check_convex`` is called).
    """

    kind: str
    p: int = 2
    coeffs: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind == "power_even":
            if self.p < 2 or self.p % 2:
                raise ValueError("power_even needs an even exponent >= 2")
        elif self.kind == "custom_poly":
            if not self.coeffs or self.coeffs[0] != 0.0:
                raise ValueError("custom_poly needs eta(0) = 0")
        elif self.kind != "cosh_minus_one":
            raise ValueError(f"unknown entropy kind {self.kind!r}")

    @classmethod
    def square(cls) -> EntropyPair:
        return cls("power_even", 2)

    @property
    def is_even(self) -> bool:
        if self.kind == "custom_poly":
            return all(c == 0.0 for c in self.coeffs[1::2])
        return True

    def eta(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "power_even":
            return s ** self.p
        if self.kind == "cosh_minus_one":
            return np.cosh(s) - 1.0
        return np.polynomial.polynomial.polyval(s, self.coeffs)

    def d_eta(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "power_even":
            return self.p * s ** (self.p - 1)
        if self.kind == "cosh_minus_one":
            return np.sinh(s)
        return np.polynomial.polynomial.polyval(s, np.polynomial.polynomial.polyder(self.coeffs))

    def dd_eta(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "power_even":
            return self.p * (self.p - 1) * s ** (self.p - 2)
        if self.kind == "cosh_minus_one":
            return np.cosh(s)
        return np.polynomial.polynomial.polyval(s, np.polynomial.polynomial.polyder(self.coeffs, 2))

    def relative(self, u, v):
        """eta(u | v) = eta(u) - eta(v) - eta'(v) (u - v)."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if self.kind == "power_even" and self.p == 2:
            return (u - v) ** 2
        return self.eta(u) - self.eta(v) - self.d_eta(v) * (u - v)

    def check_convex(self, lo: float, hi: float, samples: int = 1001) -> bool:
        return bool(np.all(self.dd_eta(np.linspace(lo, hi, samples)) >= 0.0))


@dataclass
class DecayReport:
    """Time series recorded along a run.

    ``violations`` is filled by :func:`audit_decay`.
    """

    times: list = field(default_factory=list)
    series: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)
    final: object = None

    def record(self, t: float, values: dict) -> None:
        if self.times and not t > self.times[-1]:
            raise ValueError("report times must increase strictly")
        k = len(self.times)
        self.times.append(float(t))
        for name, val in values.items():
            col = self.series.setdefault(name, [math.nan] * k)
            col.append(float(val))
        for name, col in self.series.items():
            if len(col) < k + 1:
                col.append(math.nan)

    def array(self, name: str) -> np.ndarray:
        return np.asarray(self.series[name], dtype=float)

    def to_csv(self, path) -> None:
        names = list(self.series)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", *names])
            for k, t in enumerate(self.times):
                w.writerow([f"{t:.17g}", *(f"{self.series[n][k]:.17g}" for n in names)])

    @classmethod
    def from_csv(cls, path) -> DecayReport:
        rep = cls()
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        header = rows[0]
        if not header or header[0] != "t":
            raise ValueError("report CSV must start with a 't' column")
        for row in rows[1:]:
            rep.record(float(row[0]), {n: float(x) for n, x in zip(header[1:], row[1:])})
        return rep


@dataclass(frozen=True)
class Violation:
    series: str
    t_before: float
    t_after: float
    increase: float
    index: int


@dataclass(frozen=True)
class AuditSummary:
    count: int
    worst_increase: float
    violations: tuple

    @property
    def passed(self) -> bool:
        return self.count == 0

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def lines(self) -> list[str]:
        out = [f"violations {self.count}", f"worst_increase {self.worst_increase:.17g}"]
        out += [f"{v.series} {v.t_before:.17g} {v.t_after:.17g} {v.increase:.17g}"
                for v in self.violations]
        return out


def is_lyapunov_series(name: str) -> bool:
    return name.startswith("d2_") or name.startswith("delta_")


def audit_decay(report: DecayReport, tol_abs: float = DEFAULT_TOL_ABS,
                tol_rel: float = DEFAULT_TOL_REL, series=None) -> AuditSummary:
    """Flag every step where a series grows by more than tol_abs + tol_rel*value.

    By default the distance (``d2_*``) and entropy (``delta_*``) series are
    scanned.
    """
    names = [n for n in report.series if is_lyapunov_series(n)] if series is None else list(series)
    found = []
    t = report.times
    for name in names:
        s = report.array(name)
        for k in range(s.size - 1):
            inc = s[k + 1] - s[k]
            if s[k + 1] > s[k] + tol_abs + tol_rel * abs(s[k]):
                found.append(Violation(name, t[k], t[k + 1], float(inc), k))
    report.violations = [(v.series, v.t_before, v.t_after, v.increase) for v in found]
    worst = max((v.increase for v in found), default=0.0)
    return AuditSummary(len(found), worst, tuple(found))


# ---------------------------------------------------------------------------
# functionals


def relative_entropy_delta(u: CellField, eta: EntropyPair) -> float:
    """Integral of eta(u | pi u) over the contact intervals of the monotone projection.

    Off the contacts u equals its projection; outside the grid u equals the
    far-field state, and so does the projection (the contact slope there is
    the far-field state), so only grid cells contribute.
    """
    _, contacts = project_monotone(u)
    total = 0.0
    n = u.n
    for (i0, i1), (_, _, c) in zip(contacts.spans, contacts.intervals):
        lo, hi = max(i0, 0), min(i1, n)
        if hi > lo:
            total += float(np.sum(eta.relative(u.values[lo:hi], c))) * u.h
    return total


def relative_entropy_direct(u: CellField, eta: EntropyPair) -> float:
    """Same quantity summed over every cell (no contact decomposition)."""
    proj, _ = project_monotone(u)
    return float(np.sum(eta.relative(u.values, proj.values))) * u.h


def delta_ball(u, r: float, eta: EntropyPair) -> float:
    """Integral of eta(u - pi_r u) with pi_r the L1-ball projection, eta even."""
    if not eta.is_even:
        raise ValueError("delta_ball needs an even entropy")
    if isinstance(u, Field2D):
        vals, vol = u.values, u.cell_volume
    else:
        if u.u_minus != 0.0 or u.u_plus != 0.0:
            raise ValueError("delta_ball needs zero far-field states")
        vals, vol = u.values, u.h
    s, active = soft_threshold_level(np.abs(vals), vol, r)
    if not active:
        return 0.0
    resid = np.sign(vals) * np.minimum(np.abs(vals), s)
    return float(np.sum(eta.eta(resid))) * vol


@dataclass(frozen=True)
class Norms:
    l1: float
    l2: float
    linf: float
    tv: float
    mass: float


def _phi_segments(u: CellField, jump_at: float = 0.0):
    """(u, phi, length) over the grid cells and the far-field gaps up to the
    jump of phi, splitting the cell that contains the jump."""
    edges = u.grid.edges()
    lo, hi = edges[:-1], edges[1:]
    left_len = np.clip(np.minimum(hi, jump_at) - lo, 0.0, None)
    right_len = np.clip(hi - np.maximum(lo, jump_at), 0.0, None)
    uu = np.concatenate([u.values, u.values])
    ph = np.concatenate([np.full(u.n, u.u_minus), np.full(u.n, u.u_plus)])
    ln = np.concatenate([left_len, right_len])
    extra_u, extra_phi, extra_len = [], [], []
    x0, x1 = u.grid.x_left, u.grid.x_right
    if x0 > jump_at:
        # left far field u_minus over (jump, x0) where phi = u_plus
        extra_u.append(u.u_minus), extra_phi.append(u.u_plus), extra_len.append(x0 - jump_at)
    if x1 < jump_at:
        extra_u.append(u.u_plus), extra_phi.append(u.u_minus), extra_len.append(jump_at - x1)
    return (np.concatenate([uu, extra_u]), np.concatenate([ph, extra_phi]),
            np.concatenate([ln, extra_len]))


def norms_and_tv(u: CellField, jump_at: float = 0.0) -> Norms:
    """L1/L2 norms and mass of u - phi (phi the step joining the far-field
    states at ``jump_at``), sup norm of u, total variation including the
    jumps to the far-field states."""
    uu, ph, ln = _phi_segments(u, jump_at)
    d = uu - ph
    l1 = float(np.sum(np.abs(d) * ln))
    l2 = math.sqrt(float(np.sum(d ** 2 * ln)))
    mass = float(np.sum(d * ln))
    full = np.concatenate([[u.u_minus], u.values, [u.u_plus]])
    tv = float(np.sum(np.abs(np.diff(full))))
    linf = max(abs(u.u_minus), abs(u.u_plus), float(np.max(np.abs(u.values))) if u.n else 0.0)
    return Norms(l1, l2, linf, tv, mass)


# ---------------------------------------------------------------------------
# observers for run(): each maps a field to a dict of named values

Observer = Callable[[object], dict]


def monotone_distance_observer(name: str = "d2_monotone") -> Observer:
    def obs(u: CellField):
        return {name: distance_l2(u, Monotone(u.u_minus, u.u_plus))}
    return obs


def interval_distance_observer(lo: float, hi: float, name: str = "d2_interval") -> Observer:
    target = IntervalSet(lo, hi)

    def obs(u):
        return {name: distance_l2(u, target)}
    return obs


def ball_distance_observer(r: float, name: str = "d2_l1ball") -> Observer:
    target = L1Ball(r)

    def obs(u):
        return {name: distance_l2(u, target)}
    return obs


def relative_entropy_observer(eta: EntropyPair,
                              name: str = "delta_relative_entropy") -> Observer:
    def obs(u: CellField):
        return {name: relative_entropy_delta(u, eta)}
    return obs


def ball_entropy_observer(r: float, eta: EntropyPair, name: str = "delta_ball") -> Observer:
    def obs(u):
        return {name: delta_ball(u, r, eta)}
    return obs


def norms_observer(jump_at: float = 0.0) -> Observer:
    def obs(u: CellField):
        n = norms_and_tv(u, jump_at)
        return {"l1": n.l1, "l2": n.l2, "linf": n.linf, "tv": n.tv, "mass": n.mass}
    return obs


__all__ = [
    "EntropyPair", "DecayReport", "AuditSummary", "Violation", "Norms",
    "audit_decay", "relative_entropy_delta", "relative_entropy_direct", "delta_ball",
    "norms_and_tv", "monotone_distance_observer", "interval_distance_observer",
    "ball_distance_observer", "relative_entropy_observer", "ball_entropy_observer",
    "norms_observer",
]
