"""L2 projections onto the convex target sets and the distances to them.

Targets: nondecreasing (or nonincreasing) profiles joining two far-field
states, the L1 ball of radius r, functions with values in an interval, and
the L2 ball.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .envelope import ContactStructure, EnvelopeResult, lower_convex_envelope
from .fields import CellField, Field2D, Grid1D


@dataclass(frozen=True)
class Monotone:
    """Monotone profiles from u_minus to u_plus; decreasing when u_minus > u_plus.
    Infinite states mean a free end."""

    u_minus: float
    u_plus: float


@dataclass(frozen=True)
class L1Ball:
    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("ball radius must be positive")


@dataclass(frozen=True)
class IntervalSet:
    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("interval needs lo <= hi")


@dataclass(frozen=True)
class L2Ball:
    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("ball radius must be positive")


TargetSet = Union[Monotone, L1Ball, IntervalSet, L2Ball]


class FarFieldError(ValueError):
    """Field and target disagree on the far-field states."""


# ---------------------------------------------------------------------------
# monotone cone


def _mirror(u: CellField) -> CellField:
    g = Grid1D(-u.grid.x_right, u.h, u.n)
    return CellField(g, u.values[::-1], u.u_plus, u.u_minus)


def monotone_envelope(u: CellField) -> EnvelopeResult:
    """Lower convex envelope of the primitive of a nondecreasing-target field."""
    return lower_convex_envelope(u.primitive())


def _increasing_projection(u: CellField) -> tuple[np.ndarray, ContactStructure]:
    res = monotone_envelope(u)
    verts = res.vertices
    n = u.n
    out = np.empty(n)
    # cells left of the first vertex follow the left ray, right of the last the right ray
    out[:verts[0]] = u.u_minus
    out[verts[-1]:] = u.u_plus
    for a, b in zip(verts[:-1], verts[1:]):
        # slice means keep single-cell segments exact
        out[a:b] = np.mean(u.values[a:b])
    return out, res.contacts


def project_monotone(u: CellField) -> tuple[CellField, ContactStructure]:
    """L2 projection onto monotone profiles joining u.u_minus to u.u_plus.

    The projection is the derivative of the lower convex envelope of a
    primitive; for a cell field the envelope bends only at cell edges, so the
    derivative is itself a cell field. Contact intervals carry the constant
    projected value ``c_j``.
    """
    if math.isnan(u.u_minus) or math.isnan(u.u_plus):
        raise FarFieldError("far-field states must not be NaN")
    if u.u_minus > u.u_plus:
        m = _mirror(u)
        vals, contacts = _increasing_projection(m)
        return u.with_values(vals[::-1]), contacts.mirrored(u.n + 1)
    vals, contacts = _increasing_projection(u)
    return u.with_values(vals), contacts


def project_monotone_infsup(u: CellField) -> CellField:
    """Reference projection from the inf-sup of window means, O(n^3)."""
    if u.u_minus > u.u_plus:
        return u.with_values(project_monotone_infsup(_mirror(u)).values[::-1])
    v = u.values
    n = v.size
    prefix = np.concatenate([[0.0], np.cumsum(v)])
    # z -> +inf: every finite window mean tends to u_plus
    at_infinity = max(u.u_minus, u.u_plus)
    out = np.empty(n)
    for k in range(n):
        i = np.arange(k + 1)[:, None]
        j = np.arange(k, n)[None, :]
        means = (prefix[j + 1] - prefix[i]) / (j + 1 - i)
        inner = np.maximum(means.max(axis=0), u.u_minus)
        out[k] = min(inner.min(), at_infinity)
    return u.with_values(out)


# ---------------------------------------------------------------------------
# L1 ball


@dataclass(frozen=True)
class BallProjectionResult:
    projected: Union[CellField, Field2D]
    threshold_s: float
    active: bool


def soft_threshold_level(abs_values: np.ndarray, cell_volume: float, r: float) -> tuple[float, bool]:
    """Level s with sum (|v| - s)^+ * vol = r, or (0, False) when already inside.

    The map s -> I(s) is piecewise linear with kinks at the sorted |v|, so
    the root is found by sorting and one linear solve.
    """
    if not r > 0:
        raise ValueError("ball radius must be positive")
    a = np.sort(np.asarray(abs_values, dtype=float).ravel())[::-1]
    if a.size == 0 or a.sum() * cell_volume <= r:
        return 0.0, False
    target = r / cell_volume
    csum = np.cumsum(a)
    k = np.arange(a.size)
    # I at the kink a[k], in units of cell volume
    at_kinks = np.concatenate([[0.0], csum[:-1]]) - k * a
    above = np.nonzero(at_kinks > target)[0]
    m = int(above[0]) if above.size else a.size
    s = (csum[m - 1] - target) / m
    return float(min(max(s, 0.0), a[0])), True


def _ball_values(v: np.ndarray, vol: float, r: float):
    s, active = soft_threshold_level(np.abs(v), vol, r)
    if not active:
        return v.copy(), 0.0, False
    return np.sign(v) * np.maximum(np.abs(v) - s, 0.0), s, True


def project_l1ball(v, r: float) -> BallProjectionResult:
    if isinstance(v, Field2D):
        vals, s, active = _ball_values(v.values, v.cell_volume, r)
        return BallProjectionResult(Field2D(vals, v.h, v.x_left, v.y_left), s, active)
    if isinstance(v, CellField):
        if v.u_minus != 0.0 or v.u_plus != 0.0:
            raise FarFieldError("the L1 ball needs zero far-field states")
        vals, s, active = _ball_values(v.values, v.h, r)
        return BallProjectionResult(v.with_values(vals), s, active)
    raise TypeError(f"unsupported field type {type(v).__name__}")


# ---------------------------------------------------------------------------
# interval set and generic entry points


def project_interval(u, lo: float, hi: float):
    """Pointwise clamp to [lo, hi]."""
    if lo > hi:
        raise ValueError("interval needs lo <= hi")
    if isinstance(u, CellField):
        return CellField(u.grid, np.clip(u.values, lo, hi),
                         min(max(u.u_minus, lo), hi), min(max(u.u_plus, lo), hi))
    if isinstance(u, Field2D):
        return Field2D(np.clip(u.values, lo, hi), u.h, u.x_left, u.y_left)
    return np.clip(np.asarray(u, dtype=float), lo, hi)


def _values_and_volume(u):
    if isinstance(u, Field2D):
        return u.values, u.cell_volume, (0.0, 0.0)
    return u.values, u.h, (u.u_minus, u.u_plus)


def project(u, target: TargetSet):
    if isinstance(target, Monotone):
        _check_far_field(u, target)
        return project_monotone(u)[0]
    if isinstance(target, L1Ball):
        return project_l1ball(u, target.r).projected
    if isinstance(target, IntervalSet):
        return project_interval(u, target.lo, target.hi)
    if isinstance(target, L2Ball):
        vals, vol, ends = _values_and_volume(u)
        if ends != (0.0, 0.0):
            raise FarFieldError("the L2 ball needs zero far-field states")
        norm = math.sqrt(float(np.sum(vals ** 2)) * vol)
        scale = 1.0 if norm <= target.r else target.r / norm
        if isinstance(u, Field2D):
            return Field2D(vals * scale, u.h, u.x_left, u.y_left)
        return u.with_values(vals * scale)
    raise TypeError(f"unknown target {target!r}")


def _check_far_field(u, target: Monotone):
    if not isinstance(u, CellField):
        raise TypeError("the monotone target is one-dimensional")
    if (u.u_minus, u.u_plus) != (float(target.u_minus), float(target.u_plus)):
        raise FarFieldError(
            f"field far-field ({u.u_minus}, {u.u_plus}) differs from target "
            f"({target.u_minus}, {target.u_plus})")


def distance_l2(u, target: TargetSet) -> float:
    """||u - proj(u)||_2 over the whole space, far field included."""
    if isinstance(target, Monotone):
        _check_far_field(u, target)
        p, _ = project_monotone(u)
        # outside the grid the projection follows the far-field rays exactly
        return math.sqrt(float(np.sum((u.values - p.values) ** 2)) * u.h)
    vals, vol, ends = _values_and_volume(u)
    if isinstance(target, L1Ball):
        if ends != (0.0, 0.0):
            return math.inf
        s, active = soft_threshold_level(np.abs(vals), vol, target.r)
        if not active:
            return 0.0
        return math.sqrt(float(np.sum(np.minimum(np.abs(vals), s) ** 2)) * vol)
    if isinstance(target, IntervalSet):
        if any(e < target.lo or e > target.hi for e in ends):
            return math.inf
        d = np.maximum(target.lo - vals, 0.0) + np.maximum(vals - target.hi, 0.0)
        return math.sqrt(float(np.sum(d ** 2)) * vol)
    if isinstance(target, L2Ball):
        if ends != (0.0, 0.0):
            return math.inf
        return max(math.sqrt(float(np.sum(vals ** 2)) * vol) - target.r, 0.0)
    raise TypeError(f"unknown target {target!r}")
