"""Lower convex / upper concave envelopes.

Two kinds of input are handled:

* piecewise-linear functions on the whole line (breakpoints plus affine
  extensions at both ends), whose envelope is computed exactly by a
  monotone-chain pass over the breakpoints;
* graphs of a polynomial flux restricted to a bounded state interval, whose
  envelope is found on a sample, then refined so that every affine piece
  touches the curve at exact tangency points and every curved piece is the
  flux itself.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .flux import PolyFlux, derivative, lipschitz_bound

_EPS = np.finfo(float).eps


class UnboundedEnvelopeError(ValueError):
    """No affine minorant exists (left slope larger than right slope)."""


class LegendreDomainError(ValueError):
    """Slope outside the range of a convex function's slopes: the transform is +inf."""


@dataclass(frozen=True)
class PiecewiseLinear:
    """Continuous piecewise-linear function on the real line.

    Linear interpolation between breakpoints, affine extension with
    ``left_slope`` / ``right_slope`` outside. Infinite end slopes mean the
    function is +inf outside ``[x[0], x[-1]]``.
    """

    x: np.ndarray
    y: np.ndarray
    left_slope: float
    right_slope: float

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).ravel()
        y = np.asarray(self.y, dtype=float).ravel()
        if x.size == 0 or x.size != y.size:
            raise ValueError("need at least one breakpoint and matching x, y")
        if x.size > 1 and np.any(np.diff(x) <= 0):
            raise ValueError("breakpoint abscissae must be strictly increasing")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "left_slope", float(self.left_slope))
        object.__setattr__(self, "right_slope", float(self.right_slope))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.interp(t, self.x, self.y)
        with np.errstate(invalid="ignore"):
            left = t < self.x[0]
            right = t > self.x[-1]
            out = np.where(left, self.y[0] + self.left_slope * (t - self.x[0]), out)
            out = np.where(right, self.y[-1] + self.right_slope * (t - self.x[-1]), out)
        return out if out.ndim else float(out)

    def slopes(self) -> np.ndarray:
        """Slopes of every piece, including both extensions (length n + 1)."""
        inner = np.diff(self.y) / np.diff(self.x)
        return np.concatenate([[self.left_slope], inner, [self.right_slope]])

    def is_convex(self, rtol: float = 1e-12) -> bool:
        s = self.slopes()
        finite = s[np.isfinite(s)]
        scale = 1.0 + (np.max(np.abs(finite)) if finite.size else 0.0)
        return bool(np.all(np.diff(s) >= -rtol * scale))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "y"])
            for xi, yi in zip(self.x, self.y):
                w.writerow([f"{xi:.17g}", f"{yi:.17g}"])


@dataclass(frozen=True)
class ContactStructure:
    """Maximal open intervals where the envelope lies strictly below its input.

    ``intervals`` holds ``(x_j, y_j, c_j)`` with ``c_j`` the slope of the
    envelope on the interval; ends may be -inf / +inf. ``spans`` gives, for
    each interval, the first and last breakpoint index it touches (with -1 /
    n for unbounded ends).
    """

    intervals: tuple[tuple[float, float, float], ...] = ()
    spans: tuple[tuple[int, int], ...] = ()

    def __len__(self):
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    @property
    def left_unbounded(self) -> bool:
        return bool(self.intervals) and self.intervals[0][0] == -math.inf

    @property
    def right_unbounded(self) -> bool:
        return bool(self.intervals) and self.intervals[-1][1] == math.inf

    def mirrored(self, n_breakpoints: int) -> ContactStructure:
        """Image under x -> -x (used for decreasing targets)."""
        last = n_breakpoints - 1
        return ContactStructure(
            tuple((-b, -a, c) for a, b, c in reversed(self.intervals)),
            tuple((last - j, last - i) for i, j in reversed(self.spans)),
        )


@dataclass(frozen=True)
class EnvelopeResult:
    envelope: PiecewiseLinear
    contacts: ContactStructure
    # indices of the input breakpoints that are envelope vertices
    vertices: np.ndarray = field(repr=False, default=None)


def _lower_hull(x, y, left_slope, right_slope) -> list[int]:
    """Monotone chain over breakpoints with the two affine rays as virtual
    points at infinity. Collinear points are dropped, left to right."""
    xs, ys = x.tolist(), y.tolist()
    stack: list[int] = []
    for i in range(len(xs)):
        xi, yi = xs[i], ys[i]
        while stack:
            b = stack[-1]
            if len(stack) >= 2:
                a = stack[-2]
                cross = (xs[b] - xs[a]) * (yi - ys[a]) - (ys[b] - ys[a]) * (xi - xs[a])
                if cross <= 0.0:
                    stack.pop()
                    continue
            elif yi - ys[b] <= left_slope * (xi - xs[b]):
                # the left ray through i passes on or below b
                stack.pop()
                continue
            break
        stack.append(i)
    while len(stack) >= 2:
        a, b = stack[-2], stack[-1]
        if ys[b] - ys[a] >= right_slope * (xs[b] - xs[a]):
            stack.pop()
        else:
            break
    return stack


def _envelope_values(x, y, verts, left_slope, right_slope) -> np.ndarray:
    vx, vy = x[verts], y[verts]
    rho = np.interp(x, vx, vy)
    left = x < vx[0]
    right = x > vx[-1]
    rho[left] = vy[0] + left_slope * (x[left] - vx[0])
    rho[right] = vy[-1] + right_slope * (x[right] - vx[-1])
    return rho


def lower_convex_envelope(psi: PiecewiseLinear) -> EnvelopeResult:
    """Greatest convex minorant of a piecewise-linear function on R."""
    left, right = psi.left_slope, psi.right_slope
    if left > right:
        raise UnboundedEnvelopeError(
            f"left slope {left} exceeds right slope {right}: envelope is -inf")
    x, y = psi.x, psi.y
    verts = np.asarray(_lower_hull(x, y, left, right), dtype=int)
    rho = _envelope_values(x, y, verts, left, right)
    gap = y - rho

    vx, vy = x[verts], y[verts]
    seg_slopes = np.diff(vy) / np.diff(vx) if verts.size > 1 else np.empty(0)
    finite = seg_slopes[np.isfinite(seg_slopes)]
    spread = x[-1] - x[0]
    scale = np.max(np.abs(y)) + (np.max(np.abs(finite)) * spread if finite.size else 0.0)
    for s in (left, right):
        if np.isfinite(s):
            scale += abs(s) * spread
    tol = 16.0 * _EPS * (1.0 + scale)
    positive = gap > tol

    n = x.size
    intervals, spans = [], []
    # pieces: (first index, last index, slope, is_left_ray, is_right_ray)
    pieces = []
    if np.isfinite(left):
        pieces.append((0, int(verts[0]), left, True, False))
    for k in range(verts.size - 1):
        pieces.append((int(verts[k]), int(verts[k + 1]), float(seg_slopes[k]), False, False))
    if np.isfinite(right):
        pieces.append((int(verts[-1]), n - 1, right, False, True))
    for i0, i1, slope, is_left, is_right in pieces:
        hits = np.nonzero(positive[i0:i1 + 1])[0]
        if hits.size == 0:
            continue
        first, last = i0 + hits[0], i0 + hits[-1]
        if is_left and first == 0:
            xa, ia = -math.inf, -1
        else:
            ia = first - 1
            xa = float(x[ia])
        if is_right and last == n - 1:
            xb, ib = math.inf, n
        else:
            ib = last + 1
            xb = float(x[ib])
        intervals.append((xa, xb, float(slope)))
        spans.append((int(ia), int(ib)))
    env = PiecewiseLinear(vx, vy, left, right)
    return EnvelopeResult(env, ContactStructure(tuple(intervals), tuple(spans)), verts)


def upper_concave_envelope(psi: PiecewiseLinear) -> EnvelopeResult:
    """Least concave majorant, as the negated lower envelope of ``-psi``."""
    neg = PiecewiseLinear(psi.x, -psi.y, -psi.left_slope, -psi.right_slope)
    res = lower_convex_envelope(neg)
    env = res.envelope
    upper = PiecewiseLinear(env.x, -env.y, -env.left_slope, -env.right_slope)
    contacts = ContactStructure(
        tuple((a, b, -c) for a, b, c in res.contacts.intervals), res.contacts.spans)
    return EnvelopeResult(upper, contacts, res.vertices)


def legendre(pl: PiecewiseLinear, theta):
    """sup_x (theta*x - pl(x)) for convex ``pl``."""
    if not pl.is_convex():
        raise ValueError("legendre needs a convex piecewise-linear function")
    th = np.asarray(theta, dtype=float)
    if np.any(th < pl.left_slope) or np.any(th > pl.right_slope) or np.any(np.isnan(th)):
        raise LegendreDomainError("slope outside the range of the function's slopes")
    x, y = pl.x, pl.y
    inner = np.diff(y) / np.diff(x)
    # the sup sits at the vertex whose adjacent slopes straddle theta
    k = np.searchsorted(inner, th, side="left")
    best = np.full(th.shape, -np.inf)
    for d in (-1, 0, 1):
        kk = np.clip(k + d, 0, x.size - 1)
        best = np.maximum(best, th * x[kk] - y[kk])
    return best if best.ndim else float(best)


def dense_hull_envelope(xs, ys) -> PiecewiseLinear:
    """Lower convex hull of a point sample (free ends), via the monotone chain."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    verts = _lower_hull(xs, ys, -math.inf, math.inf)
    return PiecewiseLinear(xs[verts], ys[verts], -math.inf, math.inf)


# ---------------------------------------------------------------------------
# envelopes of a polynomial graph over a bounded state interval


@dataclass(frozen=True)
class EnvelopePiece:
    kind: str  # "chord" (affine, touches the curve only at its ends) or "arc" (equal to f)
    start: float
    end: float
    slope: float = math.nan  # chords only


@dataclass(frozen=True)
class FluxEnvelope:
    """Lower convex (``upper=False``) or upper concave envelope of ``f`` on [a, b].

    Outside [a, b] the lower envelope is +inf and the upper one -inf.
    """

    flux: PolyFlux
    a: float
    b: float
    upper: bool
    pieces: tuple[EnvelopePiece, ...]

    def _locate(self, t):
        starts = np.array([p.start for p in self.pieces])
        return np.clip(np.searchsorted(starts, t, side="right") - 1, 0, len(self.pieces) - 1)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        idx = self._locate(t)
        out = np.asarray(self.flux(t), dtype=float)
        for k, p in enumerate(self.pieces):
            if p.kind == "chord":
                m = idx == k
                out[m] = self.flux(p.start) + p.slope * (t[m] - p.start)
        out[(t < self.a) | (t > self.b)] = -np.inf if self.upper else np.inf
        return float(out[0]) if scalar else out

    def slope(self, t):
        """Derivative of the envelope (right derivative at piece joints)."""
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        idx = self._locate(t)
        out = np.asarray(derivative(self.flux)(t), dtype=float)
        for k, p in enumerate(self.pieces):
            if p.kind == "chord":
                out[idx == k] = p.slope
        return float(out[0]) if scalar else out

    def contacts(self) -> ContactStructure:
        """The chords: intervals where the envelope leaves the curve."""
        return ContactStructure(tuple((p.start, p.end, p.slope)
                                      for p in self.pieces if p.kind == "chord"))

    def as_piecewise_linear(self, tol: float | None = None) -> PiecewiseLinear:
        """Piecewise-linear copy: arcs sampled so interpolation error <= tol."""
        width = self.b - self.a
        curv = lipschitz_bound(derivative(self.flux), self.a, self.b) if width > 0 else 0.0
        if tol is None:
            tol = 1e-12 * (1.0 + curv * width ** 2)
        xs = []
        for p in self.pieces:
            if p.kind == "chord" or p.end == p.start:
                xs.append(np.array([p.start, p.end]))
            else:
                step = math.sqrt(8.0 * tol / curv) if curv > 0 else (p.end - p.start)
                k = max(1, int(math.ceil((p.end - p.start) / step)))
                xs.append(np.linspace(p.start, p.end, k + 1))
        x = np.unique(np.concatenate(xs)) if xs else np.array([self.a])
        y = np.asarray(self(x), dtype=float)
        return PiecewiseLinear(x, y, -math.inf, math.inf)


def _refine_one_sided(fp, fv, fixed, guess, lo, hi):
    """Tangency point q of the line from (fixed, f(fixed)): f'(q)(q-fixed) = f(q)-f(fixed)."""
    f0 = fv(fixed)

    def g(q):
        return fp(q) * (q - fixed) - (fv(q) - f0)

    glo, ghi = g(lo), g(hi)
    if glo == 0.0:
        return lo
    if ghi == 0.0:
        return hi
    if glo * ghi < 0.0:
        return brentq(g, lo, hi, xtol=1e-15, rtol=4 * _EPS, maxiter=200)
    return guess


def _refine_two_sided(fp, fpp, fv, p, q, box_p, box_q):
    """Newton on the double tangency f'(p) = f'(q) = (f(q)-f(p))/(q-p)."""
    p0, q0 = p, q
    for _ in range(60):
        L = q - p
        if L <= 0:
            return p0, q0
        m = (fv(q) - fv(p)) / L
        r1, r2 = fp(p) - m, fp(q) - m
        dm_dp = (m - fp(p)) / L
        dm_dq = (fp(q) - m) / L
        j11, j12 = fpp(p) - dm_dp, -dm_dq
        j21, j22 = -dm_dp, fpp(q) - dm_dq
        det = j11 * j22 - j12 * j21
        if det == 0.0 or not np.isfinite(det):
            return p0, q0
        dp = (r1 * j22 - r2 * j12) / det
        dq = (j11 * r2 - j21 * r1) / det
        p, q = p - dp, q - dq
        if not (box_p[0] <= p <= box_p[1] and box_q[0] <= q <= box_q[1]):
            return p0, q0
        if abs(dp) <= 4 * _EPS * (1 + abs(p)) and abs(dq) <= 4 * _EPS * (1 + abs(q)):
            return p, q
    return p, q


def _build_lower(f: PolyFlux, a: float, b: float, samples: int) -> tuple[EnvelopePiece, ...]:
    fp = derivative(f)
    fpp = derivative(fp)
    extra = [r for r in np.concatenate([f.critical_points, fp.critical_points])
             if a < r < b]
    xs = np.unique(np.concatenate([np.linspace(a, b, samples + 1), extra]))
    ys = np.asarray(f(xs), dtype=float)
    verts = _lower_hull(xs, ys, -math.inf, math.inf)

    fv = lambda s: float(f(s))
    fpv = lambda s: float(fp(s))
    fppv = lambda s: float(fpp(s))
    last = xs.size - 1
    chords = []
    for i, k in zip(verts[:-1], verts[1:]):
        if k == i + 1:
            continue
        p, q = float(xs[i]), float(xs[k])
        box_p = (float(xs[max(i - 1, 0)]), float(xs[min(i + 1, last)]))
        box_q = (float(xs[max(k - 1, 0)]), float(xs[min(k + 1, last)]))
        if i == 0 and k == last:
            pass
        elif i == 0:
            q = _refine_one_sided(fpv, fv, p, q, *box_q)
        elif k == last:
            p = _refine_one_sided(fpv, fv, q, p, *box_p)
        else:
            p, q = _refine_two_sided(fpv, fppv, fv, p, q, box_p, box_q)
        chords.append([p, q])
    for c0, c1 in zip(chords[:-1], chords[1:]):
        if c1[0] < c0[1]:
            mid = 0.5 * (c0[1] + c1[0])
            c0[1] = c1[0] = mid

    pieces = []
    cursor = a
    for p, q in chords:
        if p > cursor:
            pieces.append(EnvelopePiece("arc", cursor, p))
        slope = (fv(q) - fv(p)) / (q - p)
        pieces.append(EnvelopePiece("chord", p, q, slope))
        cursor = q
    if cursor < b or not pieces:
        pieces.append(EnvelopePiece("arc", cursor, b))
    return tuple(pieces)


def _envelope_defect(env: FluxEnvelope, check_points: int) -> float:
    """Largest amount by which the lower envelope exceeds f, over chord spans."""
    worst = 0.0
    for p in env.pieces:
        if p.kind != "chord":
            continue
        t = np.linspace(p.start, p.end, check_points)
        worst = max(worst, float(np.max(env(t) - env.flux(t))))
    return worst


def flux_envelope(f: PolyFlux, a: float, b: float, upper: bool = False,
                  samples: int = 4096, max_samples: int = 1 << 20) -> FluxEnvelope:
    """Envelope of the graph of ``f`` restricted to [a, b].

    Sampling is refined until the affine pieces stay below the curve to
    within 1e-10 * (1 + max|f''| * width**2).
    """
    a, b = float(a), float(b)
    if a > b:
        raise ValueError("flux_envelope needs a <= b")
    g = PolyFlux([-c for c in f.coeffs]) if upper else f
    if a == b:
        return FluxEnvelope(f, a, b, upper, (EnvelopePiece("arc", a, b),))
    curv = lipschitz_bound(derivative(g), a, b)
    eps_f = 1e-10 * (1.0 + curv * (b - a) ** 2)
    n = samples
    while True:
        lower = FluxEnvelope(g, a, b, False, _build_lower(g, a, b, n))
        if _envelope_defect(lower, 2049) <= eps_f or n >= max_samples:
            break
        n *= 4
    pieces = lower.pieces
    if upper:
        pieces = tuple(EnvelopePiece(p.kind, p.start, p.end, -p.slope) for p in pieces)
    return FluxEnvelope(f, a, b, upper, pieces)
