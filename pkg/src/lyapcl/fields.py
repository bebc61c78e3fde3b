"""Grids and cell-averaged fields, plus exact piecewise-constant profiles."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .envelope import PiecewiseLinear


@dataclass(frozen=True)
class Grid1D:
    x_left: float
    h: float
    n: int

    def __post_init__(self):
        if not (self.h > 0 and math.isfinite(self.h)):
            raise ValueError("mesh size must be positive and finite")
        if self.n < 0:
            raise ValueError("cell count must be nonnegative")

    @property
    def x_right(self) -> float:
        return self.x_left + self.n * self.h

    def edges(self) -> np.ndarray:
        return self.x_left + self.h * np.arange(self.n + 1)

    def centers(self) -> np.ndarray:
        return self.x_left + self.h * (np.arange(self.n) + 0.5)


@dataclass(frozen=True)
class CellField:
    """Cell averages on a uniform grid. Left of the grid the field equals
    ``u_minus``, right of it ``u_plus``.

    Infinite far-field states are accepted as "free end" markers by the
    projections (no constraint at that end); the solver rejects them.
    """

    grid: Grid1D
    values: np.ndarray
    u_minus: float
    u_plus: float

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        if v.size != self.grid.n:
            raise ValueError(f"expected {self.grid.n} values, got {v.size}")
        if not np.all(np.isfinite(v)):
            raise ValueError("cell values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "u_minus", float(self.u_minus))
        object.__setattr__(self, "u_plus", float(self.u_plus))

    @classmethod
    def from_values(cls, values, h: float = 1.0, x_left: float = 0.0,
                    u_minus: float = 0.0, u_plus: float = 0.0) -> CellField:
        values = np.asarray(values, dtype=float)
        return cls(Grid1D(float(x_left), float(h), values.size), values, u_minus, u_plus)

    @property
    def h(self) -> float:
        return self.grid.h

    @property
    def n(self) -> int:
        return self.grid.n

    def with_values(self, values) -> CellField:
        return CellField(self.grid, values, self.u_minus, self.u_plus)

    def bound(self) -> float:
        """M = max(|u-|, |u+|, max|u|)."""
        m = max(abs(self.u_minus), abs(self.u_plus))
        return max(m, float(np.max(np.abs(self.values)))) if self.n else m

    def primitive(self) -> PiecewiseLinear:
        """Continuous primitive, zero at the left grid edge."""
        edges = self.grid.edges()
        y = np.concatenate([[0.0], np.cumsum(self.values * self.h)])
        return PiecewiseLinear(edges, y, self.u_minus, self.u_plus)

    def on_grid(self, x_left: float, n: int) -> np.ndarray:
        """Values on an aligned grid with the same mesh size, using the
        far-field states where the field is not stored."""
        shift = int(round((self.grid.x_left - x_left) / self.h))
        if abs(x_left + shift * self.h - self.grid.x_left) > 1e-9 * self.h * (1 + abs(shift)):
            raise ValueError("grids are not aligned")
        out = np.empty(n)
        idx = np.arange(n) - shift
        out[idx < 0] = self.u_minus
        out[idx >= self.n] = self.u_plus
        inside = (idx >= 0) & (idx < self.n)
        out[inside] = self.values[idx[inside]]
        return out

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x_center", "u"])
            for x, u in zip(self.grid.centers(), self.values):
                w.writerow([f"{x:.17g}", f"{u:.17g}"])


def common_support(*fields: CellField) -> tuple[float, int]:
    """Smallest aligned grid (x_left, n) covering every field's grid."""
    h = fields[0].h
    lo = min(f.grid.x_left for f in fields)
    hi = max(f.grid.x_right for f in fields)
    return lo, int(round((hi - lo) / h))


@dataclass(frozen=True)
class PiecewiseConstant:
    """Step function: ``values[k]`` on (breaks[k], breaks[k+1]), far-field
    states outside."""

    breaks: np.ndarray
    values: np.ndarray
    u_minus: float
    u_plus: float

    def __post_init__(self):
        b = np.asarray(self.breaks, dtype=float).ravel()
        v = np.asarray(self.values, dtype=float).ravel()
        if b.size != v.size + 1:
            raise ValueError("need len(breaks) == len(values) + 1")
        if np.any(np.diff(b) < 0):
            raise ValueError("breaks must be nondecreasing")
        object.__setattr__(self, "breaks", b)
        object.__setattr__(self, "values", v)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        k = np.searchsorted(self.breaks, x, side="right") - 1
        padded = np.concatenate([[self.u_minus], self.values, [self.u_plus]])
        return padded[np.clip(k + 1, 0, padded.size - 1)]

    def primitive(self) -> PiecewiseLinear:
        b = self.breaks
        keep = np.concatenate([[True], np.diff(b) > 0])
        y = np.concatenate([[0.0], np.cumsum(self.values * np.diff(b))])
        return PiecewiseLinear(b[keep], y[keep], self.u_minus, self.u_plus)


def step_profile(u_minus: float, u_plus: float, shift: float = 0.0) -> PiecewiseConstant:
    """The pure discontinuity: u_minus for x < shift, u_plus for x > shift."""
    return PiecewiseConstant([shift], [], u_minus, u_plus)


@dataclass(frozen=True)
class Field2D:
    """Cell averages on a square-cell grid with zero far field.

    ``values[i, j]`` lives on (x_left + i h, x_left + (i+1) h) x
    (y_left + j h, y_left + (j+1) h).
    """

    values: np.ndarray
    h: float
    x_left: float = 0.0
    y_left: float = 0.0

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2:
            raise ValueError("Field2D needs a 2-D array")
        if not np.all(np.isfinite(v)):
            raise ValueError("cell values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def nx(self) -> int:
        return self.values.shape[0]

    @property
    def ny(self) -> int:
        return self.values.shape[1]

    @property
    def cell_volume(self) -> float:
        return self.h * self.h

    def bound(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def on_grid(self, x_left: float, y_left: float, nx: int, ny: int) -> np.ndarray:
        si = int(round((self.x_left - x_left) / self.h))
        sj = int(round((self.y_left - y_left) / self.h))
        out = np.zeros((nx, ny))
        out[si:si + self.nx, sj:sj + self.ny] = self.values
        return out
