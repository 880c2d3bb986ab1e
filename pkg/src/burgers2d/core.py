"""Mesh, cell-average fields, quadrature and norm/moment primitives.

A field is a plain array of cell averages u[i, j] on a uniform rectangular
grid; index i runs along x1, index j along x2.  Everything downstream
(scheme, diagnostics, self-similar machinery) works on these two types.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np

BOUNDARIES = ("outflow", "periodic")


class SupportEscapeWarning(UserWarning):
    """Initial datum (or evolved state) has support reaching outside the box."""


@dataclass(frozen=True)
class Grid2D:
    """Uniform rectangular mesh of n1 x n2 cells.

    Cell (i, j) covers [x1_min + i*h1, x1_min + (i+1)*h1] x
    [x2_min + j*h2, x2_min + (j+1)*h2].
    """

    x1_min: float
    x2_min: float
    h1: float
    h2: float
    n1: int
    n2: int
    boundary: str = "outflow"

    def __post_init__(self):
        if not (self.h1 > 0 and self.h2 > 0):
            raise ValueError(f"cell widths must be positive, got h1={self.h1}, h2={self.h2}")
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError(f"cell counts must be >= 1, got n1={self.n1}, n2={self.n2}")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")

    @property
    def x1_max(self) -> float:
        return self.x1_min + self.n1 * self.h1

    @property
    def x2_max(self) -> float:
        return self.x2_min + self.n2 * self.h2

    @property
    def cell_area(self) -> float:
        return self.h1 * self.h2

    def x1_edges(self) -> np.ndarray:
        return self.x1_min + self.h1 * np.arange(self.n1 + 1)

    def x2_edges(self) -> np.ndarray:
        return self.x2_min + self.h2 * np.arange(self.n2 + 1)

    def x1_centers(self) -> np.ndarray:
        return self.x1_min + self.h1 * (np.arange(self.n1) + 0.5)

    def x2_centers(self) -> np.ndarray:
        return self.x2_min + self.h2 * (np.arange(self.n2) + 0.5)


def build_grid(bounds, resolution, boundary: str = "outflow") -> Grid2D:
    """Build a uniform grid over ``bounds = ((x1_min, x1_max), (x2_min, x2_max))``
    with ``resolution = (n1, n2)`` cells."""
    (x1_min, x1_max), (x2_min, x2_max) = bounds
    n1, n2 = int(resolution[0]), int(resolution[1])
    w, h = x1_max - x1_min, x2_max - x2_min
    if w <= 0 or h <= 0:
        raise ValueError(f"domain extents must be positive, got {w} x {h}")
    if n1 < 1 or n2 < 1:
        raise ValueError(f"cell counts must be >= 1, got {n1} x {n2}")
    return Grid2D(float(x1_min), float(x2_min), w / n1, h / n2, n1, n2, boundary)


@dataclass(frozen=True)
class CellField:
    """Cell averages of the conserved quantity at one instant.

    ``values`` has shape (n1, n2) and is frozen after construction; ``meta``
    carries non-numeric annotations (e.g. the support-escape flag set by
    :func:`discretize`).
    """

    grid: Grid2D
    values: np.ndarray
    time: float = 0.0
    meta: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if v.shape != (self.grid.n1, self.grid.n2):
            raise ValueError(f"values shape {v.shape} does not match grid {(self.grid.n1, self.grid.n2)}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        if self.time < 0:
            raise ValueError(f"time must be nonnegative, got {self.time}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def with_values(self, values: np.ndarray, time: float | None = None) -> "CellField":
        return CellField(self.grid, values, self.time if time is None else time, dict(self.meta))

    def mass(self) -> float:
        """Integral of u over the box (signed)."""
        return float(np.sum(self.values)) * self.grid.cell_area


@dataclass(frozen=True)
class Constants:
    """Calibrated universal constants of the decay and moment estimates."""

    c_infty: float
    c_nq: float

    def __post_init__(self):
        if not (self.c_infty > 0 and self.c_nq > 0):
            raise ValueError(f"constants must be positive, got c_infty={self.c_infty}, c_nq={self.c_nq}")


def lp_norm(field: CellField, p: float) -> float:
    """Discrete L^p norm of the cell averages, p in [1, inf]."""
    if p != math.inf and p < 1:
        raise ValueError(f"p must be >= 1 or inf, got {p}")
    a = np.abs(field.values)
    if p == math.inf:
        return float(a.max()) if a.size else 0.0
    return float(np.sum(a**p) * field.grid.cell_area) ** (1.0 / p)


def gauss_cell_averages(fn, grid: Grid2D, order: int = 3) -> np.ndarray:
    """Cell averages of ``fn(x1, x2)`` by tensor Gauss-Legendre quadrature.

    ``fn`` must accept broadcastable arrays.  Exact for polynomials of degree
    2*order-1 per direction; kernels with closed-form antiderivatives bypass
    this through their own ``cell_averages``.
    """
    if order < 1:
        raise ValueError(f"quadrature order must be >= 1, got {order}")
    nodes, weights = np.polynomial.legendre.leggauss(order)
    # map [-1, 1] nodes onto every cell; weights normalized to average
    x1 = grid.x1_centers()[:, None] + (grid.h1 / 2) * nodes[None, :]  # (n1, q)
    x2 = grid.x2_centers()[:, None] + (grid.h2 / 2) * nodes[None, :]  # (n2, q)
    w = weights / 2.0
    vals = fn(x1[:, None, :, None], x2[None, :, None, :])  # (n1, n2, q, q)
    vals = np.broadcast_to(vals, (grid.n1, grid.n2, order, order))
    return np.einsum("ijab,a,b->ij", vals, w, w)


def discretize(datum, grid: Grid2D, order: int = 3) -> CellField:
    """Project an initial datum onto cell averages at t = 0.

    Data objects that know exact per-cell integrals provide
    ``cell_averages(grid)``; anything else must be callable as
    ``datum(x1, x2)`` and is integrated with ``order`` x ``order`` Gauss
    quadrature per cell.  A datum whose declared support sticks out of the
    box yields a ``support_clipped`` flag in the result metadata and a
    :class:`SupportEscapeWarning`.
    """
    if hasattr(datum, "cell_averages"):
        values = datum.cell_averages(grid)
    elif callable(datum):
        values = gauss_cell_averages(datum, grid, order)
    else:
        raise TypeError(f"cannot discretize {type(datum).__name__}: no cell_averages and not callable")

    meta: dict = {}
    box = getattr(datum, "support_box", None)
    if box is not None:
        (s1lo, s1hi), (s2lo, s2hi) = box
        tol = 1e-12 * max(grid.h1, grid.h2)
        if s1lo < grid.x1_min - tol or s1hi > grid.x1_max + tol or s2lo < grid.x2_min - tol or s2hi > grid.x2_max + tol:
            meta["support_clipped"] = True
            warnings.warn(
                f"datum support [{s1lo}, {s1hi}] x [{s2lo}, {s2hi}] not contained in grid box",
                SupportEscapeWarning,
                stacklevel=2,
            )
    return CellField(grid, values, 0.0, meta)
