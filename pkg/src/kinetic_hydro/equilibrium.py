"""Signature-function equilibria on a uniform velocity grid.

The equilibrium profile of a density u is the signature function

    chi_u(v) = +1  if 0 < v <= u
               -1  if u <= v < 0
                0  otherwise

so that its velocity integral is exactly u.  Everything downstream
(relaxation, contraction ledgers, entropy residuals) leans on two
discrete identities that the sharp-cell projection below preserves to
rounding:

    sum_j proj(u)[j] * dv = u
    sum_j |proj(u1) - proj(u2)|[j] * dv = |u1 - u2|

Projection is done in index space: with the zero velocity pinned to a
cell edge, cell j covers [k_j, k_j + 1) in units of dv, and the cell
average of chi_u over it is  clip(u/dv, k_j, k_j+1) - clip(0, k_j, k_j+1).
Full cells get exactly +-1, a single cell holds the fractional remainder,
and both identities reduce to telescoping sums.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import OutOfRangeError

__all__ = [
    "VelocityGrid",
    "EquilibriumSlice",
    "chi_pointwise",
    "project_equilibrium",
    "project_equilibrium_field",
    "zeroth_moment",
    "zeroth_moment_field",
    "flux_moment",
]

# Relative slack when checking that 0 sits on a cell edge at construction.
_EDGE_SNAP_TOL = 1e-9


@dataclass
class VelocityGrid:
    """Uniform cell-centered grid on [v_min, v_max] with 0 on a cell edge.

    The requested bounds are snapped so that every edge is an exact
    integer multiple of dv away from zero; the adjustment is at most
    ``_EDGE_SNAP_TOL * (v_max - v_min)`` or construction fails.
    """

    v_min: float
    v_max: float
    n_cells: int
    dv: float = field(init=False)
    zero_index: int = field(init=False)      # number of cells below v = 0
    edges: np.ndarray = field(init=False, repr=False)
    centers: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n_cells < 2:
            raise ValueError("velocity grid needs at least 2 cells")
        if not (self.v_min < 0.0 < self.v_max):
            raise ValueError(
                f"velocity grid must straddle 0: got [{self.v_min}, {self.v_max}]")
        span = self.v_max - self.v_min
        dv = span / self.n_cells
        j0 = int(round(-self.v_min / dv))
        if abs(self.v_min + j0 * dv) > _EDGE_SNAP_TOL * span or not 0 < j0 < self.n_cells:
            raise ValueError(
                f"0 does not lie on a cell edge of [{self.v_min}, {self.v_max}] "
                f"with {self.n_cells} cells (dv = {dv})")
        self.dv = dv
        self.zero_index = j0
        k = np.arange(self.n_cells + 1) - j0        # edge indices relative to 0
        self.edges = k * dv
        self.centers = (k[:-1] + 0.5) * dv
        self.v_min = float(self.edges[0])
        self.v_max = float(self.edges[-1])

    @classmethod
    def symmetric(cls, v_max: float, n_cells: int) -> "VelocityGrid":
        if n_cells % 2:
            raise ValueError("symmetric grid needs an even cell count")
        return cls(-v_max, v_max, n_cells)

    # lower cell-edge indices in units of dv, shape (n_cells,)
    @property
    def lower_k(self) -> np.ndarray:
        return np.arange(self.n_cells) - self.zero_index

    def covers(self, u: float) -> bool:
        return self.v_min <= u <= self.v_max

    def project(self, u: float) -> "EquilibriumSlice":
        return project_equilibrium(u, self)

    def same_as(self, other: "VelocityGrid") -> bool:
        return (self.n_cells == other.n_cells
                and self.v_min == other.v_min and self.v_max == other.v_max)


@dataclass
class EquilibriumSlice:
    """Cell averages of chi_u on a velocity grid.

    At most one entry is fractional (the cell containing u); all others
    are 0 or +-1, and ``sum(values) * dv`` recovers u to a few ulp.
    """

    values: np.ndarray
    grid: VelocityGrid

    def moment(self) -> float:
        return zeroth_moment(self.values, self.grid)


def chi_pointwise(u: float, v: float) -> int:
    """Signature of u evaluated at velocity v: one of -1, 0, +1."""
    if 0.0 < v <= u:
        return 1
    if u <= v < 0.0:
        return -1
    return 0


def _check_range(u_arr: np.ndarray, grid: VelocityGrid) -> None:
    bad = (u_arr < grid.v_min) | (u_arr > grid.v_max)
    if np.any(bad):
        worst = float(u_arr[bad].flat[np.argmax(np.abs(u_arr[bad]))])
        raise OutOfRangeError(
            f"density {worst} outside velocity grid [{grid.v_min}, {grid.v_max}]; "
            "the grid no longer covers the solution support")


def project_equilibrium_field(w: np.ndarray, grid: VelocityGrid) -> np.ndarray:
    """Sharp-cell projection of a density field, shape (..., n_cells)."""
    w = np.asarray(w, dtype=float)
    _check_range(w, grid)
    k = grid.lower_k.astype(float)
    u_idx = w / grid.dv
    # cell average of chi in index space; exact +-1 on full cells
    vals = np.clip(u_idx[..., None], k, k + 1.0) - np.clip(0.0, k, k + 1.0)
    return vals


def project_equilibrium(u: float, grid: VelocityGrid) -> EquilibriumSlice:
    """Project a single density onto its discrete equilibrium slice."""
    vals = project_equilibrium_field(np.asarray(float(u)), grid)
    return EquilibriumSlice(values=vals, grid=grid)


def _values_of(g) -> np.ndarray:
    return g.values if isinstance(g, EquilibriumSlice) else np.asarray(g, dtype=float)


def zeroth_moment(g, grid: VelocityGrid) -> float:
    """sum_j g[j] * dv, the density carried by a velocity slice."""
    vals = _values_of(g)
    if vals.shape[-1] != grid.n_cells:
        raise ValueError(f"slice length {vals.shape[-1]} != grid cells {grid.n_cells}")
    return float(np.sum(vals) * grid.dv)


def zeroth_moment_field(g: np.ndarray, grid: VelocityGrid) -> np.ndarray:
    """Row-wise zeroth moment of a (..., n_cells) array."""
    g = np.asarray(g, dtype=float)
    if g.shape[-1] != grid.n_cells:
        raise ValueError(f"slice length {g.shape[-1]} != grid cells {grid.n_cells}")
    return np.sum(g, axis=-1) * grid.dv


def flux_moment(g, grid: VelocityGrid, flux) -> float:
    """Velocity moment of g against a(v), integrated exactly per cell.

    Uses antiderivative differences A(edge_{j+1}) - A(edge_j), which is
    the exact integral of a(v) against a piecewise-constant slice.  For
    an equilibrium slice of u this telescopes to A(u) - A(0) up to one
    fractional-cell quadrature error <= sup|a'| dv^2 / 8.
    """
    vals = _values_of(g)
    if vals.shape[-1] != grid.n_cells:
        raise ValueError(f"slice length {vals.shape[-1]} != grid cells {grid.n_cells}")
    edge_flux = flux.A(grid.edges)
    return float(np.dot(vals, np.diff(edge_flux)))
