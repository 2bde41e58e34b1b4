"""Godunov finite-volume solver for the macroscopic conservation law.

This is the continuum target the kinetic moments are tested against:
first-order monotone (hence L1-contractive and TVD) with ghost-cell
Riemann boundary treatment, so the wall datum is admitted only when the
wave structure lets it enter (weak enforcement).  At x=0 the datum comes
from a kinetic inflow density reduced to its zeroth moment over incoming
velocities; at x=1 it is a macroscopic trace.  An explicit first-order
source split handles the inhomogeneous law.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import CflViolationError
from .flux_models import FluxModel, godunov_flux
from .kinetic_solver import BoundaryData, SpatialGrid
from .equilibrium import VelocityGrid

__all__ = [
    "MacroState",
    "MacroBoundary",
    "godunov_step",
    "source_split_step",
    "solve_macro",
]


@dataclass
class MacroState:
    """Cell-averaged density field at one time."""

    w: np.ndarray
    time: float


@dataclass
class MacroBoundary:
    """Ghost-cell wall data: t -> density at each wall."""

    w0_trace: Callable[[float], float]
    w1_trace: Callable[[float], float]

    @classmethod
    def constant(cls, w0: float, w1: float) -> "MacroBoundary":
        return cls(w0_trace=lambda t: float(w0), w1_trace=lambda t: float(w1))

    @classmethod
    def from_kinetic(cls, boundary: BoundaryData, velocity: VelocityGrid,
                     flux: FluxModel, w1: Optional[float] = None) -> "MacroBoundary":
        """Reduce kinetic inflow data to ghost densities.

        The x=0 datum is the zeroth moment of g0 over incoming velocities
        (a(v) > 0); the x=1 datum is either the given macroscopic trace or
        the analogous reduction of g1.
        """
        a = np.asarray(flux.a(velocity.centers), dtype=float)
        pos = a > 0.0
        neg = a < 0.0
        dv = velocity.dv

        def w0_trace(t: float) -> float:
            row = np.asarray(boundary.g0(velocity.centers, t), dtype=float)
            return float(np.sum(row[pos]) * dv)

        if w1 is not None:
            w1_trace = lambda t: float(w1)
        else:
            def w1_trace(t: float) -> float:
                row = np.asarray(boundary.g1(velocity.centers, t), dtype=float)
                return float(np.sum(row[neg]) * dv)

        return cls(w0_trace=w0_trace, w1_trace=w1_trace)


def _edge_fluxes(w: np.ndarray, ghost0: float, ghost1: float,
                 flux: FluxModel) -> np.ndarray:
    left = np.concatenate(([ghost0], w))
    right = np.concatenate((w, [ghost1]))
    return np.asarray(godunov_flux(flux, left, right))


def godunov_step(state: MacroState, dt: float, flux: FluxModel,
                 boundary: MacroBoundary, spatial: SpatialGrid) -> MacroState:
    """One conservative Godunov update with ghost-Riemann walls."""
    w = state.w
    t_mid = state.time + 0.5 * dt
    ghost0 = boundary.w0_trace(t_mid)
    ghost1 = boundary.w1_trace(t_mid)
    lo = min(float(np.min(w)), ghost0, ghost1)
    hi = max(float(np.max(w)), ghost0, ghost1)
    a_max = flux.max_speed(lo, hi)
    if a_max * dt > spatial.dx * (1.0 + 1e-12):
        raise CflViolationError(
            f"macro Courant number {a_max * dt / spatial.dx:.6f} > 1")
    F = _edge_fluxes(w, ghost0, ghost1, flux)
    w_new = w - (dt / spatial.dx) * (F[1:] - F[:-1])
    return MacroState(w_new, state.time + dt)


def source_split_step(state: MacroState, dt: float, flux: FluxModel,
                      boundary: MacroBoundary, spatial: SpatialGrid,
                      source_macro: Callable[[np.ndarray, float, np.ndarray], np.ndarray],
                      ) -> MacroState:
    """Godunov step followed by an explicit Euler source update."""
    after = godunov_step(state, dt, flux, boundary, spatial)
    t_mid = state.time + 0.5 * dt
    w_new = after.w + dt * np.asarray(
        source_macro(spatial.centers, t_mid, after.w), dtype=float)
    return MacroState(w_new, after.time)


def solve_macro(w0: np.ndarray, flux: FluxModel, boundary: MacroBoundary,
                spatial: SpatialGrid, out_times: np.ndarray, cfl: float = 0.9,
                source_macro: Optional[Callable] = None,
                speed_bound: Optional[float] = None) -> np.ndarray:
    """March to each output time; steps are clamped to land exactly.

    ``speed_bound`` overrides the data-range wave speed estimate used for
    the step size (needed when the source can push the state outside the
    initial range).
    """
    w = np.asarray(w0, dtype=float).copy()
    state = MacroState(w, 0.0)
    out_times = np.asarray(out_times, dtype=float)
    out = np.empty((out_times.size, spatial.n_cells))

    lo = min(float(np.min(w)), boundary.w0_trace(0.0), boundary.w1_trace(0.0))
    hi = max(float(np.max(w)), boundary.w0_trace(0.0), boundary.w1_trace(0.0))
    pad = 0.1 * max(1.0, hi - lo)
    a_max = speed_bound if speed_bound is not None else flux.max_speed(lo - pad, hi + pad)
    dt_max = cfl * spatial.dx / a_max if a_max > 0.0 else float(np.max(out_times))

    for k, t_out in enumerate(out_times):
        while state.time < t_out - 1e-14:
            dt = min(dt_max, t_out - state.time)
            if source_macro is not None:
                state = source_split_step(state, dt, flux, boundary, spatial,
                                          source_macro)
            else:
                state = godunov_step(state, dt, flux, boundary, spatial)
        out[k] = state.w
    return out
