"""Kinetic BGK-type solver on the slab (0,1) with inflow boundary data.

The microscopic density g(x, v, t) relaxes toward the signature
equilibrium of its own zeroth moment at rate 1/epsilon while free
streaming at speed a(v), with prescribed densities on incoming
characteristics at both walls and an optional velocity-space force.

One time step is the fixed composition  relax -> force -> transport:

* relaxation is solved exactly in closed form,
      g <- chi_w + exp(-dt/eps) (g - chi_w),
  so epsilon << dt costs nothing in stability;
* transport is conservative first-order upwind per velocity row under
  CFL <= 1 (an exact index shift at Courant number 1), with inflow
  ghost values from the boundary data at the half-step time and
  outflow fluxes accumulated into the state's trace integrals;
* the force term S(x,t,v) d_v g is upwind advection in v per x-cell
  (advective form: the drift of the per-cell moment is exactly the
  macroscopic source feeding the moment equation).

Every sub-step is monotone, which is what makes the L1 contraction,
the maximum principle and the support bounds hold discretely to
rounding; the diagnostics module asserts them on recorded runs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .equilibrium import (
    VelocityGrid,
    project_equilibrium_field,
    zeroth_moment_field,
)
from .errors import (
    CflViolationError,
    ConfigError,
    NoConvergenceError,
    NumericalBlowupError,
    SupportEscapeError,
    VelocityCflViolationError,
)
from .flux_models import FluxModel

__all__ = [
    "SpatialGrid",
    "KineticState",
    "BoundaryData",
    "SourceModel",
    "InitialData",
    "RunConfig",
    "StepTraces",
    "RunResult",
    "PicardResult",
    "relax_step",
    "transport_step",
    "force_step",
    "step",
    "solve",
    "picard_solve",
]

SUPPORT_THRESHOLD = 1e-14


@dataclass
class SpatialGrid:
    """Uniform cell-centered grid on the fixed domain (0, 1)."""

    n_cells: int
    dx: float = field(init=False)
    centers: np.ndarray = field(init=False, repr=False)
    edges: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n_cells < 2:
            raise ValueError("spatial grid needs at least 2 cells")
        self.dx = 1.0 / self.n_cells
        self.edges = np.arange(self.n_cells + 1) * self.dx
        self.centers = (np.arange(self.n_cells) + 0.5) * self.dx

    def same_as(self, other: "SpatialGrid") -> bool:
        return self.n_cells == other.n_cells


@dataclass
class KineticState:
    """Discrete microscopic density at one time plus boundary trace integrals.

    ``outflow_0`` and ``outflow_1`` accumulate the time integral of
    a(v).n g over outgoing velocities at x=0 and x=1 (nondecreasing while
    g >= 0 on outgoing rays).
    """

    g: np.ndarray              # (n_x, n_v)
    time: float
    outflow_0: float = 0.0
    outflow_1: float = 0.0

    def copy(self) -> "KineticState":
        return KineticState(self.g.copy(), self.time, self.outflow_0, self.outflow_1)


@dataclass
class BoundaryData:
    """Incoming kinetic densities at the two walls.

    ``g0(v, t)`` is used on rows with a(v) > 0 (incoming at x=0) and
    ``g1(v, t)`` on rows with a(v) < 0 (incoming at x=1).  Both callables
    take the full vector of cell-center velocities and must vanish
    outside their declared supports.
    """

    g0: Callable[[np.ndarray, float], np.ndarray]
    g1: Callable[[np.ndarray, float], np.ndarray]
    support0: tuple = (0.0, 0.0)      # declared v-support at x=0
    support1: tuple = (0.0, 0.0)
    sup0: float = 0.0                 # declared L-infinity bounds
    sup1: float = 0.0

    @classmethod
    def zero(cls) -> "BoundaryData":
        z = lambda v, t: np.zeros_like(np.asarray(v, dtype=float))
        return cls(g0=z, g1=z)

    @classmethod
    def equilibrium(cls, grid: VelocityGrid, w0: float, w1: float) -> "BoundaryData":
        """Equilibrium (signature) data for constant wall densities."""
        w0, w1 = float(w0), float(w1)
        row0 = project_equilibrium_field(np.asarray(w0), grid)
        row1 = project_equilibrium_field(np.asarray(w1), grid)
        return cls(
            g0=lambda v, t: row0,
            g1=lambda v, t: row1,
            support0=(min(0.0, w0), max(0.0, w0)),
            support1=(min(0.0, w1), max(0.0, w1)),
            sup0=1.0 if w0 != 0.0 else 0.0,
            sup1=1.0 if w1 != 0.0 else 0.0,
        )


@dataclass
class SourceModel:
    """Velocity-space force S(x, t, v) with its analytic v-derivative.

    S(x, t, 0) must vanish identically (checked at config validation by
    sampling); this pins the equilibrium structure at v = 0 and makes the
    induced macroscopic source equal S(x, t, w).
    """

    S: Callable[[np.ndarray, float, np.ndarray], np.ndarray]
    dSdv: Callable[[np.ndarray, float, np.ndarray], np.ndarray]
    sup_S: float                      # sup |S| over the run box
    sup_dSdv: float                   # sup |dS/dv| over the run box

    def check_zero_line(self, t_end: float, n_samples: int = 17) -> None:
        xs = np.linspace(0.0, 1.0, n_samples)
        for t in np.linspace(0.0, t_end, 5):
            vals = np.abs(np.asarray(self.S(xs, float(t), np.zeros_like(xs))))
            if np.any(vals > 1e-12 * max(1.0, self.sup_S)):
                raise ConfigError("source model violates S(x, t, 0) = 0")


@dataclass
class InitialData:
    """Initial data, either macroscopic (projected to equilibrium) or kinetic."""

    kind: str                                 # "macro" | "kinetic"
    w0: Optional[Callable[[np.ndarray], np.ndarray]] = None
    g0: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    g0_table: Optional[np.ndarray] = None
    v_support: Optional[tuple] = None         # declared for kinetic data
    sup: Optional[float] = None

    @classmethod
    def from_macro(cls, w0: Callable[[np.ndarray], np.ndarray]) -> "InitialData":
        return cls(kind="macro", w0=w0)

    @classmethod
    def from_kinetic(cls, g0, v_support: tuple, sup: float) -> "InitialData":
        if isinstance(g0, np.ndarray):
            return cls(kind="kinetic", g0_table=g0, v_support=v_support, sup=sup)
        return cls(kind="kinetic", g0=g0, v_support=v_support, sup=sup)

    def build(self, spatial: SpatialGrid, velocity: VelocityGrid) -> np.ndarray:
        if self.kind == "macro":
            w = np.asarray(self.w0(spatial.centers), dtype=float)
            return project_equilibrium_field(w, velocity)
        if self.g0_table is not None:
            tab = np.asarray(self.g0_table, dtype=float)
            if tab.shape != (spatial.n_cells, velocity.n_cells):
                raise ConfigError(
                    f"kinetic initial table shape {tab.shape} != "
                    f"({spatial.n_cells}, {velocity.n_cells})")
            return tab.copy()
        x = spatial.centers[:, None]
        v = velocity.centers[None, :]
        return np.asarray(self.g0(x, v), dtype=float) * np.ones((spatial.n_cells, velocity.n_cells))


@dataclass
class RunConfig:
    """Everything one kinetic run needs; validated before stepping."""

    spatial: SpatialGrid
    velocity: VelocityGrid
    flux: FluxModel
    epsilon: float
    t_end: float
    boundary: BoundaryData
    initial: InitialData
    cfl: float = 0.9
    source: Optional[SourceModel] = None
    mode: str = "splitting"          # "splitting" | "picard"
    n_snapshots: int = 32
    store_g: bool = False
    relax_enabled: bool = True

    def speeds(self) -> np.ndarray:
        return np.asarray(self.flux.a(self.velocity.centers), dtype=float)

    def grid_max_speed(self) -> float:
        a = self.speeds()
        return float(np.max(np.abs(a))) if a.size else 0.0

    def pick_dt(self) -> tuple[float, int]:
        """Uniform dt from the CFL targets; returns (dt, n_steps)."""
        limits = []
        a_max = self.grid_max_speed()
        if a_max > 0.0:
            limits.append(self.cfl * self.spatial.dx / a_max)
        if self.source is not None and self.source.sup_S > 0.0:
            limits.append(self.cfl * self.velocity.dv / self.source.sup_S)
        dt_max = min(limits) if limits else self.t_end
        n_steps = max(1, int(math.ceil(self.t_end / dt_max - 1e-12)))
        return self.t_end / n_steps, n_steps

    def data_sup(self, g_init: Optional[np.ndarray] = None) -> float:
        """L-infinity budget of the data: max over initial and boundary sups."""
        sup0 = self.boundary.sup0
        sup1 = self.boundary.sup1
        if g_init is not None:
            init_sup = float(np.max(np.abs(g_init))) if g_init.size else 0.0
        elif self.initial.kind == "macro":
            init_sup = 1.0
        else:
            init_sup = self.initial.sup or 0.0
        return max(sup0, sup1, init_sup)

    def validate(self) -> None:
        if self.mode not in ("splitting", "picard"):
            raise ConfigError(f"unknown mode '{self.mode}'")
        if self.relax_enabled and not self.epsilon > 0.0:
            raise ConfigError("epsilon must be positive (use relax_enabled=False "
                              "for the transport-only limit)")
        if not 0.0 < self.cfl <= 1.0:
            raise ConfigError("cfl must be in (0, 1]")
        if not self.t_end > 0.0:
            raise ConfigError("t_end must be positive")
        if self.n_snapshots < 2:
            raise ConfigError("need at least 2 snapshots (initial and final)")
        self._check_velocity_coverage()
        if self.source is not None:
            self.source.check_zero_line(self.t_end)
            dt, _ = self.pick_dt()
            if self.source.sup_S * dt > self.velocity.dv * (1.0 + 1e-12):
                raise ConfigError("velocity CFL infeasible for the declared source bound")

    def _check_velocity_coverage(self) -> None:
        grid = self.velocity
        lo, hi = grid.v_min, grid.v_max
        need = []
        for name, (slo, shi) in (("boundary data at x=0", self.boundary.support0),
                                 ("boundary data at x=1", self.boundary.support1)):
            need.append((name, slo, shi))
        if self.initial.kind == "kinetic" and self.initial.v_support is not None:
            need.append(("initial kinetic data", *self.initial.v_support))
        if self.initial.kind == "macro":
            w = np.asarray(self.initial.w0(self.spatial.centers), dtype=float)
            m = float(np.max(np.abs(w))) if w.size else 0.0
            need.append(("initial macroscopic range", -m, m))
        # equilibria generated during the run live on [-m, m] with m the
        # largest density amplitude seen in the data
        amp = max(abs(v) for item in need for v in item[1:]) if need else 0.0
        need.append(("density amplitude (equilibrium coverage)", -amp, amp))
        for name, slo, shi in need:
            if slo < lo - 1e-12 or shi > hi + 1e-12:
                raise ConfigError(
                    f"velocity grid [{lo}, {hi}] does not cover the support "
                    f"[{slo}, {shi}] required by {name} (coverage invariant)")


@dataclass
class StepTraces:
    """Boundary rows that one transport step exchanged with the walls.

    Full-width (n_v,) vectors, zero on rows that do not cross the wall;
    the contraction ledger weighs them by |a(v)| dt dv.
    """

    t_mid: float
    trace0: np.ndarray     # pre-transport g[0, :] on rows with a < 0
    trace1: np.ndarray     # pre-transport g[-1, :] on rows with a > 0
    inflow0: np.ndarray    # boundary data on rows with a > 0
    inflow1: np.ndarray    # boundary data on rows with a < 0


def relax_step(state: KineticState, dt: float, epsilon: float,
               velocity: VelocityGrid, frozen_w: Optional[np.ndarray] = None
               ) -> KineticState:
    """Exact relaxation toward the signature equilibrium.

    g <- chi_w + exp(-dt/eps) (g - chi_w) cellwise, with w the zeroth
    moment of the current state (or a frozen field in Picard mode).  The
    zeroth moment is unchanged exactly in the unfrozen case because the
    projection integrates back to w.
    """
    g = state.g
    w = zeroth_moment_field(g, velocity) if frozen_w is None else np.asarray(frozen_w)
    chi = project_equilibrium_field(w, velocity)
    beta = math.exp(-dt / epsilon)
    g_new = chi + beta * (g - chi)
    return KineticState(g_new, state.time, state.outflow_0, state.outflow_1)


def transport_step(state: KineticState, dt: float, boundary: BoundaryData,
                   spatial: SpatialGrid, velocity: VelocityGrid,
                   speeds: np.ndarray) -> tuple[KineticState, StepTraces]:
    """Upwind free streaming with inflow injection and outflow accounting.

    Each velocity row moves by a(v) dt; rows at Courant number exactly 1
    are handled as a pure index shift.  Boundary data are sampled at the
    half-step time.  Returns the new state and the wall rows used, for
    the contraction ledger.
    """
    g = state.g
    n_x, n_v = g.shape
    c = speeds * (dt / spatial.dx)
    if np.any(np.abs(c) > 1.0 + 1e-12):
        worst = float(np.max(np.abs(c)))
        raise CflViolationError(f"transport Courant number {worst:.6f} > 1")
    t_mid = state.time + 0.5 * dt
    v = velocity.centers
    b0 = np.asarray(boundary.g0(v, t_mid), dtype=float)
    b1 = np.asarray(boundary.g1(v, t_mid), dtype=float)

    pos = speeds > 0.0
    neg = speeds < 0.0
    g_new = g.copy()

    trace0 = np.zeros(n_v)
    trace1 = np.zeros(n_v)
    inflow0 = np.zeros(n_v)
    inflow1 = np.zeros(n_v)

    if np.any(pos):
        gp = g[:, pos]
        up = np.empty_like(gp)
        up[1:, :] = gp[:-1, :]
        up[0, :] = b0[pos]
        cp = c[pos]
        out = gp - cp[None, :] * (gp - up)
        exact = cp == 1.0
        if np.any(exact):
            out[:, exact] = up[:, exact]
        g_new[:, pos] = out
        trace1[pos] = g[-1, pos]
        inflow0[pos] = b0[pos]

    if np.any(neg):
        gn = g[:, neg]
        dn = np.empty_like(gn)
        dn[:-1, :] = gn[1:, :]
        dn[-1, :] = b1[neg]
        cn = -c[neg]
        out = gn - cn[None, :] * (gn - dn)
        exact = cn == 1.0
        if np.any(exact):
            out[:, exact] = dn[:, exact]
        g_new[:, neg] = out
        trace0[neg] = g[0, neg]
        inflow1[neg] = b1[neg]

    dv = velocity.dv
    out0 = float(np.sum(-speeds[neg] * g[0, neg]) * dv * dt) if np.any(neg) else 0.0
    out1 = float(np.sum(speeds[pos] * g[-1, pos]) * dv * dt) if np.any(pos) else 0.0

    new_state = KineticState(g_new, state.time + dt,
                             state.outflow_0 + out0, state.outflow_1 + out1)
    return new_state, StepTraces(t_mid, trace0, trace1, inflow0, inflow1)


def force_step(state: KineticState, dt: float, source: SourceModel,
               spatial: SpatialGrid, velocity: VelocityGrid) -> KineticState:
    """Velocity advection by the force S(x, t, v), upwind per x-cell.

    Advective form: the per-cell zeroth moment drifts by the discrete
    analog of  integral g dS/dv dv, which is the macroscopic source.
    Zero inflow at the velocity ends; raises if nonzero density reaches
    the outermost cells.
    """
    g = state.g
    t_mid = state.time + 0.5 * dt
    x = spatial.centers[:, None]
    v = velocity.centers[None, :]
    s = np.asarray(source.S(x, t_mid, v), dtype=float) * np.ones_like(g)
    lam = dt / velocity.dv
    if np.any(np.abs(s) * lam > 1.0 + 1e-12):
        worst = float(np.max(np.abs(s)))
        raise VelocityCflViolationError(
            f"force step needs |S| dt <= dv; got |S| = {worst:.6f}")

    s_pos = np.maximum(s, 0.0)
    s_neg = np.minimum(s, 0.0)
    g_lo = np.empty_like(g)
    g_lo[:, 1:] = g[:, :-1]
    g_lo[:, 0] = 0.0
    g_hi = np.empty_like(g)
    g_hi[:, :-1] = g[:, 1:]
    g_hi[:, -1] = 0.0
    g_new = g - lam * (s_pos * (g - g_lo) + s_neg * (g_hi - g))

    edge = max(float(np.max(np.abs(g_new[:, 0]))), float(np.max(np.abs(g_new[:, -1]))))
    if edge > SUPPORT_THRESHOLD:
        raise SupportEscapeError(
            f"density {edge:.3e} reached the outermost velocity cells")
    return KineticState(g_new, state.time, state.outflow_0, state.outflow_1)


def step(state: KineticState, dt: float, config: RunConfig,
         speeds: Optional[np.ndarray] = None,
         frozen_w: Optional[np.ndarray] = None) -> tuple[KineticState, StepTraces]:
    """One full step: relax, then force (if any), then transport."""
    if speeds is None:
        speeds = config.speeds()
    if dt == 0.0:
        n_v = config.velocity.n_cells
        z = np.zeros(n_v)
        return state.copy(), StepTraces(state.time, z, z, z.copy(), z.copy())
    s = state
    if config.relax_enabled:
        s = relax_step(s, dt, config.epsilon, config.velocity, frozen_w=frozen_w)
    if config.source is not None:
        s = force_step(s, dt, config.source, config.spatial, config.velocity)
    return transport_step(s, dt, config.boundary, config.spatial,
                          config.velocity, speeds)


@dataclass
class RunResult:
    """A completed kinetic run: snapshots plus per-step wall records."""

    config: RunConfig
    dt: float
    n_steps: int
    snapshot_steps: np.ndarray        # (n_snap,) step indices
    times: np.ndarray                 # (n_snap,)
    w_history: np.ndarray             # (n_snap, n_x)
    g_history: Optional[np.ndarray]   # (n_snap, n_x, n_v) when stored
    final: KineticState
    trace0: np.ndarray                # (n_steps, n_v)
    trace1: np.ndarray
    inflow0: np.ndarray
    inflow1: np.ndarray
    sup_g: np.ndarray                 # (n_steps + 1,)
    sup_w: np.ndarray                 # (n_steps + 1,)
    support_v: np.ndarray             # (n_steps + 1, 2) cell-index box, -1 if empty
    support_x: np.ndarray             # (n_steps + 1, 2)
    mass_defect: np.ndarray           # (n_steps,)
    s_prime_sup: Optional[np.ndarray] = None   # (n_steps,) sup |dS/dv| on own support

    @property
    def spatial(self) -> SpatialGrid:
        return self.config.spatial

    @property
    def velocity(self) -> VelocityGrid:
        return self.config.velocity

    def compatible_with(self, other: "RunResult") -> bool:
        return (self.spatial.same_as(other.spatial)
                and self.velocity.same_as(other.velocity)
                and self.n_steps == other.n_steps
                and self.dt == other.dt
                and self.config.flux.name == other.config.flux.name
                and self.config.epsilon == other.config.epsilon)


def _support_box(mask_rows: np.ndarray) -> tuple[int, int]:
    idx = np.flatnonzero(mask_rows)
    if idx.size == 0:
        return (-1, -1)
    return (int(idx[0]), int(idx[-1]))


def solve(config: RunConfig, observers: Sequence[Callable] = ()) -> RunResult:
    """March the kinetic model from t=0 to t_end and record the run.

    Observers are called at snapshot times with (state, w, snapshot_index).
    Raises NumericalBlowupError (carrying the step index) on non-finite
    values.
    """
    config.validate()
    spatial, velocity = config.spatial, config.velocity
    dt, n_steps = config.pick_dt()
    speeds = config.speeds()

    g = config.initial.build(spatial, velocity)
    state = KineticState(g, 0.0)

    n_snap = min(config.n_snapshots, n_steps + 1)
    snap_steps = np.unique(np.round(np.linspace(0, n_steps, n_snap)).astype(int))
    n_snap = snap_steps.size
    n_x, n_v = spatial.n_cells, velocity.n_cells

    w_hist = np.empty((n_snap, n_x))
    g_hist = np.empty((n_snap, n_x, n_v)) if config.store_g else None
    times = snap_steps * dt

    trace0 = np.zeros((n_steps, n_v))
    trace1 = np.zeros((n_steps, n_v))
    inflow0 = np.zeros((n_steps, n_v))
    inflow1 = np.zeros((n_steps, n_v))
    sup_g = np.zeros(n_steps + 1)
    sup_w = np.zeros(n_steps + 1)
    support_v = np.zeros((n_steps + 1, 2), dtype=int)
    support_x = np.zeros((n_steps + 1, 2), dtype=int)
    mass_defect = np.zeros(n_steps)
    sps = np.zeros(n_steps) if config.source is not None else None

    dv, dx = velocity.dv, spatial.dx
    cell = dx * dv

    def record_state(k: int, st: KineticState, w: np.ndarray) -> None:
        sup_g[k] = np.max(np.abs(st.g)) if st.g.size else 0.0
        sup_w[k] = np.max(np.abs(w)) if w.size else 0.0
        nz = np.abs(st.g) > SUPPORT_THRESHOLD
        support_v[k] = _support_box(nz.any(axis=0))
        support_x[k] = _support_box(np.abs(w) > SUPPORT_THRESHOLD)

    w = zeroth_moment_field(state.g, velocity)
    record_state(0, state, w)

    snap_cursor = 0
    if snap_steps[0] == 0:
        w_hist[0] = w
        if g_hist is not None:
            g_hist[0] = state.g
        for obs in observers:
            obs(state, w, 0)
        snap_cursor = 1

    for n in range(n_steps):
        mass_before = float(np.sum(state.g)) * cell
        if config.source is not None:
            # measure the force drift separately so the balance below only
            # checks relaxation + transport conservation
            pre = state
            if config.relax_enabled:
                pre = relax_step(pre, dt, config.epsilon, velocity)
            mid_mass = float(np.sum(pre.g)) * cell
            forced = force_step(pre, dt, config.source, spatial, velocity)
            force_drift = float(np.sum(forced.g)) * cell - mid_mass
            state, tr = transport_step(forced, dt, config.boundary,
                                       spatial, velocity, speeds)
        else:
            force_drift = 0.0
            state, tr = step(state, dt, config, speeds=speeds)
        if not np.all(np.isfinite(state.g)):
            raise NumericalBlowupError(n + 1)

        trace0[n] = tr.trace0
        trace1[n] = tr.trace1
        inflow0[n] = tr.inflow0
        inflow1[n] = tr.inflow1

        inflow_mass = (np.sum(speeds[speeds > 0.0] * tr.inflow0[speeds > 0.0])
                       - np.sum(speeds[speeds < 0.0] * tr.inflow1[speeds < 0.0])) * dv * dt
        outflow_mass = (np.sum(speeds[speeds > 0.0] * tr.trace1[speeds > 0.0])
                        - np.sum(speeds[speeds < 0.0] * tr.trace0[speeds < 0.0])) * dv * dt
        mass_after = float(np.sum(state.g)) * cell
        mass_defect[n] = mass_after - (mass_before + inflow_mass
                                       - outflow_mass + force_drift)

        w = zeroth_moment_field(state.g, velocity)
        record_state(n + 1, state, w)
        if sps is not None:
            jlo, jhi = support_v[n + 1]
            if jlo >= 0:
                jlo, jhi = max(0, jlo - 1), min(n_v - 1, jhi + 1)
                vbox = velocity.centers[jlo:jhi + 1]
                vals = np.abs(config.source.dSdv(spatial.centers[:, None],
                                                 tr.t_mid, vbox[None, :]))
                sps[n] = float(np.max(vals))

        if snap_cursor < n_snap and snap_steps[snap_cursor] == n + 1:
            w_hist[snap_cursor] = w
            if g_hist is not None:
                g_hist[snap_cursor] = state.g
            for obs in observers:
                obs(state, w, snap_cursor)
            snap_cursor += 1

    return RunResult(
        config=config, dt=dt, n_steps=n_steps, snapshot_steps=snap_steps,
        times=times, w_history=w_hist, g_history=g_hist, final=state,
        trace0=trace0, trace1=trace1, inflow0=inflow0, inflow1=inflow1,
        sup_g=sup_g, sup_w=sup_w, support_v=support_v, support_x=support_x,
        mass_defect=mass_defect, s_prime_sup=sps,
    )


@dataclass
class PicardResult:
    """Trajectory and residual history of the fixed-point iteration."""

    w_trajectory: np.ndarray          # (n_steps + 1, n_x) of the last iterate
    dt: float
    n_steps: int
    residual_history: list
    contraction_ratios: list
    n_iterations: int
    converged: bool


def _picard_pass(config: RunConfig, dt: float, n_steps: int,
                 speeds: np.ndarray, frozen: np.ndarray) -> np.ndarray:
    """One linear solve with the relaxation target frozen at a w-field."""
    g = config.initial.build(config.spatial, config.velocity)
    state = KineticState(g, 0.0)
    traj = np.empty((n_steps + 1, config.spatial.n_cells))
    traj[0] = zeroth_moment_field(state.g, config.velocity)
    for n in range(n_steps):
        state, _ = step(state, dt, config, speeds=speeds, frozen_w=frozen[n])
        traj[n + 1] = zeroth_moment_field(state.g, config.velocity)
    return traj


def picard_solve(config: RunConfig, n_iter: int, tol: float,
                 initial_iterate: str = "constant") -> PicardResult:
    """Fixed-point iterations freezing the equilibrium target per iterate.

    Each pass solves the linear transport-relaxation equation against the
    previous iterate's density trajectory; stops when the L1 distance of
    successive trajectories over the space-time slab drops below tol.
    The converged splitting trajectory is a fixed point bitwise.
    """
    if config.mode != "picard":
        raise ConfigError("picard_solve requires mode='picard'")
    if config.source is not None:
        raise ConfigError("picard mode does not support a source model")
    config.validate()
    dt, n_steps = config.pick_dt()
    speeds = config.speeds()
    n_x = config.spatial.n_cells

    w0 = zeroth_moment_field(config.initial.build(config.spatial, config.velocity),
                             config.velocity)
    if initial_iterate == "constant":
        frozen = np.tile(w0, (n_steps + 1, 1))
    elif initial_iterate == "zero":
        frozen = np.zeros((n_steps + 1, n_x))
    else:
        raise ConfigError(f"unknown initial iterate '{initial_iterate}'")

    cell = config.spatial.dx * dt
    history: list = []
    ratios: list = []
    for k in range(n_iter):
        traj = _picard_pass(config, dt, n_steps, speeds, frozen)
        resid = float(np.sum(np.abs(traj - frozen)) * cell)
        history.append(resid)
        if len(history) > 1 and history[-2] > 0.0:
            ratios.append(history[-1] / history[-2])
        frozen = traj
        if resid <= tol:
            return PicardResult(traj, dt, n_steps, history, ratios, k + 1, True)
    raise NoConvergenceError(n_iter, history)
