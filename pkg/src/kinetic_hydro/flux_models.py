"""Macroscopic flux models and exact-solution oracles.

A flux model is the pair (A, a = A') with closed-form callables, plus the
velocity-split antiderivatives

    A_plus(u)  = integral_0^u max(a(v), 0) dv
    A_minus(u) = integral_0^u min(a(v), 0) dv

(the flux carried by right- and left-moving velocities) which the
boundary entropy terms need.  Exact Riemann solutions and the Godunov
interface flux are provided for fluxes declared convex; they are the
ground truth of the hydrodynamic-limit tests.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import NonConvexFluxError

__all__ = [
    "FluxModel",
    "RiemannSolution",
    "burgers",
    "linear",
    "cubic",
    "from_name",
    "solve_riemann",
    "godunov_flux",
]


@dataclass
class FluxModel:
    """Flux A, derivative a = A', and convexity metadata.

    ``sonic_point`` is the minimizer of A when the flux is convex with an
    interior minimum; None means a does not change sign (pure upwinding).
    """

    name: str
    A: Callable[[np.ndarray], np.ndarray]
    a: Callable[[np.ndarray], np.ndarray]
    convex: bool
    nonlinear: bool
    sonic_point: Optional[float] = None
    a_inverse: Optional[Callable[[np.ndarray], np.ndarray]] = None
    A_plus: Optional[Callable[[np.ndarray], np.ndarray]] = None
    A_minus: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def max_speed(self, lo: float, hi: float) -> float:
        """max |a| over [lo, hi], sampled at endpoints and the sonic point."""
        pts = [lo, hi]
        if self.sonic_point is not None and lo < self.sonic_point < hi:
            pts.append(self.sonic_point)
        return float(np.max(np.abs(self.a(np.asarray(pts, dtype=float)))))


def burgers() -> FluxModel:
    return FluxModel(
        name="burgers",
        A=lambda u: 0.5 * np.asarray(u, dtype=float) ** 2,
        a=lambda u: np.asarray(u, dtype=float),
        convex=True,
        nonlinear=True,
        sonic_point=0.0,
        a_inverse=lambda xi: np.asarray(xi, dtype=float),
        A_plus=lambda u: 0.5 * np.square(np.maximum(u, 0.0)),
        A_minus=lambda u: 0.5 * np.square(np.minimum(u, 0.0)),
    )


def linear(c: float) -> FluxModel:
    c = float(c)
    return FluxModel(
        name=f"linear:{c}",
        A=lambda u: c * np.asarray(u, dtype=float),
        a=lambda u: np.full_like(np.asarray(u, dtype=float), c),
        convex=True,
        nonlinear=False,
        sonic_point=None,
        A_plus=lambda u: max(c, 0.0) * np.asarray(u, dtype=float),
        A_minus=lambda u: min(c, 0.0) * np.asarray(u, dtype=float),
    )


def cubic() -> FluxModel:
    # a(u) = u^2 >= 0: monotone flux but A'' changes sign, so no convex oracles
    return FluxModel(
        name="cubic",
        A=lambda u: np.asarray(u, dtype=float) ** 3 / 3.0,
        a=lambda u: np.asarray(u, dtype=float) ** 2,
        convex=False,
        nonlinear=True,
        sonic_point=None,
        A_plus=lambda u: np.asarray(u, dtype=float) ** 3 / 3.0,
        A_minus=lambda u: np.zeros_like(np.asarray(u, dtype=float)),
    )


def from_name(spec: str) -> FluxModel:
    """Build a flux model from its CLI name: burgers | linear:c | cubic."""
    if spec == "burgers":
        return burgers()
    if spec == "cubic":
        return cubic()
    if spec.startswith("linear:"):
        return linear(float(spec.split(":", 1)[1]))
    if spec == "linear":
        raise ValueError("linear flux needs a speed, e.g. 'linear:1.5'")
    raise ValueError(f"unknown flux model '{spec}'")


@dataclass
class RiemannSolution:
    """Self-similar solution of a two-state problem for a convex flux."""

    left_state: float
    right_state: float
    kind: str                       # "shock" | "rarefaction" | "constant"
    speed: Optional[float] = None   # shock speed
    fan: Optional[tuple] = None     # (a(w_l), a(w_r)) rarefaction edges
    _flux: FluxModel = field(default=None, repr=False)

    def evaluator(self, xi) -> np.ndarray:
        """Solution as a function of the similarity variable (x - x0) / t."""
        xi = np.asarray(xi, dtype=float)
        wl, wr = self.left_state, self.right_state
        if self.kind == "constant":
            return np.full_like(xi, wl)
        if self.kind == "shock":
            return np.where(xi < self.speed, wl, wr)
        lo, hi = self.fan
        inv = self._flux.a_inverse or _bisect_inverse(self._flux, wl, wr)
        out = np.where(xi <= lo, wl, np.where(xi >= hi, wr, 0.0))
        mid = (xi > lo) & (xi < hi)
        if np.any(mid):
            out = np.array(out, dtype=float)
            out[mid] = inv(xi[mid])
        return out

    def sample(self, x: np.ndarray, t: float, x0: float) -> np.ndarray:
        """Evaluate on physical coordinates; t = 0 returns the initial step."""
        x = np.asarray(x, dtype=float)
        if t <= 0.0:
            return np.where(x < x0, self.left_state, self.right_state)
        return self.evaluator((x - x0) / t)


def _bisect_inverse(flux: FluxModel, wl: float, wr: float):
    """Vectorized inverse of a on [wl, wr] for convex fluxes without one."""

    def inv(xi: np.ndarray) -> np.ndarray:
        lo = np.full_like(xi, min(wl, wr), dtype=float)
        hi = np.full_like(xi, max(wl, wr), dtype=float)
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            below = flux.a(mid) < xi
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)

    return inv


def _require_convex(flux: FluxModel) -> None:
    if not flux.convex:
        raise NonConvexFluxError(
            f"flux '{flux.name}' is not declared convex; exact oracles unavailable")


def solve_riemann(flux: FluxModel, w_l: float, w_r: float) -> RiemannSolution:
    """Exact entropy solution of the two-state problem (convex flux only).

    Shock with Rankine-Hugoniot speed when w_l > w_r (Oleinik-admissible),
    rarefaction fan between a(w_l) and a(w_r) when w_l < w_r.
    """
    _require_convex(flux)
    w_l, w_r = float(w_l), float(w_r)
    if w_l == w_r:
        return RiemannSolution(w_l, w_r, "constant", _flux=flux)
    if w_l > w_r:
        s = float((flux.A(w_l) - flux.A(w_r)) / (w_l - w_r))
        return RiemannSolution(w_l, w_r, "shock", speed=s, _flux=flux)
    fan = (float(flux.a(w_l)), float(flux.a(w_r)))
    return RiemannSolution(w_l, w_r, "rarefaction", fan=fan, _flux=flux)


def godunov_flux(flux: FluxModel, w_l, w_r):
    """Godunov interface flux for a convex flux model (vectorized).

    min of A over [w_l, w_r] when w_l <= w_r, max over [w_r, w_l] otherwise;
    both cases collapse to max(A(max(w_l, s)), A(min(w_r, s))) with s the
    sonic point (+-inf for monotone fluxes).
    """
    _require_convex(flux)
    w_l = np.asarray(w_l, dtype=float)
    w_r = np.asarray(w_r, dtype=float)
    if flux.sonic_point is None:
        # monotone flux: strict upwinding by the sign of a
        upward = flux.a(0.5 * (w_l + w_r)) >= 0.0
        out = np.where(upward, flux.A(w_l), flux.A(w_r))
    else:
        s = flux.sonic_point
        out = np.maximum(flux.A(np.maximum(w_l, s)), flux.A(np.minimum(w_r, s)))
    if out.ndim == 0:
        return float(out)
    return out
