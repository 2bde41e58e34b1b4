"""Named scenario presets and CSV data ingestion.

Physical functions reachable from config files are all named presets with
numeric parameters; arbitrary code never enters a config.  Initial data:
``riemann:wl,wr,x0``, ``constant:c``, ``pulse:center,width,base,amp``,
``csv:path``.  Boundary data: ``from-initial``, ``equilibrium:w0,w1``,
``zero``.  Sources: ``none``, ``linear_v:c`` (force c*v, so the induced
macroscopic source is c*w).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .equilibrium import VelocityGrid
from .errors import ConfigError
from .kinetic_solver import BoundaryData, InitialData, SourceModel, SpatialGrid

__all__ = [
    "ScenarioInfo",
    "parse_initial",
    "parse_boundary",
    "parse_source",
    "read_field_csv",
    "write_field_csv",
]


@dataclass
class ScenarioInfo:
    """What a parsed initial-data preset exposes to the rest of the config."""

    initial: InitialData
    left_state: float       # densities the walls see at t = 0
    right_state: float
    riemann: Optional[tuple] = None     # (wl, wr, x0) when applicable
    tv: float = 0.0                     # total variation of the initial density


def _params(spec: str, name: str, n: int) -> list:
    body = spec.split(":", 1)[1] if ":" in spec else ""
    parts = [p for p in body.split(",") if p != ""]
    if len(parts) != n:
        raise ConfigError(f"preset '{name}' needs {n} parameters, got '{spec}'")
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise ConfigError(f"bad numeric parameter in '{spec}': {exc}") from None


def parse_initial(spec: str, spatial: SpatialGrid,
                  velocity: VelocityGrid) -> ScenarioInfo:
    if spec.startswith("riemann:"):
        wl, wr, x0 = _params(spec, "riemann", 3)
        if not 0.0 < x0 < 1.0:
            raise ConfigError(f"riemann jump position {x0} outside (0, 1)")
        data = InitialData.from_macro(lambda x: np.where(x < x0, wl, wr))
        return ScenarioInfo(initial=data, left_state=wl, right_state=wr,
                            riemann=(wl, wr, x0), tv=abs(wl - wr))
    if spec.startswith("constant:"):
        (c,) = _params(spec, "constant", 1)
        data = InitialData.from_macro(lambda x: np.full_like(x, c))
        return ScenarioInfo(initial=data, left_state=c, right_state=c, tv=0.0)
    if spec.startswith("pulse:"):
        center, width, base, amp = _params(spec, "pulse", 4)
        if width <= 0.0:
            raise ConfigError("pulse width must be positive")

        def w0(x):
            r = (x - center) / width
            return base + amp * np.where(np.abs(r) < 1.0,
                                         (1.0 - np.minimum(r * r, 1.0)) ** 2, 0.0)

        return ScenarioInfo(initial=InitialData.from_macro(w0),
                            left_state=float(w0(np.asarray(0.0))),
                            right_state=float(w0(np.asarray(1.0))),
                            tv=2.0 * abs(amp))
    if spec.startswith("csv:"):
        path = spec.split(":", 1)[1]
        return read_field_csv(path, spatial, velocity)
    raise ConfigError(f"unknown initial-data preset '{spec}'")


def parse_boundary(spec: str, velocity: VelocityGrid,
                   scenario: ScenarioInfo) -> BoundaryData:
    if spec == "zero":
        return BoundaryData.zero()
    if spec == "from-initial":
        return BoundaryData.equilibrium(velocity, scenario.left_state,
                                        scenario.right_state)
    if spec.startswith("equilibrium:"):
        w0, w1 = _params(spec, "equilibrium", 2)
        return BoundaryData.equilibrium(velocity, w0, w1)
    raise ConfigError(f"unknown boundary preset '{spec}'")


def parse_source(spec: str, velocity: VelocityGrid) -> Optional[SourceModel]:
    if spec in ("none", "", None):
        return None
    if spec.startswith("linear_v:"):
        (c,) = _params(spec, "linear_v", 1)
        v_amp = max(abs(velocity.v_min), abs(velocity.v_max))
        return SourceModel(
            S=lambda x, t, v: c * v * np.ones_like(x),
            dSdv=lambda x, t, v: c * np.ones_like(x * v),
            sup_S=abs(c) * v_amp,
            sup_dSdv=abs(c),
        )
    raise ConfigError(f"unknown source preset '{spec}'")


# ------------------------------------------------------------------ csv


def write_field_csv(path, x: np.ndarray, values: np.ndarray,
                    v: Optional[np.ndarray] = None) -> None:
    """w fields as 'x,value'; kinetic tables as 'x,v,value' (row-major in x)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if v is None:
            writer.writerow(["x", "value"])
            for xi, wi in zip(x, values):
                writer.writerow([f"{xi:.17g}", f"{wi:.17g}"])
        else:
            writer.writerow(["x", "v", "value"])
            for i, xi in enumerate(x):
                for j, vj in enumerate(v):
                    writer.writerow([f"{xi:.17g}", f"{vj:.17g}",
                                     f"{values[i, j]:.17g}"])


def read_field_csv(path: str, spatial: SpatialGrid,
                   velocity: VelocityGrid) -> ScenarioInfo:
    """Ingest initial data tables; coordinates must match the cell centers."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(c) for c in row] for row in reader if row]
    header = [h.strip().lower() for h in header]
    if header == ["x", "value"]:
        if len(rows) != spatial.n_cells:
            raise ConfigError(f"csv '{path}' has {len(rows)} rows, grid has "
                              f"{spatial.n_cells} cells")
        arr = np.asarray(rows, dtype=float)
        if not np.allclose(arr[:, 0], spatial.centers, atol=0.25 * spatial.dx):
            raise ConfigError(f"csv '{path}' x-coordinates do not match the grid")
        w0 = arr[:, 1].copy()
        return ScenarioInfo(
            initial=InitialData.from_macro(lambda x: w0),
            left_state=float(w0[0]), right_state=float(w0[-1]),
            tv=float(np.sum(np.abs(np.diff(w0)))))
    if header == ["x", "v", "value"]:
        n = spatial.n_cells * velocity.n_cells
        if len(rows) != n:
            raise ConfigError(f"csv '{path}' has {len(rows)} rows, grids need {n}")
        arr = np.asarray(rows, dtype=float)
        table = arr[:, 2].reshape(spatial.n_cells, velocity.n_cells)
        xs = arr[:, 0].reshape(spatial.n_cells, velocity.n_cells)[:, 0]
        vs = arr[:, 1].reshape(spatial.n_cells, velocity.n_cells)[0, :]
        if (not np.allclose(xs, spatial.centers, atol=0.25 * spatial.dx)
                or not np.allclose(vs, velocity.centers, atol=0.25 * velocity.dv)):
            raise ConfigError(f"csv '{path}' coordinates do not match the grids")
        sup = float(np.max(np.abs(table)))
        nz = np.flatnonzero(np.any(np.abs(table) > 1e-14, axis=0))
        if nz.size:
            v_support = (float(velocity.edges[nz[0]]), float(velocity.edges[nz[-1] + 1]))
        else:
            v_support = (0.0, 0.0)
        from .equilibrium import zeroth_moment_field
        w0 = zeroth_moment_field(table, velocity)
        return ScenarioInfo(
            initial=InitialData.from_kinetic(table, v_support, sup),
            left_state=float(w0[0]), right_state=float(w0[-1]),
            tv=float(np.sum(np.abs(np.diff(w0)))))
    raise ConfigError(f"csv '{path}' must have header 'x,value' or 'x,v,value'")
