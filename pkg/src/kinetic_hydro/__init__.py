"""Kinetic BGK-type model on the slab (0,1) with kinetic boundary
conditions, its Godunov reference solver, and a diagnostics harness that
turns the model's contraction / entropy / boundedness estimates into
executable checks."""

from .equilibrium import (
    VelocityGrid,
    EquilibriumSlice,
    chi_pointwise,
    project_equilibrium,
    project_equilibrium_field,
    zeroth_moment,
    zeroth_moment_field,
    flux_moment,
)
from .flux_models import (
    FluxModel,
    RiemannSolution,
    burgers,
    linear,
    cubic,
    from_name,
    solve_riemann,
    godunov_flux,
)
from .kinetic_solver import (
    SpatialGrid,
    KineticState,
    BoundaryData,
    SourceModel,
    InitialData,
    RunConfig,
    RunResult,
    PicardResult,
    relax_step,
    transport_step,
    force_step,
    step,
    solve,
    picard_solve,
)
from .reference_solver import (
    MacroState,
    MacroBoundary,
    godunov_step,
    source_split_step,
    solve_macro,
)
from . import errors

__version__ = "0.1.0"
