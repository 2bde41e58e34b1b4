"""Exception types shared across the package."""


class KineticHydroError(Exception):
    """Base class for all package errors."""


class OutOfRangeError(KineticHydroError):
    """A density fell outside the velocity grid, so its equilibrium
    profile cannot be represented without clipping."""


class CflViolationError(KineticHydroError):
    """A transport step was asked to move faster than one cell per step."""


class VelocityCflViolationError(KineticHydroError):
    """A force step was asked to move faster than one velocity cell per step."""


class SupportEscapeError(KineticHydroError):
    """Nonzero density reached the outermost velocity cells; the grid no
    longer contains the solution support."""


class NumericalBlowupError(KineticHydroError):
    """Non-finite values appeared during time stepping."""

    def __init__(self, step: int, message: str = ""):
        self.step = step
        super().__init__(message or f"non-finite values at step {step}")


class NonConvexFluxError(KineticHydroError):
    """Operation requires a flux declared convex on the working range."""


class GridMismatchError(KineticHydroError):
    """Two runs do not share grids / dt / epsilon / flux."""


class WindowTouchesBoundaryError(KineticHydroError):
    """An interior-window diagnostic was given a window reaching the wall."""


class NoConvergenceError(KineticHydroError):
    """Fixed-point iteration exhausted its budget."""

    def __init__(self, n_iter: int, history):
        self.n_iter = n_iter
        self.history = list(history)
        super().__init__(f"no convergence after {n_iter} iterations "
                         f"(last residual {self.history[-1]:.3e})" if self.history
                         else f"no convergence after {n_iter} iterations")


class ManifestMismatchError(KineticHydroError):
    """Two run directories are not comparable (different grids/epsilon/flux)."""


class ConfigError(KineticHydroError):
    """Experiment configuration violates a validation invariant."""
