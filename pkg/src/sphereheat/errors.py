"""Exception hierarchy shared by every evaluation path."""


class SphereHeatError(Exception):
    """Base class for all library errors."""


class DomainError(SphereHeatError, ValueError):
    """Argument outside the mathematical domain (t <= 0, d < 1, ...)."""


class PoleError(DomainError):
    """Evaluation at (or within 1e-12 of) a genuine pole of a trig-rational term."""

    def __init__(self, message, lattice_point=None):
        super().__init__(message)
        self.lattice_point = lattice_point


class CapabilityError(SphereHeatError):
    """Request exceeds a configured cap (Phi-table order, dimension)."""


class AccuracyError(SphereHeatError, ArithmeticError):
    """A quadrature or series failed to reach the requested tolerance."""

    def __init__(self, message, estimates=()):
        super().__init__(message)
        self.estimates = tuple(estimates)


class IntegrityError(SphereHeatError):
    """A self-check failed (e.g. the angle density does not integrate to one)."""


class ConvergenceWarning(RuntimeWarning):
    """Series used outside its fast-convergence range, or a partial sum went negative."""


class UnderflowWarning(RuntimeWarning):
    """A kernel value underflowed to 0.0 in linear scale; use the log-domain API."""
