"""Exception hierarchy shared by all modules."""


class SpectralForgeError(Exception):
    """Base class for every error raised by the package."""


class DomainError(SpectralForgeError, ValueError):
    pass


class PoleError(SpectralForgeError, ValueError):
    """Evaluation point too close to a pole of a secular function."""


class ConvergenceError(SpectralForgeError, RuntimeError):
    pass


class ShapeError(SpectralForgeError, ValueError):
    pass


class NotSupportedError(SpectralForgeError, NotImplementedError):
    pass


class GridError(SpectralForgeError, ValueError):
    """Breakpoints of a chain do not fall on the finite-difference grid."""


class SpecError(SpectralForgeError, ValueError):
    """A spectral target violates its structural requirements."""


class BracketError(SpectralForgeError, RuntimeError):
    """A monotone scalar solve lost its sign change."""


class EscalationError(SpectralForgeError, RuntimeError):
    """Coupling strengths could not be raised far enough to certify a target."""
