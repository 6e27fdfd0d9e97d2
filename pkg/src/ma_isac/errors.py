"""Exception hierarchy shared across the package."""


class MaIsacError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(MaIsacError):
    """Invalid scenario or solver configuration."""


class InvalidGeometry(MaIsacError):
    """Antenna positions violate spacing or aperture constraints."""


class DegenerateGeometry(MaIsacError):
    """Fisher information vanishes; the target angle is unidentifiable."""


class Infeasible(MaIsacError):
    """The SNR constraint cannot be met within the power budget."""


class DegenerateCollinear(MaIsacError):
    """Channel and steering vectors are collinear where orthogonality is needed."""


class OddNrUnsupported(MaIsacError):
    """Closed-form gain ratio is derived for an even receive array only."""


class DegenerateCoefficient(MaIsacError):
    """An effective phasor coefficient vanished; its phase is undefined."""


class ApertureTooSmall(MaIsacError):
    """The requested aligned placement needs more aperture than available."""


class NoFeasibleBoundary(MaIsacError):
    """No enumerated active set admits an aligned placement within the aperture."""


class DegenerateArg(MaIsacError):
    """An inverse-trig argument sits at a domain endpoint; gradient unbounded."""


class SingularActiveGram(MaIsacError):
    """The Gram matrix of active constraint rows is singular (should not happen)."""


class IterationCap(MaIsacError):
    """An iterative solver hit its iteration limit without converging."""


class GridTooLarge(MaIsacError):
    """A brute-force grid would exceed its configured point budget."""


class RepairFailed(MaIsacError):
    """No feasible on-grid configuration exists at the requested step size."""
