"""Exception hierarchy shared by all modules."""


class GraphPotentialError(Exception):
    """Base class for every error raised by this package."""


class PreconditionError(GraphPotentialError, ValueError):
    """A documented precondition of an operation does not hold."""


# graph construction and geometry
class InvalidLength(PreconditionError):
    pass


class Disconnected(PreconditionError):
    pass


class UnsupportedFamily(PreconditionError):
    pass


class InvalidPoint(PreconditionError):
    pass


class SampleTooSmall(PreconditionError):
    pass


class EmptyDomain(PreconditionError):
    pass


class RadiusExceedsTruncation(PreconditionError):
    pass


# discretisation
class StepTooLarge(PreconditionError):
    pass


class NonUniformMesh(PreconditionError):
    pass


class GridMismatch(PreconditionError):
    """A requested point is not a node of the mesh."""


class ZeroVector(PreconditionError):
    pass


# spectra and resolvents
class ConvergenceFailure(GraphPotentialError):
    pass


class SpectralBarrier(GraphPotentialError):
    """lambda is at or above the bottom of the Dirichlet spectrum of the domain."""


class LambdaAboveSpectrum(SpectralBarrier):
    pass


class SolveFailure(GraphPotentialError):
    pass


class NonConverged(GraphPotentialError):
    """Exhaustion did not reach the tolerance; ``report`` holds the full sequence."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class PoleCollision(PreconditionError):
    pass


class PoleInsideEnlargedBall(PreconditionError):
    pass


# Monte Carlo
class StartOnBoundary(PreconditionError):
    pass


class StartMisplaced(PreconditionError):
    pass


class ExcessTruncation(GraphPotentialError):
    pass


class NestingViolation(PreconditionError):
    pass


# experiments and configuration
class DisconnectedDomain(GraphPotentialError):
    pass


class ConfigParse(GraphPotentialError):
    pass
