"""Exception hierarchy shared by all fpspec modules."""


class FPSpecError(ValueError):
    """Base class for domain errors raised by fpspec."""


class DegenerateGrid(FPSpecError):
    pass


class MomentOrderTooHigh(FPSpecError):
    pass


class OrderTooHigh(FPSpecError):
    pass


class ZeroDerivative(FPSpecError):
    pass


class OffStrip(FPSpecError):
    """A frequency was requested outside the closed strip |Im xi| <= beta/2."""


class MisalignedShift(FPSpecError):
    """A Dirac location is not an integer multiple of the grid spacing."""


class InvalidKernel(FPSpecError):
    pass


class SpectrumHit(FPSpecError):
    """The resolvent was requested (numerically) at an eigenvalue."""


class PreconditionFailed(FPSpecError):
    pass


class NotMassless(FPSpecError):
    pass


class NegativeTime(FPSpecError):
    pass


class SolverBreakdown(FPSpecError):
    pass


class NoSnapshots(FPSpecError):
    pass


class UnknownInitial(FPSpecError):
    pass


class WindowTooSparse(FPSpecError):
    pass


class NonpositiveNorm(FPSpecError):
    pass
