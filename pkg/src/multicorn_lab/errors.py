"""Exception hierarchy shared by every module."""


class DynamicsError(Exception):
    """Base class for domain failures (the CLI maps these to exit code 2)."""


class ContractViolation(DynamicsError, ValueError):
    pass


class NoConvergence(DynamicsError):
    pass


class DegenerateJacobian(DynamicsError):
    pass


class OutOfRange(DynamicsError, ValueError):
    pass


class NotACenter(DynamicsError):
    pass


class NoAttractingCycle(DynamicsError):
    pass


class WrongPeriod(DynamicsError):
    pass


class NotInPetal(DynamicsError):
    pass


class PrecisionLoss(DynamicsError):
    pass


class NotAntiReturn(DynamicsError):
    pass


class NotSimplePetal(DynamicsError):
    pass


class OutsideDomain(DynamicsError):
    pass


class NotOnArc(DynamicsError):
    pass


class LostSpine(DynamicsError):
    pass


class AmbiguousComponent(DynamicsError):
    pass
