"""Exception hierarchy shared by all modules."""


class ArmError(Exception):
    """Base class for every error raised by armrom."""


class InvalidInput(ArmError, ValueError):
    pass


class InvalidRank(ArmError, ValueError):
    pass


class SingularMatrix(ArmError, ArithmeticError):
    pass


class NoValidSubdomain(ArmError, LookupError):
    pass


class DegenerateBasis(ArmError, ArithmeticError):
    pass


class NonFiniteResidual(ArmError, FloatingPointError):
    pass


class NotConverged(ArmError, RuntimeError):
    """Raised when an iteration exhausts its budget.

    The partial report is kept on ``self.report`` so callers can inspect it.
    """

    def __init__(self, msg, report=None):
        super().__init__(msg)
        self.report = report


class SingularJacobian(SingularMatrix):
    pass


class EmptySegment(ArmError, ValueError):
    pass


class SegmentGap(ArmError, ValueError):
    pass


class DivergedSimulation(ArmError, FloatingPointError):
    pass


class ConfigError(ArmError, ValueError):
    pass


class ReportError(ArmError, ValueError):
    pass
