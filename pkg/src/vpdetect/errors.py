"""Exception hierarchy.

Every error carries the module/operation that raised it so the command line
front end can report provenance.
"""


class VPDetectError(Exception):
    """Base class for all package errors."""

    exit_code = 5

    def __init__(self, message, *, module=None, operation=None):
        super().__init__(message)
        self.module = module
        self.operation = operation

    def to_dict(self):
        return {
            "type": type(self).__name__,
            "message": str(self),
            "module": self.module,
            "operation": self.operation,
        }


class ConfigurationError(VPDetectError):
    exit_code = 2


class DomainError(VPDetectError, ValueError):
    exit_code = 2


class InfeasibleDesignError(VPDetectError):
    """The inductance matrix is not positive definite."""

    exit_code = 4


class ConvergenceError(VPDetectError):
    exit_code = 3


class TruncationError(VPDetectError):
    exit_code = 3


class LabelingError(VPDetectError, LookupError):
    exit_code = 5


class ResourceError(VPDetectError):
    exit_code = 5


class ProtocolImpossibleError(VPDetectError):
    """The Stokes bridge matrix element vanishes (or needs an absurd drive)."""

    exit_code = 5


class IntegratorError(VPDetectError):
    exit_code = 3


class PlotError(VPDetectError):
    exit_code = 2
