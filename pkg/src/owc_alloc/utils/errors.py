"""
Exception hierarchy for the owc-alloc simulator
"""

from typing import Optional


class OwcAllocError(Exception):
    """Base class for every error raised by owc_alloc"""


class InvalidParameterError(OwcAllocError, ValueError):
    """A numeric argument is outside its domain"""


class ConfigurationError(OwcAllocError):
    """A configuration value is invalid or inconsistent"""

    def __init__(self, message: str, key: Optional[str] = None):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


class UnsupportedConfigurationError(OwcAllocError):
    """The requested system size is not supported by the scheme"""


class DegenerateGeometryError(OwcAllocError):
    """A channel matrix is rank deficient"""

    def __init__(self, message: str, user: Optional[int] = None):
        self.user = user
        super().__init__(message)


class DecodeFailureError(OwcAllocError):
    """Symbols could not be recovered from the received signal"""


class InvalidAllocationError(OwcAllocError, ValueError):
    """An allocation matrix has the wrong shape or negative entries"""


class InfeasibleProblemError(OwcAllocError):
    """No allocation satisfies the constraints"""


class ProblemTooLargeError(OwcAllocError):
    """The exhaustive search would exceed its configured budget"""


class ParseError(OwcAllocError):
    """A file could not be parsed"""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(f"{where}{message}")


class NumericError(OwcAllocError):
    """A non-finite value appeared inside the network"""

    def __init__(self, message: str, layer: Optional[int] = None):
        self.layer = layer
        super().__init__(message)


class TrainingFailureError(OwcAllocError):
    """Training diverged"""

    def __init__(self, message: str, last_finite_epoch: Optional[int] = None):
        self.last_finite_epoch = last_finite_epoch
        super().__init__(message)
