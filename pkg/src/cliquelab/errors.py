class CliqueLabError(Exception):
    """Base class for all errors raised by cliquelab."""


class ParameterError(CliqueLabError, ValueError):
    pass


class CapacityError(CliqueLabError):
    """An exact computation was requested on an instance that is too large."""


class InfeasibleError(CliqueLabError):
    def __init__(self, message, best_ratio=None):
        super().__init__(message)
        self.best_ratio = best_ratio


class FormatError(CliqueLabError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class InconclusiveError(CliqueLabError):
    """A Monte-Carlo verdict straddled its threshold where a decision was required."""
