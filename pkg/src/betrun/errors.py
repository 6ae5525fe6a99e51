"""Exception hierarchy shared across the package."""


class BetRunError(Exception):
    """Base class for all errors raised by betrun."""


class TraceError(BetRunError):
    pass


class TraceParseError(TraceError):
    """A trace or instance file line could not be read."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class TraceValidationError(TraceError):
    """Trace points violate the strict-improvement ordering."""


class ConfigError(BetRunError):
    """Invalid budget plan, preset, decider identifier or campaign file."""


class FitError(BetRunError):
    """A model fit failed; callers fall back to the last measured quality."""


class DecisionError(BetRunError):
    """A decision maker returned an outcome with the wrong shape."""
