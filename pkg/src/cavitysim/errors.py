"""Exception types. The CLI maps each family to an exit code."""


class ValidationError(ValueError):
    """Bad user input: configuration, ket expressions, parameter ranges."""


class EmptySectorError(ValidationError):
    pass


class StateParseError(ValidationError):
    def __init__(self, message, expr=None, pos=None):
        self.expr = expr
        self.pos = pos
        if expr is not None and pos is not None:
            message = f"{message} at position {pos}:\n  {expr}\n  {' ' * pos}^"
        super().__init__(message)


class NoPlateauError(ValidationError):
    pass


class SmallCouplingError(ValidationError):
    pass


class PoleError(ValidationError):
    pass


class NumericalError(RuntimeError):
    """The computation ran but its result cannot be trusted."""


class IntegrationError(NumericalError):
    def __init__(self, message, t=None):
        self.t = t
        if t is not None:
            message = f"{message} (t = {t!r} ns)"
        super().__init__(message)


class SweepError(NumericalError):
    """One or more sweep points failed; ``result`` holds the completed rows."""

    def __init__(self, failures, result):
        self.failures = failures
        self.result = result
        lines = ", ".join(f"{v!r}: {msg}" for v, msg in failures.items())
        super().__init__(f"{len(failures)} sweep point(s) failed: {lines}")
