"""Exception hierarchy shared by all pipeline stages."""


class TailnetError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(TailnetError, ValueError):
    """Input data violates a documented precondition."""


class ParseError(ValidationError):
    """A CSV row could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DegenerateSampleError(ValidationError):
    pass


class InsufficientDataError(ValidationError):
    pass


class SizeLimitError(ValidationError):
    pass


class InfeasibleError(TailnetError):
    """The optimization problem has no feasible point.

    ``certificate`` holds row multipliers ``y`` (equality rows first, then
    ``>=`` rows) such that ``y . (b - A x) > 0`` for every ``x`` inside the
    variable box, proving that no box point satisfies the constraints.
    """

    def __init__(self, message, certificate=None, infeasibility=None):
        super().__init__(message)
        self.certificate = certificate
        self.infeasibility = infeasibility


class StructurallyInfeasibleError(InfeasibleError):
    pass


class TargetReturnInfeasibleError(InfeasibleError):
    def __init__(self, message, max_return):
        super().__init__(message)
        self.max_return = max_return


class UnboundedError(TailnetError):
    pass
