"""Exception types.

Everything a user can trigger with bad input derives from ``DPAnovaError``
(itself a ``ValueError``); the CLI maps it to exit status 2.
"""


class DPAnovaError(ValueError):
    pass


class ValueOutOfRange(DPAnovaError):
    pass


class TooFewGroups(DPAnovaError):
    pass


class EmptyGroup(DPAnovaError):
    pass


class DegenerateSize(DPAnovaError):
    pass


class UndefinedF(DPAnovaError):
    """SSE is exactly zero, so the F ratio has no value."""


class NonPositiveN(DPAnovaError):
    pass


class UOutOfRange(DPAnovaError):
    pass


class InvalidParameter(DPAnovaError):
    pass


class EmptyNullSample(DPAnovaError):
    pass


class MalformedHeader(DPAnovaError):
    pass


class MalformedRow(DPAnovaError):
    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line


class DuplicateLabel(DPAnovaError):
    pass
