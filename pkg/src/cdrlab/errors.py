"""Exception hierarchy shared by all cdrlab modules.

Two broad families matter to callers: DataError (bad or insufficient
input) and NumericalError (a computation broke down). The CLI maps them
to distinct exit codes.
"""


class CdrlabError(Exception):
    """Base class for all cdrlab errors."""


class DataError(CdrlabError):
    """Input data violates a precondition."""


class NumericalError(CdrlabError):
    """A numerical procedure failed (divergence, breakdown, singularity)."""


class MalformedRow(DataError):
    """A raw input row could not be parsed.

    `reason` is a short machine-readable key used to aggregate drop
    counts in IngestReport.
    """

    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        self.detail = detail
        super().__init__(f"{reason}: {detail}" if detail else reason)


class EmptyInput(DataError):
    pass


class TooShort(DataError):
    pass


class LengthMismatch(DataError):
    pass


class MissingInitials(DataError):
    pass


class DegenerateInput(DataError):
    pass


class AllAnomalous(DataError):
    pass


class ZeroVariance(DataError):
    pass


class SingularRegression(NumericalError):
    pass


class NumericalBreakdown(NumericalError):
    pass


class NonFinite(NumericalError):
    pass
