"""Exception types shared across the library."""


class NfkitError(Exception):
    """Base class for all library errors."""


class DomainError(NfkitError, ValueError):
    """Input violates an operation's precondition."""


class PerfectSquareError(DomainError):
    """d is a perfect square, so sqrt(d) has no periodic expansion."""


class NotAdmissibleError(DomainError):
    """Word fails the parity admissibility test; carries the offending values."""

    def __init__(self, message: str, q_tm1: int, q_tm2: int, q_tm3: int):
        super().__init__(message)
        self.q_tm1 = q_tm1
        self.q_tm2 = q_tm2
        self.q_tm3 = q_tm3


class NoIntegralProgressionError(NfkitError):
    """Admissible word whose synthesis congruence has no solution.

    Reported rather than worked around: such a word parametrizes no d at all.
    """


class NotFoundError(NfkitError, LookupError):
    """A bounded search exhausted its limit without a hit."""


class MethodDisagreementError(NfkitError):
    """Two independent computations of the same quantity disagree (a bug signal)."""


class PrecisionExhaustedError(NfkitError):
    """Floating evaluation failed to settle near an integer after a precision retry."""


class NonIntegralResultError(NfkitError):
    """An exact rational that must be a positive integer is not (a bug signal)."""


class CertificateFailureError(NfkitError):
    """A certificate step failed; `step` names the first failing check."""

    def __init__(self, step: str, message: str):
        super().__init__(f"{step}: {message}")
        self.step = step
