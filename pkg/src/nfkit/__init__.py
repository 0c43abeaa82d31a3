"""nfkit: exact computational toolkit for real quadratic fields.

Synthesizes quadratic families d(n) from palindromic continued-fraction words,
decides norm-form equations x^2 - d*y^2 = N exactly, computes class numbers by
two independent methods, evaluates relative class numbers of cyclotomic
fields, and emits machine-checkable certificates that h(Q(sqrt(d))) > 1 and
hence h^+_{4d} > 1.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    CertificateFailureError,
    DomainError,
    MethodDisagreementError,
    NfkitError,
    NoIntegralProgressionError,
    NonIntegralResultError,
    NotAdmissibleError,
    NotFoundError,
    PerfectSquareError,
    PrecisionExhaustedError,
)
