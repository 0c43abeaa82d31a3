"""Class numbers of real quadratic fields by two independent methods, plus the
split-prime non-triviality certificate.

The narrow class number is the rho-cycle count over reduced indefinite forms
of the field discriminant; the wide class number follows from the fundamental
unit's norm (equal when the norm is -1, halved otherwise). Independently, the
wide class number is recomputed from the Dirichlet formula

    h = sqrt(D) * L(1, chi_D) / (2 * log eps)
      = -sum_{0 < a < D/2} chi_D(a) * log sin(pi*a/D) / log eps,

evaluated in 128-bit floating point with one precision-doubling retry; the two
routes must agree or class_number raises. A certificate for squarefree
d = 3 (mod 4) packages a split prime p = 1 (mod 4) whose norm equations
x^2 - d*y^2 = +-p are exhaustively unsolvable: the prime ideal above p is then
non-principal, so h > 1, and totient(d) > 4 lifts the bound to h | h^+_{4d}.
"""

from __future__ import annotations

from dataclasses import dataclass

import gmpy2

from . import arith, forms, pell
from ._jsonutil import parse_int
from .errors import (
    CertificateFailureError,
    DomainError,
    MethodDisagreementError,
    NotFoundError,
    PrecisionExhaustedError,
)

QuadForm = forms.QuadForm  # re-export: the form type is part of this module's surface

CERTIFICATE_SCHEMA = "nfkit/certificate/v1"

DEFAULT_SPLIT_PRIME_LIMIT = 10_000

_ROUND_TOLERANCE = 1e-6


@dataclass(frozen=True)
class ClassData:
    """Narrow and wide class numbers with the unit and agreement flag."""

    d: int
    D: int
    h_narrow: int
    h: int
    unit: pell.FundamentalUnit
    methods_agree: bool


@dataclass(frozen=True)
class Certificate:
    """Self-contained evidence that h(Q(sqrt(d))) > 1 and h | h^+_{4d}."""

    d: int
    p: int
    kronecker_value: int
    norm_check: tuple[pell.NormSolution, pell.NormSolution]
    h: int
    phi_gate: int
    conclusion: str


def field_discriminant(d: int) -> int:
    """D = d for d = 1 (mod 4), else 4d; requires squarefree d >= 2."""
    if d < 2 or not arith.is_squarefree(d):
        raise DomainError(f"need squarefree d >= 2, got {d}")
    return d if d % 4 == 1 else 4 * d


def narrow_class_number_forms(D: int) -> int:
    """Narrow class number as the rho-cycle count of reduced forms of disc D."""
    return forms.cycle_count(D)


def _regulator(d: int, precision: int) -> gmpy2.mpfr:
    u, v, denom, _ = pell.field_unit(d)
    with gmpy2.context(precision=precision):
        eps = (gmpy2.mpfr(u) + gmpy2.mpfr(v) * gmpy2.sqrt(gmpy2.mpfr(d))) / denom
        return gmpy2.log(eps)


def _analytic_value(d: int, precision: int) -> float:
    """The Dirichlet quotient at the given working precision."""
    D = field_discriminant(d)
    with gmpy2.context(precision=precision):
        pi = gmpy2.const_pi()
        step = pi / D
        ratio = gmpy2.mpfr(1)
        for a in range(1, (D - 1) // 2 + 1):
            chi = arith.kronecker(D, a)
            if chi:
                s = gmpy2.sin(step * a)
                ratio = ratio / s if chi > 0 else ratio * s
        return float(gmpy2.log(ratio) / _regulator(d, precision))


def analytic_class_number(d: int) -> int:
    """Wide class number from the Dirichlet formula; exact-integer rounding gate."""
    if d < 2 or not arith.is_squarefree(d):
        raise DomainError(f"need squarefree d >= 2, got {d}")
    for precision in (128, 256):
        value = _analytic_value(d, precision)
        h = round(value)
        if h >= 1 and abs(value - h) < _ROUND_TOLERANCE:
            return h
    raise PrecisionExhaustedError(f"analytic value {value} for d={d} did not settle")


def class_number(d: int) -> ClassData:
    """Two-method class number; raises MethodDisagreementError on any mismatch."""
    D = field_discriminant(d)
    unit = pell.fundamental_unit(d)
    _, _, _, field_norm = pell.field_unit(d)
    h_narrow = narrow_class_number_forms(D)
    if field_norm == -1:
        h_forms = h_narrow
    else:
        if h_narrow % 2:
            raise MethodDisagreementError(
                f"d={d}: narrow class number {h_narrow} odd with unit norm +1"
            )
        h_forms = h_narrow // 2
    h_analytic = analytic_class_number(d)
    if h_forms != h_analytic:
        raise MethodDisagreementError(
            f"d={d}: form cycles give h={h_forms}, analytic gives h={h_analytic}"
        )
    return ClassData(d, D, h_narrow, h_forms, unit, True)


def split_prime_search(d: int, limit: int, start: int = 5) -> int:
    """Least prime p in [start, limit] with p = 1 (mod 4), p not dividing 4d,
    and Kronecker (d|p) = +1."""
    if d < 3 or d % 4 != 3:
        raise DomainError(f"need d = 3 (mod 4), got {d}")
    p = start + (1 - start) % 4  # align to 1 (mod 4)
    while p <= limit:
        if (4 * d) % p and arith.kronecker(d, p) == 1 and arith.is_prime(p):
            return p
        p += 4
    raise NotFoundError(f"no split prime p = 1 (mod 4) in [{start}, {limit}] for d={d}")


def _norm_checks(d: int, p: int) -> tuple[pell.NormSolution, pell.NormSolution]:
    solver = pell.solve_norm_small if p * p < d else pell.solve_norm_bounded
    return solver(d, p), solver(d, -p)


def nontriviality_certificate(d: int, limit: int = DEFAULT_SPLIT_PRIME_LIMIT) -> Certificate:
    """Certify h(Q(sqrt(d))) > 1 with the divisibility conclusion h | h^+_{4d}.

    Split primes whose norm equation turns out solvable certify nothing (their
    ideal is principal), so the search advances to the next one. Every step is
    checked; the first failure raises CertificateFailureError naming it.
    """
    if d < 7 or d % 4 != 3 or not arith.is_squarefree(d):
        raise DomainError(f"certificate needs squarefree d = 3 (mod 4), d >= 7; got {d}")
    data = class_number(d)
    if data.h <= 1:
        raise CertificateFailureError("class_number", f"h(Q(sqrt({d}))) = {data.h}")
    phi = arith.totient(d)
    if phi <= 4:
        raise CertificateFailureError("phi_gate", f"totient({d}) = {phi} <= 4")
    start = 5
    chosen = None
    while True:
        try:
            p = split_prime_search(d, limit, start)
        except NotFoundError as exc:
            raise CertificateFailureError("split_prime_search", str(exc)) from exc
        plus, minus = _norm_checks(d, p)
        if not plus.solutions and not minus.solutions:
            chosen = (p, plus, minus)
            break
        start = p + 4
    p, plus, minus = chosen
    return Certificate(
        d=d, p=p, kronecker_value=1, norm_check=(plus, minus),
        h=data.h, phi_gate=phi, conclusion="h>1 and h | h_4d_plus",
    )


def certificate_to_json_dict(c: Certificate) -> dict:
    return {
        "schema": CERTIFICATE_SCHEMA,
        "d": str(c.d),
        "p": str(c.p),
        "kronecker_value": str(c.kronecker_value),
        "norm_check": [
            pell.norm_solution_to_json_dict(c.norm_check[0]),
            pell.norm_solution_to_json_dict(c.norm_check[1]),
        ],
        "h": str(c.h),
        "phi_gate": str(c.phi_gate),
        "conclusion": c.conclusion,
    }


def revalidate_certificate(payload: dict) -> bool:
    """Recheck a serialized certificate from its fields alone.

    Recomputes the Kronecker symbol, re-runs both norm solvers, recomputes the
    class number and the totient gate; raises CertificateFailureError on the
    first failing step, returns True when everything re-verifies.
    """
    if payload.get("schema") != CERTIFICATE_SCHEMA:
        raise DomainError(f"unknown certificate schema: {payload.get('schema')!r}")
    d = parse_int(payload["d"])
    p = parse_int(payload["p"])
    if not arith.is_prime(p) or p % 4 != 1:
        raise CertificateFailureError("split_prime", f"p={p} is not a prime = 1 (mod 4)")
    if arith.kronecker(d, p) != parse_int(payload["kronecker_value"]) or arith.kronecker(d, p) != 1:
        raise CertificateFailureError("kronecker", f"(d|p) != +1 for d={d}, p={p}")
    plus, minus = _norm_checks(d, p)
    if plus.solutions or minus.solutions:
        raise CertificateFailureError("norm_check", f"x^2-{d}y^2=+-{p} is solvable")
    recorded = [
        tuple(map(parse_int, (s["d"], s["N"]))) for s in payload["norm_check"]
    ]
    if recorded != [(d, p), (d, -p)]:
        raise CertificateFailureError("norm_check", "recorded equations do not match d, p")
    h = class_number(d).h
    if h != parse_int(payload["h"]) or h <= 1:
        raise CertificateFailureError("class_number", f"recomputed h={h}")
    phi = arith.totient(d)
    if phi != parse_int(payload["phi_gate"]) or phi <= 4:
        raise CertificateFailureError("phi_gate", f"recomputed totient={phi}")
    return True
