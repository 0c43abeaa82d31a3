"""Fundamental units and exact solvability of x^2 - d*y^2 = N.

Three solver regimes, all exact decisions:

* |N| < sqrt(d): one period of convergents of sqrt(d) (two when the period is
  odd) lists every norm that coprime pairs can reach; square divisors g^2 | N
  cover the imprimitive pairs.
* general N with a small unit: every solution orbit has a representative with
  0 <= y <= B, B = floor(sqrt(|N| * U)/sqrt(d)) + 1 where U is the least unit
  of norm +1, so scanning that window decides solvability. U is evaluated once
  in >= 128-bit floating point, solely for the bound; all solution checking is
  integer-exact.
* general N with a huge unit (B beyond the scan budget): representations
  correspond to square roots z of d mod |N| via forms (N, 2z, (z^2 - d)/N);
  walking such a form into the principal rho cycle with matrix tracking both
  decides equivalence and reconstructs an explicit solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Union

import gmpy2

from . import arith, cfrac, forms
from .errors import DomainError, PerfectSquareError
from .family import FamilySlice, QuadFamily, members

NORM_SOLUTION_SCHEMA = "nfkit/norm-solution/v1"

# Largest unit-orbit window scanned directly; larger windows use the class walk.
_SCAN_LIMIT = 200_000


@dataclass(frozen=True)
class FundamentalUnit:
    """Least unit x + y*sqrt(d) > 1 of Z[sqrt(d)]."""

    d: int
    x: int
    y: int
    norm: int

    def __post_init__(self) -> None:
        if self.x * self.x - self.d * self.y * self.y != self.norm or self.norm not in (1, -1):
            raise DomainError(f"inconsistent unit ({self.x}, {self.y}) for d={self.d}")


@dataclass(frozen=True)
class NormSolution:
    """Solutions of x^2 - d*y^2 = N found by an exhaustive-per-orbit method."""

    d: int
    N: int
    solutions: tuple[tuple[int, int], ...]
    exhaustive_class: bool
    method: str


def fundamental_unit(d: int) -> FundamentalUnit:
    """Unit from the end-of-period convergent; norm is (-1)^(period length)."""
    e = cfrac.sqrt_cf_expand(d)
    t = len(e.period)
    c = cfrac.convergents(e.a0, e.period)[t - 1]
    return FundamentalUnit(d, c.h, c.k, (-1) ** t)


def field_unit(d: int) -> tuple[int, int, int, int]:
    """(u, v, denom, norm) with eps = (u + v*sqrt(d))/denom fundamental in the
    maximal order of Q(sqrt(d)): denom = 2 for d = 1 (mod 4), else 1."""
    if d % 4 != 1:
        u = fundamental_unit(d)
        return u.x, u.y, 1, u.norm
    _, word, states = cfrac._expand_surd(1, 2, d)
    A, B, C, E = 1, 0, 0, 1
    for a in word:
        A, B, C, E = A * a + B, A, C * a + E, C
    anchor = states[0]
    # eps = C*tau + E with tau = (P + sqrt(d))/Q the periodic anchor
    num_u, num_v = C * anchor.P + E * anchor.Q, C
    if (2 * num_u) % anchor.Q or (2 * num_v) % anchor.Q:
        raise ArithmeticError(f"unit extraction failed for d={d}")  # pragma: no cover
    u, v = 2 * num_u // anchor.Q, 2 * num_v // anchor.Q
    norm = (-1) ** len(word)
    if u * u - d * v * v != 4 * norm:
        raise ArithmeticError(f"unit norm check failed for d={d}")  # pragma: no cover
    return u, v, 2, norm


def _unit_window_bound(d: int, N: int) -> int:
    """B with every solution orbit owning a representative 0 <= y <= B.

    Orbits are taken under the least unit of norm +1 (eps^2 when the
    fundamental unit has norm -1): only norm-+1 units preserve N, so a window
    built from eps itself would undershoot, e.g. x^2 - 13*y^2 = -1 has least
    solution (18, 5) while eps alone bounds y by 2.
    """
    u = fundamental_unit(d)
    with gmpy2.context(precision=160):
        eps = gmpy2.mpfr(u.x) + gmpy2.mpfr(u.y) * gmpy2.sqrt(gmpy2.mpfr(d))
        if u.norm == -1:
            eps = eps * eps
        bound = gmpy2.sqrt(abs(N) * eps / d)
        return int(gmpy2.floor(bound)) + 1


def _scan_y_window(d: int, N: int, bound: int) -> list[tuple[int, int]]:
    out = []
    for y in range(bound + 1):
        t = N + d * y * y
        if t >= 0:
            x = math.isqrt(t)
            if x * x == t:
                out.append((x, y))
    return out


def _primitive_reps_classwalk(d: int, N: int) -> list[tuple[int, int]]:
    """One representative per square-root class z of d (mod |N|), via the
    principal rho cycle; empty iff x^2 - d*y^2 = N has no coprime solution."""
    g0, mg, cyc = forms.principal_cycle(d)
    index = {f: t for f, t in cyc}
    m = abs(N)
    out = []
    for z in range(m):
        if (z * z - d) % m:
            continue
        f = forms.QuadForm(N, 2 * z, (z * z - d) // N)
        fred, r = forms.reduce_form(f)
        t = index.get(fred)
        if t is None:
            continue
        # f = (x^2 - d y^2) ∘ (Mg T R^-1); its (1,0) value N pulls back to a solution
        mat = forms.mat_mul(forms.mat_mul(mg, t), forms.mat_inv(r))
        x, y = abs(mat[0]), abs(mat[2])
        assert x * x - d * y * y == N
        out.append((x, y))
    return out


def _validate_d(d: int) -> None:
    if d < 2:
        raise DomainError(f"need d >= 2, got {d}")
    if math.isqrt(d) ** 2 == d:
        raise PerfectSquareError(f"{d} is a perfect square")


def solve_norm_small(d: int, N: int) -> NormSolution:
    """Complete decision of x^2 - d*y^2 = N for 0 < N^2 < d via one period
    of convergents (two periods when the period length is odd)."""
    _validate_d(d)
    if N == 0 or N * N >= d:
        raise DomainError(f"solve_norm_small needs 0 < N^2 < d, got N={N}, d={d}")
    e = cfrac.sqrt_cf_expand(d)
    t = len(e.period)
    span = t if t % 2 == 0 else 2 * t
    cs = cfrac.convergents(e.a0, tuple(e.period) * (span // t))
    found: set[tuple[int, int]] = set()
    g = 1
    while g * g <= abs(N):
        if N % (g * g) == 0:
            target = N // (g * g)
            if target == 1:
                found.add((g, 0))
            for i in range(span):
                if (-1) ** (i + 1) * e.states[i % t].Q == target:
                    c = cs[i]
                    found.add((g * c.h, g * c.k))
        g += 1
    return NormSolution(d, N, tuple(sorted(found)), True, "cf-period")


def solve_norm_bounded(d: int, N: int) -> NormSolution:
    """Complete decision of x^2 - d*y^2 = N for any N != 0.

    Scans the unit-orbit window when it is small; otherwise decides by form
    equivalence, which also reconstructs explicit (possibly enormous) witnesses.
    """
    _validate_d(d)
    if N == 0:
        raise DomainError("N must be nonzero")
    bound = _unit_window_bound(d, N)
    if bound <= _SCAN_LIMIT:
        sols = _scan_y_window(d, N, bound)
        return NormSolution(d, N, tuple(sorted(sols)), True, "bounded-scan")
    found: set[tuple[int, int]] = set()
    g = 1
    while g * g <= abs(N):
        if N % (g * g) == 0:
            for x, y in _primitive_reps_classwalk(d, N // (g * g)):
                found.add((g * x, g * y))
        g += 1
    return NormSolution(d, N, tuple(sorted(found)), True, "class-walk")


def lemma31_scan(
    f: Union[QuadFamily, FamilySlice], p: int, ns: Iterable[int]
) -> list[tuple[int, int, int, int]]:
    """Decide x^2 - d(n)*y^2 = +p and -p for each valid member; return every
    solution as (n, sign, x, y). An empty list is a verified unsolvability
    report for the scanned range."""
    if not arith.is_prime(p):
        raise DomainError(f"p must be prime, got {p}")
    out: list[tuple[int, int, int, int]] = []
    for n, d in members(f, ns):
        for sign in (1, -1):
            solver = solve_norm_small if p * p < d else solve_norm_bounded
            sol = solver(d, sign * p)
            out.extend((n, sign, x, y) for x, y in sol.solutions)
    return out


def unit_to_json_dict(u: FundamentalUnit) -> dict:
    return {
        "schema": "nfkit/fundamental-unit/v1",
        "d": str(u.d), "x": str(u.x), "y": str(u.y), "norm": str(u.norm),
    }


def norm_solution_to_json_dict(s: NormSolution) -> dict:
    return {
        "schema": NORM_SOLUTION_SCHEMA,
        "d": str(s.d),
        "N": str(s.N),
        "solutions": [[str(x), str(y)] for x, y in s.solutions],
        "exhaustive_class": s.exhaustive_class,
        "method": s.method,
    }
