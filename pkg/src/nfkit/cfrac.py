"""Periodic continued fractions of sqrt(d), exactly.

The expansion of sqrt(d) is [a0; a1, ..., at] with at = 2*a0 and a1..a_{t-1}
palindromic. States are quadratic surds (P + sqrt(d))/Q advanced by

    a = floor((P + a0)/Q),   P' = a*Q - P,   Q' = (d - P'^2)/Q,

all in integer arithmetic; the minimal period is detected by the first
recurrence of a (P, Q) pair. Convergents h_i/k_i follow the standard two-term
recurrence and satisfy h_i^2 - d*k_i^2 = (-1)^(i+1) * Q_{i+1}, which is what
makes one period a complete table of small norms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DomainError, PerfectSquareError


@dataclass(frozen=True)
class SurdState:
    """The quadratic surd (P + sqrt(D))/Q in canonical CF form: Q | D - P^2."""

    P: int
    Q: int
    D: int

    def __post_init__(self) -> None:
        if self.Q == 0 or (self.D - self.P * self.P) % self.Q != 0:
            raise DomainError(f"non-canonical surd state ({self.P},{self.Q},{self.D})")


@dataclass(frozen=True)
class Convergent:
    h: int
    k: int
    index: int


@dataclass(frozen=True)
class CFExpansion:
    """Minimal-period expansion of sqrt(d).

    states[i] holds the surd whose integer part is period[i];
    norms[i] = (-1)^(i+1) * states[i].Q = h_i^2 - d*k_i^2.
    """

    d: int
    a0: int
    period: tuple[int, ...]
    states: tuple[SurdState, ...]
    norms: tuple[int, ...]


def sqrt_cf_expand(d: int) -> CFExpansion:
    """Minimal-period continued fraction of sqrt(d) for nonsquare d >= 2."""
    if d < 2:
        raise DomainError(f"need d >= 2, got {d}")
    a0 = math.isqrt(d)
    if a0 * a0 == d:
        raise PerfectSquareError(f"{d} is a perfect square")
    period: list[int] = []
    states: list[SurdState] = []
    norms: list[int] = []
    P, Q = a0, d - a0 * a0
    first = (P, Q)
    sign = -1  # (-1)^(i+1) at i = 0
    while True:
        states.append(SurdState(P, Q, d))
        a = (P + a0) // Q
        period.append(a)
        norms.append(sign * Q)
        sign = -sign
        P = a * Q - P
        Q = (d - P * P) // Q
        if (P, Q) == first:
            break
    return CFExpansion(d, a0, tuple(period), tuple(states), tuple(norms))


def convergents(a0: int, word: Sequence[int]) -> list[Convergent]:
    """Convergents of [a0; word] with k_{-1} = 0, k_0 = 1."""
    if not word:
        raise DomainError("word must be nonempty")
    hs = [1, a0]  # h_{-1}, h_0
    ks = [0, 1]
    out = [Convergent(a0, 1, 0)]
    for i, a in enumerate(word, start=1):
        hs.append(a * hs[-1] + hs[-2])
        ks.append(a * ks[-1] + ks[-2])
        out.append(Convergent(hs[-1], ks[-1], i))
    return out


def period_norm_values(e: CFExpansion) -> list[tuple[int, int, int]]:
    """(N, x, y) triples with x^2 - d*y^2 = N for the convergents of one period.

    Every N with |N| < sqrt(d) that is representable with coprime x, y appears
    among these values (up to the sign alternation handled by callers when the
    period length is odd).
    """
    cs = convergents(e.a0, e.period)
    out = []
    for i, n in enumerate(e.norms):
        c = cs[i]
        out.append((n, c.h, c.k))
    return out


def is_period_repetition(candidate: Sequence[int], minimal: Sequence[int]) -> bool:
    """True if `candidate` equals `minimal` repeated a whole number of times."""
    lc, lm = len(candidate), len(minimal)
    if lm == 0 or lc % lm != 0:
        return False
    return tuple(candidate) == tuple(minimal) * (lc // lm)


def _expand_surd(P: int, Q: int, D: int, max_steps: int = 100_000) -> tuple[list[int], list[int], list[SurdState]]:
    """General expansion of (P + sqrt(D))/Q: (preperiod, period, periodic states).

    Internal helper (only sqrt(d) expansions are public API); requires the
    canonical condition Q | D - P^2, nonsquare D, and a state chain that keeps
    Q > 0 (true for the half-integer generators this library expands).
    """
    if D < 2 or math.isqrt(D) ** 2 == D:
        raise PerfectSquareError(f"need nonsquare D >= 2, got {D}")
    SurdState(P, Q, D)  # validate canonicality
    s = math.isqrt(D)
    seen: dict[tuple[int, int], int] = {}
    digits: list[int] = []
    states: list[SurdState] = []
    while (P, Q) not in seen:
        if Q <= 0:
            raise DomainError(f"expansion left the Q > 0 regime at ({P},{Q})")
        seen[(P, Q)] = len(digits)
        states.append(SurdState(P, Q, D))
        a = (P + s) // Q  # floor((P + sqrt(D))/Q); exact since sqrt(D) is irrational
        digits.append(a)
        P = a * Q - P
        Q = (D - P * P) // Q
        if len(digits) > max_steps:
            raise ArithmeticError("expansion failed to cycle")  # pragma: no cover
    start = seen[(P, Q)]
    return digits[:start], digits[start:], states[start:]
