"""Quadratic families d(n) = alpha*n^2 + beta*n + gamma from palindromic words.

A palindromic word (a_1, ..., a_{t-1}) of positive integers is the candidate
interior of the period of sqrt(d) = [z; a_1, ..., a_{t-1}, 2z]. Writing the
word matrix

    M = prod_i [[a_i, 1], [1, 0]] = [[A, B], [B, E]]   (palindromy forces symmetry)

with A = q_{t-1}, B = q_{t-2} the tail continuants, the surd fixed-point
identity pins d = z^2 + (2*B*z + E)/A. The z making that quotient integral
form an arithmetic progression z = eta*n + mu; substituting gives the family
coefficients, and the end-of-period convergent gives the unit
eps(n) = p(n) + q*sqrt(d(n)) with q = A and p(n) = q*z(n) + B.

The parity admissibility test (A odd, or A and B*q_{t-3} both even) is kept
separate from congruence solvability: words exist that pass the parity test
while the congruence 2*B*z + E = 0 (mod A) has no solution (e.g. (2, 1, 2)),
and those raise NoIntegralProgressionError rather than being guessed around.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Union

from . import arith
from ._jsonutil import parse_int
from .errors import DomainError, NoIntegralProgressionError, NotAdmissibleError

log = logging.getLogger(__name__)

FAMILY_SCHEMA = "nfkit/family/v1"


@dataclass(frozen=True)
class SymmetricWord:
    """Palindromic tuple of positive integers; t is the period length it seeds."""

    a: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.a:
            raise DomainError("word must be nonempty")
        if any(x < 1 for x in self.a):
            raise DomainError(f"word entries must be positive: {self.a}")
        if tuple(self.a) != tuple(reversed(self.a)):
            raise DomainError(f"word is not palindromic: {self.a}")

    @property
    def t(self) -> int:
        return len(self.a) + 1


@dataclass(frozen=True)
class QuadFamily:
    """Synthesized family: d(n), z(n) = eta*n + mu, and unit data.

    q_tm2 and corner are the synthesis byproducts B = q_{t-2} and E (the lower
    word-matrix corner); theorem_pipeline is False for odd t, whose units have
    norm -1 and fall outside the h-certification pipeline.
    """

    word: SymmetricWord
    alpha: int
    beta: int
    gamma: int
    eta: int
    mu: int
    q: int
    x1: int
    x2: int
    t: int
    n_start: int
    q_tm2: int
    corner: int
    theorem_pipeline: bool


@dataclass(frozen=True)
class FamilySlice:
    """Arithmetic-progression restriction n = modulus*k + residue of a family.

    Slices are 1-based in k; alpha/beta/gamma are the re-expressed coefficients
    of d in k, so slice members are d(k) for k >= n_start (= 1).
    """

    parent: QuadFamily
    residue: int
    modulus: int
    target: int
    alpha: int
    beta: int
    gamma: int
    n_start: int = 1


def tail_denominators(w: SymmetricWord) -> tuple[int, int, int]:
    """Continuant tail (q_{t-1}, q_{t-2}, q_{t-3}) with q_{-1} = 0, q_0 = 1."""
    qs = [0, 1]
    for a in w.a:
        qs.append(a * qs[-1] + qs[-2])
    return qs[-1], qs[-2], qs[-3]


def is_admissible(w: SymmetricWord) -> bool:
    """Parity test: q_{t-1} odd, or q_{t-1} even with q_{t-2}*q_{t-3} even."""
    q1, q2, q3 = tail_denominators(w)
    return q1 % 2 == 1 or (q2 * q3) % 2 == 0


def _word_matrix(w: SymmetricWord) -> tuple[int, int, int, int]:
    """Product of [[a,1],[1,0]] over the word; returns (A, B, C, E)."""
    A, B, C, E = 1, 0, 0, 1
    for a in w.a:
        A, B, C, E = A * a + B, A, C * a + E, C
    return A, B, C, E


def synthesize(w: SymmetricWord) -> QuadFamily:
    """Build the quadratic family seeded by an admissible word.

    Raises NotAdmissibleError when the parity test fails and
    NoIntegralProgressionError when the synthesis congruence is unsolvable.
    """
    q1, q2, q3 = tail_denominators(w)
    if not is_admissible(w):
        raise NotAdmissibleError(
            f"word {list(w.a)} inadmissible: q_t-1={q1} is even and "
            f"q_t-2*q_t-3={q2 * q3} is odd",
            q1, q2, q3,
        )
    A, B, C, E = _word_matrix(w)
    assert B == C == q2 and A == q1  # palindromy
    # solve 2*B*z + E = 0 (mod A); gcd(A, B) = 1 bounds g <= 2
    g = math.gcd(2 * B, A)
    if E % g != 0:
        raise NoIntegralProgressionError(
            f"word {list(w.a)}: congruence 2*{B}*z + {E} = 0 (mod {A}) has no solution"
        )
    eta = A // g
    mu = (-(E // g) * pow(2 * B // g, -1, eta)) % eta if eta > 1 else 0
    # d(z) = z^2 + (2*B*z + E)/A with z = eta*n + mu
    alpha = eta * eta
    beta = 2 * eta * mu + (2 * B) // g
    gamma = mu * mu + (2 * B * mu + E) // A
    t = w.t
    n_start = 1 if mu == 0 else 0  # least n with z(n) >= 1 (d >= 2 follows)
    fam = QuadFamily(
        word=w, alpha=alpha, beta=beta, gamma=gamma, eta=eta, mu=mu,
        q=A, x1=A * eta, x2=A * mu + B, t=t, n_start=n_start,
        q_tm2=B, corner=E, theorem_pipeline=(t % 2 == 0),
    )
    d1, z1, p1 = evaluate(fam, n_start)
    assert d1 >= 2 and z1 >= 1 and p1 * p1 - A * A * d1 == (-1) ** t
    return fam


def evaluate(f: Union[QuadFamily, FamilySlice], n: int) -> tuple[int, int, int]:
    """(d, z, p) at index n; for slices n is the slice's own k index."""
    if isinstance(f, FamilySlice):
        if n < f.n_start:
            raise DomainError(f"slice index {n} below start {f.n_start}")
        return evaluate(f.parent, f.modulus * n + f.residue)
    if n < f.n_start:
        raise DomainError(f"index {n} below family start {f.n_start}")
    d = (f.alpha * n + f.beta) * n + f.gamma
    z = f.eta * n + f.mu
    p = f.x1 * n + f.x2
    return d, z, p


def refine_mod4(f: QuadFamily, target: int) -> list[FamilySlice]:
    """Residue classes of n (mod 4, merged where possible) with d = target (mod 4).

    d(n) mod 4 is 4-periodic in n, so scanning n = 0..3 decides each class;
    classes r and r+2 merge into a mod-2 slice, and all four into a mod-1 slice.
    """
    if target not in (2, 3):
        raise DomainError(f"target must be 2 or 3, got {target}")
    residues = [r for r in range(4) if evaluate_unchecked(f, r) % 4 == target]
    slices: list[tuple[int, int]] = []
    if len(residues) == 4:
        slices = [(1, 0)]
    else:
        used: set[int] = set()
        for r in (0, 1):
            if r in residues and r + 2 in residues:
                slices.append((2, r))
                used.update((r, r + 2))
        slices.extend((4, r) for r in residues if r not in used)
    out = []
    for modulus, residue in sorted(slices):
        m, r = modulus, residue
        out.append(
            FamilySlice(
                parent=f, residue=r, modulus=m, target=target,
                alpha=f.alpha * m * m,
                beta=2 * f.alpha * m * r + f.beta * m,
                gamma=(f.alpha * r + f.beta) * r + f.gamma,
            )
        )
    return out


def evaluate_unchecked(f: QuadFamily, n: int) -> int:
    """d(n) without the n_start guard (used for residue scans)."""
    return (f.alpha * n + f.beta) * n + f.gamma


def members(
    f: Union[QuadFamily, FamilySlice],
    ns: Iterable[int],
    require_squarefree: bool = False,
) -> Iterator[tuple[int, int]]:
    """Yield (n, d(n)) over ns in order, skipping degenerate and filtered members.

    Indices below n_start, d < 2, and perfect squares are skipped with a log
    line; the squarefree filter is a plain filter, not an anomaly.
    """
    for n in ns:
        if n < f.n_start:
            log.debug("skip n=%d: below start index %d", n, f.n_start)
            continue
        d, _, _ = evaluate(f, n)
        if d < 2:
            log.info("skip n=%d: degenerate d=%d", n, d)
            continue
        if math.isqrt(d) ** 2 == d:
            log.info("skip n=%d: d=%d is a perfect square", n, d)
            continue
        if require_squarefree and not arith.is_squarefree(d):
            continue
        yield n, d


def to_json_dict(f: QuadFamily) -> dict:
    """Versioned descriptor with all numbers as decimal strings."""
    return {
        "schema": FAMILY_SCHEMA,
        "word": [str(a) for a in f.word.a],
        "alpha": str(f.alpha), "beta": str(f.beta), "gamma": str(f.gamma),
        "eta": str(f.eta), "mu": str(f.mu), "q": str(f.q),
        "x1": str(f.x1), "x2": str(f.x2), "t": str(f.t),
        "n_start": str(f.n_start),
    }


def from_json_dict(payload: dict) -> QuadFamily:
    """Rebuild (and re-derive) a family from its JSON descriptor."""
    if payload.get("schema") != FAMILY_SCHEMA:
        raise DomainError(f"unknown family schema: {payload.get('schema')!r}")
    word = SymmetricWord(tuple(parse_int(x) for x in payload["word"]))
    fam = synthesize(word)
    for key in ("alpha", "beta", "gamma", "eta", "mu", "q", "x1", "x2", "t", "n_start"):
        if parse_int(payload[key]) != getattr(fam, key):
            raise DomainError(f"descriptor field {key} inconsistent with synthesis")
    return fam
