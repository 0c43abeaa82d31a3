"""Indefinite binary quadratic forms: reduction, rho cycles, equivalence.

A form (a, b, c) has discriminant D = b^2 - 4ac > 0 (nonsquare here) and is
reduced iff |sqrt(D) - 2|a|| < b < sqrt(D); the comparisons below are exact
(integer squaring only). The reduction step rho maps (a, b, c) to
(c, b', (b'^2 - D)/(4c)) with b' = -b (mod 2|c|) normalized into the reduced
window (or into (-|c|, |c|] while |c| is still large). Each step is the
SL2-action of S = [[0, -1], [1, (b + b')/(2c)]], so accumulating the
step matrices tracks proper equivalence exactly; reduced forms are properly
equivalent iff they share a rho cycle, and the cycle count at discriminant D
is the narrow class number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import arith
from .errors import DomainError

Mat = tuple[int, int, int, int]  # row-major 2x2

IDENTITY: Mat = (1, 0, 0, 1)


def mat_mul(m: Mat, n: Mat) -> Mat:
    return (
        m[0] * n[0] + m[1] * n[2],
        m[0] * n[1] + m[1] * n[3],
        m[2] * n[0] + m[3] * n[2],
        m[2] * n[1] + m[3] * n[3],
    )


def mat_inv(m: Mat) -> Mat:
    """Inverse of a det-1 integer matrix."""
    if m[0] * m[3] - m[1] * m[2] != 1:
        raise DomainError("matrix is not in SL2(Z)")
    return (m[3], -m[1], -m[2], m[0])


@dataclass(frozen=True)
class QuadForm:
    """Binary quadratic form a*x^2 + b*x*y + c*y^2."""

    a: int
    b: int
    c: int

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def value(self, x: int, y: int) -> int:
        return (self.a * x + self.b * y) * x + self.c * y * y

    def apply(self, m: Mat) -> "QuadForm":
        """The form f∘M, i.e. (x, y) -> f(M(x, y))."""
        p, q, r, s = m
        a = self.value(p, r)
        c = self.value(q, s)
        b = 2 * (self.a * p * q + self.c * r * s) + self.b * (p * s + q * r)
        return QuadForm(a, b, c)


def _check_disc(D: int) -> int:
    if D <= 0 or D % 4 not in (0, 1):
        raise DomainError(f"invalid positive discriminant {D}")
    s = math.isqrt(D)
    if s * s == D:
        raise DomainError(f"discriminant {D} is a perfect square")
    return s


def is_reduced(f: QuadForm, s: int | None = None) -> bool:
    """Exact test of |sqrt(D) - 2|a|| < b < sqrt(D)."""
    D = f.disc
    if s is None:
        s = _check_disc(D)
    b = f.b
    if b <= 0 or b * b >= D:
        return False
    t = D + 4 * f.a * f.a - b * b
    return t < 0 or t * t < 16 * f.a * f.a * D


def rho(f: QuadForm, s: int) -> tuple[QuadForm, Mat]:
    """One reduction step and its det-1 step matrix (s = isqrt(disc))."""
    D = f.disc
    c = f.c
    m = 2 * abs(c)
    r = (-f.b) % m
    if abs(c) > s:
        b2 = r if r <= abs(c) else r - m
    else:
        b2 = s - ((s - r) % m)
    g = QuadForm(c, b2, (b2 * b2 - D) // (4 * c))
    return g, (0, -1, 1, (f.b + b2) // (2 * c))


def reduce_form(f: QuadForm) -> tuple[QuadForm, Mat]:
    """Reduce f, returning (reduced, M) with reduced = f∘M."""
    s = _check_disc(f.disc)
    m: Mat = IDENTITY
    for _ in range(4 * f.disc.bit_length() + 64):
        if is_reduced(f, s):
            return f, m
        f, step = rho(f, s)
        m = mat_mul(m, step)
    raise ArithmeticError("reduction did not terminate")  # pragma: no cover


def cycle(f: QuadForm) -> list[tuple[QuadForm, Mat]]:
    """The rho cycle of a reduced form: [(g_j, T_j)] with g_j = f∘T_j, T_0 = I."""
    s = _check_disc(f.disc)
    if not is_reduced(f, s):
        raise DomainError(f"{f} is not reduced")
    out: list[tuple[QuadForm, Mat]] = []
    g, t = f, IDENTITY
    cap = 64 * (s + 64)  # cycle length is far below the reduced-form count
    while True:
        out.append((g, t))
        g, step = rho(g, s)
        t = mat_mul(t, step)
        if g == f:
            return out
        if len(out) > cap:
            raise ArithmeticError("rho cycle did not close")  # pragma: no cover


def reduced_forms(D: int) -> list[QuadForm]:
    """All primitive reduced forms of discriminant D, sorted."""
    s = _check_disc(D)
    out = []
    for b in range(2 - (D & 1), s + 1, 2):
        m4 = D - b * b  # divisible by 4 by parity choice
        m = m4 // 4
        for a in arith.factorize(m).divisors():
            c = m // a
            for fa, fc in ((a, -c), (-a, c)):
                f = QuadForm(fa, b, fc)
                if math.gcd(math.gcd(abs(fa), b), abs(fc)) == 1 and is_reduced(f, s):
                    out.append(f)
    return sorted(out, key=lambda f: (f.a, f.b, f.c))


def cycle_count(D: int) -> int:
    """Number of rho cycles among the reduced forms of discriminant D."""
    forms = reduced_forms(D)
    s = math.isqrt(D)
    seen: set[QuadForm] = set()
    count = 0
    for f in forms:
        if f in seen:
            continue
        count += 1
        g = f
        while True:
            seen.add(g)
            g, _ = rho(g, s)
            if g == f:
                break
    return count


def principal_cycle(d: int) -> tuple[QuadForm, Mat, list[tuple[QuadForm, Mat]]]:
    """Reduced form g0 of x^2 - d*y^2, its reduction matrix, and g0's cycle."""
    g = QuadForm(1, 0, -d)
    g0, mg = reduce_form(g)
    return g0, mg, cycle(g0)
