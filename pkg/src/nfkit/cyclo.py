"""Relative class number h^-(m) of Q(zeta_m), exactly.

    h^-(m) = Q * w * prod over odd chi of (-B_1(chi*)/2)

where Q is 1 for prime-power m and 2 otherwise, w counts the roots of unity in
Q(zeta_m) (m if m is even, 2m if odd), chi runs over the odd Dirichlet
characters mod m, and B_1 of the primitive character chi* of conductor f is
(1/f) * sum_{a=1..f} chi*(a) * a, an element of Q(zeta_order).

The product over a Galois orbit of characters is the rational norm of a single
-B_1/2 from Q(zeta_o) down to Q, computed exactly as a resultant with the o-th
cyclotomic polynomial; a floating evaluation of the same product is kept as an
independent cross-check. m = 2 (mod 4) is rejected rather than silently
aliased to m/2.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product as iter_product

from . import arith
from .errors import DomainError, NonIntegralResultError

CYCLO_SCHEMA = "nfkit/h-minus/v1"


@dataclass(frozen=True)
class DirichletCharacter:
    """Character mod m given by image exponents on the group generators."""

    m: int
    exponents: tuple[int, ...]
    order: int
    conductor: int
    parity: str  # "even" or "odd"


@dataclass(frozen=True)
class CharacterGroup:
    """The full dual group of (Z/mZ)*."""

    m: int
    generators: tuple[tuple[int, int], ...]  # (residue, order)
    characters: tuple[DirichletCharacter, ...]


@dataclass(frozen=True)
class CycloRational:
    """Element of Q(zeta_order) in the power basis mod the cyclotomic polynomial."""

    order: int
    coeffs: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if len(self.coeffs) != len(cyclotomic_poly(self.order)) - 1:
            raise DomainError("coefficient vector does not match the cyclotomic degree")


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple[int, ...]:
    """Coefficients (ascending) of the n-th cyclotomic polynomial."""
    if n == 1:
        return (-1, 1)
    num = [0] * (n + 1)
    num[0], num[n] = -1, 1  # x^n - 1
    for d in range(1, n):
        if n % d == 0:
            num = _poly_divmod_exact(num, list(cyclotomic_poly(d)))
    return tuple(num)


def _poly_divmod_exact(num: list[int], den: list[int]) -> list[int]:
    """Exact division of integer polynomials (ascending coefficients)."""
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    for i in range(len(out) - 1, -1, -1):
        q, r = divmod(num[i + len(den) - 1], den[-1])
        assert r == 0
        out[i] = q
        for j, c in enumerate(den):
            num[i + j] -= q * c
    assert all(c == 0 for c in num)
    return out


def _primitive_root(pk: int, p: int) -> int:
    phi = pk - pk // p
    prime_factors = [q for q, _ in arith.factorize(phi).factors]
    g = 2
    while True:
        if math.gcd(g, pk) == 1 and all(pow(g, phi // q, pk) != 1 for q in prime_factors):
            return g
        g += 1


@lru_cache(maxsize=None)
def _structure(m: int) -> tuple[tuple[tuple[int, int], ...], dict[int, tuple[int, ...]]]:
    """Generators of (Z/mZ)* and the discrete-log table unit -> exponent tuple."""
    gens: list[tuple[int, int]] = []
    for p, e in arith.factorize(m).factors:
        pk = p**e
        if p == 2:
            if e == 1:
                continue
            local = [(3, 2)] if e == 2 else [(pk - 1, 2), (5, 2 ** (e - 2))]
        else:
            local = [(_primitive_root(pk, p), pk - pk // p)]
        rest = m // pk
        for g, order in local:
            if rest == 1:
                lifted = g % m
            else:
                lifted = (g + pk * (((1 - g) * pow(pk, -1, rest)) % rest)) % m
            gens.append((lifted, order))
    table: dict[int, tuple[int, ...]] = {}
    ranges = [range(order) for _, order in gens]
    for exps in iter_product(*ranges):
        v = 1
        for (g, _), e in zip(gens, exps):
            v = v * pow(g, e, m) % m
        table[v] = exps
    assert len(table) == arith.totient(m)
    return tuple(gens), table


def _chi_exponent(m: int, exponents: tuple[int, ...], a: int) -> Fraction | None:
    """chi(a) as the fraction r with chi(a) = e^(2*pi*i*r), or None if gcd > 1."""
    gens, table = _structure(m)
    logs = table.get(a % m)
    if logs is None:
        return None
    r = sum(
        (Fraction(e * l, order) for e, l, (_, order) in zip(exponents, logs, gens)),
        Fraction(0),
    )
    return r % 1


def _char_order(m: int, exponents: tuple[int, ...]) -> int:
    gens, _ = _structure(m)
    order = 1
    for e, (_, o) in zip(exponents, gens):
        order = math.lcm(order, o // math.gcd(e, o))
    return order


def _char_conductor(m: int, exponents: tuple[int, ...]) -> int:
    for f in arith.factorize(m).divisors():
        trivial = all(
            _chi_exponent(m, exponents, a) == 0
            for a in range(1, m + 1)
            if a % f == 1 % f and math.gcd(a, m) == 1
        )
        if trivial:
            return f
    raise AssertionError("unreachable: conductor m always works")  # pragma: no cover


@lru_cache(maxsize=None)
def character_group(m: int) -> CharacterGroup:
    """All Dirichlet characters mod m with order, conductor, and parity."""
    if m < 3:
        raise DomainError(f"need m >= 3, got {m}")
    gens, _ = _structure(m)
    chars = []
    for exps in iter_product(*[range(o) for _, o in gens]):
        value_at_minus1 = _chi_exponent(m, exps, m - 1)
        chars.append(
            DirichletCharacter(
                m=m,
                exponents=exps,
                order=_char_order(m, exps),
                conductor=_char_conductor(m, exps),
                parity="odd" if value_at_minus1 == Fraction(1, 2) else "even",
            )
        )
    return CharacterGroup(m, gens, tuple(chars))


def _reduce_mod_cyclotomic(coeffs: list[Fraction], order: int) -> tuple[Fraction, ...]:
    phi = cyclotomic_poly(order)
    deg = len(phi) - 1
    for i in range(len(coeffs) - 1, deg - 1, -1):
        c = coeffs[i]
        if c:
            for j, pc in enumerate(phi):
                coeffs[i - deg + j] -= c * pc
    return tuple(coeffs[:deg])


def bernoulli_b1(chi: DirichletCharacter) -> CycloRational:
    """B_1 of the primitive character inducing chi, exactly in Q(zeta_order)."""
    if chi.order == 1:
        raise DomainError("B_1 of the principal character is not defined here")
    f, o, m = chi.conductor, chi.order, chi.m
    raw = [Fraction(0)] * o
    for b in range(1, f + 1):
        if math.gcd(b, f) != 1:
            continue
        a = b
        while math.gcd(a, m) != 1:  # lift b to a unit mod m in the same class mod f
            a += f
        r = _chi_exponent(m, chi.exponents, a)
        k = r * o
        assert k.denominator == 1
        raw[int(k) % o] += Fraction(b, f)
    return CycloRational(o, _reduce_mod_cyclotomic(raw, o))


def apply_automorphism(x: CycloRational, s: int) -> CycloRational:
    """The field map zeta -> zeta^s (s coprime to the order)."""
    if math.gcd(s, x.order) != 1:
        raise DomainError(f"{s} is not coprime to the order {x.order}")
    raw = [Fraction(0)] * x.order
    for k, c in enumerate(x.coeffs):
        raw[(k * s) % x.order] += c
    return CycloRational(x.order, _reduce_mod_cyclotomic(raw, x.order))


def _resultant(a: list[Fraction], b: list[Fraction]) -> Fraction:
    """Resultant of two polynomials (ascending coefficients) over Q."""

    def deg(p: list[Fraction]) -> int:
        while p and p[-1] == 0:
            p.pop()
        return len(p) - 1

    a, b = list(a), list(b)
    da, db = deg(a), deg(b)
    if da < 0 or db < 0:
        return Fraction(0)
    result = Fraction(1)
    while db > 0:
        r = a
        for i in range(da - db, -1, -1):
            q = r[i + db] / b[db]
            for j in range(db + 1):
                r[i + j] -= q * b[j]
        dr = deg(r)
        if dr < 0:
            return Fraction(0)
        result *= Fraction(-1) ** (da * db) * b[db] ** (da - dr)
        a, da, b, db = b, db, r, dr
    return result * b[0] ** da


def _orbit_key(chi: DirichletCharacter, gens: tuple[tuple[int, int], ...]) -> tuple[int, ...]:
    """Canonical representative key of chi's Galois orbit."""
    best = None
    for s in range(1, chi.order + 1):
        if math.gcd(s, chi.order) != 1:
            continue
        key = tuple((e * s) % o for e, (_, o) in zip(chi.exponents, gens))
        if best is None or key < best:
            best = key
    return best


def _odd_orbit_factor(chi: DirichletCharacter) -> Fraction:
    """Norm of -B_1(chi)/2 from Q(zeta_order) to Q, via an integer resultant."""
    b1 = bernoulli_b1(chi)
    o = chi.order
    phi = [Fraction(c) for c in cyclotomic_poly(o)]
    degree = len(phi) - 1
    denom = math.lcm(*(c.denominator for c in b1.coeffs)) if b1.coeffs else 1
    g = [Fraction(c * denom) for c in b1.coeffs]
    res = _resultant(phi, g)
    assert res.denominator == 1
    return Fraction(-1, 2 * denom) ** degree * res


def minus_class_number(m: int) -> int:
    """Exact relative class number h^-(m) for m >= 3, m != 2 (mod 4)."""
    group = _validated_group(m)
    gens = group.generators
    odd = [c for c in group.characters if c.parity == "odd"]
    assert len(odd) == arith.totient(m) // 2
    orbits: dict[tuple[int, ...], DirichletCharacter] = {}
    sizes: dict[tuple[int, ...], int] = {}
    for chi in odd:
        key = _orbit_key(chi, gens)
        orbits.setdefault(key, chi)
        sizes[key] = sizes.get(key, 0) + 1
    total = Fraction(_q_factor(m) * _roots_of_unity(m))
    for key in sorted(orbits):
        chi = orbits[key]
        assert sizes[key] == arith.totient(chi.order)  # full Galois orbits
        total *= _odd_orbit_factor(chi)
    if total.denominator != 1 or total <= 0:
        raise NonIntegralResultError(f"h^-({m}) evaluated to {total}")
    return int(total)


def minus_class_number_float(m: int) -> float:
    """Floating cross-check of the same finite product (independent path)."""
    group = _validated_group(m)
    total = complex(_q_factor(m) * _roots_of_unity(m))
    for chi in group.characters:
        if chi.parity != "odd":
            continue
        f = chi.conductor
        b1 = 0j
        for b in range(1, f + 1):
            if math.gcd(b, f) != 1:
                continue
            a = b
            while math.gcd(a, m) != 1:
                a += f
            r = _chi_exponent(m, chi.exponents, a)
            b1 += b * cmath.exp(2j * cmath.pi * float(r))
        total *= -b1 / (2 * f)
    assert abs(total.imag) < 1e-6 * max(1.0, abs(total.real))
    return total.real


def _validated_group(m: int) -> CharacterGroup:
    if m < 3 or m % 4 == 2:
        raise DomainError(f"need m >= 3 with m != 2 (mod 4), got {m}")
    return character_group(m)


def _q_factor(m: int) -> int:
    return 1 if arith.is_prime_power(m) else 2


def _roots_of_unity(m: int) -> int:
    return m if m % 2 == 0 else 2 * m


def to_json_dict(m: int, h_minus: int, float_checked: bool) -> dict:
    group = character_group(m)
    return {
        "schema": CYCLO_SCHEMA,
        "m": str(m),
        "Q": str(_q_factor(m)),
        "w": str(_roots_of_unity(m)),
        "odd_character_count": str(sum(c.parity == "odd" for c in group.characters)),
        "h_minus": str(h_minus),
        "method": "float-checked" if float_checked else "exact",
    }
