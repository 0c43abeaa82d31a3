"""Exact integer primitives: primality, factorization, squarefree test, totient,
Kronecker symbol.

Everything here is pure, deterministic, and exact on Python ints. Primality is
proven for n < 2**64 via a fixed Miller-Rabin witness set; beyond that a
Baillie-PSW test is used (no counterexample is known; the policy threshold is
exported as PRIMALITY_DETERMINISTIC_BOUND so callers can record the caveat).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import gmpy2

from .errors import DomainError

PRIMALITY_DETERMINISTIC_BOUND = 1 << 64

# Proves primality for every n < 2**64.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

_TRIAL_DIVISION_LIMIT = 10**6


@lru_cache(maxsize=1)
def _small_primes() -> tuple[int, ...]:
    """Primes below the trial-division limit, sieved once on first use."""
    limit = _TRIAL_DIVISION_LIMIT
    sieve = bytearray([1]) * (limit + 1)
    sieve[0] = sieve[1] = 0
    for p in range(2, math.isqrt(limit) + 1):
        if sieve[p]:
            start = p * p
            sieve[start : limit + 1 : p] = b"\x00" * ((limit - start) // p + 1)
    return tuple(i for i, v in enumerate(sieve) if v)


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a|n), with the standard extension to even and negative n."""
    return int(gmpy2.kronecker(a, n))


def _mr_composite_witness(n: int, a: int) -> bool:
    """True if base a proves odd n > 2 composite."""
    d = n - 1
    s = (d & -d).bit_length() - 1
    d >>= s
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return False
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return False
    return True


def _strong_lucas_prp(n: int) -> bool:
    """Strong Lucas test with Selfridge parameters; n odd, > 5, not a square."""
    D = 5
    while True:
        k = kronecker(D, n)
        if k == -1:
            break
        if k == 0:
            return False  # gcd(n, D) > 1 and |D| < n here
        D = -D - 2 if D > 0 else -D + 2
    Q = (1 - D) // 4

    def half(x: int) -> int:
        x %= n
        if x & 1:
            x += n
        return (x >> 1) % n

    d = n + 1
    s = (d & -d).bit_length() - 1
    d >>= s
    U, V, qk = 1, 1, Q % n  # U_1, V_1, Q^1
    for bit in bin(d)[3:]:
        U, V, qk = U * V % n, (V * V - 2 * qk) % n, qk * qk % n
        if bit == "1":
            U, V = half(U + V), half(D * U + V)
            qk = qk * Q % n
    if U == 0 or V == 0:
        return True
    for _ in range(s - 1):
        V, qk = (V * V - 2 * qk) % n, qk * qk % n
        if V == 0:
            return True
    return False


def is_prime(n: int) -> bool:
    """Primality test: exact below 2**64, Baillie-PSW above."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    if n < 41 * 41:
        return True
    if n < PRIMALITY_DETERMINISTIC_BOUND:
        return not any(_mr_composite_witness(n, a) for a in _MR_WITNESSES)
    r = math.isqrt(n)
    if r * r == n:
        return False
    return not _mr_composite_witness(n, 2) and _strong_lucas_prp(n)


@dataclass(frozen=True)
class Factorization:
    """n as a product of prime powers, primes strictly ascending."""

    n: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        prod = 1
        prev = 1
        for p, e in self.factors:
            if p <= prev or e < 1:
                raise DomainError(f"malformed factorization of {self.n}")
            prev = p
            prod *= p**e
        if prod != self.n or self.n < 1:
            raise DomainError(f"factor product mismatch for {self.n}")

    def divisors(self) -> list[int]:
        """All positive divisors, ascending."""
        divs = [1]
        for p, e in self.factors:
            divs = [d * p**k for d in divs for k in range(e + 1)]
        return sorted(divs)


def _pollard_brent(n: int, c: int) -> int:
    """Brent-cycle Pollard rho with increment c; returns a factor (may equal n)."""
    if n % 2 == 0:
        return 2
    y, r, q = 2, 1, 1
    g = 1
    x = ys = y
    m = 128
    while g == 1:
        x = y
        for _ in range(r):
            y = (y * y + c) % n
        k = 0
        while k < r and g == 1:
            ys = y
            for _ in range(min(m, r - k)):
                y = (y * y + c) % n
                q = q * abs(x - y) % n
            g = math.gcd(q, n)
            k += m
        r <<= 1
    if g == n:
        # backtrack one step at a time
        g = 1
        while g == 1:
            ys = (ys * ys + c) % n
            g = math.gcd(abs(x - ys), n)
    return g


def _factor_into(n: int, out: dict[int, int]) -> None:
    """Factor n (no prime factor below the trial limit) into `out`."""
    if n == 1:
        return
    if is_prime(n):
        out[n] = out.get(n, 0) + 1
        return
    # deterministic retry schedule on the rho increment
    for c in range(1, 1000):
        g = _pollard_brent(n, c)
        if 1 < g < n:
            _factor_into(g, out)
            _factor_into(n // g, out)
            return
    raise ArithmeticError(f"rho retry schedule exhausted for {n}")  # pragma: no cover


def factorize(n: int) -> Factorization:
    """Prime factorization by trial division then Pollard-Brent rho."""
    if n < 1:
        raise DomainError(f"factorize requires n >= 1, got {n}")
    m = n
    out: dict[int, int] = {}
    for p in _small_primes():
        if p * p > m:
            break
        while m % p == 0:
            out[p] = out.get(p, 0) + 1
            m //= p
    if m > 1:
        if m < _TRIAL_DIVISION_LIMIT**2 or is_prime(m):
            out[m] = out.get(m, 0) + 1  # below the squared limit a survivor is prime
        else:
            _factor_into(m, out)
    return Factorization(n, tuple(sorted(out.items())))


def is_squarefree(n: int) -> bool:
    """True iff no squared prime divides n."""
    if n < 1:
        raise DomainError(f"is_squarefree requires n >= 1, got {n}")
    return all(e == 1 for _, e in factorize(n).factors)


def totient(n: int) -> int:
    """Euler totient via the factorization product formula."""
    if n < 1:
        raise DomainError(f"totient requires n >= 1, got {n}")
    phi = 1
    for p, e in factorize(n).factors:
        phi *= (p - 1) * p ** (e - 1)
    return phi


def is_prime_power(n: int) -> bool:
    """True iff n = p**k for a single prime p (k >= 1)."""
    return len(factorize(n).factors) == 1 if n > 1 else False
