"""cfrac: expansions checked against the quadratic-surd fixed-point identity."""

import math
import random

import pytest

from nfkit import cfrac
from nfkit.errors import DomainError, PerfectSquareError


def full_period_matrix(period):
    a, b, c, e = 1, 0, 0, 1
    for x in period:
        a, b, c, e = a * x + b, a, c * x + e, c
    return a, b, c, e


def assert_fixed_point_recovers_d(exp: cfrac.CFExpansion):
    """Independent round-trip oracle: the full-period matrix [[A,B],[C,E]]
    fixes the tail surd, which forces A - E = 2*B*a0 and
    (A-E)^2 + 4*B*C = 4*B^2*d exactly."""
    A, B, C, E = full_period_matrix(exp.period)
    assert A - E == 2 * B * exp.a0
    assert (A - E) ** 2 + 4 * B * C == 4 * B * B * exp.d


def test_expand_examples():
    e = cfrac.sqrt_cf_expand(3)
    assert (e.a0, e.period) == (1, (1, 2))
    e = cfrac.sqrt_cf_expand(6)
    assert (e.a0, e.period) == (2, (2, 4))
    with pytest.raises(PerfectSquareError):
        cfrac.sqrt_cf_expand(4)
    with pytest.raises(DomainError):
        cfrac.sqrt_cf_expand(1)


def test_expansion_invariants_random():
    rng = random.Random(20240811)
    tested = 0
    while tested < 1000:
        d = rng.randrange(2, 10**8)
        if math.isqrt(d) ** 2 == d:
            continue
        tested += 1
        e = cfrac.sqrt_cf_expand(d)
        assert e.a0 == math.isqrt(d)
        assert e.period[-1] == 2 * e.a0
        assert e.period[:-1] == e.period[:-1][::-1]  # palindromic interior
        for st in e.states:
            assert (d - st.P * st.P) % st.Q == 0
        assert_fixed_point_recovers_d(e)


def test_norm_identity_random():
    rng = random.Random(5)
    tested = 0
    while tested < 200:
        d = rng.randrange(2, 10**6)
        if math.isqrt(d) ** 2 == d:
            continue
        tested += 1
        e = cfrac.sqrt_cf_expand(d)
        for n, x, y in cfrac.period_norm_values(e):
            assert x * x - d * y * y == n


def test_convergents_examples():
    cs = cfrac.convergents(6, [2, 2, 12])
    assert [c.k for c in cs] == [1, 2, 5, 62]
    assert [c.h for c in cs] == [6, 13, 32, 397]
    cs = cfrac.convergents(1, [1])
    assert (cs[1].h, cs[1].k) == (2, 1)
    cs = cfrac.convergents(0, [1, 2, 1])
    assert [c.k for c in cs] == [1, 1, 3, 4]


def test_convergents_recurrence_and_coprimality():
    rng = random.Random(9)
    for _ in range(100):
        word = [rng.randrange(1, 10) for _ in range(rng.randrange(1, 9))]
        a0 = rng.randrange(0, 10)
        cs = cfrac.convergents(a0, word)
        for i in range(2, len(cs)):
            assert cs[i].h == word[i - 1] * cs[i - 1].h + cs[i - 2].h
            assert cs[i].k == word[i - 1] * cs[i - 1].k + cs[i - 2].k
        assert all(math.gcd(c.h, c.k) == 1 for c in cs if c.h or c.k)


def test_convergents_empty_word_rejected():
    with pytest.raises(DomainError):
        cfrac.convergents(3, [])


def test_period_norm_values_examples():
    e41 = cfrac.sqrt_cf_expand(41)
    vals = cfrac.period_norm_values(e41)
    assert (-5, 6, 1) in vals
    assert (5, 13, 2) in vals
    assert (-2, 2, 1) in cfrac.period_norm_values(cfrac.sqrt_cf_expand(6))
    assert (1, 2, 1) in cfrac.period_norm_values(cfrac.sqrt_cf_expand(3))


def test_norms_field_matches_alternating_q():
    e = cfrac.sqrt_cf_expand(41)
    assert e.norms == tuple((-1) ** (i + 1) * st.Q for i, st in enumerate(e.states))


def test_is_period_repetition():
    assert cfrac.is_period_repetition([2, 2, 2], [2])
    assert cfrac.is_period_repetition([1, 2], [1, 2])
    assert not cfrac.is_period_repetition([1, 2, 1], [1, 2])
    assert not cfrac.is_period_repetition([1, 2, 1, 3], [1, 2])


def test_expand_surd_golden_ratio_and_anchor():
    pre, word, states = cfrac._expand_surd(1, 2, 5)
    assert pre == [] and word == [1]
    pre, word, states = cfrac._expand_surd(1, 2, 13)
    assert word == [3] and states[0].P == 3 and states[0].Q == 2
    with pytest.raises(PerfectSquareError):
        cfrac._expand_surd(1, 2, 9)
