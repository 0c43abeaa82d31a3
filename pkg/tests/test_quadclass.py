"""quadclass: two-route class numbers, rho cycles, certificates."""

import math
import random

import pytest

from nfkit import arith, forms, pell, quadclass
from nfkit.errors import (
    CertificateFailureError,
    DomainError,
    NotFoundError,
)


def squarefree_range(lo, hi):
    return [d for d in range(lo, hi) if arith.is_squarefree(d) and math.isqrt(d) ** 2 != d]


def test_field_discriminant():
    assert quadclass.field_discriminant(15) == 60
    assert quadclass.field_discriminant(5) == 5
    assert quadclass.field_discriminant(10) == 40
    with pytest.raises(DomainError):
        quadclass.field_discriminant(12)


def test_narrow_class_number_examples():
    assert quadclass.narrow_class_number_forms(60) == 4
    assert quadclass.narrow_class_number_forms(40) == 2
    assert quadclass.narrow_class_number_forms(12) == 2
    with pytest.raises(DomainError):
        quadclass.narrow_class_number_forms(7)  # 7 = 3 (mod 4): not a discriminant
    with pytest.raises(DomainError):
        quadclass.narrow_class_number_forms(16)  # square
    with pytest.raises(DomainError):
        quadclass.narrow_class_number_forms(-8)


def test_rho_cycle_closure_and_partition():
    rng = random.Random(77)
    for _ in range(25):
        d = rng.randrange(3, 600)
        if math.isqrt(d) ** 2 == d:
            continue
        D = 4 * d
        all_forms = forms.reduced_forms(D)
        s = math.isqrt(D)
        cycles = {}
        for f in all_forms:
            if f in cycles:
                continue
            g, steps = f, 0
            while True:
                cycles[g] = f
                g, _ = forms.rho(g, s)
                assert forms.is_reduced(g, s)
                steps += 1
                assert steps < 10_000
                if g == f:
                    break
        # partition is independent of walk order: re-walk from every form
        for f in all_forms:
            g, _ = forms.rho(f, s)
            assert cycles[g] == cycles[f]


def test_class_number_pinned():
    for d, h in ((15, 2), (3, 1), (79, 3), (10, 2), (223, 3), (35, 2), (399, 8)):
        data = quadclass.class_number(d)
        assert data.h == h, d
        assert data.methods_agree
        # narrow/wide relation
        expected_narrow = data.h * (1 if data.unit.norm == -1 else 2)
        if d % 4 == 1:
            expected_narrow = data.h * (1 if pell.field_unit(d)[3] == -1 else 2)
        assert data.h_narrow == expected_narrow


def test_analytic_examples():
    assert quadclass.analytic_class_number(10) == 2
    assert quadclass.analytic_class_number(6) == 1
    assert quadclass.analytic_class_number(223) == 3
    with pytest.raises(DomainError):
        quadclass.analytic_class_number(12)


def test_two_method_agreement_small_range():
    for d in squarefree_range(2, 300):
        data = quadclass.class_number(d)
        assert data.methods_agree, d


def test_genus_lower_bound():
    # 2^(r-1) divides the narrow class number for r ramified primes
    for d in (399, 15, 105, 210, 1155):
        if not arith.is_squarefree(d):
            continue
        D = quadclass.field_discriminant(d)
        r = len(arith.factorize(D).factors)
        data = quadclass.class_number(d)
        assert data.h_narrow % 2 ** (r - 1) == 0, d


def test_split_prime_search():
    assert quadclass.split_prime_search(15, 100) == 17
    assert quadclass.split_prime_search(35, 100) == 13
    with pytest.raises(NotFoundError):
        quadclass.split_prime_search(3, 4)
    with pytest.raises(DomainError):
        quadclass.split_prime_search(5, 100)  # 5 = 1 (mod 4)


def test_certificate_d15():
    cert = quadclass.nontriviality_certificate(15)
    assert (cert.p, cert.h, cert.phi_gate) == (17, 2, 8)
    assert cert.kronecker_value == 1
    assert all(not nc.solutions and nc.exhaustive_class for nc in cert.norm_check)
    assert cert.conclusion == "h>1 and h | h_4d_plus"


def test_certificate_d35():
    cert = quadclass.nontriviality_certificate(35)
    assert (cert.p, cert.h, cert.phi_gate) == (13, 2, 24)


def test_certificate_rejects_wrong_domain():
    with pytest.raises(DomainError):
        quadclass.nontriviality_certificate(5)  # 1 (mod 4)
    with pytest.raises(DomainError):
        quadclass.nontriviality_certificate(3)  # below 7
    with pytest.raises(DomainError):
        quadclass.nontriviality_certificate(99)  # not squarefree


def test_certificate_failure_h1():
    with pytest.raises(CertificateFailureError) as exc:
        quadclass.nontriviality_certificate(7)  # h = 1
    assert exc.value.step == "class_number"


def test_certificate_revalidation_round_trip():
    cert = quadclass.nontriviality_certificate(399)
    payload = quadclass.certificate_to_json_dict(cert)
    assert quadclass.revalidate_certificate(payload)
    tampered = dict(payload)
    tampered["h"] = "1"
    with pytest.raises(CertificateFailureError):
        quadclass.revalidate_certificate(tampered)
    tampered = dict(payload)
    tampered["p"] = "13"  # (399|13) = -1: not split
    with pytest.raises(CertificateFailureError):
        quadclass.revalidate_certificate(tampered)


def test_quadform_reexport_and_reduction():
    f = quadclass.QuadForm(1, 0, -15)
    red, mat = forms.reduce_form(f)
    assert forms.is_reduced(red)
    assert f.apply(mat) == red
    assert red.disc == 60
