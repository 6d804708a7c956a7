from fractions import Fraction

import numpy as np
import pytest

from regulus import theorems
from regulus.operators import Character, ModularFormMeta
from regulus.series import EXACT, MOD, Series, add, shift
from regulus.eta import expand_quotient
from regulus.theorems import (F_residue, StatementId, VerificationReport, construct_F,
                              construct_f_kmj, construct_f_km, lemma_quotient, meta_f_km,
                              meta_f_kmj, sturm_bound, verify_congruence, verify_identity_3_1,
                              verify_lemma_3_2, verify_prop_fkmj, verify_prop_j0)


def test_sturm_bound_values():
    assert sturm_bound(ModularFormMeta(10, 5760)) == 11520
    # level 1: empty prime product, floor(12 * 1 / 12)
    assert sturm_bound(ModularFormMeta(12, 1)) == 1
    assert sturm_bound(ModularFormMeta(144, 1)) == 12
    # doubling the level adds no new prime factor, so the bound doubles
    assert sturm_bound(ModularFormMeta(10, 11520)) == 23040
    assert sturm_bound(meta_f_km(2, 5)) == sturm_bound(meta_f_kmj(2, 5, 1)) == 11520
    with pytest.raises(ValueError):
        sturm_bound(ModularFormMeta(Fraction(5, 2), 4))


def test_form_metadata():
    meta = meta_f_kmj(3, 7, 2)
    assert meta.weight == (343 - 49) // 2 and meta.level == 576 * 21
    assert meta.character == Character(21, 576 * 21)


def test_F_support_in_one_class():
    F = construct_F(3, 7, 600)
    support = [n for n, c in enumerate(F.q_list(600)) if c]
    assert support and {n % 24 for n in support} == {F_residue(3, 7)}


@pytest.mark.parametrize("k,m", [(2, 5), (3, 7), (4, 5)])
def test_identity_exact(k, m):
    rep = verify_identity_3_1(k, m, 800)
    assert rep.passed and rep.first_failure is None and rep.ring == "exact"


def test_identity_in_modular_ring():
    assert verify_identity_3_1(2, 7, 500, MOD(49)).passed


def test_identity_catches_a_perturbation(monkeypatch):
    real = theorems.construct_F

    def bumped(k, m, depth, ring=EXACT):
        F = real(k, m, depth, ring)
        t = 24 * 7 + F_residue(k, m)
        return add(F, shift(Series.q([1], depth + 1, ring), 24 * t))

    monkeypatch.setattr(theorems, "construct_F", bumped)
    rep = verify_identity_3_1(2, 5, 400)
    assert not rep.passed
    assert rep.first_failure[0] == Fraction(24 * 7 + F_residue(2, 5) + 5)


def test_identity_sides_are_not_trivial():
    lhs, rhs = theorems.identity_sides(2, 5, 600)
    assert len(lhs.nonzero_terms()) > 20


def test_prop_j0():
    rep = verify_prop_j0(2, 5, 800)
    assert rep.passed and rep.params["M"] == 5 and not rep.proof_grade


def test_prop_fkmj_not_proof_grade_below_bound():
    rep = verify_prop_fkmj(3, 5, 1, 600, sturm=True)
    assert rep.passed and rep.sturm_bound == sturm_bound(meta_f_kmj(3, 5, 1))
    assert not rep.proof_grade


def test_prop_fkmj_at_sturm_depth_is_proof_grade():
    rep = verify_prop_fkmj(2, 5, 1, 11520, sturm=True)
    assert rep.passed and rep.proof_grade


def test_congruence_is_sharp():
    # f_{2,5,1} agrees with F mod 25 but not mod 125
    f = construct_f_kmj(2, 5, 1, 400, MOD(125))
    F = construct_F(2, 5, 400)
    assert verify_congruence(f.series, F, 25, 400).passed
    assert not verify_congruence(f.series, F, 125, 400).passed


def test_fkmj_family_consistent():
    a = construct_f_kmj(2, 5, 1, 300, MOD(25)).series
    b = construct_f_kmj(2, 5, 2, 300, MOD(125)).series
    assert np.array_equal(a.q_array(300) % 25, b.q_array(300) % 25)
    assert np.array_equal(construct_f_km(2, 5, 300, MOD(5)).series.q_array(300),
                          a.q_array(300) % 5)


def test_wrong_construction_ring_rejected():
    with pytest.raises(ValueError):
        verify_prop_fkmj(2, 5, 1, 100, ring=MOD(5))


def test_bad_parameters_rejected():
    with pytest.raises(ValueError):
        construct_F(2, 6, 10)
    with pytest.raises(ValueError):
        construct_F(1, 5, 10)
    with pytest.raises(ValueError):
        construct_f_kmj(2, 5, 0, 10)


def test_verify_congruence_harness():
    b = Series.q(list(range(50)), 50)
    assert verify_congruence(b, b, 7, 49).passed
    bumped = add(b, shift(Series.q([7], 50), 24 * 30))
    assert verify_congruence(bumped, b, 7, 49).passed
    off = add(b, shift(Series.q([1], 50), 24 * 30))
    rep = verify_congruence(off, b, 7, 49)
    assert not rep.passed and rep.first_failure == (Fraction(30), 30 % 7, 31 % 7)


@pytest.mark.parametrize("n1,n2,i", [(1, 5, 1), (24, 7, 2), (3, 2, 3)])
def test_lemma(n1, n2, i):
    assert verify_lemma_3_2(n1, n2, i, 300).passed


def test_lemma_quotient_is_not_an_identity():
    s = expand_quotient(lemma_quotient(1, 5, 1), 24 * 100)
    assert len(s.nonzero_terms()) > 1


def test_report_invariants():
    with pytest.raises(ValueError):
        VerificationReport(StatementId.LEMMA_3_2, {}, 10, True, proof_grade=True)
    with pytest.raises(ValueError):
        VerificationReport(StatementId.LEMMA_3_2, {}, 10, False)
