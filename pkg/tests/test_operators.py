from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import jacobi_symbol, primerange

from regulus.eta import EtaQuotient, expand_to
from regulus.operators import (TRIVIAL, Character, ModularFormMeta, apply_U, apply_V, hecke_T,
                               kronecker)
from regulus.series import MOD, PrecisionError, Series, add, scale
from regulus.theorems import random_sparse_series

# Ramanujan tau(n), n = 1..10 (coefficients of Delta = eta(z)^24).
TAU = [1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920]


@settings(max_examples=200, deadline=None)
@given(st.integers(-500, 500), st.integers(1, 499).map(lambda n: 2 * n + 1))
def test_kronecker_matches_jacobi_for_odd_moduli(a, n):
    assert kronecker(a, n) == jacobi_symbol(a, n)


@pytest.mark.parametrize("p", list(primerange(3, 60)))
def test_euler_criterion(p):
    for a in range(1, p):
        assert kronecker(a, p) % p == pow(a, (p - 1) // 2, p)


def test_kronecker_at_two_and_signs():
    assert [kronecker(a, 2) for a in (1, 3, 5, 7, 2)] == [1, -1, -1, 1, 0]
    assert kronecker(-1, -1) == -1 and kronecker(1, -1) == 1
    assert kronecker(1, 0) == 1 and kronecker(5, 0) == 0


@settings(max_examples=150, deadline=None)
@given(st.integers(-300, 300), st.integers(-300, 300).filter(bool),
       st.integers(-300, 300).filter(bool))
def test_kronecker_multiplicative_in_the_bottom(a, m, n):
    assert kronecker(a, m * n) == kronecker(a, m) * kronecker(a, n)


def test_character_vanishes_off_units():
    chi = Character(10, 5760)
    assert chi(3) == 0 and chi(7) == kronecker(10, 7)
    assert TRIVIAL(12) == 1
    with pytest.raises(ValueError):
        Character(0)


def test_meta_validation():
    assert ModularFormMeta(Fraction(10), 5760).integral_weight == 10
    with pytest.raises(ValueError):
        ModularFormMeta(Fraction(1, 2), 4).integral_weight
    with pytest.raises(ValueError):
        ModularFormMeta(0, 1)


def test_U_and_V_on_a_small_series():
    f = Series.q(range(1, 21), 20)
    assert apply_U(f, 3).q_list(6) == [1, 4, 7, 10, 13, 16, 19]
    assert apply_U(f, 3).q_order == 7
    v = apply_V(f, 2)
    assert v.q_list(5) == [1, 0, 2, 0, 3, 0]
    assert apply_U(apply_V(f, 4), 4) == f


@pytest.mark.parametrize("d1,d2", [(2, 3), (5, 7), (4, 9), (1, 6)])
def test_uv_commute_for_coprime_pairs(d1, d2):
    f = random_sparse_series(d1 * 100 + d2, 200)
    assert apply_V(apply_U(f, d1), d2) == apply_U(apply_V(f, d2), d1)


def test_uv_need_not_commute_without_coprimality():
    f = Series.q([0, 1, 0, 0, 0], 5)
    assert apply_V(apply_U(f, 2), 2) != apply_U(apply_V(f, 2), 2)


def test_operators_require_integral_exponents():
    with pytest.raises(ValueError):
        apply_U(Series([1], val=1, step=24, order=48), 2)


def delta(depth):
    return expand_to(EtaQuotient.parse("1:24"), depth)


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_hecke_eigenvalues_of_delta(p):
    D = delta(10 * p)
    image = hecke_T(D, p, ModularFormMeta(12, 1), 10)
    assert image.q_list(10)[1:] == [TAU[p - 1] * t for t in TAU]


def test_hecke_precision_contract():
    D = delta(30)
    with pytest.raises(PrecisionError):
        hecke_T(D, 5, ModularFormMeta(12, 1), 7)
    assert hecke_T(D, 5, ModularFormMeta(12, 1)).q_order == 7


def test_hecke_is_linear_mod_M():
    meta = ModularFormMeta(10, 5760, Character(10, 5760))
    f = Series.q([i * i % 25 for i in range(700)], ring=MOD(25))
    g = Series.q([(3 * i + 1) % 25 for i in range(700)], ring=MOD(25))
    lhs = hecke_T(add(f, scale(g, 7)), 13, meta, 50)
    rhs = add(hecke_T(f, 13, meta, 50), scale(hecke_T(g, 13, meta, 50), 7))
    assert lhs == rhs
