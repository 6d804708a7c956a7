import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regulus.eta import (EtaQuotient, bk_oracle, bk_oracle_table, bk_series, bk_table,
                         eta_expand, expand_quotient, expand_to, pentagonal)
from regulus.series import EXACT, MOD, PrecisionError

# Frozen from brute-force enumeration of partitions (see partitions() below).
B3 = [1, 1, 2, 2, 4, 5, 7, 9, 13, 16, 22, 27, 36, 44, 57, 70]
B5 = [1, 1, 2, 3, 5, 6, 10, 13, 19, 25, 34, 44, 60, 76, 100, 127]
# Partitions of 500 into distinct parts.
Q500 = 732986521245024


def partitions(n, largest=None):
    largest = n if largest is None else largest
    if n == 0:
        yield ()
        return
    for p in range(min(n, largest), 0, -1):
        for rest in partitions(n - p, p):
            yield (p,) + rest


def count_regular(n, k):
    return sum(1 for P in partitions(n) if all(x % k for x in P))


def naive_euler(count):
    poly = np.zeros(count, dtype=object)
    poly[0] = 1
    for n in range(1, count):
        shifted = np.zeros(count, dtype=object)
        shifted[n:] = poly[:count - n]
        poly = poly - shifted
    return poly


def test_pentagonal_prefix():
    got = list(pentagonal(27))
    assert got == [(0, 1), (1, -1), (2, -1), (5, 1), (7, 1), (12, -1), (15, -1),
                   (22, 1), (26, 1)]
    assert list(pentagonal(0)) == []


def test_euler_product_matches_direct_expansion():
    s = eta_expand(1, 24 * 300)
    want = naive_euler(300)
    got = [s.coefficient(1 + 24 * n) for n in range(300)]
    assert got == list(want)


def test_eta_lattice_layout():
    s = eta_expand(5, 24 * 5 * 40)
    assert s.val == 5 and s.step == 24 * 5
    assert s.coefficient(5) == 1 and s.coefficient(5 + 120) == -1


def test_frozen_small_values():
    assert bk_series(3, 15).q_list(15) == B3
    assert bk_series(5, 15).q_list(15) == B5
    assert [count_regular(n, 3) for n in range(16)] == B3


@pytest.mark.parametrize("k", [2, 3, 4, 7])
def test_engine_matches_enumeration(k):
    assert bk_series(k, 18).q_list(18) == [count_regular(n, k) for n in range(19)]


def test_distinct_parts_equal_odd_parts():
    # Euler: partitions into distinct parts are equinumerous with 2-regular partitions.
    for n in range(20):
        distinct = sum(1 for P in partitions(n) if len(set(P)) == len(P))
        assert distinct == bk_series(2, 19).qcoeff(n)
    assert bk_oracle(2, 500) == Q500


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 15), st.integers(0, 400), st.sampled_from([None, 5, 49, 121]))
def test_oracle_table_agrees_with_series(k, n, modulus):
    ring = EXACT if modulus is None else MOD(modulus)
    got = bk_series(k, n, ring).q_array(n)
    want = bk_oracle_table(k, n, modulus)
    assert np.array_equal(got % (modulus or 10**40), want % (modulus or 10**40))


def test_oracle_negative_argument():
    assert bk_oracle(3, -1) == 0


def test_bk_table_indexing():
    t = bk_table(3, 10)
    assert len(t) == 11 and t[10] == 22


def test_quotient_parse_and_merge():
    E = EtaQuotient.parse("24:1, 48:2,24:-3")
    assert E.factors == ((24, -2), (48, 2))
    assert E.valuation == 48
    assert str(E) == "24:-2,48:2"
    assert EtaQuotient.parse(str(E)) == E
    for bad in ["", "24", "x:1", "0:1"]:
        with pytest.raises(ValueError):
            EtaQuotient.parse(bad)


def test_quotient_product_of_distinct_parts():
    # eta(2z)/eta(z) = q^(1/24) prod (1 + q^n)
    s = expand_quotient(EtaQuotient.of((2, 1), (1, -1)), 24 * 30)
    assert s.val == 1
    assert [s.coefficient(1 + 24 * n) for n in range(30)] == bk_series(2, 29).q_list(29)


def test_expand_to_window():
    s = expand_to(EtaQuotient.parse("24:1"), 50)
    assert s.q_order == 51
    with pytest.raises(PrecisionError):
        s.qcoeff(51)
    # eta(24z) = q - q^25 - q^49 + ...
    assert {n: c for n, c in enumerate(s.q_list(50)) if c} == {1: 1, 25: -1, 49: -1}


def test_invalid_arguments():
    with pytest.raises(ValueError):
        bk_series(1, 10)
    with pytest.raises(ValueError):
        eta_expand(0, 10)
    with pytest.raises(PrecisionError):
        eta_expand(1, 0)
