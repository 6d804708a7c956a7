import numpy as np
import pytest

from regulus.eta import bk_oracle_table
from regulus.search import (AnnihilationHit, CensusResult, DepthInfeasible, admissible_primes,
                            annihilation_search, build_theorem14_candidates, census,
                            direct_verify, find_progressions, hecke_report, key_step_check,
                            progression_from_L, scan_progressions, serre_multiplicativity_probe,
                            serre_probe_form)
from regulus.series import MOD, PrecisionError
from regulus.theorems import construct_f_km

# Found by a scan at depth 300 and frozen; every entry is re-checked below.
HITS_2_5 = [61, 71, 73, 83, 97]


def test_admissible_primes():
    assert admissible_primes(2, 5, 0, 2, 30) == [7, 11, 13, 17, 19, 23, 29]
    assert admissible_primes(2, 5, 0, 20, 10) == []
    res = admissible_primes(2, 5, 0, 2, 30000, require_residue=True)
    assert res and all(l % 5760 == 5759 for l in res)


def test_empty_range_gives_no_hits():
    assert annihilation_search(2, 5, 0, (90, 88), 100) == []


@pytest.fixture(scope="module")
def hits():
    return annihilation_search(2, 5, 0, (5, 100), 300)


def test_hits_for_2_5(hits):
    assert [h.l for h in hits] == HITS_2_5
    assert all(h.modulus == 5 and not h.proof_grade and h.sturm_bound == 11520 for h in hits)


def test_hits_survive_deeper_recheck(hits):
    for h in hits:
        assert hecke_report(2, 5, 0, h.l, h.depth_checked + 100).passed


def test_non_hit_is_reported_with_its_failure():
    rep = hecke_report(2, 5, 0, 7, 200)
    assert not rep.passed and rep.first_failure is not None


def test_key_step_reproduced_by_oracle(hits):
    for h in hits:
        ok, points, bad = key_step_check(h, 2000)
        assert ok and bad is None and points > 50


def test_key_step_detects_a_fake_hit():
    fake = AnnihilationHit(2, 5, 0, 7, 5, False, 0, False, 11520)
    ok, _, bad = key_step_check(fake, 500)
    assert not ok and bad is not None


def test_annihilating_prime_kills_coefficients():
    a = construct_f_km(2, 5, 61 * 60, MOD(5)).series.q_array(61 * 60)
    assert all(a[61 * n] == 0 for n in range(1, 60) if n % 61)


def test_trivial_class_every_prime_annihilates():
    got = [h.l for h in annihilation_search(5, 5, 0, (5, 40), 100)]
    assert got == admissible_primes(5, 5, 0, 5, 40)


def test_search_is_independent_of_thread_count():
    one = annihilation_search(3, 5, 0, (5, 120), 200, threads=1)
    many = annihilation_search(3, 5, 0, (5, 120), 200, threads=4)
    assert one == many and [h.l for h in one] == [61, 79, 97]


def test_depth_ceiling_enforced():
    with pytest.raises(DepthInfeasible):
        annihilation_search(2, 5, 0, (5, 100), 2000, ceiling=10_000)


def test_progression_arithmetic():
    assert progression_from_L(5, 5, 7) == (245, 239, 239)
    A, B, raw = progression_from_L(2, 7, 37)
    assert (A, B) == (9583, 3054) and raw % A == B
    with pytest.raises(ValueError):
        progression_from_L(2, 5, 2)


def _hit(p, e, l, k=2):
    return AnnihilationHit(k, p, e - 1, l, p ** e, False, 100, False, 0)


def test_candidates_prime_modulus():
    cands = build_theorem14_candidates(5, 5, {5: [_hit(5, 1, 7, 5), _hit(5, 1, 11, 5)]})
    assert [(c.L, c.A, c.B) for c in cands] == [(7, 245, 239), (11, 605, 559)]


def test_candidates_composite_modulus():
    hits = {5: [_hit(5, 1, 61), _hit(5, 1, 71)], 7: [_hit(7, 1, 37), _hit(7, 1, 61)]}
    cands = build_theorem14_candidates(2, 35, hits)
    assert [c.primes for c in cands] == [(61, 37)]
    assert cands[0].P_M == 35 and cands[0].A == 35 * (61 * 37) ** 2


def test_candidates_need_the_full_prime_power():
    with pytest.raises(ValueError):
        build_theorem14_candidates(2, 25, {5: [_hit(5, 1, 61)]})
    with pytest.raises(ValueError):
        build_theorem14_candidates(2, 35, {5: [_hit(5, 1, 61)]})
    with pytest.raises(ValueError):
        build_theorem14_candidates(2, 6, {})


def test_direct_verify_passes_known_congruence():
    pc = direct_verify(5, 5, 4, 5, 2000)
    assert pc.passed and pc.verified_to == 2000 and pc.oracle_points >= 20


def test_direct_verify_names_counterexample():
    pc = direct_verify(5, 5, 3, 5, 100)
    table = bk_oracle_table(5, 600, 5)
    first = next(n for n in range(101) if table[5 * n + 3])
    assert not pc.passed and pc.first_failure[0] == first


def test_direct_verify_edge_cases():
    assert direct_verify(2, 3, 1, 1, 10).passed
    with pytest.raises(DepthInfeasible):
        direct_verify(2, 1000, 1, 5, 2000, ceiling=10_000)
    with pytest.raises(ValueError):
        direct_verify(2, 5, 7, 5, 10)


def test_scan_finds_ramanujan_class():
    assert scan_progressions(5, 5, 12, 3000) == [(5, 4)]
    assert scan_progressions(2, 5, 12, 3000) == []


def test_find_progressions_end_to_end():
    verified, rejected, skipped, hits = find_progressions(5, 5, (5, 12), 100, 300)
    assert [(pc.A, pc.B) for pc in verified] == [(245, 239), (605, 559)]
    assert not rejected and not skipped
    assert all(pc.provenance["source"] == "hecke" for pc in verified)


def test_find_progressions_without_hits_reports_nothing():
    verified, rejected, skipped, hits = find_progressions(2, 35, (5, 40), 200, 100)
    assert verified == rejected == skipped == [] and hits[5] == []


def test_census_conservation_and_growth():
    small, big = census(2, 5, 5000), census(2, 5, 10000)
    assert sum(small.counts.values()) == 5000
    assert all(big.counts[r] >= small.counts[r] for r in range(5))
    assert big.counts[0] > 0


def test_census_witness():
    c = census(2, 25, 2000)
    assert c.witness["n0"] == 1 and c.witness["e"] % 5
    # b_5(5n+4) == 0 mod 5, so the required class has no unit value
    assert census(5, 5, 3000).witness["n0"] is None
    assert census(2, 6, 100).witness is None


def test_census_rejects_bad_arguments():
    with pytest.raises(ValueError):
        census(2, 1, 10)
    with pytest.raises(ValueError):
        CensusResult(2, 5, 3, {0: 1})


def test_serre_probe():
    assert serre_probe_form(2, 5, 0, 241, 1, 5, 150).passed
    assert not serre_probe_form(2, 5, 0, 7, 1, 5, 150).passed
    assert serre_probe_form(2, 5, 0, 7, 0, 5, 150).passed
    f = construct_f_km(2, 5, 100, MOD(5)).series
    with pytest.raises(PrecisionError):
        serre_multiplicativity_probe(f, 7, 1, 5, 50)
