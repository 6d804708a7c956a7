"""Construction of F_{k,m}, f_{k,m}, f_{k,m,j} and verification of their identities.

All depths are in integer powers of q and inclusive: ``depth=D`` means the
coefficients of ``q^0 .. q^D`` are computed and compared.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np
from sympy import factorint, isprime

from .digest import window_digest
from .eta import EtaQuotient, bk_series, eta_expand, expand_quotient, expand_to
from .operators import Character, ModularFormMeta, apply_U, apply_V
from .series import DENOM, EXACT, MOD, Ring, Series, div, mul, truncate


class StatementId(str, enum.Enum):
    IDENTITY_3_1 = "IDENTITY_3_1"
    PROP_FKMJ_CONG = "PROP_FKMJ_CONG"
    PROP_J0_CONG = "PROP_J0_CONG"
    LEMMA_3_2 = "LEMMA_3_2"
    UV_COMMUTE = "UV_COMMUTE"
    HECKE_ANNIHILATION = "HECKE_ANNIHILATION"
    PROGRESSION = "PROGRESSION"
    SERRE_PROBE = "SERRE_PROBE"


@dataclass(frozen=True)
class VerificationReport:
    statement_id: StatementId
    params: dict[str, int]
    depth_checked: int
    passed: bool
    sturm_bound: int | None = None
    proof_grade: bool = False
    # (q-exponent, expected, got) at the first disagreement
    first_failure: tuple[Fraction, int, int] | None = None
    digest: str = ""
    ring: str = "exact"

    def __post_init__(self):
        if self.proof_grade and (not self.passed or self.sturm_bound is None):
            raise ValueError("proof-grade report must pass and carry a Sturm bound")
        if (self.first_failure is None) != self.passed:
            raise ValueError("first_failure must be present exactly when the check failed")


@dataclass(frozen=True)
class Form:
    """A q-expansion together with the space data it is claimed to belong to."""

    series: Series
    meta: ModularFormMeta
    name: str = ""


def check_km(k: int, m: int) -> None:
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    if m < 5 or not isprime(m):
        raise ValueError(f"m must be a prime >= 5, got {m}")


def level_km(k: int, m: int) -> int:
    return 576 * k * m


def meta_f_km(k: int, m: int) -> ModularFormMeta:
    N = level_km(k, m)
    return ModularFormMeta(Fraction(m * m - m, 2), N, Character(k * m, N))


def meta_f_kmj(k: int, m: int, j: int) -> ModularFormMeta:
    N = level_km(k, m)
    return ModularFormMeta(Fraction(m ** (j + 1) - m ** j, 2), N, Character(k * m, N))


def sturm_bound(meta: ModularFormMeta) -> int:
    """``floor(w N / 12 * prod_{p | N} (1 + 1/p))``, compared inclusively."""
    w = meta.integral_weight
    N = meta.level
    value = Fraction(w * N, 12)
    for p in factorint(N):
        value *= Fraction(p + 1, p)
    return value.numerator // value.denominator


def F_residue(k: int, m: int) -> int:
    """The class ``n mod 24`` supporting F_{k,m}: ``m n == k-1 (mod 24)``."""
    return ((k - 1) * pow(m, -1, 24)) % 24


def construct_F(k: int, m: int, depth: int, ring: Ring = EXACT) -> Series:
    """``sum_{m n == k-1 (24)} b_k((m n - k + 1)/24) q^n`` through ``q^depth``."""
    check_km(k, m)
    top = (m * depth - k + 1) // 24
    b = bk_series(k, max(top, 0), ring).q_array(max(top, 0))
    coeffs = np.zeros(depth + 1, dtype=ring.dtype)
    ns = np.arange(F_residue(k, m), depth + 1, 24)
    xs = (m * ns - k + 1) // 24
    keep = xs >= 0
    coeffs[ns[keep]] = b[xs[keep]]
    return Series.q(coeffs, depth + 1, ring)


def _identity_inner(k: int, m: int) -> EtaQuotient:
    # eta(24k z) eta^m(24m z) / eta(24 z)
    return EtaQuotient.of((24 * k, 1), (24 * m, m), (24, -1))


def construct_f_km(k: int, m: int, depth: int, ring: Ring = EXACT) -> Form:
    """``{eta(24kz) eta^(m^2-1)(24z)} | U(m) / eta^m(24z)`` through ``q^depth``."""
    check_km(k, m)
    inner = expand_to(EtaQuotient.of((24 * k, 1), (24, m * m - 1)), m * (depth + 1 + m), ring)
    u = apply_U(inner, m)
    den = expand_to(EtaQuotient.of((24, m)), depth + 2 * m + 1, ring)
    f = truncate(div(u, den), DENOM * (depth + 1))
    return Form(f, meta_f_km(k, m), f"f_{{{k},{m}}}")


def construct_f_kmj(k: int, m: int, j: int, depth: int, ring: Ring = EXACT) -> Form:
    """``{eta(24kz) eta^m(24mz)/eta(24z)} | U(m) * eta^(m^(j+1)-m)(24z) / eta^(m^j)(24mz)``."""
    check_km(k, m)
    if j < 1:
        raise ValueError("j must be positive")
    u = apply_U(expand_to(_identity_inner(k, m), m * (depth + 1 + m), ring), m)
    tail_eta = EtaQuotient.of((24, m ** (j + 1) - m), (24 * m, -(m ** j)))
    tail = expand_to(tail_eta, depth, ring)
    f = truncate(mul(u, tail), DENOM * (depth + 1))
    return Form(f, meta_f_kmj(k, m, j), f"f_{{{k},{m},{j}}}")


def construct_form(k: int, m: int, j: int, depth: int, ring: Ring = EXACT) -> Form:
    """f_{k,m} for ``j == 0`` (congruent to F mod m), else f_{k,m,j} (mod m^(j+1))."""
    if j == 0:
        return construct_f_km(k, m, depth, ring)
    return construct_f_kmj(k, m, j, depth, ring)


def _first_mismatch(got: np.ndarray, expected: np.ndarray) -> int | None:
    bad = np.flatnonzero(got != expected)
    return int(bad[0]) if len(bad) else None


def _ring_values(values: np.ndarray, modulus: int | None) -> np.ndarray:
    return values % modulus if modulus is not None else values


def identity_sides(k: int, m: int, depth: int, ring: Ring = EXACT) -> tuple[Series, Series]:
    """Both sides of ``{eta(24kz) eta^m(24mz)/eta(24z)} | U(m) = F_{k,m} eta^m(24z)``."""
    check_km(k, m)
    lhs = apply_U(expand_to(_identity_inner(k, m), m * (depth + 1), ring), m)
    rhs = mul(construct_F(k, m, depth, ring), expand_to(EtaQuotient.of((24, m)), depth, ring))
    order = DENOM * (depth + 1)
    return truncate(lhs, order), truncate(rhs, order)


def verify_identity_3_1(k: int, m: int, depth: int = 2000, ring: Ring = EXACT) -> VerificationReport:
    lhs, rhs = identity_sides(k, m, depth, ring)
    got, expected = lhs.q_array(depth), rhs.q_array(depth)
    bad = _first_mismatch(got, expected)
    failure = None if bad is None else (Fraction(bad), int(expected[bad]), int(got[bad]))
    digest = window_digest(f"IDENTITY_3_1 k={k} m={m} q^0..q^{depth} {ring}", got)
    return VerificationReport(StatementId.IDENTITY_3_1, {"k": k, "m": m}, depth,
                              bad is None, first_failure=failure, digest=digest, ring=str(ring))


def lemma_quotient(n1: int, n2: int, i: int) -> EtaQuotient:
    return EtaQuotient.of((n1, n2 ** i), (n1 * n2, -(n2 ** (i - 1))))


def verify_lemma_3_2(n1: int, n2: int, i: int, depth: int = 300) -> VerificationReport:
    """``eta^(n2^i)(n1 z) / eta^(n2^(i-1))(n1 n2 z) == 1 (mod n2^i)`` through ``q^depth``."""
    if n1 < 1 or n2 < 2 or i < 1:
        raise ValueError("need n1 >= 1, n2 >= 2, i >= 1")
    M = n2 ** i
    E = lemma_quotient(n1, n2, i)
    order = DENOM * (depth + 1)
    s = expand_quotient(E, order - E.valuation, MOD(M))
    extra = {e: c for e, c in s.nonzero_terms().items() if e != 0}
    const = s.coefficient(0)
    failure = None
    if const != 1:
        failure = (Fraction(0), 1, const)
    elif extra:
        e = min(extra)
        failure = (Fraction(e, DENOM), 0, extra[e])
    params = {"n1": n1, "n2": n2, "i": i, "M": M}
    header = f"LEMMA_3_2 n1={n1} n2={n2} i={i} order={s.order} val={s.val} step={s.step}"
    return VerificationReport(StatementId.LEMMA_3_2, params, depth, failure is None,
                              first_failure=failure, digest=window_digest(header, s.coeffs),
                              ring=str(MOD(M)))


def verify_congruence(a: Series, b: Series, M: int, depth: int, sturm: int | None = None, *,
                      statement_id: StatementId = StatementId.PROP_FKMJ_CONG,
                      params: dict[str, int] | None = None) -> VerificationReport:
    """Check ``a == b (mod M)`` on ``q^0 .. q^depth``; ``a`` is the constructed side."""
    for s in (a, b):
        if s.ring.modulus is not None and s.ring.modulus % M:
            raise ValueError(f"series known mod {s.ring.modulus} cannot be compared mod {M}")
    got = _ring_values(a.q_array(depth), M)
    expected = _ring_values(b.q_array(depth), M)
    bad = _first_mismatch(got, expected)
    passed = bad is None
    failure = None if passed else (Fraction(bad), int(expected[bad]), int(got[bad]))
    params = dict(params or {}, M=M)
    header = f"{statement_id.value} {sorted(params.items())} q^0..q^{depth}"
    return VerificationReport(statement_id, params, depth, passed, sturm_bound=sturm,
                              proof_grade=passed and sturm is not None and depth >= sturm,
                              first_failure=failure,
                              digest=window_digest(header, got, expected), ring=str(MOD(M)))


def _construction_ring(ring: Ring | None, M: int) -> Ring:
    if ring is None:
        return MOD(M)
    if ring.modulus is not None and ring.modulus % M:
        raise ValueError(f"ring {ring} cannot certify a congruence mod {M}")
    return ring


def verify_prop_fkmj(k: int, m: int, j: int, depth: int = 1000, ring: Ring | None = None,
                     sturm: bool = False) -> VerificationReport:
    """``f_{k,m,j} == F_{k,m} (mod m^(j+1))``."""
    M = m ** (j + 1)
    r = _construction_ring(ring, M)
    f = construct_f_kmj(k, m, j, depth, r)
    bound = sturm_bound(f.meta) if sturm else None
    return verify_congruence(f.series, construct_F(k, m, depth), M, depth, bound,
                             statement_id=StatementId.PROP_FKMJ_CONG,
                             params={"k": k, "m": m, "j": j})


def verify_prop_j0(k: int, m: int, depth: int = 1000, ring: Ring | None = None,
                   sturm: bool = False) -> VerificationReport:
    """``f_{k,m} == F_{k,m} (mod m)``."""
    r = _construction_ring(ring, m)
    f = construct_f_km(k, m, depth, r)
    bound = sturm_bound(f.meta) if sturm else None
    return verify_congruence(f.series, construct_F(k, m, depth), m, depth, bound,
                             statement_id=StatementId.PROP_J0_CONG, params={"k": k, "m": m})


def random_sparse_series(seed: int, depth: int, terms: int = 12, bound: int = 50) -> Series:
    """Deterministic sparse integer series on ``q^0 .. q^depth``."""
    rng = np.random.default_rng(seed)
    coeffs = [0] * (depth + 1)
    for n in rng.choice(depth + 1, size=min(terms, depth + 1), replace=False):
        coeffs[int(n)] = int(rng.integers(-bound, bound + 1))
    return Series.q(coeffs, depth + 1)


def verify_uv_commutation(f: Series, d1: int, d2: int, params: dict[str, Any] | None = None
                          ) -> VerificationReport:
    """``(f|U(d1))|V(d2) == (f|V(d2))|U(d1)`` on the common window."""
    left = apply_V(apply_U(f, d1), d2)
    right = apply_U(apply_V(f, d2), d1)
    order = min(left.order, right.order)
    depth = (order - 1) // DENOM
    got, expected = left.q_array(depth), right.q_array(depth)
    bad = _first_mismatch(got, expected)
    failure = None if bad is None else (Fraction(bad), int(expected[bad]), int(got[bad]))
    params = dict(params or {}, d1=d1, d2=d2)
    return VerificationReport(StatementId.UV_COMMUTE, params, depth, bad is None,
                              first_failure=failure,
                              digest=window_digest(f"UV_COMMUTE {sorted(params.items())}", got),
                              ring=str(f.ring))
