"""Search for Hecke-annihilating primes, Ramanujan-type progressions, residue census.

Every progression reported here has been re-checked coefficient by
coefficient against b_k itself (:func:`direct_verify`); the Hecke search only
proposes candidates.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from sympy import factorint, isprime, primerange

from .digest import window_digest
from .eta import bk_oracle_table, bk_series
from .operators import hecke_T
from .series import MOD, PrecisionError, Series
from .theorems import (Form, StatementId, VerificationReport, check_km, construct_form,
                       sturm_bound)

log = logging.getLogger(__name__)

DEFAULT_DEPTH_CEILING = 20_000_000
DEFAULT_ORACLE_CEILING = 400_000
_ORACLE_CHEAP = 100_000


class DepthInfeasible(ValueError):
    """The requested computation exceeds the configured depth ceiling."""


@dataclass(frozen=True)
class AnnihilationHit:
    k: int
    m: int
    j: int
    l: int
    modulus: int
    residue_ok: bool
    depth_checked: int
    proof_grade: bool
    sturm_bound: int
    digest: str = ""


@dataclass(frozen=True)
class ProgressionCandidate:
    k: int
    M: int
    A: int
    B: int
    L: int
    P_M: int
    primes: tuple[int, ...]
    residue_ok: bool


@dataclass(frozen=True)
class ProgressionCongruence:
    k: int
    M: int
    A: int
    B: int
    provenance: dict
    verified_to: int
    passed: bool
    first_failure: tuple[int, int] | None = None
    oracle_points: int = 0
    digest: str = ""
    n_max: int | None = None  # requested range; verified_to is where checking stopped

    def __post_init__(self):
        if self.n_max is None:
            object.__setattr__(self, "n_max", self.verified_to)
        if not (0 <= self.B < self.A):
            raise ValueError(f"progression needs 0 <= B < A, got A={self.A}, B={self.B}")

    @property
    def statement(self) -> str:
        return f"b_{self.k}({self.A}n + {self.B}) == 0 (mod {self.M})"


@dataclass(frozen=True)
class CensusResult:
    k: int
    modulus: int
    N: int
    counts: dict[int, int]
    witness: dict | None = None
    digest: str = ""

    def __post_init__(self):
        if sum(self.counts.values()) != self.N:
            raise ValueError("census counts do not cover the range")


def admissible_primes(k: int, m: int, j: int, lo: int, hi: int, require_residue: bool = False) -> list[int]:
    """Primes ``l`` in ``[lo, hi]`` coprime to ``576 k m`` (optionally ``l == -1 mod 576 k m^(j+1)``)."""
    N = 576 * k * m
    res_mod = 576 * k * m ** (j + 1)
    out = []
    for l in primerange(max(lo, 2), hi + 1):
        if N % l == 0:
            continue
        if require_residue and l % res_mod != res_mod - 1:
            continue
        out.append(int(l))
    return out


def _search_form(k: int, m: int, j: int, depth: int, l_max: int, ceiling: int) -> Form:
    need = l_max * depth
    if m * need > ceiling:
        raise DepthInfeasible(
            f"Hecke search needs the form through q^{need} (inner depth {m * need}), "
            f"ceiling is {ceiling}")
    return construct_form(k, m, j, need, MOD(m ** (j + 1)))


def hecke_image(form: Form, l: int, depth: int) -> Series:
    return hecke_T(form.series, l, form.meta, depth)


def annihilation_search(k: int, m: int, j: int, primes: tuple[int, int], depth: int = 2000,
                        require_residue: bool = False, *, threads: int = 1,
                        ceiling: int = DEFAULT_DEPTH_CEILING) -> list[AnnihilationHit]:
    """Primes ``l`` with ``f | T(l) == 0 (mod m^(j+1))`` through ``q^depth``.

    ``j == 0`` uses f_{k,m} (congruent to F_{k,m} mod m); ``j >= 1`` uses
    f_{k,m,j} (mod m^(j+1)).  Results are sorted by ``l``.
    """
    check_km(k, m)
    if j < 0:
        raise ValueError("j must be nonnegative")
    candidates = admissible_primes(k, m, j, primes[0], primes[1], require_residue)
    if not candidates:
        return []
    form = _search_form(k, m, j, depth, max(candidates), ceiling)
    modulus = m ** (j + 1)
    bound = sturm_bound(form.meta)
    res_mod = 576 * k * modulus

    def probe(l: int) -> AnnihilationHit | None:
        img = hecke_image(form, l, depth)
        if not img.is_zero:
            return None
        return AnnihilationHit(k, m, j, l, modulus, l % res_mod == res_mod - 1, depth,
                               depth >= bound, bound,
                               window_digest(f"HECKE k={k} m={m} j={j} l={l} q^0..q^{depth}",
                                             img.q_array(depth)))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(probe, candidates))
    else:
        results = [probe(l) for l in candidates]
    hits = sorted((h for h in results if h is not None), key=lambda h: h.l)
    log.info("k=%d m=%d j=%d: %d/%d primes annihilate", k, m, j, len(hits), len(candidates))
    return hits


def hecke_report(k: int, m: int, j: int, l: int, depth: int, *,
                 ceiling: int = DEFAULT_DEPTH_CEILING) -> VerificationReport:
    """Re-check a single prime as a verification report."""
    check_km(k, m)
    form = _search_form(k, m, j, depth, l, ceiling)
    img = hecke_image(form, l, depth)
    vals = img.q_array(depth)
    bad = np.flatnonzero(vals)
    bound = sturm_bound(form.meta)
    passed = len(bad) == 0
    failure = None if passed else (Fraction(int(bad[0])), 0, int(vals[bad[0]]))
    modulus = m ** (j + 1)
    return VerificationReport(
        StatementId.HECKE_ANNIHILATION, {"k": k, "m": m, "j": j, "l": l, "M": modulus}, depth,
        passed, sturm_bound=bound, proof_grade=passed and depth >= bound, first_failure=failure,
        digest=window_digest(f"HECKE k={k} m={m} j={j} l={l} q^0..q^{depth}", vals),
        ring=str(MOD(modulus)))


def key_step_check(hit: AnnihilationHit, n_max: int, table: np.ndarray | None = None
                   ) -> tuple[bool, int, int | None]:
    """Check ``b_k((m l n - k + 1)/24) == 0 (mod m^(j+1))`` for admissible ``n <= n_max``.

    Uses the dynamic-programming oracle.  Returns ``(ok, points_checked, first_bad_n)``.
    """
    k, m, l = hit.k, hit.m, hit.l
    args = []
    for n in range(1, n_max + 1):
        if math.gcd(n, l) != 1:
            continue
        t = m * l * n - k + 1
        if t >= 0 and t % 24 == 0:
            args.append((n, t // 24))
    if not args:
        return True, 0, None
    top = max(x for _, x in args)
    if table is None or len(table) <= top:
        table = bk_oracle_table(k, top, hit.modulus)
    for n, x in args:
        if int(table[x]) % hit.modulus:
            return False, len(args), n
    return True, len(args), None


def _prime_power_parts(M: int) -> list[tuple[int, int]]:
    if M < 1 or math.gcd(M, 6) != 1:
        raise ValueError(f"M must be a positive integer coprime to 6, got {M}")
    return sorted(factorint(M).items())


def progression_from_L(k: int, P: int, L: int) -> tuple[int, int, int]:
    """``(A, B, B_raw)`` for ``b_k(P L^2 n + P L + (k-1)(P^2 L^2 - 1)/24)``; ``B = B_raw mod A``."""
    num = P * P * L * L - 1
    if num % 24:
        raise ValueError(f"(P^2 L^2 - 1)/24 is not an integer for P={P}, L={L}")
    A = P * L * L
    B_raw = P * L + (k - 1) * (num // 24)
    return A, B_raw % A, B_raw


def build_theorem14_candidates(k: int, M: int, hits_per_prime: dict[int, list[AnnihilationHit]],
                               require_residue: bool = False) -> list[ProgressionCandidate]:
    """Combine one hit per prime factor of ``M`` into squarefree ``L`` and its progression.

    The first ``I-1`` prime factors each contribute their smallest usable
    hit; the last contributes every remaining hit in turn.
    """
    parts = _prime_power_parts(M)
    P = math.prod(p for p, _ in parts)
    for p, e in parts:
        hits = hits_per_prime.get(p, [])
        if not hits:
            raise ValueError(f"no annihilating prime supplied for {p}^{e}")
        for h in hits:
            if h.modulus % p ** e:
                raise ValueError(f"hit l={h.l} is only known mod {h.modulus}, need {p}^{e}")
    chosen: list[int] = []
    for p, _ in parts[:-1]:
        usable = [h.l for h in hits_per_prime[p] if P % h.l and h.l not in chosen]
        if not usable:
            raise ValueError(f"no hit for {p} distinct from the primes already chosen")
        chosen.append(min(usable))
    last = parts[-1][0]
    res_mod = 576 * k * M
    out = []
    for h in hits_per_prime[last]:
        if P % h.l == 0 or h.l in chosen:
            continue
        primes = tuple(chosen + [h.l])
        if len(set(primes)) != len(primes):
            raise ValueError("duplicate primes in L")
        L = math.prod(primes)
        residue_ok = L % res_mod in (1, res_mod - 1)
        if all(x.residue_ok for x in hits_per_prime[last]) and all(
                x.residue_ok for q, _ in parts[:-1] for x in hits_per_prime[q] if x.l in chosen):
            assert residue_ok, f"L={L} built from residue-admissible primes is not +-1 mod {res_mod}"
        if require_residue and not residue_ok:
            continue
        A, B, _ = progression_from_L(k, P, L)
        out.append(ProgressionCandidate(k, M, A, B, L, P, primes, residue_ok))
    return out


def bk_mod(k: int, depth: int, M: int) -> np.ndarray:
    return bk_series(k, depth, MOD(M)).q_array(depth)


def direct_verify(k: int, A: int, B: int, M: int, n_max: int = 2000, *,
                  provenance: dict | None = None, samples: int = 20,
                  ceiling: int = DEFAULT_DEPTH_CEILING,
                  oracle_ceiling: int = DEFAULT_ORACLE_CEILING,
                  values: np.ndarray | None = None,
                  oracle: np.ndarray | None = None) -> ProgressionCongruence:
    """Check ``b_k(A n + B) == 0 (mod M)`` for ``0 <= n <= n_max`` from the series engine.

    Up to ``samples`` of the checked arguments at most ``oracle_ceiling`` are
    recomputed with the dynamic-programming oracle; any disagreement fails the
    check.  ``values`` and ``oracle`` may carry precomputed tables mod ``M``.
    """
    if A < 1 or not 0 <= B < A:
        raise ValueError("need A >= 1 and 0 <= B < A")
    provenance = dict(provenance or {"source": "direct-scan"})
    if M == 1:
        return ProgressionCongruence(k, M, A, B, provenance, n_max, True,
                                     digest=window_digest(f"PROGRESSION k={k} A={A} B={B} M=1"),
                                     n_max=n_max)
    depth = A * n_max + B
    if depth > ceiling:
        raise DepthInfeasible(f"direct verification needs b_{k} through {depth}, ceiling is {ceiling}")
    if values is None or len(values) <= depth:
        values = bk_mod(k, depth, M)
    picked = values[B: depth + 1: A] % M
    bad = np.flatnonzero(picked)
    digest = window_digest(f"PROGRESSION k={k} A={A} B={B} M={M} n=0..{n_max}", picked)
    if len(bad):
        n = int(bad[0])
        return ProgressionCongruence(k, M, A, B, provenance, n - 1, False, (n, int(picked[n])),
                                     digest=digest, n_max=n_max)
    # Spread the samples over as much of the range as the DP can cheaply reach,
    # but always at least ``samples`` points when the ceiling allows it.
    reach = -1
    if oracle_ceiling >= B:
        want = max(samples - 1, (_ORACLE_CHEAP - B) // A)
        reach = min(n_max, (oracle_ceiling - B) // A, want)
    points = []
    if reach >= 0:
        count = min(samples, reach + 1)
        points = sorted({round(i * reach / max(count - 1, 1)) for i in range(count)})
        top = A * points[-1] + B
        if oracle is None or len(oracle) <= top:
            oracle = bk_oracle_table(k, top, M)
        for n in points:
            if int(oracle[A * n + B]) != int(picked[n]):
                log.error("oracle disagrees with series at b_%d(%d)", k, A * n + B)
                return ProgressionCongruence(k, M, A, B, provenance, n - 1, False,
                                             (n, int(oracle[A * n + B])), len(points), digest,
                                             n_max)
    return ProgressionCongruence(k, M, A, B, provenance, n_max, True, None, len(points), digest,
                                 n_max)


def scan_progressions(k: int, M: int, A_max: int, depth: int) -> list[tuple[int, int]]:
    """Pairs ``(A, B)`` with ``b_k(A n + B) == 0 (mod M)`` for all ``A n + B <= depth``.

    Pairs implied by a smaller modulus already found are dropped.
    """
    values = bk_mod(k, depth, M) if M > 1 else np.zeros(depth + 1, dtype=np.int64)
    found: list[tuple[int, int]] = []
    for A in range(1, A_max + 1):
        for B in range(A):
            if any(A % a == 0 and B % a == b for a, b in found):
                continue
            if not np.any(values[B::A] % M):
                found.append((A, B))
    return found


def find_progressions(k: int, M: int, primes: tuple[int, int], depth: int = 2000,
                      n_max: int = 2000, *, threads: int = 1, require_residue: bool = False,
                      ceiling: int = DEFAULT_DEPTH_CEILING,
                      oracle_ceiling: int = DEFAULT_ORACLE_CEILING):
    """Annihilation search for each prime power of ``M``, then verified progressions.

    Returns ``(verified, rejected, skipped, hits)``: only ``verified`` entries
    are sound congruences.
    """
    parts = _prime_power_parts(M)
    hits: dict[int, list[AnnihilationHit]] = {}
    for p, e in parts:
        hits[p] = annihilation_search(k, p, e - 1, primes, depth, require_residue,
                                      threads=threads, ceiling=ceiling)
    if any(not h for h in hits.values()):
        return [], [], [], hits
    candidates = build_theorem14_candidates(k, M, hits, require_residue)
    verified, rejected, skipped = [], [], []
    cache: np.ndarray | None = None
    oracle = None
    for c in sorted(candidates, key=lambda c: (c.A, c.B)):
        prov = {"source": "hecke", "L": c.L, "P_M": c.P_M, "primes": list(c.primes),
                "residue_ok": c.residue_ok}
        need = c.A * n_max + c.B
        if need > ceiling:
            skipped.append(c)
            continue
        if cache is None or len(cache) <= need:
            cache = bk_mod(k, need, M)
        top = min(oracle_ceiling, max(c.A * 19 + c.B, _ORACLE_CHEAP))
        if oracle is None or len(oracle) <= top:
            oracle = bk_oracle_table(k, top, M)
        pc = direct_verify(k, c.A, c.B, M, n_max, provenance=prov, ceiling=ceiling,
                           oracle_ceiling=oracle_ceiling, values=cache, oracle=oracle)
        (verified if pc.passed else rejected).append(pc)
    return verified, rejected, skipped, hits


def census(k: int, modulus: int, N: int) -> CensusResult:
    """Residue counts of ``b_k(n) mod modulus`` for ``0 <= n < N``.

    When ``modulus`` is a power of a prime ``m >= 5`` also report the least
    ``n0 < N`` with ``24 n0 == 1 - k (mod m)`` and ``b_k(n0)`` a unit mod ``m``.
    """
    if modulus < 2 or N < 1:
        raise ValueError("need modulus >= 2 and N >= 1")
    vals = bk_mod(k, N - 1, modulus)
    counts = np.bincount(vals.astype(np.int64), minlength=modulus)
    table = {r: int(c) for r, c in enumerate(counts)}
    witness = None
    fac = factorint(modulus)
    if len(fac) == 1:
        (m, j), = fac.items()
        if m >= 5:
            r = ((1 - k) * pow(24, -1, m)) % m
            cls = np.arange(r, N, m)
            units = cls[vals[cls] % m != 0]
            witness = {"m": int(m), "j": int(j), "residue": int(r), "n0": None}
            if len(units):
                n0 = int(units[0])
                witness.update(n0=n0, e=int(vals[n0]), n=(24 * n0 + k - 1) // m)
    return CensusResult(k, modulus, N, table, witness,
                        window_digest(f"CENSUS k={k} mod={modulus} N={N}", vals))


def serre_multiplicativity_probe(f: Series, l: int, r: int, M: int, depth: int) -> VerificationReport:
    """Test ``a(n l^r) == (r+1) a(n) (mod M)`` for ``1 <= n <= depth`` coprime to ``l``."""
    lr = l ** r
    if lr * depth >= f.q_order:
        raise PrecisionError(f"probe needs the series through q^{lr * depth}")
    a = f.q_array(lr * depth)
    ns = np.array([n for n in range(1, depth + 1) if n % l], dtype=np.int64)
    lhs = np.array([int(a[n * lr]) % M for n in ns], dtype=object)
    rhs = np.array([((r + 1) * int(a[n])) % M for n in ns], dtype=object)
    bad = np.flatnonzero(lhs != rhs)
    failure = None
    if len(bad):
        i = int(bad[0])
        failure = (Fraction(int(ns[i]) * lr), int(rhs[i]), int(lhs[i]))
    return VerificationReport(StatementId.SERRE_PROBE, {"l": l, "r": r, "M": M}, depth,
                              failure is None, first_failure=failure,
                              digest=window_digest(f"SERRE l={l} r={r} M={M}", lhs),
                              ring=str(MOD(M)))


def serre_probe_form(k: int, m: int, j: int, l: int, r: int, M: int, depth: int) -> VerificationReport:
    """:func:`serre_multiplicativity_probe` on f_{k,m} (``j == 0``) or f_{k,m,j}, reduced mod ``M``."""
    check_km(k, m)
    form = construct_form(k, m, j, l ** r * depth, MOD(M))
    rep = serre_multiplicativity_probe(form.series, l, r, M, depth)
    return VerificationReport(rep.statement_id, {"k": k, "m": m, "j": j, **rep.params}, depth,
                              rep.passed, first_failure=rep.first_failure, digest=rep.digest,
                              ring=rep.ring)
