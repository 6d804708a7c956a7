"""Eta products, the k-regular partition generating function, and a DP oracle."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .series import DENOM, EXACT, PrecisionError, Ring, Series, _cdiv, div, mul, power


def pentagonal(limit: int):
    """Yield ``(g, sign)`` for generalized pentagonal numbers ``g < limit``.

    ``g = j(3j-1)/2`` for ``j = 0, 1, -1, 2, -2, ...`` with ``sign = (-1)^j``.
    """
    if limit <= 0:
        return
    yield 0, 1
    j = 1
    while True:
        sign = -1 if j % 2 else 1
        g1 = j * (3 * j - 1) // 2
        if g1 >= limit:
            return
        yield g1, sign
        g2 = j * (3 * j + 1) // 2
        if g2 < limit:
            yield g2, sign
        j += 1


def _euler_product(scale: int, count: int, ring: Ring) -> np.ndarray:
    """Dense ``prod (1 - x^(scale*n))`` in powers of ``x``, first ``count`` terms."""
    arr = np.zeros(count, dtype=ring.dtype)
    for g, sign in pentagonal(_cdiv(count, scale)):
        if scale * g < count:
            arr[scale * g] = sign
    if ring.modulus is not None:
        arr %= ring.modulus
    return arr


def eta_expand(A: int, prec: int, ring: Ring = EXACT) -> Series:
    """``eta(A z) = q^(A/24) prod (1 - q^(A n))`` known to relative precision ``prec``.

    Nonzero terms sit at lattice exponents ``A*(1 + 24*g)`` for generalized
    pentagonal ``g``; the stored grid has stride ``24*A``.
    """
    if A < 1:
        raise ValueError("eta argument multiplier must be positive")
    if prec < 1:
        raise PrecisionError("precision must be at least 1")
    count = _cdiv(prec, DENOM * A)
    arr = _euler_product(1, count, ring)
    return Series(arr, val=A, step=DENOM * A, order=A + prec, ring=ring)


@dataclass(frozen=True)
class EtaQuotient:
    """``prod eta(A_i z)^(r_i)`` with distinct positive ``A_i`` and nonzero ``r_i``."""

    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        seen = set()
        for A, r in self.factors:
            if A < 1 or r == 0 or A in seen:
                raise ValueError(f"invalid eta factor ({A}, {r})")
            seen.add(A)

    @classmethod
    def of(cls, *pairs: tuple[int, int]) -> "EtaQuotient":
        """Build from ``(A, r)`` pairs, merging repeated arguments."""
        merged: dict[int, int] = {}
        for A, r in pairs:
            merged[A] = merged.get(A, 0) + r
        return cls(tuple(sorted((A, r) for A, r in merged.items() if r)))

    @classmethod
    def parse(cls, text: str) -> "EtaQuotient":
        """Parse ``"A1:r1,A2:r2,..."``."""
        pairs = []
        for part in text.split(","):
            part = part.strip()
            if not part:
                continue
            try:
                a, r = part.split(":")
                pairs.append((int(a), int(r)))
            except ValueError:
                raise ValueError(f"bad eta factor {part!r}; expected A:r") from None
        if not pairs:
            raise ValueError("empty eta quotient")
        return cls.of(*pairs)

    @property
    def valuation(self) -> int:
        """Lattice valuation ``sum A_i r_i``."""
        return sum(A * r for A, r in self.factors)

    def __str__(self) -> str:
        return ",".join(f"{A}:{r}" for A, r in self.factors)


def expand_quotient(E: EtaQuotient, prec: int, ring: Ring = EXACT) -> Series:
    """Expansion of ``E`` with relative precision ``prec`` lattice units."""
    if prec < 1:
        raise PrecisionError("requested window is empty")
    num = None
    den = None
    for A, r in E.factors:
        piece = power(eta_expand(A, prec, ring), abs(r))
        if r > 0:
            num = piece if num is None else mul(num, piece)
        else:
            den = piece if den is None else mul(den, piece)
    if num is None:
        num = Series.one(prec, ring)
    out = num if den is None else div(num, den)
    assert out.val == E.valuation, "valuation bookkeeping drifted"
    return out


def expand_to(E: EtaQuotient, q_depth: int, ring: Ring = EXACT) -> Series:
    """Expansion of ``E`` with every exponent up to ``q^q_depth`` known."""
    order = DENOM * (q_depth + 1)
    prec = order - E.valuation
    if prec < 1:
        return Series.zero(order, ring)
    return expand_quotient(E, prec, ring)


def bk_series(k: int, N: int, ring: Ring = EXACT) -> Series:
    """``sum b_k(n) q^n`` for ``0 <= n <= N`` as ``prod (1-q^(kn)) / prod (1-q^n)``."""
    if k < 2:
        raise ValueError("k must be at least 2")
    if N < 0:
        raise ValueError("N must be nonnegative")
    count = N + 1
    num = Series.q(_euler_product(k, count, ring), count, ring)
    den = Series.q(_euler_product(1, count, ring), count, ring)
    return div(num, den)


@dataclass(frozen=True)
class PartitionTable:
    k: int
    values: tuple[int, ...]

    def __getitem__(self, n: int) -> int:
        return self.values[n]

    def __len__(self) -> int:
        return len(self.values)


def bk_table(k: int, N: int) -> PartitionTable:
    return PartitionTable(k, tuple(bk_series(k, N).q_list(N)))


def bk_oracle_table(k: int, n: int, modulus: int | None = None) -> np.ndarray:
    """``b_k(0..n)`` by counting partitions into parts not divisible by ``k``.

    Coin-change dynamic programming: for each admissible part ``p`` the update
    ``dp[s] += dp[s-p]`` (ascending ``s``) is applied, vectorized either as a
    cumulative sum over rows of length ``p`` or as length-``p`` slices.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    size = n + 1
    exact = modulus is None or modulus >= 2**31
    dp = np.zeros(size, dtype=object if exact else np.int64)
    dp[0] = 1
    bound = 1
    for p in range(1, size):
        if p % k == 0:
            continue
        growth = n // p + 1
        if not exact and bound * growth >= 2**62:
            dp %= modulus
            bound = modulus
        if p * p <= n:
            rows = _cdiv(size, p)
            buf = np.zeros(rows * p, dtype=dp.dtype)
            buf[:size] = dp
            dp = np.cumsum(buf.reshape(rows, p), axis=0).ravel()[:size]
        else:
            for s in range(p, size, p):
                e = min(s + p, size)
                dp[s:e] += dp[s - p:e - p]
        bound *= growth
    if modulus is not None:
        dp %= modulus
    return dp


def bk_oracle(k: int, n: int) -> int:
    """``b_k(n)``, computed independently of the series engine."""
    if n < 0:
        return 0
    return int(bk_oracle_table(k, n)[n])
