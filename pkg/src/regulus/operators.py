"""U(d), V(d), Hecke T_p on q-expansions, and Kronecker-symbol characters."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .series import DENOM, PrecisionError, Series, _cdiv, _make, add, scale, truncate


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol ``(a/n)``."""
    if n == 0:
        return 1 if a in (1, -1) else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -1
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 and a % 8 in (3, 5):
            result = -result
    # Jacobi symbol (a/n) for odd positive n
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


@dataclass(frozen=True)
class Character:
    """The character ``n -> (d/n)`` on integers coprime to ``modulus``, zero elsewhere."""

    d: int
    modulus: int = 1

    def __post_init__(self):
        if self.d == 0:
            raise ValueError("Kronecker character needs d != 0")
        if self.modulus < 1:
            raise ValueError("modulus must be positive")

    def __call__(self, n: int) -> int:
        if math.gcd(n, self.modulus) != 1:
            return 0
        return kronecker(self.d, n)

    def __str__(self) -> str:
        return f"({self.d}/.)"


TRIVIAL = Character(1)


@dataclass(frozen=True)
class ModularFormMeta:
    weight: Fraction
    level: int
    character: Character = field(default=TRIVIAL)

    def __post_init__(self):
        object.__setattr__(self, "weight", Fraction(self.weight))
        if self.weight <= 0:
            raise ValueError("weight must be positive")
        if self.level < 1:
            raise ValueError("level must be positive")

    @property
    def integral_weight(self) -> int:
        if self.weight.denominator != 1:
            raise ValueError(f"weight {self.weight} is not an integer")
        return int(self.weight)


def _require_integral(f: Series) -> None:
    if not f.is_integral:
        raise ValueError("operator needs a series supported on integer powers of q")


def apply_U(f: Series, d: int) -> Series:
    """``sum a(n) q^n -> sum a(d n) q^n``."""
    if d < 1:
        raise ValueError("d must be positive")
    _require_integral(f)
    q_known = f.q_order
    order = DENOM * _cdiv(q_known, d)
    if f.is_zero:
        return Series.zero(order, f.ring)
    v, s = f.val // DENOM, f.step // DENOM
    if s == 0:
        if v % d:
            return Series.zero(order, f.ring)
        return _make(f.ring, DENOM * (v // d), 1, f.coeffs.copy(), order)
    # indices i with v + s*i == 0 (mod d)
    g = math.gcd(s, d)
    if v % g:
        return Series.zero(order, f.ring)
    period = d // g
    i0 = (-(v // g) * pow(s // g, -1, period)) % period if period > 1 else 0
    picked = f.coeffs[i0::period]
    if len(picked) == 0:
        return Series.zero(order, f.ring)
    new_val = (v + s * i0) // d
    return _make(f.ring, DENOM * new_val, DENOM * (s // g), picked.copy(), order)


def apply_V(f: Series, d: int) -> Series:
    """``sum a(n) q^n -> sum a(n) q^(d n)``."""
    if d < 1:
        raise ValueError("d must be positive")
    if f.is_zero:
        return Series.zero(f.order * d, f.ring)
    return _make(f.ring, f.val * d, (f.step or 1) * d, f.coeffs.copy(), f.order * d)


def hecke_T(f: Series, p: int, meta: ModularFormMeta, depth: int | None = None) -> Series:
    """Image of ``f`` under the weight-``meta.weight`` Hecke operator ``T_p``.

    The output coefficient of ``q^n`` is ``a(pn) + chi(p) p^(w-1) a(n/p)``.
    ``f`` must be known through ``q^(p*depth)``; by default the largest
    depth the input supports is used.
    """
    w = meta.integral_weight
    _require_integral(f)
    if depth is None:
        depth = (f.q_order - 1) // p
    if depth < 0 or p * depth >= f.q_order:
        raise PrecisionError(
            f"T_{p} to depth {depth} needs the input through q^{p * max(depth, 0)}, "
            f"only q^{f.q_order - 1} is known")
    order = DENOM * (depth + 1)
    up = truncate(apply_U(f, p), order)
    c = meta.character(p) * p ** (w - 1)
    if c == 0:
        return up
    return add(up, scale(truncate(apply_V(f, p), order), c))
