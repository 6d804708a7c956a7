"""Truncated q-series on the 1/24 exponent lattice.

A :class:`Series` stores the coefficients of ``q**(e/24)`` for lattice
exponents ``e = val + step*i``.  Everything in this package is built from
eta products ``eta(A z)`` whose expansions live on such arithmetic grids, so
keeping the stride explicit lets a dense array hold only the grid points that
can carry a nonzero coefficient.

Coefficients are either exact integers or residues modulo ``M``.  Products
use Kronecker substitution: both operands are packed into a single big
integer, multiplied once (with GMP when available) and unpacked.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

try:
    import gmpy2
except ImportError:  # pragma: no cover - gmpy2 ships with the base image
    gmpy2 = None

DENOM = 24

# Below this many coefficient products a direct convolution beats packing.
_DIRECT_LIMIT = 4096
# Sparse divisors with nnz * length under this use back-substitution.
_SPARSE_DIV_LIMIT = 200_000
_INT64_MODULUS_LIMIT = 2**31


class PrecisionError(ValueError):
    """A coefficient or operation needs more precision than is available."""


class RingError(ValueError):
    """Operands live in different coefficient rings."""


@dataclass(frozen=True)
class Ring:
    """Coefficient ring: exact integers (``modulus is None``) or Z/MZ."""

    modulus: int | None = None

    def __post_init__(self):
        if self.modulus is not None and self.modulus < 2:
            raise ValueError(f"modulus must be >= 2, got {self.modulus}")

    @property
    def is_exact(self) -> bool:
        return self.modulus is None

    @property
    def dtype(self):
        if self.modulus is not None and self.modulus < _INT64_MODULUS_LIMIT:
            return np.int64
        return object

    def __str__(self) -> str:
        return "exact" if self.modulus is None else f"mod:{self.modulus}"

    @classmethod
    def parse(cls, text: str) -> "Ring":
        text = text.strip().lower()
        if text == "exact":
            return cls()
        if text.startswith("mod:"):
            return cls(int(text[4:]))
        raise ValueError(f"unknown ring {text!r}; expected 'exact' or 'mod:M'")


EXACT = Ring()


def MOD(modulus: int) -> Ring:
    return Ring(int(modulus))


def _cdiv(a: int, b: int) -> int:
    return -(-a // b)


def _as_array(values, ring: Ring) -> np.ndarray:
    mod = ring.modulus
    if ring.dtype is object:
        arr = np.empty(len(values), dtype=object)
        arr[:] = [int(v) for v in values]
        return arr % mod if mod is not None else arr
    if isinstance(values, np.ndarray):
        if values.dtype == object:
            return (values % mod).astype(np.int64)
        return values.astype(np.int64) % mod
    return np.array([int(v) % mod for v in values], dtype=np.int64)


class Series:
    """Immutable truncated series ``sum c_i q^((val + step*i)/24) + O(q^(order/24))``.

    Construct with :meth:`Series.q` for ordinary integer-exponent series or
    with the lattice-level constructor.  After construction the valuation is
    tight (``coeffs[0] != 0``) and ``step`` is the largest stride compatible
    with the nonzero coefficients; a series with a single nonzero term has
    ``step == 0`` and the zero series has ``val == order``.
    """

    __slots__ = ("val", "step", "coeffs", "order", "ring")

    def __init__(self, coeffs: Iterable[int], val: int = 0, step: int = 1,
                 order: int | None = None, ring: Ring = EXACT):
        coeffs = list(coeffs) if not isinstance(coeffs, np.ndarray) else coeffs
        if step < 1:
            raise ValueError("step must be positive")
        if order is None:
            order = val + step * len(coeffs)
        self._assign(ring, val, step, _as_array(coeffs, ring), order)

    @classmethod
    def q(cls, coeffs: Iterable[int], prec: int | None = None, ring: Ring = EXACT) -> "Series":
        """Series with ``coeffs[n]`` the coefficient of ``q^n`` known for ``n < prec``."""
        if not isinstance(coeffs, np.ndarray):
            coeffs = list(coeffs)
        if prec is None:
            prec = len(coeffs)
        return cls(coeffs[:prec], val=0, step=DENOM, order=DENOM * prec, ring=ring)

    @classmethod
    def from_terms(cls, terms: Mapping[int, int], order: int, ring: Ring = EXACT) -> "Series":
        """Series from a ``{lattice exponent: coefficient}`` map."""
        terms = {e: c for e, c in terms.items() if e < order}
        if not terms:
            return cls.zero(order, ring)
        lo = min(terms)
        arr = [0] * (max(terms) - lo + 1)
        for e, c in terms.items():
            arr[e - lo] = c
        return cls(arr, val=lo, step=1, order=order, ring=ring)

    @classmethod
    def zero(cls, order: int, ring: Ring = EXACT) -> "Series":
        return _make(ring, order, 1, np.zeros(0, dtype=ring.dtype), order)

    @classmethod
    def one(cls, order: int, ring: Ring = EXACT) -> "Series":
        return cls([1], val=0, step=1, order=order, ring=ring)

    def _assign(self, ring, val, step, arr, order):
        val, step, arr, order = _normalize(ring, val, step, arr, order)
        object.__setattr__(self, "ring", ring)
        object.__setattr__(self, "val", val)
        object.__setattr__(self, "step", step)
        object.__setattr__(self, "coeffs", arr)
        object.__setattr__(self, "order", order)
        arr.setflags(write=False)

    def __setattr__(self, name, value):
        raise AttributeError("Series is immutable")

    # -- inspection ---------------------------------------------------------

    @property
    def prec(self) -> int:
        """Length of the known window in lattice units, measured from ``val``."""
        return self.order - self.val

    @property
    def is_zero(self) -> bool:
        return len(self.coeffs) == 0

    @property
    def q_order(self) -> int:
        """Number of leading integer q-exponents ``0 .. q_order-1`` that are known."""
        return _cdiv(self.order, DENOM)

    @property
    def is_integral(self) -> bool:
        """True when every stored exponent is an integer power of q."""
        return self.is_zero or (self.val % DENOM == 0 and self.step % DENOM == 0)

    def exponents(self) -> np.ndarray:
        return self.val + self.step * np.arange(len(self.coeffs), dtype=np.int64)

    def nonzero_terms(self) -> dict[int, int]:
        """``{lattice exponent: coefficient}`` for the nonzero stored terms."""
        out = {}
        for i in np.flatnonzero(self.coeffs != 0):
            out[int(self.val + self.step * i)] = int(self.coeffs[i])
        return out

    def coefficient(self, n: int) -> int:
        """Coefficient of ``q^(n/24)``; exponents at or past ``order`` raise."""
        if n >= self.order:
            raise PrecisionError(f"exponent {n} is outside the known window (order {self.order})")
        if self.is_zero or n < self.val:
            return 0
        off = n - self.val
        if self.step == 0:
            return int(self.coeffs[0]) if off == 0 else 0
        if off % self.step:
            return 0
        return int(self.coeffs[off // self.step])

    def qcoeff(self, n: int) -> int:
        """Coefficient of ``q^n`` for an integer exponent ``n``."""
        return self.coefficient(DENOM * n)

    def q_array(self, depth: int) -> np.ndarray:
        """Dense coefficients of ``q^0 .. q^depth`` (integral support required)."""
        if not self.is_integral:
            raise ValueError("series has non-integral q-exponents")
        if DENOM * depth >= self.order:
            raise PrecisionError(f"q^{depth} is outside the known window (q-order {self.q_order})")
        out = np.zeros(depth + 1, dtype=self.ring.dtype)
        if self.is_zero:
            return out
        qv, qs = self.val // DENOM, self.step // DENOM
        if qs == 0:
            if 0 <= qv <= depth:
                out[qv] = self.coeffs[0]
            return out
        idx = qv + qs * np.arange(len(self.coeffs), dtype=np.int64)
        keep = (idx >= 0) & (idx <= depth)
        out[idx[keep]] = self.coeffs[keep]
        return out

    def q_list(self, depth: int) -> list[int]:
        return [int(c) for c in self.q_array(depth)]

    def __repr__(self) -> str:
        if self.is_zero:
            return f"Series(0 + O(q^{Fraction(self.order, DENOM)}), {self.ring})"
        terms = []
        for e, c in list(self.nonzero_terms().items())[:6]:
            terms.append(f"{c}*q^{Fraction(e, DENOM)}")
        more = " + ..." if np.count_nonzero(self.coeffs) > 6 else ""
        return f"Series({' + '.join(terms)}{more} + O(q^{Fraction(self.order, DENOM)}), {self.ring})"

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        return add(self, _coerce(other, self))

    __radd__ = __add__

    def __neg__(self):
        return scale(self, -1)

    def __sub__(self, other):
        return add(self, -_coerce(other, self))

    def __rsub__(self, other):
        return add(_coerce(other, self), -self)

    def __mul__(self, other):
        if isinstance(other, (int, np.integer)):
            return scale(self, int(other))
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __pow__(self, e: int):
        return power(self, e)

    def __eq__(self, other):
        """Equality on the common window of known coefficients."""
        if not isinstance(other, Series):
            return NotImplemented
        if self.ring != other.ring:
            return False
        order = min(self.order, other.order)
        a, b = truncate(self, order), truncate(other, order)
        if a.is_zero or b.is_zero:
            return a.is_zero and b.is_zero
        return (a.val == b.val and a.step == b.step
                and len(a.coeffs) == len(b.coeffs)
                and bool(np.all(a.coeffs == b.coeffs)))

    __hash__ = None

    def _dense(self, start: int, s: int, n: int) -> np.ndarray:
        """Coefficients at exponents ``start + s*i`` for ``i < n``."""
        out = np.zeros(max(n, 0), dtype=self.ring.dtype)
        if self.is_zero or n <= 0:
            return out
        off, rem = divmod(self.val - start, s)
        if rem or off < 0 or (self.step % s):
            raise ValueError("grid is not a refinement of the series support")
        r = self.step // s
        if r == 0:
            if off < n:
                out[off] = self.coeffs[0]
            return out
        count = min(len(self.coeffs), _cdiv(n - off, r)) if off < n else 0
        if count > 0:
            out[off: off + r * count: r] = self.coeffs[:count]
        return out


def _coerce(value, like: Series) -> Series:
    if isinstance(value, Series):
        return value
    if isinstance(value, (int, np.integer)):
        return Series([int(value)], val=0, order=like.order, ring=like.ring)
    raise TypeError(f"cannot combine Series with {type(value).__name__}")


def _normalize(ring: Ring, val: int, step: int, arr: np.ndarray, order: int):
    if step > 0:
        n_keep = max(0, _cdiv(order - val, step))
        arr = arr[:n_keep]
    nz = np.flatnonzero(arr != 0)
    if len(nz) == 0:
        return order, 0, np.zeros(0, dtype=ring.dtype), order
    first = int(nz[0])
    g = int(np.gcd.reduce(nz - first)) if len(nz) > 1 else 0
    new_val = val + step * first
    if g == 0:
        return new_val, 0, np.array(arr[first:first + 1], dtype=ring.dtype), order
    new_step = step * g
    coeffs = np.array(arr[first::g], dtype=ring.dtype)
    coeffs = coeffs[:_cdiv(order - new_val, new_step)]
    return new_val, new_step, coeffs, order


def _make(ring: Ring, val: int, step: int, arr: np.ndarray, order: int) -> Series:
    s = Series.__new__(Series)
    if ring.modulus is not None:
        arr = arr % ring.modulus
    s._assign(ring, val, step, arr, order)
    return s


def _check_ring(a: Series, b: Series) -> Ring:
    if a.ring != b.ring:
        raise RingError(f"ring mismatch: {a.ring} vs {b.ring}")
    return a.ring


# -- convolution kernels -------------------------------------------------------

def _bigmul(x: int, y: int) -> int:
    if gmpy2 is None:
        return x * y
    if x is y:
        return int(gmpy2.mpz(x) ** 2)
    return int(gmpy2.mpz(x) * gmpy2.mpz(y))


def _pack_small(arr: np.ndarray, wb: int):
    """Pack nonnegative machine integers into one ``wb``-byte-per-slot big integer."""
    src = np.ascontiguousarray(arr, dtype="<u8").view(np.uint8).reshape(len(arr), 8)
    if wb <= 8:
        buf = np.ascontiguousarray(src[:, :wb])
    else:
        buf = np.zeros((len(arr), wb), dtype=np.uint8)
        buf[:, :8] = src
    data = memoryview(buf).cast("B")
    if gmpy2 is None:
        return int.from_bytes(data, "little")
    return gmpy2.mpz.from_bytes(data, "little")


def _pack_signed(values: list[int], wb: int) -> int:
    pos = b"".join((v if v > 0 else 0).to_bytes(wb, "little") for v in values)
    x = int.from_bytes(pos, "little")
    if any(v < 0 for v in values):
        neg = b"".join((-v if v < 0 else 0).to_bytes(wb, "little") for v in values)
        x -= int.from_bytes(neg, "little")
    return x


def _kronecker_exact(a: np.ndarray, b: np.ndarray, n: int, same: bool) -> np.ndarray:
    av, bv = a.tolist(), b.tolist()
    ma = max(abs(v) for v in av)
    mb = max(abs(v) for v in bv)
    bits = ma.bit_length() + mb.bit_length() + min(len(av), len(bv)).bit_length()
    wb = bits // 8 + 1
    x = _pack_signed(av, wb)
    p = _bigmul(x, x) if same else _bigmul(x, _pack_signed(bv, wb))
    half = 1 << (8 * wb - 1)
    bias = int.from_bytes((b"\x00" * (wb - 1) + b"\x80") * n, "little")
    z = (p + bias) & ((1 << (8 * wb * n)) - 1)
    raw = z.to_bytes(n * wb, "little")
    out = np.empty(n, dtype=object)
    out[:] = [int.from_bytes(raw[i * wb:(i + 1) * wb], "little") - half for i in range(n)]
    return out


_UNPACK_BLOCK = 1 << 20


def _kronecker_mod(a: np.ndarray, b: np.ndarray, n: int, modulus: int, same: bool) -> np.ndarray:
    bound = (modulus - 1) ** 2 * min(len(a), len(b))
    wb = max(1, _cdiv(bound.bit_length(), 8))
    x = _pack_small(a, wb)
    y = x if same else _pack_small(b, wb)
    p = x * y
    del x, y
    if gmpy2 is None:
        raw = (p & ((1 << (8 * wb * n)) - 1)).to_bytes(n * wb, "little")
    else:
        raw = gmpy2.f_mod_2exp(p, 8 * wb * n).to_bytes(n * wb, "little")
    del p
    view = np.frombuffer(raw, dtype=np.uint8).reshape(n, wb)
    out = np.empty(n, dtype=np.int64)
    weights = [pow(256, j, modulus) for j in range(wb)]
    for lo in range(0, n, _UNPACK_BLOCK):
        blk = view[lo: lo + _UNPACK_BLOCK]
        acc = np.zeros(len(blk), dtype=np.int64)
        for j in range(wb):
            acc += blk[:, j].astype(np.int64) * weights[j]
        out[lo: lo + len(blk)] = acc % modulus
    return out


def _convolve(a: np.ndarray, b: np.ndarray, n: int, ring: Ring) -> np.ndarray:
    """First ``n`` coefficients of the product of two dense arrays, reduced in ``ring``."""
    same = a is b
    a, b = a[:n], b[:n]
    if len(a) == 0 or len(b) == 0 or n <= 0:
        return np.zeros(max(n, 0), dtype=ring.dtype)
    out = np.zeros(n, dtype=ring.dtype)
    nza, nzb = np.flatnonzero(a), np.flatnonzero(b)
    if len(nza) == 0 or len(nzb) == 0:
        return out
    # Sparse operand: shift-and-add over its nonzero terms.
    if min(len(nza), len(nzb)) <= 16 or len(a) * len(b) <= _DIRECT_LIMIT:
        if len(nza) > len(nzb):
            a, b, nza = b, a, nzb
        mod = ring.modulus
        for i in nza:
            i = int(i)
            seg = b[: n - i]
            if len(seg) == 0:
                continue
            out[i: i + len(seg)] += int(a[i]) * seg
            if mod is not None and ring.dtype is not object:
                out[i: i + len(seg)] %= mod
        return out % mod if mod is not None else out
    if ring.modulus is None:
        return _kronecker_exact(a, b, n, same)
    if ring.dtype is object:
        return _kronecker_exact(a, b, n, same) % ring.modulus
    return _kronecker_mod(a, b, n, ring.modulus, same)


def _unit_inverse(c: int, ring: Ring) -> int:
    c = int(c)
    if ring.modulus is None:
        if c not in (1, -1):
            raise ValueError(f"leading coefficient {c} is not a unit")
        return c
    if math.gcd(c, ring.modulus) != 1:
        raise ValueError(f"leading coefficient {c} is not invertible mod {ring.modulus}")
    return pow(c, -1, ring.modulus)


def _inverse(b: np.ndarray, n: int, ring: Ring) -> np.ndarray:
    """Newton iteration for ``1/b`` to ``n`` terms; ``b[0]`` must be a unit."""
    g = np.zeros(1, dtype=ring.dtype)
    g[0] = _unit_inverse(b[0], ring)
    cur = 1
    while cur < n:
        nxt = min(2 * cur, n)
        e = -_convolve(b[:nxt], g, nxt, ring)
        e[0] += 1
        if ring.modulus is not None:
            e %= ring.modulus
        corr = _convolve(g, e[cur:nxt], nxt - cur, ring)
        if ring.modulus is not None:
            corr %= ring.modulus
        g = np.concatenate([g, corr])
        cur = nxt
    return g


def _sparse_divide(a: np.ndarray, b: np.ndarray, n: int, ring: Ring) -> np.ndarray:
    """Back-substitution ``c_i = (a_i - sum_j b_j c_{i-j}) / b_0`` over the nonzero ``b_j``."""
    u = _unit_inverse(b[0], ring)
    terms = [(int(j), int(b[j])) for j in np.flatnonzero(b[:n]) if j > 0]
    mod = ring.modulus
    c = [0] * n
    av = [int(x) for x in a[:n]] + [0] * max(0, n - len(a))
    for i in range(n):
        acc = av[i]
        for j, bj in terms:
            if j > i:
                break
            acc -= bj * c[i - j]
        acc *= u
        c[i] = acc % mod if mod is not None else acc
    return _as_array(c, ring)


# -- public operations ---------------------------------------------------------

def add(a: Series, b: Series) -> Series:
    ring = _check_ring(a, b)
    order = min(a.order, b.order)
    if a.is_zero:
        return truncate(b, order)
    if b.is_zero:
        return truncate(a, order)
    start = min(a.val, b.val)
    s = math.gcd(a.step, b.step, abs(a.val - b.val)) or 1
    n = _cdiv(order - start, s)
    if n <= 0:
        return Series.zero(order, ring)
    total = a._dense(start, s, n) + b._dense(start, s, n)
    return _make(ring, start, s, total, order)


def scale(a: Series, c: int) -> Series:
    if a.is_zero:
        return a
    c = int(c)
    if a.ring.modulus is not None:
        c %= a.ring.modulus
    arr = a.coeffs * c
    return _make(a.ring, a.val, a.step or 1, arr, a.order)


def shift(a: Series, t: int) -> Series:
    """Multiply by ``q^(t/24)``."""
    if a.is_zero:
        return Series.zero(a.order + t, a.ring)
    return _make(a.ring, a.val + t, a.step or 1, a.coeffs.copy(), a.order + t)


def truncate(a: Series, order: int) -> Series:
    """Forget every coefficient at exponent ``>= order``."""
    if order >= a.order:
        return a
    if a.is_zero or order <= a.val:
        return Series.zero(order, a.ring)
    return _make(a.ring, a.val, a.step or 1, a.coeffs.copy(), order)


def mul(a: Series, b: Series) -> Series:
    ring = _check_ring(a, b)
    val = a.val + b.val
    order = min(a.order + b.val, b.order + a.val)
    if a.is_zero or b.is_zero:
        return Series.zero(order, ring)
    s = math.gcd(a.step, b.step) or 1
    n = _cdiv(order - val, s)
    if n <= 0:
        return Series.zero(order, ring)
    da = a._dense(a.val, s, n)
    db = da if a is b else b._dense(b.val, s, n)
    return _make(ring, val, s, _convolve(da, db, n, ring), order)


def power(a: Series, e: int) -> Series:
    if e < 0:
        raise ValueError("exponent must be nonnegative")
    result = Series.one(max(a.prec, 1), a.ring)
    base = a
    while e:
        if e & 1:
            result = mul(result, base)
        e >>= 1
        if e:
            base = mul(base, base)
    return result


def div(a: Series, b: Series) -> Series:
    """The unique ``c`` with ``b*c == a`` on the result's window."""
    ring = _check_ring(a, b)
    if b.is_zero:
        raise ZeroDivisionError("division by a series with no known nonzero term")
    _unit_inverse(b.coeffs[0], ring)
    val = a.val - b.val
    rel = min(a.prec, b.prec)
    order = val + rel
    if a.is_zero or rel <= 0:
        return Series.zero(order, ring)
    s = math.gcd(a.step, b.step) or 1
    n = _cdiv(rel, s)
    da = a._dense(a.val, s, n)
    db = b._dense(b.val, s, n)
    nnz = int(np.count_nonzero(db))
    if nnz * n <= _SPARSE_DIV_LIMIT:
        c = _sparse_divide(da, db, n, ring)
    else:
        c = _convolve(da, _inverse(db, n, ring), n, ring)
    return _make(ring, val, s, c, order)


def reduce(a: Series, modulus: int) -> Series:
    """Image of an exact series in Z/MZ."""
    if not a.ring.is_exact:
        raise RingError("reduce expects an exact series")
    ring = MOD(modulus)
    if a.is_zero:
        return Series.zero(a.order, ring)
    arr = _as_array([int(c) % modulus for c in a.coeffs.tolist()], ring)
    return _make(ring, a.val, a.step or 1, arr, a.order)


def coefficient(a: Series, n: int) -> int:
    return a.coefficient(n)


def lift(a: Series) -> Series:
    """Exact series with the residues of ``a`` as coefficients in ``[0, M)``."""
    if a.ring.is_exact or a.is_zero:
        return Series.zero(a.order) if a.is_zero else a
    return _make(EXACT, a.val, a.step or 1, _as_array(a.coeffs.tolist(), EXACT), a.order)
