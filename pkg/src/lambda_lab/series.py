"""Truncated q-expansions with exact integer coefficients.

The nome is q = exp(pi*i*tau), so the Legendre lambda function expands as
16q - 128q^2 + 704q^3 - ... with integer coefficients.  A series carries an
absolute precision: terms q^n with n >= precision are *unknown*, not zero.
Exact (finite) series use ``precision = math.inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

try:
    import gmpy2
except ImportError:  # pragma: no cover
    gmpy2 = None

INF = math.inf

# Below this many output terms the schoolbook product beats packing.
_KRONECKER_CUTOFF = 48


class SeriesError(ArithmeticError):
    pass


@dataclass(frozen=True)
class IntSeries:
    """q^valuation * (coeffs[0] + coeffs[1] q + ...) + O(q^precision)."""

    valuation: int
    coeffs: tuple[int, ...]
    precision: int | float = INF
    _normalized: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        if self._normalized:
            return
        coeffs = list(self.coeffs)
        val = self.valuation
        prec = self.precision
        # drop everything at or beyond the precision bound
        if prec != INF:
            keep = max(0, int(prec) - val)
            del coeffs[keep:]
        while coeffs and coeffs[0] == 0:
            coeffs.pop(0)
            val += 1
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        if not coeffs:
            val = int(prec) if prec != INF else 0
        object.__setattr__(self, "coeffs", tuple(coeffs))
        object.__setattr__(self, "valuation", val)
        object.__setattr__(self, "_normalized", True)

    # -- construction -------------------------------------------------

    @classmethod
    def from_dict(cls, terms: dict[int, int], precision=INF) -> IntSeries:
        if not terms:
            return cls(0, (), precision)
        lo, hi = min(terms), max(terms)
        coeffs = [0] * (hi - lo + 1)
        for e, c in terms.items():
            coeffs[e - lo] += c
        return cls(lo, tuple(coeffs), precision)

    @classmethod
    def one(cls) -> IntSeries:
        return cls(0, (1,))

    @classmethod
    def zero(cls, precision=INF) -> IntSeries:
        return cls(0, (), precision)

    # -- inspection ---------------------------------------------------

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_exact(self) -> bool:
        return self.precision == INF

    def __getitem__(self, n: int) -> int:
        """Coefficient of q^n; raises if n lies beyond the precision."""
        if n >= self.precision:
            raise SeriesError(f"coefficient of q^{n} unknown (precision {self.precision})")
        k = n - self.valuation
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return 0

    def to_dict(self) -> dict[int, int]:
        return {self.valuation + k: c for k, c in enumerate(self.coeffs) if c}

    def dense(self, start: int, stop: int) -> list[int]:
        """Coefficients of q^start .. q^(stop-1) as a list."""
        if stop > self.precision:
            raise SeriesError(f"requested q^{stop - 1} beyond precision {self.precision}")
        out = [0] * (stop - start)
        for k, c in enumerate(self.coeffs):
            e = self.valuation + k
            if start <= e < stop:
                out[e - start] = c
        return out

    def truncate(self, precision: int) -> IntSeries:
        return IntSeries(self.valuation, self.coeffs, min(self.precision, precision))

    def __repr__(self):
        terms = []
        for e, c in sorted(self.to_dict().items()):
            terms.append(f"{c}*q^{e}")
        body = " + ".join(terms) if terms else "0"
        if self.precision != INF:
            body += f" + O(q^{int(self.precision)})"
        return f"IntSeries({body})"

    # -- operators ----------------------------------------------------

    def __add__(self, other):
        if isinstance(other, int):
            other = IntSeries(0, (other,))
        return series_add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return IntSeries(self.valuation, tuple(-c for c in self.coeffs), self.precision)

    def __sub__(self, other):
        if isinstance(other, int):
            other = IntSeries(0, (other,))
        return series_add(self, -other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return IntSeries(self.valuation, tuple(c * other for c in self.coeffs), self.precision)
        return series_mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        return series_pow(self, n)


def series_add(a: IntSeries, b: IntSeries) -> IntSeries:
    prec = min(a.precision, b.precision)
    terms = a.to_dict()
    for e, c in b.to_dict().items():
        terms[e] = terms.get(e, 0) + c
    if prec != INF:
        terms = {e: c for e, c in terms.items() if e < prec}
    return IntSeries.from_dict(terms, prec)


def _mul_precision(a: IntSeries, b: IntSeries) -> int | float:
    # An unknown tail of a at q^Pa meets the lowest known term of b.
    return min(a.precision + b.valuation, b.precision + a.valuation)


def _schoolbook(x: list[int], y: list[int], n: int) -> list[int]:
    out = [0] * n
    for i, xi in enumerate(x):
        if not xi or i >= n:
            continue
        for j, yj in enumerate(y[: n - i]):
            out[i + j] += xi * yj
    return out


def _mul(x: int, y: int) -> int:
    if gmpy2 is not None and x.bit_length() > 50000:
        return int(gmpy2.mpz(x) * gmpy2.mpz(y))
    return x * y


def _pack(xs: list[int], nbytes: int) -> int:
    """Evaluate sum xs[i] * 2^(8*nbytes*i) for signed xs in linear time."""
    pos = b"".join(c.to_bytes(nbytes, "little") if c > 0 else bytes(nbytes) for c in xs)
    neg = b"".join((-c).to_bytes(nbytes, "little") if c < 0 else bytes(nbytes) for c in xs)
    return int.from_bytes(pos, "little") - int.from_bytes(neg, "little")


def _unpack(v: int, nbytes: int, n: int) -> list[int]:
    """Inverse of _pack for digits with |d| < 2^(8*nbytes - 1)."""
    half = 1 << (8 * nbytes - 1)
    offset = int.from_bytes(half.to_bytes(nbytes, "little") * n, "little")
    v += offset
    if v < 0:
        raise SeriesError("Kronecker unpacking underflow")
    raw = v.to_bytes(nbytes * n + nbytes + 1, "little")
    return [
        int.from_bytes(raw[k * nbytes : (k + 1) * nbytes], "little") - half
        for k in range(n)
    ]


def convolve(x: list[int], y: list[int], n: int) -> list[int]:
    """First n terms of the product of two integer coefficient lists."""
    x = x[:n]
    y = y[:n]
    if not x or not y:
        return [0] * n
    if min(len(x), len(y)) < _KRONECKER_CUTOFF:
        return _schoolbook(x, y, n)
    # Kronecker substitution: evaluate at 2^bits, multiply once, read back
    # signed digits.  bits must exceed twice the largest |coefficient| of
    # the product.
    mx = max(abs(c) for c in x)
    my = max(abs(c) for c in y)
    bound = mx * my * min(len(x), len(y))
    nbytes = (bound.bit_length() + 2) // 8 + 1
    prod = _mul(_pack(x, nbytes), _pack(y, nbytes))
    # product digits past n are discarded by reading modulo 2^(8*nbytes*n)
    prod &= (1 << (8 * nbytes * n)) - 1
    return _unpack(prod, nbytes, n)


def series_mul(a: IntSeries, b: IntSeries) -> IntSeries:
    prec = _mul_precision(a, b)
    val = a.valuation + b.valuation
    if a.is_zero() or b.is_zero():
        return IntSeries.zero(prec)
    full = len(a.coeffs) + len(b.coeffs) - 1
    n = full if prec == INF else max(0, min(full, int(prec) - val))
    return IntSeries(val, tuple(convolve(list(a.coeffs), list(b.coeffs), n)), prec)


def series_inv(a: IntSeries) -> IntSeries:
    """Inverse of a series whose leading coefficient is +1 or -1."""
    if a.is_zero():
        raise SeriesError("cannot invert a series that is zero to its precision")
    lead = a.coeffs[0]
    if lead not in (1, -1):
        raise SeriesError(f"leading coefficient {lead} is not a unit over the integers")
    if a.is_exact():
        if len(a.coeffs) > 1:
            raise SeriesError("inverse of a non-monomial exact series is infinite")
        return IntSeries(-a.valuation, (lead,))
    # relative precision is preserved by inversion
    rel = int(a.precision) - a.valuation
    u = list(a.coeffs[:rel]) + [0] * max(0, rel - len(a.coeffs))
    inv = [0] * rel
    for n in range(rel):
        s = 1 if n == 0 else 0
        for k in range(1, n + 1):
            s -= u[k] * inv[n - k]
        inv[n] = s * lead
    val = -a.valuation
    return IntSeries(val, tuple(inv), val + rel)


def series_pow(a: IntSeries, n: int) -> IntSeries:
    if n < 0:
        raise ValueError("negative powers: use series_inv")
    result = IntSeries.one()
    base = a
    while n:
        if n & 1:
            result = series_mul(result, base)
        n >>= 1
        if n:
            base = series_mul(base, base)
    return result


def substitute_qpow(a: IntSeries, m: int) -> IntSeries:
    """a(q^m)."""
    if m < 1:
        raise ValueError("m must be positive")
    if m == 1:
        return a
    terms = {m * e: c for e, c in a.to_dict().items()}
    return IntSeries.from_dict(terms, a.precision * m)


def lambda_qexp(prec: int) -> IntSeries:
    """Legendre lambda as 16 q prod_{n>=1} ((1+q^{2n})/(1+q^{2n-1}))^8 + O(q^prec)."""
    if prec < 2:
        raise ValueError("prec must be at least 2")
    rel = prec - 1  # relative precision of the unit part
    u = [0] * rel
    u[0] = 1
    # factors with exponent >= rel are 1 + O(q^rel)
    for k in range(1, rel):
        if k % 2:
            # divide by (1 + q^k)
            for i in range(k, rel):
                u[i] -= u[i - k]
        else:
            # multiply by (1 + q^k)
            for i in range(rel - 1, k - 1, -1):
                u[i] += u[i - k]
    u2 = convolve(u, u, rel)
    u4 = convolve(u2, u2, rel)
    u8 = convolve(u4, u4, rel)
    return IntSeries(1, tuple(16 * c for c in u8), prec)
