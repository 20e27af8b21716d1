"""F_p and F_{p^2} arithmetic and supersingular Legendre invariants.

F_{p^2} is realised as F_p(s) with s^2 = sigma, sigma the smallest quadratic
non-residue mod p.  Supersingular lambda-invariants are the roots of the
Deuring polynomial sum_i C(m, i)^2 X^i, m = (p-1)/2; they are found by
scanning all p^2 field elements and cross-checked against an independent
point count of y^2 = x(x-1)(x-lambda).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Iterator

import numpy as np

from .errors import TheoremViolation


@lru_cache(maxsize=None)
def smallest_nonresidue(p: int) -> int:
    for s in range(2, p):
        if pow(s, (p - 1) // 2, p) == p - 1:
            return s
    raise ValueError(f"no quadratic non-residue mod {p}")


def legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def sqrt_mod(a: int, p: int) -> int | None:
    """A square root of a mod p (smaller representative), or None."""
    a %= p
    if a == 0:
        return 0
    if legendre(a, p) != 1:
        return None
    if p % 4 == 3:
        r = pow(a, (p + 1) // 4, p)
    else:
        # Tonelli-Shanks
        q, s = p - 1, 0
        while q % 2 == 0:
            q //= 2
            s += 1
        z = smallest_nonresidue(p)
        m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
        while t != 1:
            i, t2 = 0, t
            while t2 != 1:
                t2 = t2 * t2 % p
                i += 1
            b = pow(c, 1 << (m - i - 1), p)
            m, c, t, r = i, b * b % p, t * b * b % p, r * b % p
    return min(r, p - r)


@dataclass(frozen=True, order=True)
class Fp2Elem:
    """a + b*s in F_{p^2}, s^2 = smallest_nonresidue(p)."""

    a: int
    b: int
    p: int

    def __post_init__(self):
        object.__setattr__(self, "a", self.a % self.p)
        object.__setattr__(self, "b", self.b % self.p)

    @classmethod
    def of(cls, x, p: int) -> Fp2Elem:
        if isinstance(x, Fp2Elem):
            return x
        return cls(x, 0, p)

    @property
    def sigma(self) -> int:
        return smallest_nonresidue(self.p)

    def _coerce(self, other) -> Fp2Elem:
        if isinstance(other, Fp2Elem):
            if other.p != self.p:
                raise ValueError("mixing different characteristics")
            return other
        if isinstance(other, int):
            return Fp2Elem(other, 0, self.p)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Fp2Elem(self.a + o.a, self.b + o.b, self.p)

    __radd__ = __add__

    def __neg__(self):
        return Fp2Elem(-self.a, -self.b, self.p)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Fp2Elem(self.a - o.a, self.b - o.b, self.p)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Fp2Elem(
            self.a * o.a + self.sigma * self.b * o.b,
            self.a * o.b + self.b * o.a,
            self.p,
        )

    __rmul__ = __mul__

    def norm(self) -> int:
        return (self.a * self.a - self.sigma * self.b * self.b) % self.p

    def conjugate(self) -> Fp2Elem:
        return Fp2Elem(self.a, -self.b, self.p)

    def frobenius(self) -> Fp2Elem:
        """x -> x^p, which on F_p(s) is conjugation."""
        return self.conjugate()

    def inverse(self) -> Fp2Elem:
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero in F_p^2")
        ninv = pow(n, -1, self.p)
        return Fp2Elem(self.a * ninv, -self.b * ninv, self.p)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, n: int):
        base = self if n >= 0 else self.inverse()
        n = abs(n)
        result = Fp2Elem(1, 0, self.p)
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, int):
            return self.b == 0 and self.a == other % self.p
        if isinstance(other, Fp2Elem):
            return (self.a, self.b, self.p) == (other.a, other.b, other.p)
        return NotImplemented

    def __hash__(self):
        return hash((self.a, self.b, self.p))

    def __bool__(self):
        return bool(self.a or self.b)

    def in_prime_field(self) -> bool:
        return self.b == 0

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        if self.a == 0:
            return f"{self.b}*s"
        return f"{self.a}+{self.b}*s"


def all_elements(p: int) -> Iterator[Fp2Elem]:
    for a in range(p):
        for b in range(p):
            yield Fp2Elem(a, b, p)


@dataclass(frozen=True)
class FpPoly:
    """Dense polynomial over F_p, lowest degree first."""

    p: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        c = [x % self.p for x in self.coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def from_int_poly(cls, poly, p: int) -> FpPoly:
        return cls(p, tuple(poly.coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __call__(self, x):
        if isinstance(x, int):
            x = Fp2Elem(x, 0, self.p)
        acc = Fp2Elem(0, 0, self.p)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> FpPoly:
        return FpPoly(self.p, tuple(k * c for k, c in enumerate(self.coeffs) if k))

    def _divmod(self, other: FpPoly) -> tuple[FpPoly, FpPoly]:
        p = self.p
        r = list(self.coeffs)
        q = [0] * max(0, len(r) - len(other.coeffs) + 1)
        inv = pow(other.coeffs[-1], -1, p)
        while len(r) >= len(other.coeffs) and r:
            shift = len(r) - len(other.coeffs)
            f = r[-1] * inv % p
            q[shift] = f
            for k, c in enumerate(other.coeffs):
                r[shift + k] = (r[shift + k] - f * c) % p
            while r and r[-1] == 0:
                r.pop()
        return FpPoly(p, tuple(q)), FpPoly(p, tuple(r))

    def gcd(self, other: FpPoly) -> FpPoly:
        a, b = self, other
        while not b.is_zero():
            a, b = b, a._divmod(b)[1]
        if a.is_zero():
            return a
        inv = pow(a.coeffs[-1], -1, self.p)
        return FpPoly(self.p, tuple(c * inv for c in a.coeffs))


def hasse_polynomial(p: int) -> FpPoly:
    """Deuring's H(X) = sum_{i<=m} C(m, i)^2 X^i mod p, m = (p-1)/2."""
    if p < 5:
        raise ValueError("p must be a prime >= 5")
    m = (p - 1) // 2
    H = FpPoly(p, tuple(comb(m, i) ** 2 for i in range(m + 1)))
    if H.gcd(H.derivative()).degree != 0:
        raise TheoremViolation(f"Hasse polynomial for p={p} is not squarefree")
    return H


# ---------------------------------------------------------------------------
# point-count oracle


def _legendre_table(p: int) -> np.ndarray:
    table = np.full(p, -1, dtype=np.int64)
    table[0] = 0
    table[(np.arange(1, p, dtype=np.int64) ** 2) % p] = 1
    return table


def frobenius_trace(p: int, lam: Fp2Elem) -> int:
    """Trace of Frobenius of y^2 = x(x-1)(x-lam) over F_{p^2}.

    The quadratic character of F_{p^2} is the Legendre symbol of the norm,
    so the affine count is p^2 + sum_x chi(x(x-1)(x-lam)).
    """
    sigma = smallest_nonresidue(p)
    xa, xb = np.divmod(np.arange(p * p, dtype=np.int64), p)

    def mul(ua, ub, va, vb):
        return (ua * va + sigma * (ub * vb % p)) % p, (ua * vb + ub * va) % p

    ga, gb = mul(xa, xb, (xa - 1) % p, xb)
    ga, gb = mul(ga, gb, (xa - lam.a) % p, (xb - lam.b) % p)
    norm = (ga * ga - sigma * (gb * gb % p)) % p
    char_sum = int(_legendre_table(p)[norm].sum())
    # N = p^2 + 1 + char_sum, t = p^2 + 1 - N
    return -char_sum


def is_supersingular_pointcount(p: int, lam: Fp2Elem) -> bool:
    lam = Fp2Elem.of(lam, p)
    if lam == 0 or lam == 1:
        raise ValueError("lambda in {0, 1} gives a singular cubic")
    return frobenius_trace(p, lam) % p == 0


# ---------------------------------------------------------------------------
# supersingular set


@dataclass(frozen=True)
class SupersingularSet:
    p: int
    lambdas: tuple[Fp2Elem, ...]

    def __len__(self):
        return len(self.lambdas)

    def __iter__(self):
        return iter(self.lambdas)

    def __contains__(self, x):
        return Fp2Elem.of(x, self.p) in set(self.lambdas)

    def in_prime_field(self) -> list[Fp2Elem]:
        return [x for x in self.lambdas if x.in_prime_field()]

    def index(self, x: Fp2Elem) -> int:
        return self.lambdas.index(x)

    def frobenius_closed(self) -> bool:
        s = set(self.lambdas)
        return all(x.frobenius() in s for x in s)


def hasse_roots(p: int) -> list[Fp2Elem]:
    H = hasse_polynomial(p)
    return sorted(x for x in all_elements(p) if not H(x))


def supersingular_lambdas(p: int, cross_check: bool = True) -> SupersingularSet:
    H = hasse_polynomial(p)
    dH = H.derivative()
    roots = hasse_roots(p)
    if len(roots) != (p - 1) // 2:
        raise TheoremViolation(
            f"found {len(roots)} supersingular lambdas for p={p}, expected {(p - 1) // 2}"
        )
    for x in roots:
        if not dH(x):
            raise TheoremViolation(f"{x} is a repeated root of the Hasse polynomial (p={p})")
    S = SupersingularSet(p, tuple(roots))
    if cross_check:
        rootset = set(roots)
        for x in all_elements(p):
            if x == 0 or x == 1:
                continue
            if is_supersingular_pointcount(p, x) != (x in rootset):
                raise TheoremViolation(
                    f"Hasse polynomial and point count disagree at lambda={x} (p={p})"
                )
    return S


# ---------------------------------------------------------------------------
# the two assertions about R-bar


def evaluate_rbar(Rbar: FpPoly, lam) -> Fp2Elem:
    return Rbar(Fp2Elem.of(lam, Rbar.p))


def predicted_rbar(p: int, i: int, S: SupersingularSet) -> Fp2Elem:
    """(-1)^{(p-1)/2} prod_{k != i} (lambda_i - lambda_k)^{-(p+1)}."""
    li = S.lambdas[i]
    prod = Fp2Elem(1, 0, p)
    for k, lk in enumerate(S.lambdas):
        if k != i:
            d = li - lk
            if not d:
                raise ArithmeticError("supersingular lambdas are not distinct")
            prod = prod * d ** (p + 1)
    sign = -1 if ((p - 1) // 2) % 2 else 1
    return prod.inverse() * sign


def sign_is_forced(p: int, lam: Fp2Elem) -> bool:
    """The sign is proven to be + unless p = 3 mod 4 and lam lies outside F_p."""
    return p % 4 == 1 or lam.in_prime_field()


def rbar_signs(p: int, Rbar: FpPoly, S: SupersingularSet) -> list[int]:
    """epsilon_i = Rbar(lambda_i) / predicted value; each must be +-1."""
    signs = []
    for i, li in enumerate(S.lambdas):
        eps = evaluate_rbar(Rbar, li) / predicted_rbar(p, i, S)
        if eps == 1:
            signs.append(1)
        elif eps == -1:
            signs.append(-1)
        else:
            raise TheoremViolation(f"p={p}, lambda={li}: ratio {eps} is not +-1")
        if signs[-1] == -1 and sign_is_forced(p, li):
            raise TheoremViolation(f"p={p}, lambda={li}: sign must be + but is -")
    return signs


corollary_check = rbar_signs


def ordinary_vanishing_check(p: int, Rbar: FpPoly, S: SupersingularSet) -> bool:
    """Rbar vanishes on every non-supersingular lambda in F_{p^2} minus {0, 1}."""
    ss = set(S.lambdas)
    for x in all_elements(p):
        if x == 0 or x == 1 or x in ss:
            continue
        if evaluate_rbar(Rbar, x):
            return False
    return True


def ordinary_nonvanishing(p: int, Rbar: FpPoly, S: SupersingularSet) -> list[Fp2Elem]:
    ss = set(S.lambdas)
    return [
        x
        for x in all_elements(p)
        if not (x == 0 or x == 1 or x in ss) and evaluate_rbar(Rbar, x)
    ]

