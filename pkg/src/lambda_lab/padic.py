"""p-adic arithmetic in Z_p[sqrt(-p)] and CM lifts of supersingular lambdas.

A supersingular lambda0 in F_p is a double root of f(X) = F_p(X, X) mod p.
Above it sit exactly two roots of f in Z_p[pi], pi^2 = -p, and they are
conjugate.  ``cm_lift`` finds one by Newton iteration on the pair of
integer equations f(a + b pi) = A(a, b) + B(a, b) pi = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import PrecisionError, TheoremViolation
from .finitefield import Fp2Elem, SupersingularSet, sqrt_mod
from .modpoly import BivarIntPoly, UnivarIntPoly
from .pairing import LeadingUnit


def vp(n: int, p: int) -> int | float:
    """p-adic valuation of an integer; inf for 0."""
    if n == 0:
        return math.inf
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


@dataclass(frozen=True)
class PadicInt:
    """value + O(p^N)."""

    value: int
    N: int
    p: int

    def __post_init__(self):
        object.__setattr__(self, "value", self.value % self.p**self.N)

    def valuation(self) -> int:
        """Exact valuation, or N when the value is zero to this precision."""
        v = vp(self.value, self.p)
        return self.N if v == math.inf else min(v, self.N)

    def is_zero(self) -> bool:
        return self.value == 0

    def _coerce(self, other) -> PadicInt:
        if isinstance(other, PadicInt):
            if other.p != self.p:
                raise ValueError("mixing different primes")
            return other
        if isinstance(other, int):
            # an exact integer never limits the result's precision
            return PadicInt(other, self.N, self.p)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return PadicInt(self.value + o.value, min(self.N, o.N), self.p)

    __radd__ = __add__

    def __neg__(self):
        return PadicInt(-self.value, self.N, self.p)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return PadicInt(self.value - o.value, min(self.N, o.N), self.p)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            # scaling by an exact integer gains its valuation in precision
            v = vp(other, self.p)
            if v == math.inf:
                return PadicInt(0, self.N, self.p)
            return PadicInt(self.value * other, self.N + v, self.p)
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        N = min(self.N + o.valuation(), o.N + self.valuation())
        return PadicInt(self.value * o.value, N, self.p)

    __rmul__ = __mul__

    def unit_inverse(self) -> PadicInt:
        if self.value % self.p == 0:
            raise ZeroDivisionError("not a p-adic unit")
        return PadicInt(pow(self.value, -1, self.p**self.N), self.N, self.p)

    def symmetric(self) -> int:
        m = self.p**self.N
        return self.value - m if self.value > m // 2 else self.value


@dataclass(frozen=True)
class QuadPadic:
    """a + b*pi with pi^2 = -p, a and b in Z_p."""

    a: PadicInt
    b: PadicInt

    @property
    def p(self) -> int:
        return self.a.p

    @classmethod
    def from_ints(cls, a: int, b: int, p: int, N: int) -> QuadPadic:
        return cls(PadicInt(a, N, p), PadicInt(b, N, p))

    def _coerce(self, other) -> QuadPadic:
        if isinstance(other, QuadPadic):
            return other
        if isinstance(other, int):
            N = max(self.a.N, self.b.N)
            return QuadPadic(PadicInt(other, N, self.p), PadicInt(0, N, self.p))
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadPadic(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return QuadPadic(-self.a, -self.b)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadPadic(self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return QuadPadic(self.a * other, self.b * other)
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        p = self.p
        return QuadPadic(self.a * o.a - (self.b * o.b) * p, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        result = self._coerce(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def conjugate(self) -> QuadPadic:
        return QuadPadic(self.a, -self.b)

    def twice_precision(self) -> int:
        """Elements are known modulo pi^(this)."""
        return min(2 * self.a.N, 2 * self.b.N + 1)

    def twice_valuation(self) -> int:
        """2 v(x) with v(p) = 1, capped at the precision when x is zero to it."""
        return min(2 * self.a.valuation(), 2 * self.b.valuation() + 1, self.twice_precision())

    def valuation_is_exact(self) -> bool:
        return self.twice_valuation() < self.twice_precision()

    def leading_unit(self) -> LeadingUnit:
        """Class modulo principal units of Q_p(pi), normalised by powers of p and pi.

        x = p^k * u (even twice-valuation) or p^k * pi * u (odd); the residue
        of u lies in F_p.
        """
        if not self.valuation_is_exact():
            raise PrecisionError("element is zero to the working precision")
        t = self.twice_valuation()
        p = self.p
        k = t // 2
        if t % 2 == 0:
            u = self.a.value // p**k
        else:
            u = self.b.value // p**k
        return LeadingUnit(t, Fp2Elem(u, 0, p))

    def eq_mod(self, other: QuadPadic, twice_n: int) -> bool:
        """x == other modulo pi^twice_n."""
        d = self - other
        return d.twice_valuation() >= twice_n

    def __str__(self):
        p = self.p
        return f"{self.a.symmetric()} + {self.b.symmetric()}*sqrt(-{p}) + O(p^{min(self.a.N, self.b.N)})"


# ---------------------------------------------------------------------------
# class numbers


def reduced_forms(p: int) -> list[tuple[int, int, int]]:
    """Reduced primitive forms (a, b, c) of discriminant -p."""
    D = -p
    forms = []
    a = 1
    while 3 * a * a <= -D:
        for b in range(-a + 1, a + 1):
            if (b * b - D) % (4 * a):
                continue
            c = (b * b - D) // (4 * a)
            if c < a:
                continue
            if b < 0 and (a == c):
                continue
            if math.gcd(math.gcd(a, abs(b)), c) != 1:
                continue
            forms.append((a, b, c))
        a += 1
    return forms


def class_number(p: int) -> int:
    if p % 4 != 3:
        raise ValueError(f"-{p} is not a fundamental discriminant of this shape (need p = 3 mod 4)")
    return len(reduced_forms(p))


def count_check_3h(p: int, S: SupersingularSet) -> bool:
    return len(S.in_prime_field()) == 3 * class_number(p)


# ---------------------------------------------------------------------------
# CM lifts


def _eval_pair(f: UnivarIntPoly, a: int, b: int, p: int) -> tuple[int, int]:
    """f(a + b pi) = A + B pi exactly over Z."""
    A, B = 0, 0
    for c in reversed(f.coeffs):
        A, B = A * a - p * B * b + c, A * b + B * a
    return A, B


def _twice_val_pair(A: int, B: int, p: int) -> int | float:
    return min(2 * vp(A, p), 2 * vp(B, p) + 1)


@dataclass
class CMLiftTrace:
    value: QuadPadic
    residuals: list[int] = field(default_factory=list)  # twice-valuations of f, per iterate
    steps: int = 0


def initial_b(f: UnivarIntPoly, p: int, a0: int) -> int:
    """b with f(a0 + b pi) = 0 modulo pi^3.

    f(a0 + b pi) = f(a0) - p b^2 f''(a0)/2 modulo pi^3, since f'(a0) = 0 mod p.
    """
    fa = f(a0)
    if fa % p:
        raise ValueError(f"{a0} is not a root of F_p(X, X) mod {p}")
    f2 = f.derivative().derivative()(a0)
    if f2 % p == 0:
        raise TheoremViolation("f'' vanishes mod p at a supersingular point")
    target = 2 * (fa // p) * pow(f2, -1, p) % p
    b0 = sqrt_mod(target, p)
    if b0 is None or b0 == 0:
        raise TheoremViolation(f"no lift above {a0}: {target} is not a nonzero square mod {p}")
    return b0


def cm_lift_trace(
    f: UnivarIntPoly, p: int, lam0: int, N: int, sign: int = 1, max_steps: int = 64
) -> CMLiftTrace:
    if N < 4:
        raise ValueError("target precision must be at least 4")
    a = lam0 % p
    b = sign * initial_b(f, p, a) % p
    fprime = f.derivative()
    residuals = []
    work = 2
    steps = 0
    while True:
        A, B = _eval_pair(f, a, b, p)
        r = _twice_val_pair(A, B, p)
        residuals.append(r)
        if r >= 2 * N:
            break
        if steps >= max_steps:
            raise PrecisionError(f"Newton iteration stalled at residual valuation {r / 2}")
        # Jacobian of (A, B) in (a, b): f'(a + b pi) = Ad + Bd pi gives
        # [[Ad, -p Bd], [Bd, Ad]]
        Ad, Bd = _eval_pair(fprime, a, b, p)
        det = Ad * Ad + p * Bd * Bd
        k = vp(det, p)
        if k == math.inf:
            raise PrecisionError("Jacobian is singular")
        num_a = -(Ad * A + p * Bd * B)
        num_b = Bd * A - Ad * B
        pk = p**k
        if num_a % pk or num_b % pk:
            raise PrecisionError("Newton step is not integral at this precision")
        work = min(2 * work, N + 1)
        mod = p**work
        uinv = pow(det // pk, -1, mod)
        a = (a + (num_a // pk) * uinv) % mod
        b = (b + (num_b // pk) * uinv) % mod
        steps += 1
    value = QuadPadic.from_ints(a, b, p, N)
    if value.b.valuation() != 0:
        raise TheoremViolation("lift lies in Z_p")
    return CMLiftTrace(value, residuals, steps)


def cm_lift(f: UnivarIntPoly, p: int, lam0: int, N: int, sign: int = 1) -> QuadPadic:
    return cm_lift_trace(f, p, lam0, N, sign).value


def cm_lifts(f: UnivarIntPoly, p: int, lam0: int, N: int) -> tuple[QuadPadic, QuadPadic]:
    """Both roots of f above lam0, from the two square-root choices."""
    return cm_lift(f, p, lam0, N, 1), cm_lift(f, p, lam0, N, -1)


@dataclass
class Thm3Report:
    passed: bool
    twice_val_F: int  # 2 v(F(l, l^p))
    twice_val_diff: int  # 2 v(l - l^p)
    twice_val_D: int  # 2 v(F(l, l^p) - (l - l^p)^2), possibly a lower bound
    unit_F: LeadingUnit
    unit_square: LeadingUnit


def thm3_report(F: BivarIntPoly, lam1: QuadPadic) -> Thm3Report:
    p = F.p_level
    if min(lam1.a.N, lam1.b.N) < 4:
        raise PrecisionError("need at least 4 p-adic digits")
    lp = lam1**p
    Fv = F.evaluate(lam1, lp)
    diff = lam1 - lp
    sq = diff * diff
    D = Fv - sq
    if D.twice_precision() < 3 or not Fv.valuation_is_exact() or not diff.valuation_is_exact():
        raise PrecisionError("precision too low to decide the congruence")
    tD = D.twice_valuation()
    passed = tD >= 3 and Fv.twice_valuation() == 2 and diff.twice_valuation() == 1
    return Thm3Report(
        passed,
        Fv.twice_valuation(),
        diff.twice_valuation(),
        tD,
        Fv.leading_unit(),
        sq.leading_unit(),
    )


def verify_thm3(F: BivarIntPoly, lam1: QuadPadic, p: int | None = None) -> bool:
    """F(l, l^p) = (l - l^p)^2 modulo p*sqrt(-p), with v(F(l, l^p)) = 1."""
    if p is not None and p != F.p_level:
        raise ValueError("level mismatch")
    return thm3_report(F, lam1).passed


def root_multiplicity_mod_p(f: UnivarIntPoly, p: int, lam0: int) -> int:
    coeffs = [c % p for c in f.coeffs]
    m = 0
    while any(coeffs):
        # synthetic division by (X - lam0)
        quotient = [0] * (len(coeffs) - 1)
        acc = 0
        for k in range(len(coeffs) - 1, -1, -1):
            acc = (acc * lam0 + coeffs[k]) % p
            if k:
                quotient[k - 1] = acc
        if acc:
            break
        m += 1
        coeffs = quotient
    return m
