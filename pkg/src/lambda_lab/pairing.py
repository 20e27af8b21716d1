"""The residual pairing matrix in K^x / U_1(K).

K is the unramified quadratic extension of Q_p.  A class modulo principal
units is recorded by its valuation (stored doubled, so the ramified
v(sqrt(-p)) = 1/2 stays integral) and the residue of its unit part.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .errors import TheoremViolation
from .finitefield import Fp2Elem, FpPoly, SupersingularSet, predicted_rbar, sign_is_forced, smallest_nonresidue
from .modpoly import BivarIntPoly


@dataclass(frozen=True)
class LeadingUnit:
    twice_val: int
    unit: Fp2Elem

    def __post_init__(self):
        if not self.unit:
            raise ValueError("unit part must be nonzero")

    @property
    def valuation(self) -> Fraction:
        return Fraction(self.twice_val, 2)

    def __mul__(self, other: LeadingUnit) -> LeadingUnit:
        return LeadingUnit(self.twice_val + other.twice_val, self.unit * other.unit)

    def inverse(self) -> LeadingUnit:
        return LeadingUnit(-self.twice_val, self.unit.inverse())

    def __pow__(self, n: int) -> LeadingUnit:
        return LeadingUnit(self.twice_val * n, self.unit**n)

    def __str__(self):
        return f"({self.valuation}, {self.unit})"


def lu_mul(x: LeadingUnit, y: LeadingUnit) -> LeadingUnit:
    return x * y


def lu_pow(x: LeadingUnit, n: int) -> LeadingUnit:
    return x**n


@dataclass(frozen=True)
class UnramifiedMod2:
    """c0 + c1*t in (Z/p^2)[t]/(t^2 - sigma), i.e. W(F_{p^2}) / p^2."""

    c0: int
    c1: int
    p: int

    def __post_init__(self):
        m = self.p * self.p
        object.__setattr__(self, "c0", self.c0 % m)
        object.__setattr__(self, "c1", self.c1 % m)

    def _coerce(self, other) -> UnramifiedMod2:
        if isinstance(other, UnramifiedMod2):
            return other
        if isinstance(other, int):
            return UnramifiedMod2(other, 0, self.p)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return UnramifiedMod2(self.c0 + o.c0, self.c1 + o.c1, self.p)

    __radd__ = __add__

    def __neg__(self):
        return UnramifiedMod2(-self.c0, -self.c1, self.p)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        s = smallest_nonresidue(self.p)
        return UnramifiedMod2(
            self.c0 * o.c0 + s * self.c1 * o.c1, self.c0 * o.c1 + self.c1 * o.c0, self.p
        )

    __rmul__ = __mul__

    def __pow__(self, n: int):
        result = UnramifiedMod2(1, 0, self.p)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def reduce(self) -> Fp2Elem:
        return Fp2Elem(self.c0, self.c1, self.p)

    def is_unit(self) -> bool:
        return bool(self.reduce())

    @classmethod
    def lift(cls, x: Fp2Elem, rng: random.Random | None = None) -> UnramifiedMod2:
        """A lift of x; random in the p-adic digit when rng is given."""
        p = x.p
        if rng is None:
            return cls(x.a, x.b, p)
        return cls(x.a + p * rng.randrange(p), x.b + p * rng.randrange(p), p)


def phi_offdiag(p: int, li: Fp2Elem, lj: Fp2Elem) -> LeadingUnit:
    if li == lj:
        raise ValueError("off-diagonal entry needs distinct invariants")
    return LeadingUnit(0, (li - lj) ** (p + 1))


def phi_diag_theorem(p: int, i: int, S: SupersingularSet) -> tuple[LeadingUnit, LeadingUnit]:
    """Both candidates +-p * prod_{k != i} (lambda_i - lambda_k)^{-(p+1)}."""
    li = S.lambdas[i]
    prod = Fp2Elem(1, 0, p)
    for k, lk in enumerate(S.lambdas):
        if k != i:
            prod = prod * (li - lk) ** (p + 1)
    u = prod.inverse()
    return LeadingUnit(2, u), LeadingUnit(2, -u)


def phi_diag_via_modpoly(
    F: BivarIntPoly, li: Fp2Elem, lift: UnramifiedMod2 | None = None
) -> LeadingUnit:
    """Class of F(beta, beta^p) for a lift beta of li, computed mod p^2."""
    p = F.p_level
    beta = lift if lift is not None else UnramifiedMod2.lift(li)
    if beta.reduce() != li:
        raise ValueError("beta does not reduce to lambda")
    val = F.evaluate(beta, beta**p)
    if val.c0 % p or val.c1 % p:
        raise TheoremViolation(f"F(beta, beta^p) is not divisible by p at lambda={li}")
    unit = Fp2Elem(val.c0 // p, val.c1 // p, p)
    if not unit:
        raise TheoremViolation(f"F(beta, beta^p) vanishes mod p^2 at lambda={li}")
    return LeadingUnit(2, unit)


@dataclass(frozen=True)
class PairingMatrix:
    p: int
    lambdas: tuple[Fp2Elem, ...]
    entries: tuple[tuple[LeadingUnit, ...], ...]
    # diagonal unit / (+prod^{-(p+1)}), the displayed diagonal candidate
    raw_signs: tuple[int, ...]
    # raw sign times (-1)^{(p-1)/2}: the sign in the Rbar identity
    signs: tuple[int, ...]

    def is_symmetric(self) -> bool:
        n = len(self.entries)
        return all(self.entries[i][j] == self.entries[j][i] for i in range(n) for j in range(n))

    def rows(self) -> list[list[str]]:
        return [[str(e) for e in row] for row in self.entries]


def _as_sign(x: Fp2Elem) -> int | None:
    if x == 1:
        return 1
    if x == -1:
        return -1
    return None


def build_pairing_matrix(
    p: int, F: BivarIntPoly, S: SupersingularSet, rng: random.Random | None = None
) -> PairingMatrix:
    rows = []
    raw_signs = []
    signs = []
    parity = -1 if ((p - 1) // 2) % 2 else 1
    for i, li in enumerate(S.lambdas):
        row = []
        for j, lj in enumerate(S.lambdas):
            if i == j:
                lift = UnramifiedMod2.lift(li, rng) if rng is not None else None
                row.append(phi_diag_via_modpoly(F, li, lift))
            else:
                row.append(phi_offdiag(p, li, lj))
        rows.append(tuple(row))
        plus, _ = phi_diag_theorem(p, i, S)
        raw = _as_sign(row[i].unit / plus.unit)
        if raw is None:
            raise TheoremViolation(f"p={p}, lambda={li}: diagonal is not +-p*prod^-(p+1)")
        # the Rbar identity carries the extra factor (-1)^{(p-1)/2}
        sign = raw * parity
        check = _as_sign(row[i].unit / predicted_rbar(p, i, S))
        if check != sign:
            raise TheoremViolation(f"p={p}, lambda={li}: sign bookkeeping inconsistent")
        if sign == -1 and sign_is_forced(p, li):
            raise TheoremViolation(f"p={p}, lambda={li}: sign must be + but is -")
        raw_signs.append(raw)
        signs.append(sign)
    M = PairingMatrix(p, S.lambdas, tuple(rows), tuple(raw_signs), tuple(signs))
    if not M.is_symmetric():
        raise TheoremViolation(f"pairing matrix for p={p} is not symmetric")
    return M


def rbar_matches_diagonal(M: PairingMatrix, Rbar: FpPoly) -> bool:
    return all(M.entries[i][i] == LeadingUnit(2, Rbar(li)) for i, li in enumerate(M.lambdas))
