"""The p-th modular polynomial for the Legendre lambda invariant.

F_p(X, Y) is recovered from the relation F_p(lambda(q), lambda(q^p)) = 0:
the (p+2)^2 monomial series lambda^i * lambda(q^p)^j are reduced modulo a
sequence of ~31-bit primes, the one-dimensional kernel of each coefficient
matrix is found by Gaussian elimination, and the integer coefficients are
rebuilt by CRT.  Nothing is returned before the relation has been checked
exactly over the integers.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator

import gmpy2
import numpy as np

from .series import IntSeries, lambda_qexp, series_mul, substitute_qpow

log = logging.getLogger(__name__)

# residues stay below 2^31 so products fit in int64
PRIME_CEILING = 2**31


class ModpolyError(ArithmeticError):
    pass


class InsufficientPrecisionError(ModpolyError):
    """The kernel is not one-dimensional at the working series precision."""


class PrimeBudgetExhausted(ModpolyError):
    pass


class ModpolyInconsistency(ModpolyError):
    """The reconstructed polynomial failed exact verification."""


class CongruenceError(ModpolyError):
    """A congruence that holds for the true F_p fails for the input."""


def is_prime(n: int) -> bool:
    return n >= 2 and bool(gmpy2.is_prime(n))


# ---------------------------------------------------------------------------
# polynomials


@dataclass(frozen=True)
class UnivarIntPoly:
    """Dense integer polynomial, lowest degree first."""

    coeffs: tuple[int, ...]

    def __post_init__(self):
        c = list(self.coeffs)
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> UnivarIntPoly:
        return UnivarIntPoly(tuple(k * c for k, c in enumerate(self.coeffs) if k))

    def reduce(self, m: int) -> list[int]:
        """Coefficients modulo m (dense, lowest first, trailing zeros dropped)."""
        out = [c % m for c in self.coeffs]
        while out and out[-1] == 0:
            out.pop()
        return out

    def __repr__(self):
        return f"UnivarIntPoly(degree={self.degree})"


@dataclass(frozen=True)
class BivarIntPoly:
    """Sparse F(X, Y) = sum coeffs[(i, j)] X^i Y^j at level p."""

    p_level: int
    coeffs: dict[tuple[int, int], int] = field(hash=False)

    def __post_init__(self):
        object.__setattr__(
            self, "coeffs", {k: v for k, v in sorted(self.coeffs.items()) if v}
        )

    def coeff(self, i: int, j: int) -> int:
        return self.coeffs.get((i, j), 0)

    def degree_x(self) -> int:
        return max((i for i, _ in self.coeffs), default=-1)

    def degree_y(self) -> int:
        return max((j for _, j in self.coeffs), default=-1)

    def __len__(self):
        return len(self.coeffs)

    def evaluate(self, x, y):
        """F(x, y) for any operands supporting +, * and integer scaling."""
        rows: dict[int, dict[int, int]] = {}
        for (i, j), c in self.coeffs.items():
            rows.setdefault(i, {})[j] = c
        ypows = [1]
        for _ in range(self.degree_y()):
            ypows.append(ypows[-1] * y)
        acc = 0
        for i in range(self.degree_x(), -1, -1):
            row = 0
            for j, c in rows.get(i, {}).items():
                row = row + ypows[j] * c
            acc = acc * x + row
        return acc

    def reduce(self, m: int) -> dict[tuple[int, int], int]:
        return {k: v % m for k, v in self.coeffs.items() if v % m}

    def __repr__(self):
        return f"BivarIntPoly(p={self.p_level}, terms={len(self.coeffs)})"


# ---------------------------------------------------------------------------
# structural checks


def verify_symmetry(F: BivarIntPoly) -> bool:
    return all(F.coeff(j, i) == c for (i, j), c in F.coeffs.items())


def kronecker_reduction(p: int) -> dict[tuple[int, int], int]:
    """(X^p - Y)(X - Y^p) over F_p, as a coefficient map."""
    return {(p + 1, 0): 1, (p, p): p - 1, (1, 1): p - 1, (0, p + 1): 1}


def verify_kronecker(F: BivarIntPoly) -> bool:
    return F.reduce(F.p_level) == kronecker_reduction(F.p_level)


def verify_degrees(F: BivarIntPoly) -> bool:
    """Degree p+1 in each variable with unit leading monomials X^{p+1}, Y^{p+1}."""
    d = F.p_level + 1
    return (
        F.degree_x() == d
        and F.degree_y() == d
        and F.coeff(d, 0) == 1
        and F.coeff(0, d) == 1
    )


def r_polynomial(F: BivarIntPoly) -> UnivarIntPoly:
    """R(X) = F(X, X^p) / p."""
    p = F.p_level
    dense: dict[int, int] = {}
    for (i, j), c in F.coeffs.items():
        dense[i + p * j] = dense.get(i + p * j, 0) + c
    top = max(dense, default=0)
    out = []
    for k in range(top + 1):
        c = dense.get(k, 0)
        if c % p:
            raise CongruenceError(f"coefficient of X^{k} in F(X, X^p) is {c}, not divisible by {p}")
        out.append(c // p)
    return UnivarIntPoly(tuple(out))


def diag_polynomial(F: BivarIntPoly) -> UnivarIntPoly:
    """f(X) = F(X, X), checked against f = -(X^p - X)^2 mod p."""
    p = F.p_level
    dense: dict[int, int] = {}
    for (i, j), c in F.coeffs.items():
        dense[i + j] = dense.get(i + j, 0) + c
    f = UnivarIntPoly(tuple(dense.get(k, 0) for k in range(max(dense, default=0) + 1)))
    # -(X^p - X)^2 = -X^{2p} + 2X^{p+1} - X^2
    expected = [0] * (2 * p + 1)
    expected[2 * p] = p - 1
    expected[p + 1] = 2 % p
    expected[2] = p - 1
    if f.reduce(p) != expected:
        raise CongruenceError(f"F_{p}(X, X) is not congruent to -(X^p - X)^2 mod {p}")
    return f


# ---------------------------------------------------------------------------
# linear algebra modulo a prime


def _dot_mod(A: np.ndarray, v: np.ndarray, ell: int) -> np.ndarray:
    """A @ v mod ell without int64 overflow (entries < 2^31, length < 2^15)."""
    lo = v & 0xFFFF
    hi = v >> 16
    return ((A @ hi) % ell * 65536 + (A @ lo)) % ell


def nullspace_mod(M: np.ndarray, ell: int) -> list[np.ndarray]:
    """Basis of {v : M v = 0 mod ell}: row echelon form, then back-substitution."""
    A = np.array(M, dtype=np.int64) % ell
    nrows, ncols = A.shape
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.flatnonzero(A[r:, c])
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            A[[r, k]] = A[[k, r]]
        inv = pow(int(A[r, c]), -1, ell)
        A[r, c:] = A[r, c:] * inv % ell
        rows = r + 1 + np.flatnonzero(A[r + 1 :, c])
        if rows.size:
            A[rows, c:] = (A[rows, c:] - np.outer(A[rows, c], A[r, c:]) % ell) % ell
        pivots.append(c)
        r += 1
    pivot_set = set(pivots)
    U = A[: len(pivots)]
    basis = []
    for f in range(ncols):
        if f in pivot_set:
            continue
        v = np.zeros(ncols, dtype=np.int64)
        v[f] = 1
        for row in range(len(pivots) - 1, -1, -1):
            pc = pivots[row]
            if pc > f:
                continue
            s = int(_dot_mod(U[row, pc + 1 :], v[pc + 1 :], ell))
            v[pc] = (-s) % ell
        basis.append(v)
    return basis


# ---------------------------------------------------------------------------
# the solver


@dataclass
class SolverOptions:
    precision: int | None = None  # series terms; default (p+2)^2 + 16
    prime_budget: int = 64
    confirm_primes: int = 2  # extra primes that must leave the CRT lift unchanged
    jobs: int = 1

    def series_precision(self, p: int) -> int:
        return self.precision if self.precision is not None else (p + 2) ** 2 + 16


def monomial_index(p: int) -> list[tuple[int, int]]:
    d = p + 2
    return [(i, j) for i in range(d) for j in range(d)]


def _prime_stream(p: int) -> Iterator[int]:
    ell = PRIME_CEILING
    while True:
        ell = int(gmpy2.prev_prime(ell)) if hasattr(gmpy2, "prev_prime") else _prev_prime(ell)
        if ell != p:
            yield ell


def _prev_prime(n: int) -> int:
    n -= 1
    while not is_prime(n):
        n -= 1
    return n


def _mod_matrix(lam_pows: list[list[int]], p: int, prec: int, ell: int) -> np.ndarray:
    """Rows: q^0..q^{prec-1}; columns: lambda^i * lambda(q^p)^j, i-major."""
    d = p + 2
    L = np.array([[c % ell for c in row] for row in lam_pows], dtype=np.int64)
    M = np.zeros((prec, d * d), dtype=np.int64)
    for j in range(d):
        # lambda(q^p)^j is lambda^j with exponents scaled by p
        block = np.zeros((d, prec), dtype=np.int64)
        for k in range(0, (prec - 1) // p + 1):
            c = int(L[j, k])
            if not c:
                continue
            shift = k * p
            block[:, shift:] = (block[:, shift:] + L[:, : prec - shift] * c) % ell
        M[:, j::d] = block.T
    return M


def _solve_one_prime(args) -> tuple[int, np.ndarray | None, int]:
    lam_pows, p, prec, ell = args
    M = _mod_matrix(lam_pows, p, prec, ell)
    basis = nullspace_mod(M, ell)
    if len(basis) != 1:
        return ell, None, len(basis)
    v = basis[0]
    d = p + 2
    lead = int(v[(p + 1) * d + 0])
    if lead == 0:
        return ell, None, 1
    v = v * pow(lead, -1, ell) % ell
    return ell, v, 1


def _lambda_powers(p: int, prec: int) -> list[list[int]]:
    lam = lambda_qexp(prec)
    out = []
    acc = IntSeries.one()
    for _ in range(p + 2):
        out.append(acc.dense(0, prec))
        acc = series_mul(acc, lam).truncate(prec)
    return out


def relation_residual(F: BivarIntPoly, prec: int) -> IntSeries:
    """F(lambda(q), lambda(q^p)) computed exactly to O(q^prec)."""
    p = F.p_level
    lam = lambda_qexp(prec)
    mu = substitute_qpow(lam, p)
    by_j: dict[int, dict[int, int]] = {}
    for (i, j), c in F.coeffs.items():
        by_j.setdefault(j, {})[i] = c
    lam_pows = [IntSeries.one()]
    for _ in range(F.degree_x()):
        lam_pows.append(series_mul(lam_pows[-1], lam).truncate(prec))
    total = IntSeries.zero(prec)
    # Horner in mu: ((S_d) mu + S_{d-1}) mu + ...
    for j in range(F.degree_y(), -1, -1):
        s = IntSeries.zero(prec)
        for i, c in by_j.get(j, {}).items():
            s = s + lam_pows[i] * c
        total = series_mul(total, mu).truncate(prec) + s
    return total.truncate(prec)


def compute_modpoly(p: int, opts: SolverOptions | None = None) -> BivarIntPoly:
    if not (p >= 3 and is_prime(p)):
        raise ValueError(f"p must be an odd prime, got {p}")
    opts = opts or SolverOptions()
    prec = opts.series_precision(p)
    cols = monomial_index(p)
    lam_pows = _lambda_powers(p, prec)

    residues: list[int] | None = None
    modulus = 1
    lifted: list[int] | None = None
    stable = 0
    bad_primes = 0
    used = 0
    primes = _prime_stream(p)
    pool = ProcessPoolExecutor(opts.jobs) if opts.jobs > 1 else None
    try:
        while True:
            batch = [next(primes) for _ in range(max(1, opts.jobs))]
            tasks = [(lam_pows, p, prec, ell) for ell in batch]
            results = list(pool.map(_solve_one_prime, tasks)) if pool else map(_solve_one_prime, tasks)
            for ell, v, dim in results:
                used += 1
                if v is None:
                    bad_primes += 1
                    log.debug("prime %d rejected (kernel dimension %d)", ell, dim)
                    if dim > 1 and bad_primes >= 3:
                        raise InsufficientPrecisionError(
                            f"kernel dimension {dim} at series precision {prec} for p={p}"
                        )
                    if dim == 0:
                        raise ModpolyInconsistency(
                            f"no relation of bidegree ({p + 1}, {p + 1}) modulo {ell}"
                        )
                    continue
                vals = [int(x) for x in v]
                if residues is None:
                    residues, modulus = vals, ell
                else:
                    # x = r + m * t with t = (v - r) / m mod ell
                    minv = pow(modulus, -1, ell)
                    residues = [
                        r + modulus * (((x - r) * minv) % ell) for r, x in zip(residues, vals)
                    ]
                    modulus *= ell
                half = modulus // 2
                new_lift = [r - modulus if r > half else r for r in residues]
                if new_lift == lifted:
                    stable += 1
                else:
                    stable = 0
                lifted = new_lift
                if stable >= opts.confirm_primes:
                    break
            else:
                if used >= opts.prime_budget:
                    raise PrimeBudgetExhausted(
                        f"CRT did not stabilise within {opts.prime_budget} primes for p={p}"
                    )
                continue
            break
    finally:
        if pool:
            pool.shutdown()

    log.info("p=%d: CRT stable after %d primes (%d bits)", p, used, modulus.bit_length())
    F = BivarIntPoly(p, {ij: c for ij, c in zip(cols, lifted) if c})
    resid = relation_residual(F, prec)
    if not resid.is_zero():
        raise ModpolyInconsistency(
            f"F_{p}(lambda(q), lambda(q^{p})) has nonzero term at q^{resid.valuation}"
        )
    return F
