import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lambda_lab import modpoly as mp
from lambda_lab.modpoly import (
    BivarIntPoly,
    CongruenceError,
    InsufficientPrecisionError,
    ModpolyInconsistency,
    PrimeBudgetExhausted,
    SolverOptions,
    UnivarIntPoly,
    compute_modpoly,
    diag_polynomial,
    kronecker_reduction,
    nullspace_mod,
    r_polynomial,
    relation_residual,
    verify_degrees,
    verify_kronecker,
    verify_symmetry,
)
from conftest import get_modpoly
from oracles import poly_substitute
from golden import F3_GOLDEN, F5_GOLDEN

F3 = BivarIntPoly(3, F3_GOLDEN)
F5 = BivarIntPoly(5, F5_GOLDEN)


class TestGolden:
    def test_f3_exact(self):
        assert get_modpoly(3).coeffs == F3_GOLDEN

    def test_f5_golden_terms(self):
        F = get_modpoly(5)
        for ij, c in F5_GOLDEN.items():
            assert F.coeff(*ij) == c, ij

    def test_f5_sample_coefficients(self):
        F = get_modpoly(5)
        assert F.coeff(5, 5) == -65536
        assert F.coeff(3, 3) == 691180
        assert F.coeff(5, 1) == -3590

    def test_golden_f3_satisfies_relation(self):
        assert relation_residual(F3, 60).is_zero()

    def test_more_precision_same_answer(self):
        F = compute_modpoly(5, SolverOptions(precision=80))
        assert F == get_modpoly(5)

    def test_parallel_same_answer(self):
        assert compute_modpoly(5, SolverOptions(jobs=2)) == get_modpoly(5)


class TestStructure:
    @pytest.mark.parametrize("F", [F3, F5], ids=["F3", "F5"])
    def test_golden_symmetric(self, F):
        assert verify_symmetry(F)

    def test_asymmetric_rejected(self):
        assert not verify_symmetry(BivarIntPoly(3, {(1, 0): 1, (0, 1): 2}))

    @pytest.mark.parametrize("F", [F3, F5], ids=["F3", "F5"])
    def test_golden_kronecker(self, F):
        assert verify_kronecker(F)

    def test_kronecker_reduction_values(self):
        assert F3.reduce(3) == {(0, 4): 1, (1, 1): 2, (3, 3): 2, (4, 0): 1}
        assert F5.coeff(5, 5) % 5 == 4 and F5.coeff(5, 1) % 5 == 0
        assert kronecker_reduction(3) == F3.reduce(3)

    def test_missing_cross_terms_rejected(self):
        assert not verify_kronecker(BivarIntPoly(3, {(4, 0): 1, (0, 4): 1}))

    @pytest.mark.parametrize("p", [3, 5, 7, 11])
    def test_computed_structure(self, p):
        F = get_modpoly(p)
        assert verify_symmetry(F) and verify_kronecker(F) and verify_degrees(F)
        assert F.coeff(p + 1, 0) == 1 and F.coeff(0, p + 1) == 1


class TestR:
    def test_f3_leading(self):
        R = r_polynomial(F3)
        assert R.degree == 12
        assert R.coeffs[-1] == -85
        assert R.coeffs[0] == 0

    def test_f5_degree(self):
        assert r_polynomial(F5).degree == 30

    @pytest.mark.parametrize("p", [3, 5, 7])
    def test_matches_dense_substitution(self, p):
        F = get_modpoly(p)
        sub, _ = poly_substitute(F.coeffs, p)
        assert [c * p for c in r_polynomial(F).coeffs] == sub

    def test_non_divisible_rejected(self):
        with pytest.raises(CongruenceError):
            r_polynomial(BivarIntPoly(3, {(4, 0): 1, (0, 4): 1, (1, 0): 1}))


class TestDiag:
    def test_f3_values(self):
        f = diag_polynomial(F3)
        assert f.degree == 6
        assert f.coeffs[6] == -256 and f.coeffs[5] == 768
        assert f(0) == 0
        # -(X^3 - X)^2 = -X^6 + 2X^4 - X^2
        assert f.reduce(3) == [0, 0, 2, 0, 2, 0, 2]

    @pytest.mark.parametrize("p", [3, 5, 7])
    def test_matches_dense_substitution(self, p):
        F = get_modpoly(p)
        _, diag = poly_substitute(F.coeffs, p)
        assert list(diag_polynomial(F).coeffs) == diag

    def test_f5_mod_5(self):
        # -(X^5 - X)^2 = -X^10 + 2X^6 - X^2
        expect = [0] * 11
        expect[10], expect[6], expect[2] = 4, 2, 4
        assert diag_polynomial(F5).reduce(5) == expect

    def test_bad_input_rejected(self):
        with pytest.raises(CongruenceError):
            diag_polynomial(BivarIntPoly(3, {(4, 0): 1, (0, 4): 1}))


class TestUnivar:
    def test_horner(self):
        f = UnivarIntPoly((1, 2, 3))
        assert f(2) == 17 and f.derivative() == UnivarIntPoly((2, 6))

    def test_trailing_zeros(self):
        assert UnivarIntPoly((1, 0, 0)).degree == 0


class TestNullspace:
    ELL = 2147483629  # below 2^31

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 12), st.integers(0, 2**32), st.integers(1, 3))
    def test_planted_kernel(self, n, seed, k):
        rng = np.random.default_rng(seed)
        ell = self.ELL
        rows = n + 4
        # rank n - k: random rows times a random matrix of rank n - k
        B = rng.integers(0, ell, size=(n - k if n > k else 1, n))
        C = rng.integers(0, 1000, size=(rows, B.shape[0]))
        M = np.array(
            [[sum(int(C[r, t]) * int(B[t, c]) for t in range(B.shape[0])) % ell for c in range(n)] for r in range(rows)],
            dtype=np.int64,
        )
        basis = nullspace_mod(M, ell)
        assert len(basis) >= n - B.shape[0]
        for v in basis:
            assert all(
                sum(int(M[r, c]) * int(v[c]) for c in range(n)) % ell == 0 for r in range(rows)
            )
            assert any(int(x) for x in v)

    def test_full_rank(self):
        M = np.eye(4, dtype=np.int64)
        assert nullspace_mod(M, 7) == []

    def test_one_dimensional(self):
        M = np.array([[1, 2, 3], [2, 4, 6], [0, 1, 1]], dtype=np.int64)
        (v,) = nullspace_mod(M, 101)
        assert [int(x) for x in (M @ v) % 101] == [0, 0, 0]


class TestErrors:
    def test_not_prime(self):
        with pytest.raises(ValueError):
            compute_modpoly(9)

    def test_low_precision(self):
        with pytest.raises(InsufficientPrecisionError):
            compute_modpoly(5, SolverOptions(precision=20))

    def test_budget(self):
        with pytest.raises(PrimeBudgetExhausted):
            compute_modpoly(5, SolverOptions(prime_budget=1))

    def test_exact_check_catches_bad_vector(self, monkeypatch):
        real = mp._solve_one_prime

        def corrupt(args):
            ell, v, dim = real(args)
            if v is not None:
                v = v.copy()
                v[1] = (v[1] + 1) % ell
            return ell, v, dim

        monkeypatch.setattr(mp, "_solve_one_prime", corrupt)
        with pytest.raises(ModpolyInconsistency):
            compute_modpoly(3)


@pytest.mark.parametrize("p", [3, 5, 7])
def test_deterministic(p):
    assert compute_modpoly(p) == compute_modpoly(p)
