import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from beastflex.linalg import (HermitianPencil, IndefiniteB, SingularShift, factor_shifted,
                              hermitian_definite_eig, solve_shifted, svd_with_values)


def random_hermitian(n, rng, complex_valued=True):
    G = rng.standard_normal((n, n))
    if complex_valued:
        G = G + 1j * rng.standard_normal((n, n))
    return 0.5 * (G + G.conj().T)


def random_hpd(n, rng):
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return G @ G.conj().T + n * np.eye(n)


class TestPencil:
    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            HermitianPencil(np.array([[0.0, 1.0], [2.0, 0.0]]))

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            HermitianPencil(np.zeros((2, 3)))

    def test_rejects_indefinite_b(self):
        with pytest.raises(IndefiniteB):
            HermitianPencil(np.eye(2), np.diag([1.0, -1.0]))

    def test_identity_b(self):
        p = HermitianPencil(np.eye(3))
        assert p.identity_b and p.is_real and p.n == 3
        X = np.ones((3, 2))
        assert p.apply_b(X) is X

    def test_norm_estimate(self):
        p = HermitianPencil(np.diag([1.0, -5.0]), np.diag([2.0, 3.0]))
        assert p.norm_estimate() == pytest.approx((5.0, 3.0))


class TestShiftedSolve:
    def test_diagonal(self):
        p = HermitianPencil(np.diag([1.0, 2.0, 3.0]))
        X = factor_shifted(p, 1j).solve(np.array([[0.0], [1.0], [0.0]]))
        assert_allclose(X[:, 0], [0.0, 1.0 / (1j - 2.0), 0.0], atol=1e-16)

    def test_singular_shift(self):
        p = HermitianPencil(np.diag([1.0, 2.0]))
        with pytest.raises(SingularShift) as info:
            factor_shifted(p, 2.0)
        assert info.value.z == 2.0

    def test_backward_error(self):
        rng = np.random.default_rng(3)
        p = HermitianPencil(random_hermitian(20, rng))
        Y = rng.standard_normal((20, 4))
        z = 0.3 + 0.1j
        X = solve_shifted(factor_shifted(p, z), Y)
        R = (z * np.eye(20) - p.A) @ X - Y
        assert np.linalg.norm(R) / np.linalg.norm(Y) <= 1e-10

    def test_adjoint_is_conjugate_node(self):
        rng = np.random.default_rng(4)
        p = HermitianPencil(random_hermitian(12, rng), random_hpd(12, rng))
        Y = rng.standard_normal((12, 3)) + 1j * rng.standard_normal((12, 3))
        z = 0.2 + 0.5j
        via_adjoint = factor_shifted(p, z).solve(Y, adjoint=True)
        direct = factor_shifted(p, np.conj(z)).solve(Y)
        assert_allclose(via_adjoint, direct, rtol=1e-11, atol=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(n=st.integers(2, 64), seed=st.integers(0, 2 ** 32 - 1), general_b=st.booleans(),
           zr=st.floats(-2.0, 2.0), zi=st.floats(0.05, 2.0))
    def test_backward_error_random_pencils(self, n, seed, general_b, zr, zi):
        rng = np.random.default_rng(seed)
        A = random_hermitian(n, rng)
        B = random_hpd(n, rng) if general_b else None
        p = HermitianPencil(A, B)
        Y = rng.standard_normal((n, 3))
        z = complex(zr, zi)
        X = factor_shifted(p, z).solve(Y)
        M = z * (np.eye(n) if B is None else B) - A
        R = M @ X - p.apply_b(Y)
        scale = np.linalg.norm(M, 2) * np.linalg.norm(X) + np.linalg.norm(p.apply_b(Y))
        assert np.linalg.norm(R) <= 1e-10 * scale


class TestSVD:
    def test_identity(self):
        _, s = svd_with_values(np.eye(3))
        assert_allclose(s, [1.0, 1.0, 1.0])

    def test_duplicate_columns(self):
        v = np.random.default_rng(0).standard_normal(6)
        _, s = svd_with_values(np.column_stack([v, v]))
        assert s[1] <= 1e-14 * s[0]

    def test_axis_aligned(self):
        _, s = svd_with_values(np.array([[3.0, 0.0], [0.0, 4.0]]))
        assert_allclose(s, [4.0, 3.0])

    def test_empty(self):
        with pytest.raises(ValueError):
            svd_with_values(np.zeros((3, 0)))

    @settings(max_examples=30, deadline=None)
    @given(m=st.integers(1, 30), k=st.integers(1, 10), seed=st.integers(0, 1000))
    def test_reconstruction(self, m, k, seed):
        rng = np.random.default_rng(seed)
        U = rng.standard_normal((m, k)) + 1j * rng.standard_normal((m, k))
        Q, s = svd_with_values(U)
        # with Q orthonormal, Q^H U carries the remaining factor
        R = Q @ (Q.conj().T @ U)
        assert np.linalg.norm(U - R) <= 1e-12 * np.linalg.norm(U)
        assert np.all(np.diff(s) <= 0) and np.all(s >= 0)
        assert_allclose(s, np.linalg.svd(U, compute_uv=False), rtol=1e-12)


class TestEig:
    def test_toy_diagonal(self):
        d = np.round(-2.99 + 0.1 * np.arange(100), 2)
        lam, X = hermitian_definite_eig(HermitianPencil(np.diag(d)))
        assert_allclose(lam, d, rtol=0, atol=1e-14)

    def test_identity(self):
        lam, _ = hermitian_definite_eig(HermitianPencil(np.eye(4), np.eye(4)))
        assert_allclose(lam, np.ones(4))

    def test_2x2(self):
        lam, _ = hermitian_definite_eig(HermitianPencil(np.array([[0.0, 1.0], [1.0, 0.0]])))
        assert_allclose(lam, [-1.0, 1.0])

    def test_b_orthonormal(self):
        rng = np.random.default_rng(5)
        p = HermitianPencil(random_hermitian(15, rng), random_hpd(15, rng))
        lam, X = hermitian_definite_eig(p)
        assert_allclose(X.conj().T @ p.B @ X, np.eye(15), atol=1e-12)
        assert_allclose(p.A @ X, p.B @ X * lam, atol=1e-10)

    @settings(max_examples=30, deadline=None)
    @given(a=st.lists(st.floats(-10, 10), min_size=1, max_size=12), seed=st.integers(0, 100))
    def test_diagonal_pencils(self, a, seed):
        a = np.array(a)
        b = np.random.default_rng(seed).uniform(0.5, 2.0, size=len(a))
        lam, _ = hermitian_definite_eig(HermitianPencil(np.diag(a), np.diag(b)))
        assert_allclose(lam, np.sort(a / b), rtol=1e-12, atol=1e-12)
