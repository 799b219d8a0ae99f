import numpy as np
import pytest

from koopspec.exceptions import (
    ContractViolation,
    DegeneratePencil,
    NotPositiveSemidefinite,
)
from koopspec.numerics import (
    cholesky_psd,
    eig_small,
    gen_eig_psd,
    sym_eig,
    sym_eig_top,
    top_symmetric_eigs,
)


class TestSymEig:
    def test_identity(self):
        vals, vecs = sym_eig(np.eye(2))
        assert np.allclose(vals, [1.0, 1.0])

    def test_diagonal(self):
        vals, vecs = sym_eig(np.diag([3.0, 1.0]))
        assert np.allclose(vals, [3.0, 1.0])
        assert np.allclose(np.abs(vecs), np.eye(2))

    def test_classic_2x2(self):
        vals, vecs = sym_eig(np.array([[2.0, 1.0], [1.0, 2.0]]))
        assert np.allclose(vals, [3.0, 1.0])
        s = 1 / np.sqrt(2)
        assert np.allclose(np.abs(vecs[:, 0]), [s, s])
        assert np.allclose(np.abs(vecs[:, 1]), [s, s])

    @pytest.mark.parametrize("n", [5, 40, 200])
    def test_reconstruction(self, n):
        rng = np.random.default_rng(n)
        a = rng.standard_normal((n, n))
        a = (a + a.T) / 2
        vals, vecs = sym_eig(a)
        recon = vecs @ np.diag(vals) @ vecs.T
        assert np.linalg.norm(a - recon) <= 1e-7 * np.linalg.norm(a)
        assert np.all(np.diff(vals) <= 1e-12)
        assert np.allclose(vecs.T @ vecs, np.eye(n), atol=1e-8)

    def test_rejects_nonsquare(self):
        with pytest.raises(ContractViolation):
            sym_eig(np.ones((2, 3)))

    def test_rejects_asymmetric(self):
        with pytest.raises(ContractViolation):
            sym_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_rejects_nonfinite(self):
        with pytest.raises(ContractViolation):
            sym_eig(np.array([[np.nan, 0.0], [0.0, 1.0]]))


class TestTopEigs:
    def test_matches_full_decomposition(self):
        rng = np.random.default_rng(1)
        f = rng.standard_normal((60, 20))
        a = f @ f.T / 20
        a = (a + a.T) / 2
        full_vals, _ = sym_eig(a)
        vals, vecs = sym_eig_top(a, 5)
        assert np.allclose(vals, full_vals[:5], atol=1e-10)
        assert np.allclose(a @ vecs, vecs * vals, atol=1e-8)

    def test_lanczos_path_matches_dense(self):
        rng = np.random.default_rng(2)
        f = rng.standard_normal((1200, 40))
        a = f @ f.T / 40
        a = (a + a.T) / 2
        dense_vals, _ = sym_eig_top(a, 4)
        vals, vecs = top_symmetric_eigs(a, 1200, 4)
        assert np.allclose(vals, dense_vals, rtol=1e-9, atol=1e-11)
        assert np.allclose(a @ vecs, vecs * vals, atol=1e-7)


class TestGenEigPsd:
    def test_identity_b_reduces_to_sym_eig(self):
        a = np.diag([2.0, 1.0])
        vals, vecs = gen_eig_psd(a, np.eye(2), 2)
        assert np.allclose(vals, [2.0, 1.0], atol=1e-10)

    def test_a_equals_b(self):
        rng = np.random.default_rng(0)
        m = rng.standard_normal((4, 4))
        b = m @ m.T + np.eye(4)
        vals, _ = gen_eig_psd(b, b, 1)
        assert abs(vals[0] - 1.0) < 1e-10

    def test_hand_solved_pencil(self):
        # det(A - s^2 B) = 0 for A = diag(4,1), B = diag(2,1): s^2 in {2, 1}
        vals, vecs = gen_eig_psd(np.diag([4.0, 1.0]), np.diag([2.0, 1.0]), 2)
        assert np.allclose(vals, [2.0, 1.0], atol=1e-12)
        for s2, w in zip(vals, vecs.T):
            assert np.allclose(
                np.diag([4.0, 1.0]) @ w, s2 * np.diag([2.0, 1.0]) @ w, atol=1e-10
            )

    def test_random_pencil_residuals(self):
        rng = np.random.default_rng(5)
        f = rng.standard_normal((30, 30))
        a = f @ f.T / 30
        g = rng.standard_normal((30, 30))
        b = g @ g.T / 30 + 0.5 * np.eye(30)
        vals, vecs = gen_eig_psd(a, b, 7)
        for s2, w in zip(vals, vecs.T):
            res = np.linalg.norm(a @ w - s2 * b @ w)
            assert res <= 1e-8 * np.linalg.norm(a @ w) + 1e-12

    def test_reduces_to_sym_eig_property(self):
        rng = np.random.default_rng(9)
        a = rng.standard_normal((12, 12))
        a = a @ a.T / 12
        ref, _ = sym_eig(a)
        vals, _ = gen_eig_psd(a, np.eye(12), 12)
        assert np.allclose(vals, np.maximum(ref, 0), atol=1e-10)

    def test_singular_b_raises(self):
        with pytest.raises(DegeneratePencil):
            gen_eig_psd(np.eye(2), -np.eye(2), 1)


class TestEigSmall:
    def test_scalar(self):
        res = eig_small(np.array([[2.5]]))
        assert res.values[0] == pytest.approx(2.5)

    def test_rotation_gives_imaginary_pair(self):
        res = eig_small(np.array([[0.0, 1.0], [-1.0, 0.0]]))
        assert sorted(np.round(res.values.imag, 12)) == [-1.0, 1.0]
        assert np.allclose(res.values.real, 0.0, atol=1e-12)

    def test_symmetric_real(self):
        res = eig_small(np.array([[2.0, 1.0], [1.0, 2.0]]))
        assert np.allclose(sorted(res.values.real), [1.0, 3.0])
        assert np.abs(res.values.imag).max() <= 1e-9 * 3.0

    def test_left_right_residuals(self):
        rng = np.random.default_rng(3)
        a = rng.standard_normal((8, 8))
        res = eig_small(a)
        for lam, v, u in zip(res.values, res.right.T, res.left.T):
            assert np.linalg.norm(a @ v - lam * v) <= 1e-8 * np.abs(a).max()
            assert np.linalg.norm(u.conj() @ a - lam * u.conj()) <= 1e-8 * np.abs(a).max()

    def test_sorted_by_modulus(self):
        res = eig_small(np.diag([1.0, -3.0, 2.0]))
        assert np.all(np.diff(np.abs(res.values)) <= 1e-12)

    def test_defective_flagged(self):
        res = eig_small(np.array([[1.0, 1.0], [0.0, 1.0]]))  # Jordan block
        assert res.defective


class TestCholeskyPsd:
    def test_identity(self):
        factor, eps = cholesky_psd(np.eye(2))
        assert eps == 0.0
        assert np.allclose(factor, np.eye(2))

    def test_hand_factorization(self):
        factor, eps = cholesky_psd(np.array([[4.0, 2.0], [2.0, 2.0]]))
        assert eps == 0.0
        assert np.allclose(factor, [[2.0, 0.0], [1.0, 1.0]])

    def test_rank_deficient_needs_jitter(self):
        a = np.ones((2, 2))
        factor, eps = cholesky_psd(a)
        assert eps > 0.0
        assert np.allclose(factor @ factor.T, a + eps * np.eye(2), atol=1e-12)

    def test_all_jitters_fail(self):
        with pytest.raises(NotPositiveSemidefinite):
            cholesky_psd(-np.eye(3))
