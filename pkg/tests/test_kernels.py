import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from koopspec import kernels as K
from koopspec.exceptions import ContractViolation


class TestEval:
    def test_rbf_self_is_one(self):
        for ls in (0.1, 1.0, 7.5):
            assert K.eval(K.RBF(ls), 1.3, 1.3) == pytest.approx(1.0)

    def test_rbf_closed_form(self):
        # exp(-d^2/(2 s^2)) at d = s*sqrt(2) is exactly 1/e
        s = 0.7
        val = K.eval(K.RBF(s), 0.0, s * np.sqrt(2.0))
        assert val == pytest.approx(np.exp(-1.0), abs=1e-12)

    def test_hermite_spectral_at_origin(self):
        # independent oracle: f_{2k+1}(0)^2 = (2k-1)!!/(2k)!! exactly,
        # odd-index eigenfunctions vanish at 0
        expected = 0.0
        for k in range(0, 27):  # 2k+1 <= 53
            ratio = Fraction(1)
            for j in range(1, k + 1):
                ratio *= Fraction(2 * j - 1, 2 * j)
            expected += float(ratio) * math.exp(-4.0 * k)
        val = K.eval(K.HermiteSpectral(53, 1.0), 0.0, 0.0)
        assert val == pytest.approx(expected, rel=1e-12)

    def test_symmetry(self):
        for spec in (K.RBF(0.5), K.Matern(1.5, 0.3), K.Linear(),
                     K.HermiteSpectral(10, 0.7)):
            a = K.eval(spec, 0.3, -1.2)
            b = K.eval(spec, -1.2, 0.3)
            assert a == b

    def test_dimension_mismatch(self):
        with pytest.raises(ContractViolation):
            K.eval(K.Linear(), np.array([[1.0, 2.0]]), np.array([[1.0]]))

    def test_hermite_requires_1d(self):
        with pytest.raises(ContractViolation):
            K.gram(K.HermiteSpectral(5, 1.0), np.ones((3, 2)))


class TestHermiteEigenfunctions:
    def test_first_three(self):
        xs = np.linspace(-3, 3, 11)
        assert np.allclose(K.hermite_eigenfunction(1, xs), 1.0)
        assert np.allclose(K.hermite_eigenfunction(2, xs), xs)
        assert K.hermite_eigenfunction(3, 1.0) == pytest.approx(0.0, abs=1e-14)

    def test_h2_closed_form(self):
        xs = np.linspace(-2, 2, 9)
        assert np.allclose(
            K.hermite_eigenfunction(3, xs), (xs**2 - 1) / np.sqrt(2)
        )

    def test_orthonormal_under_standard_normal(self):
        nodes, w = np.polynomial.hermite_e.hermegauss(64)
        w = w / w.sum()
        f = K.hermite_features(nodes, 20)
        gram = f.T @ (w[:, None] * f)
        assert np.abs(gram - np.eye(20)).max() <= 1e-6

    def test_index_window(self):
        with pytest.raises(ContractViolation):
            K.hermite_eigenfunction(0, 0.0)
        with pytest.raises(ContractViolation):
            K.hermite_eigenfunction(151, 0.0)


class TestFeatureMap:
    @settings(max_examples=30, deadline=None)
    @given(st.floats(-3, 3), st.floats(-3, 3))
    def test_hermite_matches_feature_inner_product(self, x, xp):
        spec = K.HermiteSpectral(12, 0.8, K.swap_shift_permutation(2, 12), 0.9)
        fm = K.feature_map(spec)
        direct = K.eval(spec, x, xp)
        via_features = float((fm.features([[x]]) @ fm.features([[xp]]).T)[0, 0])
        assert direct == pytest.approx(via_features, abs=1e-10)

    def test_linear_features_are_coordinates(self):
        fm = K.feature_map(K.Linear(), d=3)
        pts = np.arange(6.0).reshape(2, 3)
        assert np.array_equal(fm.features(pts), pts)

    def test_rbf_has_no_feature_map(self):
        assert K.feature_map(K.RBF(1.0)) is None


class TestGram:
    def test_linear_example(self):
        g = K.gram(K.Linear(), np.array([[1.0], [2.0]]))
        assert np.array_equal(g, [[1.0, 2.0], [2.0, 4.0]])

    def test_rbf_unit_diagonal(self):
        rng = np.random.default_rng(0)
        g = K.gram(K.RBF(0.4), rng.standard_normal((7, 2)))
        assert np.allclose(np.diag(g), 1.0)

    @pytest.mark.parametrize(
        "spec",
        [K.RBF(0.5), K.Matern(1.5, 0.4), K.Matern(2.5, 1.1), K.Linear(),
         K.HermiteSpectral(9, 1.2)],
    )
    def test_psd_and_bitwise_symmetric(self, spec):
        rng = np.random.default_rng(42)
        d = 1 if isinstance(spec, K.HermiteSpectral) else 3
        x = rng.standard_normal((25, d))
        g = K.gram(spec, x)
        assert np.array_equal(g, g.T)  # exact mirror by construction
        vals = np.linalg.eigvalsh(g)
        assert vals.min() >= -1e-10 * np.trace(g)

    def test_cross_gram_shape(self):
        g = K.gram(K.RBF(1.0), np.zeros((4, 2)), np.zeros((6, 2)))
        assert g.shape == (4, 6)


class TestPresets:
    def test_swap_shift_permutation_r3(self):
        perm = K.swap_shift_permutation(3, 8)
        assert perm == (6, 5, 4, 1, 2, 3, 7, 8)

    def test_good_kernel_weights(self):
        w = K.good_kernel().weights()
        assert np.allclose(w, np.exp(-np.arange(53.0)))

    def test_bad_ugly_exponents(self):
        assert K.bad_kernel(3).exponent == pytest.approx(1 / 9)
        assert K.ugly_kernel(3).exponent == pytest.approx(9.0)
        assert K.bad_kernel(3).permutation == K.ugly_kernel(3).permutation

    def test_base_rate_scales_weights(self):
        spec = K.HermiteSpectral(4, 1.0, None, 0.5)
        assert np.allclose(spec.weights(), np.exp(-0.5 * np.arange(4.0)))

    def test_invalid_permutation(self):
        with pytest.raises(ContractViolation):
            K.HermiteSpectral(3, 1.0, (1, 1, 2))


class TestStringForm:
    @pytest.mark.parametrize(
        "spec",
        [K.Linear(), K.RBF(0.175), K.Matern(2.5, 0.3), K.good_kernel(),
         K.bad_kernel(3), K.ugly_kernel(4), K.HermiteSpectral(12, 0.5, None, 2.0)],
    )
    def test_round_trip(self, spec):
        assert K.kernel_from_string(K.kernel_to_string(spec)) == spec

    def test_parse_errors(self):
        for bad in ("rbf", "rbf(a)", "nope(1)", "matern(1.5)", ""):
            with pytest.raises(ContractViolation):
                K.kernel_from_string(bad)
