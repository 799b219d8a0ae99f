import numpy as np
import pytest

from koopspec import PotentialSpec, generator_spectrum, l2pi_compare, ou_spectrum
from koopspec.exceptions import ContractViolation
from koopspec.reference import write_reference_csv


class TestOuSpectrum:
    def test_eigenvalues(self):
        ref = ou_spectrum(3, lag_time=1.0)
        assert np.allclose(ref.eigenvalues, [1.0, np.exp(-1.0), np.exp(-2.0)],
                           atol=1e-15)

    def test_lag_scaling(self):
        ref = ou_spectrum(4, lag_time=0.5)
        assert np.allclose(ref.eigenvalues, np.exp(-0.5 * np.arange(4)))

    def test_first_eigenfunctions(self):
        ref = ou_spectrum(3)
        xs = np.linspace(-2, 2, 7)
        assert np.allclose(ref.evaluate(1, xs), 1.0)
        assert np.allclose(ref.evaluate(2, xs), xs)

    def test_quadrature_orthonormality(self):
        ref = ou_spectrum(10)
        f = ref.eigenfunction_values
        gram = f.T @ (ref.weights[:, None] * f)
        assert np.abs(gram - np.eye(10)).max() <= 1e-6

    def test_weights_normalized(self):
        ref = ou_spectrum(2)
        assert ref.weights.sum() == pytest.approx(1.0, abs=1e-12)


class TestGeneratorSpectrum:
    QUAD = PotentialSpec("quadratic", theta=1.0, beta=1.0)
    WELL = PotentialSpec("triple_well", beta=1.0)

    def test_quadratic_matches_analytic_ou(self):
        ref = generator_spectrum(self.QUAD, -6.0, 6.0, 2000, 3, 1.0)
        exact = np.exp(-np.arange(3.0))
        assert np.abs(ref.eigenvalues - exact).max() <= 1e-3

    def test_halving_h_shrinks_error(self):
        # wide domain so truncation bias stays below the h^2 component
        exact = np.exp(-np.arange(3.0))
        errs = []
        for n in (400, 800):
            ref = generator_spectrum(self.QUAD, -10.0, 10.0, n, 3, 1.0)
            errs.append(np.abs(ref.eigenvalues[1] - exact[1]))
        assert errs[0] / max(errs[1], 1e-16) >= 3.0

    def test_unit_top_eigenvalue_and_constant_eigenfunction(self):
        for potential in (self.QUAD, self.WELL):
            ref = generator_spectrum(potential, -1.5, 1.5, 500, 3, 1.0)
            assert ref.eigenvalues[0] == pytest.approx(1.0, abs=1e-12)
            f1 = ref.eigenfunction_values[:, 0]
            assert np.abs(f1 - 1.0).max() <= 1e-6

    def test_triple_well_frozen_rates(self):
        # oracle values fixed from the N=3000/6000 discretizations
        ref = generator_spectrum(self.WELL, -1.5, 1.5, 3000, 5, 1.0)
        nu = ref.generator_rates
        assert nu[1] == pytest.approx(-1.198994, abs=2e-4)
        assert nu[2] == pytest.approx(-7.888492, abs=2e-3)
        assert nu[3] == pytest.approx(-15.361369, abs=5e-3)
        assert nu[4] == pytest.approx(-82.081402, abs=5e-2)

    def test_triple_well_metastable_gap(self):
        ref = generator_spectrum(self.WELL, -1.5, 1.5, 3000, 5, 1.0)
        mu = ref.eigenvalues
        assert np.all(mu[1:4] > 0.0) and np.all(mu[1:4] < 1.0)
        assert mu[3] / mu[4] > 1e10  # visible gap mu_4 >> mu_5

    def test_strictly_decreasing(self):
        ref = generator_spectrum(self.WELL, -1.5, 1.5, 1000, 5, 0.1)
        assert np.all(np.diff(ref.eigenvalues) < 0)

    def test_orthonormal_in_quadrature(self):
        ref = generator_spectrum(self.WELL, -1.5, 1.5, 1500, 4, 1.0)
        f = ref.eigenfunction_values
        gram = f.T @ (ref.weights[:, None] * f)
        assert np.abs(gram - np.eye(4)).max() <= 1e-4

    def test_off_grid_interpolation(self):
        ref = generator_spectrum(self.QUAD, -6.0, 6.0, 2000, 3, 1.0)
        xs = np.array([-0.517, 0.0, 1.3])
        vals = ref.evaluate(2, xs)
        # second OU eigenfunction is x (up to discretization error)
        assert np.allclose(vals / vals[2], xs / xs[2], atol=1e-3)

    def test_grid_validation(self):
        with pytest.raises(ContractViolation):
            generator_spectrum(self.QUAD, -6.0, 6.0, 100, 3, 1.0)


class TestL2PiCompare:
    def test_exact_match_is_zero(self):
        ref = ou_spectrum(4)
        for j in (1, 2, 4):
            err = l2pi_compare(ref, j, ref.eigenfunction_values[:, j - 1])
            assert err <= 1e-12

    def test_sign_flip_aligned(self):
        ref = ou_spectrum(3)
        err = l2pi_compare(ref, 2, -ref.eigenfunction_values[:, 1])
        assert err <= 1e-12

    def test_orthogonal_function_gives_two(self):
        ref = ou_spectrum(3)
        err = l2pi_compare(ref, 3, ref.eigenfunction_values[:, 1])
        assert err == pytest.approx(2.0, abs=1e-10)

    def test_complex_phase_invariance(self):
        ref = ou_spectrum(3)
        rng = np.random.default_rng(0)
        base = ref.eigenfunction_values[:, 2] + 0.05 * rng.standard_normal(
            len(ref.nodes)
        )
        e0 = l2pi_compare(ref, 3, base)
        for theta in rng.uniform(0, 2 * np.pi, 5):
            assert l2pi_compare(ref, 3, np.exp(1j * theta) * base) == pytest.approx(e0)

    def test_scale_invariance(self):
        ref = ou_spectrum(2)
        err = l2pi_compare(ref, 2, 17.3 * ref.eigenfunction_values[:, 1])
        assert err <= 1e-12

    def test_zero_norm_rejected(self):
        ref = ou_spectrum(2)
        with pytest.raises(ContractViolation):
            l2pi_compare(ref, 1, np.zeros(len(ref.nodes)))


def test_reference_csv_export(tmp_path):
    ref = generator_spectrum(PotentialSpec("quadratic"), -6, 6, 300, 3, 1.0)
    spath, fpath = tmp_path / "spectrum.csv", tmp_path / "funcs.csv"
    write_reference_csv(ref, spath, fpath)
    import csv

    spec_rows = list(csv.DictReader(open(spath)))
    assert len(spec_rows) == 3
    assert float(spec_rows[0]["mu"]) == pytest.approx(1.0)
    fun_rows = list(csv.DictReader(open(fpath)))
    assert len(fun_rows) == 300
    assert set(fun_rows[0]) == {"x", "weight", "f1", "f2", "f3"}
