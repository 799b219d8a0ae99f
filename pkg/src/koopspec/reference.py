"""Ground-truth Koopman spectra and L^2(pi) comparison utilities.

Two sources: the analytic Ornstein-Uhlenbeck spectrum (Hermite
eigenfunctions, Gauss-Hermite quadrature for the N(0,1) invariant measure)
and a finite-difference discretization of the backward Kolmogorov generator
``L f = beta^{-1} f'' - U' f'`` for 1-d Langevin potentials.

The generator is discretized in flux form with reflecting (zero-flux)
boundaries and conjugated by ``diag(sqrt(pi_i))``, which makes the matrix
exactly symmetric (the generator is self-adjoint in L^2(pi)); constants are
then an exact null vector, so ``mu_1 = 1`` holds by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .dynamics import potential_value_grad
from .exceptions import ContractViolation, DiscretizationError
from .kernels import HERMITE_MAX_INDEX, hermite_features

DEFAULT_QUADRATURE_NODES = 128

# top generator eigenvalue must vanish to this tolerance, else the grid is
# declared too coarse
GENERATOR_NULL_TOL = 1e-6


@dataclass
class ReferenceSpectrum:
    """Reference eigenvalues with eigenfunctions sampled on a quadrature grid.

    ``eigenvalues`` are descending with ``mu_1 = 1``; eigenfunctions are
    orthonormal in the quadrature inner product ``<f, g> = sum_i w_i f g``.
    """

    eigenvalues: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    eigenfunction_values: np.ndarray  # (len(nodes), m)
    provenance: str  # 'analytic_ou' | 'generator_fd'
    lag_time: float
    generator_rates: np.ndarray | None = None

    @property
    def m(self):
        return len(self.eigenvalues)

    def evaluate(self, j, x):
        """Value of the j-th eigenfunction (1-based) at arbitrary points."""
        if not 1 <= j <= self.m:
            raise ContractViolation(f"eigenfunction index {j} out of range")
        x = np.asarray(x, dtype=float)
        if self.provenance == "analytic_ou":
            return hermite_features(x.ravel(), j)[:, j - 1].reshape(x.shape)
        # piecewise-linear interpolation off the generator grid
        return np.interp(x, self.nodes, self.eigenfunction_values[:, j - 1])


def ou_spectrum(m, lag_time=1.0, quadrature_nodes=DEFAULT_QUADRATURE_NODES):
    """Analytic OU Koopman spectrum: ``mu_j = e^{-(j-1) lag}``, Hermite basis."""
    if not 1 <= m <= HERMITE_MAX_INDEX:
        raise ContractViolation(f"m must be in [1, {HERMITE_MAX_INDEX}]")
    if not lag_time > 0:
        raise ContractViolation("lag_time must be positive")
    nodes, gh_weights = np.polynomial.hermite_e.hermegauss(quadrature_nodes)
    weights = gh_weights / np.sqrt(2.0 * np.pi)  # N(0,1) weights, sum to 1
    weights = weights / weights.sum()
    eigenvalues = np.exp(-lag_time * np.arange(m, dtype=float))
    values = hermite_features(nodes, m)
    return ReferenceSpectrum(
        eigenvalues=eigenvalues,
        nodes=nodes,
        weights=weights,
        eigenfunction_values=values,
        provenance="analytic_ou",
        lag_time=lag_time,
    )


def generator_spectrum(potential, x_min, x_max, n_points, m, lag_time):
    """Koopman spectrum from the discretized backward Kolmogorov generator.

    Flux-form central differences on a uniform grid with reflecting
    boundaries; ``mu_j = exp(nu_j lag_time)`` for the generator eigenvalues
    ``0 = nu_1 > nu_2 >= ...``. Quadrature weights are the trapezoid rule on
    the normalized Boltzmann density ``exp(-beta U)``.
    """
    if n_points < 200:
        raise ContractViolation("generator grid needs at least 200 points")
    if not (x_max > x_min and 1 <= m <= n_points and lag_time > 0):
        raise ContractViolation("bad generator grid/lag parameters")
    x = np.linspace(x_min, x_max, n_points)
    h = x[1] - x[0]
    u_grid, _ = potential_value_grad(potential, x)
    u0 = u_grid.min()
    midpoints = (x[:-1] + x[1:]) / 2
    u_mid, _ = potential_value_grad(potential, midpoints)
    beta = potential.beta
    pi_grid = np.exp(-beta * (u_grid - u0))
    conductance = np.exp(-beta * (u_mid - u0)) / h  # zero flux past the ends
    mass = pi_grid * h

    diag = np.zeros(n_points)
    diag[:-1] -= conductance
    diag[1:] -= conductance
    sym_diag = diag / (beta * mass)
    sym_off = conductance / (beta * np.sqrt(mass[:-1] * mass[1:]))
    rates, vecs = sla.eigh_tridiagonal(
        sym_diag, sym_off, select="i", select_range=(n_points - m, n_points - 1)
    )
    rates, vecs = rates[::-1].copy(), vecs[:, ::-1].copy()
    if abs(rates[0]) > GENERATOR_NULL_TOL:
        raise DiscretizationError(
            f"top generator eigenvalue {rates[0]:.3e} deviates from 0; "
            "refine the grid or widen the domain"
        )
    rates[0] = 0.0

    # trapezoid weights on the Boltzmann density (half cells at the ends)
    cell = np.full(n_points, h)
    cell[0] = cell[-1] = h / 2
    weights = pi_grid * cell
    weights = weights / weights.sum()

    # undo the sqrt(pi)-conjugation; normalize in the quadrature inner product
    funcs = vecs / np.sqrt(mass[:, None])
    norms = np.sqrt(np.einsum("ij,ij->j", funcs, weights[:, None] * funcs))
    funcs = funcs / norms
    # deterministic signs: largest-magnitude sample positive
    for j in range(m):
        k = np.argmax(np.abs(funcs[:, j]))
        if funcs[k, j] < 0:
            funcs[:, j] = -funcs[:, j]

    return ReferenceSpectrum(
        eigenvalues=np.exp(rates * lag_time),
        nodes=x,
        weights=weights,
        eigenfunction_values=funcs,
        provenance="generator_fd",
        lag_time=lag_time,
        generator_rates=rates,
    )


def l2pi_compare(reference, j, estimated_values):
    """Squared L^2(pi) distance after unit normalization and phase alignment.

    ``estimated_values`` are samples of the estimated eigenfunction on the
    reference quadrature nodes; the result is
    ``min_phase || e^{i theta} f_hat - f_j ||^2 = 2 - 2 |<f_j, f_hat>|``.
    """
    if not 1 <= j <= reference.m:
        raise ContractViolation(f"eigenfunction index {j} out of range")
    est = np.asarray(estimated_values, dtype=complex).ravel()
    if est.shape[0] != reference.nodes.shape[0]:
        raise ContractViolation("estimated values must sit on the quadrature nodes")
    w = reference.weights
    norm = np.sqrt(np.real(np.sum(w * est.conj() * est)))
    if norm == 0.0:
        raise ContractViolation("estimated eigenfunction has zero norm")
    est = est / norm
    ref = reference.eigenfunction_values[:, j - 1]
    ref = ref / np.sqrt(np.sum(w * ref * ref))
    inner = np.sum(w * ref * est)  # reference is real
    return float(max(2.0 - 2.0 * abs(inner), 0.0))


def write_reference_csv(reference, spectrum_path, eigenfunctions_path):
    """Export eigenvalues and sampled eigenfunctions for the figure component."""
    with open(spectrum_path, "w", encoding="utf-8") as fh:
        fh.write("j,mu,nu\n")
        for j in range(reference.m):
            nu = "" if reference.generator_rates is None else format(
                reference.generator_rates[j], ".17g"
            )
            fh.write(f"{j + 1},{format(reference.eigenvalues[j], '.17g')},{nu}\n")
    with open(eigenfunctions_path, "w", encoding="utf-8") as fh:
        header = "x,weight," + ",".join(f"f{j + 1}" for j in range(reference.m))
        fh.write(header + "\n")
        for i in range(len(reference.nodes)):
            vals = ",".join(
                format(reference.eigenfunction_values[i, j], ".17g")
                for j in range(reference.m)
            )
            fh.write(
                f"{format(reference.nodes[i], '.17g')},"
                f"{format(reference.weights[i], '.17g')},{vals}\n"
            )
