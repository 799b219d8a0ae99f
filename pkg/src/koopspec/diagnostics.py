"""Spectral diagnostics: metric distortion, spectral bias, eigenvalue
matching, Davis-Kahan bounds, condition numbers, concentration evaluators.

RKHS inner products are evaluated through the cached Gram blocks of the
fitted model: with ``psi = S* a`` and ``xi = Z* b`` (coefficient vectors
``a = U v_i``, ``b = (lambda/|lambda|) V u_i``),

    ||psi||^2 = a^H K a,   ||xi||^2 = b^H L b,   <psi, xi> = a^H M^T b,

all in the 1/n Gram convention.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .dynamics import TrajectoryDataset
from .estimators import cov_eigs, svals_B
from .exceptions import ContractViolation, UnsupportedMethod

# |<psi, xi>| below this (relative) level flags an ill-conditioned eigenvalue.
CONDITION_OVERLAP_TOL = 1e-14


def metric_distortion(model, decomp):
    """Empirical metric distortion per eigenpair.

    ``eta_i = ||psi_i|| / ||S psi_i|| = sqrt(v^H U^T K U v / ||K U v||^2)``.
    A sampling-annihilated eigenfunction (zero denominator) yields ``inf``.
    """
    a = decomp.right_coeffs
    if a.shape[1] == 0:
        raise ContractViolation("empty eigendecomposition")
    ka = model.K @ a
    num = np.real(np.einsum("ij,ij->j", a.conj(), ka))
    den = np.real(np.einsum("ij,ij->j", ka.conj(), ka))
    out = np.empty(a.shape[1])
    for i in range(a.shape[1]):
        # num <= 0 means the RKHS norm itself is at rounding level: the
        # eigenfunction is numerically annihilated, same as den == 0
        if den[i] == 0.0 or num[i] <= 0.0:
            out[i] = math.inf
        else:
            out[i] = np.sqrt(num[i] / den[i])
    return out


def spectral_bias(model, decomp, pcr_prose_form=False):
    """Empirical spectral bias per eigenpair.

    RRR: ``s_i = eta_i * sigma_{r+1}(C_gamma^{-1/2} C_XY)``;
    PCR: ``s_i = eta_i * sqrt(lambda_{r+1}(C))`` by default;
    ``pcr_prose_form=True`` uses the un-rooted variant instead. Not defined
    for KRR.
    """
    method = model.spec.method
    if method == "krr":
        raise UnsupportedMethod("spectral bias is defined for PCR and RRR only")
    r = model.spec.rank
    if model.n < r + 1:
        raise ContractViolation(f"need n >= rank+1 for the tail value (n={model.n})")
    eta = metric_distortion(model, decomp)
    if method == "rrr":
        tail = model.b_tail
        if tail is None:
            data = TrajectoryDataset(model.X, model.Y)
            tail = float(svals_B(data, model.spec.kernel, model.spec.gamma, r + 1)[r])
        return eta * tail
    lam_tail = model.cov_tail
    if lam_tail is None:
        data = TrajectoryDataset(model.X, model.Y)
        lam_tail = float(cov_eigs(data, model.spec.kernel, r + 1)[r])
    return eta * (lam_tail if pcr_prose_form else np.sqrt(lam_tail))


def match_eigenvalues(estimated, reference):
    """Match each estimate to its closest reference eigenvalue.

    Returns ``(indices, errors, gaps)``: 1-based reference indices ``j(i)``
    (ties broken toward the smaller index), distances ``|lhat_i - mu_j(i)|``,
    and reference-internal gaps ``min_{l != j} |mu_l - mu_j(i)|``. Matching is
    independent per estimate and need not be injective.
    """
    est = np.asarray(estimated, dtype=complex)
    ref = np.asarray(reference, dtype=complex)
    if ref.size == 0:
        raise ContractViolation("reference spectrum is empty")
    dist = np.abs(est[:, None] - ref[None, :])
    idx = np.argmin(dist, axis=1)  # first minimum = smallest index
    errors = dist[np.arange(est.size), idx]
    if ref.size == 1:
        gaps = np.full(est.size, math.inf)
    else:
        pair = np.abs(ref[:, None] - ref[None, :])
        np.fill_diagonal(pair, math.inf)
        gap_per_ref = pair.min(axis=1)
        gaps = gap_per_ref[idx]
    return idx + 1, errors, gaps


def davis_kahan_bound(error, gap):
    """Eigenfunction bound ``2 e / [gap - e]_+``; ``inf`` once the gap closes."""
    if error < 0:
        raise ContractViolation("error must be nonnegative")
    if error == 0.0:
        return 0.0
    if gap <= error:
        return math.inf
    return 2.0 * error / (gap - error)


def eig_condition_numbers(model, decomp):
    """Eigenvalue condition numbers ``kappa_i = ||xi_i|| ||psi_i|| / |<psi_i, xi_i>|``."""
    a = decomp.right_coeffs
    b = decomp.left_coeffs
    norm_psi = np.sqrt(
        np.maximum(np.real(np.einsum("ij,ij->j", a.conj(), model.K @ a)), 0.0)
    )
    norm_xi = np.sqrt(
        np.maximum(np.real(np.einsum("ij,ij->j", b.conj(), model.L @ b)), 0.0)
    )
    overlap = np.abs(np.einsum("ij,ij->j", a.conj(), model.M.T @ b))
    out = np.empty(a.shape[1])
    for i in range(a.shape[1]):
        if overlap[i] <= CONDITION_OVERLAP_TOL * norm_psi[i] * norm_xi[i]:
            out[i] = math.inf
        else:
            out[i] = norm_psi[i] * norm_xi[i] / overlap[i]
    return out


@dataclass(frozen=True)
class ConcentrationConstants:
    """User-supplied proxies for the concentration-bound evaluators.

    ``trace_est`` and ``norm_est`` stand in for the trace/operator-norm pair
    of each printed formula: ``tr(C), ||C||`` in ``eps_n`` and
    ``tr(C_gamma^{-1} C), ||C_gamma^{-1} C||`` in the regularized bounds
    (e.g. plugged in from ``cov_eigs``). The regularity exponents are inputs,
    not estimated.
    """

    c_H: float
    tau: float
    c_tau: float
    trace_est: float
    norm_est: float

    def __post_init__(self):
        for name in ("c_H", "tau", "c_tau", "trace_est", "norm_est"):
            if not getattr(self, name) > 0:
                raise ContractViolation(f"constant {name} must be positive")


def concentration_bounds(n, gamma, delta, constants):
    """Plug-in evaluation of the four concentration quantities.

    Returns ``(eps_n, eps1_n, eps2_n, eps3_n)``:

    * ``eps_n = (4 c_H / 3n) L + sqrt(2 ||C|| L / n)`` with
      ``L = log(4 tr / (delta ||.||))``,
    * ``eps1_n = (4 c_tau / (3 n g^tau)) L1 + sqrt(2 c_tau L1 / (n g^tau))``
      with ``L1 = log(4/delta) + log(tr / ||.||)``,
    * ``eps2_n = 4 sqrt(2 c_H) log(2/delta) sqrt(tr/n + c_tau / (n^2 g^tau))``,
    * ``eps3_n`` identical with exponent ``tau + 1``.
    """
    if not 0.0 < delta < 1.0:
        raise ContractViolation("delta must lie in (0, 1)")
    if n < 1:
        raise ContractViolation("n must be positive")
    if not gamma > 0:
        raise ContractViolation("gamma must be positive for the regularized bounds")
    c = constants
    big_l = math.log(4.0 * c.trace_est / (delta * c.norm_est))
    eps_n = (4.0 * c.c_H / (3.0 * n)) * big_l + math.sqrt(
        2.0 * c.norm_est * big_l / n
    )
    l1 = math.log(4.0 / delta) + math.log(c.trace_est / c.norm_est)
    g_tau = gamma**c.tau
    eps1 = (4.0 * c.c_tau / (3.0 * n * g_tau)) * l1 + math.sqrt(
        2.0 * c.c_tau * l1 / (n * g_tau)
    )
    pref = 4.0 * math.sqrt(2.0 * c.c_H) * math.log(2.0 / delta)
    eps2 = pref * math.sqrt(c.trace_est / n + c.c_tau / (n**2 * g_tau))
    eps3 = pref * math.sqrt(c.trace_est / n + c.c_tau / (n**2 * gamma ** (c.tau + 1.0)))
    return eps_n, eps1, eps2, eps3


# ---------------------------------------------------------------------------
# per-eigenvalue report and its CSV schema
# ---------------------------------------------------------------------------

REPORT_COLUMNS = (
    "trial",
    "method",
    "kernel_id",
    "i",
    "lambda_re",
    "lambda_im",
    "eta_hat",
    "s_hat",
    "kappa_hat",
    "j_matched",
    "abs_err",
    "dk_bound",
)


@dataclass
class SpectralReport:
    """Per-eigenvalue diagnostics; matching fields are None without a reference."""

    eigenvalues: np.ndarray
    eta: np.ndarray
    s_bias: np.ndarray | None
    kappa: np.ndarray
    matched_index: np.ndarray | None
    matched_error: np.ndarray | None
    gap: np.ndarray | None
    dk_bound: np.ndarray | None


def build_report(model, decomp, reference_eigenvalues=None, pcr_prose_form=False):
    """Assemble the full diagnostic report for one fitted model."""
    eta = metric_distortion(model, decomp)
    kappa = eig_condition_numbers(model, decomp)
    s_bias = None
    if model.spec.method in ("pcr", "rrr") and model.n >= model.spec.rank + 1:
        s_bias = spectral_bias(model, decomp, pcr_prose_form=pcr_prose_form)
    matched = errors = gaps = bounds = None
    if reference_eigenvalues is not None:
        matched, errors, gaps = match_eigenvalues(
            decomp.eigenvalues, reference_eigenvalues
        )
        bounds = np.array(
            [davis_kahan_bound(e, g) for e, g in zip(errors, gaps)]
        )
    return SpectralReport(
        eigenvalues=decomp.eigenvalues.copy(),
        eta=eta,
        s_bias=s_bias,
        kappa=kappa,
        matched_index=matched,
        matched_error=errors,
        gap=gaps,
        dk_bound=bounds,
    )


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def report_rows(report, trial, method, kernel_id):
    """Flatten a report into CSV rows following ``REPORT_COLUMNS``."""
    rows = []
    for i in range(len(report.eigenvalues)):
        lam = report.eigenvalues[i]
        rows.append(
            (
                str(trial),
                method,
                kernel_id,
                str(i + 1),
                _fmt(lam.real),
                _fmt(lam.imag),
                _fmt(report.eta[i]),
                _fmt(report.s_bias[i]) if report.s_bias is not None else "",
                _fmt(report.kappa[i]),
                _fmt(report.matched_index[i])
                if report.matched_index is not None
                else "",
                _fmt(report.matched_error[i])
                if report.matched_error is not None
                else "",
                _fmt(report.dk_bound[i]) if report.dk_bound is not None else "",
            )
        )
    return rows


def write_report_csv(path, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        writer.writerows(rows)
