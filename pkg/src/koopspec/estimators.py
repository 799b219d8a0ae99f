"""KRR / PCR / RRR in dual (Gram) form, with spectral decomposition.

All Gram matrices carry the 1/n scaling: ``K = (1/n)[k(x_i,x_j)]``,
``L = (1/n)[k(y_i,y_j)]``, ``M = (1/n)[k(y_i,x_j)]``. In that convention a
fitted estimator is represented as ``G = S* U V^T Z`` with the sampling
operators ``S, Z`` mapping an RKHS function to its scaled evaluations
``(1/sqrt(n)) [f(x_i)]_i`` resp. ``(1/sqrt(n)) [f(y_i)]_i``, and

* KRR:  U = (K + gamma I)^{-1},                    V = I
* PCR:  U = Q_r (Lambda_r + gamma I)^{-1},         V = Q_r
* RRR:  U = (K + gamma I)^{-1} L W_r,              V = W_r

where ``(lambda_j, q_j)`` are the leading eigenpairs of K and ``w_i`` solve
the pencil ``K L w = s^2 (K + gamma I) w`` normalized to ``w^T L w = 1``.

The PCR/RRR dual formulas are regression-tested against an explicit
feature-space implementation for finite-feature kernels (see tests) before
anything downstream trusts them. The RRR pencil is solved
through the symmetric equivalent ``G = R^T (K+gamma I)^{-1} K R`` with
``R R^T = L`` (jittered), whose nonzero spectrum matches
``(K+gamma I)^{-1} K L``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import kernels as K_mod
from .exceptions import ContractViolation, InsufficientRank, NotPositiveSemidefinite
from .numerics import cholesky_psd, eig_small, top_symmetric_eigs

METHODS = ("krr", "pcr", "rrr")

# Relative eigenvalue floor below which a direction counts as numerically
# absent (rank guards, zero-eigenvalue cutoff in eig()).
RANK_RTOL = 1e-12


@dataclass(frozen=True)
class RegressorSpec:
    method: str
    kernel: object
    rank: int = 1
    gamma: float = 0.0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ContractViolation(f"method must be one of {METHODS}")
        if self.gamma < 0:
            raise ContractViolation("gamma must be nonnegative")
        if self.rank < 1:
            raise ContractViolation("rank must be at least 1")


@dataclass
class FittedModel:
    """Dual-form estimator ``G = S* U V^T Z`` plus cached Gram matrices."""

    spec: RegressorSpec
    X: np.ndarray
    Y: np.ndarray
    U: np.ndarray
    V: np.ndarray
    K: np.ndarray
    L: np.ndarray
    M: np.ndarray
    # spectral tail values cached at fit time for the bias diagnostics
    b_tail: float | None = None  # sigma_{r+1} of C_gamma^{-1/2} C_XY
    cov_tail: float | None = None  # lambda_{r+1} of C
    defective: bool = False

    @property
    def n(self):
        return self.X.shape[0]


@dataclass
class EigenDecomposition:
    """Eigenvalues with dual coefficient vectors for both eigenfunction sides.

    ``right_coeffs[:, i] = U v_i`` so that ``psi_i = S* (U v_i)``;
    ``left_coeffs[:, i] = (lambda_i / |lambda_i|) V u_i`` so that
    ``xi_i = Z* left_coeffs[:, i]``. Sorted by descending modulus.
    """

    eigenvalues: np.ndarray
    right_coeffs: np.ndarray
    left_coeffs: np.ndarray
    model: FittedModel = field(repr=False)
    defective: bool = False


def _scaled_grams(kernel, X, Y):
    n = X.shape[0]
    K = K_mod.gram(kernel, X) / n
    L = K_mod.gram(kernel, Y) / n
    M = K_mod.gram(kernel, Y, X) / n
    return K, L, M


def _factor_regularized(K, gamma):
    """Cholesky factor of K + gamma I; at gamma = 0 no jitter is allowed."""
    n = K.shape[0]
    if gamma > 0:
        shifted = K.copy()
        shifted.flat[:: n + 1] += gamma
        try:
            return np.linalg.cholesky(shifted)
        except np.linalg.LinAlgError as exc:
            raise NotPositiveSemidefinite(
                f"K + gamma I not positive definite (gamma={gamma:g})"
            ) from exc
    factor, _ = cholesky_psd(K, jitter_factors=(0.0,))
    return factor


def _achievable_rank(vals, top):
    return int(np.sum(vals > RANK_RTOL * max(top, 0.0)))


def fit(spec, data, grams=None):
    """Fit the estimator described by ``spec`` on paired snapshots ``data``.

    ``grams`` may carry precomputed ``(K, L, M)`` in the 1/n convention for
    the same kernel and data (the experiment drivers share them between
    methods); they are recomputed here otherwise.
    """
    X, Y = data.X, data.Y
    n = X.shape[0]
    if spec.method != "krr" and n < spec.rank:
        raise ContractViolation(f"need n >= rank, got n={n}, rank={spec.rank}")
    K, L, M = grams if grams is not None else _scaled_grams(spec.kernel, X, Y)
    gamma = spec.gamma
    if spec.method == "krr":
        factor = _factor_regularized(K, gamma)
        U = sla.cho_solve((factor, True), np.eye(n), check_finite=False)
        U = (U + U.T) / 2
        V = np.eye(n)
        return FittedModel(spec, X, Y, U, V, K, L, M)

    r = spec.rank
    k = min(n, r + 1)  # one extra value for the spectral-bias tail
    if spec.method == "pcr":
        lam, Q = top_symmetric_eigs(K, n, k)
        top = lam[0]
        # The 1e-12 relative guard is enforced only at gamma = 0, where
        # (Lambda_r)^{-1} actually blows up. With gamma > 0 the ridge keeps
        # U finite, and refusing to fit would hide exactly the spurious-
        # eigenvalue regime the diagnostics are built to expose.
        bad = (
            lam[r - 1] <= RANK_RTOL * top
            if gamma == 0.0
            else lam[r - 1] <= -1e-10 * abs(top)
        )
        if bad:
            full = np.linalg.eigvalsh(K)
            raise InsufficientRank(r, _achievable_rank(full, full.max()), "PCR")
        U = Q[:, :r] / (lam[:r] + gamma)
        V = Q[:, :r]
        cov_tail = float(max(lam[r], 0.0)) if k > r else None
        return FittedModel(spec, X, Y, U, V, K, L, M, cov_tail=cov_tail)

    # RRR
    R_L, factor, G = _pencil_matrix(K, L, gamma)
    sig2, Z = top_symmetric_eigs(G, n, k)
    if sig2[r - 1] <= 0.0:
        raise InsufficientRank(r, _achievable_rank(sig2, sig2[0]), "RRR pencil")
    rz = R_L @ Z[:, :r]
    W = (rz - gamma * sla.cho_solve((factor, True), rz, check_finite=False)) / sig2[:r]
    t = np.einsum("ij,ij->j", W, L @ W)
    if np.any(t <= RANK_RTOL):
        raise InsufficientRank(
            r, int(np.sum(t > RANK_RTOL)), "pencil vectors annihilated by L"
        )
    W = W / np.sqrt(t)
    U = sla.cho_solve((factor, True), L @ W, check_finite=False)
    V = W
    b_tail = float(np.sqrt(max(sig2[r], 0.0))) if k > r else None
    return FittedModel(spec, X, Y, U, V, K, L, M, b_tail=b_tail)


def eig(model):
    """Spectral decomposition of the fitted estimator via the reduced matrix.

    Solves the r x r (n x n for KRR) eigenproblem of ``V^T M U`` and lifts the
    eigenvectors to dual coefficient vectors; eigenvalues at relative modulus
    below 1e-12 are dropped (the kernel-trick decomposition addresses nonzero
    eigenvalues only).
    """
    reduced = model.V.T @ model.M @ model.U
    res = eig_small(reduced)
    mags = np.abs(res.values)
    keep = mags > RANK_RTOL * mags.max() if mags.max() > 0 else mags > 0
    vals = res.values[keep]
    vr = res.right[:, keep]
    vl = res.left[:, keep]
    right = model.U @ vr
    left = (model.V @ vl) * (vals / np.abs(vals))
    return EigenDecomposition(
        eigenvalues=vals,
        right_coeffs=right,
        left_coeffs=left,
        model=model,
        defective=res.defective,
    )


def evaluate_eigenfunctions(decomp, points):
    """Right eigenfunction values ``psi_i(x) = (1/sqrt n) sum_j (Uv_i)_j k(x, x_j)``."""
    model = decomp.model
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != model.X.shape[1]:
        raise ContractViolation(
            f"points have dimension {pts.shape[1]}, expected {model.X.shape[1]}"
        )
    kx = K_mod.gram(model.spec.kernel, pts, model.X)
    return kx @ decomp.right_coeffs / np.sqrt(model.n)


def predict(model, x0, observable_on_Y):
    """Conditional-expectation forecast ``E[f(X_{t+1}) | x0]``.

    ``observable_on_Y`` holds ``f(y_j)`` aligned with the training outputs;
    the result is ``(1/n) kappa(x0)^T U V^T f`` with raw kernel columns
    ``kappa(x) = [k(x_i, x)]_i``.
    """
    f = np.asarray(observable_on_Y, dtype=float)
    if f.ndim == 1:
        f = f.reshape(-1, 1)
    if f.shape[0] != model.n:
        raise ContractViolation(
            f"observable has {f.shape[0]} rows, expected n={model.n}"
        )
    pts = np.atleast_2d(np.asarray(x0, dtype=float))
    if pts.shape[1] != model.X.shape[1]:
        raise ContractViolation("x0 dimension mismatch")
    kappa = K_mod.gram(model.spec.kernel, model.X, pts)  # n x m, raw
    return (kappa.T @ model.U) @ (model.V.T @ f) / model.n


def _pencil_matrix(K, L, gamma):
    """Symmetric equivalent ``G = R^T (K+gamma I)^{-1} K R`` of the RRR pencil.

    With ``L = R R^T`` and ``K + gamma I = R_K R_K^T``,
    ``G = R^T R - gamma Y^T Y`` for ``Y = R_K^{-1} R``, which avoids any
    explicit inverse. Returns ``(R, R_K, G)``.
    """
    R_L, _ = cholesky_psd(L)
    factor = _factor_regularized(K, gamma)
    G = R_L.T @ R_L
    if gamma > 0:
        Y = sla.solve_triangular(factor, R_L, lower=True, check_finite=False)
        G -= gamma * (Y.T @ Y)
    G = (G + G.T) / 2
    return R_L, factor, G


def _b_spectrum(K, L, gamma, count):
    """Top eigenvalues of (K + gamma I)^{-1} K L via the symmetric equivalent."""
    _, _, G = _pencil_matrix(K, L, gamma)
    vals, _ = top_symmetric_eigs(G, K.shape[0], count)
    return np.maximum(vals, 0.0)


def svals_B(data, kernel, gamma, count):
    """Leading singular values of ``B = C_gamma^{-1/2} C_XY`` in dual form.

    ``sigma_i(B)^2`` equals the i-th eigenvalue of ``(K+gamma I)^{-1} K L``;
    values are clamped at zero.
    """
    n = data.n
    if not 1 <= count <= n:
        raise ContractViolation(f"count {count} out of range for n={n}")
    K, L, _ = _scaled_grams(kernel, data.X, data.Y)
    return np.sqrt(_b_spectrum(K, L, gamma, count))


def cov_eigs(data, kernel, count):
    """Top eigenvalues of the empirical covariance = eigenvalues of scaled K."""
    n = data.n
    if not 1 <= count <= n:
        raise ContractViolation(f"count {count} out of range for n={n}")
    K = K_mod.gram(kernel, data.X) / n
    vals, _ = top_symmetric_eigs(K, n, count)
    return np.maximum(vals, 0.0)


# ---------------------------------------------------------------------------
# model archive: version byte, JSON header, little-endian float64 blocks
# ---------------------------------------------------------------------------

ARCHIVE_VERSION = 1


def save_model(model, path):
    header = {
        "method": model.spec.method,
        "kernel": K_mod.kernel_to_string(model.spec.kernel),
        "rank": model.spec.rank,
        "gamma": model.spec.gamma,
        "n": model.n,
        "d": model.X.shape[1],
        "m": model.U.shape[1],
        "b_tail": model.b_tail,
        "cov_tail": model.cov_tail,
    }
    blob = json.dumps(header).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(bytes([ARCHIVE_VERSION]))
        fh.write(len(blob).to_bytes(4, "little"))
        fh.write(blob)
        for arr in (model.X, model.Y, model.U, model.V):
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_model(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if not raw or raw[0] != ARCHIVE_VERSION:
        raise ContractViolation(f"{path}: unsupported model archive version")
    hlen = int.from_bytes(raw[1:5], "little")
    header = json.loads(raw[5 : 5 + hlen].decode("utf-8"))
    n, d, m = header["n"], header["d"], header["m"]
    offset = 5 + hlen
    arrays = []
    for rows, cols in ((n, d), (n, d), (n, m), (n, m)):
        size = rows * cols * 8
        arrays.append(
            np.frombuffer(raw[offset : offset + size], dtype="<f8")
            .reshape(rows, cols)
            .astype(float)
        )
        offset += size
    X, Y, U, V = arrays
    spec = RegressorSpec(
        method=header["method"],
        kernel=K_mod.kernel_from_string(header["kernel"]),
        rank=header["rank"],
        gamma=header["gamma"],
    )
    K, L, M = _scaled_grams(spec.kernel, X, Y)
    return FittedModel(
        spec, X, Y, U, V, K, L, M,
        b_tail=header.get("b_tail"), cov_tail=header.get("cov_tail"),
    )
