"""Dense symmetric/nonsymmetric eigensolvers and PSD Cholesky with jitter.

Conventions fixed here and relied on downstream:

* symmetric eigenvalues are returned in descending order,
* general (complex) eigenvalues are sorted by descending modulus,
* no NaN/Inf escapes a public operation (inputs and outputs are checked).

All functions are pure; there is no shared mutable state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .exceptions import ContractViolation, DegeneratePencil, NotPositiveSemidefinite

# Gram matrices of smooth kernels are near rank-deficient, hence the wide
# default schedule (factors of ||A||_max).
DEFAULT_JITTER_FACTORS = (0.0, 1e-12, 1e-10, 1e-8, 1e-6)

SYMMETRY_RTOL = 1e-10

# Threshold on |u^H v| below which an eigenvalue of a small dense matrix is
# treated as ill-conditioned/defective.
DEFECTIVE_TOL = 1e-12

# Problems at or below this size always use the dense LAPACK subset driver;
# larger ones try ARPACK first (deterministic start vector) and fall back.
_DENSE_CUTOFF = 1024


def _as_square_array(a, name="matrix"):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ContractViolation(f"{name} must be square, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ContractViolation(f"{name} contains non-finite entries")
    return a


def _require_symmetric(a, name="matrix"):
    scale = np.abs(a).max() if a.size else 0.0
    if scale > 0 and np.abs(a - a.T).max() > SYMMETRY_RTOL * scale:
        raise ContractViolation(f"{name} is not symmetric within tolerance")


def sym_eig(a):
    """Full eigendecomposition of a symmetric real matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues descending and
    orthonormal eigenvectors in the columns.
    """
    a = _as_square_array(a)
    _require_symmetric(a)
    vals, vecs = sla.eigh(a)
    return vals[::-1].copy(), vecs[:, ::-1].copy()


def sym_eig_top(a, k):
    """Top-``k`` eigenpairs of a symmetric real matrix, descending.

    Dense LAPACK subset driver; deterministic.
    """
    a = _as_square_array(a)
    _require_symmetric(a)
    n = a.shape[0]
    if not 1 <= k <= n:
        raise ContractViolation(f"k={k} out of range for n={n}")
    vals, vecs = sla.eigh(a, subset_by_index=[n - k, n - 1])
    return vals[::-1].copy(), vecs[:, ::-1].copy()


def top_symmetric_eigs(operator, n, k, materialize=None):
    """Top-``k`` eigenpairs of a symmetric PSD operator given by matvecs.

    ``operator`` is either a dense array or a callable ``v -> A @ v``. Large
    problems use Lanczos (ARPACK) with the deterministic start vector
    ``1/sqrt(n)``; on failure, or for small ``n``, the operator is
    materialized and solved densely.
    """
    if isinstance(operator, np.ndarray):
        if n <= _DENSE_CUTOFF or k >= n - 1:
            return sym_eig_top(operator, k)
        matvec = lambda v: operator @ v  # noqa: E731
        materialize = lambda: operator  # noqa: E731
    else:
        matvec = operator
        if n <= _DENSE_CUTOFF or k >= n - 1:
            if materialize is None:
                raise ContractViolation("dense fallback requires materialize()")
            return sym_eig_top(materialize(), k)
    linop = spla.LinearOperator((n, n), matvec=matvec, dtype=float)
    v0 = np.full(n, 1.0 / np.sqrt(n))
    try:
        vals, vecs = spla.eigsh(linop, k=k, which="LA", v0=v0)
    except (spla.ArpackError, spla.ArpackNoConvergence):
        if materialize is None:
            raise
        return sym_eig_top(materialize(), k)
    order = np.argsort(vals)[::-1]
    return vals[order].copy(), vecs[:, order].copy()


def cholesky_psd(a, jitter_factors=DEFAULT_JITTER_FACTORS):
    """Lower Cholesky factor of ``a + eps*I`` for the smallest workable jitter.

    ``eps`` runs through ``jitter_factors * ||a||_max`` (including 0).
    Returns ``(factor, eps)``; raises ``NotPositiveSemidefinite`` if every
    jitter fails.
    """
    a = _as_square_array(a)
    _require_symmetric(a)
    scale = np.abs(a).max() if a.size else 0.0
    n = a.shape[0]
    eps_tried = 0.0
    for factor in jitter_factors:
        eps_tried = factor * scale
        if eps_tried == 0.0:
            shifted = a
        else:
            shifted = a.copy()
            shifted.flat[:: n + 1] += eps_tried
        try:
            return np.linalg.cholesky(shifted), eps_tried
        except np.linalg.LinAlgError:
            continue
    raise NotPositiveSemidefinite(
        f"Cholesky failed for all jitters up to eps={eps_tried:g}"
    )


def gen_eig_psd(a, b, k):
    """Top-``k`` pairs of the symmetric-definite pencil ``A w = s^2 B w``.

    ``A`` symmetric PSD, ``B`` symmetric positive definite after jitter.
    Solved by Cholesky whitening: with ``B = R R^T`` the values are the
    eigenvalues of ``R^{-1} A R^{-T}``. Returns ``(values, vectors)`` with
    values descending and clamped at zero.
    """
    a = _as_square_array(a, "A")
    b = _as_square_array(b, "B")
    _require_symmetric(a, "A")
    _require_symmetric(b, "B")
    if a.shape != b.shape:
        raise ContractViolation("A and B must have matching shapes")
    n = a.shape[0]
    if not 1 <= k <= n:
        raise ContractViolation(f"k={k} out of range for n={n}")
    try:
        r, _ = cholesky_psd(b)
    except NotPositiveSemidefinite as exc:
        raise DegeneratePencil(f"B is numerically singular: {exc}") from exc
    # whitened matrix R^{-1} A R^{-T}, symmetrized against roundoff
    w = sla.solve_triangular(r, a, lower=True)
    w = sla.solve_triangular(r, w.T, lower=True)
    w = (w + w.T) / 2
    vals, vecs = sym_eig_top(w, k)
    vecs = sla.solve_triangular(r.T, vecs, lower=False)
    return np.maximum(vals, 0.0), vecs


@dataclass
class EigSmall:
    """Eigendecomposition of a small dense real matrix.

    ``values`` are complex, sorted by descending modulus. ``right[:, i]`` and
    ``left[:, i]`` satisfy ``A v = lambda v`` and ``u^H A = lambda u^H``.
    ``defective`` flags any pair with ``|u^H v|`` at rounding level.
    """

    values: np.ndarray
    right: np.ndarray
    left: np.ndarray
    defective: bool


def eig_small(a):
    """Full nonsymmetric eigendecomposition with paired left/right vectors."""
    a = _as_square_array(a)
    vals, vl, vr = sla.eig(a, left=True, right=True)
    order = np.argsort(-np.abs(vals), kind="stable")
    vals = vals[order].astype(complex)
    vr = vr[:, order].astype(complex)
    vl = vl[:, order].astype(complex)
    overlaps = np.abs(np.einsum("ij,ij->j", vl.conj(), vr))
    norms = np.linalg.norm(vl, axis=0) * np.linalg.norm(vr, axis=0)
    defective = bool(np.any(overlaps < DEFECTIVE_TOL * norms))
    if not np.isfinite(vals).all():
        raise ContractViolation("eigensolver produced non-finite eigenvalues")
    return EigSmall(values=vals, right=vr, left=vl, defective=defective)
