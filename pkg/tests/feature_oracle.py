"""Independent feature-space implementation of the estimators.

For kernels with an explicit finite feature map, the fits can be computed
directly on the T-dimensional covariances, with no Gram matrices involved:

    C    = (1/n) Phi_x^T Phi_x          C_xy = (1/n) Phi_x^T Phi_y
    PCR  : G = Q_r (L_r + g)^{-1} Q_r^T C_xy
    RRR  : G = C_g^{-1/2} [[C_g^{-1/2} C_xy]]_r
    KRR  : G = C_g^{-1} C_xy

This module is the correctness oracle for the dual-form estimators and must
stay independent of the package internals (only kernel feature maps are
shared, since they define the kernels themselves).
"""

import numpy as np


def covariances(fx, fy):
    n = fx.shape[0]
    c = fx.T @ fx / n
    cxy = fx.T @ fy / n
    return c, cxy


def fit_operator(fx, fy, method, rank, gamma):
    """T x T matrix of the fitted estimator in feature coordinates."""
    c, cxy = covariances(fx, fy)
    t = c.shape[0]
    if method == "krr":
        return np.linalg.solve(c + gamma * np.eye(t), cxy)
    lam, q = np.linalg.eigh(c)
    lam, q = lam[::-1], q[:, ::-1]
    if method == "pcr":
        qr = q[:, :rank]
        return qr @ np.diag(1.0 / (lam[:rank] + gamma)) @ qr.T @ cxy
    # rrr
    inv_half = q @ np.diag(1.0 / np.sqrt(lam + gamma)) @ q.T
    b = inv_half @ cxy
    u, s, vt = np.linalg.svd(b)
    b_r = u[:, :rank] @ np.diag(s[:rank]) @ vt[:rank]
    return inv_half @ b_r


def eigs_and_eta(fx, fy, method, rank, gamma, drop_rtol=1e-12):
    """Nonzero eigenvalues (descending modulus) and metric distortions.

    The distortion of an eigenvector with feature coordinates c is
    ``||c|| / sqrt(c^H C_emp c)`` with the *empirical* covariance.
    """
    g = fit_operator(fx, fy, method, rank, gamma)
    c_emp, _ = covariances(fx, fy)
    vals, vecs = np.linalg.eig(g)
    order = np.argsort(-np.abs(vals), kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    keep = np.abs(vals) > drop_rtol * np.abs(vals).max()
    vals, vecs = vals[keep], vecs[:, keep]
    etas = np.array(
        [
            np.sqrt(
                np.real(np.vdot(v, v)) / np.real(np.vdot(v, c_emp @ v))
            )
            for v in vecs.T
        ]
    )
    return vals, etas


def b_singular_values(fx, fy, gamma, count):
    """Singular values of C_gamma^{-1/2} C_xy computed by direct SVD."""
    c, cxy = covariances(fx, fy)
    lam, q = np.linalg.eigh(c)
    inv_half = q @ np.diag(1.0 / np.sqrt(lam[::-1][::-1] + gamma)) @ q.T
    s = np.linalg.svd(inv_half @ cxy, compute_uv=False)
    return s[:count]
