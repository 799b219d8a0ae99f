"""Kernel functions, Gram assembly, and the Hermite-spectral kernel family.

The RBF convention is fixed to ``exp(-||x - x'||^2 / (2 sigma^2))`` and the
Matern kernels use the standard sqrt(3)/sqrt(5) forms; both conventions are
recorded here because reported length scales are only meaningful relative to
them.

The Hermite-spectral family is built from the normalized probabilists'
Hermite eigenfunctions ``f_j`` (orthonormal under N(0,1)) with weights
``mu_{perm(i)}^(2 nu)`` where ``mu_k = exp(-base_rate * (k-1))``. It admits an
explicit finite feature map, exposed via :class:`FeatureMapView`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ContractViolation

# The normalized recurrence for f_j is numerically stable well past j=150,
# but the window is capped there: (j-1)! bookkeeping outside the recurrence
# overflows doubles near j=171.
HERMITE_MAX_INDEX = 150


@dataclass(frozen=True)
class RBF:
    lengthscale: float

    def __post_init__(self):
        if not self.lengthscale > 0:
            raise ContractViolation("RBF lengthscale must be positive")


@dataclass(frozen=True)
class Matern:
    nu: float
    lengthscale: float

    def __post_init__(self):
        if self.nu not in (1.5, 2.5):
            raise ContractViolation("Matern smoothness must be 1.5 or 2.5")
        if not self.lengthscale > 0:
            raise ContractViolation("Matern lengthscale must be positive")


@dataclass(frozen=True)
class Linear:
    pass


@dataclass(frozen=True)
class HermiteSpectral:
    """Finite-rank kernel ``sum_i mu_{perm(i)}^(2 nu) f_i(x) f_i(x')`` on R."""

    truncation: int
    exponent: float
    permutation: tuple = field(default=None)
    base_rate: float = 1.0

    def __post_init__(self):
        if not 1 <= self.truncation <= HERMITE_MAX_INDEX:
            raise ContractViolation(
                f"truncation must be in [1, {HERMITE_MAX_INDEX}]"
            )
        if not self.exponent > 0:
            raise ContractViolation("exponent nu must be positive")
        if not self.base_rate > 0:
            raise ContractViolation("base_rate must be positive")
        perm = self.permutation
        if perm is None:
            perm = tuple(range(1, self.truncation + 1))
            object.__setattr__(self, "permutation", perm)
        else:
            object.__setattr__(self, "permutation", tuple(int(p) for p in perm))
        if sorted(self.permutation) != list(range(1, self.truncation + 1)):
            raise ContractViolation(
                "permutation must be a bijection on {1..truncation}"
            )

    def weights(self):
        """Feature weights ``w_i = mu_{perm(i)}^nu`` (so k has weights w_i^2)."""
        perm = np.asarray(self.permutation, dtype=float)
        return np.exp(-self.base_rate * self.exponent * (perm - 1.0))


KernelSpec = (RBF, Matern, Linear, HermiteSpectral)


def hermite_eigenfunction(j, x):
    """Normalized probabilists' Hermite eigenfunction ``f_j = H_{j-1}/sqrt((j-1)!)``.

    Carried on normalized values directly:
    ``f_{j+1}(x) = (x f_j(x) - sqrt(j-1) f_{j-1}(x)) / sqrt(j)``.
    """
    if not 1 <= j <= HERMITE_MAX_INDEX:
        raise ContractViolation(f"Hermite index {j} outside [1, {HERMITE_MAX_INDEX}]")
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    vals = hermite_features(np.atleast_1d(x), j)[:, j - 1]
    return float(vals[0]) if scalar else vals


def hermite_features(x, count):
    """Matrix ``F[i, j] = f_{j+1}(x_i)`` for ``j < count`` via the stable recurrence."""
    if not 1 <= count <= HERMITE_MAX_INDEX:
        raise ContractViolation(f"count {count} outside [1, {HERMITE_MAX_INDEX}]")
    x = np.asarray(x, dtype=float).ravel()
    out = np.empty((x.size, count))
    out[:, 0] = 1.0
    if count > 1:
        out[:, 1] = x
    for j in range(2, count):
        out[:, j] = (x * out[:, j - 1] - np.sqrt(j - 1.0) * out[:, j - 2]) / np.sqrt(j)
    return out


@dataclass(frozen=True)
class FeatureMapView:
    """Explicit finite feature map of a kernel: ``k(x,x') = phi(x).phi(x')``.

    Only Linear and HermiteSpectral kernels expose one. ``weights[i]`` is the
    scale of the i-th coordinate and ``index_map[i]`` the underlying
    eigenfunction index (1-based; 0 for plain coordinates).
    """

    dimension: int
    weights: np.ndarray
    index_map: tuple

    def features(self, x):
        """Weighted feature matrix ``phi(x_l)`` stacked in rows."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.index_map[0] == 0:  # linear kernel: raw coordinates
            if x.shape[1] != self.dimension:
                raise ContractViolation(
                    f"points have dimension {x.shape[1]}, expected {self.dimension}"
                )
            return x * self.weights
        if x.shape[1] != 1:
            raise ContractViolation("Hermite-spectral features require d = 1")
        return hermite_features(x[:, 0], self.dimension) * self.weights


def feature_map(spec, d=None):
    """Return the kernel's :class:`FeatureMapView`, or ``None`` for RBF/Matern."""
    if isinstance(spec, Linear):
        if d is None:
            raise ContractViolation("linear feature map needs the data dimension")
        return FeatureMapView(d, np.ones(d), tuple([0] * d))
    if isinstance(spec, HermiteSpectral):
        return FeatureMapView(
            spec.truncation, spec.weights(), tuple(range(1, spec.truncation + 1))
        )
    return None


def _as_points(x, name="points"):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1, 1)
    elif x.ndim == 1:
        x = x.reshape(-1, 1)
    elif x.ndim != 2:
        raise ContractViolation(f"{name} must be at most 2-d")
    if not np.isfinite(x).all():
        raise ContractViolation(f"{name} contain non-finite values")
    return x


def eval(spec, x, x_prime):  # noqa: A001 - name fixed by the module contract
    """Scalar kernel evaluation ``k(x, x')``."""
    x = _as_points(x, "x")
    xp = _as_points(x_prime, "x_prime")
    if x.shape != (1, x.shape[1]) or xp.shape != (1, xp.shape[1]):
        raise ContractViolation("eval expects single points")
    if x.shape[1] != xp.shape[1]:
        raise ContractViolation("x and x_prime dimensions differ")
    return float(gram(spec, x, xp)[0, 0])


def gram(spec, x, x_prime=None):
    """Raw Gram matrix ``[k(x_i, x'_j)]`` (no 1/n scaling).

    With ``x_prime`` omitted the result is exactly symmetric by construction
    (upper triangle mirrored).
    """
    x = _as_points(x, "x")
    symmetric = x_prime is None
    xp = x if symmetric else _as_points(x_prime, "x_prime")
    if x.shape[1] != xp.shape[1]:
        raise ContractViolation("point sets have mismatched dimensions")
    g = _gram_raw(spec, x, xp)
    if symmetric:
        g = np.triu(g) + np.triu(g, 1).T
    return g


def _gram_raw(spec, x, xp):
    if isinstance(spec, Linear):
        return x @ xp.T
    if isinstance(spec, RBF):
        sq = (
            np.sum(x * x, axis=1)[:, None]
            + np.sum(xp * xp, axis=1)[None, :]
            - 2.0 * (x @ xp.T)
        )
        np.maximum(sq, 0.0, out=sq)
        return np.exp(-sq / (2.0 * spec.lengthscale**2))
    if isinstance(spec, Matern):
        sq = (
            np.sum(x * x, axis=1)[:, None]
            + np.sum(xp * xp, axis=1)[None, :]
            - 2.0 * (x @ xp.T)
        )
        np.maximum(sq, 0.0, out=sq)
        d = np.sqrt(sq) / spec.lengthscale
        if spec.nu == 1.5:
            t = np.sqrt(3.0) * d
            return (1.0 + t) * np.exp(-t)
        t = np.sqrt(5.0) * d
        return (1.0 + t + t * t / 3.0) * np.exp(-t)
    if isinstance(spec, HermiteSpectral):
        if x.shape[1] != 1:
            raise ContractViolation("Hermite-spectral kernel requires d = 1")
        w = spec.weights()
        fx = hermite_features(x[:, 0], spec.truncation) * w
        fxp = fx if xp is x else hermite_features(xp[:, 0], spec.truncation) * w
        return fx @ fxp.T
    raise ContractViolation(f"unknown kernel spec {spec!r}")


# ---------------------------------------------------------------------------
# presets: the constructed OU kernels ("good", "bad", "ugly")
# ---------------------------------------------------------------------------

def swap_shift_permutation(rank, truncation):
    """Permutation i -> 2r-i+1 (i<=r), i -> i-r (r<i<=2r), identity elsewhere."""
    if 2 * rank > truncation:
        raise ContractViolation("truncation must be at least twice the rank")
    perm = list(range(1, truncation + 1))
    for i in range(1, truncation + 1):
        if i <= rank:
            perm[i - 1] = 2 * rank - i + 1
        elif i <= 2 * rank:
            perm[i - 1] = i - rank
    return tuple(perm)


def good_kernel(truncation=53, base_rate=1.0):
    """RKHS = leading eigenspace of the OU Koopman operator, undistorted metric."""
    return HermiteSpectral(truncation, 1.0, None, base_rate)


def bad_kernel(rank, truncation=53, base_rate=1.0):
    """Permuted, mildly rescaled eigenfunctions: slow covariance decay (nu=1/r^2)."""
    return HermiteSpectral(
        truncation, 1.0 / rank**2, swap_shift_permutation(rank, truncation), base_rate
    )


def ugly_kernel(rank, truncation=53, base_rate=1.0):
    """Permuted, sharply rescaled eigenfunctions: fast covariance decay (nu=r^2)."""
    return HermiteSpectral(
        truncation, float(rank**2), swap_shift_permutation(rank, truncation), base_rate
    )


# ---------------------------------------------------------------------------
# string form (used by configs and CSV kernel_id columns)
# ---------------------------------------------------------------------------

def kernel_to_string(spec):
    if isinstance(spec, Linear):
        return "linear"
    if isinstance(spec, RBF):
        return f"rbf({spec.lengthscale:g})"
    if isinstance(spec, Matern):
        return f"matern({spec.nu:g},{spec.lengthscale:g})"
    if isinstance(spec, HermiteSpectral):
        ident = tuple(range(1, spec.truncation + 1))
        if spec.permutation == ident:
            if spec.exponent == 1.0 and spec.truncation == 53 and spec.base_rate == 1.0:
                return "good"
            return (
                f"hermite({spec.truncation},{spec.exponent:g},{spec.base_rate:g})"
            )
        for r in range(1, spec.truncation // 2 + 1):
            if spec.permutation == swap_shift_permutation(r, spec.truncation):
                if spec.exponent == 1.0 / r**2:
                    return f"bad({r})"
                if spec.exponent == float(r**2):
                    return f"ugly({r})"
        raise ContractViolation("no string form for this permutation")
    raise ContractViolation(f"unknown kernel spec {spec!r}")


_KERNEL_RE = re.compile(r"^\s*([a-z_]+)\s*(?:\(([^)]*)\))?\s*$")


def kernel_from_string(text):
    """Parse the kernel grammar used in configs.

    Forms: ``linear``, ``rbf(L)``, ``matern(NU,L)``, ``good``,
    ``bad(R)``, ``ugly(R)``, ``hermite(T,NU[,BASE_RATE])``.
    """
    m = _KERNEL_RE.match(text)
    if not m:
        raise ContractViolation(f"cannot parse kernel {text!r}")
    name, argtext = m.group(1), m.group(2)
    args = []
    if argtext is not None and argtext.strip():
        try:
            args = [float(tok) for tok in argtext.split(",")]
        except ValueError as exc:
            raise ContractViolation(f"bad kernel arguments in {text!r}") from exc
    try:
        if name == "linear" and not args:
            return Linear()
        if name == "rbf" and len(args) == 1:
            return RBF(args[0])
        if name == "matern" and len(args) == 2:
            return Matern(args[0], args[1])
        if name == "good" and not args:
            return good_kernel()
        if name == "bad" and len(args) == 1:
            return bad_kernel(int(args[0]))
        if name == "ugly" and len(args) == 1:
            return ugly_kernel(int(args[0]))
        if name == "hermite" and len(args) in (2, 3):
            base = args[2] if len(args) == 3 else 1.0
            return HermiteSpectral(int(args[0]), args[1], None, base)
    except ContractViolation:
        raise
    raise ContractViolation(f"cannot parse kernel {text!r}")
