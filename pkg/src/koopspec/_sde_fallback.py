"""Pure-Python SDE stepping kernels (fallback when the extension is absent).

The expressions here must stay token-for-token identical to ``_sde.pyx``:
both call libm via ``math.exp`` / C ``exp`` and the extension is compiled
with ``-ffp-contract=off``, so the two backends produce bit-identical paths.
"""

from math import exp

BACKEND = "python"

POTENTIAL_QUADRATIC = 0
POTENTIAL_TRIPLE_WELL = 1


def ou_path(a, c, x, eps, burn, out):
    """AR(1) recursion ``x <- a x + c eps`` with ``burn`` discarded steps."""
    k = 0
    for _ in range(burn):
        x = a * x + c * eps[k]
        k += 1
    out[0] = x
    for t in range(1, len(out)):
        x = a * x + c * eps[k]
        k += 1
        out[t] = x
    return 0


def langevin_path(kind, theta, h, s, substeps, x, eps, burn_sub, out, bound):
    """Euler-Maruyama: ``x <- x - h U'(x) + s eps``; records every ``substeps``.

    Returns 0 on success, or the 1-based integration step at which ``|x|``
    exceeded ``bound``.
    """
    k = 0
    for _ in range(burn_sub):
        x = x - h * _drift(kind, theta, x) + s * eps[k]
        k += 1
        if x > bound or x < -bound:
            return k
    out[0] = x
    for t in range(1, len(out)):
        for _ in range(substeps):
            x = x - h * _drift(kind, theta, x) + s * eps[k]
            k += 1
            if x > bound or x < -bound:
                return k
        out[t] = x
    return 0


def _drift(kind, theta, x):
    if kind == POTENTIAL_QUADRATIC:
        return theta * x
    x2 = x * x
    x4 = x2 * x2
    x7 = x4 * x2 * x
    g1 = exp(-80.0 * x2)
    g2 = exp(-80.0 * (x - 0.5) * (x - 0.5))
    g3 = exp(-40.0 * (x + 0.5) * (x + 0.5))
    return 4.0 * (
        8.0 * x7 - 128.0 * x * g1 - 32.0 * (x - 0.5) * g2 - 40.0 * (x + 0.5) * g3
    )
