# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled SDE stepping kernels.

Expression order matches ``_sde_fallback.py`` exactly and the module is
compiled with ``-ffp-contract=off``; together with libm's ``exp`` this keeps
the compiled and pure-Python paths bit-identical.
"""

from libc.math cimport exp

BACKEND = "cython"

POTENTIAL_QUADRATIC = 0
POTENTIAL_TRIPLE_WELL = 1


def ou_path(double a, double c, double x, double[::1] eps, long burn,
            double[::1] out):
    cdef Py_ssize_t k = 0, t
    cdef long b
    for b in range(burn):
        x = a * x + c * eps[k]
        k += 1
    out[0] = x
    for t in range(1, out.shape[0]):
        x = a * x + c * eps[k]
        k += 1
        out[t] = x
    return 0


cdef inline double _drift(int kind, double theta, double x) nogil:
    cdef double x2, x4, x7, g1, g2, g3
    if kind == 0:
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


def langevin_path(int kind, double theta, double h, double s, long substeps,
                  double x, double[::1] eps, long burn_sub, double[::1] out,
                  double bound):
    cdef Py_ssize_t k = 0, t
    cdef long b, j
    for b in range(burn_sub):
        x = x - h * _drift(kind, theta, x) + s * eps[k]
        k += 1
        if x > bound or x < -bound:
            return k
    out[0] = x
    for t in range(1, out.shape[0]):
        for j in range(substeps):
            x = x - h * _drift(kind, theta, x) + s * eps[k]
            k += 1
            if x > bound or x < -bound:
                return k
        out[t] = x
    return 0
