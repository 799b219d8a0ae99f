"""Benchmark the compiled SDE stepping core against the pure-Python fallback.

Usage: python benchmarks/bench_sde.py [steps]

The two backends are bit-identical by construction (same expression order,
libm exp, -ffp-contract=off), so this also asserts exact agreement.
"""

import sys
import time

import numpy as np

from koopspec import _sde_fallback
from koopspec import dynamics

try:
    from koopspec import _sde
except ImportError:
    _sde = None


def time_backend(module, kind, eps, out, reps=3):
    h, s = 1e-3, np.sqrt(2e-3)
    best = np.inf
    for _ in range(reps):
        t0 = time.perf_counter()
        status = module.langevin_path(kind, 1.0, h, s, 10, 0.0, eps,
                                      1000, out, 10.0)
        best = min(best, time.perf_counter() - t0)
        assert status == 0
    return best


def main():
    steps = int(sys.argv[1]) if len(sys.argv) > 1 else 200_000
    n_rec = (steps - 1000) // 10
    eps = dynamics._standard_normals(0, steps)
    print(f"Langevin triple-well stepping, {steps} integration steps "
          f"({n_rec} recorded)")
    out_py = np.empty(n_rec)
    t_py = time_backend(_sde_fallback, 1, eps, out_py)
    print(f"  pure python : {t_py * 1e3:8.1f} ms  "
          f"({steps / t_py / 1e6:.2f} Msteps/s)")
    if _sde is None:
        print("  cython      : extension not built (pip install -e . to compile)")
        return
    out_c = np.empty(n_rec)
    t_c = time_backend(_sde, 1, eps, out_c)
    print(f"  cython      : {t_c * 1e3:8.1f} ms  "
          f"({steps / t_c / 1e6:.2f} Msteps/s)")
    print(f"  speedup     : {t_py / t_c:8.1f}x")
    identical = np.array_equal(out_c, out_py)
    print(f"  bit-identical paths: {identical}")
    if not identical:
        raise SystemExit("backend mismatch")


if __name__ == "__main__":
    main()
