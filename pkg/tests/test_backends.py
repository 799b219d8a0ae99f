"""Parity between the compiled and pure-Python stepping backends."""

import numpy as np
import pytest

from koopspec import _sde_fallback
from koopspec import dynamics


def _normals(n, seed=0):
    return dynamics._standard_normals(seed, n)


@pytest.fixture(scope="module")
def compiled():
    try:
        from koopspec import _sde
    except ImportError:
        pytest.skip("compiled extension not built")
    return _sde


def test_ou_paths_bit_identical(compiled):
    eps = _normals(5000, seed=1)
    out_c = np.empty(3000)
    out_p = np.empty(3000)
    a, c = np.exp(-1.0), np.sqrt(1.0 - np.exp(-2.0))
    compiled.ou_path(a, c, 0.4, eps, 2001, out_c)
    _sde_fallback.ou_path(a, c, 0.4, eps, 2001, out_p)
    assert np.array_equal(out_c, out_p)


@pytest.mark.parametrize("kind", [0, 1])
def test_langevin_paths_bit_identical(compiled, kind):
    eps = _normals(20_000, seed=2)
    out_c = np.empty(1500)
    out_p = np.empty(1500)
    h, s = 1e-3, np.sqrt(2e-3)
    rc = compiled.langevin_path(kind, 1.0, h, s, 10, 0.1, eps, 5010, out_c, 10.0)
    rp = _sde_fallback.langevin_path(kind, 1.0, h, s, 10, 0.1, eps, 5010, out_p, 10.0)
    assert rc == rp == 0
    assert np.array_equal(out_c, out_p)


def test_blow_up_step_index_matches(compiled):
    eps = _normals(100, seed=3)
    out = np.empty(5)
    args = (0, 1.0, 3.0, 0.1, 2, 1.0, eps, 0, out, 10.0)
    assert compiled.langevin_path(*args) == _sde_fallback.langevin_path(*args)
    assert compiled.langevin_path(*args) > 0
