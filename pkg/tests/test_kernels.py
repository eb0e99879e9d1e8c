import os
import subprocess
import sys

import numpy as np
import pytest
from scipy.integrate import quad

from stackcost import kernels


def shape_reference(l, sqrt_n, p):
    if l <= sqrt_n:
        return 0.5 * (l**3 / 3 - 2 * sqrt_n * l * l + 2 * sqrt_n * sqrt_n * l) * l ** (2 * p - 4)
    return max(2 * sqrt_n - l, 0.0) ** 3 / 6 * l ** (2 * p - 4)


@pytest.mark.parametrize("n,p", [(1024, 0.6), (1e6, 0.66), (4e7, 0.45)])
@pytest.mark.parametrize("moment", [0, 1])
def test_adaptive_integral_against_scipy(n, p, moment):
    sn = float(np.sqrt(n))
    mine = kernels.moment_integral(1.0, 2 * sn, sn, p, moment)
    ref, _ = quad(
        lambda l: shape_reference(l, sn, p) * l**moment, 1.0, 2 * sn, points=[sn], limit=400
    )
    assert mine == pytest.approx(ref, rel=1e-10)


def test_partial_intervals():
    sn = 1000.0
    for a, b in [(1.0, 3.0), (900.0, 1100.0), (1999.0, 2000.0)]:
        mine = kernels.moment_integral(a, b, sn, 0.6, 1)
        pts = [sn] if a < sn < b else None
        ref, _ = quad(lambda l: shape_reference(l, sn, 0.6) * l, a, b, points=pts, limit=400)
        assert mine == pytest.approx(ref, rel=1e-9)


def test_empty_interval_is_zero():
    assert kernels.moment_integral(5.0, 5.0, 10.0, 0.6) == 0.0
    assert kernels.moment_integral(7.0, 5.0, 10.0, 0.6) == 0.0


def test_numpy_and_numba_paths_agree():
    sn = float(np.sqrt(2e6))
    for moment in (0, 1):
        scalar = kernels.moment_integral(1.0, 2 * sn, sn, 0.63, moment)
        vector = kernels._adaptive_numpy(1.0, 2 * sn, sn, 0.63, moment, 1e-10)
        assert scalar == pytest.approx(vector, rel=1e-9)


def test_pair_count_paths_agree():
    for side in (2, 3, 7, 16):
        a = kernels.grid_pair_counts(side)
        b = kernels._pair_counts_numpy(side)
        assert np.array_equal(a, b)


def test_density_shape_array_matches_scalar():
    sn = 100.0
    ls = np.linspace(1.0, 200.0, 57)
    arr = kernels.density_shape_array(ls, sn, 0.7)
    for l, v in zip(ls, arr):
        assert v == pytest.approx(kernels.density_shape(float(l), sn, 0.7), rel=1e-12, abs=1e-300)


def test_env_flag_selects_numpy_fallback():
    code = (
        "import stackcost.kernels as k;"
        "print(k.USING_NUMBA);"
        "print(repr(k.moment_integral(1.0, 64.0, 32.0, 0.6, 0)))"
    )
    env = dict(os.environ, STACKCOST_DISABLE_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", code], capture_output=True, text=True, env=env, check=True
    )
    flag, value = out.stdout.split()
    assert flag == "False"
    assert float(value) == pytest.approx(
        kernels.moment_integral(1.0, 64.0, 32.0, 0.6, 0), rel=1e-9
    )
