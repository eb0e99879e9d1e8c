"""Hot numerical kernels: two-region wire-density shape, adaptive quadrature,
and exhaustive grid-pair enumeration.

Every kernel exists twice: a scalar version compiled with numba's ``@njit``
(the default path) and a vectorized pure-numpy version. Setting the
environment variable ``STACKCOST_DISABLE_NUMBA=1`` before import selects the
numpy path; the same happens automatically when numba is not installed.
``benchmarks/bench_kernels.py`` times the two paths against each other.

The density shape handled here is the unnormalized pair-count polynomial of a
square gate array (region boundary at sqrt(N), domain end at 2*sqrt(N)); all
Rent prefactors and the normalization factor are applied by callers.
"""

from __future__ import annotations

import os

import numpy as np

ENV_FLAG = "STACKCOST_DISABLE_NUMBA"

USING_NUMBA = False
if os.environ.get(ENV_FLAG, "").strip().lower() not in ("1", "true", "yes"):
    try:
        from numba import njit as _njit

        USING_NUMBA = True
    except ImportError:  # pragma: no cover - depends on environment
        USING_NUMBA = False

if not USING_NUMBA:

    def _njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def deco(func):
            return func

        return deco


# 15-point Kronrod extension of 7-point Gauss on [-1, 1]. The Gauss weight
# vector is zero-padded at Kronrod-only nodes so both rules share one sweep.
_GK_NODES = np.array(
    [
        -0.991455371120813,
        -0.949107912342759,
        -0.864864423359769,
        -0.741531185599394,
        -0.586087235467691,
        -0.405845151377397,
        -0.207784955007898,
        0.0,
        0.207784955007898,
        0.405845151377397,
        0.586087235467691,
        0.741531185599394,
        0.864864423359769,
        0.949107912342759,
        0.991455371120813,
    ]
)
_GK_WK = np.array(
    [
        0.022935322010529,
        0.063092092629979,
        0.104790010322250,
        0.140653259715525,
        0.169004726639267,
        0.190350578064785,
        0.204432940075298,
        0.209482141084728,
        0.204432940075298,
        0.190350578064785,
        0.169004726639267,
        0.140653259715525,
        0.104790010322250,
        0.063092092629979,
        0.022935322010529,
    ]
)
_GK_WG = np.array(
    [
        0.0,
        0.129484966168870,
        0.0,
        0.279705391489277,
        0.0,
        0.381830050505119,
        0.0,
        0.417959183673469,
        0.0,
        0.381830050505119,
        0.0,
        0.279705391489277,
        0.0,
        0.129484966168870,
        0.0,
    ]
)

_MAX_PANELS = 4096


@_njit(cache=True)
def _shape_scalar(l: float, sqrt_n: float, p: float) -> float:
    if l <= sqrt_n:
        poly = l * l * l / 3.0 - 2.0 * sqrt_n * l * l + 2.0 * sqrt_n * sqrt_n * l
        return 0.5 * poly * l ** (2.0 * p - 4.0)
    d = 2.0 * sqrt_n - l
    if d <= 0.0:
        return 0.0
    return d * d * d / 6.0 * l ** (2.0 * p - 4.0)


@_njit(cache=True)
def _gk15_scalar(a: float, b: float, sqrt_n: float, p: float, moment: int):
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    ik = 0.0
    ig = 0.0
    l1 = 0.0
    for j in range(15):
        x = c + h * _GK_NODES[j]
        f = _shape_scalar(x, sqrt_n, p)
        if moment == 1:
            f *= x
        ik += _GK_WK[j] * f
        ig += _GK_WG[j] * f
        l1 += _GK_WK[j] * abs(f)
    return ik * h, abs(ik - ig) * h, l1 * abs(h)


@_njit(cache=True)
def _adaptive_scalar(
    a: float, b: float, sqrt_n: float, p: float, moment: int, rel_tol: float
) -> float:
    st_a = np.empty(_MAX_PANELS)
    st_b = np.empty(_MAX_PANELS)
    n = 0
    if a < sqrt_n < b:
        st_a[0] = a
        st_b[0] = sqrt_n
        st_a[1] = sqrt_n
        st_b[1] = b
        n = 2
    else:
        st_a[0] = a
        st_b[0] = b
        n = 1

    ref = 0.0
    for i in range(n):
        v, _, _ = _gk15_scalar(st_a[i], st_b[i], sqrt_n, p, moment)
        ref += abs(v)
    if ref <= 0.0:
        ref = 1e-300

    inv_width = 1.0 / (b - a)
    min_width = 1e-14 * (b - a)
    total = 0.0
    while n > 0:
        n -= 1
        pa = st_a[n]
        pb = st_b[n]
        v, e, l1 = _gk15_scalar(pa, pb, sqrt_n, p, moment)
        width = pb - pa
        # Accept on the width-proportional budget, or when the estimate has
        # reached the float64 noise floor of the panel itself (splitting
        # further cannot improve it), or on stack exhaustion.
        if (
            e <= rel_tol * ref * width * inv_width
            or e <= 5e-15 * l1
            or width <= min_width
            or n >= _MAX_PANELS - 2
        ):
            total += v
        else:
            m = 0.5 * (pa + pb)
            st_a[n] = pa
            st_b[n] = m
            st_a[n + 1] = m
            st_b[n + 1] = pb
            n += 2
    return total


@_njit(cache=True)
def _pair_counts_scalar(side: int) -> np.ndarray:
    n = side * side
    counts = np.zeros(max(2 * (side - 1), 0) + 1, dtype=np.int64)
    for i in range(n):
        xi = i % side
        yi = i // side
        for j in range(i + 1, n):
            xj = j % side
            yj = j // side
            counts[abs(xi - xj) + abs(yi - yj)] += 1
    return counts


def _shape_array(ls: np.ndarray, sqrt_n: float, p: float) -> np.ndarray:
    ls = np.asarray(ls, dtype=np.float64)
    power = ls ** (2.0 * p - 4.0)
    region1 = 0.5 * (ls**3 / 3.0 - 2.0 * sqrt_n * ls**2 + 2.0 * sqrt_n * sqrt_n * ls)
    tail = np.maximum(2.0 * sqrt_n - ls, 0.0)
    region2 = tail**3 / 6.0
    return np.where(ls <= sqrt_n, region1, region2) * power


def _gk15_array(pa: np.ndarray, pb: np.ndarray, sqrt_n: float, p: float, moment: int):
    c = 0.5 * (pa + pb)
    h = 0.5 * (pb - pa)
    xs = c[:, None] + h[:, None] * _GK_NODES[None, :]
    fs = _shape_array(xs.ravel(), sqrt_n, p).reshape(xs.shape)
    if moment == 1:
        fs = fs * xs
    ik = fs @ _GK_WK * h
    ig = fs @ _GK_WG * h
    l1 = np.abs(fs) @ _GK_WK * np.abs(h)
    return ik, np.abs(ik - ig), l1


def _adaptive_numpy(
    a: float, b: float, sqrt_n: float, p: float, moment: int, rel_tol: float
) -> float:
    if a < sqrt_n < b:
        pa = np.array([a, sqrt_n])
        pb = np.array([sqrt_n, b])
    else:
        pa = np.array([a])
        pb = np.array([b])

    ik, _, _ = _gk15_array(pa, pb, sqrt_n, p, moment)
    ref = float(np.sum(np.abs(ik))) or 1e-300

    inv_width = 1.0 / (b - a)
    min_width = 1e-14 * (b - a)
    total = 0.0
    for _ in range(64):
        ik, err, l1 = _gk15_array(pa, pb, sqrt_n, p, moment)
        widths = pb - pa
        done = (
            (err <= rel_tol * ref * widths * inv_width)
            | (err <= 5e-15 * l1)
            | (widths <= min_width)
        )
        total += float(np.sum(ik[done]))
        if np.all(done) or pa.size > _MAX_PANELS:
            total += float(np.sum(ik[~done]))
            break
        ra, rb = pa[~done], pb[~done]
        mid = 0.5 * (ra + rb)
        pa = np.concatenate([ra, mid])
        pb = np.concatenate([mid, rb])
    return total


def _pair_counts_numpy(side: int) -> np.ndarray:
    n = side * side
    xs = np.arange(n, dtype=np.int64) % side
    ys = np.arange(n, dtype=np.int64) // side
    dist = np.abs(xs[:, None] - xs[None, :]) + np.abs(ys[:, None] - ys[None, :])
    iu = np.triu_indices(n, k=1)
    return np.bincount(dist[iu], minlength=max(2 * (side - 1), 0) + 1)


def moment_integral(
    a: float,
    b: float,
    sqrt_n: float,
    p: float,
    moment: int = 0,
    rel_tol: float = 1e-10,
) -> float:
    """Integrate ``shape(l) * l**moment`` over [a, b] adaptively.

    The region boundary ``sqrt_n`` is always forced to be a panel endpoint
    because the shape has a derivative kink there.
    """
    if b <= a:
        return 0.0
    if USING_NUMBA:
        return float(_adaptive_scalar(a, b, sqrt_n, p, moment, rel_tol))
    return _adaptive_numpy(a, b, sqrt_n, p, moment, rel_tol)


def density_shape(l: float, sqrt_n: float, p: float) -> float:
    """Unnormalized two-region density shape at a single length."""
    if USING_NUMBA:
        return float(_shape_scalar(l, sqrt_n, p))
    return float(_shape_array(np.array([l]), sqrt_n, p)[0])


def density_shape_array(ls: np.ndarray, sqrt_n: float, p: float) -> np.ndarray:
    """Vectorized unnormalized density shape."""
    return _shape_array(ls, sqrt_n, p)


def grid_pair_counts(side: int) -> np.ndarray:
    """Exhaustively enumerate unordered cell pairs of a side x side array.

    Returns an int64 array indexed by Manhattan distance (index 0 unused).
    """
    if side < 1:
        raise ValueError("side must be >= 1")
    if side == 1:
        return np.zeros(1, dtype=np.int64)
    if USING_NUMBA:
        return _pair_counts_scalar(side)
    return _pair_counts_numpy(side)


def warm_up() -> None:
    """Trigger JIT compilation of the hot kernels on tiny inputs."""
    moment_integral(1.0, 4.0, 2.0, 0.6, 0, 1e-6)
    moment_integral(1.0, 4.0, 2.0, 0.6, 1, 1e-6)
    density_shape(1.5, 2.0, 0.6)
    grid_pair_counts(2)
