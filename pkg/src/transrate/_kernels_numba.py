"""numba versions of the kernels in ``_kernels_numpy``."""
import numpy as np
from numba import njit

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S11 = np.uint64(11)
_S27 = np.uint64(27)
_S30 = np.uint64(30)
_S31 = np.uint64(31)
_TWO_POW_M53 = 1.0 / 9007199254740992.0
_TWO_PI = 6.283185307179586


@njit(cache=True)
def _normalize_rows(X):
    n, d = X.shape
    out = np.empty_like(X)
    zeros = 0
    for i in range(n):
        acc = 0.0
        for j in range(d):
            acc += X[i, j] * X[i, j]
        if acc == 0.0:
            zeros += 1
            for j in range(d):
                out[i, j] = X[i, j]
        else:
            nrm = np.sqrt(acc)
            for j in range(d):
                out[i, j] = X[i, j] / nrm
    return out, zeros


def normalize_rows(X):
    out, zeros = _normalize_rows(np.ascontiguousarray(X, dtype=np.float64))
    return out, int(zeros)


@njit(cache=True)
def _mix(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True)
def _counter_bits(key, start, count):
    out = np.empty(count, dtype=np.uint64)
    for k in range(count):
        i = np.uint64(start + k + 1)
        out[k] = _mix(key + i * GOLDEN)
    return out


def counter_bits(key, start, count):
    return _counter_bits(np.uint64(key), start, count)


@njit(cache=True)
def _counter_normals(key, count):
    pairs = (count + 1) // 2
    out = np.empty(2 * pairs)
    for p in range(pairs):
        b1 = _mix(key + np.uint64(2 * p + 1) * GOLDEN)
        b2 = _mix(key + np.uint64(2 * p + 2) * GOLDEN)
        u1 = (float(b1 >> _S11) + 1.0) * _TWO_POW_M53
        u2 = float(b2 >> _S11) * _TWO_POW_M53
        r = np.sqrt(-2.0 * np.log(u1))
        theta = _TWO_PI * u2
        out[2 * p] = r * np.cos(theta)
        out[2 * p + 1] = r * np.sin(theta)
    return out[:count]


def counter_normals(key, count):
    return _counter_normals(np.uint64(key), count)


@njit(cache=True)
def _histogram_cells(X, lo, hi, bins):
    n, d = X.shape
    cells = np.zeros(n, dtype=np.int64)
    for i in range(n):
        c = 0
        for j in range(d):
            span = hi[j] - lo[j]
            k = 0
            if span > 0.0:
                k = int(np.floor((X[i, j] - lo[j]) / span * bins))
                if k > bins - 1:
                    k = bins - 1
            c = c * bins + k
        cells[i] = c
    return cells


def histogram_cells(X, lo, hi, bins):
    return _histogram_cells(np.ascontiguousarray(X, dtype=np.float64),
                            np.asarray(lo, dtype=np.float64),
                            np.asarray(hi, dtype=np.float64), bins)


@njit(cache=True)
def _tied_pairs(v):
    # v sorted ascending
    total = 0
    run = 1
    for i in range(1, v.size):
        if v[i] == v[i - 1]:
            run += 1
        else:
            total += run * (run - 1) // 2
            run = 1
    return total + run * (run - 1) // 2


@njit(cache=True)
def _knight(xs, ys):
    # xs, ys ordered lexicographically by (x, y)
    n = xs.size
    n1 = _tied_pairs(xs)
    n3 = 0
    run = 1
    for i in range(1, n):
        if xs[i] == xs[i - 1] and ys[i] == ys[i - 1]:
            run += 1
        else:
            n3 += run * (run - 1) // 2
            run = 1
    n3 += run * (run - 1) // 2

    # bottom-up merge sort of ys counting inversions
    a = ys.copy()
    buf = np.empty_like(a)
    swaps = 0
    width = 1
    while width < n:
        for lo in range(0, n, 2 * width):
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            i, j, k = lo, mid, lo
            while i < mid and j < hi:
                if a[j] < a[i]:
                    buf[k] = a[j]
                    swaps += mid - i
                    j += 1
                else:
                    buf[k] = a[i]
                    i += 1
                k += 1
            while i < mid:
                buf[k] = a[i]
                i += 1
                k += 1
            while j < hi:
                buf[k] = a[j]
                j += 1
                k += 1
        a, buf = buf, a
        width *= 2
    n2 = _tied_pairs(a)
    n0 = n * (n - 1) // 2
    return n0, n1, n2, n0 - n1 - n2 + n3 - 2 * swaps


def kendall_counts(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    order = np.lexsort((y, x))
    n0, n1, n2, s = _knight(x[order], y[order])
    return int(n0), int(n1), int(n2), int(s)


@njit(cache=True)
def _weighted_pair_terms(x, y, w):
    n = x.size
    m = n * (n - 1) // 2
    signed = np.empty(m)
    wx = np.empty(m)
    wy = np.empty(m)
    p = 0
    for i in range(n):
        for j in range(i + 1, n):
            t = w[i] + w[j]
            sx = np.sign(x[i] - x[j])
            sy = np.sign(y[i] - y[j])
            signed[p] = t * (sx * sy)
            wx[p] = t if sx != 0 else 0.0
            wy[p] = t if sy != 0 else 0.0
            p += 1
    return signed, wx, wy


def weighted_pair_terms(x, y, w):
    return _weighted_pair_terms(np.asarray(x, dtype=np.float64),
                                np.asarray(y, dtype=np.float64),
                                np.asarray(w, dtype=np.float64))
