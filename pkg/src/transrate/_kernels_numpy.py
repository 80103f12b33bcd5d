"""Pure-numpy implementations of the hot loops.

Every function here has a twin with the same signature in
``_kernels_numba``; ``_backend`` picks one at import time.
"""
import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TWO_POW_M53 = 1.0 / 9007199254740992.0
_TWO_PI = 6.283185307179586


def normalize_rows(X):
    X = np.asarray(X, dtype=np.float64)
    norms = np.sqrt(np.einsum("ij,ij->i", X, X))
    zero = norms == 0.0
    safe = np.where(zero, 1.0, norms)
    return X / safe[:, None], int(zero.sum())


def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def counter_bits(key, start, count):
    """SplitMix64 outputs ``start .. start+count-1`` of the stream keyed by ``key``."""
    i = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _mix(np.uint64(key) + i * GOLDEN)


def counter_normals(key, count):
    """Standard normals by Box-Muller over consecutive counter pairs."""
    pairs = (count + 1) // 2
    bits = counter_bits(key, 0, 2 * pairs)
    u1 = ((bits[0::2] >> np.uint64(11)).astype(np.float64) + 1.0) * _TWO_POW_M53
    u2 = (bits[1::2] >> np.uint64(11)).astype(np.float64) * _TWO_POW_M53
    r = np.sqrt(-2.0 * np.log(u1))
    theta = _TWO_PI * u2
    out = np.empty(2 * pairs)
    out[0::2] = r * np.cos(theta)
    out[1::2] = r * np.sin(theta)
    return out[:count]


def histogram_cells(X, lo, hi, bins):
    """Flat equal-width cell index per row; the top edge falls in the last bin."""
    n, d = X.shape
    cells = np.zeros(n, dtype=np.int64)
    for j in range(d):
        span = hi[j] - lo[j]
        if span > 0.0:
            k = np.floor((X[:, j] - lo[j]) / span * bins).astype(np.int64)
            k = np.minimum(k, bins - 1)
        else:
            k = np.zeros(n, dtype=np.int64)
        cells = cells * bins + k
    return cells


def kendall_counts(x, y, chunk=512):
    """Return ``(n0, n1, n2, s)``: pair count, x-tied pairs, y-tied pairs, concordant - discordant."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = x.size
    n1 = n2 = s = 0
    for a in range(0, n, chunk):
        b = min(a + chunk, n)
        sx = np.sign(x[a:b, None] - x[None, :])
        sy = np.sign(y[a:b, None] - y[None, :])
        # keep only pairs i < j
        upper = np.arange(a, b)[:, None] < np.arange(n)[None, :]
        s += int((sx * sy)[upper].sum())
        n1 += int(((sx == 0) & upper).sum())
        n2 += int(((sy == 0) & upper).sum())
    return n * (n - 1) // 2, n1, n2, s


def weighted_pair_terms(x, y, w):
    """Per-pair terms for the weighted tau.

    Returns three arrays over pairs i < j: the signed agreement term
    ``(w_i + w_j) * sign(dx) * sign(dy)`` and the pair weight masked to
    pairs untied in x and in y respectively.
    """
    iu, ju = np.triu_indices(x.size, k=1)
    t = w[iu] + w[ju]
    sx = np.sign(x[iu] - x[ju])
    sy = np.sign(y[iu] - y[ju])
    return t * (sx * sy), np.where(sx != 0, t, 0.0), np.where(sy != 0, t, 0.0)
