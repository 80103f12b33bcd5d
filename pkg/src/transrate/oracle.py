"""Independent reference machinery.

Brute-force metric definitions, a plug-in histogram mutual-information
estimator, and seeded synthetic data generators.  Nothing here calls the
fast paths it is used to check.

Random streams use SplitMix64 outputs keyed per purpose and Box-Muller for
normals, so a seed fixes the output on every platform.
"""
import math
from dataclasses import dataclass, field, replace

import numpy as np

from ._backend import kernels
from .coding import Labels, as_labels
from .errors import DimensionTooHigh, TooFewSamples

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

STREAM_NOISE = 1
STREAM_PERMUTATION = 2
STREAM_MEANS = 3
STREAM_LABELS = 4


def splitmix64(state, index):
    """Output ``index`` (0-based) of SplitMix64 started at ``state``."""
    z = (state + (index + 1) * _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def stream_key(seed, stream):
    return splitmix64(int(seed) & _MASK, int(stream))


def normals(seed, stream, count):
    return kernels.counter_normals(stream_key(seed, stream), count)


def uniforms(seed, stream, count):
    bits = kernels.counter_bits(stream_key(seed, stream), 0, count)
    return (bits >> np.uint64(11)).astype(np.float64) / 9007199254740992.0


def permutation(seed, stream, n):
    bits = kernels.counter_bits(stream_key(seed, stream), 0, n)
    return np.argsort(bits, kind="stable")


# -- synthetic data ---------------------------------------------------------

@dataclass(frozen=True)
class BlobSpec:
    means: np.ndarray = field(compare=False)
    std: float = 1.0
    per_class: int = 100
    seed: int = 0

    def __post_init__(self):
        m = np.atleast_2d(np.asarray(self.means, dtype=np.float64))
        if not self.std > 0:
            raise ValueError("std must be positive")
        if self.per_class < 1:
            raise ValueError("per_class must be at least 1")
        object.__setattr__(self, "means", m)

    @property
    def classes(self):
        return self.means.shape[0]

    @property
    def dim(self):
        return self.means.shape[1]


def gen_blobs(spec):
    """Isotropic Gaussian blobs; rows are grouped by class, then shuffled.

    The noise stream depends only on the seed and shape, so changing the
    means or std with a fixed seed moves the same underlying draws.
    """
    C, d, m = spec.classes, spec.dim, spec.per_class
    n = C * m
    noise = normals(spec.seed, STREAM_NOISE, n * d).reshape(n, d)
    y = np.repeat(np.arange(C), m)
    Z = spec.means[y] + spec.std * noise
    perm = permutation(spec.seed, STREAM_PERMUTATION, n)
    return Z[perm], Labels.classification(y[perm], C)


def random_means(classes, dim, radius, seed):
    """Class means on a sphere of ``radius`` in random directions."""
    g = normals(seed, STREAM_MEANS, classes * dim).reshape(classes, dim)
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return radius * g


def planar_means(classes, dim, radius):
    """Means spread over half a circle in the first two coordinates.

    Directions cover 0 to 180 degrees exclusive, so no two classes are
    antipodal (an uncentered Gram cannot tell ``v`` from ``-v``).
    """
    theta = np.pi * np.arange(classes) / classes
    m = np.zeros((classes, dim))
    m[:, 0] = radius * np.cos(theta)
    if dim > 1:
        m[:, 1] = radius * np.sin(theta)
    return m


def separability_sweep(levels, base):
    """``levels`` copies of ``base`` with class means scaled from 0 to 1x.

    Scaling is about the mean of the class means, so level 0 is coincident.
    All other parameters, including the seed, are shared.
    """
    if levels < 3:
        raise ValueError("need at least three levels")
    centre = base.means.mean(axis=0)
    out = []
    for s in np.linspace(0.0, 1.0, levels):
        spec = replace(base, means=centre + s * (base.means - centre))
        out.append(gen_blobs(spec))
    return out


def toy_two_class(spread=1.0, std=0.3, per_class=200, radius=2.0, seed=0):
    """Two 2-D classes whose mean directions open from 0 to 90 degrees as ``spread`` goes 0 to 1."""
    half = 0.25 * np.pi * float(spread)
    base = 0.25 * np.pi
    means = radius * np.array([[np.cos(base - half), np.sin(base - half)],
                               [np.cos(base + half), np.sin(base + half)]])
    return gen_blobs(BlobSpec(means, std, per_class, seed))


# -- histogram mutual information ------------------------------------------

def _entropy_from_counts(counts):
    counts = counts[counts > 0].astype(np.float64)
    p = counts / counts.sum()
    return float(-np.sum(p * np.log(p)))


def histogram_mi(F, y, bins_per_dim=8):
    """Plug-in ``I(Z; Y)`` in nats over equal-width bins (d <= 3)."""
    F = np.atleast_2d(np.asarray(F, dtype=np.float64))
    y = as_labels(y)
    n, d = F.shape
    if d > 3:
        raise DimensionTooHigh(f"histogram MI supports d <= 3, got {d}")
    if bins_per_dim < 2:
        raise ValueError("bins_per_dim must be at least 2")
    if len(y) != n:
        raise ValueError(f"{len(y)} labels for {n} samples")
    C = y.n_classes
    if n < C * bins_per_dim:
        raise TooFewSamples(f"{n} samples for {C} classes x {bins_per_dim} bins")
    cells = kernels.histogram_cells(F, F.min(axis=0), F.max(axis=0), bins_per_dim)
    ncell = bins_per_dim ** d
    joint = np.bincount(cells * C + y.values, minlength=ncell * C).reshape(ncell, C)
    h_z = _entropy_from_counts(joint.sum(axis=1))
    class_n = joint.sum(axis=0)
    h_z_given_y = 0.0
    for c in range(C):
        if class_n[c]:
            h_z_given_y += class_n[c] / n * _entropy_from_counts(joint[:, c])
    return h_z - h_z_given_y


# -- brute-force references -------------------------------------------------

def pearson_direct(x, y):
    n = len(x)
    mx = math.fsum(x) / n
    my = math.fsum(y) / n
    sxy = math.fsum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = math.fsum((a - mx) ** 2 for a in x)
    syy = math.fsum((b - my) ** 2 for b in y)
    return sxy / math.sqrt(sxx * syy)


def _sgn(v):
    return int(v > 0) - int(v < 0)


def kendall_counts_bruteforce(x, y):
    n = len(x)
    n1 = n2 = s = 0
    for i in range(n):
        for j in range(i + 1, n):
            a = _sgn(x[i] - x[j])
            b = _sgn(y[i] - y[j])
            n1 += a == 0
            n2 += b == 0
            s += a * b
    return n * (n - 1) // 2, n1, n2, s


def kendall_tau_bruteforce(x, y):
    n0, n1, n2, s = kendall_counts_bruteforce([float(v) for v in x], [float(v) for v in y])
    return s / math.sqrt(float((n0 - n1) * (n0 - n2)))


def weighted_tau_bruteforce(x, y):
    """Symmetrised hyperbolic weighted tau by direct enumeration of pairs."""
    x = [float(v) for v in x]
    y = [float(v) for v in y]
    n = len(x)

    def ranks(primary, secondary):
        order = sorted(range(n), key=lambda i: (primary[i], secondary[i], i), reverse=True)
        r = [0] * n
        for pos, i in enumerate(order):
            r[i] = pos
        return r

    def one(r):
        w = [1.0 / (r[i] + 1.0) for i in range(n)]
        signed, wx, wy = [], [], []
        for i in range(n):
            for j in range(i + 1, n):
                t = w[i] + w[j]
                a = float(_sgn(x[i] - x[j]))
                b = float(_sgn(y[i] - y[j]))
                signed.append(t * (a * b))
                wx.append(t if a != 0 else 0.0)
                wy.append(t if b != 0 else 0.0)
        return math.fsum(signed) / math.sqrt(math.fsum(wx) * math.fsum(wy))

    return (one(ranks(y, x)) + one(ranks(x, y))) / 2


def histogram_mi_bruteforce(F, y, bins_per_dim):
    """Triple-loop frequency count version of ``histogram_mi``."""
    F = np.atleast_2d(np.asarray(F, dtype=np.float64))
    yv = list(as_labels(y).values)
    n, d = F.shape
    lo = [min(F[i, j] for i in range(n)) for j in range(d)]
    hi = [max(F[i, j] for i in range(n)) for j in range(d)]
    joint, cell_count, class_count = {}, {}, {}
    for i in range(n):
        key = []
        for j in range(d):
            span = hi[j] - lo[j]
            k = 0 if span == 0 else min(int(math.floor((F[i, j] - lo[j]) / span * bins_per_dim)),
                                        bins_per_dim - 1)
            key.append(k)
        key = tuple(key)
        joint[key, yv[i]] = joint.get((key, yv[i]), 0) + 1
        cell_count[key] = cell_count.get(key, 0) + 1
        class_count[yv[i]] = class_count.get(yv[i], 0) + 1
    mi = 0.0
    for (key, c), k in joint.items():
        mi += k / n * math.log(k * n / (cell_count[key] * class_count[c]))
    return mi
