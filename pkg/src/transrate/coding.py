"""Coding rate and the TransRate transferability score.

The coding rate of ``n`` samples ``Z`` (rows) at distortion ``eps`` is::

    R(Z, eps) = 1/2 * logdet(I + Z^T Z / (n * eps))

and TransRate is ``R(Z, eps) - R(Z, eps | Y)`` where the conditional term
combines per-class coding rates.  ``eps`` is the exact value that appears
in the ``1 / (n * eps)`` factor.
"""
import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import matcore
from .errors import DegenerateLabels, EmptyClass, TooFewSamples

EMPIRICAL = "empirical"
UNIFORM = "uniform"
RAWSUM = "rawsum"
WEIGHTINGS = (EMPIRICAL, UNIFORM, RAWSUM)

CLASSIFICATION = "classification"
REGRESSION = "regression"


@dataclass(frozen=True)
class Labels:
    """Target labels: integer class ids or real regression targets."""

    kind: str
    values: np.ndarray = field(compare=False)
    n_classes: int = None

    def __post_init__(self):
        if self.kind == CLASSIFICATION:
            v = np.asarray(self.values)
            if v.ndim != 1 or v.size == 0:
                raise ValueError("labels must be a non-empty 1-D array")
            if not np.issubdtype(v.dtype, np.integer):
                if not np.all(np.isfinite(v)) or not np.all(v == np.round(v)):
                    raise ValueError("classification labels must be integers")
            v = v.astype(np.int64)
            if v.min() < 0:
                raise ValueError("class ids must be non-negative")
            C = self.n_classes if self.n_classes is not None else int(v.max()) + 1
            if v.max() >= C:
                raise ValueError(f"class id {int(v.max())} out of range for {C} classes")
            object.__setattr__(self, "values", v)
            object.__setattr__(self, "n_classes", int(C))
        elif self.kind == REGRESSION:
            v = np.asarray(self.values, dtype=np.float64)
            if v.ndim != 1 or v.size == 0 or not np.isfinite(v).all():
                raise ValueError("regression targets must be a non-empty finite 1-D array")
            object.__setattr__(self, "values", v)
        else:
            raise ValueError(f"unknown label kind {self.kind!r}")

    @classmethod
    def classification(cls, values, n_classes=None):
        return cls(CLASSIFICATION, values, n_classes)

    @classmethod
    def regression(cls, values):
        return cls(REGRESSION, values)

    def __len__(self):
        return self.values.size

    def counts(self):
        return np.bincount(self.values, minlength=self.n_classes)


def as_labels(y):
    if isinstance(y, Labels):
        return y
    return Labels.classification(y)


@dataclass(frozen=True)
class ScoreConfig:
    eps: float = 1e-4
    unit_norm: bool = True
    per_dim: bool = True
    class_weighting: str = EMPIRICAL
    subtract_label_entropy: bool = False
    regression_bins: int = 10

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.regression_bins < 2:
            raise ValueError("regression_bins must be at least 2")
        if self.class_weighting not in WEIGHTINGS:
            raise ValueError(f"class_weighting must be one of {WEIGHTINGS}")

    def fingerprint(self):
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class TransferScore:
    model_name: str
    method: str
    value: float
    config_fingerprint: str
    n: int
    d: int
    C: int
    raw: float = None

    def to_dict(self):
        return asdict(self)


def coding_rate(F, eps, threads=None):
    """``1/2 logdet(I + F^T F / (n eps))`` in nats, on the cheaper Gram side."""
    F = matcore.as_features(F)
    if not eps > 0:
        raise ValueError("eps must be positive")
    n = F.shape[0]
    G = matcore.gram(F, matcore.AUTO, threads=threads)
    return 0.5 * matcore.logdet_ipd(G, 1.0 / (n * eps))


def _class_rows(y, C):
    counts = np.bincount(y, minlength=C)
    for c in range(C):
        if counts[c] == 0:
            raise EmptyClass(c)
    order = np.argsort(y, kind="stable")
    bounds = np.concatenate([[0], np.cumsum(counts)])
    return [order[bounds[c]:bounds[c + 1]] for c in range(C)], counts


def class_coding_rates(F, y, eps, threads=None):
    """Per-class coding rates, each with its own ``1 / (n_c eps)`` factor."""
    F = matcore.as_features(F)
    y = as_labels(y)
    if y.kind != CLASSIFICATION:
        raise ValueError("bin regression targets before computing class rates")
    if len(y) != F.shape[0]:
        raise ValueError(f"{len(y)} labels for {F.shape[0]} feature rows")
    rows, counts = _class_rows(y.values, y.n_classes)
    threads = matcore.resolve_threads(threads)

    def one(idx):
        return coding_rate(F[idx], eps, threads=1)

    with matcore.single_threaded_blas():
        if threads > 1 and len(rows) > 1:
            with ThreadPoolExecutor(threads) as pool:
                rates = list(pool.map(one, rows))
        else:
            rates = [one(idx) for idx in rows]
    return np.array(rates), counts


def _combine(rates, counts, weighting):
    # fsum is exactly rounded, so the result does not depend on class order
    if weighting == EMPIRICAL:
        n = counts.sum()
        return math.fsum((counts * rates).tolist()) / n
    if weighting == UNIFORM:
        return math.fsum(rates.tolist()) / rates.size
    if weighting == RAWSUM:
        return math.fsum(rates.tolist())
    raise ValueError(f"unknown class weighting {weighting!r}")


def conditional_coding_rate(F, y, eps, weighting=EMPIRICAL, threads=None):
    rates, counts = class_coding_rates(F, y, eps, threads=threads)
    return _combine(rates, counts, weighting)


def bin_regression_labels(y, bins=10):
    """Equal-count binning of regression targets into ``bins`` ordered classes.

    Ties are broken by original index; the first ``n % bins`` groups get one
    extra member.
    """
    values = y.values if isinstance(y, Labels) else np.asarray(y, dtype=np.float64)
    n = values.size
    if n < bins:
        raise TooFewSamples(f"{n} samples cannot fill {bins} bins")
    order = np.argsort(values, kind="stable")
    base, extra = divmod(n, bins)
    sizes = np.full(bins, base)
    sizes[:extra] += 1
    ids = np.empty(n, dtype=np.int64)
    ids[order] = np.repeat(np.arange(bins), sizes)
    return Labels.classification(ids, bins)


def label_entropy(y):
    """Plug-in entropy of the class distribution, in nats."""
    y = as_labels(y)
    counts = y.counts()
    p = counts[counts > 0] / counts.sum()
    return float(-np.sum(p * np.log(p)))


def transrate(F, y, cfg=None, model_name="", threads=None):
    """Score one feature matrix against target labels.

    Pipeline: optional row normalization, coding rate minus conditional
    coding rate, optional label-entropy subtraction, optional division by
    the feature dimension.
    """
    cfg = cfg or ScoreConfig()
    F = matcore.as_features(F)
    y = as_labels(y)
    if y.kind == REGRESSION:
        y = bin_regression_labels(y, cfg.regression_bins)
    n, d = F.shape
    if len(y) != n:
        raise ValueError(f"{len(y)} labels for {n} feature rows")
    if y.n_classes < 2:
        raise DegenerateLabels("need at least two classes")
    if n < y.n_classes:
        raise TooFewSamples(f"{n} samples for {y.n_classes} classes")

    if cfg.unit_norm:
        F, _ = matcore.unit_normalize_rows(F)
    with matcore.single_threaded_blas():
        whole = coding_rate(F, cfg.eps, threads=threads)
        cond = conditional_coding_rate(F, y, cfg.eps, cfg.class_weighting, threads=threads)
    raw = whole - cond
    value = raw
    if cfg.subtract_label_entropy:
        value -= label_entropy(y)
    if cfg.per_dim:
        value /= d
    return TransferScore(model_name, "transrate", float(value), cfg.fingerprint(),
                         n, d, y.n_classes, float(raw))
