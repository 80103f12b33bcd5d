"""Score-vs-accuracy correlation metrics and model rankings."""
import math
from typing import NamedTuple

import numpy as np

from ._backend import kernels
from .errors import AllTied, MixedConfig, ZeroVariance


def _pair_arrays(scores, accuracies):
    x = np.asarray(scores, dtype=np.float64).ravel()
    y = np.asarray(accuracies, dtype=np.float64).ravel()
    if x.size != y.size:
        raise ValueError("scores and accuracies differ in length")
    if x.size < 2:
        raise ValueError("need at least two entries")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise ValueError("scores and accuracies must be finite")
    return x, y


def pearson(scores, accuracies):
    x, y = _pair_arrays(scores, accuracies)
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(xc @ xc)
    syy = float(yc @ yc)
    if sxx == 0.0 or syy == 0.0:
        raise ZeroVariance("Pearson correlation needs variance on both sides")
    r = float(xc @ yc) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def tau_b(n0, n1, n2, s):
    """Close a tau-b from its pair counts."""
    if n0 - n1 == 0 or n0 - n2 == 0:
        raise AllTied("all pairs tied on one side")
    return s / math.sqrt(float((n0 - n1) * (n0 - n2)))


def kendall_tau(scores, accuracies):
    """Tie-corrected Kendall tau-b."""
    x, y = _pair_arrays(scores, accuracies)
    return tau_b(*kernels.kendall_counts(x, y))


def lexical_rank(primary, secondary):
    """Rank 0 for the largest ``(primary, secondary)``; full ties put the later index first."""
    order = np.lexsort((secondary, primary))
    rank = np.empty(order.size, dtype=np.int64)
    rank[order[::-1]] = np.arange(order.size)
    return rank


def weighted_tau_closing(signed, wx, wy):
    num = math.fsum(signed)
    dx = math.fsum(wx)
    dy = math.fsum(wy)
    if dx == 0.0 or dy == 0.0:
        raise AllTied("all pairs tied on one side")
    return num / math.sqrt(dx * dy)


def _weighted_tau_ranked(x, y, rank):
    w = 1.0 / (rank + 1.0)
    signed, wx, wy = kernels.weighted_pair_terms(x, y, w)
    return weighted_tau_closing(signed.tolist(), wx.tolist(), wy.tolist())


def weighted_tau(scores, accuracies):
    """Hyperbolic additive weighted tau, averaged over both ranking sources.

    Item weights are ``1 / (rank + 1)`` with rank 0 the top item, and a pair
    weighs the sum of its two item weights. Sums are exactly rounded, so the
    value does not depend on pair order.
    """
    x, y = _pair_arrays(scores, accuracies)
    by_acc = _weighted_tau_ranked(x, y, lexical_rank(y, x))
    by_score = _weighted_tau_ranked(x, y, lexical_rank(x, y))
    return (by_acc + by_score) / 2


class Correlations(NamedTuple):
    pearson: float
    kendall_tau: float
    weighted_tau: float


def evaluate(pairs):
    """All three metrics over ``(model_name, score, accuracy)`` triples."""
    pairs = list(pairs)
    names = [p[0] for p in pairs]
    if len(set(names)) != len(names):
        raise ValueError("model names must be unique")
    x = [p[1] for p in pairs]
    y = [p[2] for p in pairs]
    return Correlations(pearson(x, y), kendall_tau(x, y), weighted_tau(x, y))


class RankedEntry(NamedTuple):
    rank: int
    score: float
    model_name: str


def rank_models(scores):
    """Order ``TransferScore`` records best-first; equal scores sort by name."""
    scores = list(scores)
    if not scores:
        return []
    keys = {(s.method, s.config_fingerprint) for s in scores}
    if len(keys) > 1:
        raise MixedConfig(f"cannot rank scores from different methods/configs: {sorted(keys)}")
    ordered = sorted(scores, key=lambda s: (-s.value, s.model_name))
    return [RankedEntry(i + 1, s.value, s.model_name) for i, s in enumerate(ordered)]
