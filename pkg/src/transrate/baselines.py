"""Comparison transferability scores.

All scorers take target-sample inputs only: LEEP and NCE consume the source
classifier's softmax outputs on the target samples in place of source
labels; H-score, LogME and LFC consume the extracted features.
"""
import logging
import warnings

import numpy as np

from . import matcore
from .coding import CLASSIFICATION, as_labels
from .errors import ConvergenceWarning, DegenerateLabels, EmptyClass, SingularCovariance, ZeroKernel

log = logging.getLogger(__name__)


def check_pseudo_labels(P, tol=1e-6):
    """Validate an ``(n, C_s)`` row-stochastic matrix."""
    P = np.asarray(P, dtype=np.float64)
    if P.ndim != 2 or P.size == 0:
        raise ValueError("pseudo-label matrix must be non-empty 2-D")
    if not np.isfinite(P).all() or P.min() < 0.0 or P.max() > 1.0:
        raise ValueError("pseudo-label entries must lie in [0, 1]")
    if np.abs(P.sum(axis=1) - 1.0).max() > tol:
        raise ValueError("pseudo-label rows must sum to 1")
    return P


def _class_ids(y, n):
    y = as_labels(y)
    if y.kind != CLASSIFICATION:
        raise ValueError("classification labels required")
    if len(y) != n:
        raise ValueError(f"{len(y)} labels for {n} samples")
    return y.values, y.n_classes


def leep_score(P, y):
    """Log expected empirical prediction, averaged over samples (<= 0)."""
    P = check_pseudo_labels(P)
    yv, C = _class_ids(y, P.shape[0])
    n = P.shape[0]
    onehot = np.zeros((n, C))
    onehot[np.arange(n), yv] = 1.0
    joint = onehot.T @ P / n                 # (C, C_s) empirical P(y, s)
    marginal = joint.sum(axis=0)
    keep = marginal > 0
    cond = joint[:, keep] / marginal[keep]   # P(y | s)
    expected = np.einsum("is,is->i", P[:, keep], cond[yv])
    return float(np.mean(np.log(expected)))


def nce_score(P, y):
    """Negative conditional entropy ``-H(Y | argmax P)`` from counts (<= 0)."""
    P = check_pseudo_labels(P)
    yv, C = _class_ids(y, P.shape[0])
    n, Cs = P.shape
    hard = np.argmax(P, axis=1)  # ties resolve to the lowest index
    counts = np.zeros((C, Cs))
    np.add.at(counts, (yv, hard), 1.0)
    joint = counts / n
    src = joint.sum(axis=0)
    nz = joint > 0
    cond = np.where(nz, joint / np.where(src > 0, src, 1.0)[None, :], 1.0)
    return float(np.sum(joint[nz] * np.log(cond[nz])))


def hscore(F, y):
    """``tr(cov(F)^-1 cov(E[F | Y]))`` with a small diagonal ridge."""
    F = matcore.as_features(F)
    yv, C = _class_ids(y, F.shape[0])
    n, d = F.shape
    Fc = F - F.mean(axis=0)
    cov = Fc.T @ Fc / n
    counts = np.bincount(yv, minlength=C)
    sums = np.zeros((C, d))
    np.add.at(sums, yv, Fc)
    present = counts > 0
    means = sums[present] / counts[present, None]
    between = (means * (counts[present] / n)[:, None]).T @ means
    ridge = 1e-8 * np.trace(cov) / d
    cov[np.diag_indices(d)] += ridge
    try:
        L = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise SingularCovariance("feature covariance is singular even with ridge") from exc
    W = np.linalg.solve(L, between)
    W = np.linalg.solve(L, W.T)
    return float(np.trace(W))


def _logme_single(s2, UTy, yy, n, tol, max_iter):
    """Evidence maximisation for one target given SVD pieces of F.

    ``s2`` holds the squared singular values (length ``min(n, D)``), ``UTy``
    the projections of ``y`` onto the left singular vectors and ``yy`` its
    squared norm.
    """
    tiny = 1e-5
    alpha, beta = 1.0, 1.0
    # residual energy outside the column space of F
    outside = max(yy - float(UTy @ UTy), 0.0)
    prev = None
    converged = False
    for _ in range(max_iter):
        shrink = beta * s2 / (alpha + beta * s2)
        gamma = float(shrink.sum())
        # posterior mean m = beta V diag(s/(alpha+beta s2)) U^T y
        m2 = float(np.sum((beta * np.sqrt(s2) * UTy / (alpha + beta * s2)) ** 2))
        res2 = float(np.sum(((1.0 - shrink) * UTy) ** 2)) + outside
        if gamma > 0:
            alpha = gamma / (m2 + tiny)
        beta = (n - gamma) / (res2 + tiny)
        shrink = beta * s2 / (alpha + beta * s2)
        m2 = float(np.sum((beta * np.sqrt(s2) * UTy / (alpha + beta * s2)) ** 2))
        res2 = float(np.sum(((1.0 - shrink) * UTy) ** 2)) + outside
        evidence = (
            -0.5 * float(np.sum(np.log1p(beta * s2 / alpha)))
            + 0.5 * n * np.log(beta)
            - 0.5 * alpha * m2
            - 0.5 * beta * res2
            - 0.5 * n * np.log(2 * np.pi)
        ) / n
        if prev is not None and abs(evidence - prev) < tol:
            converged = True
            break
        prev = evidence
    return evidence, alpha, beta, converged


def logme_score(F, y, tol=1e-6, max_iter=100):
    """Mean per-sample log marginal evidence of a Bayesian linear head.

    Classification labels are scored one-vs-rest and averaged; regression
    targets are scored directly. Emits ``ConvergenceWarning`` and returns
    the last iterate if the fixed point does not settle.
    """
    F = matcore.as_features(F)
    n, D = F.shape
    y = as_labels(y)
    if len(y) != n:
        raise ValueError(f"{len(y)} labels for {n} samples")
    if y.kind == CLASSIFICATION:
        counts = y.counts()
        if (counts == 0).any():
            raise EmptyClass(int(np.flatnonzero(counts == 0)[0]))
        targets = np.zeros((n, y.n_classes))
        targets[np.arange(n), y.values] = 1.0
    else:
        targets = y.values[:, None]
    with matcore.single_threaded_blas():
        U, s, _ = np.linalg.svd(F, full_matrices=False)
    s2 = s ** 2
    UTY = U.T @ targets
    total = 0.0
    for k in range(targets.shape[1]):
        ev, _, _, ok = _logme_single(s2, UTY[:, k], float(targets[:, k] @ targets[:, k]),
                                     n, tol, max_iter)
        if not ok:
            warnings.warn(f"LogME fixed point did not converge for target {k}",
                          ConvergenceWarning, stacklevel=2)
        total += ev
    return total / targets.shape[1]


def logme_evidence(F, t, alpha, beta):
    """Per-sample log evidence of a single target ``t`` at fixed ``(alpha, beta)``."""
    F = matcore.as_features(F)
    n, D = F.shape
    with matcore.single_threaded_blas():
        U, s, _ = np.linalg.svd(F, full_matrices=False)
    s2 = s ** 2
    UTy = U.T @ t
    outside = max(float(t @ t) - float(UTy @ UTy), 0.0)
    shrink = beta * s2 / (alpha + beta * s2)
    m2 = float(np.sum((beta * s * UTy / (alpha + beta * s2)) ** 2))
    res2 = float(np.sum(((1.0 - shrink) * UTy) ** 2)) + outside
    return (
        -0.5 * float(np.sum(np.log1p(beta * s2 / alpha)))
        + 0.5 * n * np.log(beta)
        - 0.5 * alpha * m2
        - 0.5 * beta * res2
        - 0.5 * n * np.log(2 * np.pi)
    ) / n


def lfc_score(F, y):
    """Cosine between the centered linear kernel and the centered +/-1 label-agreement matrix."""
    F = matcore.as_features(F)
    yv, C = _class_ids(y, F.shape[0])
    n = F.shape[0]
    Fc = F - F.mean(axis=0)
    E = np.zeros((n, C))
    E[np.arange(n), yv] = 1.0
    Ec = E - E.mean(axis=0)
    # <HKH, HLH> = 2 ||Fc^T Ec||^2, ||HKH|| = ||Fc^T Fc||, ||HLH|| = 2 ||Ec^T Ec||
    k_norm = np.linalg.norm(Fc.T @ Fc)
    if k_norm == 0.0:
        raise ZeroKernel("centered feature kernel is identically zero")
    l_norm = np.linalg.norm(Ec.T @ Ec)
    if l_norm == 0.0:
        raise DegenerateLabels("label agreement matrix is constant")
    cross = np.linalg.norm(Fc.T @ Ec) ** 2
    return float(cross / (k_norm * l_norm))


__all__ = ["check_pseudo_labels", "leep_score", "nce_score", "hscore",
           "logme_score", "logme_evidence", "lfc_score"]
