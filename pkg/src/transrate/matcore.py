"""Dense symmetric kernels: Gram matrices, log-determinants, singular values.

All routines work on row-major ``(n, d)`` arrays with one sample per row.
Gram products are accumulated over fixed row blocks in ascending order, and
BLAS is pinned to one thread while they run, so results are bit-identical
for any ``threads`` value.
"""
import logging
import os
import threading
import warnings
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from typing import NamedTuple

import numpy as np
from threadpoolctl import threadpool_limits

from ._backend import kernels
from .errors import NumericFailure, NumericOverflow

log = logging.getLogger(__name__)

FEATURE = "feature"
SAMPLE = "sample"
AUTO = "auto"

BLOCK_ROWS = 4096


class Gram(NamedTuple):
    side: str
    matrix: np.ndarray


_blas_lock = threading.Lock()
_blas_depth = 0
_blas_limiter = None


@contextmanager
def single_threaded_blas():
    """Pin BLAS to one thread for the duration; re-entrant and thread-safe."""
    global _blas_depth, _blas_limiter
    with _blas_lock:
        if _blas_depth == 0:
            _blas_limiter = threadpool_limits(limits=1, user_api="blas")
        _blas_depth += 1
    try:
        yield
    finally:
        with _blas_lock:
            _blas_depth -= 1
            if _blas_depth == 0:
                _blas_limiter.restore_original_limits()
                _blas_limiter = None


def resolve_threads(threads=None):
    if threads is None:
        threads = int(os.environ.get("TRANSRATE_THREADS", "1") or 1)
    return max(1, int(threads))


def as_features(F):
    """Validate and return ``F`` as a finite 2-D float64 array."""
    F = np.asarray(F, dtype=np.float64)
    if F.ndim == 1:
        F = F[None, :]
    if F.ndim != 2 or F.shape[0] < 1 or F.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D feature matrix, got shape {F.shape}")
    if not np.isfinite(F).all():
        bad = np.argwhere(~np.isfinite(F))[0]
        raise ValueError(f"non-finite feature at row {bad[0]}, column {bad[1]}")
    return F


def unit_normalize_rows(F):
    """Scale every nonzero row to unit L2 norm.

    Returns ``(normalized, zero_rows)``. All-zero rows are left as they are
    and reported through a warning.
    """
    out, zero_rows = kernels.normalize_rows(as_features(F))
    if zero_rows:
        warnings.warn(f"{zero_rows} all-zero feature rows left unnormalized", RuntimeWarning, stacklevel=2)
    return out, zero_rows


def choose_side(n, d, side_policy=AUTO):
    if side_policy == AUTO:
        # ties go to the feature side
        return FEATURE if d <= n else SAMPLE
    if side_policy in (FEATURE, SAMPLE):
        return side_policy
    raise ValueError(f"unknown side policy {side_policy!r}")


def _feature_block(F, start):
    B = F[start:start + BLOCK_ROWS]
    return B.T @ B


def _sample_block(F, start):
    return F[start:start + BLOCK_ROWS] @ F.T


def gram(F, side_policy=AUTO, threads=None):
    """``F.T @ F`` (feature side, d x d) or ``F @ F.T`` (sample side, n x n)."""
    F = as_features(F)
    n, d = F.shape
    side = choose_side(n, d, side_policy)
    starts = range(0, n, BLOCK_ROWS)
    threads = resolve_threads(threads)
    with single_threaded_blas(), np.errstate(over="ignore", invalid="ignore"):
        if side == FEATURE:
            if n <= BLOCK_ROWS:
                G = _feature_block(F, 0)
            else:
                if threads > 1:
                    with ThreadPoolExecutor(threads) as pool:
                        parts = list(pool.map(lambda s: _feature_block(F, s), starts))
                else:
                    parts = [_feature_block(F, s) for s in starts]
                G = parts[0]
                for p in parts[1:]:
                    G = G + p
        else:
            if n <= BLOCK_ROWS:
                G = _sample_block(F, 0)
            else:
                # row blocks of the output; no reduction is split
                if threads > 1:
                    with ThreadPoolExecutor(threads) as pool:
                        parts = list(pool.map(lambda s: _sample_block(F, s), starts))
                else:
                    parts = [_sample_block(F, s) for s in starts]
                G = np.vstack(parts)
    if not np.isfinite(G).all():
        raise NumericOverflow("Gram accumulation overflowed")
    # exact symmetry; the two triangles can differ by rounding
    G = np.triu(G) + np.triu(G, 1).T
    return Gram(side, G)


def logdet_ipd(G, alpha):
    """Natural-log ``logdet(I + alpha * G)`` for PSD ``G`` and ``alpha > 0``."""
    M = G.matrix if isinstance(G, Gram) else np.asarray(G, dtype=np.float64)
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    k = M.shape[0]
    if k == 0:
        return 0.0
    A = alpha * M
    A[np.diag_indices(k)] += 1.0
    with single_threaded_blas():
        try:
            L = np.linalg.cholesky(A)
            diag = np.diagonal(L)
            terms = 2.0 * np.log(diag)
        except np.linalg.LinAlgError:
            log.warning("Cholesky failed on a %dx%d system, falling back to eigenvalues", k, k)
            lam = np.linalg.eigvalsh(M)
            terms = np.log1p(alpha * np.clip(lam, 0.0, None))
    if not np.isfinite(terms).all():
        idx = int(np.flatnonzero(~np.isfinite(terms))[0])
        raise NumericFailure(f"non-finite log-determinant term at diagonal {idx}", index=idx)
    return float(terms.sum())


def singular_values(F):
    """Descending singular values of ``F``, length ``min(n, d)``.

    Values below the numerical rank tolerance are returned as exact zeros.
    """
    F = as_features(F)
    try:
        with single_threaded_blas():
            s = np.linalg.svd(F, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericFailure(f"SVD did not converge: {exc}") from exc
    if s.size and s[0] > 0:
        tol = max(F.shape) * np.finfo(np.float64).eps * s[0]
        s = np.where(s > tol, s, 0.0)
    return s
