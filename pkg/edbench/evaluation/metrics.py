"""
AUROC, macro AUROC and empirical-bootstrap confidence intervals.

Label arrays are ternary: 1, 0 or ``MASKED``. Masked entries are dropped
before any metric is computed.
"""

import logging
from typing import Callable, Tuple

import numpy as np
from scipy.stats import rankdata
from sklearn.metrics import roc_auc_score

from ..errors import DataError, ShapeError, UndefinedMetricError
from ..labels.space import MASKED

logger = logging.getLogger(__name__)


def auroc(scores, labels) -> float:
    """
    Area under the ROC curve of one label; ties count one half.

    Args:
        scores: Real scores, one per row
        labels: 1 / 0 / MASKED per row

    Returns:
        float: AUROC in [0, 1]
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise ShapeError(f"scores {scores.shape} and labels {labels.shape} differ")
    keep = labels != MASKED
    scores, labels = scores[keep], labels[keep]
    n_pos = int((labels == 1).sum())
    if n_pos == 0 or n_pos == len(labels):
        raise UndefinedMetricError(f"AUROC undefined: {n_pos} positives among {len(labels)} rows")
    return float(roc_auc_score(labels, scores))


def auroc_matrix(scores: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """
    Per-label AUROC from ranks; ``nan`` where a label lacks one class.

    Agrees with ``auroc`` and is cheap enough to call once per bootstrap resample.

    Args:
        scores (np.ndarray): rows x labels scores
        labels (np.ndarray): rows x labels ternary labels

    Returns:
        np.ndarray: One AUROC per label
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.ndim != 2 or scores.shape != labels.shape:
        raise ShapeError(f"scores {scores.shape} and labels {labels.shape} must be equal 2-d shapes")
    out = np.full(scores.shape[1], np.nan)
    for k in range(scores.shape[1]):
        keep = labels[:, k] != MASKED
        positive = labels[keep, k] == 1
        n_pos = int(positive.sum())
        n_neg = int(keep.sum()) - n_pos
        if n_pos == 0 or n_neg == 0:
            continue
        ranks = rankdata(scores[keep, k])
        out[k] = (ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)
    return out


def macro_auroc(scores: np.ndarray, labels: np.ndarray) -> float:
    """
    Unweighted mean AUROC over the labels with both classes present.

    Args:
        scores (np.ndarray): rows x labels scores
        labels (np.ndarray): rows x labels ternary labels

    Returns:
        float: Macro AUROC
    """
    per_label = auroc_matrix(scores, labels)
    defined = ~np.isnan(per_label)
    if not defined.any():
        raise UndefinedMetricError("macro AUROC undefined: no label has both classes")
    return float(per_label[defined].mean())


def _resample_indices(n_rows: int, n_iter: int, seed: int) -> np.ndarray:
    # drawn up front so any evaluation order yields the same resamples
    return np.random.default_rng(seed).integers(0, n_rows, size=(n_iter, n_rows))


def percentile_interval(point: float, values: np.ndarray, level: float) -> Tuple[float, float]:
    values = values[~np.isnan(values)]
    if values.size == 0:
        return point, point
    tail = (1.0 - level) / 2.0 * 100.0
    lo, hi = np.percentile(values, [tail, 100.0 - tail])
    return float(min(lo, point)), float(max(hi, point))


def bootstrap_ci(
    metric: Callable[..., float], *arrays, n_iter: int = 1000, level: float = 0.95, seed: int = 0
) -> Tuple[float, float, float]:
    """
    Percentile bootstrap over rows.

    Every array is resampled with the same row indices. Resamples on which the
    metric is undefined are left out of the percentiles.

    Args:
        metric (Callable): Function of the arrays returning a float
        *arrays: Row-aligned arrays
        n_iter (int): Number of resamples
        level (float): Confidence level
        seed (int): Seed of the resampling generator

    Returns:
        Tuple[float, float, float]: ``(point, lo, hi)`` with ``lo <= point <= hi``
    """
    arrays = [np.asarray(a) for a in arrays]
    n_rows = len(arrays[0])
    if n_rows == 0:
        raise DataError("bootstrap on an empty test set")
    if any(len(a) != n_rows for a in arrays):
        raise ShapeError("bootstrap arrays must share their row count")

    point = float(metric(*arrays))
    values = np.full(n_iter, np.nan)
    for i, idx in enumerate(_resample_indices(n_rows, n_iter, seed)):
        try:
            values[i] = metric(*[a[idx] for a in arrays])
        except UndefinedMetricError:
            continue
    skipped = int(np.isnan(values).sum())
    if skipped:
        logger.debug(f"bootstrap: metric undefined on {skipped} of {n_iter} resamples")
    lo, hi = percentile_interval(point, values, level)
    return point, lo, hi


def bootstrap_auroc(
    scores: np.ndarray, labels: np.ndarray, n_iter: int = 1000, seed: int = 0
) -> np.ndarray:
    """
    Per-label AUROC on each bootstrap resample of the rows.

    Args:
        scores (np.ndarray): rows x labels scores
        labels (np.ndarray): rows x labels ternary labels
        n_iter (int): Number of resamples
        seed (int): Seed of the resampling generator

    Returns:
        np.ndarray: n_iter x labels matrix, ``nan`` where a label is undefined in a resample
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if len(scores) == 0:
        raise DataError("bootstrap on an empty test set")
    draws = np.empty((n_iter, scores.shape[1]))
    for i, idx in enumerate(_resample_indices(len(scores), n_iter, seed)):
        draws[i] = auroc_matrix(scores[idx], labels[idx])
    return draws


def relative_improvement(a: float, b: float) -> float:
    """
    Percent improvement of ``a`` over ``b``, rounded to two decimals.

    Args:
        a (float): New value
        b (float): Reference value, must be positive

    Returns:
        float: ``100 * (a - b) / b``
    """
    if b <= 0:
        raise UndefinedMetricError(f"relative improvement needs a positive reference, got {b}")
    return round(100.0 * (a - b) / b, 2)
