"""
Depth error and accuracy metrics against ground truth.
"""
import logging

import numpy as np

from src.errors import EmptyInputError
from src.geometry.models import DepthField, require_same_shape
from src.photometrics.config import photometric_config as cfg
from src.photometrics.models import DepthMetrics, SparsificationMetric

logger = logging.getLogger(__name__)

DELTA_BASE = 1.25


def evaluation_pixels(
    pred: DepthField,
    gt: DepthField,
    cap: float | None = None,
    median_scaling: bool = False,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, float | None]:
    """
    Select pixels valid in both fields with gt ≤ cap, optionally median-scale
    the prediction, and clamp it to [min_depth, cap].
    :return: (pred values, gt values, selection mask, applied scale)
    """
    cap = cfg.depth_cap if cap is None else cap
    require_same_shape(pred.shape, gt.shape, what="prediction and ground truth")
    selection = pred.mask & gt.mask & (np.where(gt.mask, gt.values, np.inf) <= cap)
    if not selection.any():
        raise EmptyInputError("prediction and ground truth share no valid pixels")
    p = pred.values[selection]
    g = gt.values[selection]
    scale = None
    if median_scaling:
        scale = float(np.median(g) / np.median(p))
        p = p * scale
    return np.clip(p, cfg.min_depth, cap), g, selection, scale


def per_pixel_errors(pred: np.ndarray, gt: np.ndarray, metric: SparsificationMetric | str) -> np.ndarray:
    """
    Per-pixel contribution whose aggregate is ``metric``: relative and
    squared errors for the mean metrics, squared errors for the root metrics,
    and a 0/1 outlier indicator (ratio ≥ 1.25) for a1.
    """
    metric = SparsificationMetric(metric)
    if metric is SparsificationMetric.ABS_REL:
        return np.abs(pred - gt) / gt
    if metric is SparsificationMetric.SQ_REL:
        return (pred - gt) ** 2 / gt
    if metric is SparsificationMetric.RMSE:
        return (pred - gt) ** 2
    if metric is SparsificationMetric.RMSE_LOG:
        return (np.log(pred) - np.log(gt)) ** 2
    ratio = np.maximum(pred / gt, gt / pred)
    return (ratio >= DELTA_BASE).astype(np.float64)


def aggregate(errors: np.ndarray, metric: SparsificationMetric | str) -> float:
    metric = SparsificationMetric(metric)
    value = float(np.mean(errors))
    if metric in (SparsificationMetric.RMSE, SparsificationMetric.RMSE_LOG):
        return float(np.sqrt(value))
    return value


def depth_metrics(
    pred: DepthField,
    gt: DepthField,
    cap: float | None = None,
    median_scaling: bool = False,
) -> DepthMetrics:
    """
    Abs Rel, Sq Rel, RMSE, RMSE log and δ < 1.25^k accuracies over pixels
    valid in both fields with gt within the cap.
    """
    p, g, _, scale = evaluation_pixels(pred, gt, cap, median_scaling)
    ratio = np.maximum(p / g, g / p)
    metrics = DepthMetrics(
        abs_rel=float(np.mean(np.abs(p - g) / g)),
        sq_rel=float(np.mean((p - g) ** 2 / g)),
        rmse=float(np.sqrt(np.mean((p - g) ** 2))),
        rmse_log=float(np.sqrt(np.mean((np.log(p) - np.log(g)) ** 2))),
        d1=float(np.mean(ratio < DELTA_BASE)),
        d2=float(np.mean(ratio < DELTA_BASE**2)),
        d3=float(np.mean(ratio < DELTA_BASE**3)),
        count=int(p.size),
        median_scale=scale,
    )
    logger.debug("depth_metrics over %d pixels: abs_rel %.4f rmse %.4f", metrics.count, metrics.abs_rel, metrics.rmse)
    return metrics
