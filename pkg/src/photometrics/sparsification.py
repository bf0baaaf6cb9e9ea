"""
Sparsification curves: how a metric evolves as the most uncertain pixels
are removed, against the error-ordered oracle and the random baseline.
"""
import logging

import numpy as np
from scipy.integrate import trapezoid

from src.errors import DimensionMismatchError, EmptyInputError
from src.geometry.models import DepthField
from src.photometrics.config import photometric_config as cfg
from src.photometrics.metrics import aggregate, evaluation_pixels, per_pixel_errors
from src.photometrics.models import SparsificationMetric, SparsificationResult

logger = logging.getLogger(__name__)


def removal_fractions(step: float, max_removal: float | None = None) -> np.ndarray:
    """0, step, 2·step, … up to ``max_removal`` inclusive."""
    max_removal = cfg.max_removal if max_removal is None else max_removal
    if not 0 < step <= max_removal < 1:
        raise ValueError(f"need 0 < step <= max_removal < 1, got step={step}, max_removal={max_removal}")
    count = int(np.floor(max_removal / step + 1e-9)) + 1
    return np.arange(count) * step


def _curve(errors: np.ndarray, order: np.ndarray, removed: np.ndarray, metric: SparsificationMetric) -> np.ndarray:
    ranked = errors[order]
    return np.array([aggregate(ranked[m:], metric) for m in removed])


def sparsification(
    errors: np.ndarray,
    uncertainty: np.ndarray,
    metric: SparsificationMetric | str = SparsificationMetric.ABS_REL,
    step: float | None = None,
) -> SparsificationResult:
    """
    Remove pixels in descending order of uncertainty (ties by ascending
    index) and evaluate ``metric`` on the rest at each removal fraction.
    ``errors`` are per-pixel contributions as from ``per_pixel_errors``.
    """
    metric = SparsificationMetric(metric)
    step = cfg.sparsification_step if step is None else step
    errors = np.asarray(errors, dtype=np.float64).reshape(-1)
    uncertainty = np.asarray(uncertainty, dtype=np.float64).reshape(-1)
    if errors.shape != uncertainty.shape:
        raise DimensionMismatchError(
            f"errors and uncertainty differ in length: {errors.size} vs {uncertainty.size}"
        )
    if errors.size < cfg.min_points:
        raise EmptyInputError(f"sparsification needs at least {cfg.min_points} pixels, got {errors.size}")

    fractions = removal_fractions(step)
    removed = np.floor(fractions * errors.size + 1e-9).astype(np.int64)
    by_uncertainty = np.argsort(-uncertainty, kind="stable")
    by_error = np.argsort(-errors, kind="stable")

    curve = _curve(errors, by_uncertainty, removed, metric)
    oracle = _curve(errors, by_error, removed, metric)
    random = np.full_like(curve, aggregate(errors, metric))
    ause = float(trapezoid(curve - oracle, fractions))
    aurg = float(trapezoid(random - curve, fractions))
    logger.debug("sparsification %s over %d pixels: ause %.5f aurg %.5f", metric.value, errors.size, ause, aurg)
    return SparsificationResult(
        metric=metric,
        fractions=fractions,
        sparsification=curve,
        oracle=oracle,
        random=random,
        ause=ause,
        aurg=aurg,
    )


def sparsify_depth(
    pred: DepthField,
    gt: DepthField,
    uncertainty: np.ndarray,
    metric: SparsificationMetric | str = SparsificationMetric.ABS_REL,
    step: float | None = None,
    cap: float | None = None,
) -> SparsificationResult:
    """Sparsification of a predicted depth map over its evaluation pixels."""
    p, g, selection, _ = evaluation_pixels(pred, gt, cap)
    uncertainty = np.asarray(uncertainty, dtype=np.float64)
    if uncertainty.shape != pred.shape:
        raise DimensionMismatchError(
            f"uncertainty shape {uncertainty.shape} does not match depth {pred.shape}"
        )
    return sparsification(per_pixel_errors(p, g, metric), uncertainty[selection], metric, step)
