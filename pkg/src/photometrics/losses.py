"""
Self-supervised loss terms evaluated on arrays: photometric residual,
per-pixel minimum reprojection, edge-aware smoothness, the multi-scale
monocular loss, the uncertainty-weighted NLL and the total loss with a
refined depth map.
"""
import logging
from typing import Sequence

import numpy as np
from scipy.ndimage import uniform_filter

from src.errors import (
    DimensionMismatchError,
    EmptyInputError,
    InvalidDepthError,
    InvalidUncertaintyError,
)
from src.geometry.models import DepthField, require_same_shape
from src.photometrics.config import photometric_config as cfg
from src.photometrics.models import Image

logger = logging.getLogger(__name__)


def _box3(x: np.ndarray) -> np.ndarray:
    # 3×3 mean per channel, mirror padding without repeating the edge sample
    return uniform_filter(x, size=(3, 3, 1), mode="mirror")


def ssim(x: Image, y: Image) -> np.ndarray:
    """Per-pixel, per-channel SSIM over 3×3 box windows."""
    require_same_shape(x.values.shape, y.values.shape, what="images")
    a, b = x.values, y.values
    mu_a = _box3(a)
    mu_b = _box3(b)
    var_a = _box3(a * a) - mu_a * mu_a
    var_b = _box3(b * b) - mu_b * mu_b
    cov = _box3(a * b) - mu_a * mu_b
    numerator = (2 * mu_a * mu_b + cfg.ssim_c1) * (2 * cov + cfg.ssim_c2)
    denominator = (mu_a * mu_a + mu_b * mu_b + cfg.ssim_c1) * (var_a + var_b + cfg.ssim_c2)
    return numerator / denominator


def photometric_residual(target: Image, warped: Image, alpha: float | None = None) -> np.ndarray:
    """
    r = α·clamp((1 − SSIM)/2, 0, 1) + (1 − α)·|target − warped|, both
    averaged over channels.
    """
    alpha = cfg.alpha if alpha is None else alpha
    if not 0 <= alpha <= 1:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    if target.values.shape != warped.values.shape:
        raise DimensionMismatchError(
            f"images differ in shape: {target.values.shape} vs {warped.values.shape}"
        )
    l1 = np.abs(target.values - warped.values).mean(axis=2)
    if alpha == 0:
        return l1
    dssim = np.clip((1.0 - ssim(target, warped)) / 2.0, 0.0, 1.0).mean(axis=2)
    return alpha * dssim + (1.0 - alpha) * l1


def min_reprojection(residual_maps: Sequence[np.ndarray]) -> np.ndarray:
    """Per-pixel minimum over the source views' residual maps."""
    if len(residual_maps) == 0:
        raise EmptyInputError("min_reprojection needs at least one residual map")
    maps = [np.asarray(m, dtype=np.float64) for m in residual_maps]
    require_same_shape(*(m.shape for m in maps), what="residual maps")
    return np.min(np.stack(maps), axis=0)


def smoothness_loss(depth: DepthField, image: Image) -> float:
    """
    Edge-aware smoothness of mean-normalised depth: the mean over valid
    horizontal pairs of |∂x d̂|·exp(−|∂x I|) plus the same along y. Image
    gradients are averaged over channels; a pair is valid when both depth
    pixels are.
    """
    require_same_shape(depth.shape, image.shape, what="depth and image")
    if depth.valid_count == 0:
        raise InvalidDepthError("smoothness_loss needs at least one valid depth pixel")
    normalized = depth.values / depth.values[depth.mask].mean()
    intensity = image.values

    total = 0.0
    for axis in (1, 0):
        grad_d = np.abs(np.diff(normalized, axis=axis))
        grad_i = np.abs(np.diff(intensity, axis=axis)).mean(axis=2)
        pairs = depth.mask[:, 1:] & depth.mask[:, :-1] if axis == 1 else depth.mask[1:] & depth.mask[:-1]
        if pairs.any():
            total += float((grad_d[pairs] * np.exp(-grad_i[pairs])).mean())
    return total


def _scale_residual(entry) -> np.ndarray:
    if isinstance(entry, (list, tuple)):
        return min_reprojection(entry)
    return np.asarray(entry, dtype=np.float64)


def mono_loss(
    photometric: Sequence,
    depths: Sequence[DepthField],
    images: Sequence[Image],
    smooth_weight: float | None = None,
) -> float:
    """
    Multi-scale monocular loss: (1/s)·Σ_scales (mean residual + λ·smoothness).
    Each photometric entry is either a residual map or a list of per-source
    maps reduced with the per-pixel minimum.
    """
    smooth_weight = cfg.smooth_weight if smooth_weight is None else smooth_weight
    if not (len(photometric) == len(depths) == len(images)):
        raise DimensionMismatchError(
            f"scale lists differ in length: {len(photometric)}, {len(depths)}, {len(images)}"
        )
    if len(photometric) == 0:
        raise EmptyInputError("mono_loss needs at least one scale")

    total = 0.0
    for entry, depth, image in zip(photometric, depths, images):
        residual = _scale_residual(entry)
        finite = np.isfinite(residual)
        term = float(residual[finite].mean()) if finite.any() else 0.0
        if smooth_weight:
            term += smooth_weight * smoothness_loss(depth, image)
        total += term
    return total / len(photometric)


def nll_loss(residual: np.ndarray, uncertainty: np.ndarray, mask: np.ndarray | None = None) -> float:
    """Mean of residual/U + log U over evaluated pixels (finite residual, inside ``mask``)."""
    residual = np.asarray(residual, dtype=np.float64)
    uncertainty = np.asarray(uncertainty, dtype=np.float64)
    require_same_shape(residual.shape, uncertainty.shape, what="residual and uncertainty")
    evaluated = np.isfinite(residual)
    if mask is not None:
        evaluated &= np.asarray(mask, dtype=bool)
    if not evaluated.any():
        raise EmptyInputError("nll_loss has no pixels to evaluate")
    u = uncertainty[evaluated]
    if not (np.all(np.isfinite(u)) and np.all(u > 0)):
        raise InvalidUncertaintyError("uncertainty must be finite and > 0 on evaluated pixels")
    return float(np.mean(residual[evaluated] / u + np.log(u)))


def total_loss(
    refined: DepthField,
    predicted: DepthField,
    uncertainty: np.ndarray,
    mono: float = 0.0,
) -> float:
    """
    Loss with a refined depth map: the NLL of |1/D^r − 1/D_t| under the
    monocular uncertainty σ_t plus an already evaluated monocular loss.
    """
    require_same_shape(refined.shape, predicted.shape, np.shape(uncertainty), what="depth maps")
    both = refined.mask & predicted.mask
    residual = np.full(refined.shape, np.nan)
    residual[both] = np.abs(1.0 / refined.values[both] - 1.0 / predicted.values[both])
    return nll_loss(residual, uncertainty, both) + mono
