"""Loss terms, depth metrics and sparsification-based uncertainty evaluation."""
from src.photometrics.losses import (
    min_reprojection,
    mono_loss,
    nll_loss,
    photometric_residual,
    smoothness_loss,
    total_loss,
)
from src.photometrics.metrics import depth_metrics, per_pixel_errors
from src.photometrics.models import DepthMetrics, Image, SparsificationMetric, SparsificationResult
from src.photometrics.sparsification import sparsification, sparsify_depth

__all__ = [
    "DepthMetrics",
    "Image",
    "SparsificationMetric",
    "SparsificationResult",
    "depth_metrics",
    "min_reprojection",
    "mono_loss",
    "nll_loss",
    "per_pixel_errors",
    "photometric_residual",
    "smoothness_loss",
    "sparsification",
    "sparsify_depth",
    "total_loss",
]
