from dataclasses import dataclass


@dataclass
class PhotometricConfig:
    """Loss weights, SSIM constants and evaluation defaults."""

    # SSIM weight in the photometric residual
    alpha: float = 0.85

    # Weight of the edge-aware smoothness term
    smooth_weight: float = 1e-3

    ssim_c1: float = 0.01**2
    ssim_c2: float = 0.03**2

    # Evaluation clamps predictions to [min_depth, depth_cap] and drops gt beyond the cap
    min_depth: float = 1e-3
    depth_cap: float = 80.0

    # Sparsification removes this fraction per step, up to max_removal
    sparsification_step: float = 0.02
    max_removal: float = 0.98
    min_points: int = 50


photometric_config = PhotometricConfig()
