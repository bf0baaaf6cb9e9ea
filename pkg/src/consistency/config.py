from dataclasses import dataclass


@dataclass
class ConsistencyConfig:
    """Defaults for the geometric consistency check."""

    # Reprojection distance threshold (pixels) and depth difference threshold
    e1: float = 1.0
    e2: float = 0.001

    # How E_diff is measured: relative | absolute | inverse
    diff_mode: str = "relative"

    # Relative depth gap beyond which a compared surface is an occluder rather than
    # an error; also the largest max/min depth ratio within one bilinear sample
    occlusion_margin: float = 0.05

    # Floor applied to the matching error when deriving observation variance (pixels)
    min_matching_error: float = 0.5


consistency_config = ConsistencyConfig()
