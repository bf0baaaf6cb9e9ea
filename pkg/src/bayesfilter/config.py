from dataclasses import dataclass
from typing import Optional


@dataclass
class FilterConfig:
    """Tunable parameters of the inverse-depth filter."""

    # Beta prior on the inlier ratio; a0 = b0 gives an initial belief of 0.5
    a0: float = 10.0
    b0: float = 10.0

    # A pixel converges once sigma < convergence_rel * mu0, or once sigma² moves
    # by less than min_rel_change in one accepted update
    convergence_rel: float = 0.02
    min_rel_change: float = 1e-3

    # Refined depth is clamped to [min_depth, depth_cap] meters
    min_depth: float = 1e-3
    depth_cap: float = 80.0

    # Lower bound of the uniform outlier support (1/m)
    z_floor: float = 1e-6

    # Observations outside the outlier support are kept only above this density
    min_normal_density: float = 1e-12

    # Pixels per work unit; fixed so results do not depend on the worker count
    block_size: int = 4096

    # Optional post-fusion mask: drop pixels whose inlier belief ends below this
    inlier_threshold: Optional[float] = None


filter_config = FilterConfig()
