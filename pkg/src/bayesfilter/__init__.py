"""Per-pixel Gaussian×Beta inverse-depth filter."""
from src.bayesfilter.config import FilterConfig, filter_config
from src.bayesfilter.models import (
    FilterState,
    FusionResult,
    FusionStatus,
    IterationStats,
    MonocularPrior,
    PixelState,
    UncertaintyEncoding,
)
from src.bayesfilter.service import init_state, run_fusion, update_pixel

__all__ = [
    "FilterConfig",
    "FilterState",
    "FusionResult",
    "FusionStatus",
    "IterationStats",
    "MonocularPrior",
    "PixelState",
    "UncertaintyEncoding",
    "filter_config",
    "init_state",
    "run_fusion",
    "update_pixel",
]
