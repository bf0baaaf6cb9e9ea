"""Multi-view geometric depth consistency check."""
from src.consistency.models import ConsistencyReport, ConsistencyThresholds, DiffMode, Observation
from src.consistency.service import check_pair, fuse_checks

__all__ = [
    "ConsistencyReport",
    "ConsistencyThresholds",
    "DiffMode",
    "Observation",
    "check_pair",
    "fuse_checks",
]
