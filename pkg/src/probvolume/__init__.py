"""Depth and entropy regression from per-pixel probability volumes."""
from src.probvolume.models import DepthHypotheses, ProbabilityVolume
from src.probvolume.service import entropy_uncertainty, expectation_depth, regress

__all__ = [
    "DepthHypotheses",
    "ProbabilityVolume",
    "entropy_uncertainty",
    "expectation_depth",
    "regress",
]
