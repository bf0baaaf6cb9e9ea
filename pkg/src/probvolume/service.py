"""
Expectation depth and Shannon-entropy uncertainty of a probability volume.
The learned entropy-to-uncertainty mapping is the identity here.
"""
import numpy as np

from src.errors import UnnormalizedVolumeError
from src.geometry.models import DepthField
from src.probvolume.models import ProbabilityVolume

NORMALIZATION_TOLERANCE = 1e-6


def _check_normalized(volume: ProbabilityVolume) -> None:
    totals = volume.probs.sum(axis=2)
    worst = float(np.abs(totals - 1.0).max()) if totals.size else 0.0
    if worst > NORMALIZATION_TOLERANCE:
        raise UnnormalizedVolumeError(
            f"unnormalized volume: per-pixel sums deviate from 1 by up to {worst:.3e}"
        )


def expectation_depth(volume: ProbabilityVolume) -> DepthField:
    """Per-pixel depth Σ_j d_j·P_ij; every pixel is valid."""
    _check_normalized(volume)
    depth = volume.probs @ volume.hypotheses.planes
    return DepthField(depth, np.ones(volume.shape, dtype=bool))


def entropy_uncertainty(volume: ProbabilityVolume) -> np.ndarray:
    """Per-pixel Shannon entropy in nats, with 0·log 0 = 0."""
    _check_normalized(volume)
    p = volume.probs
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, -p * np.log(np.where(p > 0, p, 1.0)), 0.0)
    return terms.sum(axis=2)


def regress(volume: ProbabilityVolume) -> tuple[DepthField, np.ndarray]:
    """Depth and entropy uncertainty in one call."""
    return expectation_depth(volume), entropy_uncertainty(volume)
