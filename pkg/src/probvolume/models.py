"""
Hypothesis depth planes and probability volumes over them.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from src.errors import DimensionMismatchError, InvalidDepthError


@dataclass(frozen=True, eq=False)
class DepthHypotheses:
    """Strictly increasing, positive hypothesis depth planes (meters)."""

    planes: np.ndarray

    def __post_init__(self):
        planes = np.array(self.planes, dtype=np.float64).reshape(-1)
        if planes.size < 2:
            raise InvalidDepthError("at least two hypothesis planes are required")
        if not np.all(np.isfinite(planes)) or np.any(planes <= 0):
            raise InvalidDepthError("hypothesis planes must be finite and > 0")
        if np.any(np.diff(planes) <= 0):
            raise InvalidDepthError("hypothesis planes must be strictly increasing")
        planes.flags.writeable = False
        object.__setattr__(self, "planes", planes)

    @property
    def count(self) -> int:
        return int(self.planes.size)

    @classmethod
    def uniform_inverse(cls, near: float, far: float, count: int = 32) -> "DepthHypotheses":
        """Planes evenly spaced in inverse depth between near and far."""
        if not 0 < near < far:
            raise InvalidDepthError(f"need 0 < near < far, got {near}, {far}")
        inv = np.linspace(1.0 / far, 1.0 / near, count)
        return cls(np.sort(1.0 / inv))

    @classmethod
    def uniform_depth(cls, near: float, far: float, count: int = 32) -> "DepthHypotheses":
        """Planes evenly spaced in depth between near and far."""
        if not 0 < near < far:
            raise InvalidDepthError(f"need 0 < near < far, got {near}, {far}")
        return cls(np.linspace(near, far, count))


@dataclass(eq=False)
class ProbabilityVolume:
    """
    H×W×N_d per-pixel distributions over ``hypotheses``. Non-negativity and
    shape are checked on construction; normalisation is checked by the
    regression operations.
    """

    probs: np.ndarray
    hypotheses: DepthHypotheses

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.ndim != 3:
            raise DimensionMismatchError(f"probability volume must be H×W×N_d, got {probs.shape}")
        if probs.shape[2] != self.hypotheses.count:
            raise DimensionMismatchError(
                f"volume has {probs.shape[2]} planes but {self.hypotheses.count} hypotheses"
            )
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise InvalidDepthError("probabilities must be finite and >= 0")
        self.probs = probs

    @property
    def shape(self) -> tuple[int, int]:
        return self.probs.shape[:2]
