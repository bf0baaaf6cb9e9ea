"""
Thresholds, per-pair reports and the sparse observation they fuse into.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.consistency.config import consistency_config as cfg
from src.errors import DimensionMismatchError, InvalidDepthError


class DiffMode(str, Enum):
    """How the warped-vs-target depth difference is measured."""

    RELATIVE = "relative"
    ABSOLUTE = "absolute"
    INVERSE = "inverse"


class ConsistencyThresholds(BaseModel):
    """Pass criteria: e_dist < e1 (pixels) and e_diff < e2."""

    e1: float = Field(cfg.e1, gt=0, description="Reprojection distance threshold (pixels)")
    e2: float = Field(cfg.e2, gt=0, description="Depth difference threshold")
    diff_mode: DiffMode = Field(DiffMode(cfg.diff_mode), description="Interpretation of e2")
    occlusion_margin: float = Field(
        cfg.occlusion_margin, gt=0, description="Relative depth gap treated as occlusion rather than error"
    )

    model_config = ConfigDict(frozen=True)


@dataclass(eq=False)
class ConsistencyReport:
    """
    Result of checking one target/source pair. ``e_dist`` and ``e_diff`` are
    NaN outside ``coverage``; ``mask`` is the pass set.
    """

    e_dist: np.ndarray
    e_diff: np.ndarray
    mask: np.ndarray
    coverage: np.ndarray
    thresholds: ConsistencyThresholds
    baseline: float
    mean_focal: float

    @property
    def shape(self) -> tuple[int, int]:
        return self.mask.shape

    @property
    def inlier_count(self) -> int:
        return int(self.mask.sum())

    @property
    def pass_fraction(self) -> float:
        covered = int(self.coverage.sum())
        return self.inlier_count / covered if covered else 0.0


@dataclass(eq=False)
class Observation:
    """Sparse inverse-depth measurement (1/m) with per-pixel variance ((1/m)²)."""

    inv_depth: np.ndarray
    variance: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        self.inv_depth = np.asarray(self.inv_depth, dtype=np.float64)
        self.variance = np.asarray(self.variance, dtype=np.float64)
        self.mask = np.asarray(self.mask, dtype=bool)
        if not (self.inv_depth.shape == self.variance.shape == self.mask.shape):
            raise DimensionMismatchError(
                "observation fields differ in shape: "
                f"{self.inv_depth.shape}, {self.variance.shape}, {self.mask.shape}"
            )
        z = self.inv_depth[self.mask]
        var = self.variance[self.mask]
        if not (np.all(np.isfinite(z)) and np.all(z > 0)):
            raise InvalidDepthError("masked inverse depths must be finite and > 0")
        if not (np.all(np.isfinite(var)) and np.all(var > 0)):
            raise InvalidDepthError("masked variances must be finite and > 0")

    @property
    def shape(self) -> tuple[int, int]:
        return self.mask.shape

    @property
    def count(self) -> int:
        return int(self.mask.sum())

    @classmethod
    def empty(cls, shape: tuple[int, int]) -> "Observation":
        return cls(np.full(shape, np.nan), np.full(shape, np.nan), np.zeros(shape, dtype=bool))
