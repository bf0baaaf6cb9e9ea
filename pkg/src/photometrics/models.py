"""
Images, depth metric records and sparsification curves.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.errors import DimensionMismatchError, InvalidDepthError


@dataclass(eq=False)
class Image:
    """H×W×C intensities in [0, 1], C = 1 or 3. A 2-D array is read as one channel."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim == 2:
            values = values[..., None]
        if values.ndim != 3 or values.shape[2] not in (1, 3):
            raise DimensionMismatchError(f"image must be H×W×1 or H×W×3, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("image contains non-finite intensities")
        if values.size and (values.min() < 0 or values.max() > 1):
            raise ValueError("image intensities must lie in [0, 1]")
        self.values = values

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape[:2]

    @property
    def channels(self) -> int:
        return self.values.shape[2]


class SparsificationMetric(str, Enum):
    """Error metric a sparsification curve is computed on."""

    ABS_REL = "abs_rel"
    SQ_REL = "sq_rel"
    RMSE = "rmse"
    RMSE_LOG = "rmse_log"
    A1 = "a1"


class DepthMetrics(BaseModel):
    """Standard depth error and accuracy metrics over the evaluated pixels."""

    abs_rel: float = Field(..., ge=0)
    sq_rel: float = Field(..., ge=0)
    rmse: float = Field(..., ge=0, description="Meters")
    rmse_log: float = Field(..., ge=0)
    d1: float = Field(..., ge=0, le=1, description="Fraction with ratio < 1.25")
    d2: float = Field(..., ge=0, le=1, description="Fraction with ratio < 1.25²")
    d3: float = Field(..., ge=0, le=1, description="Fraction with ratio < 1.25³")
    count: int = Field(..., gt=0, description="Evaluated pixels")
    median_scale: float | None = Field(None, description="Applied median scale, if any")

    model_config = ConfigDict(frozen=True)


@dataclass(eq=False)
class SparsificationResult:
    """
    Metric on the pixels kept after removing a growing fraction, ordered by
    predicted uncertainty (sparsification), by true error (oracle), or not
    at all (random, a constant).
    """

    metric: SparsificationMetric
    fractions: np.ndarray
    sparsification: np.ndarray
    oracle: np.ndarray
    random: np.ndarray
    ause: float
    aurg: float

    def __post_init__(self):
        n = len(self.fractions)
        if not (len(self.sparsification) == len(self.oracle) == len(self.random) == n):
            raise DimensionMismatchError("sparsification curves must share the fraction grid")
        if n == 0 or self.fractions[0] != 0 or np.any(np.diff(self.fractions) <= 0):
            raise InvalidDepthError("fractions must start at 0 and strictly increase")

    def rows(self) -> list[dict[str, float]]:
        return [
            {
                "fraction": float(f),
                "sparsification": float(s),
                "oracle": float(o),
                "random": float(r),
            }
            for f, s, o, r in zip(self.fractions, self.sparsification, self.oracle, self.random)
        ]
