"""
Filter state, monocular prior and fusion results.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields
from enum import Enum
from typing import NamedTuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.errors import DimensionMismatchError, InvalidDepthError
from src.geometry.models import DepthField


class UncertaintyEncoding(str, Enum):
    """How a stored monocular uncertainty map is parameterised."""

    STD = "std"
    VARIANCE = "variance"
    LOG_VARIANCE = "log_variance"


@dataclass(eq=False)
class MonocularPrior:
    """Depth prior (meters) and its inverse-depth standard deviation (1/m)."""

    depth: DepthField
    uncertainty: np.ndarray

    def __post_init__(self):
        self.uncertainty = np.asarray(self.uncertainty, dtype=np.float64)
        if self.uncertainty.shape != self.depth.shape:
            raise DimensionMismatchError(
                f"uncertainty shape {self.uncertainty.shape} does not match depth {self.depth.shape}"
            )
        picked = self.uncertainty[self.depth.mask]
        if not (np.all(np.isfinite(picked)) and np.all(picked > 0)):
            raise InvalidDepthError("prior uncertainty must be finite and > 0 on valid pixels")

    @property
    def shape(self) -> tuple[int, int]:
        return self.depth.shape

    @classmethod
    def from_encoded(
        cls, depth: DepthField, raw: np.ndarray, encoding: UncertaintyEncoding | str
    ) -> "MonocularPrior":
        """Decode an uncertainty map stored as std, variance or log-variance."""
        raw = np.asarray(raw, dtype=np.float64)
        encoding = UncertaintyEncoding(encoding)
        if encoding is UncertaintyEncoding.STD:
            std = raw
        elif encoding is UncertaintyEncoding.VARIANCE:
            with np.errstate(invalid="ignore"):
                std = np.sqrt(raw)
        else:
            std = np.exp(0.5 * raw)
        return cls(depth, std)


class PixelState(NamedTuple):
    """One pixel's posterior parameters, all in inverse-depth units."""

    mu: float
    sigma2: float
    a: float
    b: float
    z_min: float
    z_max: float

    @property
    def inlier_ratio(self) -> float:
        return self.a / (self.a + self.b)


@dataclass(eq=False)
class FilterState:
    """
    Per-pixel Gaussian×Beta posterior. ``valid`` marks pixels with a usable
    prior; the others hold placeholder values and are never updated.
    """

    mu: np.ndarray
    sigma2: np.ndarray
    a: np.ndarray
    b: np.ndarray
    z_min: np.ndarray
    z_max: np.ndarray
    converged: np.ndarray
    valid: np.ndarray
    updated: np.ndarray = field(default=None)
    sigma_conv2: np.ndarray = field(default=None)

    def __post_init__(self):
        shape = np.shape(self.mu)
        if self.updated is None:
            self.updated = np.zeros(shape, dtype=bool)
        if self.sigma_conv2 is None:
            self.sigma_conv2 = np.zeros(shape)
        for f in fields(self):
            value = getattr(self, f.name)
            if np.shape(value) != shape:
                raise DimensionMismatchError(f"state field {f.name} has shape {np.shape(value)}, expected {shape}")
        v = self.valid
        if not (
            np.all(np.isfinite(self.mu[v]))
            and np.all(self.sigma2[v] > 0)
            and np.all(self.a[v] > 0)
            and np.all(self.b[v] > 0)
            and np.all(self.z_min[v] > 0)
            and np.all(self.z_max[v] > self.z_min[v])
        ):
            raise InvalidDepthError("filter state violates its invariants")

    @property
    def shape(self) -> tuple[int, int]:
        return self.mu.shape

    @property
    def inlier_ratio(self) -> np.ndarray:
        return self.a / (self.a + self.b)

    def pixel(self, row: int, col: int) -> PixelState:
        return PixelState(
            float(self.mu[row, col]),
            float(self.sigma2[row, col]),
            float(self.a[row, col]),
            float(self.b[row, col]),
            float(self.z_min[row, col]),
            float(self.z_max[row, col]),
        )

    def arrays(self) -> dict[str, np.ndarray]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def copy(self) -> "FilterState":
        return FilterState(**{name: value.copy() for name, value in self.arrays().items()})


class FusionStatus(str, Enum):
    OK = "ok"
    CONVERGED = "converged"
    NO_OBSERVATIONS = "no_observations"


class IterationStats(BaseModel):
    """Bookkeeping for one observation applied to the filter."""

    index: int = Field(..., ge=0, description="Observation index in the stream")
    observed: int = Field(..., ge=0, description="Pixels masked in the observation")
    updated: int = Field(..., ge=0, description="Pixels whose posterior changed")
    rejected: int = Field(..., ge=0, description="Observations discarded as outside support")
    converged: int = Field(..., ge=0, description="Converged pixels after this update")
    mean_inlier_ratio: float = Field(..., description="Mean a/(a+b) over valid pixels")

    model_config = ConfigDict(frozen=True)


@dataclass(eq=False)
class FusionResult:
    """Final filter state, refined depth (1/μ) and refined uncertainty (σ)."""

    state: FilterState
    depth: DepthField
    uncertainty: np.ndarray
    status: FusionStatus
    iterations: list[IterationStats]
