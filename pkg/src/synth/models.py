"""
Scene descriptions, rendered views and the observation mixture model.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.geometry.models import DepthField, RigidTransform
from src.photometrics.models import Image


class SceneLayout(str, Enum):
    FRONTO_PARALLEL = "fronto_parallel"
    SLANTED = "slanted"
    STAIRCASE = "staircase"
    MIXED = "mixed"


class TexturePattern(str, Enum):
    NOISE_STRIPES = "noise_stripes"
    NOISE = "noise"
    STRIPES = "stripes"


class Plane(BaseModel):
    """
    World-frame plane n·X = offset, optionally bounded to a rectangle in
    world x and y. Normals point away from the cameras.
    """

    normal: tuple[float, float, float]
    offset: float
    x_bounds: Optional[tuple[float, float]] = None
    y_bounds: Optional[tuple[float, float]] = None

    model_config = ConfigDict(frozen=True, extra="forbid")

    @field_validator("normal")
    @classmethod
    def _unit_normal(cls, v):
        n = np.asarray(v, dtype=np.float64)
        length = float(np.linalg.norm(n))
        if not np.isfinite(length) or length == 0:
            raise ValueError("plane normal must be a finite non-zero vector")
        return tuple(float(c) for c in n / length)

    @field_validator("x_bounds", "y_bounds")
    @classmethod
    def _ordered(cls, v):
        if v is not None and not v[0] < v[1]:
            raise ValueError(f"bounds must be increasing, got {v}")
        return v

    @classmethod
    def fronto(cls, depth: float, **bounds) -> "Plane":
        return cls(normal=(0.0, 0.0, 1.0), offset=depth, **bounds)

    @property
    def bounded(self) -> bool:
        return self.x_bounds is not None or self.y_bounds is not None

    def contains(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        inside = np.ones(np.shape(x), dtype=bool)
        if self.x_bounds is not None:
            inside &= (x >= self.x_bounds[0]) & (x <= self.x_bounds[1])
        if self.y_bounds is not None:
            inside &= (y >= self.y_bounds[0]) & (y <= self.y_bounds[1])
        return inside


class SceneSpec(BaseModel):
    """
    Procedural scene. ``depth_range`` is measured from the camera of the
    trajectory nearest to the scene; explicit ``planes`` replace the layout.
    """

    layout: SceneLayout = SceneLayout.FRONTO_PARALLEL
    depth_range: tuple[float, float] = (4.0, 30.0)
    texture: TexturePattern = TexturePattern.NOISE_STRIPES
    seed: int = 0
    planes: Optional[list[Plane]] = None

    model_config = ConfigDict(frozen=True, extra="forbid")

    @model_validator(mode="after")
    def _positive_range(self) -> "SceneSpec":
        near, far = self.depth_range
        if not 0 < near < far:
            raise ValueError(f"depth_range must be positive and increasing, got {self.depth_range}")
        return self


class MeasurementModel(BaseModel):
    """
    Gaussian + uniform observation mixture: with probability ``rho`` an
    observation is 1/d_gt plus N(0, (tau_rel/d_gt)²), otherwise uniform over
    the supplied support. ``coverage`` is the fraction of pixels observed.
    """

    rho: float = Field(..., ge=0, le=1, description="Inlier probability")
    tau_rel: float = Field(..., gt=0, description="Relative inverse-depth noise")
    seed: int = 0
    coverage: float = Field(1.0, gt=0, le=1, description="Fraction of pixels observed")

    model_config = ConfigDict(frozen=True, extra="forbid")


@dataclass(eq=False)
class SceneView:
    """One rendered view: camera-to-world pose, exact depth and texture image."""

    pose: RigidTransform
    depth: DepthField
    image: Image


@dataclass(eq=False)
class Scene:
    spec: SceneSpec
    planes: list[Plane]
    views: list[SceneView]

    @property
    def depths(self) -> list[DepthField]:
        return [view.depth for view in self.views]

    @property
    def images(self) -> list[Image]:
        return [view.image for view in self.views]

    @property
    def poses(self) -> list[RigidTransform]:
        return [view.pose for view in self.views]


class PriorModel(BaseModel):
    """Monocular-like prior: smooth multiplicative depth error and inverse-depth uncertainty."""

    error_rel: float = Field(0.2, ge=0, description="Std of the log-depth error field")
    error_cell: int = Field(16, gt=0, description="Error field lattice spacing (pixels)")
    uncertainty: str = Field("relative", pattern="^(relative|constant)$")
    uncertainty_value: float = Field(0.1, gt=0, description="σ⁰/μ⁰ if relative, σ⁰ (1/m) if constant")
    seed: int = 0

    model_config = ConfigDict(frozen=True, extra="forbid")


@dataclass(frozen=True)
class QuadratureResult:
    """Posterior moments from numerical integration."""

    mean: float
    variance: float
    rho_mean: float
    mass: float
