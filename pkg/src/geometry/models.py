"""
Camera model, rigid transforms and dense depth fields.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.errors import DimensionMismatchError, InvalidDepthError

ORTHONORMAL_TOLERANCE = 1e-9


class Intrinsics(BaseModel):
    """Pinhole intrinsics. Pixel centres sit at integer coordinates, (0, 0) is top-left."""

    fx: float = Field(..., gt=0, description="Focal length along x (pixels)")
    fy: float = Field(..., gt=0, description="Focal length along y (pixels)")
    cx: float = Field(..., ge=0, description="Principal point x (pixels)")
    cy: float = Field(..., ge=0, description="Principal point y (pixels)")
    width: int = Field(..., gt=0, description="Image width (pixels)")
    height: int = Field(..., gt=0, description="Image height (pixels)")

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _principal_point_inside(self) -> "Intrinsics":
        if not self.cx < self.width:
            raise ValueError(f"cx={self.cx} must be < width={self.width}")
        if not self.cy < self.height:
            raise ValueError(f"cy={self.cy} must be < height={self.height}")
        return self

    @property
    def shape(self) -> tuple[int, int]:
        return self.height, self.width

    @property
    def mean_focal(self) -> float:
        return 0.5 * (self.fx + self.fy)

    @property
    def matrix(self) -> np.ndarray:
        return np.array(
            [[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]]
        )


def nearest_rotation(matrix: np.ndarray) -> np.ndarray:
    """Closest proper rotation in the Frobenius sense (SVD projection)."""
    u, _, vt = np.linalg.svd(np.asarray(matrix, dtype=np.float64))
    d = np.sign(np.linalg.det(u @ vt)) or 1.0
    return u @ np.diag([1.0, 1.0, d]) @ vt


def orthonormality_error(rotation: np.ndarray) -> float:
    """Largest deviation of RᵀR from I, combined with |det R - 1|."""
    rotation = np.asarray(rotation, dtype=np.float64)
    gram = rotation.T @ rotation - np.eye(3)
    return float(max(np.abs(gram).max(), abs(np.linalg.det(rotation) - 1.0)))


@dataclass(frozen=True, eq=False)
class RigidTransform:
    """
    SE(3) element mapping points of one camera frame into another:
    x' = rotation @ x + translation (translation in meters).
    """

    rotation: np.ndarray
    translation: np.ndarray
    tolerance: float = field(default=ORTHONORMAL_TOLERANCE, repr=False)

    def __post_init__(self):
        rotation = np.array(self.rotation, dtype=np.float64)
        translation = np.array(self.translation, dtype=np.float64).reshape(-1)
        if rotation.shape != (3, 3):
            raise ValueError(f"rotation must be 3x3, got {rotation.shape}")
        if translation.shape != (3,):
            raise ValueError(f"translation must have 3 entries, got {translation.shape}")
        if not (np.all(np.isfinite(rotation)) and np.all(np.isfinite(translation))):
            raise ValueError("transform contains non-finite values")
        err = orthonormality_error(rotation)
        if err > self.tolerance:
            raise ValueError(f"rotation is not orthonormal (error {err:.3e})")
        rotation.flags.writeable = False
        translation.flags.writeable = False
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "translation", translation)

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, tolerance: float = ORTHONORMAL_TOLERANCE) -> "RigidTransform":
        """Build from a 3x4 [R|t] or 4x4 homogeneous matrix."""
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.shape not in ((3, 4), (4, 4)):
            raise ValueError(f"expected 3x4 or 4x4 matrix, got {matrix.shape}")
        return cls(matrix[:3, :3], matrix[:3, 3], tolerance=tolerance)

    def as_matrix(self) -> np.ndarray:
        out = np.eye(4)
        out[:3, :3] = self.rotation
        out[:3, 3] = self.translation
        return out

    @property
    def baseline(self) -> float:
        """Translation magnitude (meters)."""
        return float(np.linalg.norm(self.translation))

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Transform points of shape (..., 3)."""
        points = np.asarray(points, dtype=np.float64)
        return points @ self.rotation.T + self.translation

    def __matmul__(self, other: "RigidTransform") -> "RigidTransform":
        return RigidTransform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def __repr__(self) -> str:
        return f"RigidTransform(rotation={self.rotation.tolist()}, translation={self.translation.tolist()})"


@dataclass(eq=False)
class DepthField:
    """
    Dense H×W depth in meters with a validity mask. Values outside the mask
    are ignored by every operation; when no mask is given it is derived as
    finite and strictly positive.
    """

    values: np.ndarray
    mask: np.ndarray | None = None

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise DimensionMismatchError(f"depth field must be 2-D, got shape {values.shape}")
        if self.mask is None:
            with np.errstate(invalid="ignore"):
                mask = np.isfinite(values) & (values > 0)
        else:
            mask = np.array(self.mask, dtype=bool)
            if mask.shape != values.shape:
                raise DimensionMismatchError(
                    f"mask shape {mask.shape} does not match values shape {values.shape}"
                )
            picked = values[mask]
            if picked.size and not (np.all(np.isfinite(picked)) and np.all(picked > 0)):
                raise InvalidDepthError("masked depth values must be finite and > 0")
        self.values = values
        self.mask = mask

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def valid_count(self) -> int:
        return int(self.mask.sum())

    def filled(self, fill: float = np.nan) -> np.ndarray:
        """Values with invalid pixels replaced by ``fill``."""
        return np.where(self.mask, self.values, fill)

    def scaled(self, factor: float) -> "DepthField":
        return DepthField(self.values * factor, self.mask.copy())

    def copy(self) -> "DepthField":
        return DepthField(self.values.copy(), self.mask.copy())


def require_same_shape(*shapes: tuple[int, ...], what: str = "fields") -> None:
    first = tuple(shapes[0])
    for other in shapes[1:]:
        if tuple(other) != first:
            raise DimensionMismatchError(f"{what} differ in shape: {first} vs {tuple(other)}")
