"""
KITTI odometry pose files: one line per frame with the row-major 3×4
[R|t] mapping that frame's camera coordinates into the first frame.
"""
import logging
from pathlib import Path
from typing import Sequence

import numpy as np

from src.errors import MissingInputError, PoseFormatError
from src.geometry.models import RigidTransform, nearest_rotation, orthonormality_error

logger = logging.getLogger(__name__)

WARN_TOLERANCE = 1e-3
# Beyond this the 3×3 block is not a noisy rotation at all
REJECT_TOLERANCE = 0.1


def parse_pose_line(line: str, lineno: int = 0, source: str = "<string>") -> RigidTransform:
    fields = line.split()
    if len(fields) != 12:
        raise PoseFormatError(f"{source}:{lineno}: expected 12 numbers, got {len(fields)}")
    try:
        matrix = np.array([float(v) for v in fields]).reshape(3, 4)
    except ValueError as e:
        raise PoseFormatError(f"{source}:{lineno}: {e}") from e
    if not np.all(np.isfinite(matrix)):
        raise PoseFormatError(f"{source}:{lineno}: non-finite pose entry")

    rotation = matrix[:, :3]
    error = orthonormality_error(rotation)
    if error > REJECT_TOLERANCE:
        raise PoseFormatError(f"{source}:{lineno}: rotation block is not orthonormal (error {error:.3e})")
    if error > 1e-9:
        if error > WARN_TOLERANCE:
            logger.warning("%s:%d: rotation off by %.3e, re-orthonormalised", source, lineno, error)
        rotation = nearest_rotation(rotation)
    return RigidTransform(rotation, matrix[:, 3])


def read_poses(path) -> list[RigidTransform]:
    path = Path(path)
    if not path.is_file():
        raise MissingInputError(path, "pose file")
    poses = []
    with path.open(encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if line.strip():
                poses.append(parse_pose_line(line, lineno, str(path)))
    logger.debug("read %d poses from %s", len(poses), path)
    return poses


def format_pose(pose: RigidTransform) -> str:
    return " ".join(format(float(v), ".17g") for v in pose.as_matrix()[:3].ravel())


def write_poses(path, poses: Sequence[RigidTransform]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as f:
        for pose in poses:
            f.write(format_pose(pose) + "\n")
    return path
