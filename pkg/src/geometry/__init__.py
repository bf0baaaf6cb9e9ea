"""Pinhole geometry, SE(3) poses and cross-view depth warping."""
from src.geometry.models import DepthField, Intrinsics, RigidTransform
from src.geometry.service import (
    compose,
    forward_splat,
    inverse,
    project,
    project_points,
    relative_pose,
    sample_bilinear,
    unproject,
    unproject_depth,
    warp_depth,
    warp_image,
)

__all__ = [
    "DepthField",
    "Intrinsics",
    "RigidTransform",
    "compose",
    "forward_splat",
    "inverse",
    "project",
    "project_points",
    "relative_pose",
    "sample_bilinear",
    "unproject",
    "unproject_depth",
    "warp_depth",
    "warp_image",
]
