"""
Projection, unprojection, pose algebra and depth/image warping.
"""
import logging

import numpy as np

from src.errors import BehindCameraError, DimensionMismatchError, InvalidDepthError
from src.geometry.models import DepthField, Intrinsics, RigidTransform

logger = logging.getLogger(__name__)


def project(point, k: Intrinsics) -> tuple[np.ndarray, float]:
    """
    Project a camera-frame point to pixel coordinates.
    :return: (pixel (u, v), depth z)
    """
    x, y, z = (float(c) for c in np.asarray(point, dtype=np.float64).reshape(3))
    if not z > 0:
        raise BehindCameraError(f"point is behind the camera (z={z})")
    return np.array([k.fx * x / z + k.cx, k.fy * y / z + k.cy]), z


def unproject(pixel, depth: float, k: Intrinsics) -> np.ndarray:
    """Back-project pixel (u, v) at the given depth into the camera frame."""
    if not depth > 0:
        raise InvalidDepthError(f"depth must be > 0, got {depth}")
    u, v = (float(c) for c in np.asarray(pixel, dtype=np.float64).reshape(2))
    return np.array([(u - k.cx) * depth / k.fx, (v - k.cy) * depth / k.fy, float(depth)])


def project_points(points: np.ndarray, k: Intrinsics) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Vectorised projection of (N, 3) points.
    :return: (u, v, z); u and v are NaN where z <= 0.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    z = points[:, 2]
    front = z > 0
    safe_z = np.where(front, z, 1.0)
    u = np.where(front, k.fx * points[:, 0] / safe_z + k.cx, np.nan)
    v = np.where(front, k.fy * points[:, 1] / safe_z + k.cy, np.nan)
    return u, v, z


def unproject_pixels(u: np.ndarray, v: np.ndarray, depth: np.ndarray, k: Intrinsics) -> np.ndarray:
    """Vectorised back-projection; returns (N, 3)."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    depth = np.asarray(depth, dtype=np.float64)
    return np.stack(
        [(u - k.cx) * depth / k.fx, (v - k.cy) * depth / k.fy, depth], axis=-1
    )


def unproject_depth(depth: DepthField, k: Intrinsics) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Back-project every valid pixel of a depth field, in row-major scan order.
    :return: (rows, cols, points (N, 3))
    """
    if depth.shape != k.shape:
        raise DimensionMismatchError(f"depth shape {depth.shape} does not match intrinsics {k.shape}")
    rows, cols = np.nonzero(depth.mask)
    points = unproject_pixels(cols, rows, depth.values[rows, cols], k)
    return rows, cols, points


def compose(a: RigidTransform, b: RigidTransform) -> RigidTransform:
    """a ∘ b: apply b first, then a."""
    return a @ b


def inverse(a: RigidTransform) -> RigidTransform:
    rotation_t = a.rotation.T
    return RigidTransform(rotation_t, -rotation_t @ a.translation)


def relative_pose(pose_i: RigidTransform, pose_j: RigidTransform) -> RigidTransform:
    """
    Transform taking camera-i points into camera-j coordinates, given
    absolute camera-to-world poses (KITTI odometry convention).
    """
    return compose(inverse(pose_j), pose_i)


def _bilinear_taps(u: np.ndarray, v: np.ndarray, height: int, width: int):
    """
    Corner indices and weights for bilinear sampling. A tap with zero weight
    is collapsed onto its neighbour so samples exactly on the last row or
    column stay in bounds.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    finite = np.isfinite(u) & np.isfinite(v)
    u_safe = np.where(finite, u, -1.0)
    v_safe = np.where(finite, v, -1.0)
    u0 = np.floor(u_safe)
    v0 = np.floor(v_safe)
    fu = u_safe - u0
    fv = v_safe - v0
    u1 = np.where(fu > 0, u0 + 1, u0)
    v1 = np.where(fv > 0, v0 + 1, v0)
    inside = finite & (u0 >= 0) & (v0 >= 0) & (u1 <= width - 1) & (v1 <= height - 1)
    u0 = np.where(inside, u0, 0).astype(np.int64)
    v0 = np.where(inside, v0, 0).astype(np.int64)
    u1 = np.where(inside, u1, 0).astype(np.int64)
    v1 = np.where(inside, v1, 0).astype(np.int64)
    weights = (
        (1 - fu) * (1 - fv),
        fu * (1 - fv),
        (1 - fu) * fv,
        fu * fv,
    )
    corners = ((v0, u0), (v0, u1), (v1, u0), (v1, u1))
    return corners, weights, inside


def sample_bilinear(
    field: DepthField, u: np.ndarray, v: np.ndarray, max_spread: float | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """
    Bilinearly sample a depth field at sub-pixel positions.
    A sample is valid only if all four taps are in bounds and masked. With
    ``max_spread``, taps whose depths differ by more than that ratio
    (max/min − 1) straddle a depth edge and the sample is invalid too.
    :return: (values, valid); values are NaN where invalid.
    """
    height, width = field.shape
    corners, weights, valid = _bilinear_taps(u, v, height, width)
    out = np.zeros(np.shape(valid), dtype=np.float64)
    low = np.full(np.shape(valid), np.inf)
    high = np.zeros(np.shape(valid))
    for (rows, cols), weight in zip(corners, weights):
        valid &= field.mask[rows, cols]
        tap = field.values[rows, cols]
        out += weight * tap
        low = np.fmin(low, tap)
        high = np.fmax(high, tap)
    if max_spread is not None:
        with np.errstate(divide="ignore", invalid="ignore"):
            valid &= high / low - 1.0 <= max_spread
    return np.where(valid, out, np.nan), valid


def forward_splat(
    source_depth: DepthField, pose_s_to_t: RigidTransform, k: Intrinsics
) -> tuple[DepthField, np.ndarray, np.ndarray]:
    """
    Forward-warp a source depth field into the target view and keep track of
    where each surviving splat actually landed.

    Every valid source pixel is back-projected, moved into the target frame
    and splatted onto the nearest target pixel. Collisions keep the smallest
    depth (the first source pixel in scan order on ties); target pixels that
    receive nothing are left unmasked.
    :return: (warped depth, u, v) with the sub-pixel target position of the
        winning splat per pixel, NaN where nothing landed.
    """
    height, width = source_depth.shape
    _, _, points = unproject_depth(source_depth, k)
    moved = pose_s_to_t.apply(points)
    u, v, z = project_points(moved, k)
    front = z > 0
    ut = np.floor(np.where(front, u, -1.0) + 0.5)
    vt = np.floor(np.where(front, v, -1.0) + 0.5)
    keep = np.flatnonzero(front & (ut >= 0) & (ut < width) & (vt >= 0) & (vt < height))
    flat = (vt[keep] * width + ut[keep]).astype(np.int64)

    # z-buffer: order by target pixel, then depth; the first entry per pixel wins
    order = np.lexsort((z[keep], flat))
    pixels, first = np.unique(flat[order], return_index=True)
    winners = keep[order[first]]

    depth = np.full(height * width, np.nan)
    u_hit = np.full(height * width, np.nan)
    v_hit = np.full(height * width, np.nan)
    depth[pixels] = z[winners]
    u_hit[pixels] = u[winners]
    v_hit[pixels] = v[winners]
    mask = np.zeros(height * width, dtype=bool)
    mask[pixels] = True
    logger.debug("forward_splat: %d of %d source pixels landed", len(keep), len(z))
    shape = (height, width)
    return DepthField(depth.reshape(shape), mask.reshape(shape)), u_hit.reshape(shape), v_hit.reshape(shape)


def warp_depth(source_depth: DepthField, pose_s_to_t: RigidTransform, k: Intrinsics) -> DepthField:
    """
    Forward-warp a source depth field into the target view.

    Every valid source pixel is back-projected, moved into the target frame
    and splatted onto the nearest target pixel. Collisions keep the smallest
    depth; target pixels that receive nothing are left unmasked.
    """
    return forward_splat(source_depth, pose_s_to_t, k)[0]


def warp_image(
    source_image: np.ndarray,
    target_depth: DepthField,
    pose_t_to_s: RigidTransform,
    k: Intrinsics,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Backward-warp a source image into the target view using the target depth.
    :return: (warped H×W×C image, valid mask); invalid pixels are zero.
    """
    image = np.asarray(source_image, dtype=np.float64)
    if image.ndim == 2:
        image = image[..., None]
    if image.shape[:2] != target_depth.shape:
        raise DimensionMismatchError(
            f"image shape {image.shape[:2]} does not match depth shape {target_depth.shape}"
        )
    height, width = target_depth.shape
    rows, cols, points = unproject_depth(target_depth, k)
    u, v, _ = project_points(pose_t_to_s.apply(points), k)
    corners, weights, inside = _bilinear_taps(u, v, height, width)

    sampled = np.zeros((len(rows), image.shape[2]), dtype=np.float64)
    for (r, c), weight in zip(corners, weights):
        sampled += weight[:, None] * image[r, c]

    warped = np.zeros_like(image)
    valid = np.zeros((height, width), dtype=bool)
    warped[rows[inside], cols[inside]] = sampled[inside]
    valid[rows[inside], cols[inside]] = True
    return warped, valid
