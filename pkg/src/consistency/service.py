"""
Forward-backward reprojection check between a target view and its sources,
and fusion of the per-pair reports into one sparse observation.
"""
import logging
from typing import Sequence

import numpy as np

from src.consistency.config import consistency_config as cfg
from src.consistency.models import ConsistencyReport, ConsistencyThresholds, DiffMode, Observation
from src.errors import EmptyInputError, ZeroBaselineError
from src.geometry.models import DepthField, Intrinsics, RigidTransform, require_same_shape
from src.geometry.service import (
    forward_splat,
    inverse,
    project_points,
    sample_bilinear,
    unproject_depth,
    unproject_pixels,
)

logger = logging.getLogger(__name__)


def _depth_difference(warped: np.ndarray, target: np.ndarray, mode: DiffMode) -> np.ndarray:
    if mode is DiffMode.RELATIVE:
        return np.abs(warped - target) / target
    if mode is DiffMode.ABSOLUTE:
        return np.abs(warped - target)
    return np.abs(1.0 / warped - 1.0 / target)


def _inverse_field(depth: DepthField) -> DepthField:
    mask = depth.mask
    return DepthField(np.where(mask, 1.0 / np.where(mask, depth.values, 1.0), np.nan), mask.copy())


def _flatter_slope(inv_depth: np.ndarray, axis: int) -> np.ndarray:
    """Per-pixel one-sided inverse-depth difference of smaller magnitude; 0 where neither side exists."""
    step = np.diff(inv_depth, axis=axis)
    pad_shape = list(inv_depth.shape)
    pad_shape[axis] = 1
    pad = np.full(pad_shape, np.nan)
    forward = np.concatenate([step, pad], axis=axis)
    backward = np.concatenate([pad, step], axis=axis)
    slope = np.where(np.isnan(forward) | (np.abs(backward) < np.abs(forward)), backward, forward)
    return np.nan_to_num(slope, nan=0.0)


def _depth_at_splats(target_depth: DepthField, rows, cols, u, v) -> np.ndarray:
    """
    Target depth at each splat's sub-pixel position, extrapolated in inverse
    depth from the pixel it landed on. Inverse depth is affine in pixel
    coordinates on a plane, so planar patches come out exact; taking the
    flatter side keeps the extrapolation off the far side of a depth edge.
    """
    inv = _inverse_field(target_depth).values
    at = (
        inv[rows, cols]
        + _flatter_slope(inv, 1)[rows, cols] * (u - cols)
        + _flatter_slope(inv, 0)[rows, cols] * (v - rows)
    )
    return np.where(at > 0, 1.0 / np.where(at > 0, at, 1.0), np.nan)


def check_pair(
    target_depth: DepthField,
    source_depth: DepthField,
    pose_t_to_s: RigidTransform,
    k: Intrinsics,
    th: ConsistencyThresholds | None = None,
) -> ConsistencyReport:
    """
    Check every valid target pixel against one source view.

    e_dist: project into the source, sample the source depth bilinearly,
    re-project back and measure the pixel distance to the start.
    e_diff: forward-warp the source depth into the target view and compare
    each surviving splat with the target depth at the splat's own position.

    A pixel is covered when both comparisons exist and neither is an
    occlusion. Occlusions, by more than ``occlusion_margin`` in relative depth:
      - the source surface lies in front of the projected target point;
      - the splat lies behind the target surface;
      - the bilinear source sample mixes taps that far apart (a depth edge).
    """
    th = th or ConsistencyThresholds()
    require_same_shape(target_depth.shape, source_depth.shape, k.shape, what="depth fields")
    shape = target_depth.shape
    margin = th.occlusion_margin

    rows, cols, points = unproject_depth(target_depth, k)
    us, vs, zs = project_points(pose_t_to_s.apply(points), k)
    # interpolated in inverse depth, which is exact across a plane
    sampled_inv, sampled_ok = sample_bilinear(_inverse_field(source_depth), us, vs, max_spread=margin)
    sampled = 1.0 / np.where(sampled_ok, sampled_inv, 1.0)
    sampled_ok &= ~(sampled < zs * (1.0 - margin))

    e_dist = np.full(shape, np.nan)
    reprojected_ok = np.zeros(shape, dtype=bool)
    if sampled_ok.any():
        back = unproject_pixels(us[sampled_ok], vs[sampled_ok], sampled[sampled_ok], k)
        ur, vr, zr = project_points(inverse(pose_t_to_s).apply(back), k)
        front = zr > 0
        r_ok = rows[sampled_ok][front]
        c_ok = cols[sampled_ok][front]
        e_dist[r_ok, c_ok] = np.hypot(ur[front] - c_ok, vr[front] - r_ok)
        reprojected_ok[r_ok, c_ok] = True

    warped, u_hit, v_hit = forward_splat(source_depth, inverse(pose_t_to_s), k)
    landed = warped.mask & target_depth.mask
    r_w, c_w = np.nonzero(landed)
    reference = np.full(shape, np.nan)
    reference[r_w, c_w] = _depth_at_splats(target_depth, r_w, c_w, u_hit[landed], v_hit[landed])
    visible = landed.copy()
    behind = warped.values[landed] > reference[landed] * (1.0 + margin)
    visible[landed] = np.isfinite(reference[landed]) & ~behind

    coverage = reprojected_ok & visible
    e_diff = np.full(shape, np.nan)
    e_diff[coverage] = _depth_difference(warped.values[coverage], reference[coverage], th.diff_mode)

    mask = coverage.copy()
    mask[coverage] = (e_dist[coverage] < th.e1) & (e_diff[coverage] < th.e2)

    report = ConsistencyReport(
        e_dist=e_dist,
        e_diff=e_diff,
        mask=mask,
        coverage=coverage,
        thresholds=th,
        baseline=pose_t_to_s.baseline,
        mean_focal=k.mean_focal,
    )
    logger.debug(
        "check_pair: %d covered, %d consistent (baseline %.3f m)",
        int(coverage.sum()),
        report.inlier_count,
        report.baseline,
    )
    return report


def fuse_checks(reports: Sequence[ConsistencyReport], target_depth: DepthField) -> Observation:
    """
    Keep pixels consistent with every source view and attach the geometric
    inverse-depth variance (κ / (f̄·b_min))², κ = max e_dist clamped to [0.5, e1].
    """
    if not reports:
        raise EmptyInputError("fuse_checks needs at least one consistency report")
    require_same_shape(target_depth.shape, *(r.shape for r in reports), what="reports")

    b_min = min(r.baseline for r in reports)
    if b_min <= 0:
        raise ZeroBaselineError("a view pair has zero baseline; observation variance is undefined")
    mean_focal = reports[0].mean_focal
    e1 = min(r.thresholds.e1 for r in reports)

    mask = target_depth.mask.copy()
    for report in reports:
        mask &= report.mask

    kappa = np.max(np.stack([np.where(mask, r.e_dist, 0.0) for r in reports]), axis=0)
    kappa = np.clip(kappa, min(cfg.min_matching_error, e1), e1)

    inv_depth = np.full(target_depth.shape, np.nan)
    variance = np.full(target_depth.shape, np.nan)
    inv_depth[mask] = 1.0 / target_depth.values[mask]
    variance[mask] = (kappa[mask] / (mean_focal * b_min)) ** 2
    return Observation(inv_depth=inv_depth, variance=variance, mask=mask)
