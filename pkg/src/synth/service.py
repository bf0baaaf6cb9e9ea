"""
Synthetic stand-ins for the depth networks: ray-traced planar scenes with
procedural texture, monocular-like priors, MVS-like depth maps, sampled
observations from the mixture model and probability volumes.
"""
import logging
from typing import Sequence

import numpy as np

from src.bayesfilter.models import MonocularPrior
from src.consistency.models import Observation
from src.errors import EmptyInputError, InvalidDepthError, SceneGeometryError
from src.geometry.models import DepthField, Intrinsics, RigidTransform
from src.photometrics.models import Image
from src.probvolume.models import DepthHypotheses, ProbabilityVolume
from src.synth.config import synth_config as cfg
from src.synth.models import (
    MeasurementModel,
    Plane,
    PriorModel,
    Scene,
    SceneLayout,
    SceneSpec,
    SceneView,
    TexturePattern,
)
from src.synth.rng import PixelRNG, lattice_values

logger = logging.getLogger(__name__)

# RNG stream ids; observation streams are offset by 16 per observation index
_LAYOUT_STREAM = 1
_TEXTURE_STREAM = 8
_PRIOR_STREAM = 32
_MVS_STREAM = 64
_OBS_STREAMS = 4096


def forward_trajectory(count: int, step: float = 0.5, lateral: float = 0.0) -> list[RigidTransform]:
    """Camera-to-world poses moving ``step`` meters forward (and ``lateral`` sideways) per frame."""
    if count < 1:
        raise EmptyInputError("a trajectory needs at least one pose")
    return [RigidTransform(np.eye(3), [lateral * i, 0.0, step * i]) for i in range(count)]


def _fov_x(k: Intrinsics, depth: float) -> tuple[float, float]:
    return -k.cx / k.fx * depth, (k.width - 1 - k.cx) / k.fx * depth


def _fov_y(k: Intrinsics, depth: float) -> tuple[float, float]:
    return -k.cy / k.fy * depth, (k.height - 1 - k.cy) / k.fy * depth


def _panels(rng: PixelRNG, k: Intrinsics, near: float, far: float, count: int, draw: int) -> list[Plane]:
    u = rng.uniform(_LAYOUT_STREAM, np.arange(count * 5), draw).reshape(count, 5)
    planes = []
    for i in range(count):
        depth = near + (far - near) * (0.05 + 0.55 * (i + u[i, 0]) / count)
        x_lo, x_hi = _fov_x(k, depth)
        y_lo, y_hi = _fov_y(k, depth)
        width = (x_hi - x_lo) * (0.2 + 0.2 * u[i, 1])
        height = (y_hi - y_lo) * (0.3 + 0.3 * u[i, 2])
        x0 = x_lo + (x_hi - x_lo - width) * u[i, 3]
        y0 = y_lo + (y_hi - y_lo - height) * u[i, 4]
        planes.append(Plane.fronto(depth, x_bounds=(x0, x0 + width), y_bounds=(y0, y0 + height)))
    return planes


def _slanted(near: float, far: float, y_bounds=None) -> Plane:
    theta = np.deg2rad(cfg.slant_degrees)
    mid = near + 0.35 * (far - near)
    return Plane(normal=(0.0, np.sin(theta), np.cos(theta)), offset=np.cos(theta) * mid, y_bounds=y_bounds)


def _staircase(k: Intrinsics, near: float, far: float) -> list[Plane]:
    planes = []
    for j in range(cfg.stairs):
        depth = near + (far - near) * (0.1 + 0.5 * j / max(cfg.stairs - 1, 1))
        x_lo, x_hi = _fov_x(k, depth)
        span = (x_hi - x_lo) / cfg.stairs
        planes.append(Plane.fronto(depth, x_bounds=(x_lo + j * span, x_lo + (j + 1) * span)))
    return planes


def layout_planes(spec: SceneSpec, k: Intrinsics, travel: float = 0.0) -> list[Plane]:
    """
    Planes of a procedural layout, ending with the unbounded background at
    the far depth. Depths are shifted by ``travel`` so the range holds for
    the camera nearest the scene.
    """
    if spec.planes:
        return list(spec.planes)
    near, far = (d + travel for d in spec.depth_range)
    rng = PixelRNG(spec.seed)
    background = Plane.fronto(far)
    if spec.layout is SceneLayout.FRONTO_PARALLEL:
        planes = _panels(rng, k, near, far, cfg.panels, draw=0)
    elif spec.layout is SceneLayout.SLANTED:
        planes = [_slanted(near, far)]
    elif spec.layout is SceneLayout.STAIRCASE:
        planes = _staircase(k, near, far)
    else:
        planes = _panels(rng, k, near, far, max(cfg.panels - 1, 1), draw=1)
        planes.append(_slanted(near, far, y_bounds=(0.0, far)))
    return planes + [background]


def _check_cameras(planes: Sequence[Plane], poses: Sequence[RigidTransform]) -> None:
    for index, pose in enumerate(poses):
        centre = pose.translation
        for plane in planes:
            signed = float(np.dot(plane.normal, centre) - plane.offset)
            if plane.bounded:
                if abs(signed) < cfg.clearance and plane.contains(centre[0], centre[1]):
                    raise SceneGeometryError(f"camera {index} at {centre.tolist()} touches a scene panel")
            elif signed > -cfg.clearance:
                raise SceneGeometryError(
                    f"camera {index} at {centre.tolist()} is not in front of an unbounded plane (offset {plane.offset})"
                )


def _value_noise(points: np.ndarray, seed: int, stream: int, cell: float) -> np.ndarray:
    """Trilinear value noise with smoothstep weights, one lattice value per cell corner."""
    scaled = points / cell
    base = np.floor(scaled)
    frac = scaled - base
    weight = frac * frac * (3.0 - 2.0 * frac)
    base = base.astype(np.int64)
    out = np.zeros(len(points))
    for corner in range(8):
        offset = np.array([(corner >> axis) & 1 for axis in range(3)])
        w = np.prod(np.where(offset == 1, weight, 1.0 - weight), axis=1)
        out += w * lattice_values(seed, stream, base + offset)
    return out


def texture(points: np.ndarray, seed: int, pattern: TexturePattern = TexturePattern.NOISE_STRIPES) -> np.ndarray:
    """RGB intensities in [0, 1] at world points (N×3)."""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    channels = []
    for c in range(3):
        noise = _value_noise(points, seed, _TEXTURE_STREAM + c, cfg.texture_cell)
        phase = 2.0 * np.pi * c / 3.0
        along = points[:, 0] + 0.5 * points[:, 1] + 0.3 * points[:, 2]
        stripes = 0.5 + 0.5 * np.sin(2.0 * np.pi * along / cfg.stripe_period + phase)
        if pattern is TexturePattern.NOISE:
            value = noise
        elif pattern is TexturePattern.STRIPES:
            value = stripes
        else:
            value = 0.65 * noise + 0.35 * stripes
        channels.append(value)
    return np.clip(np.stack(channels, axis=1), 0.0, 1.0)


def render_view(
    planes: Sequence[Plane], pose: RigidTransform, k: Intrinsics, seed: int, pattern: TexturePattern
) -> SceneView:
    """Ray-trace the nearest plane hit for every pixel of a camera-to-world pose."""
    rows, cols = np.mgrid[0 : k.height, 0 : k.width]
    rays = np.stack(
        [(cols.ravel() - k.cx) / k.fx, (rows.ravel() - k.cy) / k.fy, np.ones(rows.size)], axis=1
    )
    directions = rays @ pose.rotation.T
    centre = pose.translation

    depth = np.full(rows.size, np.inf)
    for plane in planes:
        normal = np.asarray(plane.normal)
        denom = directions @ normal
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (plane.offset - normal @ centre) / denom
        hit = (denom > 1e-12) & (t > 0)
        t = np.where(hit, t, 0.0)
        points = centre + t[:, None] * directions
        hit &= plane.contains(points[:, 0], points[:, 1])
        depth = np.where(hit & (t < depth), t, depth)

    mask = np.isfinite(depth)
    colours = np.zeros((rows.size, 3))
    points = centre + np.where(mask, depth, 0.0)[:, None] * directions
    colours[mask] = texture(points[mask], seed, pattern)
    shape = k.shape
    return SceneView(
        pose=pose,
        depth=DepthField(np.where(mask, depth, np.nan).reshape(shape), mask.reshape(shape)),
        image=Image(colours.reshape(*shape, 3)),
    )


def make_scene(spec: SceneSpec, k: Intrinsics, trajectory: Sequence[RigidTransform]) -> Scene:
    """
    Render exact depth and texture for every pose of a camera-to-world
    trajectory. Texture is a function of the world point, so views are
    photoconsistent by construction.
    """
    if not trajectory:
        raise EmptyInputError("make_scene needs a non-empty trajectory")
    travel = max(0.0, max(float(p.translation[2]) for p in trajectory))
    planes = layout_planes(spec, k, travel)
    _check_cameras(planes, trajectory)
    views = [render_view(planes, pose, k, spec.seed, spec.texture) for pose in trajectory]
    logger.info(
        "make_scene: %s layout, %d planes, %d views of %dx%d",
        spec.layout.value,
        len(planes),
        len(views),
        k.width,
        k.height,
    )
    return Scene(spec=spec, planes=planes, views=views)


def inlier_draws(shape: tuple[int, int], model: MeasurementModel, stream: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel (covered, inlier) draws of the measurement model."""
    rng = PixelRNG(model.seed)
    base = _OBS_STREAMS + 16 * stream
    covered = rng.grid_uniform(base, shape) < model.coverage
    inlier = rng.grid_uniform(base + 1, shape) < model.rho
    return covered, inlier


def sample_observation(
    gt_depth: DepthField,
    model: MeasurementModel,
    z_range: tuple,
    stream: int = 0,
) -> Observation:
    """
    Draw one observation per covered ground-truth pixel: with probability ρ
    from N(1/d, (τ_rel/d)²), otherwise uniform over [z_min, z_max]. The
    variance field is (τ_rel/d)². ``stream`` separates repeated draws.
    """
    shape = gt_depth.shape
    z_min = np.broadcast_to(np.asarray(z_range[0], dtype=np.float64), shape)
    z_max = np.broadcast_to(np.asarray(z_range[1], dtype=np.float64), shape)
    valid = gt_depth.mask
    if np.any(z_min[valid] >= z_max[valid]):
        raise InvalidDepthError("outlier support needs z_min < z_max at every pixel")
    if np.any(z_min[valid] < 0):
        raise InvalidDepthError("outlier support must be non-negative")

    rng = PixelRNG(model.seed)
    base = _OBS_STREAMS + 16 * stream
    covered, inlier = inlier_draws(shape, model, stream)
    noise = rng.grid_normal(base + 2, shape)
    u = rng.grid_uniform(base + 3, shape)

    truth = 1.0 / np.where(valid, gt_depth.values, 1.0)
    tau = model.tau_rel * truth
    z = np.where(inlier, np.maximum(truth + tau * noise, 1e-9), z_min + u * (z_max - z_min))
    mask = valid & covered
    return Observation(
        inv_depth=np.where(mask, z, np.nan),
        variance=np.where(mask, tau**2, np.nan),
        mask=mask,
    )


def make_probvolume(gt_depth: DepthField, hypotheses: DepthHypotheses, peakedness: float) -> ProbabilityVolume:
    """Per-pixel softmax of −peakedness·|d_j − d_gt|; invalid pixels get a uniform distribution."""
    if peakedness < 0:
        raise ValueError(f"peakedness must be >= 0, got {peakedness}")
    gt = np.where(gt_depth.mask, gt_depth.values, 0.0)
    logits = -peakedness * np.abs(hypotheses.planes[None, None, :] - gt[..., None])
    logits = np.where(gt_depth.mask[..., None], logits, 0.0)
    logits -= logits.max(axis=2, keepdims=True)
    weights = np.exp(logits)
    return ProbabilityVolume(weights / weights.sum(axis=2, keepdims=True), hypotheses)


def smooth_field(shape: tuple[int, int], seed: int, stream: int, cell: int) -> np.ndarray:
    """Bilinear value noise on a pixel lattice, scaled to roughly unit variance."""
    rows, cols = np.mgrid[0 : shape[0], 0 : shape[1]]
    r = rows / cell
    c = cols / cell
    r0 = np.floor(r).astype(np.int64)
    c0 = np.floor(c).astype(np.int64)
    fr = r - r0
    fc = c - c0
    out = np.zeros(shape)
    for dr, dc, w in ((0, 0, (1 - fr) * (1 - fc)), (0, 1, (1 - fr) * fc), (1, 0, fr * (1 - fc)), (1, 1, fr * fc)):
        coords = np.stack([r0 + dr, c0 + dc], axis=-1)
        out += w * (lattice_values(seed, stream, coords) - 0.5)
    return out * np.sqrt(12.0)


def make_prior(gt_depth: DepthField, model: PriorModel | None = None) -> MonocularPrior:
    """
    Monocular-like prior: ground truth times exp(error_rel·smooth noise),
    with inverse-depth uncertainty either relative to 1/d or constant.
    """
    model = model or PriorModel(
        error_rel=cfg.prior_error_rel,
        error_cell=cfg.prior_error_cell,
        uncertainty_value=cfg.prior_uncertainty_rel,
    )
    valid = gt_depth.mask
    error = smooth_field(gt_depth.shape, model.seed, _PRIOR_STREAM, model.error_cell)
    depth = np.where(valid, gt_depth.values * np.exp(model.error_rel * error), np.nan)
    if model.uncertainty == "relative":
        sigma = np.where(valid, model.uncertainty_value / np.where(valid, depth, 1.0), np.nan)
    else:
        sigma = np.where(valid, model.uncertainty_value, np.nan)
    return MonocularPrior(DepthField(depth, valid.copy()), sigma)


def make_mvs_depth(
    gt_depth: DepthField,
    depth_range: tuple[float, float],
    seed: int,
    stream: int = 0,
    inlier_prob: float | None = None,
    noise_rel: float | None = None,
) -> DepthField:
    """
    MVS-like depth: inliers are gt·(1 + noise_rel·N(0, 1)), outliers are
    uniform over ``depth_range``.
    """
    inlier_prob = cfg.mvs_inlier_prob if inlier_prob is None else inlier_prob
    noise_rel = cfg.mvs_noise_rel if noise_rel is None else noise_rel
    shape = gt_depth.shape
    rng = PixelRNG(seed)
    base = _MVS_STREAM + 4 * stream
    inlier = rng.grid_uniform(base, shape) < inlier_prob
    noise = rng.grid_normal(base + 1, shape)
    u = rng.grid_uniform(base + 2, shape)
    near, far = depth_range
    valid = gt_depth.mask
    gt = np.where(valid, gt_depth.values, 1.0)
    depth = np.where(inlier, gt * np.maximum(1.0 + noise_rel * noise, 1e-3), near + u * (far - near))
    return DepthField(np.where(valid, depth, np.nan), valid.copy())
