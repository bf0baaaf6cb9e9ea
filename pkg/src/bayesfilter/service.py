"""
Inverse-depth filter with a Gaussian + uniform measurement model.

Each pixel carries q(z, ρ) = Beta(ρ; a, b)·N(z; μ, σ²). A new observation
z_obs with variance τ² is absorbed by matching the first two moments of the
exact posterior in z and the first two moments in ρ.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

import numpy as np
from scipy.stats import norm

from src.bayesfilter.config import FilterConfig, filter_config
from src.bayesfilter.models import (
    FilterState,
    FusionResult,
    FusionStatus,
    IterationStats,
    MonocularPrior,
    PixelState,
)
from src.consistency.models import Observation
from src.errors import DimensionMismatchError, InvalidDepthError
from src.geometry.models import DepthField

logger = logging.getLogger(__name__)


def init_state(prior: MonocularPrior, config: FilterConfig | None = None) -> FilterState:
    """
    μ⁰ = 1/d, σ⁰ = u, z_max = μ⁰ + σ⁰, z_min = max(μ⁰ − σ⁰, floor).
    Pixels without a valid prior get inert placeholders.
    """
    config = config or filter_config
    valid = prior.depth.mask.copy()
    depth = prior.depth.values
    if np.any(depth[valid] <= 0):
        raise InvalidDepthError("prior depth must be > 0")

    mu = np.where(valid, 1.0 / np.where(valid, depth, 1.0), 1.0)
    sigma = np.where(valid, prior.uncertainty, 1.0)
    z_max = mu + sigma
    z_min = np.maximum(mu - sigma, config.z_floor)
    shape = prior.shape
    return FilterState(
        mu=mu,
        sigma2=sigma**2,
        a=np.full(shape, float(config.a0)),
        b=np.full(shape, float(config.b0)),
        z_min=z_min,
        z_max=z_max,
        converged=np.zeros(shape, dtype=bool),
        valid=valid,
        updated=np.zeros(shape, dtype=bool),
        sigma_conv2=(config.convergence_rel * mu) ** 2,
    )


def _moment_match(mu, sigma2, a, b, z_min, z_max, z, tau2, min_normal_density):
    """
    Vectorised moment-matched update. Returns the new (μ, σ², a, b) and the
    accepted mask; rejected entries keep their old values.
    """
    s2 = 1.0 / (1.0 / sigma2 + 1.0 / tau2)
    m = s2 * (mu / sigma2 + z / tau2)

    normal = norm.pdf(z, loc=mu, scale=np.sqrt(sigma2 + tau2))
    inside = (z >= z_min) & (z <= z_max)
    c1 = a / (a + b) * normal
    c2 = np.where(inside, b / (a + b) / (z_max - z_min), 0.0)
    total = c1 + c2
    accepted = (total > 0) & (inside | (normal > min_normal_density))

    safe_total = np.where(accepted, total, 1.0)
    w1 = np.where(accepted, c1 / safe_total, 0.0)
    w2 = np.where(accepted, c2 / safe_total, 1.0)

    mu_new = w1 * m + w2 * mu
    # C1'(s² + m²) + C2'(σ² + μ²) − μ'², expanded so no large terms cancel
    sigma2_new = w1 * s2 + w2 * sigma2 + w1 * w2 * (m - mu) ** 2

    ab1 = a + b + 1.0
    ab2 = a + b + 2.0
    f = w1 * (a + 1.0) / ab1 + w2 * a / ab1
    e = w1 * (a + 1.0) * (a + 2.0) / (ab1 * ab2) + w2 * a * (a + 1.0) / (ab1 * ab2)
    a_new = (e - f) / (f - e / f)
    b_new = a_new * (1.0 - f) / f

    return (
        np.where(accepted, mu_new, mu),
        np.where(accepted, sigma2_new, sigma2),
        np.where(accepted, a_new, a),
        np.where(accepted, b_new, b),
        accepted,
    )


def update_pixel(
    state: PixelState, z_obs: float, tau2: float, config: FilterConfig | None = None
) -> PixelState:
    """
    Absorb one inverse-depth observation into a single pixel. An observation
    that neither branch can explain leaves the state unchanged.
    """
    config = config or filter_config
    if not tau2 > 0:
        raise InvalidDepthError(f"observation variance must be > 0, got {tau2}")
    mu, sigma2, a, b, _ = _moment_match(
        np.float64(state.mu),
        np.float64(state.sigma2),
        np.float64(state.a),
        np.float64(state.b),
        np.float64(state.z_min),
        np.float64(state.z_max),
        np.float64(z_obs),
        np.float64(tau2),
        config.min_normal_density,
    )
    return PixelState(float(mu), float(sigma2), float(a), float(b), state.z_min, state.z_max)


def _update_block(state: FilterState, obs: Observation, flat: np.ndarray, config: FilterConfig):
    take = lambda arr: arr.reshape(-1)[flat]  # noqa: E731
    sigma2_old = take(state.sigma2)
    mu, sigma2, a, b, accepted = _moment_match(
        take(state.mu),
        sigma2_old,
        take(state.a),
        take(state.b),
        take(state.z_min),
        take(state.z_max),
        take(obs.inv_depth),
        take(obs.variance),
        config.min_normal_density,
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        converged = accepted & (
            (sigma2 < take(state.sigma_conv2))
            | (np.abs(sigma2 - sigma2_old) / sigma2_old < config.min_rel_change)
        )
    return flat, mu, sigma2, a, b, accepted, converged


def _apply_observation(
    state: FilterState,
    obs: Observation,
    index: int,
    config: FilterConfig,
    executor: ThreadPoolExecutor | None,
) -> IterationStats:
    gate = obs.mask & state.valid & ~state.converged
    flat = np.flatnonzero(gate)
    blocks = [flat[i : i + config.block_size] for i in range(0, len(flat), config.block_size)]
    work = lambda block: _update_block(state, obs, block, config)  # noqa: E731
    results = list(executor.map(work, blocks)) if executor else [work(b) for b in blocks]

    rejected = 0
    updated = 0
    for block, mu, sigma2, a, b, accepted, converged in results:
        for name, values in (("mu", mu), ("sigma2", sigma2), ("a", a), ("b", b)):
            getattr(state, name).reshape(-1)[block] = values
        state.updated.reshape(-1)[block[accepted]] = True
        state.converged.reshape(-1)[block[converged]] = True
        updated += int(accepted.sum())
        rejected += int((~accepted).sum())

    valid_ratio = state.inlier_ratio[state.valid]
    stats = IterationStats(
        index=index,
        observed=int(obs.mask.sum()),
        updated=updated,
        rejected=rejected,
        converged=int(state.converged.sum()),
        mean_inlier_ratio=float(valid_ratio.mean()) if valid_ratio.size else 0.0,
    )
    logger.info(
        "observation %d: %d observed, %d updated, %d rejected, %d converged",
        index,
        stats.observed,
        stats.updated,
        stats.rejected,
        stats.converged,
    )
    return stats


def _finish(
    prior: MonocularPrior,
    state: FilterState,
    iterations: list[IterationStats],
    status: FusionStatus,
    config: FilterConfig,
) -> FusionResult:
    updated = state.updated
    with np.errstate(divide="ignore"):
        refined = np.clip(1.0 / state.mu, config.min_depth, config.depth_cap)
    values = np.where(updated, refined, prior.depth.values)
    mask = prior.depth.mask.copy()
    if config.inlier_threshold is not None:
        mask &= state.inlier_ratio >= config.inlier_threshold
    uncertainty = np.where(updated, np.sqrt(state.sigma2), prior.uncertainty)
    return FusionResult(
        state=state,
        depth=DepthField(np.where(mask, values, np.nan), mask),
        uncertainty=uncertainty,
        status=status,
        iterations=iterations,
    )


def run_fusion(
    prior: MonocularPrior,
    observations: Sequence[Observation],
    config: FilterConfig | None = None,
    workers: int = 1,
) -> FusionResult:
    """
    Fuse an ordered observation stream into the monocular prior.

    Pixels masked in an observation are updated unless already converged;
    pixels never updated keep their prior depth and uncertainty exactly.
    Stops early once every pixel any remaining observation covers has
    converged.
    """
    config = config or filter_config
    state = init_state(prior, config)
    if not observations:
        logger.warning("run_fusion: empty observation stream, returning the prior unchanged")
        return _finish(prior, state, [], FusionStatus.NO_OBSERVATIONS, config)
    for obs in observations:
        if obs.shape != prior.shape:
            raise DimensionMismatchError(f"observation shape {obs.shape} does not match prior {prior.shape}")

    # Coverage of the observations still to come, for the early-exit test
    remaining = [np.zeros(prior.shape, dtype=bool)]
    for obs in reversed(observations[1:]):
        remaining.append(remaining[-1] | obs.mask)
    remaining.reverse()

    iterations: list[IterationStats] = []
    status = FusionStatus.OK
    executor = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for index, obs in enumerate(observations):
            iterations.append(_apply_observation(state, obs, index, config, executor))
            ahead = remaining[index] & state.valid
            if index < len(observations) - 1 and ahead.any() and np.all(state.converged[ahead]):
                logger.info("run_fusion: all pixels ahead converged after %d observations", index + 1)
                status = FusionStatus.CONVERGED
                break
    finally:
        if executor:
            executor.shutdown()
    return _finish(prior, state, iterations, status, config)
