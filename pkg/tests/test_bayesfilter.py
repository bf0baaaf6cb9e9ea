import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from src.bayesfilter.config import FilterConfig
from src.bayesfilter.models import FusionStatus, MonocularPrior, PixelState, UncertaintyEncoding
from src.bayesfilter.service import init_state, run_fusion, update_pixel
from src.consistency.models import Observation
from src.errors import DimensionMismatchError, InvalidDepthError
from src.geometry.models import DepthField
from src.photometrics.sparsification import sparsify_depth
from src.synth.models import MeasurementModel, PriorModel
from src.synth.quadrature import quadrature_posterior
from src.synth.service import make_prior, sample_observation


def prior_of(depth, uncertainty) -> MonocularPrior:
    return MonocularPrior(DepthField(np.asarray(depth, dtype=float)), np.asarray(uncertainty, dtype=float))


def gt_field(seed: int, shape=(24, 32)) -> DepthField:
    return DepthField(np.random.default_rng(seed).uniform(5.0, 30.0, shape))


def observations(gt: DepthField, prior: MonocularPrior, rho: float, seed: int, count: int = 4):
    state = init_state(prior)
    model = MeasurementModel(rho=rho, tau_rel=0.02, seed=seed)
    return [sample_observation(gt, model, (state.z_min, state.z_max), stream=i) for i in range(count)]


@st.composite
def pixel_states(draw) -> PixelState:
    mu = draw(st.floats(0.02, 2.0))
    sigma = draw(st.floats(0.01, 0.5)) * mu
    a = draw(st.floats(0.5, 50.0))
    b = draw(st.floats(0.5, 50.0))
    return PixelState(mu, sigma**2, a, b, max(mu - sigma, 1e-6), mu + sigma)


class TestInitState:
    def test_direct_initialisation(self):
        state = init_state(prior_of([[2.0]], [[0.1]]))
        assert state.mu[0, 0] == pytest.approx(0.5)
        assert state.sigma2[0, 0] == pytest.approx(0.01)
        assert (state.z_min[0, 0], state.z_max[0, 0]) == pytest.approx((0.4, 0.6))
        assert state.inlier_ratio[0, 0] == pytest.approx(0.5)
        assert not state.converged.any()

    def test_lower_bound_of_support(self):
        state = init_state(prior_of([[100.0]], [[0.05]]))
        assert state.mu[0, 0] == pytest.approx(0.01)
        assert state.z_min[0, 0] == 1e-6

    def test_invalid_pixels_are_inert(self):
        state = init_state(prior_of([[2.0, np.nan]], [[0.1, np.nan]]))
        assert state.valid.tolist() == [[True, False]]

    def test_prior_uncertainty_must_be_positive(self):
        with pytest.raises(InvalidDepthError):
            prior_of([[2.0]], [[0.0]])

    def test_prior_shapes_must_match(self):
        with pytest.raises(DimensionMismatchError):
            prior_of([[2.0]], [[0.1, 0.1]])

    @pytest.mark.parametrize(
        ("encoding", "raw"),
        [
            (UncertaintyEncoding.STD, 0.1),
            (UncertaintyEncoding.VARIANCE, 0.01),
            (UncertaintyEncoding.LOG_VARIANCE, np.log(0.01)),
        ],
    )
    def test_uncertainty_encodings(self, encoding, raw):
        prior = MonocularPrior.from_encoded(DepthField(np.array([[2.0]])), np.array([[raw]]), encoding)
        assert prior.uncertainty[0, 0] == pytest.approx(0.1)


class TestUpdatePixel:
    STATE = PixelState(mu=0.5, sigma2=1e-4, a=10.0, b=10.0, z_min=0.1, z_max=0.9)

    def test_symmetric_observation_keeps_the_mean(self):
        new = update_pixel(self.STATE, 0.5, 1e-4)
        assert new.mu == pytest.approx(0.5, abs=1e-15)
        assert new.sigma2 < self.STATE.sigma2

    def test_outlier_lowers_inlier_belief(self):
        new = update_pixel(self.STATE, 0.85, 1e-4)
        assert new.mu == pytest.approx(0.5, abs=1e-9)
        assert new.inlier_ratio < self.STATE.inlier_ratio

    def test_outside_support_is_a_pure_gaussian_product(self):
        state = PixelState(mu=0.5, sigma2=0.01, a=10.0, b=10.0, z_min=0.45, z_max=0.55)
        z, tau2 = 0.6, 0.02
        s2 = 1.0 / (1.0 / 0.01 + 1.0 / tau2)
        m = s2 * (0.5 / 0.01 + z / tau2)
        new = update_pixel(state, z, tau2)
        assert new.mu == pytest.approx(m, abs=1e-12)
        assert new.sigma2 == pytest.approx(s2, abs=1e-12)

    def test_unexplainable_observation_is_rejected(self):
        new = update_pixel(self.STATE, 5.0, 1e-8)
        assert new == self.STATE

    def test_support_is_frozen(self):
        new = update_pixel(self.STATE, 0.52, 1e-4)
        assert (new.z_min, new.z_max) == (self.STATE.z_min, self.STATE.z_max)

    def test_tau2_must_be_positive(self):
        with pytest.raises(InvalidDepthError):
            update_pixel(self.STATE, 0.5, 0.0)

    @given(pixel_states(), st.floats(-3, 3), st.floats(0.1, 10.0))
    @settings(max_examples=200, deadline=None)
    def test_posterior_stays_valid(self, state, offset, tau_ratio):
        sigma = np.sqrt(state.sigma2)
        new = update_pixel(state, state.mu + offset * sigma, tau_ratio * state.sigma2)
        assert new.sigma2 > 0
        assert new.sigma2 <= state.sigma2 + state.mu**2
        assert new.a > 0 and new.b > 0
        assert 0 < new.inlier_ratio < 1

    @given(pixel_states(), st.floats(0.1, 1.0))
    @settings(max_examples=200, deadline=None)
    def test_observation_at_the_mean_never_widens(self, state, tau_ratio):
        new = update_pixel(state, state.mu, tau_ratio * state.sigma2)
        assert new.sigma2 <= state.sigma2 * (1 + 1e-12)


class TestAgainstQuadrature:
    def test_random_cases(self):
        rng = np.random.default_rng(2024)
        start = time.perf_counter()
        for _ in range(1000):
            mu = rng.uniform(0.05, 1.0)
            sigma = rng.uniform(0.02, 0.3) * mu
            a, b = rng.uniform(2.0, 20.0, 2)
            state = PixelState(mu, sigma**2, a, b, max(mu - sigma, 1e-6), mu + sigma)
            tau2 = sigma**2 * rng.uniform(0.1, 10.0)
            z_obs = mu + sigma * rng.uniform(-2.0, 2.0)
            closed = update_pixel(state, z_obs, tau2)
            oracle = quadrature_posterior(state, z_obs, tau2)
            assert closed.mu == pytest.approx(oracle.mean, rel=1e-3)
            assert closed.sigma2 == pytest.approx(oracle.variance, rel=1e-3)
            assert closed.inlier_ratio == pytest.approx(oracle.rho_mean, rel=1e-3)
        assert time.perf_counter() - start < 60.0

    def test_pure_gaussian_branch(self):
        state = PixelState(0.5, 0.01, 10.0, 10.0, 0.45, 0.55)
        oracle = quadrature_posterior(state, 0.6, 0.02, include_outlier=False)
        closed = update_pixel(state, 0.6, 0.02)
        assert closed.mu == pytest.approx(oracle.mean, rel=1e-6)
        assert closed.sigma2 == pytest.approx(oracle.variance, rel=1e-6)


class TestRunFusion:
    def test_no_observations_returns_the_prior(self):
        prior = make_prior(gt_field(0))
        result = run_fusion(prior, [])
        assert result.status is FusionStatus.NO_OBSERVATIONS
        assert np.array_equal(result.depth.values, prior.depth.values)
        assert np.array_equal(result.uncertainty, prior.uncertainty)
        assert result.iterations == []

    def test_unobserved_pixels_keep_the_prior_exactly(self):
        gt = gt_field(1)
        prior = make_prior(gt)
        obs = observations(gt, prior, rho=1.0, seed=1, count=1)[0]
        obs.mask[:, :16] = False
        result = run_fusion(prior, [obs])
        untouched = ~result.state.updated
        assert untouched[:, :16].all()
        assert np.array_equal(result.depth.values[untouched], prior.depth.values[untouched])
        assert np.array_equal(result.uncertainty[untouched], prior.uncertainty[untouched])

    @pytest.mark.parametrize("seed", range(10))
    def test_inliers_shrink_inverse_depth_error(self, seed):
        gt = gt_field(seed)
        prior = make_prior(gt, PriorModel(error_cell=4, seed=seed))
        result = run_fusion(prior, observations(gt, prior, rho=1.0, seed=seed))
        updated = result.state.updated
        truth = 1.0 / gt.values[updated]
        before = np.sqrt(np.mean((1.0 / prior.depth.values[updated] - truth) ** 2))
        after = np.sqrt(np.mean((result.state.mu[updated] - truth) ** 2))
        assert updated.mean() > 0.9
        assert after <= 0.4 * before

    @pytest.mark.parametrize("seed", range(10))
    def test_fused_uncertainty_sparsifies_better(self, seed):
        gt = gt_field(seed)
        prior = make_prior(gt, PriorModel(error_rel=0.1, uncertainty="constant", uncertainty_value=0.01, seed=seed))
        model = MeasurementModel(rho=0.7, tau_rel=0.02, seed=seed)
        state = init_state(prior)
        stream = [sample_observation(gt, model, (state.z_min, state.z_max), stream=i) for i in range(4)]
        result = run_fusion(prior, stream)
        before = sparsify_depth(prior.depth, gt, prior.uncertainty)
        after = sparsify_depth(result.depth, gt, result.uncertainty)
        assert after.ause < before.ause

    def test_outliers_lower_inlier_belief(self):
        gt = gt_field(3)
        prior = make_prior(gt)
        result = run_fusion(prior, observations(gt, prior, rho=0.0, seed=3))
        assert result.state.inlier_ratio[result.state.valid].mean() < 0.5
        before = np.mean(np.abs(prior.depth.values - gt.values) / gt.values)
        after = np.mean(np.abs(result.depth.values - gt.values) / gt.values)
        assert after <= 1.1 * before

    def test_bit_identical_across_workers(self):
        gt = gt_field(4)
        prior = make_prior(gt)
        stream = observations(gt, prior, rho=0.8, seed=4)
        config = FilterConfig(block_size=50)
        serial = run_fusion(prior, stream, config, workers=1)
        parallel = run_fusion(prior, stream, config, workers=4)
        for name, values in serial.state.arrays().items():
            assert np.array_equal(values, parallel.state.arrays()[name]), name

    def test_early_exit_once_converged(self):
        gt = gt_field(5)
        prior = make_prior(gt)
        result = run_fusion(prior, observations(gt, prior, rho=1.0, seed=5, count=3), FilterConfig(convergence_rel=10.0))
        assert result.status is FusionStatus.CONVERGED
        assert len(result.iterations) == 1

    def test_refined_depth_is_capped(self):
        prior = prior_of([[50.0]], [[0.01]])
        obs = Observation(np.array([[0.005]]), np.array([[1e-8]]), np.array([[True]]))
        result = run_fusion(prior, [obs], FilterConfig(depth_cap=80.0))
        assert result.depth.values[0, 0] <= 80.0

    def test_inlier_threshold_masks_low_belief(self):
        gt = gt_field(6)
        prior = make_prior(gt)
        stream = observations(gt, prior, rho=0.0, seed=6)
        result = run_fusion(prior, stream, FilterConfig(inlier_threshold=0.5))
        assert np.all(result.state.inlier_ratio[result.depth.mask] >= 0.5)
        assert result.depth.valid_count < prior.depth.valid_count

    def test_iteration_stats(self):
        gt = gt_field(7)
        prior = make_prior(gt)
        result = run_fusion(prior, observations(gt, prior, rho=1.0, seed=7, count=2))
        first = result.iterations[0]
        assert first.index == 0
        assert first.observed == gt.valid_count
        assert first.updated + first.rejected == first.observed

    def test_shape_mismatch(self):
        prior = make_prior(gt_field(8))
        with pytest.raises(DimensionMismatchError):
            run_fusion(prior, [Observation.empty((2, 2))])


def fuse_benchmark(rho: float, tau_rel: float, seed: int) -> dict:
    """Four-iteration fusion over a 128x384 field with the default prior."""
    gt = gt_field(seed, shape=(128, 384))
    prior = make_prior(gt, PriorModel(seed=seed))
    state = init_state(prior)
    model = MeasurementModel(rho=rho, tau_rel=tau_rel, seed=seed)
    stream = [sample_observation(gt, model, (state.z_min, state.z_max), stream=i) for i in range(4)]
    result = run_fusion(prior, stream)
    updated = result.state.updated
    truth = 1.0 / gt.values
    valid = gt.mask
    return {
        "rmse_prior": np.sqrt(np.mean((1.0 / prior.depth.values[updated] - truth[updated]) ** 2)),
        "rmse_fused": np.sqrt(np.mean((result.state.mu[updated] - truth[updated]) ** 2)),
        "abs_rel_prior": np.mean(np.abs(prior.depth.values[valid] - gt.values[valid]) / gt.values[valid]),
        "abs_rel_fused": np.mean(np.abs(result.depth.values[valid] - gt.values[valid]) / gt.values[valid]),
        "inlier_ratio": result.state.inlier_ratio[valid].mean(),
        "updated": updated.mean(),
    }


@pytest.mark.slow
class TestSyntheticBenchmark:
    def test_mixed_stream_halves_the_error(self):
        start = time.perf_counter()
        runs = [fuse_benchmark(rho=0.7, tau_rel=0.05, seed=seed) for seed in range(10)]
        elapsed = time.perf_counter() - start
        for run in runs:
            assert run["updated"] > 0.9
            assert run["rmse_fused"] <= 0.5 * run["rmse_prior"]
        # four updates from Beta(10, 10) cannot lift a/(a+b) far above 0.5
        assert 0.5 < np.mean([run["inlier_ratio"] for run in runs]) < 0.7
        assert elapsed < 30.0

    def test_clean_stream(self):
        for seed in range(10):
            run = fuse_benchmark(rho=1.0, tau_rel=0.02, seed=seed)
            assert run["rmse_fused"] <= 0.4 * run["rmse_prior"]

    def test_outlier_stream_leaves_the_prior_alone(self):
        for seed in range(10):
            run = fuse_benchmark(rho=0.0, tau_rel=0.05, seed=seed)
            assert run["abs_rel_fused"] <= 1.1 * run["abs_rel_prior"]
            assert run["inlier_ratio"] < 0.5
