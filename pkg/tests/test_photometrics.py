import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.errors import DimensionMismatchError, EmptyInputError, InvalidDepthError, InvalidUncertaintyError
from src.geometry.models import DepthField
from src.photometrics.losses import (
    min_reprojection,
    mono_loss,
    nll_loss,
    photometric_residual,
    smoothness_loss,
    ssim,
    total_loss,
)
from src.photometrics.metrics import depth_metrics, per_pixel_errors
from src.photometrics.models import Image, SparsificationMetric
from src.photometrics.sparsification import removal_fractions, sparsification, sparsify_depth


@pytest.fixture
def textured() -> Image:
    return Image(np.random.default_rng(0).uniform(size=(16, 20, 3)))


class TestImage:
    def test_grey_image_gets_one_channel(self):
        assert Image(np.zeros((4, 5))).channels == 1

    @pytest.mark.parametrize("values", [np.full((2, 2), 1.5), np.full((2, 2), np.nan)])
    def test_rejects_out_of_range(self, values):
        with pytest.raises(ValueError):
            Image(values)

    def test_rejects_two_channels(self):
        with pytest.raises(DimensionMismatchError):
            Image(np.zeros((2, 2, 2)))


class TestPhotometricResidual:
    def test_identical_images(self, textured):
        assert_allclose(ssim(textured, textured), 1.0)
        assert_allclose(photometric_residual(textured, textured), 0.0, atol=1e-12)

    def test_alpha_zero_is_l1(self, textured):
        other = Image(np.clip(textured.values + 0.1, 0, 1))
        expected = np.abs(textured.values - other.values).mean(axis=2)
        assert_allclose(photometric_residual(textured, other, alpha=0.0), expected)

    def test_default_alpha_mixes_both_terms(self, textured):
        other = Image(1.0 - textured.values)
        r = photometric_residual(textured, other)
        l1 = photometric_residual(textured, other, alpha=0.0)
        dssim = photometric_residual(textured, other, alpha=1.0)
        assert_allclose(r, 0.85 * dssim + 0.15 * l1)

    def test_shape_mismatch(self, textured):
        with pytest.raises(DimensionMismatchError):
            photometric_residual(textured, Image(np.zeros((16, 20, 1))))

    def test_alpha_range(self, textured):
        with pytest.raises(ValueError):
            photometric_residual(textured, textured, alpha=1.5)


class TestMinReprojection:
    def test_single_map_is_identity(self):
        m = np.arange(6.0).reshape(2, 3)
        assert_allclose(min_reprojection([m]), m)

    def test_per_pixel_minimum(self):
        assert_allclose(min_reprojection([2 * np.ones((2, 2)), 3 * np.ones((2, 2))]), 2 * np.ones((2, 2)))

    def test_empty(self):
        with pytest.raises(EmptyInputError):
            min_reprojection([])


class TestSmoothness:
    def test_constant_depth(self, textured):
        assert smoothness_loss(DepthField(np.full((16, 20), 7.0)), textured) == 0.0

    def test_two_by_two(self):
        depth = DepthField(np.array([[0.9, 1.1], [0.9, 1.1]]))
        assert smoothness_loss(depth, Image(np.full((2, 2), 0.5))) == pytest.approx(0.2)

    def test_edges_damp_the_penalty(self):
        depth = DepthField(np.array([[0.9, 1.1], [0.9, 1.1]]))
        edge = Image(np.array([[0.0, 1.0], [0.0, 1.0]]))
        assert smoothness_loss(depth, edge) == pytest.approx(0.2 * np.exp(-1.0))

    @pytest.mark.parametrize("c", [0.1, 10.0])
    def test_scale_invariant(self, textured, c):
        depth = DepthField(np.random.default_rng(1).uniform(2, 20, (16, 20)))
        assert smoothness_loss(depth.scaled(c), textured) == pytest.approx(smoothness_loss(depth, textured), abs=1e-9)

    def test_all_invalid(self, textured):
        with pytest.raises(InvalidDepthError):
            smoothness_loss(DepthField(np.full((16, 20), np.nan)), textured)


class TestMonoLoss:
    def test_zero(self, textured):
        assert mono_loss([np.zeros((16, 20))], [DepthField(np.ones((16, 20)))], [textured]) == 0.0

    def test_no_smoothness_is_photometric_mean(self, textured):
        residual = np.random.default_rng(2).uniform(size=(16, 20))
        depth = DepthField(np.random.default_rng(3).uniform(1, 5, (16, 20)))
        assert mono_loss([residual], [depth], [textured], smooth_weight=0.0) == pytest.approx(residual.mean())

    def test_hand_computed(self):
        depth = DepthField(np.array([[0.9, 1.1], [0.9, 1.1]]))
        image = Image(np.full((2, 2), 0.5))
        assert mono_loss([np.full((2, 2), 0.5)], [depth], [image], smooth_weight=1e-3) == pytest.approx(0.5002)

    def test_per_source_lists_are_minimised(self, textured):
        depth = DepthField(np.ones((16, 20)))
        value = mono_loss([[np.full((16, 20), 0.4), np.full((16, 20), 0.2)]], [depth], [textured])
        assert value == pytest.approx(0.2)

    def test_scales_are_averaged(self, textured):
        depth = DepthField(np.ones((16, 20)))
        value = mono_loss([np.full((16, 20), 0.2), np.full((16, 20), 0.4)], [depth, depth], [textured, textured])
        assert value == pytest.approx(0.3)

    def test_length_mismatch(self, textured):
        with pytest.raises(DimensionMismatchError):
            mono_loss([np.zeros((16, 20))], [], [textured])


class TestNllLoss:
    def test_zero_residual_unit_uncertainty(self):
        assert nll_loss(np.zeros((2, 2)), np.ones((2, 2))) == 0.0

    def test_arithmetic(self):
        assert nll_loss(np.ones((1, 1)), np.full((1, 1), np.e)) == pytest.approx(1 / np.e + 1, abs=1e-4)

    def test_minimised_at_mean_residual(self):
        residual = np.random.default_rng(4).uniform(0.1, 1.0, (8, 8))
        grid = np.arange(0.05, 2.0, 1e-3)
        losses = [nll_loss(residual, np.full(residual.shape, u)) for u in grid]
        assert grid[int(np.argmin(losses))] == pytest.approx(residual.mean(), abs=1e-3)

    def test_non_positive_uncertainty(self):
        with pytest.raises(InvalidUncertaintyError):
            nll_loss(np.ones((1, 2)), np.array([[1.0, 0.0]]))

    def test_masked_pixels_are_skipped(self):
        value = nll_loss(np.ones((1, 2)), np.array([[1.0, 0.0]]), mask=np.array([[True, False]]))
        assert value == 1.0

    def test_nothing_to_evaluate(self):
        with pytest.raises(EmptyInputError):
            nll_loss(np.full((1, 1), np.nan), np.ones((1, 1)))


class TestTotalLoss:
    def test_identical_depths(self):
        depth = DepthField(np.full((2, 2), 4.0))
        assert total_loss(depth, depth, np.ones((2, 2)), mono=0.3) == pytest.approx(0.3)

    def test_inverse_depth_residual(self):
        refined = DepthField(np.full((1, 1), 2.0))
        predicted = DepthField(np.full((1, 1), 4.0))
        assert total_loss(refined, predicted, np.full((1, 1), 0.5)) == pytest.approx(0.25 / 0.5 + np.log(0.5))


class TestDepthMetrics:
    def test_perfect_prediction(self):
        gt = DepthField(np.random.default_rng(5).uniform(1, 50, (8, 8)))
        m = depth_metrics(gt, gt)
        assert (m.abs_rel, m.sq_rel, m.rmse, m.rmse_log) == (0.0, 0.0, 0.0, 0.0)
        assert (m.d1, m.d2, m.d3) == (1.0, 1.0, 1.0)
        assert m.count == 64

    def test_delta_boundary_is_strict(self):
        gt = DepthField(np.array([[4.0, 8.0], [16.0, 32.0]]))
        m = depth_metrics(gt.scaled(1.25), gt)
        assert m.abs_rel == pytest.approx(0.25)
        assert m.d1 == 0.0
        assert m.d2 == 1.0

    def test_cap_drops_far_ground_truth(self):
        gt = DepthField(np.array([[10.0, 100.0]]))
        pred = DepthField(np.array([[10.0, 1.0]]))
        m = depth_metrics(pred, gt)
        assert m.count == 1
        assert m.abs_rel == 0.0

    def test_median_scaling(self):
        gt = DepthField(np.random.default_rng(6).uniform(1, 50, (8, 8)))
        m = depth_metrics(gt.scaled(0.5), gt, median_scaling=True)
        assert m.median_scale == pytest.approx(2.0)
        assert m.d1 == 1.0
        assert m.abs_rel == pytest.approx(0.0, abs=1e-12)

    def test_no_overlap(self):
        gt = DepthField(np.array([[1.0, np.nan]]))
        pred = DepthField(np.array([[np.nan, 1.0]]))
        with pytest.raises(EmptyInputError):
            depth_metrics(pred, gt)


class TestSparsification:
    def test_fractions(self):
        fractions = removal_fractions(0.02)
        assert len(fractions) == 50
        assert fractions[-1] == pytest.approx(0.98)

    def test_uncertainty_equal_to_error_matches_oracle(self):
        errors = np.random.default_rng(7).exponential(size=500)
        result = sparsification(errors, np.abs(errors))
        assert np.array_equal(result.sparsification, result.oracle)
        assert result.ause == 0.0
        assert result.aurg > 0

    def test_equal_errors_flatten_oracle(self):
        errors = np.full(100, 0.3)
        result = sparsification(errors, np.random.default_rng(8).uniform(size=100))
        assert_allclose(result.oracle, 0.3)
        assert_allclose(result.oracle, result.random)

    def test_ties_break_by_index(self):
        errors = np.concatenate([np.zeros(50), np.ones(50)])
        # constant uncertainty removes the lowest indices first, i.e. the zero errors
        result = sparsification(errors, np.ones(100), step=0.5)
        assert result.sparsification[1] == pytest.approx(1.0)

    def test_random_uncertainty_is_worse_than_informative(self):
        rng = np.random.default_rng(9)
        errors = rng.exponential(size=1000)
        informative = sparsification(errors, errors + rng.normal(0, 0.1, 1000))
        uninformative = sparsification(errors, rng.uniform(size=1000))
        assert informative.ause < uninformative.ause

    @pytest.mark.parametrize("metric", list(SparsificationMetric))
    def test_all_metrics_start_at_the_full_metric(self, metric):
        rng = np.random.default_rng(10)
        gt = DepthField(rng.uniform(2, 40, (10, 10)))
        pred = DepthField(gt.values * rng.uniform(0.7, 1.4, (10, 10)))
        result = sparsify_depth(pred, gt, rng.uniform(size=(10, 10)), metric)
        m = depth_metrics(pred, gt)
        full = {
            SparsificationMetric.ABS_REL: m.abs_rel,
            SparsificationMetric.SQ_REL: m.sq_rel,
            SparsificationMetric.RMSE: m.rmse,
            SparsificationMetric.RMSE_LOG: m.rmse_log,
            SparsificationMetric.A1: 1.0 - m.d1,
        }[metric]
        assert result.sparsification[0] == pytest.approx(full)
        assert result.random[0] == pytest.approx(full)

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            sparsification(np.ones(60), np.ones(61))

    def test_too_few_points(self):
        with pytest.raises(EmptyInputError):
            sparsification(np.ones(10), np.ones(10))

    def test_rows(self):
        rows = sparsification(np.arange(100.0), np.arange(100.0)).rows()
        assert rows[0]["fraction"] == 0.0
        assert set(rows[0]) == {"fraction", "sparsification", "oracle", "random"}


def test_per_pixel_a1_indicator():
    errors = per_pixel_errors(np.array([1.0, 1.3, 0.5]), np.array([1.0, 1.0, 1.0]), "a1")
    assert errors.tolist() == [0.0, 1.0, 1.0]
