import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.ndimage import binary_erosion
from scipy.stats import binomtest

from src.bayesfilter.models import PixelState
from src.errors import EmptyInputError, InvalidDepthError, QuadratureError, SceneGeometryError
from src.fileio.manifest import read_manifest
from src.geometry.models import DepthField, Intrinsics, RigidTransform
from src.geometry.service import relative_pose, warp_image
from src.photometrics.losses import photometric_residual
from src.photometrics.models import Image
from src.probvolume.models import DepthHypotheses
from src.probvolume.service import entropy_uncertainty, expectation_depth
from src.synth.dataset import write_dataset
from src.synth.models import MeasurementModel, Plane, PriorModel, SceneLayout, SceneSpec
from src.synth.quadrature import quadrature_posterior
from src.synth.rng import PixelRNG, lattice_values
from src.synth.service import (
    forward_trajectory,
    inlier_draws,
    make_mvs_depth,
    make_prior,
    make_probvolume,
    make_scene,
    sample_observation,
    texture,
)


def flat(shape, value=5.0) -> DepthField:
    return DepthField(np.full(shape, value))


class TestPixelRNG:
    def test_same_seed_same_values(self):
        a = PixelRNG(3).grid_uniform(7, (20, 30))
        b = PixelRNG(3).grid_uniform(7, (20, 30))
        assert np.array_equal(a, b)

    def test_streams_and_seeds_differ(self):
        base = PixelRNG(3).grid_uniform(7, (100,))
        assert not np.array_equal(base, PixelRNG(3).grid_uniform(8, (100,)))
        assert not np.array_equal(base, PixelRNG(4).grid_uniform(7, (100,)))

    def test_independent_of_evaluation_order(self):
        rng = PixelRNG(11)
        index = np.arange(1000)
        order = np.random.default_rng(0).permutation(1000)
        assert np.array_equal(rng.uniform(2, index)[order], rng.uniform(2, index[order]))

    def test_distributions(self):
        rng = PixelRNG(5)
        u = rng.grid_uniform(0, (100_000,))
        n = rng.grid_normal(1, (100_000,))
        assert 0 < u.min() and u.max() < 1
        assert u.mean() == pytest.approx(0.5, abs=0.005)
        assert n.mean() == pytest.approx(0.0, abs=0.02)
        assert n.std() == pytest.approx(1.0, abs=0.02)

    def test_lattice_values(self):
        coords = np.array([[0, 0, 0], [1, 2, 3], [-4, 5, 6]])
        values = lattice_values(1, 2, coords)
        assert np.array_equal(values, lattice_values(1, 2, coords))
        assert np.all((values > 0) & (values < 1))


class TestScene:
    def test_single_fronto_plane(self, k):
        scene = make_scene(SceneSpec(planes=[Plane.fronto(5.0)]), k, [RigidTransform.identity()])
        depth = scene.views[0].depth
        assert depth.mask.all()
        assert_allclose(depth.values, 5.0)

    @pytest.mark.parametrize("layout", list(SceneLayout))
    def test_layouts_cover_every_pixel_within_range(self, scene_k, layout):
        trajectory = forward_trajectory(3, 0.5)
        scene = make_scene(SceneSpec(layout=layout, depth_range=(4.0, 30.0), seed=1), scene_k, trajectory)
        for view in scene.views:
            assert view.depth.mask.all()
            assert view.depth.values.min() >= 4.0 - 1e-9
            assert view.depth.values.max() <= 31.0 + 1e-9
            assert view.image.channels == 3

    def test_images_are_photoconsistent(self):
        k = Intrinsics(fx=120.0, fy=120.0, cx=47.5, cy=31.5, width=96, height=64)
        # two pixels of disparity at 5 m
        shift = RigidTransform(np.eye(3), [2 * 5.0 / 120.0, 0.0, 0.0])
        scene = make_scene(SceneSpec(planes=[Plane.fronto(5.0)]), k, [RigidTransform.identity(), shift])
        target, source = scene.views
        warped, valid = warp_image(source.image.values, target.depth, relative_pose(target.pose, source.pose), k)
        residual = photometric_residual(target.image, Image(np.clip(warped, 0, 1)))
        interior = binary_erosion(valid, np.ones((3, 3)))
        assert interior.sum() > 0.8 * valid.size
        assert residual[interior].mean() < 1e-3

    def test_scene_is_deterministic(self, scene_k):
        spec = SceneSpec(layout=SceneLayout.MIXED, seed=9)
        a = make_scene(spec, scene_k, forward_trajectory(2))
        b = make_scene(spec, scene_k, forward_trajectory(2))
        assert np.array_equal(a.views[1].depth.values, b.views[1].depth.values)
        assert np.array_equal(a.views[1].image.values, b.views[1].image.values)

    def test_camera_behind_plane(self, k):
        with pytest.raises(SceneGeometryError):
            make_scene(SceneSpec(planes=[Plane.fronto(1.0)]), k, forward_trajectory(5, 0.5))

    def test_empty_trajectory(self, k):
        with pytest.raises(EmptyInputError):
            make_scene(SceneSpec(), k, [])

    def test_invalid_range(self):
        with pytest.raises(ValueError):
            SceneSpec(depth_range=(10.0, 5.0))

    def test_texture_range(self):
        points = np.random.default_rng(0).uniform(-20, 20, (500, 3))
        colours = texture(points, seed=2)
        assert colours.shape == (500, 3)
        assert colours.min() >= 0 and colours.max() <= 1


class TestSampleObservation:
    def test_noise_free_inliers(self):
        gt = DepthField(np.random.default_rng(0).uniform(2, 20, (10, 12)))
        obs = sample_observation(gt, MeasurementModel(rho=1.0, tau_rel=1e-9), (0.01, 1.0))
        assert obs.mask.all()
        assert_allclose(obs.inv_depth, 1.0 / gt.values, atol=1e-6)

    def test_outliers_are_uniform(self):
        obs = sample_observation(flat((100, 1000)), MeasurementModel(rho=0.0, tau_rel=0.02, seed=1), (0.1, 0.5))
        standard_error = 0.4 / np.sqrt(12) / np.sqrt(obs.count)
        assert abs(obs.inv_depth.mean() - 0.3) < 4 * standard_error
        assert obs.inv_depth.min() >= 0.1 and obs.inv_depth.max() <= 0.5

    def test_inlier_frequency(self):
        covered, inlier = inlier_draws((100, 1000), MeasurementModel(rho=0.7, tau_rel=0.02, seed=2))
        assert covered.all()
        assert binomtest(int(inlier.sum()), inlier.size, 0.7).pvalue > 1e-3

    def test_coverage(self):
        obs = sample_observation(flat((100, 100)), MeasurementModel(rho=1.0, tau_rel=0.02, coverage=0.5), (0.1, 0.5))
        assert obs.count / obs.mask.size == pytest.approx(0.5, abs=0.03)
        assert np.isnan(obs.inv_depth[~obs.mask]).all()

    def test_deterministic_per_seed_and_stream(self):
        model = MeasurementModel(rho=0.5, tau_rel=0.02, seed=4)
        a = sample_observation(flat((20, 20)), model, (0.1, 0.5), stream=1)
        b = sample_observation(flat((20, 20)), model, (0.1, 0.5), stream=1)
        c = sample_observation(flat((20, 20)), model, (0.1, 0.5), stream=2)
        assert np.array_equal(a.inv_depth, b.inv_depth)
        assert not np.array_equal(a.inv_depth, c.inv_depth)

    def test_variance_follows_depth(self):
        obs = sample_observation(flat((4, 4), 4.0), MeasurementModel(rho=1.0, tau_rel=0.02), (0.1, 0.5))
        assert_allclose(obs.variance, (0.02 / 4.0) ** 2)

    def test_bad_support(self):
        with pytest.raises(InvalidDepthError):
            sample_observation(flat((2, 2)), MeasurementModel(rho=1.0, tau_rel=0.02), (0.5, 0.5))


class TestProbVolume:
    HYPOTHESES = DepthHypotheses.uniform_inverse(4.0, 30.0, 32)

    def test_zero_peakedness_is_uniform(self):
        volume = make_probvolume(flat((3, 4), 7.0), self.HYPOTHESES, 0.0)
        assert_allclose(expectation_depth(volume).values, self.HYPOTHESES.planes.mean())

    def test_sharp_volume_picks_nearest_plane(self):
        gt = DepthField(np.random.default_rng(0).uniform(4, 30, (5, 5)))
        depth = expectation_depth(make_probvolume(gt, self.HYPOTHESES, 1e6)).values
        planes = self.HYPOTHESES.planes
        nearest = planes[np.argmin(np.abs(planes[None, None, :] - gt.values[..., None]), axis=2)]
        assert_allclose(depth, nearest, atol=1e-6)

    def test_entropy_falls_with_peakedness(self):
        gt = DepthField(np.random.default_rng(1).uniform(4, 30, (8, 8)))
        entropies = [entropy_uncertainty(make_probvolume(gt, self.HYPOTHESES, p)).mean() for p in (0, 1, 10, 100)]
        assert all(a > b for a, b in zip(entropies, entropies[1:]))

    def test_negative_peakedness(self):
        with pytest.raises(ValueError):
            make_probvolume(flat((2, 2)), self.HYPOTHESES, -1.0)


class TestPriorAndMvs:
    def test_relative_uncertainty(self):
        prior = make_prior(flat((32, 32), 10.0), PriorModel(uncertainty_value=0.2))
        assert_allclose(prior.uncertainty, 0.2 / prior.depth.values)

    def test_constant_uncertainty(self):
        prior = make_prior(flat((8, 8)), PriorModel(uncertainty="constant", uncertainty_value=0.05))
        assert_allclose(prior.uncertainty, 0.05)

    def test_error_is_bounded_and_seeded(self):
        gt = flat((32, 32), 10.0)
        prior = make_prior(gt, PriorModel(error_rel=0.1, seed=3))
        ratio = prior.depth.values / gt.values
        assert np.all(np.abs(np.log(ratio)) <= 0.1 * np.sqrt(3) + 1e-12)
        assert ratio.std() > 0
        assert np.array_equal(prior.depth.values, make_prior(gt, PriorModel(error_rel=0.1, seed=3)).depth.values)

    def test_invalid_pixels_stay_invalid(self):
        gt = DepthField(np.array([[5.0, np.nan]]))
        prior = make_prior(gt)
        assert prior.depth.mask.tolist() == [[True, False]]

    def test_exact_mvs(self):
        gt = DepthField(np.random.default_rng(0).uniform(4, 30, (6, 6)))
        mvs = make_mvs_depth(gt, (4.0, 30.0), seed=0, inlier_prob=1.0, noise_rel=0.0)
        assert np.array_equal(mvs.values, gt.values)

    def test_mvs_outliers_stay_in_range(self):
        mvs = make_mvs_depth(flat((20, 20)), (4.0, 30.0), seed=0, inlier_prob=0.0)
        assert mvs.values.min() >= 4.0 and mvs.values.max() <= 30.0


class TestQuadrature:
    STATE = PixelState(mu=0.5, sigma2=0.01, a=10.0, b=10.0, z_min=0.4, z_max=0.6)

    def test_gaussian_product(self):
        z, tau2 = 0.55, 0.005
        s2 = 1.0 / (1.0 / 0.01 + 1.0 / tau2)
        m = s2 * (0.5 / 0.01 + z / tau2)
        result = quadrature_posterior(self.STATE, z, tau2, include_outlier=False)
        assert result.mean == pytest.approx(m, abs=1e-6)
        assert result.variance == pytest.approx(s2, abs=1e-6)

    def test_grid_convergence(self):
        coarse = quadrature_posterior(self.STATE, 0.56, 0.004, z_intervals=2048, rho_intervals=512)
        fine = quadrature_posterior(self.STATE, 0.56, 0.004, z_intervals=4096, rho_intervals=1024)
        assert fine.mean == pytest.approx(coarse.mean, rel=1e-5)
        assert fine.variance == pytest.approx(coarse.variance, rel=1e-5)
        assert fine.rho_mean == pytest.approx(coarse.rho_mean, rel=1e-5)

    def test_zero_mass(self):
        state = PixelState(0.5, 1e-6, 10.0, 10.0, 0.499, 0.501)
        with pytest.raises(QuadratureError):
            quadrature_posterior(state, 100.0, 1e-6, include_outlier=False)


class TestWriteDataset:
    def test_writes_a_verifiable_dataset(self, tmp_path, k):
        manifest = write_dataset(tmp_path, SceneSpec(seed=2), k, forward_trajectory(3, 0.5), view_sets=2)
        roles = {entry.role for entry in manifest.entries}
        assert roles == {"intrinsics", "poses", "image", "gt", "prior", "prior_uncertainty", "mvs", "volume"}
        assert len(manifest.paths("mvs")) == 6
        assert len(manifest.paths("volume")) == 33
        assert read_manifest(tmp_path).entries == manifest.entries

    def test_same_seed_same_bytes(self, tmp_path, k):
        a = write_dataset(tmp_path / "a", SceneSpec(seed=5), k, forward_trajectory(2), view_sets=1)
        b = write_dataset(tmp_path / "b", SceneSpec(seed=5), k, forward_trajectory(2), view_sets=1)
        assert [e.checksum for e in a.entries] == [e.checksum for e in b.entries]
