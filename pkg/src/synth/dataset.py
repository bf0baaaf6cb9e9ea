"""
Write a complete synthetic fusion dataset to disk.
"""
import logging
from pathlib import Path
from typing import Sequence

from src.fileio.dataset import DatasetLayout
from src.fileio.intrinsics import write_intrinsics
from src.fileio.manifest import Manifest, build_manifest, write_manifest
from src.fileio.pfm import write_depth, write_pfm
from src.fileio.poses import write_poses
from src.fileio.volume import write_volume
from src.geometry.models import Intrinsics, RigidTransform
from src.probvolume.models import DepthHypotheses
from src.synth.config import synth_config as cfg
from src.synth.models import PriorModel, SceneSpec
from src.synth.service import make_mvs_depth, make_prior, make_probvolume, make_scene

logger = logging.getLogger(__name__)


def write_dataset(
    root,
    spec: SceneSpec,
    k: Intrinsics,
    trajectory: Sequence[RigidTransform],
    view_sets: int = 4,
    prior_model: PriorModel | None = None,
    mvs_inlier_prob: float | None = None,
    mvs_noise_rel: float | None = None,
    volume_peakedness: float | None = 2.0,
) -> Manifest:
    """
    Render the scene and write intrinsics, poses, images, ground truth,
    priors, one MVS depth per frame and view set, a probability volume for
    the first frame, and a checksummed manifest.
    """
    layout = DatasetLayout(Path(root))
    layout.root.mkdir(parents=True, exist_ok=True)
    scene = make_scene(spec, k, trajectory)
    prior_model = prior_model or PriorModel(
        error_rel=cfg.prior_error_rel,
        error_cell=cfg.prior_error_cell,
        uncertainty_value=cfg.prior_uncertainty_rel,
        seed=spec.seed,
    )
    travel = max(0.0, max(float(p.translation[2]) for p in trajectory))
    near, far = spec.depth_range[0], spec.depth_range[1] + travel

    files: dict[str, list] = {
        "intrinsics": [write_intrinsics(layout.intrinsics, k)],
        "poses": [write_poses(layout.poses, scene.poses)],
        "image": [],
        "gt": [],
        "prior": [],
        "prior_uncertainty": [],
        "mvs": [],
        "volume": [],
    }
    for frame, view in enumerate(scene.views):
        files["image"].append(write_pfm(layout.image(frame), view.image.values))
        files["gt"].append(write_depth(layout.gt(frame), view.depth))
        prior = make_prior(view.depth, prior_model.model_copy(update={"seed": prior_model.seed + frame}))
        files["prior"].append(write_depth(layout.prior(frame), prior.depth))
        files["prior_uncertainty"].append(write_pfm(layout.prior_uncertainty(frame), prior.uncertainty))
        for view_set in range(view_sets):
            mvs = make_mvs_depth(
                view.depth,
                (near, far),
                seed=spec.seed,
                stream=frame * view_sets + view_set,
                inlier_prob=mvs_inlier_prob,
                noise_rel=mvs_noise_rel,
            )
            files["mvs"].append(write_depth(layout.mvs(frame, view_set), mvs))

    if volume_peakedness is not None:
        hypotheses = DepthHypotheses.uniform_inverse(near, far, cfg.hypothesis_planes)
        volume = make_probvolume(scene.views[0].depth, hypotheses, volume_peakedness)
        directory = write_volume(layout.volume(0), volume)
        files["volume"] = sorted(p for p in directory.iterdir() if p.is_file())

    manifest = build_manifest(layout.root, files)
    write_manifest(layout.root, manifest)
    logger.info("write_dataset: %d frames, %d files under %s", len(scene.views), len(manifest.entries), layout.root)
    return manifest
