"""
End-to-end fusion run: for every target frame, check the MVS depth of each
view set against its sources, fuse the consistent pixels into the monocular
prior, and write refined maps, metrics, curves and a run report.
"""
import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import yaml

from src.bayesfilter.models import FusionResult, MonocularPrior
from src.bayesfilter.service import run_fusion
from src.consistency.models import Observation
from src.consistency.service import check_pair, fuse_checks
from src.errors import EmptyInputError, MissingInputError, ZeroBaselineError
from src.fileio.checkpoint import save_state
from src.fileio.dataset import DatasetLayout, OutputLayout
from src.fileio.intrinsics import read_intrinsics
from src.fileio.manifest import MANIFEST_FILE, read_manifest
from src.fileio.pfm import read_depth, read_pfm, write_depth, write_pfm
from src.fileio.poses import read_poses
from src.fileio.tables import write_csv, write_curves
from src.geometry.models import DepthField, Intrinsics, RigidTransform
from src.geometry.service import relative_pose, warp_image
from src.photometrics.losses import mono_loss, photometric_residual, total_loss
from src.photometrics.metrics import depth_metrics
from src.photometrics.models import Image
from src.photometrics.sparsification import sparsify_depth
from src.pipeline.config import PipelineConfig, dump_config
from src.pipeline.models import FrameReport, RunReport, RunSummary, StageEvaluation, ViewSetReport
from src.synth.dataset import write_dataset
from src.synth.service import forward_trajectory

logger = logging.getLogger(__name__)

METRIC_COLUMNS = (
    "frame",
    "stage",
    "abs_rel",
    "sq_rel",
    "rmse",
    "rmse_log",
    "d1",
    "d2",
    "d3",
    "count",
    "ause",
    "aurg",
    "mono_loss",
)


def ensure_dataset(config: PipelineConfig) -> DatasetLayout:
    """Verify an existing dataset, or generate the synthetic one when enabled."""
    layout = DatasetLayout(config.data_dir)
    if (layout.root / MANIFEST_FILE).is_file():
        read_manifest(layout.root, verify=True)
        return layout
    if layout.intrinsics.is_file():
        return layout
    if not config.synth.enabled:
        raise MissingInputError(layout.intrinsics, "dataset intrinsics")

    synth = config.synth
    logger.info("generating synthetic dataset in %s", layout.root)
    write_dataset(
        layout.root,
        synth.scene_spec(),
        synth.camera.intrinsics(),
        forward_trajectory(synth.frames, synth.step),
        view_sets=len(config.view_sets),
        prior_model=synth.prior,
        mvs_inlier_prob=synth.mvs_inlier_prob,
        mvs_noise_rel=synth.mvs_noise_rel,
    )
    return layout


class FrameProcessor:
    """Per-frame fusion against a loaded dataset; holds no per-frame state."""

    def __init__(self, config: PipelineConfig, layout: DatasetLayout, k: Intrinsics, poses: list[RigidTransform]):
        self.config = config
        self.layout = layout
        self.k = k
        self.poses = poses
        self.output = OutputLayout(config.output_dir)
        self.filter_config = config.filter.filter_config()
        self.thresholds = config.consistency.thresholds()

    def load_prior(self, frame: int) -> MonocularPrior:
        return MonocularPrior.from_encoded(
            read_depth(self.layout.prior(frame)),
            read_pfm(self.layout.prior_uncertainty(frame)),
            self.config.prior_encoding,
        )

    def observe(self, frame: int, index: int, offsets: list[int]) -> tuple[Observation, ViewSetReport] | None:
        sources = [frame + o for o in offsets]
        if any(not 0 <= j < len(self.poses) for j in sources):
            logger.warning("frame %d: view set %d needs frames %s outside the sequence, skipped", frame, index, sources)
            return None
        target = read_depth(self.layout.mvs(frame, index))
        reports = [
            check_pair(
                target,
                read_depth(self.layout.mvs(j, index)),
                relative_pose(self.poses[frame], self.poses[j]),
                self.k,
                self.thresholds,
            )
            for j in sources
        ]
        try:
            obs = fuse_checks(reports, target)
        except ZeroBaselineError:
            logger.warning("frame %d: view set %d has a zero-baseline source, skipped", frame, index)
            return None
        report = ViewSetReport(
            view_set=index,
            sources=sources,
            covered=[int(r.coverage.sum()) for r in reports],
            consistent=[r.inlier_count for r in reports],
            observed=obs.count,
            baseline=min(r.baseline for r in reports),
        )
        logger.info("frame %d: view set %d -> %d consistent pixels", frame, index, obs.count)
        return obs, report

    def photometric_loss(self, frame: int, depth: DepthField) -> float | None:
        """Monocular loss of a depth map against the adjacent frames' images."""
        if not self.layout.image(frame).is_file():
            return None
        target = Image(read_pfm(self.layout.image(frame)))
        maps = []
        for j in (frame - 1, frame + 1):
            if not 0 <= j < len(self.poses) or not self.layout.image(j).is_file():
                continue
            warped, valid = warp_image(
                read_pfm(self.layout.image(j)),
                depth,
                relative_pose(self.poses[frame], self.poses[j]),
                self.k,
            )
            residual = photometric_residual(target, Image(np.clip(warped, 0.0, 1.0)), self.config.loss.alpha)
            maps.append(np.where(valid, residual, np.inf))
        if not maps:
            return None
        return mono_loss([maps], [depth], [target], self.config.loss.smooth_weight)

    def evaluate(self, frame: int, stage: str, depth: DepthField, uncertainty: np.ndarray, gt: DepthField):
        ev = self.config.evaluation
        metrics = depth_metrics(depth, gt, ev.cap, ev.median_scaling)
        try:
            curves = sparsify_depth(depth, gt, uncertainty, ev.sparsification_metric, ev.sparsification_step, ev.cap)
        except EmptyInputError:
            logger.warning("frame %d: too few %s pixels for sparsification", frame, stage)
            return StageEvaluation(metrics=metrics)
        write_curves(self.output.curves(frame, stage), curves)
        return StageEvaluation(metrics=metrics, ause=curves.ause, aurg=curves.aurg)

    def write(self, frame: int, result: FusionResult) -> None:
        write_depth(self.output.depth(frame), result.depth)
        write_pfm(self.output.uncertainty(frame), result.uncertainty)
        if self.config.save_state:
            save_state(self.output.state(frame), result.state)

    def __call__(self, frame: int) -> FrameReport:
        logger.info("frame %d: start", frame)
        prior = self.load_prior(frame)
        observations, view_reports, skipped = [], [], []
        for index, offsets in enumerate(self.config.view_sets):
            outcome = self.observe(frame, index, offsets)
            if outcome is None:
                skipped.append(index)
                continue
            observations.append(outcome[0])
            view_reports.append(outcome[1])

        result = run_fusion(prior, observations, self.filter_config, workers=self.config.pixel_workers)
        self.write(frame, result)

        report = FrameReport(
            frame=frame,
            status=result.status,
            view_sets=view_reports,
            skipped_view_sets=skipped,
            iterations=result.iterations,
            updated_pixels=int(result.state.updated.sum()),
        )
        report.mono_loss_prior = self.photometric_loss(frame, prior.depth)
        report.mono_loss_refined = self.photometric_loss(frame, result.depth)
        if self.layout.gt(frame).is_file():
            gt = read_depth(self.layout.gt(frame))
            report.prior = self.evaluate(frame, "prior", prior.depth, prior.uncertainty, gt)
            report.refined = self.evaluate(frame, "refined", result.depth, result.uncertainty, gt)
        if report.mono_loss_refined is not None:
            report.total_loss = total_loss(result.depth, prior.depth, prior.uncertainty, report.mono_loss_refined)
        logger.info("frame %d: %s, %d pixels updated", frame, result.status.value, report.updated_pixels)
        return report


def _metric_rows(reports: list[FrameReport]) -> list[dict]:
    rows = []
    for report in reports:
        for stage in ("prior", "refined"):
            evaluation = getattr(report, stage)
            if evaluation is None:
                continue
            m = evaluation.metrics
            rows.append(
                {
                    "frame": report.frame,
                    "stage": stage,
                    **m.model_dump(include={"abs_rel", "sq_rel", "rmse", "rmse_log", "d1", "d2", "d3", "count"}),
                    "ause": evaluation.ause,
                    "aurg": evaluation.aurg,
                    "mono_loss": getattr(report, f"mono_loss_{stage}"),
                }
            )
    return rows


def _mean(values) -> float | None:
    values = [v for v in values if v is not None]
    return float(np.mean(values)) if values else None


def run_pipeline(config: PipelineConfig) -> RunReport:
    """Run every target frame and write all artifacts under ``config.output_dir``."""
    layout = ensure_dataset(config)
    k = read_intrinsics(layout.intrinsics)
    poses = read_poses(layout.poses)
    config.check_frames(len(poses))
    frames = config.target_frames(len(poses))
    process = FrameProcessor(config, layout, k, poses)
    logger.info("run_pipeline: %d frames, %d view sets, %d workers", len(frames), len(config.view_sets), config.workers)

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as executor:
            reports = list(executor.map(process, frames))
    else:
        reports = [process(frame) for frame in frames]

    output = OutputLayout(config.output_dir)
    write_csv(output.metrics, _metric_rows(reports), METRIC_COLUMNS)
    summary = RunSummary(
        frames=len(reports),
        mean_abs_rel_prior=_mean(r.prior.metrics.abs_rel for r in reports if r.prior),
        mean_abs_rel_refined=_mean(r.refined.metrics.abs_rel for r in reports if r.refined),
        mean_ause_prior=_mean(r.prior.ause for r in reports if r.prior),
        mean_ause_refined=_mean(r.refined.ause for r in reports if r.refined),
    )
    run_report = RunReport(
        output_dir=str(output.root),
        config=dump_config(config),
        summary=summary,
        frames=reports,
    )
    with output.report.open("w", encoding="utf-8", newline="\n") as f:
        yaml.safe_dump(run_report.model_dump(mode="json"), f, sort_keys=False)
    logger.info("run_pipeline: wrote %s", output.report)
    return run_report
