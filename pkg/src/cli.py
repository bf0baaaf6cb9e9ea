"""
Command-line entry point: ``python -m src <command>``.

Exit codes: 0 success, 2 invalid configuration or arguments, 3 missing
input file, 1 any other failure.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import yaml
from pydantic import ValidationError

from src.bayesfilter.models import MonocularPrior, UncertaintyEncoding
from src.bayesfilter.service import run_fusion
from src.consistency.service import check_pair, fuse_checks
from src.errors import ConfigValidationError, DepthFusionError, MissingInputError
from src.fileio.checkpoint import save_state
from src.fileio.dataset import read_observations, write_observation
from src.fileio.intrinsics import read_intrinsics
from src.fileio.pfm import read_depth, read_pfm, write_depth, write_pfm
from src.fileio.poses import read_poses
from src.fileio.tables import write_csv, write_curves
from src.fileio.volume import read_volume
from src.geometry.service import relative_pose
from src.logs import setup_logging
from src.photometrics.metrics import depth_metrics
from src.photometrics.models import SparsificationMetric
from src.photometrics.sparsification import sparsification, sparsify_depth
from src.pipeline.config import PipelineConfig, load_config
from src.pipeline.service import run_pipeline
from src.probvolume.service import regress
from src.synth.dataset import write_dataset
from src.synth.service import forward_trajectory

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_MISSING = 3

# Flag destination -> dotted config key
OVERRIDES = {
    "data_dir": "data_dir",
    "output_dir": "output_dir",
    "frames": "frames",
    "workers": "workers",
    "pixel_workers": "pixel_workers",
    "e1": "consistency.e1",
    "e2": "consistency.e2",
    "diff_mode": "consistency.diff_mode",
    "a0": "filter.a0",
    "b0": "filter.b0",
    "convergence_rel": "filter.convergence_rel",
    "depth_cap": "filter.depth_cap",
    "inlier_threshold": "filter.inlier_threshold",
    "alpha": "loss.alpha",
    "smooth_weight": "loss.smooth_weight",
    "sparsification_step": "evaluation.sparsification_step",
    "median_scaling": "evaluation.median_scaling",
    "seed": "synth.seed",
    "synth_frames": "synth.frames",
    "layout": "synth.layout",
}


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("configuration overrides")
    # suppressed default: a -c before the subcommand stays in effect
    group.add_argument("-c", "--config", type=Path, default=argparse.SUPPRESS, help="YAML config")
    group.add_argument("--data-dir", type=Path)
    group.add_argument("--output-dir", type=Path)
    group.add_argument("--frames", type=int, nargs="+", help="Target frame indices")
    group.add_argument("--workers", type=int, help="Frames processed in parallel")
    group.add_argument("--pixel-workers", type=int, help="Threads per filter update")
    group.add_argument("--e1", type=float, help="Reprojection distance threshold (pixels)")
    group.add_argument("--e2", type=float, help="Depth difference threshold")
    group.add_argument("--diff-mode", choices=["relative", "absolute", "inverse"])
    group.add_argument("--a0", type=float)
    group.add_argument("--b0", type=float)
    group.add_argument("--convergence-rel", type=float)
    group.add_argument("--depth-cap", type=float)
    group.add_argument("--inlier-threshold", type=float)
    group.add_argument("--alpha", type=float, help="SSIM weight")
    group.add_argument("--smooth-weight", type=float, help="Smoothness weight")
    group.add_argument("--sparsification-step", type=float)
    group.add_argument("--median-scaling", action="store_true", default=None)
    group.add_argument("--seed", type=int)
    group.add_argument("--synth-frames", type=int, help="Frames in the synthetic sequence")
    group.add_argument("--layout", choices=["fronto_parallel", "slanted", "staircase", "mixed"])
    group.add_argument(
        "--set",
        dest="assignments",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Any dotted config key, value parsed as YAML (repeatable)",
    )


def overrides_from_args(args: argparse.Namespace) -> dict[str, Any]:
    overrides: dict[str, Any] = {}
    for dest, key in OVERRIDES.items():
        value = getattr(args, dest, None)
        if value is not None:
            overrides[key] = str(value) if isinstance(value, Path) else value
    for assignment in getattr(args, "assignments", []):
        key, sep, raw = assignment.partition("=")
        if not sep or not key:
            raise ConfigValidationError([f"--set expects KEY=VALUE, got {assignment!r}"])
        overrides[key.strip()] = yaml.safe_load(raw)
    return overrides


def _config(args: argparse.Namespace) -> PipelineConfig:
    return load_config(args.config, overrides_from_args(args))


def cmd_synth(args: argparse.Namespace) -> int:
    config = _config(args)
    synth = config.synth
    manifest = write_dataset(
        config.data_dir,
        synth.scene_spec(),
        synth.camera.intrinsics(),
        forward_trajectory(synth.frames, synth.step),
        view_sets=len(config.view_sets),
        prior_model=synth.prior,
        mvs_inlier_prob=synth.mvs_inlier_prob,
        mvs_noise_rel=synth.mvs_noise_rel,
    )
    print(f"wrote {len(manifest.entries)} files to {config.data_dir}")
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    config = _config(args)
    if len(args.sources) != len(args.source_indices):
        raise ConfigValidationError(["--sources and --source-indices must have the same length"])
    k = read_intrinsics(args.intrinsics)
    poses = read_poses(args.poses)
    target = read_depth(args.target)
    reports = []
    for path, j in zip(args.sources, args.source_indices):
        report = check_pair(
            target,
            read_depth(path),
            relative_pose(poses[args.target_index], poses[j]),
            k,
            config.consistency.thresholds(),
        )
        reports.append(report)
        print(
            f"source {j}: {int(report.coverage.sum())} covered, {report.inlier_count} consistent "
            f"({report.pass_fraction:.2%}), baseline {report.baseline:.3f} m"
        )
        if args.out:
            write_pfm(args.out / f"e_dist_{j}.pfm", report.e_dist)
            write_pfm(args.out / f"e_diff_{j}.pfm", report.e_diff)
    obs = fuse_checks(reports, target)
    print(f"observation: {obs.count} pixels consistent with every source")
    if args.out:
        write_observation(args.out / "observations", args.observation_index, obs)
    return EXIT_OK


def cmd_fuse(args: argparse.Namespace) -> int:
    config = _config(args)
    prior = MonocularPrior.from_encoded(read_depth(args.prior), read_pfm(args.prior_uncertainty), args.encoding)
    observations = read_observations(args.observations)
    result = run_fusion(prior, observations, config.filter.filter_config(), workers=config.pixel_workers)
    write_depth(args.out / "depth.pfm", result.depth)
    write_pfm(args.out / "uncertainty.pfm", result.uncertainty)
    if args.state:
        save_state(args.state, result.state)
    print(f"{result.status.value}: {int(result.state.updated.sum())} pixels updated by {len(observations)} observations")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    config = _config(args)
    ev = config.evaluation
    metrics = depth_metrics(read_depth(args.pred), read_depth(args.gt), ev.cap, ev.median_scaling)
    print(yaml.safe_dump(metrics.model_dump(), sort_keys=False), end="")
    if args.csv:
        write_csv(args.csv, [metrics.model_dump()])
    return EXIT_OK


def cmd_sparsify(args: argparse.Namespace) -> int:
    config = _config(args)
    ev = config.evaluation
    metric = args.metric or ev.sparsification_metric
    uncertainty = read_pfm(args.uncertainty).astype(np.float64)
    if args.errors:
        errors = read_pfm(args.errors).astype(np.float64)
        keep = np.isfinite(errors) & np.isfinite(uncertainty)
        result = sparsification(errors[keep], uncertainty[keep], metric, ev.sparsification_step)
    elif args.pred and args.gt:
        result = sparsify_depth(
            read_depth(args.pred), read_depth(args.gt), uncertainty, metric, ev.sparsification_step, ev.cap
        )
    else:
        raise ConfigValidationError(["sparsify needs --errors, or both --pred and --gt"])
    write_curves(args.out, result)
    print(f"{result.metric.value}: ause {result.ause:.6f}, aurg {result.aurg:.6f}, curves in {args.out}")
    return EXIT_OK


def cmd_regress(args: argparse.Namespace) -> int:
    depth, entropy = regress(read_volume(args.volume))
    write_depth(args.out / "depth.pfm", depth)
    write_pfm(args.out / "entropy.pfm", entropy)
    print(f"regressed {depth.shape[1]}x{depth.shape[0]} depth and entropy into {args.out}")
    return EXIT_OK


def cmd_pipeline(args: argparse.Namespace) -> int:
    report = run_pipeline(_config(args))
    summary = report.summary
    print(yaml.safe_dump(summary.model_dump(), sort_keys=False), end="")
    print(f"report: {Path(report.output_dir) / 'run_report.yaml'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="depthfusion", description="Bayesian multi-view depth fusion")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    parser.add_argument("-c", "--config", type=Path, help="YAML config (default: $DEPTHFUSION_CONFIG)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="Generate a synthetic dataset")
    _add_config_flags(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("check", help="Consistency check of a target depth against source views")
    p.add_argument("--target", type=Path, required=True)
    p.add_argument("--sources", type=Path, nargs="+", required=True)
    p.add_argument("--intrinsics", type=Path, required=True)
    p.add_argument("--poses", type=Path, required=True)
    p.add_argument("--target-index", type=int, required=True)
    p.add_argument("--source-indices", type=int, nargs="+", required=True)
    p.add_argument("--observation-index", type=int, default=0)
    p.add_argument("--out", type=Path, help="Write error maps and the fused observation here")
    _add_config_flags(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("fuse", help="Run the filter on saved observations")
    p.add_argument("--prior", type=Path, required=True)
    p.add_argument("--prior-uncertainty", type=Path, required=True)
    p.add_argument("--encoding", choices=[e.value for e in UncertaintyEncoding], default="std")
    p.add_argument("--observations", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--state", type=Path, help="Also save the final filter state")
    _add_config_flags(p)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("eval", help="Depth metrics between two PFMs")
    p.add_argument("--pred", type=Path, required=True)
    p.add_argument("--gt", type=Path, required=True)
    p.add_argument("--csv", type=Path)
    _add_config_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sparsify", help="Sparsification curves and AUSE")
    p.add_argument("--uncertainty", type=Path, required=True)
    p.add_argument("--errors", type=Path, help="Per-pixel error PFM (NaN = ignored)")
    p.add_argument("--pred", type=Path)
    p.add_argument("--gt", type=Path)
    p.add_argument("--metric", choices=[m.value for m in SparsificationMetric])
    p.add_argument("--out", type=Path, required=True, help="Curves CSV")
    _add_config_flags(p)
    p.set_defaults(func=cmd_sparsify)

    p = sub.add_parser("regress", help="Depth and entropy from a probability volume directory")
    p.add_argument("--volume", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_regress)

    p = sub.add_parser("pipeline", help="Full fusion run")
    _add_config_flags(p)
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)
    try:
        return args.func(args)
    except ConfigValidationError as e:
        print(str(e), file=sys.stderr)
        return EXIT_CONFIG
    except ValidationError as e:
        print(f"invalid input:\n{e}", file=sys.stderr)
        return EXIT_CONFIG
    except MissingInputError as e:
        print(f"missing input: {e.path}", file=sys.stderr)
        return EXIT_MISSING
    except (DepthFusionError, ValueError, OSError) as e:
        logger.error("%s failed: %s", args.command, e)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
