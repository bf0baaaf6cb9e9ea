"""
Pipeline configuration: a strict YAML schema with every default in one place.
"""
import logging
import os
from pathlib import Path
from typing import Any, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from src.bayesfilter.config import FilterConfig
from src.bayesfilter.models import UncertaintyEncoding
from src.consistency.models import ConsistencyThresholds, DiffMode
from src.errors import ConfigValidationError, MissingInputError
from src.geometry.models import Intrinsics
from src.photometrics.models import SparsificationMetric
from src.synth.models import PriorModel, SceneLayout, SceneSpec

logger = logging.getLogger(__name__)

CONFIG_ENV = "DEPTHFUSION_CONFIG"
DEFAULT_VIEW_SETS = [[-1, 1], [-2, 1], [-1, 2], [-2, 2]]


class Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ConsistencySection(Section):
    e1: float = Field(1.0, gt=0, description="Reprojection distance threshold (pixels)")
    e2: float = Field(0.001, gt=0, description="Depth difference threshold")
    diff_mode: DiffMode = DiffMode.RELATIVE
    occlusion_margin: float = Field(0.05, gt=0, description="Relative depth gap treated as occlusion")

    def thresholds(self) -> ConsistencyThresholds:
        return ConsistencyThresholds(
            e1=self.e1, e2=self.e2, diff_mode=self.diff_mode, occlusion_margin=self.occlusion_margin
        )


class FilterSection(Section):
    a0: float = Field(10.0, gt=0)
    b0: float = Field(10.0, gt=0)
    convergence_rel: float = Field(0.02, gt=0, description="σ_conv as a fraction of μ⁰")
    depth_cap: float = Field(80.0, gt=0, description="Meters")
    inlier_threshold: Optional[float] = Field(None, ge=0, le=1)
    block_size: int = Field(4096, gt=0)

    def filter_config(self) -> FilterConfig:
        return FilterConfig(
            a0=self.a0,
            b0=self.b0,
            convergence_rel=self.convergence_rel,
            depth_cap=self.depth_cap,
            inlier_threshold=self.inlier_threshold,
            block_size=self.block_size,
        )


class LossSection(Section):
    alpha: float = Field(0.85, ge=0, le=1, description="SSIM weight")
    smooth_weight: float = Field(1e-3, ge=0, description="Smoothness weight λ")


class EvaluationSection(Section):
    cap: float = Field(80.0, gt=0, description="Ground truth beyond this depth is ignored (meters)")
    median_scaling: bool = False
    sparsification_step: float = Field(0.02, gt=0, lt=1)
    sparsification_metric: SparsificationMetric = SparsificationMetric.ABS_REL


class CameraSection(Section):
    width: int = Field(384, gt=0)
    height: int = Field(128, gt=0)
    fx: float = Field(223.0, gt=0)
    fy: float = Field(223.0, gt=0)
    cx: Optional[float] = None
    cy: Optional[float] = None

    def intrinsics(self) -> Intrinsics:
        return Intrinsics(
            fx=self.fx,
            fy=self.fy,
            cx=(self.width - 1) / 2 if self.cx is None else self.cx,
            cy=(self.height - 1) / 2 if self.cy is None else self.cy,
            width=self.width,
            height=self.height,
        )


class SynthSection(Section):
    enabled: bool = True
    frames: int = Field(8, ge=1)
    step: float = Field(0.5, gt=0, description="Forward motion per frame (meters)")
    layout: SceneLayout = SceneLayout.FRONTO_PARALLEL
    depth_range: tuple[float, float] = (4.0, 30.0)
    seed: int = 0
    camera: CameraSection = CameraSection()
    prior: PriorModel = PriorModel()
    mvs_inlier_prob: float = Field(0.95, ge=0, le=1)
    mvs_noise_rel: float = Field(2e-4, ge=0)

    def scene_spec(self) -> SceneSpec:
        return SceneSpec(layout=self.layout, depth_range=self.depth_range, seed=self.seed)


class PipelineConfig(Section):
    """Full run configuration; unknown keys anywhere are errors."""

    data_dir: Path = Path("data/synthetic")
    output_dir: Path = Path("outputs")
    frames: Optional[list[int]] = Field(None, description="Target frames; all frames when omitted")
    view_sets: list[list[int]] = Field(default_factory=lambda: [list(v) for v in DEFAULT_VIEW_SETS])
    prior_encoding: UncertaintyEncoding = UncertaintyEncoding.STD
    workers: int = Field(1, ge=1, description="Frames processed in parallel")
    pixel_workers: int = Field(1, ge=1, description="Threads per filter update")
    save_state: bool = False
    consistency: ConsistencySection = ConsistencySection()
    filter: FilterSection = FilterSection()
    loss: LossSection = LossSection()
    evaluation: EvaluationSection = EvaluationSection()
    synth: SynthSection = SynthSection()

    @field_validator("view_sets")
    @classmethod
    def _offsets(cls, v):
        for view_set in v:
            if not view_set:
                raise ValueError("a view set needs at least one source offset")
            if 0 in view_set:
                raise ValueError(f"view set {view_set} references the target itself")
            if len(set(view_set)) != len(view_set):
                raise ValueError(f"view set {view_set} repeats a source")
        return v

    def check_frames(self, frame_count: int) -> None:
        """Cross-check explicit target frames against the dataset size."""
        problems = [
            f"frames: frame {f} does not exist (dataset has {frame_count} frames)"
            for f in self.frames or []
            if not 0 <= f < frame_count
        ]
        if problems:
            raise ConfigValidationError(problems)

    def target_frames(self, frame_count: int) -> list[int]:
        return list(self.frames) if self.frames is not None else list(range(frame_count))


def _problems(error: ValidationError) -> list[str]:
    return [f"{'.'.join(str(p) for p in e['loc']) or '<root>'}: {e['msg']}" for e in error.errors()]


def apply_overrides(data: dict, overrides: dict[str, Any]) -> dict:
    """Set dotted keys (``filter.a0``) on a nested mapping."""
    for dotted, value in overrides.items():
        node = data
        *parents, leaf = dotted.split(".")
        for key in parents:
            node = node.setdefault(key, {})
            if not isinstance(node, dict):
                raise ConfigValidationError([f"{dotted}: {key} is not a section"])
        node[leaf] = value
    return data


def build_config(data: dict | None = None, overrides: dict[str, Any] | None = None) -> PipelineConfig:
    data = apply_overrides(dict(data or {}), overrides or {})
    try:
        return PipelineConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigValidationError(_problems(e)) from e


def load_config(path=None, overrides: dict[str, Any] | None = None) -> PipelineConfig:
    """
    Load a YAML config. Without ``path`` the ``DEPTHFUSION_CONFIG``
    environment variable is used; without either, built-in defaults.
    """
    path = path or os.getenv(CONFIG_ENV)
    data: dict = {}
    if path:
        path = Path(path)
        if not path.is_file():
            raise MissingInputError(path, "config file")
        try:
            data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        except yaml.YAMLError as e:
            raise ConfigValidationError([f"{path}: {e}"]) from e
        if not isinstance(data, dict):
            raise ConfigValidationError([f"{path}: top level must be a mapping"])
        logger.info("loaded config from %s", path)
    return build_config(data, overrides)


def dump_config(config: PipelineConfig) -> dict:
    return config.model_dump(mode="json")
