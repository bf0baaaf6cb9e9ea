"""
Run and per-frame reports of the fusion pipeline.
"""
from typing import Optional

from pydantic import BaseModel, Field

from src.bayesfilter.models import FusionStatus, IterationStats
from src.photometrics.models import DepthMetrics


class ViewSetReport(BaseModel):
    """Outcome of the consistency check for one view set of one target frame."""

    view_set: int = Field(..., ge=0)
    sources: list[int]
    covered: list[int] = Field(..., description="Covered pixels per source")
    consistent: list[int] = Field(..., description="Consistent pixels per source")
    observed: int = Field(..., ge=0, description="Pixels passing every source")
    baseline: float = Field(..., description="Smallest source baseline (meters)")


class StageEvaluation(BaseModel):
    metrics: DepthMetrics
    ause: Optional[float] = None
    aurg: Optional[float] = None


class FrameReport(BaseModel):
    frame: int
    status: FusionStatus
    view_sets: list[ViewSetReport] = []
    skipped_view_sets: list[int] = []
    iterations: list[IterationStats] = []
    updated_pixels: int = 0
    mono_loss_prior: Optional[float] = None
    mono_loss_refined: Optional[float] = None
    total_loss: Optional[float] = None
    prior: Optional[StageEvaluation] = None
    refined: Optional[StageEvaluation] = None


class RunSummary(BaseModel):
    frames: int
    mean_abs_rel_prior: Optional[float] = None
    mean_abs_rel_refined: Optional[float] = None
    mean_ause_prior: Optional[float] = None
    mean_ause_refined: Optional[float] = None


class RunReport(BaseModel):
    output_dir: str
    config: dict
    summary: RunSummary
    frames: list[FrameReport]
