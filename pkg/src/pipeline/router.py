from typing import Any, Optional

from fastapi import APIRouter, HTTPException
from pydantic import BaseModel, Field

from src.errors import ConfigValidationError, DepthFusionError, MissingInputError
from src.fileio.pfm import read_depth, read_pfm
from src.photometrics.metrics import depth_metrics
from src.photometrics.models import DepthMetrics, SparsificationMetric
from src.photometrics.sparsification import sparsify_depth
from src.pipeline.config import load_config
from src.pipeline.models import RunReport
from src.pipeline.service import run_pipeline


router = APIRouter(tags=["Depth Fusion"])


class PipelineRequest(BaseModel):
    config_path: Optional[str] = Field(None, description="YAML config on the server; defaults apply when omitted")
    overrides: dict[str, Any] = Field(default_factory=dict, description="Dotted keys, e.g. {'filter.a0': 5}")


class EvalRequest(BaseModel):
    pred: str = Field(..., description="Predicted depth PFM")
    gt: str = Field(..., description="Ground-truth depth PFM")
    cap: float = Field(80.0, gt=0)
    median_scaling: bool = False


class SparsifyRequest(BaseModel):
    pred: str
    gt: str
    uncertainty: str
    metric: SparsificationMetric = SparsificationMetric.ABS_REL
    step: float = Field(0.02, gt=0, lt=1)
    cap: float = Field(80.0, gt=0)


class SparsifyResponse(BaseModel):
    metric: SparsificationMetric
    ause: float
    aurg: float
    curves: list[dict[str, float]]


def _raise_http(e: Exception):
    if isinstance(e, MissingInputError):
        raise HTTPException(status_code=404, detail=str(e))
    if isinstance(e, ConfigValidationError):
        raise HTTPException(status_code=400, detail=e.problems)
    if isinstance(e, (DepthFusionError, ValueError)):
        raise HTTPException(status_code=400, detail=str(e))
    raise HTTPException(status_code=500, detail=f"Internal error: {str(e)}")


@router.post("/pipeline/run", response_model=RunReport)
def run(request: PipelineRequest) -> RunReport:
    """
    Run the full fusion pipeline and return its report.
    Artifacts are written to the configured output directory on the server.
    """
    try:
        return run_pipeline(load_config(request.config_path, request.overrides))
    except Exception as e:
        _raise_http(e)


@router.post("/eval", response_model=DepthMetrics)
def evaluate(request: EvalRequest) -> DepthMetrics:
    """Depth error and accuracy metrics between two PFM depth maps."""
    try:
        return depth_metrics(read_depth(request.pred), read_depth(request.gt), request.cap, request.median_scaling)
    except Exception as e:
        _raise_http(e)


@router.post("/sparsify", response_model=SparsifyResponse)
def sparsify(request: SparsifyRequest) -> SparsifyResponse:
    """Sparsification, oracle and random curves with AUSE and AURG."""
    try:
        result = sparsify_depth(
            read_depth(request.pred),
            read_depth(request.gt),
            read_pfm(request.uncertainty).astype(float),
            request.metric,
            request.step,
            request.cap,
        )
        return SparsifyResponse(metric=result.metric, ause=result.ause, aurg=result.aurg, curves=result.rows())
    except Exception as e:
        _raise_http(e)
