"""Fusion pipeline orchestration, configuration and HTTP surface."""
from src.pipeline.config import PipelineConfig, build_config, load_config
from src.pipeline.models import FrameReport, RunReport
from src.pipeline.service import run_pipeline

__all__ = [
    "FrameReport",
    "PipelineConfig",
    "RunReport",
    "build_config",
    "load_config",
    "run_pipeline",
]
