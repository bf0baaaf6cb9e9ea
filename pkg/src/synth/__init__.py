"""Synthetic scenes, priors, observations and the quadrature posterior oracle."""
from src.synth.config import SynthConfig, synth_config
from src.synth.dataset import write_dataset
from src.synth.models import (
    MeasurementModel,
    Plane,
    PriorModel,
    QuadratureResult,
    Scene,
    SceneLayout,
    SceneSpec,
    SceneView,
    TexturePattern,
)
from src.synth.quadrature import quadrature_posterior
from src.synth.rng import PixelRNG
from src.synth.service import (
    forward_trajectory,
    inlier_draws,
    make_mvs_depth,
    make_prior,
    make_probvolume,
    make_scene,
    sample_observation,
)

__all__ = [
    "MeasurementModel",
    "PixelRNG",
    "Plane",
    "PriorModel",
    "QuadratureResult",
    "Scene",
    "SceneLayout",
    "SceneSpec",
    "SceneView",
    "SynthConfig",
    "TexturePattern",
    "forward_trajectory",
    "inlier_draws",
    "make_mvs_depth",
    "make_prior",
    "make_probvolume",
    "make_scene",
    "quadrature_posterior",
    "sample_observation",
    "synth_config",
    "write_dataset",
]
