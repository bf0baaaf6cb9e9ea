from dataclasses import dataclass


@dataclass
class SynthConfig:
    """Defaults for the synthetic scene and measurement generators."""

    # Hypothesis planes for synthetic probability volumes, uniform in inverse depth
    hypothesis_planes: int = 32

    # Procedural texture: value-noise lattice cell and stripe period (meters)
    texture_cell: float = 1.0
    stripe_period: float = 1.5

    # Cameras closer than this to a surface are rejected (meters)
    clearance: float = 0.1

    # Layout shape parameters
    panels: int = 3
    stairs: int = 4
    slant_degrees: float = 25.0

    # Monocular prior: smooth multiplicative error and inverse-depth uncertainty;
    # sigma/mu of 0.1 is about the inverse-depth error a 0.2 log-depth field produces
    prior_error_rel: float = 0.2
    prior_error_cell: int = 16
    prior_uncertainty_rel: float = 0.1

    # MVS depth maps: relative noise on inliers, probability of an inlier
    mvs_noise_rel: float = 2e-4
    mvs_inlier_prob: float = 0.95

    # Quadrature oracle grid (intervals per axis, Simpson rule)
    quadrature_z_intervals: int = 4096
    quadrature_rho_intervals: int = 1024
    quadrature_span: float = 12.0


synth_config = SynthConfig()
