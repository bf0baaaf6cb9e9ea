"""
Numerical posterior of one filter update, used as an independent check on
the moment-matched closed form.

The joint posterior over (z, ρ) is proportional to
Beta(ρ; a, b)·N(z; μ, σ²)·[ρ·N(z_obs; z, τ²) + (1 − ρ)·U(z_obs)], where the
uniform density does not depend on z. The tensor-product Simpson rule over
(z, ρ) therefore factorises into 1-D integrals, which keeps a fine grid cheap.
"""
import numpy as np
from scipy.integrate import simpson
from scipy.stats import beta, norm

from src.bayesfilter.models import PixelState
from src.errors import InvalidDepthError, QuadratureError
from src.synth.config import synth_config as cfg
from src.synth.models import QuadratureResult


def quadrature_posterior(
    prior: PixelState,
    z_obs: float,
    tau2: float,
    include_outlier: bool = True,
    z_intervals: int | None = None,
    rho_intervals: int | None = None,
) -> QuadratureResult:
    """
    Posterior mean and variance of z and posterior mean of ρ by quadrature.
    ``include_outlier=False`` drops the uniform branch (pure Gaussian update).
    """
    z_intervals = z_intervals or cfg.quadrature_z_intervals
    rho_intervals = rho_intervals or cfg.quadrature_rho_intervals
    if not tau2 > 0:
        raise InvalidDepthError(f"observation variance must be > 0, got {tau2}")

    mu, sigma2, a, b, z_min, z_max = prior
    sigma = np.sqrt(sigma2)
    s2 = 1.0 / (1.0 / sigma2 + 1.0 / tau2)
    m = s2 * (mu / sigma2 + z_obs / tau2)
    s = np.sqrt(s2)
    span = cfg.quadrature_span
    lo = min(mu - span * sigma, m - span * s)
    hi = max(mu + span * sigma, m + span * s)

    z = np.linspace(lo, hi, z_intervals + 1)
    rho = np.linspace(0.0, 1.0, rho_intervals + 1)
    prior_z = norm.pdf(z, loc=mu, scale=sigma)
    likelihood_z = norm.pdf(z_obs, loc=z, scale=np.sqrt(tau2))
    prior_rho = beta.pdf(rho, a, b)
    uniform = 1.0 / (z_max - z_min) if include_outlier and z_min <= z_obs <= z_max else 0.0

    def z_moments(weight):
        # central about μ so the variance does not cancel
        return [simpson(weight * (z - mu) ** p, x=z) for p in range(3)]

    def rho_moments(weight):
        return [simpson(weight * rho**p, x=rho) for p in range(2)]

    inlier_z = z_moments(prior_z * likelihood_z)
    outlier_z = z_moments(prior_z)
    inlier_rho = rho_moments(prior_rho * rho)
    outlier_rho = rho_moments(prior_rho * (1.0 - rho))

    # ∫∫ (z − μ)^p ρ^q · posterior = inlier_z[p]·inlier_rho[q] + U·outlier_z[p]·outlier_rho[q]
    def joint(p, q):
        return inlier_z[p] * inlier_rho[q] + uniform * outlier_z[p] * outlier_rho[q]

    mass = joint(0, 0)
    if not mass > 0:
        raise QuadratureError("posterior has zero total mass on the integration grid")
    shift = joint(1, 0) / mass
    mean = mu + shift
    variance = joint(2, 0) / mass - shift**2
    return QuadratureResult(
        mean=float(mean),
        variance=float(variance),
        rho_mean=float(joint(0, 1) / mass),
        mass=float(mass),
    )
