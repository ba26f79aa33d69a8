"""Heat kernel of the unit sphere S^d, its angular derivative, two-sided envelopes
and an exact-transition Brownian motion sampler."""
from .bm_sampler import AngleCDF, SpherePoint, angle_cdf, make_rng, sample_path, sample_step
from .bounds import Envelope, RatioReport, envelope_log, ratio_scan, sharpness_probe
from .config import EvalConfig, ThetaConfig
from .errors import (
    AccuracyError,
    CapabilityError,
    ConvergenceWarning,
    DomainError,
    IntegrityError,
    PoleError,
    SphereHeatError,
    UnderflowWarning,
)
from .logvalue import LogValue
from .series_oracle import oracle_kernel
from .sphere_kernel import KernelQuery, evaluate, kernel, kernel_derivative_log, kernel_log, mass
from .theta_kernel import hn_theta, theta, theta_dual
from .trig_algebra import TrigExpr, phi_table

__version__ = "0.1.0"

__all__ = [
    "AccuracyError", "AngleCDF", "CapabilityError", "ConvergenceWarning", "DomainError", "Envelope",
    "EvalConfig", "IntegrityError", "KernelQuery", "LogValue", "PoleError", "RatioReport", "SphereHeatError",
    "SpherePoint", "ThetaConfig", "TrigExpr", "UnderflowWarning", "angle_cdf", "envelope_log", "evaluate",
    "hn_theta", "kernel", "kernel_derivative_log", "kernel_log", "make_rng", "mass", "oracle_kernel",
    "phi_table", "ratio_scan", "sample_path", "sample_step", "sharpness_probe", "theta", "theta_dual",
]
