"""Tolerances, truncation caps and regime thresholds."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

from .errors import DomainError

DEFAULT_ORDER_CAP = 16


@dataclass(frozen=True)
class ThetaConfig:
    """Controls for the periodized Gaussian and its H^N derivatives.

    ``regime_switch`` is the distance to the antipode below which the paired
    (cosh) representation is used instead of the lattice sum around phi.
    Points whose cancellation estimate exceeds ``hp_cond`` are recomputed in
    arbitrary precision when ``hp_fallback`` is set.
    """

    eps_rel: float = 1e-15
    regime_switch: float = 1.0
    overlap_band: tuple[float, float] = (0.5, 1.5)
    min_lattice_terms: int = 2
    hp_fallback: bool = True
    hp_cond: float = 1e3

    def __post_init__(self):
        if not self.hp_cond >= 1.0:
            raise DomainError(f"hp_cond must be >= 1, got {self.hp_cond}")
        if not 0.0 < self.eps_rel <= 1e-6:
            raise DomainError(f"eps_rel must lie in (0, 1e-6], got {self.eps_rel}")
        if not 0.0 < self.regime_switch < math.pi:
            raise DomainError(f"regime_switch must lie in (0, pi), got {self.regime_switch}")
        lo, hi = self.overlap_band
        if not 0.0 < lo < hi < math.pi:
            raise DomainError(f"bad overlap_band {self.overlap_band}")


@dataclass(frozen=True)
class EvalConfig:
    """Dispatch and quadrature controls for the sphere kernel."""

    eps_rel: float = 1e-12
    t_crossover: float = 1.0
    quad_nodes_init: int = 32
    quad_nodes_max: int = 4096
    smallt_quad_threshold: float = 0.05
    order_cap: int = DEFAULT_ORDER_CAP
    theta: ThetaConfig = field(default_factory=ThetaConfig)

    def __post_init__(self):
        for name in ("eps_rel", "t_crossover", "quad_nodes_init", "quad_nodes_max", "smallt_quad_threshold", "order_cap"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if self.quad_nodes_init > self.quad_nodes_max:
            raise DomainError("quad_nodes_init must not exceed quad_nodes_max")

    def with_(self, **changes):
        return replace(self, **changes)


def config_keys():
    """Flat key names accepted by INI files and ``--set`` style overrides."""
    keys = {f.name for f in fields(EvalConfig) if f.name != "theta"}
    keys |= {"theta_" + f.name for f in fields(ThetaConfig)}
    return keys
