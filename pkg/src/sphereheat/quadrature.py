"""Quadrature rules: symmetric Gauss-Jacobi and composite Gauss-Legendre panels."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi

from .errors import DomainError, IntegrityError


@dataclass(frozen=True)
class QuadRule:
    """Rule for the weight (1 - v^2)^alpha on (-1, 1)."""

    alpha: float
    nodes: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return self.nodes.size

    def integrate(self, values):
        return np.dot(self.weights, values)


def jacobi_mass(alpha):
    """int_{-1}^{1} (1 - v^2)^alpha dv = sqrt(pi) Gamma(alpha+1) / Gamma(alpha+3/2)."""
    return math.exp(log_jacobi_mass(alpha))


def log_jacobi_mass(alpha):
    return 0.5 * math.log(math.pi) + math.lgamma(alpha + 1) - math.lgamma(alpha + 1.5)


@lru_cache(maxsize=64)
def gauss_jacobi(n, alpha):
    """n-point Gauss rule for (1 - v^2)^alpha, exact through degree 2n - 1.

    Nodes come back strictly increasing and symmetrized about 0.
    """
    if n < 1:
        raise DomainError(f"node count must be >= 1, got {n}")
    if not alpha > -1:
        raise DomainError(f"Jacobi exponent must exceed -1, got {alpha}")
    x, w = roots_jacobi(int(n), float(alpha), float(alpha))
    order = np.argsort(x)
    x, w = x[order], w[order]
    # enforce exact symmetry (the rule is symmetric in exact arithmetic)
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    mass = jacobi_mass(alpha)
    if not abs(w.sum() - mass) <= 1e-12 * mass * max(1.0, math.log(n)):
        raise IntegrityError(f"Gauss-Jacobi weights sum to {w.sum()!r}, expected {mass!r}")
    x.flags.writeable = False
    w.flags.writeable = False
    return QuadRule(float(alpha), x, w)


@lru_cache(maxsize=16)
def legendre_rule(n):
    x, w = leggauss(n)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def panel_nodes(edges, n=16):
    """Nodes and weights of composite n-point Gauss-Legendre on consecutive ``edges``."""
    edges = np.asarray(edges, dtype=float)
    x, w = legendre_rule(n)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    nodes = (a + b) * 0.5 + half * x[None, :]
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()
