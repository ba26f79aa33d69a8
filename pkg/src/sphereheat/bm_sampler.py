"""Spherical Brownian motion with K_t^d as the exact transition density.

The angle phi = dist(x, y) has density f(phi) = K_t^d(phi) |S^{d-1}| sin^{d-1}(phi);
it is tabulated once per (d, t) and sampled by inverse transform. The
direction is uniform on the unit tangent sphere at x.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import betainc
from scipy.stats import ks_1samp, ks_2samp

from .errors import ConvergenceWarning, DomainError, IntegrityError
from .quadrature import legendre_rule
from .series_oracle import log_sphere_area
from .sphere_kernel import kernel_log

# Kolmogorov distribution quantile at alpha = 0.01
KS_CRIT_001 = 1.628
DEFAULT_GRID = 2048
_CELL_NODES = 6


def make_rng(seed=None):
    """Counter-based generator (Philox)."""
    return np.random.Generator(np.random.Philox(seed))


def spawn_rngs(seed, count):
    """``count`` independent Philox streams derived from one seed."""
    return [np.random.Generator(np.random.Philox(s)) for s in np.random.SeedSequence(seed).spawn(count)]


@dataclass(frozen=True)
class SpherePoint:
    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        if c.ndim != 1 or c.size < 2:
            raise DomainError("a sphere point needs a 1-D coordinate vector of length >= 2")
        if abs(np.linalg.norm(c) - 1.0) > 1e-12:
            raise DomainError(f"coordinates are not unit norm (|x| = {np.linalg.norm(c)!r})")
        object.__setattr__(self, "coords", c)

    @property
    def dim(self):
        return self.coords.size - 1

    @classmethod
    def north(cls, d):
        c = np.zeros(d + 1)
        c[0] = 1.0
        return cls(c)


def _angle_grid(d, t, n):
    scale = math.sqrt(2 * t) * (math.sqrt(d) + 10.0)
    if scale >= math.pi:
        return np.linspace(0.0, math.pi, n)
    inner = np.linspace(0.0, scale, (3 * n) // 4)
    outer = np.linspace(scale, math.pi, n - inner.size + 1)[1:]
    return np.concatenate([inner, outer])


@dataclass(frozen=True)
class AngleCDF:
    """Tabulated distribution function of the step angle for time t on S^d."""

    d: int
    t: float
    grid: np.ndarray
    cdf: np.ndarray
    mass: float

    def __post_init__(self):
        object.__setattr__(self, "_forward", PchipInterpolator(self.grid, self.cdf))
        keep = np.concatenate([[True], np.diff(self.cdf) > 0])
        object.__setattr__(self, "_inverse", PchipInterpolator(self.cdf[keep], self.grid[keep]))

    def __call__(self, phi):
        phi = np.clip(np.asarray(phi, dtype=float), 0.0, math.pi)
        return np.clip(self._forward(phi), 0.0, 1.0)

    def quantile(self, u):
        return np.clip(self._inverse(np.asarray(u, dtype=float)), 0.0, math.pi)


def angle_cdf(d, t, n_grid=DEFAULT_GRID, cfg=None):
    """Build the AngleCDF by Gauss-Legendre integration on every grid cell."""
    if n_grid < 256:
        raise DomainError("angle_cdf needs at least 256 grid points")
    if not t > 0:
        raise DomainError("time must be positive")
    grid = _angle_grid(d, t, n_grid)
    x, w = legendre_rule(_CELL_NODES)
    a, b = grid[:-1, None], grid[1:, None]
    pts = 0.5 * (a + b) + 0.5 * (b - a) * x[None, :]
    lk = kernel_log(d, t, pts.ravel(), cfg).log_abs.reshape(pts.shape)
    with np.errstate(divide="ignore", under="ignore"):
        dens = np.exp(lk + log_sphere_area(d - 1) + (d - 1) * np.log(np.sin(pts)))
    cells = (0.5 * (b - a)[:, 0]) * (dens @ w)
    cum = np.concatenate([[0.0], np.cumsum(cells)])
    mass = float(cum[-1])
    if abs(mass - 1.0) > 1e-6:
        raise IntegrityError(f"angular density integrates to {mass!r}, not 1")
    if abs(mass - 1.0) > 1e-8:
        warnings.warn(f"angular mass deviates from 1 by {abs(mass - 1):.2e}", ConvergenceWarning, stacklevel=2)
    cdf = cum / mass
    cdf[-1] = 1.0
    return AngleCDF(d, float(t), grid, cdf, mass)


def equilibrium_cdf(d, phi):
    """Distribution function of the angle under the uniform law on S^d."""
    return betainc(0.5 * d, 0.5 * d, 0.5 * (1.0 - np.cos(phi)))


def _tangent_directions(x, rng):
    """Uniform unit vectors orthogonal to each row of x (Gaussian projection)."""
    u = rng.standard_normal(x.shape)
    u -= np.sum(u * x, axis=1, keepdims=True) * x
    norm = np.linalg.norm(u, axis=1)
    bad = norm < 1e-12
    while np.any(bad):
        g = rng.standard_normal((int(bad.sum()), x.shape[1]))
        g -= np.sum(g * x[bad], axis=1, keepdims=True) * x[bad]
        u[bad] = g
        norm[bad] = np.linalg.norm(g, axis=1)
        bad = norm < 1e-12
    return u / norm[:, None]


def step_many(x, cdf, rng, angle_scale=1.0):
    """Advance every row of x (n, d+1) by one step; returns (y, phi).

    ``angle_scale`` distorts the drawn angles; it is only a hook for
    negative-control tests.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    phi = cdf.quantile(rng.random(x.shape[0]))
    if angle_scale != 1.0:
        phi = np.clip(phi * angle_scale, 0.0, math.pi)
    u = _tangent_directions(x, rng)
    y = np.cos(phi)[:, None] * x + np.sin(phi)[:, None] * u
    y /= np.linalg.norm(y, axis=1, keepdims=True)
    return y, phi


def sample_step(x, t, rng, cdf=None):
    """One Brownian step of duration t from the SpherePoint x."""
    if not isinstance(x, SpherePoint):
        x = SpherePoint(x)
    cdf = angle_cdf(x.dim, t) if cdf is None else cdf
    y, _ = step_many(x.coords[None, :], cdf, rng)
    return SpherePoint(y[0])


def sample_path(d, t, n_steps, rng, start=None, cdf=None):
    """Array (n_steps + 1, d + 1) of positions, beginning at ``start`` (default: north pole)."""
    cdf = angle_cdf(d, t) if cdf is None else cdf
    x = SpherePoint.north(d).coords if start is None else SpherePoint(start).coords
    out = np.empty((n_steps + 1, d + 1))
    out[0] = x
    for k in range(n_steps):
        out[k + 1] = step_many(out[k][None, :], cdf, rng)[0][0]
    return out


def _angles_from(x0, y):
    c = np.clip(y @ x0, -1.0, 1.0)
    return np.arccos(c)


@dataclass
class KSReport:
    name: str
    n: int
    statistic: float
    threshold: float
    pvalue: float

    @property
    def passed(self):
        return self.statistic < self.threshold

    def as_dict(self):
        return {"name": self.name, "n": self.n, "statistic": self.statistic, "threshold": self.threshold,
                "pvalue": self.pvalue, "passed": self.passed}


def one_sample_ks(d, t, n, rng, cdf=None, angle_scale=1.0):
    """KS of drawn step angles against the tabulated AngleCDF (alpha = 0.01)."""
    cdf = angle_cdf(d, t) if cdf is None else cdf
    x = np.tile(SpherePoint.north(d).coords, (n, 1))
    y, _ = step_many(x, cdf, rng, angle_scale)
    phi = _angles_from(x[0], y)
    res = ks_1samp(phi, cdf)
    return KSReport("one-sample", n, float(res.statistic), KS_CRIT_001 / math.sqrt(n), float(res.pvalue))


def chapman_kolmogorov_test(d, t, n_samples, rng, angle_scale=1.0):
    """Two-sample KS: one step of time t against two steps of time t/2 (alpha = 0.01)."""
    if n_samples < 10_000:
        raise DomainError("the Chapman-Kolmogorov test needs at least 1e4 samples")
    full = angle_cdf(d, t)
    half = angle_cdf(d, 0.5 * t)
    x0 = SpherePoint.north(d).coords
    x = np.tile(x0, (n_samples, 1))
    y_one, _ = step_many(x, full, rng, angle_scale)
    y_mid, _ = step_many(x, half, rng)
    y_two, _ = step_many(y_mid, half, rng)
    a1 = _angles_from(x0, y_one)
    a2 = _angles_from(x0, y_two)
    res = ks_2samp(a1, a2)
    thr = KS_CRIT_001 * math.sqrt(2.0 / n_samples)
    return KSReport("chapman-kolmogorov", n_samples, float(res.statistic), thr, float(res.pvalue))


def equilibrium_ks(d, t, n, rng):
    """KS of step angles against the uniform-law angle distribution (meaningful for t >= 50)."""
    cdf = angle_cdf(d, t)
    x = np.tile(SpherePoint.north(d).coords, (n, 1))
    y, _ = step_many(x, cdf, rng)
    phi = _angles_from(x[0], y)
    res = ks_1samp(phi, lambda p: equilibrium_cdf(d, p))
    return KSReport("equilibrium", n, float(res.statistic), KS_CRIT_001 / math.sqrt(n), float(res.pvalue))
