"""Spectral (ultraspherical addition theorem) evaluation of the sphere heat kernel.

    K_t^d(phi) = (1/|S^d|) sum_n exp(-n(n+d-1)t) N(d,n) C_n^lam(cos phi) / C_n^lam(1),
    lam = (d-1)/2,  N(d,n) = (2n+d-1)(n+d-2)! / (n!(d-1)!).

Independent of the theta/reduction machinery; used as the verification oracle
and as the fast path for t >= 1.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import ConvergenceWarning, DomainError
from .logvalue import LogValue

ORACLE_MIN_T = 0.05


def sphere_area(d):
    """Area of the unit sphere S^d in R^{d+1}; S^0 has 'area' 2."""
    return 2 * math.pi ** ((d + 1) / 2) / math.gamma((d + 1) / 2)


def log_sphere_area(d):
    return math.log(2) + 0.5 * (d + 1) * math.log(math.pi) - math.lgamma((d + 1) / 2)


def multiplicity(d, n):
    """Dimension of the space of degree-n spherical harmonics on S^d."""
    if n == 0:
        return 1
    return (2 * n + d - 1) * math.factorial(n + d - 2) // (math.factorial(n) * math.factorial(d - 1))


@dataclass(frozen=True)
class SpectralTerm:
    n: int
    eigen: float
    mult: int
    gegen: float


def gegenbauer_ratio(n, lam, x):
    """C_n^lam(x) / C_n^lam(1) by the normalized three-term recurrence

    R_{k+1} = (2(k+lam) x R_k - k R_{k-1}) / (k + 2 lam).
    """
    if not lam > 0:
        raise DomainError(f"Gegenbauer parameter must be positive, got {lam}")
    x = np.asarray(x, dtype=float)
    r_prev, r_cur = np.ones_like(x), x.copy()
    if n == 0:
        return r_prev if r_prev.ndim else float(r_prev)
    for k in range(1, n):
        r_prev, r_cur = r_cur, (2 * (k + lam) * x * r_cur - k * r_prev) / (k + 2 * lam)
    return r_cur if r_cur.ndim else float(r_cur)


def spectral_terms(d, t, phi, count):
    """The first ``count`` series terms at a single angle (for inspection and tests)."""
    lam = 0.5 * (d - 1)
    x = math.cos(phi)
    out = []
    for n in range(count):
        g = math.cos(n * phi) if d == 1 else float(gegenbauer_ratio(n, lam, x))
        mult = 1 if (d == 1 and n == 0) else (2 if d == 1 else multiplicity(d, n))
        out.append(SpectralTerm(n, math.exp(-n * (n + d - 1) * t), mult, g))
    return out


def oracle_kernel(d, t, phi, eps_rel=1e-15, hp_cond=1e3, hp_fallback=True):
    """log K_t^d(phi) from the spectral series.

    Points whose cancellation (absolute-term sum over |sum|) exceeds
    ``hp_cond`` are re-summed with mpmath at raised precision. Without the
    fallback, non-positive partial sums are reported as sign <= 0 with a
    ConvergenceWarning rather than clamped. Below t = 0.05 the series needs
    many terms and a ConvergenceWarning is always raised.
    """
    if d < 1:
        raise DomainError(f"dimension must be >= 1, got {d}")
    if not t > 0:
        raise DomainError(f"time must be positive, got {t}")
    if t < ORACLE_MIN_T:
        warnings.warn(f"spectral oracle used at t={t} < {ORACLE_MIN_T}", ConvergenceWarning, stacklevel=2)
    scalar = np.ndim(phi) == 0
    phi = np.ascontiguousarray(np.atleast_1d(np.asarray(phi, dtype=float)))
    if d == 1:
        val, absval, _ = _backend.dual_sum(float(t), phi, eps_rel)
    else:
        x = np.ascontiguousarray(np.cos(phi))
        s, sabs, _ = _backend.spectral_sum(int(d), float(t), x, eps_rel)
        val, absval = s / sphere_area(d), sabs / sphere_area(d)
    lv = LogValue.from_linear(val)
    if hp_fallback:
        with np.errstate(divide="ignore"):
            redo = np.flatnonzero(~(absval <= hp_cond * np.abs(val)))
        if redo.size:
            from ._highprec import spectral_mp

            la, sg = lv.log_abs.copy(), lv.sign.copy()
            for i in redo:
                la[i], sg[i] = spectral_mp(int(d), float(t), float(phi[i]))
            lv = LogValue._wrap(la, sg)
    if np.any(lv.sign <= 0):
        warnings.warn("spectral partial sum is non-positive (t too small)", ConvergenceWarning, stacklevel=2)
    return lv[0] if scalar else lv


def semigroup_convolve(d, t, s, phi_grid, nodes=256, table_points=4001, cfg=None):
    """Largest relative residual |K_{t+s} - K_t * K_s| / K_{t+s} over ``phi_grid``.

    The spherical convolution uses the product formula: with the source at the
    pole and y at angle phi,

        (K_t * K_s)(phi) = |S^{d-2}| int_0^pi K_t(theta) sin^{d-1}(theta)
                           int_0^pi K_s(angle(theta, beta)) sin^{d-2}(beta) dbeta dtheta,

    cos angle = cos theta cos phi + sin theta sin phi cos beta. Both integrals
    are Gauss-Legendre; log K_s is tabulated once and spline-interpolated.
    For d = 1 the convolution is the periodic trapezoid rule on the circle.
    Returns (max residual, per-angle residuals).
    """
    from scipy.interpolate import CubicSpline

    from .quadrature import panel_nodes
    from .sphere_kernel import kernel_log

    if not (t > 0 and s > 0):
        raise DomainError("convolution times must be positive")
    phi_grid = np.atleast_1d(np.asarray(phi_grid, dtype=float))
    target = kernel_log(d, t + s, phi_grid, cfg).log_abs
    if d == 1:
        theta_pts = np.linspace(-math.pi, math.pi, 2 * nodes, endpoint=False)
        log_kt = kernel_log(1, t, theta_pts, cfg).log_abs
        res = []
        for ph in phi_grid:
            log_ks = kernel_log(1, s, ph - theta_pts, cfg).log_abs
            conv_log = _lse(log_kt + log_ks) + math.log(2 * math.pi / theta_pts.size)
            res.append(abs(math.expm1(conv_log - target[len(res)])))
        res = np.array(res)
        return float(res.max()), res

    grid = np.linspace(0.0, math.pi, table_points)
    spline = CubicSpline(grid, kernel_log(d, s, grid, cfg).log_abs)
    theta_nodes, theta_w = panel_nodes(np.linspace(0.0, math.pi, 9), nodes // 8)
    beta_nodes, beta_w = panel_nodes(np.linspace(0.0, math.pi, 9), nodes // 8)
    with np.errstate(divide="ignore"):
        log_outer = (kernel_log(d, t, theta_nodes, cfg).log_abs + (d - 1) * np.log(np.sin(theta_nodes))
                     + np.log(theta_w))
        log_beta = (d - 2) * np.log(np.sin(beta_nodes)) + np.log(beta_w) if d > 2 else np.log(beta_w)
    log_area = log_sphere_area(d - 2)
    res = np.empty(phi_grid.size)
    ct, st = np.cos(theta_nodes)[:, None], np.sin(theta_nodes)[:, None]
    cb = np.cos(beta_nodes)[None, :]
    for i, ph in enumerate(phi_grid):
        c = np.clip(ct * math.cos(ph) + st * math.sin(ph) * cb, -1.0, 1.0)
        inner = spline(np.arccos(c)) + log_beta[None, :]
        conv_log = log_area + _lse(log_outer + _lse_rows(inner))
        res[i] = abs(math.expm1(conv_log - target[i]))
    return float(res.max()), res


def _lse(a):
    a = np.asarray(a, dtype=float)
    m = np.max(a)
    return float(m + np.log(np.sum(np.exp(a - m))))


def _lse_rows(a):
    m = np.max(a, axis=1, keepdims=True)
    return (m + np.log(np.sum(np.exp(a - m), axis=1, keepdims=True)))[:, 0]
