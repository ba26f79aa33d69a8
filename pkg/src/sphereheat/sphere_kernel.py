"""K_t^d(phi) and its angular derivative for every dimension d >= 1.

Dispatch (``method='auto'``):

* t >= t_crossover: spectral series;
* odd d = 2N+1: K = (2 pi)^-N e^{t N^2} H^N theta_t, H = -(1/sin) d/dphi;
* even d: one-dimensional reduction to the odd kernel K^{2d-1} at time t/4,
  integrated against (1 - v^2)^((d-3)/2).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .config import EvalConfig
from .errors import AccuracyError, CapabilityError, DomainError, UnderflowWarning
from .logvalue import LogValue, logsumexp
from .quadrature import gauss_jacobi, log_jacobi_mass, panel_nodes
from .series_oracle import log_sphere_area, oracle_kernel
from .theta_kernel import hn_theta, reduce_angle, theta
from . import trig_algebra

METHODS = ("auto", "theta", "reduction", "series")
LOG_2PI = math.log(2 * math.pi)
_DEFAULT = EvalConfig()
_LOG_TINY = math.log(np.finfo(float).tiny)

# s-form layout: log-spaced panels on (s_lo, min(1, S)), linear panels beyond
_LOG_PANEL_WIDTH = 3.0
_LIN_PANEL_WIDTH = 4.0
_PANEL_NODES = 16


@dataclass(frozen=True)
class KernelQuery:
    """A (dimension, time, angle) triple; the angle is reduced into [0, pi]."""

    d: int
    t: float
    phi: float

    def __post_init__(self):
        _validate(self.d, self.t)
        object.__setattr__(self, "phi", float(reduce_angle(self.phi)))


@dataclass
class EvalInfo:
    """What an evaluation did: the path taken and its quadrature effort."""

    method: str
    nodes: int = 0
    est_rel_err: float = 0.0
    extra: dict = field(default_factory=dict)


def _validate(d, t):
    if isinstance(d, bool) or int(d) != d or d < 1:
        raise DomainError(f"dimension must be an integer >= 1, got {d!r}")
    if not (isinstance(t, (int, float, np.floating)) and t > 0 and math.isfinite(t)):
        raise DomainError(f"time must be positive and finite, got {t!r}")


def reduction_constant_log(d):
    """log c_d with c_d = 2^(1-d) pi^((d-1)/2) / Gamma((d-1)/2)."""
    return (1 - d) * math.log(2) + 0.5 * (d - 1) * math.log(math.pi) - math.lgamma(0.5 * (d - 1))


def _check_order(N, cfg):
    if N > cfg.order_cap:
        raise CapabilityError(
            f"requires Phi tables of order {N}, above the configured cap {cfg.order_cap}"
        )
    if N > trig_algebra.get_order_cap():
        trig_algebra.set_order_cap(cfg.order_cap)


# ---------------------------------------------------------------------------
# odd dimensions


def _odd_log(d, t, phi, cfg):
    """log K_t^d(phi) for odd d via the closed form; phi is a 1-D array in [0, pi]."""
    N = (d - 1) // 2
    if N == 0:
        lv = theta(t, phi, cfg.theta)
        return lv.log_abs, lv.sign
    _check_order(N, cfg)
    lv = hn_theta(t, phi, N, cfg.theta)
    return lv.log_abs - N * LOG_2PI + t * N * N, lv.sign


# ---------------------------------------------------------------------------
# even dimensions


def _arccos_scaled(v, phi):
    """arccos(v cos(phi/2)) without cancellation near +-1.

    1 - v c = (1 - v) + v (1 - c) for v >= 0 and 1 + v c = (1 + v) + |v| (1 - c)
    for v < 0, with 1 - c = 2 sin^2(phi/4); then arccos y = 2 asin sqrt((1-y)/2).
    """
    one_minus_c = 2.0 * np.sin(0.25 * phi) ** 2
    pos = v >= 0
    av = np.abs(v)
    gap = (1.0 - av) + av * one_minus_c
    half = 2.0 * np.arcsin(np.sqrt(np.clip(0.5 * gap, 0.0, 1.0)))
    return np.where(pos, half, math.pi - half)


def _inner_log(d, t, psi, cfg):
    """log K_{t/4}^{2d-1}(psi) for an array of any shape."""
    shape = psi.shape
    la, sg = _odd_log(2 * d - 1, 0.25 * t, np.clip(psi.ravel(), 0.0, math.pi), cfg)
    if np.any(sg <= 0):
        raise AccuracyError("inner odd kernel evaluated non-positive")
    return la.reshape(shape)


def _even_gauss_jacobi(d, t, phi, cfg):
    alpha = 0.5 * (d - 3)
    n = cfg.quad_nodes_init
    prev = None
    while True:
        rule = gauss_jacobi(n, alpha)
        psi = _arccos_scaled(rule.nodes[None, :], phi[:, None])
        vals = _inner_log(d, t, psi, cfg) + np.log(rule.weights)[None, :]
        est = logsumexp(vals.T, axis=0)
        if prev is not None:
            change = float(np.max(np.abs(np.expm1(est - prev))))
            if change < cfg.eps_rel:
                return est, n, change
            if 2 * n > cfg.quad_nodes_max:
                raise AccuracyError(
                    f"Gauss-Jacobi reduction did not converge with {n} nodes (change {change:.2e})",
                    estimates=(prev, est),
                )
        elif 2 * n > cfg.quad_nodes_max:
            return est, n, float("nan")
        prev = est
        n *= 2


def _s_layout(alpha, S):
    """Nodes (in s) and log-weights (including ds) per row, for upper limits S (array)."""
    decades = 17.0 / (alpha + 1.0)
    span = decades * math.log(10)
    n_log = max(1, math.ceil(span / _LOG_PANEL_WIDTH))
    s_cut = 44.0 + 4.0 * max(alpha, 0.0)
    n_lin = math.ceil((s_cut - 1.0) / _LIN_PANEL_WIDTH)
    x_u, w_u = panel_nodes(np.linspace(0.0, 1.0, n_log + 1), _PANEL_NODES)
    l_u, lw_u = panel_nodes(np.linspace(0.0, 1.0, n_lin + 1), _PANEL_NODES)

    x_hi = np.log(np.minimum(1.0, S))[:, None]
    x_lo = x_hi - span
    s_log = np.exp(x_lo + (x_hi - x_lo) * x_u[None, :])
    logw_log = np.log(w_u)[None, :] + math.log(span) + np.log(s_log)

    lin_hi = np.minimum(S, s_cut)[:, None]
    width = np.maximum(lin_hi - 1.0, 0.0)
    s_lin = 1.0 + width * l_u[None, :]
    with np.errstate(divide="ignore"):
        logw_lin = np.log(lw_u)[None, :] + np.log(width)
    return np.hstack([s_log, s_lin]), np.hstack([logw_log, logw_lin])


def _even_small_t(d, t, phi, cfg):
    """Reduction integral in the variable s = gamma (gamma + phi) / t."""
    alpha = 0.5 * (d - 3)
    out = np.empty_like(phi)
    at_pi = phi >= math.pi
    # at the antipode every v maps to psi = pi/2
    if np.any(at_pi):
        out[at_pi] = _inner_log(d, t, np.array([0.5 * math.pi]), cfg)[0] + log_jacobi_mass(alpha)
    rest = ~at_pi
    if not np.any(rest):
        return out, 0
    ph = phi[rest]
    S = (math.pi - ph) * (math.pi + ph) / (4 * t)
    s, logw = _s_layout(alpha, S)
    root = np.sqrt(ph[:, None] ** 2 + 4 * t * s)
    gamma = 2 * t * s / (ph[:, None] + root)
    psi = gamma + 0.5 * ph[:, None]
    k_near = _inner_log(d, t, psi, cfg)
    # K(pi - psi) / K(psi) <= exp(-pi (pi - 2 psi) / t) times a prefactor ratio of at
    # most (1 + 2 pi / t)^(2d - 2); skip the reflected term where that is negligible
    far = math.pi * (math.pi - 2 * psi) / t < 45.0 + (2 * d - 2) * math.log1p(2 * math.pi / t)
    k_far = np.full_like(psi, -np.inf)
    if np.any(far):
        k_far[far] = _inner_log(d, t, math.pi - psi[far], cfg)
    # sin(gamma + phi) = sin((pi - phi) - gamma), which stays >= 0 as phi -> pi
    with np.errstate(divide="ignore"):
        log_integrand = (
            np.logaddexp(k_near, k_far)
            + alpha * (np.log(np.sin(np.maximum((math.pi - ph[:, None]) - gamma, 0.0))) + np.log(np.sin(gamma)))
            + np.log(np.sin(psi))
            + math.log(t)
            - np.log(root)
        )
    with np.errstate(invalid="ignore"):
        terms = np.where(np.isfinite(logw), log_integrand + logw, -np.inf)
    integral = logsumexp(terms.T, axis=0)
    # (cos(phi/2))^(d-2) = (sin((pi-phi)/2))^(d-2)
    out[rest] = integral - (d - 2) * np.log(np.sin(0.5 * (math.pi - ph)))
    return out, s.shape[1]


def reduction_even(d, t, phi, cfg=_DEFAULT):
    """log K_t^d(phi) for even d from the reduction to dimension 2d - 1 at time t/4."""
    if d % 2 or d < 2:
        raise DomainError(f"reduction_even needs an even dimension >= 2, got {d}")
    _validate(d, t)
    scalar = np.ndim(phi) == 0
    phi = reduce_angle(np.atleast_1d(np.asarray(phi, dtype=float)))
    la, info = _even_log(d, t, phi, cfg)
    lv = LogValue._wrap(la, np.ones_like(la))
    return lv[0] if scalar else lv


def _even_log(d, t, phi, cfg):
    _check_order(d - 1, cfg)
    lc = reduction_constant_log(d)
    if t < cfg.smallt_quad_threshold:
        la, nodes = _even_small_t(d, t, phi, cfg)
        return lc + la, EvalInfo("reduction", nodes, cfg.eps_rel, {"quadrature": "s-panels"})
    la, nodes, change = _even_gauss_jacobi(d, t, phi, cfg)
    return lc + la, EvalInfo("reduction", nodes, change, {"quadrature": "gauss-jacobi"})


# ---------------------------------------------------------------------------
# public entry points


def _unpack(q, t, phi):
    if isinstance(q, KernelQuery):
        return q.d, q.t, q.phi
    return q, t, phi


def evaluate(d, t, phi, cfg=None, method="auto"):
    """(LogValue, EvalInfo) for K_t^d at the given angles."""
    cfg = _DEFAULT if cfg is None else cfg
    _validate(d, t)
    if method not in METHODS:
        raise DomainError(f"unknown method {method!r}; expected one of {METHODS}")
    scalar = np.ndim(phi) == 0
    phi = reduce_angle(np.atleast_1d(np.asarray(phi, dtype=float)))
    if method == "auto":
        if d == 1:
            method = "theta"
        elif t >= cfg.t_crossover:
            method = "series"
        else:
            method = "theta" if d % 2 else "reduction"
    if method == "series":
        lv = oracle_kernel(d, t, phi, eps_rel=min(cfg.eps_rel, 1e-15), hp_cond=cfg.theta.hp_cond,
                           hp_fallback=cfg.theta.hp_fallback)
        la, sg = lv.log_abs, lv.sign
        info = EvalInfo("series", 0, cfg.eps_rel)
    elif method == "theta":
        if d % 2 == 0:
            raise DomainError("the theta closed form only covers odd dimensions")
        la, sg = _odd_log(d, t, phi, cfg)
        info = EvalInfo("theta", 0, cfg.eps_rel)
    else:
        if d % 2:
            raise DomainError("the reduction integral only covers even dimensions")
        la, info = _even_log(d, t, phi, cfg)
        sg = np.ones_like(la)
    lv = LogValue._wrap(la, sg)
    return (lv[0] if scalar else lv), info


def kernel_log(q, t=None, phi=None, cfg=None, method="auto"):
    """log K_t^d(phi) as a LogValue; accepts a KernelQuery or (d, t, phi)."""
    d, t, phi = _unpack(q, t, phi)
    return evaluate(d, t, phi, cfg, method)[0]


def kernel(q, t=None, phi=None, cfg=None, method="auto"):
    """K_t^d(phi) in linear scale; values below the float range become 0 with an UnderflowWarning."""
    lv = kernel_log(q, t, phi, cfg, method)
    if np.any(lv.log_abs < _LOG_TINY):
        warnings.warn("kernel value underflows double precision; returning 0", UnderflowWarning, stacklevel=2)
    return lv.value


def kernel_derivative_log(q, t=None, phi=None, cfg=None, method="auto"):
    """d/dphi K_t^d(phi) = -2 pi e^{-t d} sin(phi) K_t^{d+2}(phi), in log scale."""
    d, t, phi = _unpack(q, t, phi)
    _validate(d, t)
    scalar = np.ndim(phi) == 0
    phi = reduce_angle(np.atleast_1d(np.asarray(phi, dtype=float)))
    upper = kernel_log(d + 2, t, phi, cfg, method)
    sin_phi = np.sin(phi)
    with np.errstate(divide="ignore"):
        la = LOG_2PI - t * d + np.log(sin_phi) + upper.log_abs
    sg = np.where((phi > 0) & (phi < math.pi), -1.0, 0.0)
    lv = LogValue._wrap(la, sg)
    return lv[0] if scalar else lv


def mass(d, t, cfg=None, panels=128, nodes=20):
    """int_0^pi K_t^d(phi) |S^{d-1}| sin^{d-1}(phi) dphi by composite Gauss-Legendre.

    Half of the panels cover the bulk of the angular density, [0, 40 sqrt(t)].
    """
    edge = min(math.pi, 40 * math.sqrt(t))
    edges = np.linspace(0.0, edge, panels // 2 + 1)
    if edge < math.pi:
        edges = np.concatenate([edges, np.linspace(edge, math.pi, panels // 2 + 1)[1:]])
    x, w = panel_nodes(edges, nodes)
    lk = kernel_log(d, t, x, cfg).log_abs
    log_area = math.log(2.0) if d == 1 else log_sphere_area(d - 1)
    with np.errstate(divide="ignore"):
        terms = lk + log_area + (d - 1) * np.log(np.sin(x)) + np.log(w)
    return float(np.exp(logsumexp(terms, axis=0)))
