"""The periodized Gauss-Weierstrass kernel theta_t and its iterates H^N theta_t, H = -D.

Everything is computed in log scale. ``H^N theta_t`` has two exact
representations:

* bulk (far from the antipode): the Gaussian centred at phi plus the pairs
  ``W_t(phi - 2 pi n) + W_t(phi + 2 pi n) = 2 e^{-pi^2 n^2/t} W_t(phi) cosh(pi n phi / t)``;
* antipodal: with ``psi = pi - phi`` the lattice pairs up as
  ``2 e^{-pi^2 (2n+1)^2/(4t)} W_t(psi) cosh(pi (2n+1) psi / (2t))``, and since
  ``D_psi = -D_phi`` we get ``H_phi^N = D_psi^N``.

Both use the Leibniz rule for D on ``W_t * cosh`` with
``D^m W_t = W_t * sum_j (-1)^j 2^-j t^-j Phi_{m,j}`` and
``D^k cosh(v x) = sum_j v^(2j) L^j(cosh)(v x) Phi_{k,j}(x)``.
"""
from __future__ import annotations

import math
import warnings

import numpy as np

from . import _backend
from .config import ThetaConfig
from .errors import ConvergenceWarning, DomainError, PoleError
from .logvalue import LogValue, logsumexp, signed_logsumexp
from .trig_algebra import POLE_TOL, log_l_cosh, phi_bank

LOG_4PI = math.log(4 * math.pi)
DUAL_MIN_T = 0.05

_DEFAULT = ThetaConfig()


def _check_t(t):
    if not t > 0:
        raise DomainError(f"time must be positive, got {t}")


def _out(la, s, scalar):
    lv = LogValue._wrap(la, s)
    return lv[0] if scalar else lv


def reduce_angle(phi):
    """Representative of phi in [0, pi] under phi -> -phi and phi -> phi + 2 pi."""
    phi = np.asarray(phi, dtype=float)
    r = np.mod(phi, 2 * math.pi)
    return np.where(r > math.pi, 2 * math.pi - r, r)


def gauss_w(t, x):
    """log W_t(x) = -x^2/(4t) - log(4 pi t)/2."""
    _check_t(t)
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    la = -x * x / (4 * t) - 0.5 * (LOG_4PI + math.log(t))
    return _out(la, np.ones_like(x), scalar)


def theta(t, phi, cfg=_DEFAULT):
    """theta_t(phi) = sum_n W_t(phi + 2 pi n)."""
    _check_t(t)
    scalar = np.ndim(phi) == 0
    phi0 = np.ascontiguousarray(reduce_angle(np.atleast_1d(phi)))
    corr = _backend.theta_correction_log(float(t), phi0, cfg.eps_rel, max(cfg.min_lattice_terms, 2))
    la = -phi0 * phi0 / (4 * t) - 0.5 * (LOG_4PI + math.log(t)) + corr
    return _out(la, np.ones_like(phi0), scalar)


def theta_dual(t, phi, cfg=_DEFAULT):
    """Fourier-dual form (1/2pi)(1 + 2 sum_n e^{-n^2 t} cos n phi).

    Intended for t >= 0.05; below that a ConvergenceWarning is emitted (the
    series needs O(t^-1/2) terms and cancels heavily near the antipode).
    Points that lose more than ``cfg.hp_cond`` to cancellation are re-summed
    in arbitrary precision when ``cfg.hp_fallback`` is set.
    """
    _check_t(t)
    if t < DUAL_MIN_T:
        warnings.warn(f"dual theta series used at t={t} < {DUAL_MIN_T}", ConvergenceWarning, stacklevel=2)
    scalar = np.ndim(phi) == 0
    phi = np.ascontiguousarray(np.atleast_1d(np.asarray(phi, dtype=float)))
    val, absval, _ = _backend.dual_sum(float(t), phi, cfg.eps_rel)
    lv = LogValue.from_linear(val)
    if cfg.hp_fallback:
        with np.errstate(divide="ignore"):
            redo = np.flatnonzero(~(absval <= cfg.hp_cond * np.abs(val)))
        if redo.size:
            from ._highprec import spectral_mp

            la, sg = lv.log_abs.copy(), lv.sign.copy()
            for i in redo:
                la[i], sg[i] = spectral_mp(1, float(t), float(phi[i]))
            lv = LogValue._wrap(la, sg)
    if np.any(lv.sign <= 0):
        warnings.warn("dual theta series produced a non-positive value", ConvergenceWarning, stacklevel=2)
    return lv[0] if scalar else lv


# ---------------------------------------------------------------------------
# D^m W_t and the paired Leibniz sums


def _dw_ratios(t, bank_vals, bank, N):
    """A_m = D^m W_t / W_t for m = 0..N as (log|A|, sign, log of absolute-term sum)."""
    npts = bank_vals.shape[1]
    logs = np.zeros((N + 1, npts))
    signs = np.ones((N + 1, npts))
    abslogs = np.zeros((N + 1, npts))
    lt = math.log(t)
    for m in range(1, N + 1):
        terms, sg = [], []
        for j in range(1, m + 1):
            ph = bank.row(bank_vals, m, j)
            with np.errstate(divide="ignore"):
                terms.append(-j * (math.log(2) + lt) + np.log(np.abs(ph)))
            sg.append((-1) ** j * np.sign(ph))
        terms = np.array(terms)
        logs[m], signs[m] = signed_logsumexp(terms, np.array(sg), axis=0)
        abslogs[m] = logsumexp(terms, axis=0)
    return logs, signs, abslogs


def _dcosh_logs(x, v, bank_vals, bank, N):
    """D^k cosh(v x) for k = 0..N as (log, sign, log of absolute-term sum)."""
    npts = x.size
    logs = np.zeros((N + 1, npts))
    signs = np.ones((N + 1, npts))
    abslogs = np.zeros((N + 1, npts))
    lv = math.log(v)
    w = v * x
    lc = [log_l_cosh(j, w) for j in range(N + 1)]
    logs[0] = abslogs[0] = lc[0]
    for k in range(1, N + 1):
        terms, sg = [], []
        for j in range(1, k + 1):
            ph = bank.row(bank_vals, k, j)
            with np.errstate(divide="ignore"):
                terms.append(2 * j * lv + lc[j] + np.log(np.abs(ph)))
            sg.append(np.sign(ph))
        terms = np.array(terms)
        logs[k], signs[k] = signed_logsumexp(terms, np.array(sg), axis=0)
        abslogs[k] = logsumexp(terms, axis=0)
    return logs, signs, abslogs


_LOG_BINOM = {}


def _log_binom(N, k):
    key = (N, k)
    if key not in _LOG_BINOM:
        _LOG_BINOM[key] = math.log(math.comb(N, k))
    return _LOG_BINOM[key]


def _leibniz(dw, dc, N):
    """sum_k C(N,k) A_{N-k} D^k cosh as (log, sign, log of absolute-term sum)."""
    dw_l, dw_s, dw_a = dw
    dc_l, dc_s, dc_a = dc
    terms = np.array([_log_binom(N, k) + dw_l[N - k] + dc_l[k] for k in range(N + 1)])
    sg = np.array([dw_s[N - k] * dc_s[k] for k in range(N + 1)])
    la, s = signed_logsumexp(terms, sg, axis=0)
    absl = logsumexp(np.array([_log_binom(N, k) + dw_a[N - k] + dc_a[k] for k in range(N + 1)]), axis=0)
    return la, s, absl


def _phi_data(t, x, N):
    bank = phi_bank(N)
    bank_vals = bank.evaluate(x)
    return bank, bank_vals, _dw_ratios(t, bank_vals, bank, N)


def _pair_series(t, x, N, log_weight, scale, cfg, first_n, data, base=None):
    """Sum over n >= first_n of exp(log_weight(n)) * D^N[W_t cosh(scale(n) x)] / W_t.

    ``base`` optionally seeds the accumulator with an already computed
    (log, sign, abs-log). Returns (log, sign, abs-log).
    """
    bank, bank_vals, dw = data
    acc_l = [] if base is None else [base[0]]
    acc_s = [] if base is None else [base[1]]
    acc_a = [] if base is None else [base[2]]
    log_eps = math.log(cfg.eps_rel)
    n = first_n
    running = None if base is None else base[2].copy()
    count = 0
    while True:
        v = scale(n)
        dc = _dcosh_logs(x, v, bank_vals, bank, N)
        la, sg, absl = _leibniz(dw, dc, N)
        lw = log_weight(n)
        acc_l.append(la + lw)
        acc_s.append(sg)
        acc_a.append(absl + lw)
        running = absl + lw if running is None else np.maximum(running, absl + lw)
        count += 1
        n += 1
        if count >= cfg.min_lattice_terms and np.all(absl + lw < running + log_eps):
            break
        if count > 10000:
            break
    la, sg = signed_logsumexp(np.array(acc_l), np.array(acc_s), axis=0)
    return la, sg, logsumexp(np.array(acc_a), axis=0)


def _hn_theta_bulk(t, phi, N, cfg):
    logw = -phi * phi / (4 * t) - 0.5 * (LOG_4PI + math.log(t))
    data = _phi_data(t, phi, N)
    dw = data[2]
    la, sg, absl = _pair_series(
        t, phi, N,
        log_weight=lambda n: math.log(2) - math.pi**2 * n * n / t,
        scale=lambda n: math.pi * n / t,
        cfg=cfg, first_n=1, data=data, base=(dw[0][N], dw[1][N], dw[2][N]),
    )
    return logw + la, sg * (-1) ** N, absl - la


def _hn_theta_antipodal(t, phi, N, cfg):
    psi = math.pi - phi
    logw = -psi * psi / (4 * t) - 0.5 * (LOG_4PI + math.log(t))
    la, sg, absl = _pair_series(
        t, psi, N,
        log_weight=lambda n: math.log(2) - math.pi**2 * (2 * n + 1) ** 2 / (4 * t),
        scale=lambda n: math.pi * (2 * n + 1) / (2 * t),
        cfg=cfg, first_n=0, data=_phi_data(t, psi, N),
    )
    return logw + la, sg, absl - la


def hn_w(t, psi, N):
    """H^N W_t(psi) = W_t(psi) sum_j (-1)^(N+j) 2^-j t^-j Phi_{N,j}(psi)."""
    _check_t(t)
    if N < 0:
        raise DomainError("N must be nonnegative")
    scalar = np.ndim(psi) == 0
    psi = np.atleast_1d(np.asarray(psi, dtype=float))
    logw = -psi * psi / (4 * t) - 0.5 * (LOG_4PI + math.log(t))
    if N == 0:
        return _out(logw, np.ones_like(psi), scalar)
    k = np.rint(psi / math.pi)
    bad = (k != 0) & (np.abs(psi - k * math.pi) < POLE_TOL)
    if np.any(bad):
        raise PoleError(f"H^N W_t evaluated at the pole {int(k[bad][0])}*pi", lattice_point=float(k[bad][0] * math.pi))
    bank = phi_bank(N)
    dw = _dw_ratios(t, bank.evaluate(psi), bank, N)
    return _out(logw + dw[0][N], dw[1][N] * (-1) ** N, scalar)


def hn_theta(t, phi, N, cfg=_DEFAULT, regime="auto"):
    """H^N theta_t(phi) for phi in [0, pi], in log scale.

    ``regime`` is 'auto', 'bulk' or 'antipodal'; the forced variants exist for
    consistency checks in the overlap band.
    """
    _check_t(t)
    if N < 0:
        raise DomainError("N must be nonnegative")
    scalar = np.ndim(phi) == 0
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    if np.any((phi < 0) | (phi > math.pi)):
        raise DomainError("hn_theta expects phi in [0, pi]")
    if N == 0:
        return theta(t, phi[0] if scalar else phi, cfg)
    if regime == "auto":
        anti = (math.pi - phi) < cfg.regime_switch
    elif regime == "bulk":
        if np.any(phi == math.pi):
            raise PoleError("bulk representation is singular at phi = pi", lattice_point=math.pi)
        anti = np.zeros(phi.shape, dtype=bool)
    elif regime == "antipodal":
        anti = np.ones(phi.shape, dtype=bool)
    else:
        raise DomainError(f"unknown regime {regime!r}")
    la, sg, lcond = _hn_theta_float(t, phi, N, cfg, anti)
    if cfg.hp_fallback:
        redo = np.flatnonzero(lcond > math.log(cfg.hp_cond))
        if redo.size:
            from ._highprec import hn_theta_mp

            for i in redo:
                la[i], sg[i] = hn_theta_mp(t, phi[i], N, "antipodal" if anti[i] else "bulk")
    return _out(la, sg, scalar)


def _hn_theta_float(t, phi, N, cfg, anti):
    """Float evaluation plus the log condition estimate log(sum|terms| / |sum|)."""
    la = np.empty_like(phi)
    sg = np.empty_like(phi)
    lc = np.empty_like(phi)
    if np.any(~anti):
        la[~anti], sg[~anti], lc[~anti] = _hn_theta_bulk(t, phi[~anti], N, cfg)
    if np.any(anti):
        la[anti], sg[anti], lc[anti] = _hn_theta_antipodal(t, phi[anti], N, cfg)
    return la, sg, lc
