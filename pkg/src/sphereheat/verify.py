"""Verification checks shared by ``sphereheat verify``, ``selftest`` and the test suite.

Every check returns a :class:`Check`; ``run_verification`` bundles the
bound-related checks for a set of dimensions into a JSON-ready summary.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np

from . import bounds
from .bm_sampler import angle_cdf, chapman_kolmogorov_test, make_rng, one_sample_ks, spawn_rngs
from .config import EvalConfig
from .errors import ConvergenceWarning
from .series_oracle import oracle_kernel, semigroup_convolve
from .sphere_kernel import evaluate, kernel_derivative_log, kernel_log, mass
from .theta_kernel import theta, theta_dual

PROFILES = ("quick", "full")


@dataclass
class Check:
    name: str
    passed: bool
    detail: str
    data: dict = field(default_factory=dict)
    seconds: float = 0.0
    soft: bool = False

    def as_dict(self):
        return {"name": self.name, "passed": bool(self.passed), "detail": self.detail, "seconds": self.seconds,
                "soft": self.soft, **({"data": self.data} if self.data else {})}


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        out = fn(*args, **kwargs)
        out.seconds = time.perf_counter() - t0
        return out

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _rel(a, b):
    """|e^(a-b) - 1| for log values a, b."""
    return np.abs(np.expm1(np.asarray(a) - np.asarray(b)))


def _interior(n, lo=1e-3):
    return np.linspace(lo, math.pi - lo, n)


# ---------------------------------------------------------------------------
# oracle equivalence


@_timed
def check_theta_dual(n_t=20, n_phi=50, tol=1e-12):
    t_grid = np.geomspace(0.05, 5.0, n_t)
    phi = np.linspace(0.0, math.pi, n_phi)
    worst = 0.0
    for t in t_grid:
        worst = max(worst, float(_rel(theta(t, phi).log_abs, theta_dual(t, phi).log_abs).max()))
    return Check("theta dual identity", worst < tol, f"max rel {worst:.2e} < {tol:g}", {"max_rel": worst})


def _oracle_gap(d, method, t_grid, phi):
    worst = 0.0
    for t in t_grid:
        a = evaluate(d, float(t), phi, method=method)[0].log_abs
        b = oracle_kernel(d, float(t), phi).log_abs
        worst = max(worst, float(_rel(a, b).max()))
    return worst


@_timed
def check_oracle(dims, n_t=10, n_phi=25, tol=None):
    """Closed form (odd) or reduction (even) against the spectral series, t in [0.1, 2]."""
    dims = list(dims)
    t_grid = np.linspace(0.1, 2.0, n_t)
    phi = np.linspace(0.0, math.pi, n_phi)
    gaps = {}
    ok = True
    for d in dims:
        method = "theta" if d % 2 else "reduction"
        limit = tol if tol is not None else (1e-8 if d % 2 else 1e-6)
        gaps[d] = _oracle_gap(d, method, t_grid, phi)
        ok &= gaps[d] < limit
    detail = ", ".join(f"d={d}: {g:.1e}" for d, g in gaps.items())
    return Check(f"oracle equivalence d={dims}", ok, detail, {"max_rel": gaps})


def s3_explicit(t, phi, dps=30):
    """e^t / (4 pi t sin phi) sum_n (phi + 2 pi n) W_t(phi + 2 pi n), in mpmath."""
    with mp.workdps(dps):
        t, phi = mp.mpf(t), mp.mpf(phi)
        total = mp.mpf(0)
        n_max = int(3 + 6 * mp.sqrt(t))
        for n in range(-n_max, n_max + 1):
            x = phi + 2 * mp.pi * n
            total += x * mp.exp(-x * x / (4 * t))
        total /= mp.sqrt(4 * mp.pi * t)
        return float(mp.log(mp.exp(t) * total / (4 * mp.pi * t * mp.sin(phi))))


@_timed
def check_s3_closed_form(n_t=12, n_phi=25, tol=1e-10):
    t_grid = np.geomspace(1e-4, 2.0, n_t)
    phi = _interior(n_phi, 1e-2)
    worst = 0.0
    for t in t_grid:
        ours = kernel_log(3, float(t), phi).log_abs
        ref = np.array([s3_explicit(t, p) for p in phi])
        worst = max(worst, float(_rel(ours, ref).max()))
    spot = float(kernel_log(3, 1.0, math.pi / 2).value)
    ok = worst < tol and abs(spot - 0.05061) < 1e-4
    return Check("S^3 explicit formula", ok, f"max rel {worst:.2e}, K_1^3(pi/2) = {spot:.7f}",
                 {"max_rel": worst, "spot": spot})


# ---------------------------------------------------------------------------
# structural identities


@_timed
def check_mass(dims, times=(1e-3, 0.1, 1.0, 5.0), tol=1e-8):
    errs = {d: max(abs(mass(d, t) - 1.0) for t in times) for d in dims}
    ok = all(e < tol for e in errs.values())
    return Check("mass conservation", ok, ", ".join(f"d={d}: {e:.1e}" for d, e in errs.items()), {"error": errs})


@_timed
def check_semigroup(dims, pairs=((0.2, 0.3), (0.5, 0.5)), tol=1e-6, n_phi=9):
    phi = np.linspace(0.0, math.pi, n_phi)
    res = {}
    for d in dims:
        res[d] = max(semigroup_convolve(d, t, s, phi)[0] for t, s in pairs)
    ok = all(r < tol for r in res.values())
    return Check("semigroup (Chapman-Kolmogorov)", ok, ", ".join(f"d={d}: {r:.1e}" for d, r in res.items()),
                 {"residual": res})


# ---------------------------------------------------------------------------
# two-sided bounds


@_timed
def check_ratio_scan(d, phi_count=512, t_points=13, threads=1, exponent_scale=1.0, band=(1e-3, 1e3),
                     max_drift=0.05):
    rep = bounds.ratio_scan(d, (1e-6, 1.0), phi_count, t_points=t_points, threads=threads,
                            exponent_scale=exponent_scale)
    lo, hi = rep.inf_ratio, rep.sup_ratio
    ok = (band[0] <= lo and hi <= band[1] and lo > 0 and math.isfinite(hi) and rep.drift < max_drift
          and rep.all_negative)
    return Check(f"kernel envelope d={d}", ok, f"inf {lo:.4g}, sup {hi:.4g}, drift {rep.drift:.1e}",
                 {"inf_ratio": lo, "sup_ratio": hi, "drift": rep.drift, "arg_inf": rep.arg_inf,
                  "arg_sup": rep.arg_sup})


@_timed
def check_sharpness(dims, phis=(1.0, 2.0, 3.0), t=1e-5, band=(0.995, 1.005)):
    vals = {d: [float(bounds.sharpness_probe(d, p, [t])[0]) for p in phis] for d in dims}
    ok = all(band[0] <= v <= band[1] for vs in vals.values() for v in vs)
    flat = [v for vs in vals.values() for v in vs]
    return Check("exponent sharpness", ok, f"r({t:g}) in [{min(flat):.6f}, {max(flat):.6f}]", {"r": vals})


@_timed
def check_derivative(d, phi_count=256, t_points=9, threads=1, band=(1e-4, 1e4), max_drift=0.05):
    """Sign of dK/dphi, derivative envelope ratios (t <= 1) and the large-t band (1 <= t <= 5)."""
    rep = bounds.ratio_scan(d, (1e-4, 1.0), phi_count, t_points=t_points, quantity="derivative",
                            threads=threads)
    large = bounds.large_t_bands(d)
    lo, hi = rep.inf_ratio, rep.sup_ratio
    d_lo, d_hi = large["derivative"]
    ok = (rep.all_negative and large["all_negative"] and band[0] <= lo and hi <= band[1]
          and rep.drift < max_drift and band[0] <= d_lo and d_hi <= band[1])
    return Check(f"derivative envelope d={d}", ok,
                 f"inf {lo:.4g}, sup {hi:.4g}, drift {rep.drift:.1e}, large-t [{d_lo:.3g}, {d_hi:.3g}]",
                 {"inf_ratio": lo, "sup_ratio": hi, "drift": rep.drift, "large_t": large})


@_timed
def check_antipodal(dims, n_t=9, max_var=0.10, tol_d1=1e-3):
    t_seq = np.geomspace(1e-5, 1e-3, n_t)
    var = {}
    ok = True
    for d in dims:
        m = bounds.antipodal_rate(d, t_seq)
        var[d] = float(m.max() / m.min() - 1.0)
        ok &= var[d] < max_var
    limit = None
    if 1 in dims:
        limit = float(bounds.antipodal_rate(1, [1e-5])[0])
        ok &= abs(limit - 1 / math.sqrt(math.pi)) < tol_d1
    detail = ", ".join(f"d={d}: {v:.1e}" for d, v in var.items())
    if limit is not None:
        detail += f"; d=1 limit {limit:.6f}"
    return Check("antipodal rate", ok, detail, {"variation": var, "d1_limit": limit})


# ---------------------------------------------------------------------------
# sampler


@_timed
def check_sampler(dims=(2, 3), times=(0.1, 1.0), n=100_000, seed=20240601, control_scale=1.1):
    rngs = iter(spawn_rngs(seed, 4 * len(dims) * len(times) + 1))
    reports = []
    ok = True
    for d in dims:
        for t in times:
            cdf = angle_cdf(d, t)
            for rep in (one_sample_ks(d, t, n, next(rngs), cdf=cdf), chapman_kolmogorov_test(d, t, n, next(rngs))):
                ok &= rep.passed
                reports.append({"d": d, "t": t, **rep.as_dict()})
    ctrl = one_sample_ks(dims[0], times[0], n, next(rngs), angle_scale=control_scale)
    ok &= not ctrl.passed
    worst = max(r["statistic"] / r["threshold"] for r in reports)
    return Check("sampler KS tests", ok,
                 f"worst D/threshold {worst:.2f}; control D/threshold {ctrl.statistic / ctrl.threshold:.1f}",
                 {"reports": reports, "control": ctrl.as_dict()})


# ---------------------------------------------------------------------------
# drivers


def run_verification(dims, profile="quick", cfg=None, threads=1, exponent_scale=1.0):
    """Bound verification per dimension; returns a JSON-ready dict with a 'passed' flag.

    ``quick`` uses coarser grids and smaller samples; ``full`` uses the
    acceptance-scale ones. ``exponent_scale`` corrupts the envelope exponent
    (negative control).
    """
    if profile not in PROFILES:
        raise ValueError(f"unknown profile {profile!r}")
    dims = sorted(set(int(d) for d in dims))
    if not dims or dims[0] < 1:
        raise ValueError("dimensions must be positive integers")
    full = profile == "full"
    checks = []
    per_dim = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        for d in dims:
            c = check_ratio_scan(d, 512 if full else 128, 13 if full else 7, threads, exponent_scale)
            checks.append(c)
            per_dim[d] = {"inf_ratio": c.data["inf_ratio"], "sup_ratio": c.data["sup_ratio"],
                          "drift": c.data["drift"]}
            dc = check_derivative(d, 256 if full else 64, 9 if full else 5, threads)
            checks.append(dc)
            per_dim[d]["derivative_inf_ratio"] = dc.data["inf_ratio"]
            per_dim[d]["derivative_sup_ratio"] = dc.data["sup_ratio"]
        checks.append(check_sharpness(dims))
        anti = [d for d in dims if d <= 3]
        if anti:
            checks.append(check_antipodal(anti))
        checks.append(check_oracle(dims, 10 if full else 4, 25 if full else 9))
        if full:
            checks.append(check_mass(dims))
            samp = [d for d in dims if d in (2, 3)]
            if samp:
                checks.append(check_sampler(samp))
    return {
        "profile": profile,
        "dims": dims,
        "passed": all(c.passed for c in checks),
        "per_dimension": {str(d): v for d, v in per_dim.items()},
        "checks": [c.as_dict() for c in checks],
    }


def selftest(cfg=None):
    """Fast invariants of every module; list of (name, passed, detail)."""
    from . import _backend
    from .trig_algebra import TrigExpr, apply_D, phi_table

    cfg = EvalConfig() if cfg is None else cfg
    out = []

    def record(name, fn):
        try:
            ok, detail = fn()
        except Exception as exc:  # reported, not raised
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append((name, bool(ok), detail))

    def phi_rows():
        tab = phi_table(3)
        top = tab[3] == TrigExpr.z_over_sin(3)
        first = phi_table(2)[1] == apply_D(TrigExpr.z_over_sin(1))
        return top and first, "Phi_{N,N} = (z/sin z)^N and Phi_{2,1} = D(z/sin z)"

    def d_of_cosh():
        e = apply_D(TrigExpr.cosh())
        z = np.array([0.3, 1.1])
        num = (np.cosh(z + 1e-6) - np.cosh(z - 1e-6)) / 2e-6 / np.sin(z)
        err = float(np.max(np.abs(e(z, 1.0) - num) / np.abs(num)))
        return err < 1e-7, f"finite-difference rel {err:.1e}"

    def theta_dual_id():
        c = check_theta_dual(5, 11)
        return c.passed, c.detail

    def odd_oracle():
        g = _oracle_gap(3, "theta", [0.3, 1.0], np.linspace(0, math.pi, 7))
        return g < 1e-10, f"d=3 rel {g:.1e}"

    def even_oracle():
        g = _oracle_gap(2, "reduction", [0.3], np.linspace(0, math.pi, 7))
        return g < 1e-8, f"d=2 rel {g:.1e}"

    def mass_d4():
        e = abs(mass(4, 0.1) - 1.0)
        return e < 1e-10, f"|mass - 1| = {e:.1e}"

    def monotone():
        ok = all(bounds.is_decreasing(d, 0.2, 50) for d in (1, 2, 3))
        return ok, "K decreasing in phi for d=1..3"

    def derivative_sign():
        sg = kernel_derivative_log(2, 0.3, _interior(20)).sign
        return bool(np.all(sg < 0)), "dK/dphi < 0 on the interior"

    def envelope():
        rep = bounds.ratio_scan(3, (1e-4, 1.0), 32, t_points=4, refinements=0)
        return 1e-3 < rep.inf_ratio and rep.sup_ratio < 1e3, f"ratio in [{rep.inf_ratio:.3g}, {rep.sup_ratio:.3g}]"

    def sampler():
        cdf = angle_cdf(3, 0.5)
        rep = one_sample_ks(3, 0.5, 5000, make_rng(1), cdf=cdf)
        return rep.passed and abs(cdf.mass - 1) < 1e-8, f"mass {cdf.mass:.12f}, D = {rep.statistic:.4f}"

    def backends():
        from .bench import available_backends

        names = available_backends()
        phi = np.linspace(0, math.pi, 33)
        prev = _backend.name()
        vals = []
        try:
            for n in names:
                _backend.use(n)
                vals.append(kernel_log(3, 0.2, phi, cfg).log_abs)
        finally:
            _backend.use(prev)
        gap = float(max(_rel(v, vals[0]).max() for v in vals))
        return gap < 1e-12, f"{'/'.join(names)} agree to {gap:.1e}"

    for name, fn in [("Phi table", phi_rows), ("D cosh vs finite difference", d_of_cosh),
                     ("theta dual identity", theta_dual_id), ("odd closed form vs series", odd_oracle),
                     ("even reduction vs series", even_oracle), ("mass conservation", mass_d4),
                     ("monotonicity", monotone), ("derivative sign", derivative_sign),
                     ("kernel envelope", envelope), ("sampler", sampler), ("backend parity", backends)]:
        record(name, fn)
    return out
