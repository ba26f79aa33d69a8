"""Two-sided envelopes for K_t^d and -d/dphi K_t^d, and empirical scans of the ratios.

Small-time kernel envelope (log scale):

    -((d-1)/2) log(t + pi - phi) - (d/2) log t - phi^2 / (4t)

Everything stays in log scale; ratios are exponentiated only after the
subtraction, so values like exp(-24000) never materialize.
"""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DomainError
from .logvalue import LogValue
from .sphere_kernel import kernel_derivative_log, kernel_log

KINDS = ("kernel_small_t", "kernel_large_t", "derivative_small_t", "derivative_large_t")
CSV_HEADER = ("d", "t", "phi", "log_kernel", "log_envelope", "ratio")


@dataclass(frozen=True)
class Envelope:
    d: int
    kind: str
    T: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown envelope kind {self.kind!r}")
        if not self.T > 0:
            raise DomainError("T must be positive")

    def log(self, t, phi):
        return envelope_log(self.d, t, phi, self.kind)


def envelope_log(d, t, phi, kind="kernel_small_t", exponent_scale=1.0):
    """Envelope value as a LogValue.

    ``exponent_scale`` multiplies the Gaussian exponent phi^2/(4t); it exists
    only as a hook for negative-control checks and defaults to 1.
    """
    if kind not in KINDS:
        raise DomainError(f"unknown envelope kind {kind!r}")
    if not t > 0:
        raise DomainError("time must be positive")
    scalar = np.ndim(phi) == 0
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    if np.any((phi < 0) | (phi > math.pi)):
        raise DomainError("envelope angles must lie in [0, pi]")
    gauss = -exponent_scale * phi * phi / (4 * t)
    sign = np.ones_like(phi)
    with np.errstate(divide="ignore"):
        if kind == "kernel_small_t":
            la = -0.5 * (d - 1) * np.log(t + math.pi - phi) - 0.5 * d * math.log(t) + gauss
        elif kind == "kernel_large_t":
            la = np.zeros_like(phi)
        elif kind == "derivative_small_t":
            la = (np.log(phi) + np.log(math.pi - phi) - 0.5 * (d + 1) * np.log(t + math.pi - phi)
                  - (0.5 * d + 1) * math.log(t) + gauss)
        else:
            la = -t * d + np.log(phi) + np.log(math.pi - phi)
    if kind.startswith("derivative"):
        sign = np.where((phi > 0) & (phi < math.pi), 1.0, 0.0)
    lv = LogValue._wrap(la, sign)
    return lv[0] if scalar else lv


# ---------------------------------------------------------------------------
# grids


def phi_scan_grid(n, closed=True):
    """n angles: uniform points plus geometric clusters toward 0 and pi.

    The closed grid contains 0, pi and the points 1e-6 and pi - 1e-6.
    """
    if n < 16:
        raise DomainError("phi grid needs at least 16 points")
    k = min(8, (n - 2) // 4)  # cluster points per end; at least half the grid stays uniform
    near = np.geomspace(1e-6, 0.05, k)
    cluster = np.concatenate([near, math.pi - near])
    m = n - cluster.size
    if closed:
        uni = np.linspace(0.0, math.pi, m)
    else:
        uni = np.linspace(0.0, math.pi, m + 2)[1:-1]
    grid = np.unique(np.concatenate([uni, cluster]))
    # collisions are measure-zero but keep the count exact
    while grid.size < n:
        gaps = np.diff(grid)
        i = int(np.argmax(gaps))
        grid = np.sort(np.append(grid, 0.5 * (grid[i] + grid[i + 1])))
    return grid


def t_scan_grid(t_min, t_max, points):
    if not 0 < t_min <= t_max:
        raise DomainError("need 0 < t_min <= t_max")
    return np.geomspace(t_min, t_max, points) if points > 1 else np.array([t_min])


# ---------------------------------------------------------------------------
# scans


@dataclass
class RatioReport:
    d: int
    kind: str
    t_grid: list
    phi_grid: list
    inf_ratio: float
    sup_ratio: float
    arg_inf: tuple
    arg_sup: tuple
    refinement_history: list = field(default_factory=list)
    all_negative: bool = True

    @property
    def drift(self):
        """Relative change of sup/inf between the last two refinement levels."""
        if len(self.refinement_history) < 2:
            return 0.0
        (_, i0, s0), (_, i1, s1) = self.refinement_history[-2:]
        if not all(math.isfinite(x) and x > 0 for x in (i0, s0, i1, s1)):
            return math.inf
        return abs((s1 / i1) / (s0 / i0) - 1.0)

    def summary(self):
        out = {k: v for k, v in asdict(self).items() if k not in ("t_grid", "phi_grid")}
        out["drift"] = self.drift
        out["t_points"] = len(self.t_grid)
        out["phi_points"] = len(self.phi_grid)
        return out

    def to_json(self, path=None, full=False):
        data = asdict(self) if full else self.summary()
        if full:
            data["drift"] = self.drift
        text = json.dumps(data, indent=2)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text


def _scan_row(d, t, phi, quantity, cfg, exponent_scale):
    if quantity == "kernel":
        lk = kernel_log(d, t, phi, cfg)
        env = envelope_log(d, t, phi, "kernel_small_t", exponent_scale)
    else:
        lk = kernel_derivative_log(d, t, phi, cfg)
        env = envelope_log(d, t, phi, "derivative_small_t", exponent_scale)
    return lk.log_abs, lk.sign, env.log_abs


def scan_grid(d, t_grid, phi_grid, quantity="kernel", cfg=None, threads=1, exponent_scale=1.0):
    """(log|value|, sign, log envelope) arrays of shape (len(t_grid), len(phi_grid)).

    Work is partitioned by time value; results are assembled in grid order, so
    the output does not depend on ``threads``.
    """
    phi_grid = np.asarray(phi_grid, dtype=float)
    job = lambda t: _scan_row(d, float(t), phi_grid, quantity, cfg, exponent_scale)
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(job, t_grid))
    else:
        rows = [job(t) for t in t_grid]
    lk = np.array([r[0] for r in rows])
    sg = np.array([r[1] for r in rows])
    le = np.array([r[2] for r in rows])
    return lk, sg, le


def _extremes(t_grid, phi_grid, log_ratio):
    i_min = np.unravel_index(np.argmin(log_ratio), log_ratio.shape)
    i_max = np.unravel_index(np.argmax(log_ratio), log_ratio.shape)
    with np.errstate(over="ignore", under="ignore"):
        lo, hi = float(np.exp(log_ratio[i_min])), float(np.exp(log_ratio[i_max]))
    return (
        lo,
        hi,
        (float(t_grid[i_min[0]]), float(phi_grid[i_min[1]])),
        (float(t_grid[i_max[0]]), float(phi_grid[i_max[1]])),
    )


def ratio_scan(d, t_range=(1e-6, 1.0), phi_count=512, cfg=None, t_points=13, refinements=1,
               quantity="kernel", threads=1, exponent_scale=1.0):
    """Empirical inf/sup of value/envelope over a (t, phi) grid, with grid doubling.

    ``quantity`` is 'kernel' (closed phi grid) or 'derivative' (open grid,
    ratio of -dK/dphi to the derivative envelope). Each refinement doubles the
    phi count and inserts the time midpoints (in log scale).
    """
    if quantity not in ("kernel", "derivative"):
        raise DomainError("quantity must be 'kernel' or 'derivative'")
    t_min, t_max = t_range
    history = []
    report = None
    n_phi, n_t = phi_count, t_points
    for _level in range(refinements + 1):
        t_grid = t_scan_grid(t_min, t_max, n_t)
        phi_grid = phi_scan_grid(n_phi, closed=(quantity == "kernel"))
        lk, sg, le = scan_grid(d, t_grid, phi_grid, quantity, cfg, threads, exponent_scale)
        log_ratio = lk - le
        lo, hi, arg_lo, arg_hi = _extremes(t_grid, phi_grid, log_ratio)
        history.append((int(t_grid.size * phi_grid.size), lo, hi))
        all_neg = bool(np.all(sg < 0)) if quantity == "derivative" else bool(np.all(sg > 0))
        report = RatioReport(d, "kernel_small_t" if quantity == "kernel" else "derivative_small_t",
                             t_grid.tolist(), phi_grid.tolist(), lo, hi, arg_lo, arg_hi,
                             list(history), all_neg)
        n_phi, n_t = 2 * n_phi, 2 * n_t - 1
    return report


def write_scan_csv(path_or_file, d, t_grid, phi_grid, cfg=None, threads=1):
    """Full scan grid as CSV rows d,t,phi,log_kernel,log_envelope,ratio (17 significant digits)."""
    lk, _sg, le = scan_grid(d, t_grid, phi_grid, "kernel", cfg, threads)
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        fmt = lambda x: format(float(x), ".17g")
        for i, t in enumerate(t_grid):
            ratio = np.exp(lk[i] - le[i])
            for j, ph in enumerate(phi_grid):
                w.writerow((d, fmt(t), fmt(ph), fmt(lk[i, j]), fmt(le[i, j]), fmt(ratio[j])))
    finally:
        if own:
            fh.close()
    return lk.size


# ---------------------------------------------------------------------------
# probes


def sharpness_probe(d, phi, t_seq, cfg=None):
    """r(t) = -4t [log K + (d/2) log t + ((d-1)/2) log(t + pi - phi)] / phi^2; tends to 1."""
    if not 0 < phi < math.pi:
        raise DomainError("probe angle must lie in (0, pi)")
    out = []
    for t in np.atleast_1d(np.asarray(t_seq, dtype=float)):
        lk = kernel_log(d, float(t), phi, cfg).log_abs
        out.append(-4 * t * (lk + 0.5 * d * math.log(t) + 0.5 * (d - 1) * math.log(t + math.pi - phi)) / phi**2)
    return np.array(out)


def antipodal_rate(d, t_seq, cfg=None):
    """m(t) = K_t^d(pi) t^((2d-1)/2) e^(pi^2/(4t)), computed in log scale."""
    out = []
    for t in np.atleast_1d(np.asarray(t_seq, dtype=float)):
        lk = kernel_log(d, float(t), math.pi, cfg).log_abs
        out.append(math.exp(lk + 0.5 * (2 * d - 1) * math.log(t) + math.pi**2 / (4 * t)))
    return np.array(out)


def large_t_bands(d, t_grid=None, phi_count=64, cfg=None):
    """Ranges of K and of -dK/dphi / (e^{-td} phi (pi - phi)) for t in [1, 5].

    Returns {'kernel': (lo, hi), 'derivative': (lo, hi), 'all_negative': bool}.
    """
    t_grid = np.linspace(1.0, 5.0, 9) if t_grid is None else np.asarray(t_grid, dtype=float)
    phi = phi_scan_grid(phi_count, closed=False)
    k_lo, k_hi, d_lo, d_hi = np.inf, -np.inf, np.inf, -np.inf
    negative = True
    for t in t_grid:
        lk = kernel_log(d, float(t), phi, cfg).log_abs
        k_lo, k_hi = min(k_lo, lk.min()), max(k_hi, lk.max())
        dv = kernel_derivative_log(d, float(t), phi, cfg)
        negative &= bool(np.all(dv.sign < 0))
        ratio = dv.log_abs - envelope_log(d, float(t), phi, "derivative_large_t").log_abs
        d_lo, d_hi = min(d_lo, ratio.min()), max(d_hi, ratio.max())
    return {
        "kernel": (float(np.exp(k_lo)), float(np.exp(k_hi))),
        "derivative": (float(np.exp(d_lo)), float(np.exp(d_hi))),
        "all_negative": negative,
    }


def is_decreasing(d, t, n=200, cfg=None):
    """Strict decrease of K_t^d on an n-point interior grid of (0, pi)."""
    phi = np.linspace(0.0, math.pi, n + 2)[1:-1]
    lk = kernel_log(d, t, phi, cfg).log_abs
    return bool(np.all(np.diff(lk) < 0))


def comparability_integral(N, t, phi, nodes=2000):
    """int_0^{(pi-phi)/2} [g(g+phi)]^{(N-3)/2} e^{-g(g+phi)/t} (g+phi) dg, divided by [t ^ (pi-phi)]^{(N-1)/2}.

    Computed in the variable s = g (g + phi)/t on log-spaced panels; the
    returned ratio should stay in a fixed band.
    """
    from .quadrature import panel_nodes

    S = (math.pi - phi) * (math.pi + phi) / (4 * t)
    a = 0.5 * (N - 3)
    lo = min(1.0, S) * 1e-30 ** (1.0 / (a + 1.0))
    x, w = panel_nodes(np.linspace(math.log(lo), math.log(S), nodes // 16 + 1), 16)
    s = np.exp(x)
    root = np.sqrt(phi * phi + 4 * t * s)
    g = 2 * t * s / (phi + root)
    # dg = t ds / root, ds = s dx
    integrand = (g * (g + phi)) ** a * np.exp(-s) * (g + phi) * t / root * s
    value = float(np.dot(w, integrand))
    return value / min(t, math.pi - phi) ** (0.5 * (N - 1))
