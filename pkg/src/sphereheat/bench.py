"""Throughput of the evaluation paths, compiled kernels against the numpy fallback."""
from __future__ import annotations

import math
import time
import warnings

import numpy as np

from . import _backend
from .bounds import phi_scan_grid, scan_grid, t_scan_grid
from .sphere_kernel import kernel_log

TARGET_RATE = 2e5  # evaluations per second at d = 3, t = 0.1

CASES = {
    "quick": [(1, 0.1, "theta"), (3, 0.1, "theta"), (5, 0.1, "theta"), (2, 0.1, "reduction"),
              (2, 0.01, "reduction"), (3, 2.0, "series")],
    "full": [(d, t, m) for d in (1, 3, 5, 7) for t in (0.001, 0.1) for m in ("theta",)]
    + [(d, t, "reduction") for d in (2, 4, 6) for t in (0.001, 0.1)]
    + [(d, 2.0, "series") for d in (2, 3, 6)],
}


def _rate(d, t, method, n, repeats):
    phi = np.linspace(0.0, math.pi, n)
    kernel_log(d, t, phi[:8], method=method)  # warm caches
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        kernel_log(d, t, phi, method=method)
        best = min(best, time.perf_counter() - t0)
    return n / best


def available_backends():
    """Backends usable in this process, compiled first (honours SPHEREHEAT_PURE)."""
    return ["cython", "python"] if _backend.compiled_kernels is not None else ["python"]


def run(profile="quick", points=None, backends=None):
    """List of dicts: backend, d, t, method, points, evals_per_second."""
    if profile not in CASES:
        raise ValueError(f"unknown bench profile {profile!r}")
    n_default = 20_000 if profile == "quick" else 100_000
    rows = []
    previous = _backend.name()
    try:
        for backend in backends or available_backends():
            _backend.use(backend)
            for d, t, method in CASES[profile]:
                n = points or (n_default if method != "reduction" else n_default // 20)
                rate = _rate(d, t, method, n, 3)
                rows.append({"backend": backend, "d": d, "t": t, "method": method, "points": n,
                             "evals_per_second": rate})
    finally:
        _backend.use(previous)
    return rows


def scan_timing(points=1_000_000, d=3, threads=1):
    """Seconds for a ratio scan of about ``points`` grid cells (t in [1e-6, 1])."""
    n_t = 100
    n_phi = max(16, points // n_t)
    t0 = time.perf_counter()
    scan_grid(d, t_scan_grid(1e-6, 1.0, n_t), phi_scan_grid(n_phi), threads=threads)
    return time.perf_counter() - t0


def check_target(rows):
    """Warn when the headline rate (compiled backend, d = 3, t = 0.1) misses the soft target."""
    for r in rows:
        if r["d"] == 3 and r["t"] == 0.1 and r["method"] == "theta" and r["backend"] == rows[0]["backend"]:
            if r["evals_per_second"] < TARGET_RATE:
                warnings.warn(
                    f"d=3, t=0.1 throughput {r['evals_per_second']:.3g}/s is below the {TARGET_RATE:.0e}/s target",
                    RuntimeWarning, stacklevel=2,
                )
                return False
            return True
    return None
