"""Acceptance criteria 1-11, one test each; every test reports a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the lines are collected in the
"acceptance criteria" section of the terminal summary.
"""
import os
import time
import warnings


from sphereheat import bench, verify
from sphereheat.errors import ConvergenceWarning

THREADS = os.cpu_count() or 1


def _timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t0


def test_criterion_01_theta_dual_identity(report):
    c, sec = _timed(verify.check_theta_dual, 20, 50, 1e-12)
    ok = c.passed and sec < 1.0
    report(1, ok, f"theta vs dual series, {c.detail}, {sec:.2f} s (< 1 s)")
    assert ok


def test_criterion_02_odd_oracle_equivalence(report):
    c, sec = _timed(verify.check_oracle, [3, 5, 7], 10, 25, 1e-8)
    ok = c.passed and sec < 10.0
    report(2, ok, f"closed form vs spectral series, {c.detail}, {sec:.1f} s (< 10 s)")
    assert ok


def test_criterion_03_even_oracle_equivalence(report):
    c, sec = _timed(verify.check_oracle, [2, 4, 6], 10, 25, 1e-6)
    ok = c.passed and sec < 60.0
    report(3, ok, f"reduction vs spectral series, {c.detail}, {sec:.1f} s (< 60 s)")
    assert ok


def test_criterion_04_three_sphere_formula(report):
    c = verify.check_s3_closed_form(12, 25, 1e-10)
    report(4, c.passed, f"S^3 explicit lattice formula, t in [1e-4, 2]: {c.detail}")
    assert c.passed


def test_criterion_05_mass(report):
    c = verify.check_mass(range(1, 7), (1e-3, 0.1, 1.0, 5.0), 1e-8)
    report(5, c.passed, f"|mass - 1| per dimension: {c.detail}")
    assert c.passed


def test_criterion_06_semigroup(report):
    c = verify.check_semigroup([2, 3], ((0.2, 0.3), (0.5, 0.5)), 1e-6)
    report(6, c.passed, f"convolution residual: {c.detail}")
    assert c.passed


def test_criterion_07_two_sided_bound(report):
    t0 = time.perf_counter()
    scans = [verify.check_ratio_scan(d, 512, 13, THREADS) for d in range(1, 7)]
    sharp = verify.check_sharpness([1, 2, 3, 5], (1.0, 2.0, 3.0), 1e-5, (0.995, 1.005))
    sec = time.perf_counter() - t0
    ok = all(c.passed for c in scans) and sharp.passed and sec < 180.0
    lo = min(c.data["inf_ratio"] for c in scans)
    hi = max(c.data["sup_ratio"] for c in scans)
    drift = max(c.data["drift"] for c in scans)
    report(7, ok, f"ratio in [{lo:.4g}, {hi:.4g}], max drift {drift:.1e}; {sharp.detail}; {sec:.0f} s (< 180 s)")
    for c in scans:
        print("   ", c.name, c.detail)
    assert ok


def test_criterion_08_derivative(report):
    checks = [verify.check_derivative(d, 256, 9, THREADS) for d in range(1, 7)]
    ok = all(c.passed for c in checks)
    lo = min(c.data["inf_ratio"] for c in checks)
    hi = max(c.data["sup_ratio"] for c in checks)
    drift = max(c.data["drift"] for c in checks)
    report(8, ok, f"-dK/dphi > 0 on interior grids; small-t ratio in [{lo:.3g}, {hi:.3g}], "
                  f"max drift {drift:.1e}; large-t bands bounded")
    for c in checks:
        print("   ", c.name, c.detail)
    assert ok


def test_criterion_09_antipodal_rate(report):
    c = verify.check_antipodal([1, 2, 3], 9, 0.10, 1e-3)
    report(9, c.passed, f"variation over t in [1e-5, 1e-3]: {c.detail}")
    assert c.passed


def test_criterion_10_sampler(report):
    c, sec = _timed(verify.check_sampler, (2, 3), (0.1, 1.0), 100_000)
    ok = c.passed and sec < 30.0
    report(10, ok, f"{c.detail}, {sec:.1f} s (< 30 s)")
    assert ok


def test_criterion_11_performance(report):
    rows = bench.run("quick", points=20_000, backends=bench.available_backends()[:1])
    rate = next(r["evals_per_second"] for r in rows if r["d"] == 3 and r["t"] == 0.1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        scan_sec = bench.scan_timing(1_000_000, threads=THREADS)
    ok = rate >= bench.TARGET_RATE and scan_sec < 5.0
    detail = (f"{rate:.3g} evals/s at d=3, t=0.1 (target {bench.TARGET_RATE:.0e}), "
              f"1e6-point scan {scan_sec:.2f} s (target 5 s)")
    report(11, ok, detail, soft=True)
    if not ok:
        warnings.warn(f"performance below the soft target: {detail}", RuntimeWarning)
