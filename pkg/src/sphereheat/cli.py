"""Command-line front end: ``sphereheat {eval,scan,verify,sample,selftest,bench,phi}``.

Configuration precedence, lowest to highest: built-in defaults, the INI file
named by ``$SPHEREHEAT_CONFIG``, the file given with ``--config``, then
command-line flags (``--set key=value`` and the dedicated options).

Exit codes: 0 success, 1 failed verification, 2 invalid input, 3 capability
limit, 4 accuracy failure, 5 I/O error. Data goes to stdout, diagnostics to
stderr.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import json
import math
import os
import sys
import time

import numpy as np

from .config import EvalConfig, ThetaConfig, config_keys
from .errors import AccuracyError, CapabilityError, DomainError, IntegrityError

CONFIG_ENV = "SPHEREHEAT_CONFIG"
EXIT_FAIL, EXIT_DOMAIN, EXIT_CAPABILITY, EXIT_ACCURACY, EXIT_IO = 1, 2, 3, 4, 5
RUN_KEYS = {"format": str, "output": str, "threads": int, "seed": int}


class ConfigError(DomainError):
    pass


# ---------------------------------------------------------------------------
# configuration


def _field_types():
    types = {f.name: f.type for f in dataclasses.fields(EvalConfig) if f.name != "theta"}
    types.update({"theta_" + f.name: f.type for f in dataclasses.fields(ThetaConfig)})
    return types


def _coerce(key, raw):
    if key in RUN_KEYS:
        return RUN_KEYS[key](raw)
    kind = str(_field_types()[key])
    if "bool" in kind:
        low = str(raw).strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    if "tuple" in kind:
        parts = [float(p) for p in str(raw).replace("(", "").replace(")", "").split(",")]
        return tuple(parts)
    if "int" in kind:
        return int(float(raw))
    return float(raw)


def read_ini(path):
    """Flat {key: raw string} from an INI file; a section header is optional."""
    parser = configparser.ConfigParser()
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    if not text.lstrip().startswith("["):
        text = "[sphereheat]\n" + text
    parser.read_string(text)
    out = {}
    for section in parser.sections():
        out.update(parser[section])
    return out


def build_config(overrides):
    """(EvalConfig, run options) from a flat mapping; unknown keys are rejected."""
    allowed = config_keys() | set(RUN_KEYS)
    unknown = sorted(set(overrides) - allowed)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    values = {}
    for k, v in overrides.items():
        try:
            values[k] = _coerce(k, v)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{k}: {exc}") from exc
    theta = ThetaConfig(**{k[6:]: v for k, v in values.items() if k.startswith("theta_")})
    cfg = EvalConfig(theta=theta, **{k: v for k, v in values.items() if k in config_keys() and not k.startswith("theta_")})
    run = {"format": "json", "output": None, "threads": os.cpu_count() or 1, "seed": 0}
    run.update({k: v for k, v in values.items() if k in RUN_KEYS})
    if run["format"] not in ("json", "csv"):
        raise ConfigError("format must be 'json' or 'csv'")
    return cfg, run


def load_config(args):
    merged = {}
    env_path = os.environ.get(CONFIG_ENV)
    if env_path:
        merged.update(read_ini(env_path))
    if getattr(args, "config", None):
        merged.update(read_ini(args.config))
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        merged[k.strip()] = v.strip()
    for key in ("format", "threads", "seed"):
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    if getattr(args, "out", None):
        merged["output"] = args.out
    return build_config(merged)


# ---------------------------------------------------------------------------
# output helpers


def _g17(x):
    return format(float(x), ".17g")


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _emit_record(record, fmt, path=None):
    fh, own = _open_out(path)
    try:
        if fmt == "json":
            fh.write(json.dumps(record) + "\n")
        else:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(record.keys())
            w.writerow([_g17(v) if isinstance(v, float) else v for v in record.values()])
    finally:
        if own:
            fh.close()


# ---------------------------------------------------------------------------
# commands


def cmd_eval(args, cfg, run):
    from .sphere_kernel import evaluate, kernel_derivative_log

    phi = math.radians(args.angle) if args.degrees else args.angle
    if args.derivative:
        lv = kernel_derivative_log(args.dim, args.time, phi, cfg, args.method)
        # the derivative is read off K^{d+2}; report how that was evaluated
        info = evaluate(args.dim + 2, args.time, phi, cfg, args.method)[1]
        method, nodes, err = info.method, info.nodes, info.est_rel_err
    else:
        lv, info = evaluate(args.dim, args.time, phi, cfg, args.method)
        method, nodes, err = info.method, info.nodes, info.est_rel_err
    record = {"d": args.dim, "t": args.time, "phi": phi}
    if args.log:
        record.update({"log_value": float(lv.log_abs), "sign": int(lv.sign)})
    else:
        value = float(lv.value)
        if value == 0.0 and lv.sign != 0:
            print(f"warning: value underflows double precision (log value {float(lv.log_abs):.10g}); use --log",
                  file=sys.stderr)
        record["value"] = value
    record.update({"quantity": "derivative" if args.derivative else "kernel", "method": method,
                   "nodes": int(nodes), "est_rel_err": float(err)})
    _emit_record(record, run["format"], run["output"])
    return 0


def cmd_scan(args, cfg, run):
    from .bounds import phi_scan_grid, t_scan_grid, write_scan_csv

    t_grid = t_scan_grid(args.t_min, args.t_max, args.t_points)
    if args.phi_points >= 16:
        phi_grid = phi_scan_grid(args.phi_points)
    elif args.phi_points >= 2:
        phi_grid = np.linspace(0.0, math.pi, args.phi_points)
    else:
        raise DomainError("--phi-points must be at least 2")
    fh, own = _open_out(run["output"])
    try:
        write_scan_csv(fh, args.dim, t_grid, phi_grid, cfg, threads=run["threads"])
    finally:
        if own:
            fh.close()
    return 0


def _parse_dims(text):
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in text.split(",") if x.strip()]


def cmd_verify(args, cfg, run):
    from .verify import run_verification

    dims = _parse_dims(args.dims)
    summary = run_verification(dims, args.profile, cfg, threads=run["threads"],
                               exponent_scale=args.envelope_exponent_scale)
    for row in summary["checks"]:
        print(f"{'PASS' if row['passed'] else 'FAIL'}  {row['name']:<40s} {row['detail']}", file=sys.stderr)
    _emit_record_json(summary, run["output"])
    return 0 if summary["passed"] else EXIT_FAIL


def _emit_record_json(data, path):
    fh, own = _open_out(path)
    try:
        fh.write(json.dumps(data, indent=2) + "\n")
    finally:
        if own:
            fh.close()


def cmd_sample(args, cfg, run):
    from .bm_sampler import angle_cdf, make_rng, sample_path

    rng = make_rng(run["seed"])
    cdf = angle_cdf(args.dim, args.time, cfg=cfg)
    path = sample_path(args.dim, args.time, args.n, rng, cdf=cdf)
    fh, own = _open_out(run["output"])
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step"] + [f"x{i}" for i in range(args.dim + 1)])
        for k, row in enumerate(path):
            w.writerow([k] + [_g17(v) for v in row])
    finally:
        if own:
            fh.close()
    return 0


def cmd_selftest(args, cfg, run):
    from .verify import selftest

    results = selftest(cfg)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<40s} {detail}", file=sys.stderr)
    _emit_record_json({"passed": all(r[1] for r in results),
                       "checks": [{"name": n, "passed": ok, "detail": d} for n, ok, d in results]}, run["output"])
    return 0 if all(r[1] for r in results) else EXIT_FAIL


def cmd_bench(args, cfg, run):
    import warnings

    from . import bench

    rows = bench.run(args.profile, points=args.points)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        target_ok = bench.check_target(rows)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    out = {"rows": rows, "target_evals_per_second": bench.TARGET_RATE, "target_met": target_ok}
    if args.profile == "full":
        out["scan_1e6_seconds"] = bench.scan_timing(threads=run["threads"])
    print(f"{'backend':<8} {'d':>3} {'t':>8} {'method':<10} {'evals/s':>12}", file=sys.stderr)
    for r in rows:
        print(f"{r['backend']:<8} {r['d']:>3} {r['t']:>8g} {r['method']:<10} {r['evals_per_second']:>12.4g}",
              file=sys.stderr)
    _emit_record_json(out, run["output"])
    return 0


def cmd_phi(args, cfg, run):
    from .trig_algebra import phi_table

    print(phi_table(args.order, cap=max(args.order, cfg.order_cap)).format())
    return 0


# ---------------------------------------------------------------------------


def build_parser():
    # shared options are accepted before or after the subcommand
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="INI config file (overrides $%s)" % CONFIG_ENV)
    common.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one config key (repeatable)")
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--threads", type=int, help="worker threads for scans (default: all cores)")
    common.add_argument("--seed", type=int)
    common.add_argument("-v", "--verbose", action="store_true", help="report elapsed time on stderr")
    p = argparse.ArgumentParser(prog="sphereheat", parents=[common],
                                description="Heat kernel on spheres: evaluation, bounds, sampling.")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", parents=[common], help="evaluate K_t^d(phi) or its derivative")
    e.add_argument("--dim", type=int, required=True)
    e.add_argument("--time", type=float, required=True)
    e.add_argument("--angle", type=float, required=True)
    e.add_argument("--method", choices=("auto", "theta", "reduction", "series"), default="auto")
    e.add_argument("--log", action="store_true", help="report log value and sign")
    e.add_argument("--degrees", action="store_true", help="angle given in degrees")
    e.add_argument("--derivative", action="store_true", help="evaluate d/dphi K instead")
    e.add_argument("--out")
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("scan", parents=[common], help="write the kernel/envelope grid as CSV")
    s.add_argument("--dim", type=int, required=True)
    s.add_argument("--t-min", type=float, default=1e-6)
    s.add_argument("--t-max", type=float, default=1.0)
    s.add_argument("--t-points", type=int, default=13)
    s.add_argument("--phi-points", type=int, default=512)
    s.add_argument("--out")
    s.set_defaults(func=cmd_scan)

    v = sub.add_parser("verify", parents=[common], help="run the bound-verification suite")
    v.add_argument("--dims", default="1..6")
    v.add_argument("--profile", choices=("quick", "full"), default="quick")
    v.add_argument("--envelope-exponent-scale", type=float, default=1.0, help=argparse.SUPPRESS)
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    m = sub.add_parser("sample", parents=[common], help="simulate a Brownian path and dump it as CSV")
    m.add_argument("--dim", type=int, required=True)
    m.add_argument("--time", type=float, required=True)
    m.add_argument("--n", type=int, required=True, help="number of steps")
    m.add_argument("--out")
    m.set_defaults(func=cmd_sample)

    st = sub.add_parser("selftest", parents=[common], help="run the module invariants")
    st.add_argument("--out")
    st.set_defaults(func=cmd_selftest)

    b = sub.add_parser("bench", parents=[common], help="evaluation throughput per backend, method and dimension")
    b.add_argument("--profile", choices=("quick", "full"), default="quick")
    b.add_argument("--points", type=int, default=None)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)

    ph = sub.add_parser("phi", parents=[common], help="print the exact Phi_{N,j} table")
    ph.add_argument("--order", type=int, required=True)
    ph.set_defaults(func=cmd_phi)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        cfg, run = load_config(args)
        code = args.func(args, cfg, run)
        if getattr(args, "verbose", False):
            print(f"{args.command}: {time.perf_counter() - start:.3f} s", file=sys.stderr)
        return code
    except CapabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    except (AccuracyError, IntegrityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ACCURACY
    except (DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
