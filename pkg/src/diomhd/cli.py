"""Command-line front end.

Exit codes: 0 ok, 1 a verification or property check failed, 2 invalid
configuration, 3 blow-up abort, 4 I/O failure, 5 invalid Diophantine
certificate without ``--allow-resonant``.
"""

import argparse
import json
import logging
import os
import sys
from dataclasses import replace

from .config import OUTPUT_DIR_ENV, load_config
from .errors import BlowUpError, ConfigError, InvalidCertificateError, LatticeMismatchError

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_IO = 4
EXIT_CERTIFICATE = 5

log = logging.getLogger("diomhd")


def _add_config_args(p):
    p.add_argument("--config", "-c", help="key = value config file")
    p.add_argument("--set", "-s", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
    p.add_argument("--output-dir", help=f"output directory (beats ${OUTPUT_DIR_ENV} and the config)")
    p.add_argument("--allow-resonant", action="store_true", help="proceed without a valid Diophantine certificate")


def _config(args):
    overrides = list(args.set)
    if args.allow_resonant:
        overrides.append("allow_resonant = true")
    cfg = load_config(args.config, overrides)
    if getattr(args, "output_dir", None):
        os.environ[OUTPUT_DIR_ENV] = args.output_dir
    return cfg


def cmd_simulate(args):
    from .checkpoint import checkpoint_read
    from .runner import run_simulation

    cfg = replace(_config(args), mode="simulate")
    cfg.validate()
    init = checkpoint_read(args.restart, modes_per_dim=cfg.modes_per_dim) if args.restart else None
    csv_path, summary, _ = run_simulation(cfg, initial_state=init, checkpoint_path=args.checkpoint)
    mon = summary.monitor
    print(f"wrote {csv_path}")
    print(f"steps={summary.steps} wall={summary.wall_clock_s:.1f}s A={summary.A:.6g} "
          f"sup_HN={summary.sup_HN:.6e} violations={mon.get('n_violations', 'n/a')}")
    if not summary.decay_guarantee:
        print("warning: resonant background, no decay guarantee")
    for key, fit in summary.fits.items():
        if isinstance(fit, dict) and "exponent" in fit:
            exp = "n/a" if fit["exponent"] is None else f"{fit['exponent']:.4f}"
            print(f"fit {key}: exponent={exp} status={fit['status']} predicted={fit['predicted']:.4f}")
    return EXIT_OK


def cmd_verify(args):
    from .verify import run_verify

    results = run_verify(count=args.count, modes_per_dim=args.modes)
    ok = True
    for r in results:
        print(f"{r.name:20s} {r.passed:5d}/{r.total:<5d} {'PASS' if r.ok else 'FAIL'}")
        for label in r.failures[:5]:
            print(f"    failed: {label}")
        ok &= r.ok
    print("verify:", "PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _parse_vector(text):
    from .config import RunConfig

    return RunConfig(n=text).background_vector()


def cmd_diophantine(args):
    from .diophantine import diophantine_constant

    n = _parse_vector(args.n)
    rows = []
    for K in args.K:
        cert = diophantine_constant(n, args.r, K)
        rows.append(cert.to_dict())
        print(f"K={K:6d} c_K={cert.c_K:.17g} argmin={cert.argmin_k} {'valid' if cert.valid else 'INVALID'}")
    if args.json:
        print(json.dumps(rows, indent=2))
    if any(row["c_K"] <= 0 for row in rows) and not args.allow_resonant:
        return EXIT_CERTIFICATE
    return EXIT_OK


def cmd_cancellations(args):
    from .mhd import cancellation_suite
    from .random_fields import random_state
    from .spectral import get_lattice

    lat = get_lattice(args.modes)
    n = _parse_vector(args.n)
    worst = {}
    for seed in range(args.seed, args.seed + args.count):
        st = random_state(lat, seed)
        for name, val in cancellation_suite(st.u, st.b, n, m=args.m):
            worst[name] = max(worst.get(name, 0.0), val)
    ok = True
    for name, val in worst.items():
        good = val <= args.tol
        ok &= good
        print(f"{name:36s} max={val:.3e} {'ok' if good else 'FAIL'}")
    print("cancellations:", "PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_fit(args):
    from .fitting import fit_decay, norm_pair
    from .runner import read_timeseries

    cols = read_timeseries(args.csv)
    q = args.quantity
    if q.startswith("gamma:"):
        selector = norm_pair(float(q.split(":", 1)[1]))
    elif q in cols:
        selector = q
    else:
        raise ConfigError(f"unknown quantity {q!r}; columns: {', '.join(cols)}", "quantity")
    fit = fit_decay(cols, selector, t_min=args.t_min)
    if fit.status == "below floor":
        print("below floor: decay faster than measurable")
    else:
        print(f"exponent={fit.exponent:.6f} stderr={fit.stderr:.2e} n={fit.n_samples} status={fit.status}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="diomhd", description="Diophantine-background MHD decay experiments")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run a simulation, write CSV time series and JSON summary")
    _add_config_args(s)
    s.add_argument("--restart", help="start from this checkpoint instead of synthesized data")
    s.add_argument("--checkpoint", help="write the final state to this checkpoint file")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("verify", help="run the property suites of every module")
    s.add_argument("--count", type=int, default=10, help="random samples per property")
    s.add_argument("--modes", "-M", type=int, default=32)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("diophantine", help="certify c_K for a background vector")
    s.add_argument("--n", default="golden", help='"golden", "noble:<seed>" or "a,b"')
    s.add_argument("--r", type=float, default=2.0)
    s.add_argument("--K", type=int, nargs="+", default=[50, 100, 500, 1000])
    s.add_argument("--json", action="store_true")
    s.add_argument("--allow-resonant", action="store_true")
    s.set_defaults(func=cmd_diophantine)

    s = sub.add_parser("cancellations", help="residuals of the energy-estimate cancellations")
    s.add_argument("--count", type=int, default=50)
    s.add_argument("--modes", "-M", type=int, default=32)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--n", default="golden")
    s.add_argument("--m", type=int, default=3, help="highest derivative order")
    s.add_argument("--tol", type=float, default=1e-11)
    s.set_defaults(func=cmd_cancellations)

    s = sub.add_parser("fit", help="fit a power-law decay exponent to a CSV column")
    s.add_argument("csv")
    s.add_argument("--quantity", "-q", default="gamma:5.5", help='column name or "gamma:<g>"')
    s.add_argument("--t-min", type=float, default=5.0)
    s.set_defaults(func=cmd_fit)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except InvalidCertificateError as exc:
        print(f"error: {exc} (pass --allow-resonant to proceed)", file=sys.stderr)
        return EXIT_CERTIFICATE
    except (ConfigError, LatticeMismatchError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BlowUpError as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        # remaining ValueErrors come from argument values (vectors, fit windows)
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
