"""Command line entry point: ``armrom {offline,online,bench,report}``."""
import argparse
import json
import logging
import sys

from .errors import ArmError, ConfigError, ReportError
from .pipeline import config as cfgmod
from .pipeline import core

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3


def _mu(text):
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"--mu expects 'a,b', got {text!r}")
    if len(vals) != 2:
        raise argparse.ArgumentTypeError(f"--mu expects two comma-separated values, got {text!r}")
    return vals


def build_parser():
    ap = argparse.ArgumentParser(
        prog="armrom",
        description="Adaptive reduced-order models: offline training, online solves, benchmarks, reports.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("offline", "online", "bench", "report"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="JSON run configuration")
        sp.add_argument("--out", help="output directory (overrides the config)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--k", type=int)
        sp.add_argument("--m", type=int)
        sp.add_argument("--sigma", type=float)
        sp.add_argument("--method")
        sp.add_argument("--workers", type=int)
        if name == "online":
            sp.add_argument("--mu", type=_mu, required=True, help="parameter as 'a,b'")
        if name == "report":
            sp.add_argument("--bench", nargs="*", help="bench CSV files (default: <out>/bench.csv)")
            sp.add_argument("--no-spectra", action="store_true",
                            help="skip singular-value curves (they need the snapshot store)")
    return ap


def _configure(args):
    cfg = cfgmod.load(args.config)
    over = {"out": args.out, "seed": args.seed, "k": args.k, "m": args.m, "sigma": args.sigma,
            "workers": args.workers}
    if args.method:
        over["methods"] = [args.method]
    try:
        cfg = cfg.with_overrides(**over)
        cfg.__post_init__()
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def run(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = _configure(args)
        if args.command == "offline":
            store = core.offline(cfg)
            print(store.manifest_path)
        elif args.command == "online":
            _, info = core.online(cfg, args.mu, cfg.methods[0])
            print(json.dumps(info, sort_keys=True))
        elif args.command == "bench":
            print(core.bench(cfg))
        else:
            paths = args.bench or [f"{cfg.out}/bench.csv"]
            print(core.report(paths, cfg.out, None if args.no_spectra else cfg))
    except (ConfigError, ReportError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArmError, FileNotFoundError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def main():
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    sys.exit(run())


if __name__ == "__main__":
    main()
