"""Command line entry point: ``nmflow run|sweep|verify <config>``."""

import argparse
import sys
import warnings

from .errors import DomainError, NumericalError
from .scenario import (
    ConfigError, bundled_scenarios, format_json, load_config, run_scenario, run_sweep, verify,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _parser():
    ap = argparse.ArgumentParser(prog="nmflow", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name, text in (("run", "run one scenario and write its trajectory and report"),
                       ("sweep", "run the cartesian parameter sweep of a scenario"),
                       ("verify", "run the oracles and relation residual only")):
        p = sub.add_parser(name, help=text)
        p.add_argument("config", help="scenario file (.cfg TOML), a report .json or a bundled "
                                      "scenario name: " + ", ".join(bundled_scenarios()))
        if name != "verify":
            p.add_argument("-o", "--out-dir", default=".", help="output directory (default: .)")
    return ap


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "sweep" and not cfg.sweep:
            raise ConfigError("scenario has no [sweep] section", args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            if args.command == "run":
                res = run_scenario(cfg, args.out_dir)
                print(f"{cfg.name}: {res.report['classification']}")
            elif args.command == "sweep":
                rows = run_sweep(cfg, args.out_dir)
                failed = sum(1 for r in rows if r["error"])
                print(f"{cfg.name}: {len(rows)} points, {failed} failed")
            else:
                summary = verify(cfg)
                sys.stdout.write(format_json(summary))
                return EXIT_OK if summary["pass"] else EXIT_NUMERIC
    except (NumericalError, DomainError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
