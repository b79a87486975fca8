"""Command line entry point: ``oqsthermo run|defaults|snapshot-generators``."""
from __future__ import annotations

import argparse
import sys

from .experiments import (
    EXIT_CONFIG,
    ConfigError,
    Scenario,
    config_to_toml,
    default_config,
    load_config,
    run,
)


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="oqsthermo", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario from a TOML config")
    r.add_argument("--config", help="TOML file; omitted keys take default values")
    r.add_argument("--scenario", choices=[s.value for s in Scenario])
    r.add_argument("--t-max", type=float, help="horizon in units of 1/Delta")
    r.add_argument("--dt", type=float, help="sampling step in units of 1/Delta")
    r.add_argument("--n-points", type=int, help="grid size (fig1_scan, tabulate_bath)")
    r.add_argument("--seed", type=int)
    r.add_argument("--out", help="output directory")

    d = sub.add_parser("defaults", help="print the default config as TOML")
    d.add_argument("--scenario", choices=[s.value for s in Scenario], default=Scenario.TIMESERIES.value)

    s = sub.add_parser("snapshot-generators", help="write both 4x4 generator matrices to CSV")
    s.add_argument("--config")
    s.add_argument("--out")
    return ap


def _resolve(args) -> object:
    cfg = load_config(args.config) if args.config else default_config()
    changes = {}
    for flag, field in (("scenario", "scenario"), ("t_max", "t_max"), ("dt", "dt"),
                        ("n_points", "n_points"), ("seed", "seed"), ("out", "output_dir")):
        value = getattr(args, flag, None)
        if value is not None:
            changes[field] = Scenario(value) if field == "scenario" else value
    return cfg.replace(**changes)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "defaults":
        sys.stdout.write(config_to_toml(default_config(args.scenario)))
        return 0
    try:
        cfg = _resolve(args)
        if args.command == "snapshot-generators":
            cfg = cfg.replace(scenario=Scenario.SNAPSHOT_GENERATORS)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
