"""``msf-lab`` command line entry point.

Exit codes: 0 success, 2 invalid config or patch request, 3 size cap exceeded.
The worker count comes from ``MSF_LAB_WORKERS`` and never changes results.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .errors import CapExceeded, ConfigError
from .experiment import KINDS, ExperimentConfig, run_experiment

log = logging.getLogger("msf_lab")

EXIT_OK, EXIT_INVALID, EXIT_CAP = 0, 2, 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="msf-lab", description="Spanning forest experiments on Cayley graphs.")
    sub = p.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        sp = sub.add_parser(kind)
        sp.add_argument("--config", required=True, help="INI experiment config")
        sp.add_argument("--seed", type=int, help="override [experiment] seed")
        sp.add_argument("--trials", type=int, help="override [experiment] trials")
        sp.add_argument("--out", help="CSV output path (default: stdout)")
        sp.add_argument("--audit", help="JSON-lines audit path (relative-msf)")
        sp.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = ExperimentConfig.load(args.config)
        if cfg.kind != args.command:
            # the subcommand wins; a config written for another kind is still usable
            log.info("config kind %s overridden by subcommand %s", cfg.kind, args.command)
            cfg.kind = args.command
        if args.seed is not None:
            cfg.seed = args.seed
        if args.trials is not None:
            cfg.trials = args.trials
        if args.out:
            cfg.csv = args.out
        if args.audit:
            cfg.audit_path = args.audit
        record = run_experiment(cfg)
    except ConfigError as exc:
        print(f"msf-lab: invalid config: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except CapExceeded as exc:
        print(f"msf-lab: cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    log.info("%s: %d rows in %.2fs", record.kind, len(record.rows), record.wall_clock)
    if cfg.csv:
        record.write(cfg.csv, cfg.audit_path or None)
    else:
        sys.stdout.write(record.to_csv())
        if cfg.audit_path:
            record.write(None, cfg.audit_path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
