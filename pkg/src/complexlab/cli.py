"""``lab <kind> --config FILE [--workers N] [--out DIR]``.

Exit status: 0 all checks pass, 1 a check failed, 2 configuration error.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .config import KINDS, ConfigError, load
from .runner import fmt, run

log = logging.getLogger("complexlab")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lab", description=__doc__.splitlines()[0])
    p.add_argument("kind", choices=KINDS)
    p.add_argument("--config", required=True, help="experiment config file")
    p.add_argument("--workers", type=int, default=None, help="worker threads (overrides config)")
    p.add_argument("--out", default=None, help="output directory (overrides config)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load(args.config, kind=args.kind)
        if args.workers is not None:
            cfg = cfg.replace(workers=args.workers)
        if args.out is not None:
            cfg = cfg.replace(output=args.out)
        report = run(cfg, cfg.output)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    for c in report.checks:
        vals = " ".join(f"{k}={fmt(v)}" for k, v in c.values.items())
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name} {vals}".rstrip())
    print(f"wrote {cfg.output}/report.json")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
