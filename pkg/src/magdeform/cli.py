"""Command-line entry point: ``magdeform <experiment> --config FILE --out DIR``.

Exit codes: 0 when every report row is ``ok`` or ``warning:*``, 2 when any
row records a resolution error, 1 for unreadable or invalid configurations.
"""

import argparse
import logging
import sys
import time

from .experiments import run_experiment
from .report import EXPERIMENTS, ConfigError, ExperimentConfig, load_config, sweep_table

__all__ = ["main", "build_parser"]

log = logging.getLogger("magdeform")


class _Parser(argparse.ArgumentParser):
    # usage errors are configuration errors, not resolution errors
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(prog="magdeform", description="Magnetic deformation experiments.")
    sub = parser.add_subparsers(dest="experiment", required=True, metavar="EXPERIMENT",
                                parser_class=_Parser)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", metavar="PATH", help="UTF-8 key-value (YAML) config file")
        p.add_argument("--out", metavar="DIR", default=".", help="output directory (default: .)")
        p.add_argument("--serial", action="store_true", help="force the deterministic serial order")
        p.add_argument("--tolerance-scale", metavar="FLOAT", type=float, default=1.0,
                       help="multiply every acceptance tolerance by this factor")
        p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        if args.config is None:
            config = ExperimentConfig.from_mapping({}, args.experiment)
        else:
            config = load_config(args.config, args.experiment)
        start = time.perf_counter()
        result = run_experiment(config, serial=args.serial, tolerance_scale=args.tolerance_scale)
    except ConfigError as exc:
        print(f"magdeform: config error: {exc}", file=sys.stderr)
        return 1
    log.info("%s finished in %.1f s", args.experiment, time.perf_counter() - start)
    paths = sweep_table(result, args.out, config.report, config.summary, config.plot)
    for path in paths:
        log.info("wrote %s", path)
    code = result.exit_code
    if code:
        print("magdeform: resolution error in at least one row", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
