"""``hdustat`` command-line interface.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical degeneracy.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .bench.commands import COMMANDS
from .bench.config import load_config
from .bench.report import dumps, write_report
from .errors import ConfigError, DataError, DegeneracyError, InputError

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_DEGENERATE = 0, 2, 3, 4

_HELP = {
    "relevant-test": "self-normalised two-sample relevant test on two CSV files",
    "changepoint": "CUSUM change-point test and location estimate on one CSV file",
    "size-study": "empirical size of a test under its null design",
    "power-study": "empirical power under a configured alternative",
    "coupling-check": "KS distance between null T_n draws and true-covariance bridge sups",
    "lemma1-check": "growth of the maximal degenerate U-statistic partial sum in n",
    "quantile-table": "simulated critical values of the SN limit and bridge sups",
}


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="hdustat", description="High-dimensional U-statistic inference.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)
    for name in COMMANDS:
        p = sub.add_parser(name, help=_HELP[name], description=_HELP[name])
        p.add_argument("--config", help="key = value configuration file")
        p.add_argument("--seed", type=int, help="master seed (overrides the config)")
        p.add_argument("--out", help="write the JSON report here")
        p.add_argument("--threads", type=int, default=1, help="worker count; never changes results")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override one config key")
    return parser


def _summary(report: dict) -> str:
    res = report["results"]
    lines = [f"{report['command']} (seed {report['seeds']['master_seed']})"]
    for key in sorted(res):
        value = res[key]
        if isinstance(value, (list, dict)) and len(str(value)) > 80:
            continue
        lines.append(f"  {key}: {value}")
    for w in report["diagnostics"].get("warnings", []):
        lines.append(f"  warning: {w}")
    return "\n".join(lines)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        cfg = load_config(args.config, args.set, args.seed)
        report = COMMANDS[args.command](cfg, threads=args.threads)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except DegeneracyError as err:
        print(f"numerical degeneracy: {err}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (DataError, InputError) as err:
        print(f"data error: {err}", file=sys.stderr)
        return EXIT_DATA
    if args.out:
        write_report(report, args.out)
    else:
        sys.stdout.write(dumps(report))
    print(_summary(report), file=sys.stdout if args.out else sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
