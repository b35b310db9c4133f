"""
CovarKit
Command-line entry point for checking covariance commutation relations
AB = BF(A) and BA = F(A)B between concrete operators.
"""

import argparse
import logging
import sys

from cli.commands import run_batch, run_check, run_fixpoints, run_oracle, run_search
from core.errors import EXIT_BAD_INPUT
from core.logger import set_console_level
from utils.config import Config


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the bad-input code, not 2 (which means Unknown)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_BAD_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog='covarkit',
        description="Decide and numerically crosscheck covariance commutation relations.",
    )
    parser.add_argument('--config', help="Settings file (default: config.json next to main.py)")
    parser.add_argument('--verbose', action='store_true', help="Mirror the log to stderr")

    oracle_flags = _Parser(add_help=False)
    oracle_flags.add_argument('--grid', type=int, dest='grid_n', help="Oracle grid points")
    oracle_flags.add_argument('--norm', choices=['1', '2', 'inf'], help="Residual norm")
    oracle_flags.add_argument('--tau-pass', type=float, dest='tau_pass', help="Holds threshold")
    oracle_flags.add_argument('--tau-fail', type=float, dest='tau_fail', help="Fails threshold")
    oracle_flags.add_argument('--seed', type=int, help="Random seed (COVARKIT_SEED overrides)")
    oracle_flags.add_argument('--json', action='store_true', help="Machine-readable output")

    sub = parser.add_subparsers(dest='command', required=True, parser_class=_Parser)
    p = sub.add_parser('check', parents=[oracle_flags], help="Decide a problem file and crosscheck it")
    p.add_argument('path')
    p = sub.add_parser('oracle', parents=[oracle_flags], help="Residual table of a problem file")
    p.add_argument('path')
    p = sub.add_parser('search', parents=[oracle_flags], help="Parameter cases of a family file")
    p.add_argument('path')
    p.add_argument('--emit', metavar='FOLDER',
                   help="Write one concrete problem per case into FOLDER")
    p = sub.add_parser('fixpoints', help="Real fixed points of F")
    p.add_argument('source', help="Problem file, or coefficients constant term first (\"0,0,0,1\")")
    p.add_argument('--json', action='store_true', help="Machine-readable output")
    p = sub.add_parser('batch', parents=[oracle_flags], help="Check every problem file in a folder")
    p.add_argument('folder')
    return parser


def main(argv=None) -> int:
    """Application entry point."""
    args = build_parser().parse_args(argv)
    if args.verbose:
        set_console_level(logging.DEBUG)

    config = Config(args.config) if args.config else Config()
    overrides = {
        key: getattr(args, key, None)
        for key in ('grid_n', 'norm', 'tau_pass', 'tau_fail', 'seed')
    }

    if args.command == 'check':
        return run_check(args.path, config, overrides, args.json)
    if args.command == 'oracle':
        return run_oracle(args.path, config, overrides, args.json)
    if args.command == 'search':
        return run_search(args.path, config, overrides, args.json, args.emit)
    if args.command == 'fixpoints':
        return run_fixpoints(args.source, config, args.json)
    return run_batch(args.folder, config, overrides, args.json)


if __name__ == "__main__":
    sys.exit(main())
