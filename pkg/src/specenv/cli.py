# cli.py
#
# Command-line entry point. Loads the configuration, creates the facade and
# dispatches one subcommand. Machine-readable output goes to stdout, logs go
# to the log file and stderr.

import argparse
import logging
import re
import sys
from pathlib import Path
from typing import List, Optional

from .api import ExitCode, SpecEnvAPI
from .config import ConfigError, SpecEnvConfig
from .core.window_functions import WindowFamily
from .services.verification import ALL_SUITES, VerificationSuite
from .storage.repository import dumps_report

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

# Options whose values may start with a minus sign, e.g. "--freqs -1,0,2".
SIGNED_VALUE_OPTIONS = ("--freqs", "--lambda")
_SIGNED_VALUE = re.compile(r"^-[\d.]")


def attach_signed_values(argv: List[str]) -> List[str]:
    """Rewrites "--freqs -1,0,2" as "--freqs=-1,0,2" so argparse does not read the value as a flag."""
    joined: List[str] = []
    i = 0
    while i < len(argv):
        item = argv[i]
        if item in SIGNED_VALUE_OPTIONS and i + 1 < len(argv) and _SIGNED_VALUE.match(argv[i + 1]):
            joined.append(f"{item}={argv[i + 1]}")
            i += 2
        else:
            joined.append(item)
            i += 1
    return joined


class SpecEnvArgumentParser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with the validation code."""

    def parse_known_args(self, args=None, namespace=None):
        if args is None:
            args = sys.argv[1:]
        return super().parse_known_args(attach_signed_values(list(args)), namespace)

    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(int(ExitCode.VALIDATION_ERROR), f"{self.prog}: error: {message}\n")


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid complex value: '{text}'") from None


def build_parser() -> SpecEnvArgumentParser:
    parser = SpecEnvArgumentParser(
        prog="specenv",
        description="Numerical toolkit for window functions, L1 bounds, spectral mapping and spectrum envelopes.",
    )
    parser.add_argument(
        '-c', '--config',
        dest='config_path',
        default=None,
        help='Path to the JSON configuration file (default: built-in defaults, as in config/specenv_config.json)'
    )
    parser.add_argument('--log-level', default='INFO', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])
    parser.add_argument('--log-file', default='specenv.log', help='Log file path (default: specenv.log)')

    subparsers = parser.add_subparsers(dest='command', required=True)

    windows = subparsers.add_parser('windows', help='Emit a window symbol and its time-domain transform as CSV.')
    windows.add_argument('--family', required=True, choices=WindowFamily.available_families())
    windows.add_argument('--a', type=float, required=True)
    windows.add_argument('--n', type=float, default=None, help='Index of the generalized trapezoid (gentrap).')
    windows.add_argument('--R', type=float, required=True)
    windows.add_argument('--N', type=int, required=True)
    windows.add_argument('--out', type=Path, required=True)

    l1bound = subparsers.add_parser('l1bound', help='Check the L1 estimate for sampled data.')
    l1bound.add_argument('--input', type=Path, required=True)
    l1bound.add_argument('--out', type=Path, required=True)
    l1bound.add_argument('--edge-tolerance', type=float, default=None,
                         help='Relative edge magnitude allowed (default: tolerances.edge_decay).')

    kernel = subparsers.add_parser('kernel', help='Assemble a smoothed reflection kernel.')
    kernel.add_argument('--h', required=True, choices=['phi', 'psi', 'gamma'])
    kernel.add_argument('--a', type=float, required=True)
    kernel.add_argument('--v', type=Path, required=True)
    kernel.add_argument('--sandwich', action='store_true')
    kernel.add_argument('--out', type=Path, required=True)
    kernel.add_argument('--report', type=Path, required=True)

    specmap = subparsers.add_parser('specmap', help='Spectral mapping on a diagonal representation.')
    specmap.add_argument('--freqs', required=True, help='Comma-separated frequencies, e.g. "-1,0,2".')
    specmap.add_argument('--symbol', required=True, help='id | square | exp | trapezoid:<a> | ap1:<file>')
    specmap.add_argument('--out', type=Path, required=True)
    specmap.add_argument('--lambda', dest='lam', type=_complex, default=None,
                         help='Also check the resolvent norm at this point, e.g. "3+4i".')

    env = subparsers.add_parser('envelope', help='Spectrum envelope from a perturbation or from matrices.')
    source = env.add_mutually_exclusive_group(required=True)
    source.add_argument('--v', type=Path)
    source.add_argument('--matrixA', type=Path)
    env.add_argument('--matrixB', type=Path)
    env.add_argument('--N', type=int, default=None)
    env.add_argument('--out', type=Path, required=True)
    env.add_argument('--eigs', type=Path, required=True)
    env.add_argument('--report', type=Path, required=True)

    verify = subparsers.add_parser('verify', help='Run verification suites.')
    verify.add_argument('--suite', required=True, choices=VerificationSuite.available_suites() + [ALL_SUITES])
    verify.add_argument('--out', type=Path, default=None)
    return parser


def dispatch(api: SpecEnvAPI, args: argparse.Namespace, parser: SpecEnvArgumentParser):
    if args.command == 'windows':
        return api.windows(args.family, args.a, args.n, args.R, args.N, args.out)
    if args.command == 'l1bound':
        return api.l1bound(args.input, args.out, args.edge_tolerance)
    if args.command == 'kernel':
        return api.kernel(args.h, args.a, args.v, args.sandwich, args.out, args.report)
    if args.command == 'specmap':
        return api.specmap(args.freqs, args.symbol, args.out, args.lam)
    if args.command == 'envelope':
        if args.v is not None:
            return api.envelope_from_perturbation(args.v, args.N, args.out, args.eigs, args.report)
        if args.matrixB is None:
            parser.error("--matrixA requires --matrixB")
        return api.envelope_from_matrices(args.matrixA, args.matrixB, args.out, args.eigs, args.report)
    return api.verify(args.suite, args.out)


def main(argv: Optional[List[str]] = None) -> int:
    """
    Main entry point: parse arguments, configure logging, run one command.

    Returns:
        int: 0 on success, 1 on validation errors, 2 on numerical failures
        or failing verification checks.
    """
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(level=getattr(logging, args.log_level),
                        format=LOG_FORMAT,
                        handlers=[
                            logging.FileHandler(args.log_file),
                            logging.StreamHandler(sys.stderr)
                        ])

    try:
        config = SpecEnvConfig(args.config_path)
        workers = config.resolve_thread_count()
    except ConfigError as e:
        logging.error(f"Invalid configuration: {e}")
        print(f"Error: Invalid configuration: {e}", file=sys.stderr)
        return int(ExitCode.VALIDATION_ERROR)

    api = SpecEnvAPI(config, workers)
    code, payload = dispatch(api, args, parser)

    if args.command == 'verify' and isinstance(payload, list):
        print(dumps_report(payload))
    elif code is not ExitCode.OK:
        print(f"Error: {payload}", file=sys.stderr)
    logging.info(f"Command '{args.command}' finished with exit code {int(code)}.")
    return int(code)


if __name__ == "__main__":
    sys.exit(main())
