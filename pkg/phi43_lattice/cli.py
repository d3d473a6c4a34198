"""Command-line entry point: one subcommand per study, config file plus flag overrides, versioned result files."""
import argparse
import json
import logging
import sys
import traceback
from typing import List, Optional

from .errors import InvalidParameterException, Phi43Exception, ResultIOException
from .experiments.studies import run_study
from .input.study_config_input import StudyConfigInput
from .model.study_config import StudyConfig, StudyKind
from .model.study_result import StudyResult
from .standard_api.results import ResultStatus, ResultWriter


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID_CONFIG = 1
EXIT_RUNTIME_FAILURE = 2

SUBCOMMANDS = {
    'renorm': StudyKind.RENORM_SCALING,
    'ou-law': StudyKind.OU_LAW,
    'blocks': StudyKind.BLOCK_VARIANCE,
    'enhance': StudyKind.ENHANCED_NORMS,
    'simulate': StudyKind.SIMULATE,
    'converge': StudyKind.CONVERGE
}

SUMMARY_ROWS = 12


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the invalid-configuration code."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', metavar='PATH', help="JSON config file with flat keys")
    common.add_argument('--N', type=int, nargs='+', metavar='N', help="lattice cuts (N_list)")
    common.add_argument('--N-ref', dest='N_ref', type=int, help="reference resolution")
    common.add_argument('--T', type=float, help="time horizon")
    common.add_argument('--dt', type=float, help="time step")
    common.add_argument('--samples', type=int, help="Monte Carlo replicas")
    common.add_argument('--seed', type=int, help="master seed")
    common.add_argument('--z', type=float, help="regularity of the -z norm")
    common.add_argument('--L', type=float, help="blow-up threshold")
    common.add_argument('--out', metavar='DIR', help="output directory")
    common.add_argument('--threads', type=int, help="worker count (PHI43_THREADS overrides)")
    common.add_argument('--verbose', action='store_true', help="debug logging")
    parser = _Parser(prog='phi43', description="Lattice dynamical Phi^4_3: renormalisation constants, stochastic objects and convergence studies.")
    subparsers = parser.add_subparsers(dest='command', metavar='COMMAND', parser_class=_Parser)
    subparsers.required = True
    for name, kind in SUBCOMMANDS.items():
        subparsers.add_parser(name, parents=[common], help=f"{kind.value} study")
    return parser

def _summary_lines(result: StudyResult, paths: List[str]) -> List[str]:
    lines = [f"study: {result.config.study.value}"]
    table = result.tables[0]
    lines.append('  '.join(table.columns))
    for row in table.rows[:SUMMARY_ROWS]:
        lines.append('  '.join(f"{value:.10g}" if isinstance(value, float) else str(value) for value in row))
    if len(table) > SUMMARY_ROWS:
        lines.append(f"... {len(table) - SUMMARY_ROWS} more rows")
    lines.append(f"summary: {json.dumps(result.summary, sort_keys=True, default=str)}")
    lines.extend(f"wrote {path}" for path in paths)
    return lines

def _log_failure(e: Phi43Exception) -> None:
    logger.error(f"--- {type(e).__name__} ---\n"
                 f"- Message: {e.message}\n"
                 f"- Data:\n{json.dumps(e.data, indent=2, default=str)}\n")

def _record_failure(config: StudyConfig, e: Phi43Exception) -> None:
    try:
        ResultWriter(config.output).write_manifest(None, config.to_json_object(), ResultStatus.ERROR, e.to_json_object())
    except ResultIOException:
        logger.debug("could not record the failure manifest")

def cli_main(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand.

    Returns:
        int: 0 on success (blow-ups included), 1 on invalid configuration, 2 on runtime failure.
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    try:
        config = StudyConfigInput.build(SUBCOMMANDS[args.command], args.config,
                                        N=args.N, N_ref=args.N_ref, T=args.T, dt=args.dt, samples=args.samples,
                                        seed=args.seed, z=args.z, L=args.L, out=args.out, threads=args.threads)
    except InvalidParameterException as e:
        _log_failure(e)
        print(f"invalid configuration: {e.message}", file=sys.stderr)
        return EXIT_INVALID_CONFIG
    try:
        result = run_study(config)
        paths = ResultWriter(config.output).write_result(result)
    except InvalidParameterException as e:
        _log_failure(e)
        print(f"invalid configuration: {e.message}", file=sys.stderr)
        return EXIT_INVALID_CONFIG
    except Phi43Exception as e:
        _log_failure(e)
        _record_failure(config, e)
        print(f"{args.command} failed: {e.message}", file=sys.stderr)
        return EXIT_RUNTIME_FAILURE
    except Exception as e:
        logger.error(f"--- Unexpected failure ---\n{traceback.format_exc()}")
        print(f"{args.command} failed: {e}", file=sys.stderr)
        return EXIT_RUNTIME_FAILURE
    print('\n'.join(_summary_lines(result, paths)))
    return EXIT_OK

def main() -> None:
    sys.exit(cli_main())


if __name__ == '__main__':
    main()
