"""
sumsolve command line - solve, gen, experiment, verify-ineq, cover, p4-dump
"""

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Dict, List, Optional

from pydantic import ValidationError

from sumsolve import __version__
from sumsolve.config import PRESETS, get_preset, settings
from sumsolve.core import Rng, SubsetSumInstance, parse_instance, serialize_instance
from sumsolve.errors import PreconditionError, SumsolveError, UsageError
from sumsolve.experiments import ALGORITHMS, SUITES, ExperimentHarness, format_record, format_report
from sumsolve.generators import KINDS, generate_instance
from sumsolve.metrics import write_metrics
from sumsolve.numerics import verify_ov_inequality
from sumsolve.ov import MAX_VALIDITY_D, build_cover, measure_sparsity
from sumsolve.p4 import dump_graph, layer_separation_margin, sample_graph
from sumsolve.schemas import ExperimentConfig, ExperimentReport
from sumsolve.tracing import setup_tracing

logger = logging.getLogger(__name__)

TAG_GENERATE = 42
TAG_COVER_CLI = 43

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def _parse_overrides(pairs: List[str]) -> Dict[str, object]:
    """KEY=VALUE strings; values are read as JSON when possible (1024, 0.25, null)"""
    overrides = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise UsageError(f"Expected KEY=VALUE, got '{pair}'")
        try:
            overrides[key] = json.loads(value)
        except json.JSONDecodeError:
            overrides[key] = value
    return overrides


def _config(args) -> ExperimentConfig:
    try:
        return ExperimentConfig(
            algorithm=getattr(args, "algo", "rep"),
            seed=args.seed,
            trials=args.trials,
            preset=args.preset,
            n=getattr(args, "n", 16),
            bit_width=getattr(args, "bit_width", 20),
            kind=getattr(args, "kind", "planted"),
            budget=getattr(args, "budget", None),
            overrides=_parse_overrides(args.set),
            output_format=args.format,
            timing=args.timing,
        )
    except ValidationError as e:
        raise UsageError(f"Invalid configuration: {e}")


def _load_instance(args) -> SubsetSumInstance:
    if args.instance:
        text = sys.stdin.read() if args.instance == "-" else Path(args.instance).read_text()
        return parse_instance(text)
    return generate_instance(Rng(args.seed).derive(TAG_GENERATE), args.kind, args.n, args.bit_width)


def _emit(args, text: str):
    if args.out:
        Path(args.out).write_text(text)
        logger.info(f"Wrote {args.out}")
    else:
        sys.stdout.write(text)


def _single_row_report(args, suite: str, row: Dict, passed: bool) -> ExperimentReport:
    preset = get_preset(args.preset).name
    return ExperimentReport(suite=suite, seed=args.seed, preset=preset,
                            rows=[{"seed": args.seed, "preset": preset, **row}],
                            summary={"passed": passed})


# ========================================
# SUBCOMMANDS
# ========================================

def cmd_solve(args):
    config = _config(args)
    record = ExperimentHarness(config, args.db).run_solve(_load_instance(args))
    _emit(args, format_record(record, config.output_format))


def cmd_gen(args):
    _config(args)
    _emit(args, serialize_instance(_load_instance(args)))


def cmd_experiment(args):
    config = _config(args)
    report = ExperimentHarness(config, args.db).run_experiment(args.suite)
    _emit(args, format_report(report, config.output_format))


def cmd_verify_ineq(args):
    if args.lam is None and args.sigma is None:
        report = ExperimentHarness(_config(args), args.db).run_experiment("ov-inequality")
    else:
        result = verify_ov_inequality(0.5 if args.lam is None else args.lam,
                                      0.5 if args.sigma is None else args.sigma, args.step)
        report = _single_row_report(args, "ov-inequality", asdict(result), result.holds)
    _emit(args, format_report(report, args.format))


def cmd_cover(args):
    cover = build_cover(Rng(args.seed).derive(TAG_COVER_CLI), args.d, args.p, args.q, args.x)
    sparsity = measure_sparsity(cover, with_validity=args.d <= MAX_VALIDITY_D)
    report = _single_row_report(args, "cover", sparsity.model_dump(), sparsity.valid is not False)
    _emit(args, format_report(report, args.format))


def cmd_p4_dump(args):
    config = _config(args)
    preset = get_preset(config.preset, **config.overrides)
    graph = sample_graph(Rng(args.seed), _load_instance(args), preset, args.lambda_count)
    logger.info(f"P4 graph: {len(graph.vertices)} vertices, {graph.edge_count} edges, "
                f"separation margin {layer_separation_margin(graph)}, "
                f"big - w([n]) - t = {graph.big - graph.total_weight - graph.target}")
    _emit(args, dump_graph(graph))


# ========================================
# PARSER
# ========================================

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=settings.SEED, help="Master seed")
    common.add_argument("--preset", choices=sorted(PRESETS), default=settings.PRESET, help="Constant preset")
    common.add_argument("--trials", type=int, default=10, help="Trials per experiment")
    common.add_argument("--format", choices=["text", "json", "csv"], default="text", help="Report format")
    common.add_argument("--out", help="Write the report to this file instead of stdout")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="Override a preset constant (mu, lambda0, eps0, ov_blocks, crossover, ...)")
    common.add_argument("--log-level", choices=["debug", "info", "warning", "error"],
                        default=settings.LOG_LEVEL.lower(), help="Log level (logs go to stderr)")
    common.add_argument("--db", default=None, help="SQLAlchemy URL of the run ledger")
    common.add_argument("--metrics-file", default=settings.METRICS_FILE,
                        help="Write Prometheus metrics to this file on exit")
    common.add_argument("--timing", action="store_true", help="Add wall time to result records")

    source = argparse.ArgumentParser(add_help=False)
    source.add_argument("--instance", help="Instance file ('-' for stdin); generated when omitted")
    source.add_argument("--n", type=int, default=16, help="Generated instance size")
    source.add_argument("--kind", choices=KINDS, default="planted", help="Generated instance kind")
    source.add_argument("--bit-width", type=int, default=20, help="Generated weight bit width")

    parser = argparse.ArgumentParser(prog="sumsolve", description="Exact Subset Sum solvers and experiments")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    solve = commands.add_parser("solve", parents=[common, source], help="Solve one instance")
    solve.add_argument("--algo", choices=ALGORITHMS, default="rep", help="Solver")
    solve.add_argument("--budget", type=float, help="log2 of the entry budget for --algo budget (default n/8)")
    solve.set_defaults(handler=cmd_solve)

    gen = commands.add_parser("gen", parents=[common, source], help="Write a generated instance")
    gen.set_defaults(handler=cmd_gen)

    experiment = commands.add_parser("experiment", parents=[common, source], help="Run an experiment suite")
    experiment.add_argument("suite", choices=SUITES)
    experiment.add_argument("--algo", choices=ALGORITHMS, default="rep", help="Solver for success-rate")
    experiment.set_defaults(handler=cmd_experiment)

    verify = commands.add_parser("verify-ineq", parents=[common], help="Check the OV running-time inequality")
    verify.add_argument("--lam", type=float, help="Single λ (default: the full grid)")
    verify.add_argument("--sigma", type=float, help="Single σ (default: the full grid)")
    verify.add_argument("--step", type=float, default=1e-3, help="x grid step")
    verify.set_defaults(handler=cmd_verify_ineq)

    cover = commands.add_parser("cover", parents=[common], help="Build a 1-cover and report its sparsity")
    cover.add_argument("--d", type=int, required=True)
    cover.add_argument("--p", type=int, required=True)
    cover.add_argument("--q", type=int, required=True)
    cover.add_argument("--x", type=int, help="Certificate size (default: searched near the optimum)")
    cover.set_defaults(handler=cmd_cover)

    dump = commands.add_parser("p4-dump", parents=[common, source], help="Dump one node-weighted P4 graph")
    dump.add_argument("--lambda-count", type=int, help="|S ∩ M| guess (default: |M|/2)")
    dump.set_defaults(handler=cmd_p4_dump)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format=LOG_FORMAT, stream=sys.stderr)
    setup_tracing()
    try:
        try:
            args.handler(args)
        except (SumsolveError, AssertionError):
            raise
        except OSError as e:
            raise UsageError(f"{e}")
        except Exception as e:
            raise PreconditionError(f"{type(e).__name__}: {e}")
    except SumsolveError as e:
        logger.error(f"{type(e).__name__}: {e.detail}")
        print(f"error: {e.detail}", file=sys.stderr)
        return e.exit_code
    finally:
        if args.metrics_file:
            write_metrics(args.metrics_file)
    return 0


if __name__ == "__main__":
    sys.exit(main())
