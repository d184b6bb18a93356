"""
Command-line front end: solve, generate, ingest, verify and cross-check

Every command prints exactly one JSON document (the run report) on stdout;
logs and the optional human summary go to stderr.
"""

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import pandas as pd
from rich.console import Console
from rich.table import Table

from .arith import FeasibilityBackend, parse_rational
from .benchmarks import FrozenLakeSpec, SpecError, chain, fig1, gen_frozen_lake
from .config import Config
from .logger import SolverLogger, setup_logging
from .model_io import IngestError, SchemaError, ingest_explicit, load_model, save_model
from .oracles import SupportCapExceeded, UncertaintyOracle
from .reference import game_as_parity, game_as_reach, reduce
from .rmdp import MemorylessPolicy, ModelError, Rmdp
from .solvers import Objective, Parity, Reach, solve, verify_policy
from .stats import BudgetExceeded, Deadline, SolveTimeout

log = SolverLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_TIMEOUT = 2
EXIT_USAGE = 64
EXIT_MODEL = 65
EXIT_CAP = 66
EXIT_INTERNAL = 70


class UsageError(Exception):
    """Bad command-line flags"""


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports errors through the exit-code contract"""

    def error(self, message: str):
        raise UsageError(message)


@dataclass
class RunReport:
    """JSON report of one command; unset fields are left out, order is fixed"""
    command: List[str]
    arith: Optional[str] = None
    procedure: Optional[str] = None
    objective: Optional[str] = None
    winning: Optional[List[str]] = None
    policy: Optional[Dict[str, str]] = None
    iterations: Optional[int] = None
    trace: Optional[List[List[str]]] = None
    oracle_calls: Optional[Dict[str, int]] = None
    policy_oracle_calls: Optional[Dict[str, int]] = None
    agree: Optional[bool] = None
    differing: Optional[List[str]] = None
    reference_winning: Optional[List[str]] = None
    verified: Optional[bool] = None
    output: Optional[str] = None
    states: Optional[int] = None
    records: Optional[List[Dict[str, Any]]] = None
    summary: Optional[List[Dict[str, Any]]] = None
    error: Optional[str] = None
    wall_time_ms: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self) if getattr(self, f.name) is not None}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


@dataclass
class CommandOutcome:
    report: RunReport
    exit_code: int = EXIT_OK


# Shared helpers

def parse_objective(text: str, model: Rmdp) -> Objective:
    """
    ``reach:<label>`` or ``parity``

    Raises:
        UsageError: on an unknown objective form
        ModelError: if the label does not exist
    """
    if text == 'parity':
        return Parity()
    kind, sep, label = text.partition(':')
    if kind != 'reach' or not sep or not label:
        raise UsageError(f"Invalid objective '{text}', expected reach:<label> or parity")
    return Reach(model.label(label))


def _backend(config: Config) -> FeasibilityBackend:
    try:
        return FeasibilityBackend.from_name(config.arith, config.tolerance)
    except ValueError as e:
        raise UsageError(str(e))


def _oracle(config: Config) -> UncertaintyOracle:
    return UncertaintyOracle(_backend(config), support_cap=config.support_cap)


def _read_policy(path: Path, model: Rmdp) -> MemorylessPolicy:
    try:
        with open(path, 'r') as f:
            mapping = json.load(f)
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}: invalid policy JSON ({e})")
    if not isinstance(mapping, dict):
        raise SchemaError(f"{path}: policy must map state names to action names")
    return MemorylessPolicy.from_names(model, mapping)


def _write_json(path: Path, document: Any):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w') as f:
        f.write(json.dumps(document, sort_keys=True, indent=2) + "\n")


# Commands

def cmd_solve(args: argparse.Namespace, config: Config) -> CommandOutcome:
    """Solve one model, or every model of a directory in batch mode"""
    if args.models_dir:
        return _solve_batch(args, config)
    if not args.model:
        raise UsageError("solve needs --model or --models-dir")

    deadline = Deadline(config.timeout_seconds)
    model = load_model(args.model)
    objective = parse_objective(args.objective, model)
    oracle = _oracle(config)
    result = solve(model, objective, efficient=args.efficient, oracle=oracle, deadline=deadline,
                   assert_budget=config.assert_budgets)

    policy = result.policy.to_names(model)
    if args.policy:
        _write_json(Path(args.policy), policy)
    report = RunReport(
        command=list(args.argv),
        arith=config.arith,
        procedure=result.procedure,
        objective=objective.describe(model),
        winning=model.names(result.winning),
        policy=policy,
        iterations=result.iterations,
        trace=[model.names(removed) for removed in result.trace],
        oracle_calls=result.stats.to_dict(),
        policy_oracle_calls=result.policy_stats.to_dict() if result.policy_stats.force_calls else None,
        wall_time_ms=round(deadline.elapsed_ms(), 3),
    )
    return CommandOutcome(report)


def _solve_file(path: str, objective: str, efficient: bool, config_path: Optional[str],
                overrides: Dict[str, Any]) -> Dict[str, Any]:
    """Batch worker; runs in its own process when workers > 1"""
    config = Config(config_path)
    for key, value in overrides.items():
        config.override(key, value)
    record: Dict[str, Any] = {
        'model': Path(path).name,
        'objective': objective,
        'efficient': efficient,
        'arith': config.arith,
    }
    deadline = Deadline(config.timeout_seconds)
    try:
        model = load_model(path)
        result = solve(model, parse_objective(objective, model), efficient=efficient,
                       oracle=_oracle(config), deadline=deadline, assert_budget=config.assert_budgets)
        record.update(status='ok', winning=len(result.winning), states=len(model.live),
                      iterations=result.iterations, force_calls=result.stats.force_calls)
    except SolveTimeout:
        record['status'] = 'timeout'
    except (ModelError, SchemaError, UsageError, BudgetExceeded) as e:
        record.update(status='error', error=str(e))
    record['wall_time_ms'] = round(deadline.elapsed_ms(), 3)
    return record


def _solve_batch(args: argparse.Namespace, config: Config) -> CommandOutcome:
    directory = Path(args.models_dir)
    if not directory.is_dir():
        raise UsageError(f"Not a directory: {directory}")
    paths = sorted(str(p) for p in directory.glob(config.batch_pattern))
    overrides = {
        'solver.arith': config.arith,
        'solver.tolerance': config.tolerance,
        'solver.timeout_seconds': config.timeout_seconds,
    }
    jobs = [(p, args.objective, args.efficient, args.config, overrides) for p in paths]

    if config.batch_workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.batch_workers) as pool:
            records = list(pool.map(_solve_file, *zip(*jobs)))
    else:
        records = [_solve_file(*job) for job in jobs]
    # pool.map preserves input order, so records follow the sorted file names

    summary: List[Dict[str, Any]] = []
    if records:
        frame = pd.DataFrame(records)
        solved = frame[frame['status'] == 'ok']
        if not solved.empty:
            grouped = (solved.groupby(['objective', 'efficient', 'arith'], sort=True)
                       .agg(count=('model', 'count'), avg_time_ms=('wall_time_ms', 'mean'))
                       .reset_index())
            grouped['avg_time_ms'] = grouped['avg_time_ms'].round(3)
            summary = json.loads(grouped.to_json(orient='records'))
    log.info(f"Batch solved {len(records)} models from {directory}")

    failed = any(r['status'] == 'error' for r in records)
    report = RunReport(command=list(args.argv), arith=config.arith, records=records, summary=summary)
    return CommandOutcome(report, EXIT_MODEL if failed else EXIT_OK)


def cmd_generate(args: argparse.Namespace, config: Config) -> CommandOutcome:
    """Write a generated benchmark or fixture model"""
    if args.kind == 'frozenlake':
        spec = FrozenLakeSpec(
            n=args.n,
            p_norm=args.p,
            r_max=parse_rational(args.rmax),
            seed=args.seed,
            hole_density=config.hole_density if args.holes is None else args.holes,
            objective=args.objective,
            support_restricted=config.support_restricted and not args.unrestricted,
            radius_fixed=parse_rational(args.radius_fixed) if args.radius_fixed is not None else None,
        )
        model = gen_frozen_lake(spec)
    elif args.kind == 'fig1':
        model = fig1()
    else:
        model = chain(args.k)

    save_model(model, args.output)
    report = RunReport(command=list(args.argv), output=str(args.output), states=len(model.live))
    return CommandOutcome(report)


def _reference_winning(model: Rmdp, objective: Objective, config: Config, deadline: Deadline):
    game = reduce(model, support_cap=config.support_cap, backend=_backend(config), deadline=deadline)
    if isinstance(objective, Reach):
        return game_as_reach(game, objective.target, deadline)
    if model.priorities is None:
        raise ModelError("Parity objective needs model priorities")
    return game_as_parity(game, model.priorities.values, deadline)


def cmd_check(args: argparse.Namespace, config: Config) -> CommandOutcome:
    """Cross-check the solver against the support-game reference"""
    deadline = Deadline(config.timeout_seconds)
    model = load_model(args.model)
    objective = parse_objective(args.objective, model)
    reference = _reference_winning(model, objective, config, deadline)
    result = solve(model, objective, efficient=args.efficient, oracle=_oracle(config), deadline=deadline,
                   assert_budget=config.assert_budgets)

    differing = model.names(result.winning ^ reference)
    agree = not differing
    log.check_result(objective.describe(model), agree, differing)
    report = RunReport(
        command=list(args.argv),
        arith=config.arith,
        procedure=result.procedure,
        objective=objective.describe(model),
        winning=model.names(result.winning),
        agree=agree,
        differing=differing,
        reference_winning=model.names(reference),
        oracle_calls=result.stats.to_dict(),
        wall_time_ms=round(deadline.elapsed_ms(), 3),
    )
    return CommandOutcome(report, EXIT_OK if agree else EXIT_FAILED)


def cmd_verify_policy(args: argparse.Namespace, config: Config) -> CommandOutcome:
    """Check that a stored policy wins from every state it covers"""
    deadline = Deadline(config.timeout_seconds)
    model = load_model(args.model)
    objective = parse_objective(args.objective, model)
    policy = _read_policy(Path(args.policy), model)
    verified = verify_policy(model, policy, objective, oracle=_oracle(config))
    report = RunReport(
        command=list(args.argv),
        arith=config.arith,
        objective=objective.describe(model),
        policy=policy.to_names(model),
        verified=verified,
        wall_time_ms=round(deadline.elapsed_ms(), 3),
    )
    return CommandOutcome(report, EXIT_OK if verified else EXIT_FAILED)


def cmd_ingest(args: argparse.Namespace, config: Config) -> CommandOutcome:
    """Convert explicit transition/label files into a model file"""
    try:
        radius = parse_rational(args.radius)
    except ValueError as e:
        raise UsageError(str(e))
    try:
        model = ingest_explicit(args.tra, args.lab, args.family, radius,
                                support_restricted=not args.unrestricted, backend=_backend(config))
    except ValueError as e:
        if isinstance(e, IngestError):
            raise
        raise UsageError(str(e))
    save_model(model, args.output)
    report = RunReport(command=list(args.argv), output=str(args.output), states=len(model.live))
    return CommandOutcome(report)


COMMANDS = {
    'solve': cmd_solve,
    'gen': cmd_generate,
    'check': cmd_check,
    'verify': cmd_verify_policy,
    'ingest': cmd_ingest,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', '-c', default=None,
                        help='Path to configuration file (default: built-in defaults)')
    common.add_argument('--arith', choices=['exact', 'float'], default=None,
                        help='Arithmetic used by the uncertainty oracles')
    common.add_argument('--tol', type=float, default=None, help='Zero tolerance in float mode')
    common.add_argument('--timeout', type=float, default=None, help='Timeout in seconds (0 = none)')
    common.add_argument('--summary', action='store_true', help='Print a summary table on stderr')

    parser = _Parser(prog='rmdpq', description='Qualitative analysis of robust MDPs')
    sub = parser.add_subparsers(dest='command', parser_class=_Parser)

    solve_p = sub.add_parser('solve', parents=[common], help='Solve a model')
    solve_p.add_argument('--model', help='Model file')
    solve_p.add_argument('--models-dir', help='Solve every model of a directory')
    solve_p.add_argument('--objective', required=True, help='reach:<label> or parity')
    solve_p.add_argument('--efficient', action='store_true', help='Budgeted parity algorithm')
    solve_p.add_argument('--policy', help='Write the winning policy to this file')

    gen_p = sub.add_parser('gen', parents=[common], help='Generate a benchmark model')
    gen_p.add_argument('kind', choices=['frozenlake', 'fig1', 'chain'])
    gen_p.add_argument('--n', type=int, default=4, help='Grid side')
    gen_p.add_argument('--p', default='1', choices=['1', '2', 'inf'], help='Ball norm')
    gen_p.add_argument('--rmax', default='1', help='Maximal radius')
    gen_p.add_argument('--seed', type=int, default=0)
    gen_p.add_argument('--objective', choices=['reach', 'parity'], default='reach')
    gen_p.add_argument('--unrestricted', action='store_true', help='Allow mass outside the nominal support')
    gen_p.add_argument('--holes', type=float, default=None, help='Hole density')
    gen_p.add_argument('--radius-fixed', default=None, help='Same radius for every cell')
    gen_p.add_argument('--k', type=int, default=3, help='Chain length')
    gen_p.add_argument('-o', '--output', required=True)

    check_p = sub.add_parser('check', parents=[common], help='Cross-check against the support-game reference')
    check_p.add_argument('--model', required=True)
    check_p.add_argument('--objective', required=True)
    check_p.add_argument('--efficient', action='store_true')

    verify_p = sub.add_parser('verify', parents=[common], help='Verify a policy')
    verify_p.add_argument('--model', required=True)
    verify_p.add_argument('--policy', required=True, help='JSON object of state name to action name')
    verify_p.add_argument('--objective', required=True)

    ingest_p = sub.add_parser('ingest', parents=[common], help='Ingest explicit .tra/.lab files')
    ingest_p.add_argument('--tra', required=True)
    ingest_p.add_argument('--lab', default=None)
    ingest_p.add_argument('--family', default='l1', help='l1, l2, l<d> or linf')
    ingest_p.add_argument('--radius', required=True)
    ingest_p.add_argument('--unrestricted', action='store_true')
    ingest_p.add_argument('-o', '--output', required=True)
    return parser


def print_summary(report: RunReport, console: Optional[Console] = None):
    """Human-readable table of a report"""
    console = console or Console(stderr=True)
    if report.records is not None:
        table = Table(title="Batch summary")
        for column in ('objective', 'efficient', 'arith', 'count', 'avg_time_ms'):
            table.add_column(column)
        for row in report.summary or []:
            table.add_row(*(str(row[c]) for c in ('objective', 'efficient', 'arith', 'count', 'avg_time_ms')))
    else:
        table = Table(title=" ".join(report.command))
        table.add_column("field")
        table.add_column("value")
        for key, value in report.to_dict().items():
            if key == 'command':
                continue
            if isinstance(value, list) and len(value) > 12:
                value = f"{len(value)} items"
            table.add_row(key, str(value))
    console.print(table)


def run(argv: Optional[Sequence[str]] = None) -> Tuple[RunReport, int]:
    """Parse ``argv``, run the command and map failures to exit codes"""
    argv = list(sys.argv[1:] if argv is None else argv)
    report = RunReport(command=argv)
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("missing command (solve, gen, check, verify, ingest)")
        args.argv = argv

        config = Config(Path(args.config) if args.config else None)
        config.override('solver.arith', args.arith)
        config.override('solver.tolerance', args.tol)
        config.override('solver.timeout_seconds', args.timeout)
        setup_logging(config)

        outcome = COMMANDS[args.command](args, config)
        if args.summary:
            print_summary(outcome.report)
        return outcome.report, outcome.exit_code

    except UsageError as e:
        code, message = EXIT_USAGE, f"usage error: {e}"
    except SpecError as e:
        code, message = EXIT_USAGE, f"invalid generator parameters: {e}"
    except SupportCapExceeded as e:
        code, message = EXIT_CAP, str(e)
    except (ModelError, SchemaError, IngestError) as e:
        code, message = EXIT_MODEL, str(e)
    except FileNotFoundError as e:
        code, message = EXIT_MODEL, f"file not found: {e.filename}"
    except SolveTimeout as e:
        code, message = EXIT_TIMEOUT, str(e)
    except Exception as e:
        log.error(f"Unexpected failure: {e}", exc_info=True)
        code, message = EXIT_INTERNAL, f"internal error: {e}"

    print(message, file=sys.stderr)
    report.error = message
    return report, code


def main(argv: Optional[Sequence[str]] = None) -> int:
    report, code = run(argv)
    print(report.to_json())
    return code


__all__ = ['RunReport', 'UsageError', 'build_parser', 'main', 'parse_objective', 'run',
           'cmd_solve', 'cmd_generate', 'cmd_check', 'cmd_verify_policy', 'cmd_ingest']
