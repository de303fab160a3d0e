"""Command-line front end.

Exit codes: 0 success, 1 invalid input or configuration, 2 solver did not
converge (the report is still written).
"""

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from pydantic import ValidationError

from src.analysis.error_bounds import run_convergence_study
from src.analysis.functions import BUILTIN_FUNCTIONS, get_test_function
from src.cli.writers import (
    convergence_csv,
    convergence_json,
    fim_csv,
    fim_json,
    solve_report_csv,
    solve_report_json,
    suffixed_path,
    write_output,
)
from src.config import settings
from src.control.discretizer import SolveReport, sample_trajectory
from src.control.ocp import validate_problem
from src.control.problems import (
    Problem1Params,
    Problem2Params,
    make_problem1,
    make_problem2,
)
from src.solver.auglag import PeriodicityMode, solve_problem
from src.solver.config import SolverConfig, load_solver_config
from src.spectral.grid import make_grid
from src.spectral.integration import (
    build_rectangular_fim,
    build_square_fim,
    terminal_quadrature,
)
from src.utils.errors import FipsError, InvalidInputError
from src.utils.logging import get_logger, setup_logging
from src.utils.monitoring import monitor

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NOT_CONVERGED = 2


class CliArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that raises InvalidInputError instead of exiting."""

    def error(self, message: str):
        raise InvalidInputError(f"{self.prog}: {message}")


def parse_n_range(text: str) -> list[int]:
    """Parse ``start:step:stop`` (inclusive) or a single N."""
    try:
        parts = [int(p) for p in text.split(":")]
    except ValueError:
        raise InvalidInputError(f"Invalid N range {text!r}; expected start:step:stop") from None
    if len(parts) == 1:
        parts = [parts[0], 2, parts[0]]
    if len(parts) != 3:
        raise InvalidInputError(f"Invalid N range {text!r}; expected start:step:stop")
    start, step, stop = parts
    if step <= 0 or start <= 0 or stop < start:
        raise InvalidInputError(f"Invalid N range {text!r}: need 0 < start <= stop and step > 0")
    values = list(range(start, stop + 1, step))
    odd = [n for n in values if n % 2]
    if odd:
        raise InvalidInputError(f"N values must be even, got {odd}", {"odd": odd})
    return values


def parse_float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InvalidInputError(f"Invalid number list {text!r}") from None


def _add_output_options(parser: argparse.ArgumentParser, default_format: str) -> None:
    parser.add_argument("--format", choices=["csv", "json"], default=default_format)
    parser.add_argument("--output", type=Path, default=None, help="File path; stdout if omitted")


def _add_solve_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None, help="Solver key=value file")
    parser.add_argument(
        "--multistart", type=int, default=None, help="Perturbed restarts (overrides config)"
    )
    parser.add_argument(
        "--timing", action="store_true", help="Include wall_time_s in the output file"
    )
    parser.add_argument(
        "--dense", type=int, default=0, help="Append K interpolated trajectory samples (JSON)"
    )
    _add_output_options(parser, "json")


def _add_periodicity_option(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--periodicity",
        choices=[m.value for m in PeriodicityMode],
        default=PeriodicityMode.BEST.value,
        help="Periodicity rows on, off, or both with the better converged report kept",
    )


def build_parser() -> CliArgumentParser:
    parser = CliArgumentParser(
        prog="fips",
        description="Fourier integral pseudospectral periodic optimal control",
    )
    parser.add_argument(
        "--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], default=None
    )
    commands = parser.add_subparsers(dest="command", required=True)

    quad = commands.add_parser("quad-study", help="Quadrature convergence study")
    quad.add_argument("--functions", default="f1,f2,f3", help="Comma-separated ids")
    quad.add_argument("--n", dest="n_range", default="10:10:100", help="start:step:stop")
    quad.add_argument("--threads", type=int, default=None)
    _add_output_options(quad, "csv")
    quad.set_defaults(handler=quad_study_command)

    fim = commands.add_parser("fim-dump", help="Write a Fourier integration matrix")
    fim.add_argument("--N", type=int, required=True)
    fim.add_argument("--T", type=float, required=True)
    fim.add_argument("--kind", choices=["square", "rectangular", "terminal"], default="square")
    fim.add_argument("--points", default=None, help="Comma-separated upper limits")
    fim.add_argument("--summation", choices=["complex", "paired"], default="complex")
    _add_output_options(fim, "json")
    fim.set_defaults(handler=fim_dump_command)

    p1 = commands.add_parser("solve-p1", help="Solve benchmark Problem 1")
    p1.add_argument("--b", type=float, default=Problem1Params().b)
    p1.add_argument("--T", type=float, default=Problem1Params().T)
    p1.add_argument("--N", type=int, default=12)
    _add_periodicity_option(p1)
    _add_solve_options(p1)
    p1.set_defaults(handler=solve_p1_command)

    p2 = commands.add_parser("solve-p2", help="Solve the solar heating benchmark")
    p2.add_argument("--N", type=int, default=50)
    p2.add_argument("--eps", type=float, default=Problem2Params().eps_u2)
    _add_periodicity_option(p2)
    _add_solve_options(p2)
    p2.set_defaults(handler=solve_p2_command)

    validate = commands.add_parser("validate", help="Validate the built-in problems")
    validate.set_defaults(handler=validate_command)
    return parser


def quad_study_command(args: argparse.Namespace) -> int:
    ids = [f.strip() for f in args.functions.split(",") if f.strip()]
    unknown = [f for f in ids if f not in BUILTIN_FUNCTIONS]
    if not ids or unknown:
        raise InvalidInputError(
            f"Unknown functions {unknown}; choose from {sorted(BUILTIN_FUNCTIONS)}"
        )
    n_values = parse_n_range(args.n_range)
    threads = args.threads or settings.effective_threads
    reports = [run_convergence_study(get_test_function(f), n_values, threads) for f in ids]

    if args.format == "json":
        write_output(convergence_json(reports), args.output)
    elif args.output is not None and len(reports) > 1:
        for report in reports:
            write_output(convergence_csv(report), suffixed_path(args.output, report.function_id))
    elif args.output is not None:
        write_output(convergence_csv(reports[0]), args.output)
    else:
        blocks = [f"# function={r.function_id}\n" + convergence_csv(r) for r in reports]
        write_output("".join(blocks), None)
    return EXIT_OK


def fim_dump_command(args: argparse.Namespace) -> int:
    grid = make_grid(args.N, args.T)
    if args.kind == "square":
        matrix = build_square_fim(grid, args.summation)
    elif args.kind == "terminal":
        matrix = terminal_quadrature(grid)
    else:
        if not args.points:
            raise InvalidInputError("--kind rectangular needs --points")
        matrix = build_rectangular_fim(grid, parse_float_list(args.points), args.summation)

    text = fim_json(matrix) if args.format == "json" else fim_csv(matrix)
    write_output(text, args.output)
    return EXIT_OK


def _solver_config(args: argparse.Namespace) -> SolverConfig:
    config = load_solver_config(args.config) if args.config else SolverConfig()
    if args.multistart is not None:
        if args.multistart < 0:
            raise InvalidInputError("--multistart must be nonnegative")
        config = config.model_copy(update={"multistart_restarts": args.multistart})
    return config


def _emit_report(report: SolveReport, args: argparse.Namespace) -> int:
    trajectory = None
    if args.dense:
        if args.dense < 0:
            raise InvalidInputError("--dense must be nonnegative")
        trajectory = sample_trajectory(report, make_grid(report.N, report.T), args.dense)

    if args.format == "json":
        text = solve_report_json(report, include_timing=args.timing, trajectory=trajectory)
    else:
        text = solve_report_csv(report)
    write_output(text, args.output)
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


def _rows(report: SolveReport) -> str:
    return "on" if report.enforce_periodicity else "off"


def solve_p1_command(args: argparse.Namespace) -> int:
    params = Problem1Params(b=args.b, T=args.T)
    prob = make_problem1(params)
    config = _solver_config(args)
    make_grid(args.N, params.T)

    report = solve_problem(prob, args.N, config, PeriodicityMode(args.periodicity))

    print(
        f"solve-p1 b={params.b} T={params.T} N={report.N} periodicity={_rows(report)}: "
        f"status={report.solver_status.value} "
        f"J_N={report.J_N:.10e} adfe_inf={report.adfe_inf:.3e} "
        f"iters={report.solver_iters} time={report.wall_time_s:.2f}s",
        file=sys.stderr,
    )
    return _emit_report(report, args)


def solve_p2_command(args: argparse.Namespace) -> int:
    params = Problem2Params(eps_u2=args.eps)
    prob = make_problem2(params)
    config = _solver_config(args)
    make_grid(args.N, params.T)

    report = solve_problem(prob, args.N, config, PeriodicityMode(args.periodicity))

    offsets = np.abs(np.array(report.mean_state) - np.array([params.Tbar_E, params.Tbar_S]))
    slack = ", ".join(f"{s:.3e}" for s in report.constraint_slack_minima)
    print(
        f"solve-p2 N={report.N} periodicity={_rows(report)}: "
        f"status={report.solver_status.value} J_N={report.J_N:.10e} "
        f"adfe_inf={report.adfe_inf:.3e} set-point offsets T_E={offsets[0]:.4f} "
        f"T_S={offsets[1]:.4f} min slack [{slack}] time={report.wall_time_s:.2f}s",
        file=sys.stderr,
    )
    return _emit_report(report, args)


def validate_command(args: argparse.Namespace) -> int:
    ok = True
    for prob in (make_problem1(), make_problem2()):
        report = validate_problem(prob)
        ok &= report.passed
        print(f"{prob.name}: {'PASS' if report.passed else 'FAIL'}", file=sys.stderr)
        for check in report.failures:
            print(f"  {check.name}: {check.message}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_INVALID


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        setup_logging(level=args.log_level)
        logger.debug(f"Running {args.command}")
        if monitor.enabled:
            monitor.init(
                run_name=f"{settings.app_name}-{args.command}",
                config={
                    k: str(v) if isinstance(v, Path) else v
                    for k, v in vars(args).items()
                    if k != "handler"
                },
            )
        try:
            return args.handler(args)
        finally:
            monitor.finish()
    except FipsError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except ValidationError as e:
        print(f"error: invalid parameters: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
