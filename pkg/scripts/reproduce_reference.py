#!/usr/bin/env python3
"""Solve every Problem 1 reference row and compare J_N with the reference optimum."""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.control.problems import REFERENCE_ROWS, Problem1Params, make_problem1
from src.solver.auglag import solve_problem
from src.solver.config import SolverConfig
from src.utils.logging import get_logger, setup_logging

setup_logging()
logger = get_logger(__name__)


def main():
    """Main entry point."""
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--multistart", type=int, default=0, help="Perturbed restarts per row")
    args = parser.parse_args()

    config = SolverConfig(multistart_restarts=args.multistart)
    print(f"{'b':>7} {'T':>11} {'N':>3} {'J_N':>16} {'reference':>16} {'ADFE':>9}  status")
    for row in REFERENCE_ROWS:
        prob = make_problem1(Problem1Params(b=row.b, T=row.T))
        report = solve_problem(prob, row.N, config)
        print(
            f"{row.b:7.4f} {row.T:11.8f} {row.N:3d} {report.J_N:16.8e} "
            f"{row.reference_J:16.8e} {report.adfe_inf:9.2e}  {report.solver_status.value}"
            f" ({'on' if report.enforce_periodicity else 'off'})"
        )

    logger.info("Table reproduction complete")


if __name__ == "__main__":
    main()
