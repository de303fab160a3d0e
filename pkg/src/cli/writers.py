"""CSV and JSON emitters for CLI results.

CSV floats use 17 significant digits so every value re-parses to the same
double; JSON relies on the shortest round-trip repr of the json module.
"""

import json
import sys
from pathlib import Path
from typing import Any, Optional

from src.analysis.error_bounds import ConvergenceReport
from src.config import settings
from src.control.discretizer import SolveReport, TrajectorySample
from src.spectral.integration import IntegrationMatrix


def format_float(value: Optional[float]) -> str:
    if value is None:
        return ""
    return f"{value:.{settings.csv_significant_digits}g}"


def _csv(header: list[str], rows: list[list[Any]]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(
            ",".join(
                format_float(v) if isinstance(v, float) or v is None else str(v) for v in row
            )
        )
    return "\n".join(lines) + "\n"


def dump_json(payload: Any) -> str:
    return json.dumps(payload, indent=2) + "\n"


def convergence_csv(report: ConvergenceReport) -> str:
    """Columns N, inf_error, euclid_error, bound (empty when the bound does not exist)."""
    return _csv(
        ["N", "inf_error", "euclid_error", "bound"],
        [[row.N, row.inf_error, row.euclid_error, row.bound] for row in report.rows],
    )


def convergence_json(reports: list[ConvergenceReport]) -> str:
    return dump_json([report.model_dump() for report in reports])


def fim_csv(matrix: IntegrationMatrix) -> str:
    """One row per upper integration limit y, followed by that row's N entries."""
    header = ["y"] + [f"theta_{j}" for j in range(matrix.grid.N)]
    rows = [
        [float(y)] + [float(v) for v in entries]
        for y, entries in zip(matrix.upper_limits, matrix.entries)
    ]
    return _csv(header, rows)


def fim_json(matrix: IntegrationMatrix) -> str:
    return dump_json(matrix.to_dict())


def solve_report_payload(
    report: SolveReport,
    include_timing: bool = False,
    trajectory: Optional[TrajectorySample] = None,
) -> dict:
    exclude = None if include_timing else {"wall_time_s"}
    payload = report.model_dump(mode="json", exclude=exclude)
    if trajectory is not None:
        payload["trajectory"] = trajectory.model_dump()
    return payload


def solve_report_json(
    report: SolveReport,
    include_timing: bool = False,
    trajectory: Optional[TrajectorySample] = None,
) -> str:
    return dump_json(solve_report_payload(report, include_timing, trajectory))


def solve_report_csv(report: SolveReport) -> str:
    """Node-indexed rows: t_j, states, controls and the ADFE of each state component."""
    n = len(report.x_nodes[0])
    m = len(report.u_nodes[0])
    header = (
        ["t"]
        + [f"x{i + 1}" for i in range(n)]
        + [f"u{i + 1}" for i in range(m)]
        + [f"adfe_x{i + 1}" for i in range(n)]
    )
    rows = []
    for j in range(report.N):
        t = report.T * j / report.N
        adfe = [report.adfe[i * report.N + j] for i in range(n)]
        rows.append([float(t)] + report.x_nodes[j] + report.u_nodes[j] + adfe)
    return _csv(header, rows)


def write_output(text: str, path: Optional[Path]) -> None:
    """Write to ``path``, or to stdout when no path (or "-") is given."""
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def suffixed_path(path: Path, tag: str) -> Path:
    """``out.csv`` with tag ``f2`` becomes ``out_f2.csv``."""
    return path.with_name(f"{path.stem}_{tag}{path.suffix}")
