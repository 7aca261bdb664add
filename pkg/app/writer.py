"""CSV and JSON result files.

Files are UTF-8 with LF line endings and a fixed column order. Floats are
written with ``repr`` so values round-trip exactly and reruns produce
byte-identical files.
"""
import json
import os
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence

import aiofiles

from app.exceptions import OutputError
from app.logger import logger
from app.schema import SCHEMA_VERSION, NormRecord, RateReport, ResultEnvelope, TrajectorySummary
from app.stepper import SchemeConfig, TrajectoryState


TRAJECTORY_COLUMNS = ("n", "t", "norm_V", "norm_U")
FINAL_STATE_COLUMNS = ("x", "V", "U")
ERROR_COLUMNS = ("resolution", "h_or_k", "strong_error", "stderr")
HISTORY_COLUMNS = ("resolution", "point", "t", "strong_error")
PATH_COLUMNS = ("n", "t", "x", "V", "U")


def _cell(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def to_csv(columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    lines = [",".join(columns)]
    lines.extend(",".join(_cell(value) for value in row) for row in rows)
    return "\n".join(lines) + "\n"


def trajectory_csv(history: List[NormRecord]) -> str:
    return to_csv(TRAJECTORY_COLUMNS, ((r.n, r.t, r.norm_V, r.norm_U) for r in history))


def final_state_csv(summary: TrajectorySummary) -> str:
    return to_csv(FINAL_STATE_COLUMNS, zip(summary.nodes, summary.final_V, summary.final_U))


def path_csv(states: List[TrajectoryState], cfg: SchemeConfig) -> str:
    rows = []
    for state in states:
        x = state.V.mesh.all_nodes()
        for node, v, u in zip(x, state.V.with_boundary(), state.U.with_boundary()):
            rows.append((state.n, cfg.time(state.n), float(node), float(v), float(u)))
    return to_csv(PATH_COLUMNS, rows)


def errors_csv(report: RateReport) -> str:
    return to_csv(
        ERROR_COLUMNS,
        ((row.resolution, row.h_or_k, row.strong_error, row.stderr) for row in report.rows),
    )


def error_history_csv(report: RateReport, T: float) -> str:
    rows = []
    for row in report.rows:
        points = row.history or []
        for index, error in enumerate(points, start=1):
            rows.append((row.resolution, index, T * index / len(points), error))
    return to_csv(HISTORY_COLUMNS, rows)


def rate_json(report: RateReport, config: Dict[str, Any]) -> str:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "kind": report.kind.value,
        "slope": report.slope,
        "intercept": report.intercept,
        "residual": report.residual,
        "expected_rate": report.expected_rate,
        "samples": report.samples,
        "ladder_is_default": report.ladder_is_default,
        "config": config,
    }
    return json.dumps(payload, indent=2) + "\n"


def envelope_json(envelope: ResultEnvelope) -> str:
    return envelope.model_dump_json(indent=2) + "\n"


async def save_file(content: str, file_path: Path) -> Path:
    """Write ``content`` to ``file_path``, creating its directory first."""
    try:
        directory = os.path.dirname(file_path)
        if directory and not os.path.exists(directory):
            os.makedirs(directory)

        async with aiofiles.open(file_path, "w", encoding="utf-8", newline="\n") as file:
            await file.write(content)
    except OSError as e:
        raise OutputError(f"Error saving {file_path}: {e}")
    logger.debug(f"Wrote {file_path}")
    return Path(file_path)


class ResultWriter:
    """Writes the files of one command into an output directory."""

    def __init__(self, out_dir: Path):
        self.out_dir = Path(out_dir)

    async def _save(self, name: str, content: str) -> Path:
        return await save_file(content, self.out_dir / name)

    async def write_trajectory(self, summary: TrajectorySummary, envelope: ResultEnvelope) -> List[Path]:
        return [
            await self._save("trajectory.csv", trajectory_csv(summary.history)),
            await self._save("final_state.csv", final_state_csv(summary)),
            await self._save("envelope.json", envelope_json(envelope)),
        ]

    async def write_path(self, states: List[TrajectoryState], cfg: SchemeConfig) -> Path:
        return await self._save("path.csv", path_csv(states, cfg))

    async def write_rate(
        self, report: RateReport, envelope: ResultEnvelope, T: float
    ) -> List[Path]:
        paths = [
            await self._save("errors.csv", errors_csv(report)),
            await self._save("rate.json", rate_json(report, envelope.config)),
        ]
        if any(row.history for row in report.rows):
            paths.append(await self._save("error_history.csv", error_history_csv(report, T)))
        paths.append(await self._save("envelope.json", envelope_json(envelope)))
        return paths

    async def write_checks(self, envelope: ResultEnvelope) -> List[Path]:
        return [await self._save("validation.json", envelope_json(envelope))]
