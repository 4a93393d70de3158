"""CSV and JSON artifact persistence with logging and type hints"""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ValidationError

from .config import get_settings
from .errors import UsageError
from .models import PlantSpec, RegionSlice, RunConfig, SliceCell, SweepRow, Verdict
from .simulator import Trajectory

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = (
    "plant",
    "kp",
    "ki",
    "kd",
    "trial",
    "in_omega1",
    "in_omega2",
    "status",
    "verdict",
    "final_error",
    "error_message",
)


def format_value(value: Any) -> str:
    """Floats to FLOAT_DIGITS significant digits, true/false, "" for None"""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.*e" % (get_settings().FLOAT_DIGITS - 1, float(value))
    if isinstance(value, Verdict):
        return value.value
    return str(value)


def _parse_bool(text: str) -> bool:
    if text not in ("true", "false"):
        raise ValueError(f"expected true/false, got {text!r}")
    return text == "true"


def _write_csv(
    path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
            count += 1
    logger.info("Saved %s (%d rows)", path, count)
    return path


def _read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader]


# Region slices


def write_slice_csv(grid: RegionSlice, path: Path) -> Path:
    """One row per cell in row-major order"""
    header = [*grid.axes, "in_omega1", "in_omega2", "gap1", "gap2"]
    rows = (
        (c.x, c.y, c.in_omega1, c.in_omega2, c.gap1, c.gap2) for c in grid.cells
    )
    return _write_csv(path, header, rows)


def read_slice_csv(path: Path) -> tuple[tuple[str, str], list[SliceCell]]:
    """
    Read a region slice CSV.

    Returns:
        Free axis names and the cells in file order
    """
    header, rows = _read_csv(path)
    cells = [
        SliceCell(
            x=float(r[0]),
            y=float(r[1]),
            in_omega1=_parse_bool(r[2]),
            in_omega2=_parse_bool(r[3]),
            gap1=float(r[4]),
            gap2=float(r[5]),
        )
        for r in rows
    ]
    return (header[0], header[1]), cells


# Trajectories


def trajectory_columns(n: int, with_v: bool = False) -> list[str]:
    columns = ["t"]
    for name in ("x1", "x2", "u"):
        columns += [f"{name}_{i}" for i in range(1, n + 1)]
    columns.append("err_norm")
    if with_v:
        columns.append("V")
    return columns


def write_trajectory_csv(
    traj: Trajectory, path: Path, V: Optional[NDArray[np.float64]] = None
) -> Path:
    """Columns t, x1_*, x2_*, u_*, err_norm and V when a certificate is attached"""
    if V is not None and len(V) != traj.times.size:
        raise ValueError("V must have one value per sample")
    header = trajectory_columns(traj.n, V is not None)
    rows = []
    for i, t in enumerate(traj.times):
        row = [t, *traj.x1[i], *traj.x2[i], *traj.u[i], traj.err_norm[i]]
        if V is not None:
            row.append(V[i])
        rows.append(row)
    return _write_csv(path, header, rows)


def read_trajectory_csv(path: Path) -> dict[str, NDArray[np.float64]]:
    """Column name -> values"""
    header, rows = _read_csv(path)
    data = np.array([[float(v) for v in r] for r in rows], dtype=float).reshape(
        len(rows), len(header)
    )
    return {name: data[:, j] for j, name in enumerate(header)}


# Sweep maps


def write_sweep_csv(rows: Sequence[SweepRow], path: Path) -> Path:
    """Convergence map, one row per (plant, gains, trial)"""
    return _write_csv(
        path, SWEEP_COLUMNS, ([getattr(r, c) for c in SWEEP_COLUMNS] for r in rows)
    )


def read_sweep_csv(path: Path) -> list[SweepRow]:
    header, rows = _read_csv(path)
    if tuple(header) != SWEEP_COLUMNS:
        raise ValueError(f"unexpected sweep header {header}")
    result = []
    for r in rows:
        record = dict(zip(header, r))
        result.append(
            SweepRow(
                plant=int(record["plant"]),
                kp=float(record["kp"]),
                ki=float(record["ki"]),
                kd=float(record["kd"]),
                trial=int(record["trial"]),
                in_omega1=_parse_bool(record["in_omega1"]),
                in_omega2=_parse_bool(record["in_omega2"]),
                status=record["status"],
                verdict=Verdict(record["verdict"]) if record["verdict"] else None,
                final_error=(
                    float(record["final_error"]) if record["final_error"] else None
                ),
                error_message=record["error_message"] or None,
            )
        )
    return result


# Reports and configuration


def write_report(report: BaseModel, path: Path) -> Path:
    """Structured JSON report"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info("Report saved: %s", path)
    return path


def _field_path(exc: ValidationError) -> tuple[str, str]:
    error = exc.errors()[0]
    field = ".".join(str(part) for part in error["loc"])
    return field, error["msg"]


def _load_json(path: Path, field: str) -> Any:
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"file not found: {path}", field=field)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise UsageError(f"invalid JSON in {path}: {e}", field=field) from e


def load_plant_spec(path: Path) -> PlantSpec:
    """Read and validate a plant specification file"""
    data = _load_json(path, "plant_file")
    try:
        return PlantSpec.model_validate(data)
    except ValidationError as e:
        field, msg = _field_path(e)
        raise UsageError(msg, field=f"plant_file.{field}") from e


def load_run_config(path: Path) -> RunConfig:
    """
    Read and validate a run configuration.

    Args:
        path: JSON file with a "schema" version field

    Returns:
        RunConfig; a referenced plant_file is resolved relative to the config
        and merged into the plant block
    """
    path = Path(path)
    data = _load_json(path, "config")
    try:
        config = RunConfig.model_validate(data)
    except ValidationError as e:
        field, msg = _field_path(e)
        raise UsageError(msg, field=field) from e

    if config.plant_file is not None:
        plant_path = Path(config.plant_file)
        if not plant_path.is_absolute():
            plant_path = path.parent / plant_path
        config = config.model_copy(update={"plant": load_plant_spec(plant_path)})
    logger.debug("Loaded run config %s", path)
    return config
