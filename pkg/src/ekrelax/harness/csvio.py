"""Flat CSV files with a commented parameter echo.

Layout::

    # key = value          (zero or more parameter lines)
    t,value,deriv          (header)
    0,1,-0.5               (rows; 17 significant digits)

Lines end with ``\\n`` on every platform, so identical data gives identical
bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ValidationError
from ..operators import Trajectory

__all__ = [
    "CsvTable",
    "format_value",
    "read_csv",
    "read_trajectory",
    "write_csv",
    "write_trajectory",
]


def format_value(x: object) -> str:
    """Render a parameter or cell value; floats round-trip exactly."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        # shortest string that parses back to the same double
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def _parse_scalar(text: str) -> object:
    text = text.strip()
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


@dataclass(frozen=True)
class CsvTable:
    columns: tuple[str, ...]
    data: np.ndarray
    params: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        try:
            return self.data[:, self.columns.index(name)]
        except ValueError:
            raise ValidationError(f"column {name!r} not in {self.columns}") from None


def write_csv(
    path: str | Path,
    columns: list[str] | tuple[str, ...],
    data: np.ndarray,
    params: dict | None = None,
) -> Path:
    path = Path(path)
    data = np.atleast_2d(np.asarray(data, dtype=np.float64))
    if data.size and data.shape[1] != len(columns):
        raise ValidationError(f"{len(columns)} columns but data has shape {data.shape}")

    lines = [f"# {k} = {format_value(v)}" for k, v in (params or {}).items()]
    lines.append(",".join(columns))
    for row in data if data.size else ():
        lines.append(",".join(format(float(x), ".17g") for x in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def read_csv(path: str | Path) -> CsvTable:
    params: dict = {}
    header: tuple[str, ...] | None = None
    rows: list[list[float]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                key, sep, value = line[1:].partition("=")
                if sep:
                    params[key.strip()] = _parse_scalar(value)
                continue
            if header is None:
                header = tuple(c.strip() for c in line.split(","))
                continue
            cells = line.split(",")
            if len(cells) != len(header):
                raise ValidationError(f"{path}:{lineno}: expected {len(header)} cells")
            try:
                rows.append([float(c) for c in cells])
            except ValueError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from None
    if header is None:
        raise ValidationError(f"{path}: missing header row")
    data = np.array(rows, dtype=np.float64).reshape(-1, len(header))
    return CsvTable(header, data, params)


def write_trajectory(path: str | Path, traj: Trajectory, params: dict | None = None) -> Path:
    """Write ``t,value[,deriv]``."""
    cols = [traj.times, traj.values]
    names = ["t", "value"]
    if traj.derivs is not None:
        cols.append(traj.derivs)
        names.append("deriv")
    return write_csv(path, names, np.column_stack(cols) if len(traj) else np.empty((0, 0)), params)


def read_trajectory(path: str | Path) -> tuple[Trajectory, dict]:
    table = read_csv(path)
    if table.columns[:2] != ("t", "value"):
        raise ValidationError(f"{path}: not a trajectory file (header {table.columns})")
    derivs = table.column("deriv") if "deriv" in table.columns else None
    return Trajectory(table.column("t"), table.column("value"), derivs), table.params
