"""
Result tables and the writers that put them on disk.

Floats are written with 17 significant digits so that repeated runs produce
byte-identical files.
"""
import abc
import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

from lrcone.errors import InvalidArgumentError, OutputError

logger = logging.getLogger(__name__)

# --- Configuration ---
CONFIG = {
    "FLOAT_FORMAT": ".17g",
    "JSON_INDENT": 2,
}
# --- End Configuration ---

SWEEP_COLUMNS = ("t", "r", "R", "measured", "truncated", "term1", "term2", "term3", "total", "mode", "margin")
BOUND_COLUMNS = ("t", "r", "R", "term1", "term2", "term3", "total", "mode")
FRONT_COLUMNS = ("t", "r_star", "epsilon")
CURVE_COLUMNS = ("t", "r_max", "v_g", "v_g_paper")
ASYMPTOTIC_COLUMNS = ("t", "r", "R", "log_term1", "log_term2", "log_term3", "term2_limit")
ASSUMPTION_A_COLUMNS = ("R", "f")
REPORT_COLUMNS = ("check", "point", "measured", "bound", "margin", "pass")


def format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, CONFIG["FLOAT_FORMAT"])
    if value is None:
        return ""
    return str(value)


def _json_value(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return format_value(value)
    return value


@dataclass
class Table:
    """A named table with a fixed column set."""
    name: str
    columns: Sequence[str]
    rows: list[tuple] = field(default_factory=list)

    def append(self, *values):
        if len(values) != len(self.columns):
            raise InvalidArgumentError(f"Table '{self.name}' expects {len(self.columns)} values, got {len(values)}")
        self.rows.append(tuple(values))

    def records(self) -> list[dict]:
        return [dict(zip(self.columns, row)) for row in self.rows]


class TableWriter(abc.ABC):
    """Writes one table to one file."""
    extension: str

    @abc.abstractmethod
    def write(self, table: Table, path: Path):
        pass


def render_csv(table: Table) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_value(v) for v in row])
    return buffer.getvalue()


class CsvWriter(TableWriter):
    extension = "csv"

    def write(self, table: Table, path: Path):
        with open(path, "w", newline="", encoding="utf-8") as handle:
            handle.write(render_csv(table))


class JsonWriter(TableWriter):
    extension = "json"

    def write(self, table: Table, path: Path):
        records = [{k: _json_value(v) for k, v in record.items()} for record in table.records()]
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(records, handle, indent=CONFIG["JSON_INDENT"])
            handle.write("\n")


class PlotDataWriter(TableWriter):
    """Whitespace-separated columns under a '#' header, for gnuplot and friends."""
    extension = "dat"

    def write(self, table: Table, path: Path):
        with open(path, "w", encoding="utf-8") as handle:
            handle.write("# " + " ".join(table.columns) + "\n")
            for row in table.rows:
                handle.write(" ".join(format_value(v).replace(" ", "_") or "nan" for v in row) + "\n")


WRITERS: dict[str, TableWriter] = {
    "csv": CsvWriter(),
    "json": JsonWriter(),
    "plotdata": PlotDataWriter(),
}


def emit(table: Table, formats: Iterable[str], directory: str | Path) -> list[Path]:
    """
    Writes `table` once per format into `directory` as <name>.<ext>.

    Raises:
        InvalidArgumentError: empty table or unknown format.
        OutputError: the directory or a file cannot be written.
    """
    if not table.rows:
        raise InvalidArgumentError(f"Refusing to emit empty table '{table.name}'")
    directory = Path(directory)
    written = []
    for fmt in formats:
        try:
            writer = WRITERS[fmt]
        except KeyError:
            raise InvalidArgumentError(f"Unknown output format '{fmt}'") from None
        path = directory / f"{table.name}.{writer.extension}"
        try:
            directory.mkdir(parents=True, exist_ok=True)
            writer.write(table, path)
        except OSError as e:
            raise OutputError(f"Could not write {path}: {e}") from e
        logger.info("Wrote %s", path)
        written.append(path)
    return written


def write_json(payload: dict, path: str | Path) -> Path:
    """Writes a summary document (fit.json, summary.json)."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as handle:
            json.dump({k: _json_value(v) for k, v in payload.items()}, handle,
                      indent=CONFIG["JSON_INDENT"], sort_keys=True)
            handle.write("\n")
    except OSError as e:
        raise OutputError(f"Could not write {path}: {e}") from e
    return path
