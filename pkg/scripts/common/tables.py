"""Tabular output shared by all commands: CSV with full double precision, JSON records."""

from pathlib import Path
from typing import Any, Iterable, Sequence
import csv
import json
import math

from scripts.common.errors import OutputExistsError

Row = dict[str, Any]


def format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".17g")
    if hasattr(value, "item"):
        return format_cell(value.item())
    return str(value)


def parse_cell(text: str) -> Any:
    if text == "":
        return None
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


def _plain(value: Any) -> Any:
    if hasattr(value, "item"):
        return value.item()
    return value


def check_writable(path: Path, force: bool) -> None:
    if path.exists() and not force:
        raise OutputExistsError(f"{path} already exists, use --force to overwrite")


def write_csv(path: str | Path, columns: Sequence[str], rows: Iterable[Row], force: bool = True) -> Path:
    """Writes rows as CSV with a header, floats to 17 significant digits.

    Raises:
        OutputExistsError: If the file exists and ``force`` is not set.
    """
    path = Path(path)
    check_writable(path, force)
    with path.open("w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_cell(row.get(c)) for c in columns])
    return path


def read_csv(path: str | Path) -> tuple[list[str], list[Row]]:
    with Path(path).open("r", newline="") as f:
        reader = csv.reader(f)
        columns = next(reader)
        rows = [{c: parse_cell(v) for c, v in zip(columns, line)} for line in reader]
    return columns, rows


def write_json(path: str | Path, columns: Sequence[str], rows: Iterable[Row], force: bool = True) -> Path:
    path = Path(path)
    check_writable(path, force)
    records = [{c: _plain(row.get(c)) for c in columns} for row in rows]
    with path.open("w") as f:
        json.dump(records, f, indent=2)
        f.write("\n")
    return path


def table_paths(prefix: str, name: str, as_json: bool = False) -> list[Path]:
    paths = [Path(f"{prefix}_{name}.csv")]
    if as_json:
        paths.append(Path(f"{prefix}_{name}.json"))
    return paths


def emit_tables(prefix: str, tables: Sequence[tuple[str, Sequence[str], list[Row]]],
                as_json: bool = False, force: bool = False) -> list[Path]:
    """Writes ``<prefix>_<name>.csv`` (and ``.json``) for every (name, columns, rows).

    All targets are checked before any is written.
    """
    for name, _, _ in tables:
        for target in table_paths(prefix, name, as_json):
            check_writable(target, force)
    written = []
    for name, columns, rows in tables:
        csv_path, *json_path = table_paths(prefix, name, as_json)
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        written.append(write_csv(csv_path, columns, rows))
        if json_path:
            written.append(write_json(json_path[0], columns, rows))
    return written
