"""
Spec-file I/O and the report encoders.

Besides file I/O this module owns the deterministic serialization used for
every report: fixed field order, floats in scientific notation with 15
significant digits, complex numbers as ``[re, im]`` and numpy arrays as
nested lists.
"""

import csv
import io
import json
import math
from typing import Any, Dict, List
from pathlib import Path

import numpy as np

from .base_class import BaseClass
from .exceptions import SpecFileError

FLOAT_FORMAT = ".14e"


def format_float(value: float) -> str:
    """Render a float with 15 significant digits; non-finite values as names."""
    if math.isnan(value):
        return "NaN"
    if math.isinf(value):
        return "Infinity" if value > 0 else "-Infinity"
    return format(value, FLOAT_FORMAT)


def to_plain(value: Any) -> Any:
    """
    Convert numpy scalars/arrays and complex numbers into plain JSON-ready data.

    Complex values become ``[re, im]`` pairs; dict insertion order is kept.
    """
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, np.ndarray):
        if value.ndim:
            return [to_plain(v) for v in value.tolist()]
        return to_plain(value.item())
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, (float, np.floating)):
        return float(value)
    if hasattr(value, "to_dict"):
        return to_plain(value.to_dict())
    return value


def _encode(value: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    close = " " * (indent * level)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [
            f"{pad}{json.dumps(k)}: {_encode(v, indent, level + 1)}"
            for k, v in value.items()
        ]
        return "{\n" + ",\n".join(items) + "\n" + close + "}"
    if isinstance(value, list):
        if not value:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in value):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in value) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in value]
        return "[\n" + ",\n".join(items) + "\n" + close + "]"
    if value is None or isinstance(value, bool):
        return json.dumps(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        text = format_float(value)
        return text if math.isfinite(value) else json.dumps(text)
    return json.dumps(str(value), ensure_ascii=False)


class DataProcessor(BaseClass):
    """
    File I/O for spec files and reports: JSON in, deterministic JSON or
    CSV out. Subclassed by the spec-file processor of the CLI.
    """

    def initialize(self) -> bool:
        self.log_debug("ready")
        return True

    def cleanup(self) -> None:
        self.log_debug("done")

    def read_json(self, file_path: str) -> Any:
        """
        Parse the JSON document at ``file_path``.

        Raises:
            FileNotFoundError: If the file does not exist
            SpecFileError: On invalid JSON, with line and column attached
        """
        path = Path(file_path)
        if not path.is_file():
            self.log_error(f"no such file: {file_path}")
            raise FileNotFoundError(f"No such file: {file_path}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            self.log_error(f"{file_path} is not valid JSON: {exc}")
            raise SpecFileError(exc.msg, line=exc.lineno, column=exc.colno) from exc
        self.log_info(f"read {file_path}")
        return data

    def write_text(self, content: str, file_path: str) -> None:
        """Write ``content`` to ``file_path``, creating parent directories."""
        path = Path(file_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content, encoding="utf-8")
        self.log_info(f"wrote {file_path} ({len(content)} chars)")

    def dumps_json(self, data: Any, indent: int = 2) -> str:
        """Report text: fixed key order, ``.14e`` floats and a final newline."""
        return _encode(to_plain(data), indent, 0) + "\n"

    def dumps_csv(self, rows: List[Dict[str, Any]], delimiter: str = ",") -> str:
        """
        Flat rows as CSV, columns in the key order of the first row.

        Returns:
            CSV text, or an empty string for no rows
        """
        if not rows:
            self.log_warning("no rows for CSV output")
            return ""
        columns = list(rows[0])
        buffer = io.StringIO()
        writer = csv.writer(buffer, delimiter=delimiter, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows([_csv_cell(row.get(key)) for key in columns] for row in rows)
        return buffer.getvalue()


def _csv_cell(value: Any) -> str:
    value = to_plain(value)
    if value is None:
        return ""
    if isinstance(value, float):
        return format_float(value)
    return str(value)
