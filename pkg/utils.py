"""Formatting helpers shared by the CLI and the HTTP surface."""

import json
import math
from pathlib import Path
from typing import Any

import click
import pandas as pd
from rich.console import Console
from rich.table import Table

from constants import OutputFormat


def significant(value: Any, digits: int = OutputFormat.TEXT_SIGNIFICANT_DIGITS) -> str:
    """Render a number with `digits` significant digits; None and NaN print as '-'."""
    if value is None:
        return "-"
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "-"
        return f"{value:.{digits}g}"
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(isinstance(v, float) for v in value):
        re, im = value
        return f"{re:.{digits}g}{im:+.{digits}g}j"
    return str(value)


def json_safe(obj: Any) -> Any:
    """Replace NaN and infinities with None, recursively."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_safe(v) for v in obj]
    return obj


def frame_records(frame: pd.DataFrame) -> list[dict[str, Any]]:
    """Rows as plain dicts with NaN mapped to None."""
    records = frame.astype(object).where(frame.notna(), None).to_dict(orient="records")
    return [json_safe(row) for row in records]


def render_frame(frame: pd.DataFrame, output_format: str, title: str | None = None) -> str:
    """Serialize a result frame: csv (full precision), json (full precision, NaN -> null) or text."""
    if output_format == OutputFormat.CSV:
        return frame.to_csv(index=False, float_format="%.17g")
    if output_format == OutputFormat.JSON:
        return json.dumps(frame_records(frame), indent=2)

    table = Table(title=title)
    for column in frame.columns:
        table.add_column(str(column), justify="right")
    for row in frame_records(frame):
        table.add_row(*(significant(v) for v in row.values()))
    return render_rich(table)


def render_record(record: dict[str, Any], output_format: str, title: str | None = None) -> str:
    """Serialize a parameter dump; text mode flattens it into a two-column table."""
    if output_format != OutputFormat.TEXT:
        return json.dumps(json_safe(record), indent=2)

    table = Table(title=title, show_header=False)
    table.add_column("field")
    table.add_column("value", justify="right")
    for key, value in record.items():
        if key == "factors":
            for i, factor in enumerate(value, start=1):
                table.add_row(
                    f"factor {i}",
                    f"{factor['kind']} A={significant(factor['A'])} n={significant(factor['n'])}"
                    + (f" b={significant(factor['b'])}" if factor["kind"] == "exponential" else ""),
                )
        elif isinstance(value, dict):
            for name, v in value.items():
                table.add_row(name, significant(v))
        elif isinstance(value, list) and value and not isinstance(value[0], float):
            table.add_row(key, str(len(value)))
        elif isinstance(value, list):
            table.add_row(key, ", ".join(significant(v) for v in value))
        else:
            table.add_row(key, significant(value))
    return render_rich(table)


def render_rich(renderable) -> str:
    console = Console(width=160)
    with console.capture() as capture:
        console.print(renderable)
    return capture.get()


def write_output(text: str, out: str | None) -> None:
    """Write to `out` or to stdout."""
    if out is None:
        click.echo(text, nl=not text.endswith("\n"))
        return
    Path(out).write_text(text)
