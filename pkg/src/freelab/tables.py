"""Deterministic CSV emission for workbench results.

All numbers are rendered with 9 significant digits and no locale or
timestamp dependence, so a rerun with the same inputs is byte-identical.
"""

from __future__ import annotations

import io
from typing import Iterable, Sequence


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def render_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    out = io.StringIO()
    out.write(",".join(header) + "\n")
    for row in rows:
        if len(row) != len(header):
            raise ValueError(
                f"row width {len(row)} does not match header width {len(header)}"
            )
        out.write(",".join(format_value(v) for v in row) + "\n")
    return out.getvalue()


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    text = render_csv(header, rows)
    with open(path, "w", newline="") as fh:
        fh.write(text)
