"""Result-table formatting shared by the analysis layer and the CLI.

Reports are deterministic text: no timestamps, stable row order, repr-based
float formatting.  Every report carries the seed and a digest of the full
configuration so any row can be re-derived from the report alone.
"""

from __future__ import annotations

import hashlib
import io
from typing import Iterable

from .protocols import PartyOutcome, WorldOutcome


def config_digest(config: dict) -> str:
    """Stable short digest of a flat or nested string mapping."""
    lines = []
    for key in sorted(config):
        value = config[key]
        if isinstance(value, dict):
            for sub in sorted(value):
                lines.append(f"{key}.{sub}={value[sub]}")
        else:
            lines.append(f"{key}={value}")
    digest = hashlib.sha256("\n".join(lines).encode()).hexdigest()
    return digest[:16]


def fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return str(value)


def rows_to_csv(rows: list[dict], fieldnames: list[str], header_lines: Iterable[str]) -> str:
    out = io.StringIO()
    for line in header_lines:
        out.write(f"# {line}\n")
    out.write(",".join(fieldnames) + "\n")
    for row in rows:
        out.write(",".join(fmt(row.get(name)) for name in fieldnames) + "\n")
    return out.getvalue()


def rows_to_structured(rows: list[dict], fieldnames: list[str], header_lines: Iterable[str]) -> str:
    out = io.StringIO()
    for line in header_lines:
        out.write(f"# {line}\n")
    for idx, row in enumerate(rows):
        out.write(f"[row {idx}]\n")
        for name in fieldnames:
            out.write(f"{name} = {fmt(row.get(name))}\n")
        out.write("\n")
    return out.getvalue()


def render_rows(rows, fieldnames, header_lines, fmt_name: str) -> str:
    if fmt_name == "csv":
        return rows_to_csv(rows, fieldnames, header_lines)
    if fmt_name == "structured":
        return rows_to_structured(rows, fieldnames, header_lines)
    raise ValueError(f"unknown report format {fmt_name!r}")


def party_outcome_label(outcome: PartyOutcome) -> str:
    if outcome.kind == "value":
        return f"value:{outcome.value}"
    return outcome.kind


def world_outcome_label(outcome: WorldOutcome) -> str:
    return f"p1={party_outcome_label(outcome.p1)}|p2={party_outcome_label(outcome.p2)}"
