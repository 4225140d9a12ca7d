"""Reader for the metrosim CSV schema.

Files carry '#'-prefixed metadata lines, then a header row, then comma
separated numeric rows (decimal '.', 'inf' allowed).  Rendering never
recomputes physics: whatever is plotted comes verbatim from these columns.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


class SchemaError(ValueError):
    """The CSV does not match the documented schema; the message names the column."""


@dataclass(frozen=True)
class Table:
    path: Path
    metadata: tuple[str, ...]
    columns: dict[str, np.ndarray]

    def column(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise SchemaError(f"column {name!r} missing from {self.path}")
        return self.columns[name]

    @property
    def rows(self) -> int:
        return 0 if not self.columns else len(next(iter(self.columns.values())))


def load_table(path: Path) -> Table:
    path = Path(path)
    metadata: list[str] = []
    header: list[str] | None = None
    rows: list[list[float]] = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line:
            continue
        if line.startswith("#"):
            metadata.append(line[1:].strip())
            continue
        if header is None:
            header = line.split(",")
            continue
        values = line.split(",")
        if len(values) != len(header):
            raise SchemaError(f"row width {len(values)} != header width {len(header)} in {path}")
        rows.append([float(v) for v in values])
    if header is None:
        raise SchemaError(f"no header row in {path}")
    data = np.array(rows, dtype=float) if rows else np.empty((0, len(header)))
    columns = {name: data[:, k] for k, name in enumerate(header)}
    return Table(path=path, metadata=tuple(metadata), columns=columns)


def series_keys(table: Table) -> list[tuple[float, float]]:
    """Distinct (R_a, R_b) pairs in first-appearance order: one plot series each."""
    r_a = table.column("R_a")
    r_b = table.column("R_b")
    seen: list[tuple[float, float]] = []
    for pair in zip(r_a.tolist(), r_b.tolist()):
        if pair not in seen:
            seen.append(pair)
    return seen
