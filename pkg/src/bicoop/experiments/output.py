"""Result tables and their CSV / plot-data serializations."""

from __future__ import annotations

import math
import subprocess
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np


@dataclass(frozen=True)
class Curve:
    scheme: str
    metric: str
    column: str
    error_column: str | None = None


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[list[Any]]
    x_column: str
    curves: list[Curve] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        for r in self.rows:
            if len(r) != len(self.columns):
                raise ValueError(f"row has {len(r)} cells for {len(self.columns)} columns")
            for v in r:
                if isinstance(v, float) and not math.isfinite(v):
                    raise ValueError(f"non-finite cell in row {r}")

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def sorted(self) -> "ResultTable":
        i = self.columns.index(self.x_column)
        rows = sorted(self.rows, key=lambda r: r[i])
        return ResultTable(self.columns, rows, self.x_column, self.curves, self.metadata)


def format_number(v) -> str:
    """Positional decimal with 10 significant digits; integers and text pass through."""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return np.format_float_positional(float(v), precision=10, unique=False,
                                          fractional=False, trim="-")
    return str(v)


def build_id() -> str:
    """``git describe`` of the source checkout, else the package version."""
    here = Path(__file__).resolve().parent
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"], cwd=here,
                             capture_output=True, text=True, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    try:
        from importlib.metadata import version
        return "v" + version("artifact")
    except Exception:
        return "unknown"


def _meta_lines(meta: dict) -> list[str]:
    lines = []
    for k, v in meta.items():
        if isinstance(v, (list, tuple)):
            v = "[" + ", ".join(format_number(x) for x in v) + "]"
        else:
            v = format_number(v)
        lines.append(f"# {k}={v}")
    return lines


def _write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc


def emit_csv(table: ResultTable, path) -> None:
    t = table.sorted()
    lines = _meta_lines(t.metadata)
    lines.append(",".join(t.columns))
    lines += [",".join(format_number(v) for v in r) for r in t.rows]
    _write(Path(path), "\n".join(lines) + "\n")


def emit_plot_data(table: ResultTable, path) -> None:
    """gnuplot blocks, one per curve, separated by two blank lines (``index`` n)."""
    t = table.sorted()
    xi = t.columns.index(t.x_column)
    blocks = []
    for n, c in enumerate(t.curves):
        yi = t.columns.index(c.column)
        ei = t.columns.index(c.error_column) if c.error_column else None
        cols = f"{t.x_column} {c.column}" + (f" {c.error_column}" if ei is not None else "")
        lines = [f"# index {n}: scheme={c.scheme} metric={c.metric}", f"# columns: {cols}"]
        for r in t.rows:
            cells = [r[xi], r[yi]] + ([r[ei]] if ei is not None else [])
            lines.append(" ".join(format_number(v) for v in cells))
        blocks.append("\n".join(lines))
    head = "\n".join(_meta_lines(t.metadata))
    _write(Path(path), head + "\n" + "\n\n\n".join(blocks) + "\n")


def read_csv(path) -> tuple[list[str], list[list[str]], dict[str, str]]:
    """Minimal reader used by tests and tooling: skips '#' lines, returns text cells."""
    meta, rows, header = {}, [], None
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            k, _, v = line[1:].strip().partition("=")
            meta[k] = v
        elif header is None:
            header = line.split(",")
        elif line:
            rows.append(line.split(","))
    return header or [], rows, meta
