"""Result tables and their CSV round-trip format.

The CSV layout is deliberately diff-able: '#'-prefixed metadata lines, one
`output` label column, then for every statistic a full-precision column
(17 significant digits, so doubles round-trip exactly) followed by a
4-decimal display column.
"""

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

FORMAT_LINE = "uqueue-result v1"
_DISPLAY_SUFFIX = "_display"


@dataclass
class ResultTable:
    """Rectangular table of statistics keyed by output labels."""

    name: str
    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.row_labels), len(self.col_labels)):
            raise ValidationError("table values must be rows x columns")
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("table values must be finite")

    def column(self, label: str) -> np.ndarray:
        return self.values[:, self.col_labels.index(label)]

    def cell(self, row: str, col: str) -> float:
        return float(self.values[self.row_labels.index(row), self.col_labels.index(col)])


def render_csv(table: ResultTable) -> str:
    """Render a table to CSV text (deterministic: no timestamps, fixed formats)."""
    buf = io.StringIO()
    buf.write(f"# {FORMAT_LINE}\n")
    buf.write(f"# table: {table.name}\n")
    for key in sorted(table.metadata):
        buf.write(f"# {key}: {table.metadata[key]}\n")
    writer = csv.writer(buf, lineterminator="\n")
    header = ["output"]
    for col in table.col_labels:
        header += [col, col + _DISPLAY_SUFFIX]
    writer.writerow(header)
    for i, row_label in enumerate(table.row_labels):
        row = [row_label]
        for v in table.values[i]:
            row += [f"{v:.17g}", f"{v:.4f}"]
        writer.writerow(row)
    return buf.getvalue()


def write_csv(table: ResultTable, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(render_csv(table))


def parse_csv(text: str) -> ResultTable:
    """Parse CSV produced by render_csv back into a ResultTable."""
    metadata = {}
    name = ""
    data_lines = []
    for line in text.splitlines():
        if line.startswith("#"):
            body = line[1:].strip()
            if body == FORMAT_LINE:
                continue
            if ":" not in body:
                raise ValidationError(f"malformed metadata line: {line!r}")
            key, value = body.split(":", 1)
            if key.strip() == "table":
                name = value.strip()
            else:
                metadata[key.strip()] = value.strip()
        elif line.strip():
            data_lines.append(line)
    if not data_lines:
        raise ValidationError("CSV carries no table data")
    rows = list(csv.reader(data_lines))
    header = rows[0]
    if header[0] != "output":
        raise ValidationError("first CSV column must be 'output'")
    keep = [
        j for j in range(1, len(header)) if not header[j].endswith(_DISPLAY_SUFFIX)
    ]
    col_labels = tuple(header[j] for j in keep)
    row_labels = tuple(r[0] for r in rows[1:])
    values = np.array([[float(r[j]) for j in keep] for r in rows[1:]])
    return ResultTable(name=name, row_labels=row_labels, col_labels=col_labels,
                       values=values, metadata=metadata)


def read_csv(path) -> ResultTable:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_csv(fh.read())


def render_curves_csv(name: str, labels, curves, metadata: dict) -> str:
    """CSV for a family of density curves: per label an (x, density) column pair."""
    if len(labels) != len(curves):
        raise ValidationError("one label per curve required")
    sizes = {len(c.x) for c in curves}
    if len(sizes) != 1:
        raise ValidationError("curves must share a grid size")
    buf = io.StringIO()
    buf.write(f"# {FORMAT_LINE}\n")
    buf.write(f"# table: {name}\n")
    for key in sorted(metadata):
        buf.write(f"# {key}: {metadata[key]}\n")
    for label, curve in zip(labels, curves):
        buf.write(f"# bandwidth {label}: {curve.bandwidth:.17g}\n")
    writer = csv.writer(buf, lineterminator="\n")
    header = ["i"]
    for label in labels:
        header += [f"x_{label}", f"f_{label}"]
    writer.writerow(header)
    for i in range(sizes.pop()):
        row = [str(i)]
        for curve in curves:
            row += [f"{curve.x[i]:.17g}", f"{curve.density[i]:.17g}"]
        writer.writerow(row)
    return buf.getvalue()
