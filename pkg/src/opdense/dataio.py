"""Dataset serialization: CSV and a small ARFF subset.

Both formats are byte-exact: values are written with 8 fixed decimals,
UTF-8, LF line endings, class column last. write -> read -> write is
byte identical.
"""

from __future__ import annotations

import re

import numpy as np

from .dataset import Dataset
from .errors import SchemaMismatch
from .labels import LabelScheme, infer_scheme, scheme_labels
from .rounding import fixed

ARFF_RELATION = "opcode_densities"


def write_csv(ds: Dataset) -> bytes:
    lines = [",".join(ds.attributes + ("class",))]
    for row, label in zip(ds.X, ds.labels):
        lines.append(",".join(fixed(v) for v in row) + "," + label)
    return ("\n".join(lines) + "\n").encode("utf-8")


def read_csv(data: bytes) -> Dataset:
    text = data.decode("utf-8")
    lines = [ln for ln in text.split("\n") if ln.strip()]
    if not lines:
        raise SchemaMismatch("empty CSV")
    header = lines[0].split(",")
    if not header or header[-1] != "class":
        raise SchemaMismatch("CSV header must end with a 'class' column")
    attributes = tuple(header[:-1])
    rows: list[list[float]] = []
    labels: list[str] = []
    for ln in lines[1:]:
        cells = ln.split(",")
        if len(cells) != len(header):
            raise SchemaMismatch(f"row has {len(cells)} cells, header has {len(header)}")
        try:
            rows.append([float(c) for c in cells[:-1]])
        except ValueError as exc:
            raise SchemaMismatch(f"non-numeric cell in row: {exc}") from exc
        labels.append(cells[-1])
    scheme = infer_scheme(labels)
    X = np.array(rows) if rows else np.zeros((0, len(attributes)))
    return Dataset(attributes=attributes, X=X, labels=tuple(labels), scheme=scheme)


def write_arff(ds: Dataset, relation: str = ARFF_RELATION) -> bytes:
    lines = [f"@relation {relation}", ""]
    for name in ds.attributes:
        lines.append(f"@attribute {name} numeric")
    lines.append("@attribute class {" + ",".join(scheme_labels(ds.scheme)) + "}")
    lines.append("")
    lines.append("@data")
    for row, label in zip(ds.X, ds.labels):
        lines.append(",".join(fixed(v) for v in row) + "," + label)
    return ("\n".join(lines) + "\n").encode("utf-8")


_ATTR_RE = re.compile(r"^@attribute\s+(\S+)\s+(.+)$", re.IGNORECASE)


def read_arff(data: bytes) -> Dataset:
    text = data.decode("utf-8")
    attributes: list[str] = []
    class_values: tuple[str, ...] | None = None
    rows: list[list[float]] = []
    labels: list[str] = []
    in_data = False
    for raw in text.split("\n"):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if not in_data:
            low = line.lower()
            if low.startswith("@relation"):
                continue
            if low.startswith("@data"):
                in_data = True
                continue
            m = _ATTR_RE.match(line)
            if not m:
                raise SchemaMismatch(f"unparseable header line: {line!r}")
            name, kind = m.group(1), m.group(2).strip()
            if kind.startswith("{"):
                if name != "class":
                    raise SchemaMismatch("only the class attribute may be nominal")
                class_values = tuple(v.strip() for v in kind.strip("{}").split(","))
            elif kind.lower() == "numeric":
                attributes.append(name)
            else:
                raise SchemaMismatch(f"unsupported attribute type {kind!r}")
        else:
            cells = line.split(",")
            if len(cells) != len(attributes) + 1:
                raise SchemaMismatch("data row width does not match the header")
            try:
                rows.append([float(c) for c in cells[:-1]])
            except ValueError as exc:
                raise SchemaMismatch(f"non-numeric cell: {exc}") from exc
            labels.append(cells[-1].strip())
    if class_values is None:
        raise SchemaMismatch("missing nominal class attribute")
    for scheme in LabelScheme:
        if set(class_values) == set(scheme_labels(scheme)):
            declared = scheme
            break
    else:
        raise SchemaMismatch(f"class values {class_values} match no known scheme")
    bad = set(labels) - set(class_values)
    if bad:
        raise SchemaMismatch(f"data labels outside the declared class set: {sorted(bad)}")
    X = np.array(rows) if rows else np.zeros((0, len(attributes)))
    return Dataset(attributes=tuple(attributes), X=X, labels=tuple(labels), scheme=declared)


def write_dataset(ds: Dataset, fmt: str) -> bytes:
    if fmt == "csv":
        return write_csv(ds)
    if fmt == "arff":
        return write_arff(ds)
    raise SchemaMismatch(f"unknown dataset format {fmt!r}")


def read_dataset(data: bytes, fmt: str) -> Dataset:
    if fmt == "csv":
        return read_csv(data)
    if fmt == "arff":
        return read_arff(data)
    raise SchemaMismatch(f"unknown dataset format {fmt!r}")


def format_for_path(path) -> str:
    suffix = str(path).rsplit(".", 1)[-1].lower()
    return "arff" if suffix == "arff" else "csv"
