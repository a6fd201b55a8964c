"""KEEL ``.dat`` ingestion, min-max scaling and stratified fold plans.

Nominal input attributes are one-hot encoded (columns in declared value
order); the output attribute becomes an integer label in declared value order.
The minority class is the one with the fewest samples.
"""

from __future__ import annotations

import os
import re
import warnings
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .exceptions import DataError, FormatError, ParameterError
from .numerics import RngStream

_ATTR = re.compile(r"@attribute\s+('[^']*'|\S+)\s*(.*)$", re.IGNORECASE)
_RANGE = re.compile(r"^(\w+)\s*(?:\[\s*([^,\]]+)\s*,\s*([^\]]+)\])?\s*$")
NUMERIC_TYPES = ("real", "integer", "numeric")


@dataclass
class Attribute:
    name: str
    kind: str  # "real", "integer" or "nominal"
    low: float | None = None
    high: float | None = None
    values: tuple = ()


@dataclass(eq=False)
class Dataset:
    """Parsed KEEL relation.

    ``raw_features`` holds the parsed numeric inputs (nominal inputs already
    one-hot encoded); ``features`` is the same matrix min-max scaled to [0, 1]
    over the whole dataset.
    """

    name: str
    attributes: list
    output: Attribute
    raw_features: np.ndarray
    labels: np.ndarray
    class_names: tuple
    feature_names: tuple = field(default=())

    @property
    def features(self):
        return minmax_normalize(self.raw_features)[0]

    @property
    def n_samples(self):
        return self.labels.size

    @property
    def n_attributes(self):
        return len(self.attributes)

    @property
    def n_classes(self):
        return len(self.class_names)

    @property
    def class_counts(self):
        return np.bincount(self.labels, minlength=self.n_classes)

    @property
    def minority_class(self):
        # argmin returns the first index on ties
        return int(np.argmin(self.class_counts))

    def subset(self, idx):
        return Dataset(self.name, self.attributes, self.output, self.raw_features[idx],
                       self.labels[idx], self.class_names, self.feature_names)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (self.name == other.name and self.attributes == other.attributes
                and self.output == other.output and self.class_names == other.class_names
                and self.feature_names == other.feature_names
                and np.array_equal(self.raw_features, other.raw_features)
                and np.array_equal(self.labels, other.labels))


def _parse_attribute(line, lineno):
    m = _ATTR.match(line)
    if not m:
        raise FormatError(f"malformed attribute declaration: {line!r}", lineno)
    name, decl = m.group(1).strip("'"), m.group(2).strip()
    if decl.startswith("{"):
        if not decl.endswith("}"):
            raise FormatError("unterminated nominal value set", lineno)
        values = tuple(v.strip() for v in decl[1:-1].split(",") if v.strip())
        if not values:
            raise FormatError(f"nominal attribute {name!r} has no values", lineno)
        return Attribute(name, "nominal", values=values)
    r = _RANGE.match(decl)
    if not r or r.group(1).lower() not in NUMERIC_TYPES:
        raise FormatError(f"unsupported attribute type {decl!r}", lineno)
    kind = "integer" if r.group(1).lower() == "integer" else "real"
    try:
        low = float(r.group(2)) if r.group(2) is not None else None
        high = float(r.group(3)) if r.group(3) is not None else None
    except ValueError:
        raise FormatError(f"bad range for attribute {name!r}", lineno) from None
    return Attribute(name, kind, low, high)


def _names(rest):
    return [n.strip() for n in rest.split(",") if n.strip()]


def parse_keel(text, name=None, require_all_classes=True):
    """Parse a KEEL file given as a string or an iterable of lines."""
    lines = text.splitlines() if isinstance(text, str) else list(text)
    relation = name
    attrs = []
    inputs = outputs = None
    data_start = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        low = line.lower()
        if low.startswith("@relation"):
            rel = line[len("@relation"):].strip().strip("'")
            relation = relation or rel
        elif low.startswith("@attribute"):
            attrs.append(_parse_attribute(line, lineno))
        elif low.startswith("@inputs") or low.startswith("@input "):
            inputs = _names(line.split(None, 1)[1] if " " in line else "")
        elif low.startswith("@outputs") or low.startswith("@output "):
            outputs = _names(line.split(None, 1)[1] if " " in line else "")
        elif low.startswith("@data"):
            data_start = lineno
            break
        else:
            raise FormatError(f"unexpected header line {line!r}", lineno)
    if data_start is None:
        raise FormatError("missing @data section")
    if not attrs:
        raise FormatError("no attributes declared")

    by_name = {a.name: a for a in attrs}
    out_name = outputs[0] if outputs else attrs[-1].name
    if out_name not in by_name:
        raise FormatError(f"unknown output attribute {out_name!r}")
    output = by_name[out_name]
    if output.kind != "nominal":
        raise FormatError("output attribute must be nominal")
    in_names = inputs if inputs else [a.name for a in attrs if a.name != out_name]
    for n in in_names:
        if n not in by_name:
            raise FormatError(f"unknown input attribute {n!r}")
    in_attrs = [by_name[n] for n in in_names]
    col = {a.name: i for i, a in enumerate(attrs)}
    class_index = {v: i for i, v in enumerate(output.values)}

    feature_names = []
    for a in in_attrs:
        if a.kind == "nominal":
            feature_names.extend(f"{a.name}={v}" for v in a.values)
        else:
            feature_names.append(a.name)

    rows, labels = [], []
    for lineno in range(data_start + 1, len(lines) + 1):
        line = lines[lineno - 1].strip()
        if not line or line.startswith("%"):
            continue
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != len(attrs):
            raise FormatError(f"expected {len(attrs)} values, found {len(cells)}", lineno)
        row = []
        for a in in_attrs:
            cell = cells[col[a.name]]
            if a.kind == "nominal":
                if cell not in a.values:
                    raise FormatError(f"unknown value {cell!r} for attribute {a.name!r}", lineno)
                row.extend(1.0 if v == cell else 0.0 for v in a.values)
            else:
                try:
                    row.append(float(cell))
                except ValueError:
                    raise FormatError(f"non-numeric value {cell!r} for {a.name!r}", lineno) from None
        label = cells[col[out_name]]
        if label not in class_index:
            raise FormatError(f"unknown class {label!r}", lineno)
        rows.append(row)
        labels.append(class_index[label])

    x = np.asarray(rows, dtype=np.float64).reshape(len(rows), len(feature_names))
    ds = Dataset(relation or "unnamed", in_attrs, output, x,
                 np.asarray(labels, dtype=np.int64), output.values, tuple(feature_names))
    if require_all_classes and np.any(ds.class_counts == 0):
        missing = [c for c, n in zip(ds.class_names, ds.class_counts) if n == 0]
        raise DataError(f"{ds.name}: classes without samples: {missing}")
    return ds


def _fmt_number(v, kind):
    if kind == "integer" and float(v).is_integer():
        return str(int(v))
    return repr(float(v))


def _attribute_line(a):
    if a.kind == "nominal":
        return f"@attribute {a.name} {{{', '.join(a.values)}}}"
    rng = ""
    if a.low is not None:
        rng = f" [{_fmt_number(a.low, a.kind)}, {_fmt_number(a.high, a.kind)}]"
    return f"@attribute {a.name} {a.kind}{rng}"


def serialize_keel(ds):
    """Render ``ds`` back to KEEL text; ``parse_keel`` inverts it exactly."""
    out = [f"@relation {ds.name}"]
    out += [_attribute_line(a) for a in ds.attributes + [ds.output]]
    out.append(f"@inputs {', '.join(a.name for a in ds.attributes)}")
    out.append(f"@outputs {ds.output.name}")
    out.append("@data")
    for xrow, label in zip(ds.raw_features, ds.labels):
        cells, pos = [], 0
        for a in ds.attributes:
            if a.kind == "nominal":
                width = len(a.values)
                cells.append(a.values[int(np.argmax(xrow[pos:pos + width]))])
                pos += width
            else:
                cells.append(_fmt_number(xrow[pos], a.kind))
                pos += 1
        cells.append(ds.class_names[label])
        out.append(", ".join(cells))
    return "\n".join(out) + "\n"


def load_dataset(path, require_all_classes=True):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_keel(text, require_all_classes=require_all_classes)


BUILTIN_DATASETS = ("iris0", "glass0", "haberman", "new-thyroid1", "ecoli3", "abalone9-18")


def builtin_path(name):
    if name not in BUILTIN_DATASETS:
        raise ParameterError(f"no bundled dataset named {name!r}")
    return str(resources.files("ecsdbn") / "data" / f"{name}.dat")


def load_builtin(name):
    return load_dataset(builtin_path(name))


def minmax_normalize(features):
    """Scale columns to [0, 1].

    Returns ``(scaled, mins, maxs)``; constant columns map to 0.
    """
    x = np.asarray(features, dtype=np.float64)
    if x.shape[0] == 0:
        return x.copy(), np.zeros(x.shape[1]), np.zeros(x.shape[1])
    mins, maxs = x.min(axis=0), x.max(axis=0)
    return apply_minmax(x, mins, maxs, clip=False), mins, maxs


def apply_minmax(features, mins, maxs, clip=True):
    """Scale with stored column extremes, clipping unseen values into [0, 1]."""
    x = np.asarray(features, dtype=np.float64)
    span = maxs - mins
    safe = np.where(span > 0, span, 1.0)
    out = np.where(span > 0, (x - mins) / safe, 0.0)
    return np.clip(out, 0.0, 1.0) if clip else out


@dataclass
class FoldPlan:
    k: int
    trial_seed: int
    assignments: np.ndarray

    def split(self, fold):
        """``(train_idx, test_idx)`` for one fold."""
        test = self.assignments == fold
        return np.flatnonzero(~test), np.flatnonzero(test)

    def __iter__(self):
        return (self.split(f) for f in range(self.k))


def stratified_kfold(labels, k=5, seed=0):
    """Shuffle each class with its own seeded stream and deal it round-robin.

    Dealing continues where the previous class stopped, so overall fold sizes
    also differ by at most one.
    """
    if k < 2:
        raise ParameterError("k must be >= 2")
    labels = np.asarray(labels).reshape(-1)
    assignments = np.empty(labels.size, dtype=np.int64)
    offset = 0
    for ci, cls in enumerate(np.unique(labels)):
        idx = np.flatnonzero(labels == cls)
        if idx.size < k:
            warnings.warn(f"class {cls!r} has {idx.size} samples for {k} folds; "
                          "some folds will lack it", stacklevel=2)
        idx = idx[RngStream(seed, ci).permutation(idx.size)]
        assignments[idx] = (offset + np.arange(idx.size)) % k
        offset = (offset + idx.size) % k
    return FoldPlan(k, seed, assignments)


@dataclass
class CatalogEntry:
    name: str
    train_path: str
    test_path: str | None = None


def parse_catalog(text, base_dir="."):
    """One ``name, train_path[, test_path]`` per line; ``#`` starts a comment."""
    entries = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) not in (2, 3) or not all(parts):
            raise FormatError("expected 'name, train_path[, test_path]'", lineno)
        paths = [p if os.path.isabs(p) else os.path.join(base_dir, p) for p in parts[1:]]
        entries.append(CatalogEntry(parts[0], *paths))
    return entries


def load_catalog(path):
    with open(path, encoding="utf-8") as fh:
        return parse_catalog(fh.read(), os.path.dirname(os.path.abspath(path)))


def builtin_catalog():
    return [CatalogEntry(n, builtin_path(n)) for n in BUILTIN_DATASETS]
