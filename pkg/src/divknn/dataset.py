"""Group/dataset data model and the on-disk CSV container formats.

A dataset is a collection of groups; each group is a bag of i.i.d.
d-dimensional sample points standing in for one unknown distribution.

On-disk formats (UTF-8, comma separators, '.' decimal point):

* directory container: one header-less CSV per group, filename stem =
  group id, one point per row. ``labels.csv``, ``params.csv`` and
  ``flags.csv`` are reserved metadata names and never parsed as groups:
  ``labels.csv`` / ``flags.csv`` are two-column tables with a header
  (``id,label`` resp. ``id,flag``), ``params.csv`` is ``id`` plus named
  numeric columns.
* single-file container: header-less CSV whose first column is the
  group id and remaining columns are coordinates.
* divergence matrix: CSV with a header row and column of group ids and
  entries printed with 9 significant digits.

Groups are ordered lexicographically by id everywhere so that matrix
indices never depend on filesystem enumeration order.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataFormatError
from .estimators import DivergenceMatrix

RESERVED_FILES = ("labels.csv", "params.csv", "flags.csv")


@dataclass(frozen=True)
class Group:
    """One bag of sample points plus an optional class label.

    The points array is copied and frozen at construction; a Group can
    be shared across threads freely.
    """

    id: str
    points: np.ndarray
    label: str | None = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64, order="C")
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError(
                f"group '{self.id}': points must be a nonempty 2-D array, "
                f"got shape {pts.shape}"
            )
        if not np.isfinite(pts).all():
            raise ValueError(f"group '{self.id}': points contain NaN or infinity")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class Dataset:
    """An ordered collection of groups sharing one dimension.

    Groups are re-sorted lexicographically by id at construction.
    """

    groups: tuple[Group, ...]
    dim: int = field(init=False)

    def __post_init__(self):
        groups = tuple(sorted(self.groups, key=lambda g: g.id))
        if not groups:
            raise ValueError("dataset must contain at least one group")
        ids = [g.id for g in groups]
        if len(set(ids)) != len(ids):
            dup = next(i for i in ids if ids.count(i) > 1)
            raise DataFormatError(f"duplicate group id '{dup}'")
        d = groups[0].dim
        for g in groups:
            if g.dim != d:
                raise DataFormatError(
                    f"group '{g.id}' has dimension {g.dim}, expected {d} "
                    f"(set by group '{groups[0].id}')"
                )
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "dim", d)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(g.id for g in self.groups)

    @property
    def labels(self) -> tuple[str | None, ...]:
        return tuple(g.label for g in self.groups)

    def __len__(self) -> int:
        return len(self.groups)

    def require_labels(self) -> tuple[str, ...]:
        """Labels of all groups, failing fast on any unlabeled group."""
        missing = [g.id for g in self.groups if g.label is None]
        if missing:
            raise DataFormatError(f"groups without labels: {', '.join(missing)}")
        return tuple(g.label for g in self.groups)  # type: ignore[return-value]


# ---------------------------------------------------------------------------
# Point-file parsing.

def _parse_point_rows(rows, where: str, expect_cols: int | None):
    """Parse CSV rows of coordinates; report 1-based row/column on failure."""
    points = []
    for r, row in rows:
        if not row:
            continue  # blank line
        if expect_cols is None:
            expect_cols = len(row)
        if len(row) != expect_cols:
            raise DataFormatError(
                f"{where}: row {r} has {len(row)} columns, expected {expect_cols}"
            )
        vals = []
        for c, cell in enumerate(row):
            try:
                vals.append(float(cell))
            except ValueError:
                raise DataFormatError(
                    f"{where}: non-numeric value {cell.strip()!r} "
                    f"at row {r}, column {c + 1}"
                ) from None
        points.append(vals)
    return points, expect_cols


def _read_rows(path: Path):
    with open(path, newline="", encoding="utf-8") as fh:
        for r, row in enumerate(csv.reader(fh), start=1):
            yield r, row


def _load_group_file(path: Path, labels: dict[str, str]) -> Group:
    gid = path.stem
    points, _ = _parse_point_rows(_read_rows(path), f"group '{gid}' ({path.name})", None)
    if not points:
        raise DataFormatError(f"group file {path.name} contains no points")
    return Group(gid, np.array(points), labels.get(gid))


def _load_directory(path: Path) -> Dataset:
    files = sorted(p for p in path.iterdir()
                   if p.suffix == ".csv" and p.name not in RESERVED_FILES)
    if not files:
        raise DataFormatError(f"no group CSV files found in {path}")
    labels_file = path / "labels.csv"
    labels = load_labels(labels_file) if labels_file.exists() else {}
    return Dataset(tuple(_load_group_file(p, labels) for p in files))


def _load_single_file(path: Path) -> Dataset:
    by_id: dict[str, list[list[float]]] = {}
    cols: int | None = None
    for r, row in _read_rows(path):
        if not row:
            continue
        if len(row) < 2:
            raise DataFormatError(
                f"{path.name}: row {r} needs an id and at least one coordinate"
            )
        gid = row[0]
        pts, cols = _parse_point_rows(
            [(r, row[1:])], f"{path.name} (group '{gid}')", cols
        )
        by_id.setdefault(gid, []).extend(pts)
    if not by_id:
        raise DataFormatError(f"{path.name} contains no data rows")
    return Dataset(tuple(Group(gid, np.array(pts)) for gid, pts in by_id.items()))


def load_dataset(path) -> Dataset:
    """Read a dataset from a directory container or a single CSV file."""
    p = Path(path)
    if not p.exists():
        raise DataFormatError(f"no such path: {p}")
    return _load_directory(p) if p.is_dir() else _load_single_file(p)


def save_dataset(ds: Dataset, path) -> None:
    """Write a dataset as a directory container (one CSV per group).

    Point values are written in shortest round-trip decimal form, so
    load(save(ds)) reproduces them exactly. Labels, when any group has
    one, go to labels.csv; every group must then be labeled.
    """
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    for g in ds.groups:
        stem_taken = f"{g.id}.csv" in RESERVED_FILES
        if stem_taken or "/" in g.id or "\\" in g.id or g.id.startswith("."):
            raise DataFormatError(f"group id {g.id!r} cannot be used as a filename")
        with open(p / f"{g.id}.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            for row in g.points:
                writer.writerow([repr(float(v)) for v in row])
    if any(g.label is not None for g in ds.groups):
        save_labels(p / "labels.csv", dict(zip(ds.ids, ds.require_labels())))


# ---------------------------------------------------------------------------
# Two-column metadata tables (labels.csv, flags.csv).

def load_labels(path) -> dict[str, str]:
    """Read an ``id,<value>`` table with a header row."""
    p = Path(path)
    if not p.exists():
        raise DataFormatError(f"no such file: {p}")
    rows = list(_read_rows(p))
    if not rows:
        raise DataFormatError(f"{p.name} is empty")
    out: dict[str, str] = {}
    for r, row in rows[1:]:
        if not row:
            continue
        if len(row) != 2:
            raise DataFormatError(f"{p.name}: row {r} must have exactly 2 columns")
        out[row[0]] = row[1]
    return out


def save_labels(path, mapping: dict[str, str], value_name: str = "label") -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", value_name])
        for gid in sorted(mapping):
            writer.writerow([gid, mapping[gid]])


def with_labels(ds: Dataset, labels: dict[str, str]) -> Dataset:
    """Attach labels from a mapping; ids absent from the mapping keep None."""
    return Dataset(tuple(
        Group(g.id, g.points, labels.get(g.id, g.label)) for g in ds.groups
    ))


# ---------------------------------------------------------------------------
# Named numeric per-group parameters (params.csv).

def save_params(path, ids, names, values) -> None:
    """Write per-group numeric parameters: header ``id,<names...>``."""
    values = np.asarray(values, dtype=np.float64)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", *names])
        for gid, row in zip(ids, values):
            writer.writerow([gid, *[repr(float(v)) for v in np.atleast_1d(row)]])


def load_params(path) -> tuple[tuple[str, ...], dict[str, np.ndarray]]:
    """Read a params table; returns (column names, id -> value vector)."""
    p = Path(path)
    if not p.exists():
        raise DataFormatError(f"no such file: {p}")
    rows = list(_read_rows(p))
    if not rows:
        raise DataFormatError(f"{p.name} is empty")
    header = rows[0][1]
    names = tuple(header[1:])
    out: dict[str, np.ndarray] = {}
    for r, row in rows[1:]:
        if not row:
            continue
        if len(row) != len(header):
            raise DataFormatError(f"{p.name}: row {r} has {len(row)} columns, "
                                  f"expected {len(header)}")
        vals, _ = _parse_point_rows([(r, row[1:])], p.name, len(names))
        out[row[0]] = np.array(vals[0])
    return names, out


# ---------------------------------------------------------------------------
# Divergence-matrix CSV.

def save_matrix(m: DivergenceMatrix, path) -> None:
    """Write a divergence matrix with a header row/column of group ids.

    Entries use 9 significant digits, so save/load round-trips within
    1e-8 absolute for divergence-scale values.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", *m.ids])
        for gid, row in zip(m.ids, m.values):
            writer.writerow([gid, *[f"{v:.9g}" for v in row]])


def load_matrix(path) -> DivergenceMatrix:
    """Read a divergence matrix written by save_matrix."""
    p = Path(path)
    if not p.exists():
        raise DataFormatError(f"no such file: {p}")
    rows = [row for _, row in _read_rows(p) if row]
    if not rows:
        raise DataFormatError(f"{p.name} is empty")
    ids = tuple(rows[0][1:])
    n = len(ids)
    if len(rows) != n + 1:
        raise DataFormatError(f"{p.name}: expected {n + 1} rows, found {len(rows)}")
    values = np.zeros((n, n))
    for i, (r, row) in enumerate(zip(range(2, n + 2), rows[1:])):
        if len(row) != n + 1:
            raise DataFormatError(f"{p.name}: row {r} has {len(row)} columns, "
                                  f"expected {n + 1}")
        if row[0] != ids[i]:
            raise DataFormatError(
                f"{p.name}: row id {row[0]!r} does not match header id {ids[i]!r}"
            )
        vals, _ = _parse_point_rows([(r, row[1:])], p.name, n)
        values[i] = vals[0]
    return DivergenceMatrix(ids, values, None)
