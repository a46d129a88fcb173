"""Datasets with mixed discrete/continuous features.

CSV loading, schema inference, typed materialization and deterministic
splits.  Conventions used across the package:

* class labels and discrete feature values are 1-based category codes,
* a column with at most ``DISCRETE_LIMIT`` distinct values is discrete,
  anything else must parse as numbers and becomes continuous,
* feature order is fixed when the schema is built and never changes,
* feature matrices are float64 even for discrete columns (codes stored
  as whole floats), labels are int64.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

# Columns with at most this many distinct values are treated as discrete.
DISCRETE_LIMIT = 10


class DataError(ValueError):
    """Malformed input file or invalid dataset contents."""


@dataclass(frozen=True)
class Discrete:
    """Categorical feature taking codes 1..cardinality."""

    cardinality: int

    def __post_init__(self) -> None:
        if self.cardinality < 2:
            raise DataError(f"discrete feature needs cardinality >= 2, got {self.cardinality}")


@dataclass(frozen=True)
class Continuous:
    """Real-valued feature."""


FeatureSpec = Discrete | Continuous


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered feature types plus the number of classes."""

    features: tuple[FeatureSpec, ...]
    class_cardinality: int

    def __post_init__(self) -> None:
        if self.class_cardinality < 2:
            raise DataError(f"need at least 2 classes, got {self.class_cardinality}")
        for spec in self.features:
            if not isinstance(spec, (Discrete, Continuous)):
                raise DataError(f"bad feature spec: {spec!r}")

    @property
    def d(self) -> int:
        return len(self.features)


def validate_instances(schema: FeatureSchema, X: np.ndarray) -> None:
    """Check a feature matrix against a schema, raising on any violation."""
    if X.ndim != 2 or X.shape[1] != schema.d:
        raise DataError(f"expected shape (m, {schema.d}), got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise DataError("non-finite feature value")
    for i, spec in enumerate(schema.features):
        col = X[:, i]
        if isinstance(spec, Discrete):
            if not np.all(col == np.floor(col)):
                raise DataError(f"feature {i}: non-integral code for discrete feature")
            if col.size and (col.min() < 1 or col.max() > spec.cardinality):
                raise DataError(f"feature {i}: code outside 1..{spec.cardinality}")


@dataclass(frozen=True)
class Dataset:
    """Feature matrix and 1-based labels bound to a schema."""

    schema: FeatureSchema
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        X = np.ascontiguousarray(np.asarray(self.X, dtype=np.float64))
        y = np.asarray(self.y, dtype=np.int64)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        validate_instances(self.schema, X)
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise DataError(f"labels shape {y.shape} does not match {X.shape[0]} instances")
        if y.size and (y.min() < 1 or y.max() > self.schema.class_cardinality):
            raise DataError(f"label outside 1..{self.schema.class_cardinality}")

    @property
    def m(self) -> int:
        return self.X.shape[0]

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.schema, self.X[idx], self.y[idx])


@dataclass(frozen=True)
class RawTable:
    """Parsed CSV cells, still untyped strings."""

    header: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]
    label_index: int


def load_csv(path, label_column: int | str) -> RawTable:
    """Read a CSV file with a header row into string cells.

    ``label_column`` selects the class column either by 0-based position
    or by header name.  Every row must have exactly as many cells as the
    header; empty cells are rejected (missing values are not supported).
    """
    p = Path(path)
    if not p.is_file():
        raise DataError(f"no such file: {path}")
    with open(p, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [c.strip() for c in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file, missing header row") from None
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}: row {lineno} has {len(row)} cells, expected {len(header)}")
            cells = tuple(c.strip() for c in row)
            for j, cell in enumerate(cells):
                if cell == "":
                    raise DataError(f"{path}: row {lineno}, column {header[j]!r}: empty cell")
            rows.append(cells)
    if not rows:
        raise DataError(f"{path}: no instances after the header row")

    if isinstance(label_column, int):
        if not 0 <= label_column < len(header):
            raise DataError(f"label column {label_column} out of range for {len(header)} columns")
        label_index = label_column
    else:
        if label_column not in header:
            raise DataError(f"label column {label_column!r} not in header {header}")
        label_index = header.index(label_column)
    return RawTable(tuple(header), tuple(rows), label_index)


def _parse_floats(tokens: tuple[str, ...]) -> list[float] | None:
    # Returns None when any token fails to parse as a number.
    try:
        return [float(t) for t in tokens]
    except ValueError:
        return None


def _encode_categories(tokens, ordered_values, name: str) -> np.ndarray:
    code = {v: k + 1 for k, v in enumerate(ordered_values)}
    return np.array([code[t] for t in tokens], dtype=np.float64)


def _encode_label_column(tokens: tuple[str, ...], name: str) -> tuple[np.ndarray, int]:
    values = _parse_floats(tokens)
    if values is not None:
        if not all(np.isfinite(values)):
            raise DataError(f"column {name!r}: non-finite value")
        distinct = sorted(set(values))
        codes = _encode_categories(values, distinct, name)
    else:
        distinct = sorted(set(tokens))
        codes = _encode_categories(tokens, distinct, name)
    if len(distinct) < 2:
        raise DataError(f"label column {name!r} has a single distinct value")
    return codes.astype(np.int64), len(distinct)


def _encode_feature_column(tokens: tuple[str, ...], name: str) -> tuple[FeatureSpec, np.ndarray]:
    values = _parse_floats(tokens)
    if values is not None:
        if not all(np.isfinite(values)):
            raise DataError(f"column {name!r}: non-finite value")
        distinct = sorted(set(values))
        if len(distinct) == 1:
            raise DataError(f"column {name!r} is constant; constant features are not supported")
        if len(distinct) <= DISCRETE_LIMIT:
            return Discrete(len(distinct)), _encode_categories(values, distinct, name)
        return Continuous(), np.array(values, dtype=np.float64)
    distinct = sorted(set(tokens))
    if len(distinct) == 1:
        raise DataError(f"column {name!r} is constant; constant features are not supported")
    if len(distinct) > DISCRETE_LIMIT:
        raise DataError(
            f"column {name!r}: non-numeric value in a column with more than "
            f"{DISCRETE_LIMIT} distinct values (would be continuous)"
        )
    return Discrete(len(distinct)), _encode_categories(tokens, distinct, name)


def infer_schema(table: RawTable) -> tuple[FeatureSchema, Dataset]:
    """Type every column of a raw table and materialize the dataset.

    Numeric columns are sorted numerically when assigning category codes
    ("2" before "10"); non-numeric columns sort lexicographically.  The
    label column may have any number of distinct values >= 2; feature
    columns with more than ``DISCRETE_LIMIT`` distinct values must be
    fully numeric.
    """
    y, r = _encode_label_column(
        tuple(row[table.label_index] for row in table.rows), table.header[table.label_index]
    )
    specs: list[FeatureSpec] = []
    columns: list[np.ndarray] = []
    for j, name in enumerate(table.header):
        if j == table.label_index:
            continue
        spec, col = _encode_feature_column(tuple(row[j] for row in table.rows), name)
        specs.append(spec)
        columns.append(col)
    schema = FeatureSchema(tuple(specs), r)
    X = np.column_stack(columns) if columns else np.empty((len(table.rows), 0))
    return schema, Dataset(schema, X, y)


def dataset_from_table(table: RawTable, schema: FeatureSchema) -> Dataset:
    """Materialize a raw table under a known schema.

    Discrete cells must already hold 1-based integer codes and the label
    column 1-based class indices, as produced by :func:`write_csv`.
    """
    if len(table.header) - 1 != schema.d:
        raise DataError(f"table has {len(table.header) - 1} feature columns, schema has {schema.d}")
    y_tokens = tuple(row[table.label_index] for row in table.rows)
    y_values = _parse_floats(y_tokens)
    if y_values is None:
        raise DataError("label column must hold integer class codes")
    y = np.asarray(y_values)
    feature_cols = [j for j in range(len(table.header)) if j != table.label_index]
    X = np.empty((len(table.rows), schema.d), dtype=np.float64)
    for i, j in enumerate(feature_cols):
        values = _parse_floats(tuple(row[j] for row in table.rows))
        if values is None:
            raise DataError(f"column {table.header[j]!r}: non-numeric value")
        X[:, i] = values
    return Dataset(schema, X, y.astype(np.int64))


def write_csv(dataset: Dataset, path) -> None:
    """Write a dataset as CSV: features f1..fd, label column 'y' last.

    Discrete codes and labels are written as integers, continuous values
    with full repr precision, so a written file reloads exactly under
    the same schema via :func:`dataset_from_table`.
    """
    header = [f"f{i + 1}" for i in range(dataset.schema.d)] + ["y"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for k in range(dataset.m):
            row = []
            for i, spec in enumerate(dataset.schema.features):
                v = dataset.X[k, i]
                row.append(str(int(v)) if isinstance(spec, Discrete) else repr(float(v)))
            row.append(str(int(dataset.y[k])))
            writer.writerow(row)


def train_test_split(
    dataset: Dataset, train_size: int, test_size: int, rng: np.random.Generator
) -> tuple[Dataset, Dataset]:
    """Draw disjoint uniformly random train and test subsets."""
    if train_size < 1 or test_size < 1:
        raise DataError(f"split sizes must be positive, got {train_size}, {test_size}")
    if train_size + test_size > dataset.m:
        raise DataError(
            f"train {train_size} + test {test_size} exceeds {dataset.m} available instances"
        )
    perm = rng.permutation(dataset.m)
    return dataset.subset(perm[:train_size]), dataset.subset(perm[train_size : train_size + test_size])
