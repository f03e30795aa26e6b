"""Shared data model: task kinds, datasets and encoded matrices."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import SchemaMismatchError, TaskMismatchError, UnsupportedMomentCount

MISSING = "__missing__"

BINARY = "binary"
MULTICLASS = "multiclass"
REGRESSION = "regression"

CATEGORICAL = "categorical"
NUMERIC = "numeric"


@dataclass(frozen=True)
class TaskKind:
    """Problem type. Binary and two-class multiclass are distinct tasks."""

    kind: str
    n_classes: int | None = None

    def __post_init__(self):
        if self.kind not in (BINARY, MULTICLASS, REGRESSION):
            raise ValueError(f"unknown task kind {self.kind!r}")
        if self.kind == MULTICLASS:
            if self.n_classes is None or self.n_classes < 2:
                raise ValueError("multiclass task needs n_classes >= 2")
        elif self.n_classes is not None:
            raise ValueError(f"{self.kind} task takes no class count")

    @classmethod
    def binary(cls) -> "TaskKind":
        return cls(BINARY)

    @classmethod
    def multiclass(cls, n_classes: int) -> "TaskKind":
        return cls(MULTICLASS, int(n_classes))

    @classmethod
    def regression(cls) -> "TaskKind":
        return cls(REGRESSION)

    @property
    def is_classification(self) -> bool:
        return self.kind != REGRESSION

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.n_classes is not None:
            out["n_classes"] = self.n_classes
        return out

    @classmethod
    def from_dict(cls, d: Mapping) -> "TaskKind":
        return cls(d["kind"], d.get("n_classes"))

    def __str__(self):
        if self.kind == MULTICLASS:
            return f"multiclass({self.n_classes})"
        return self.kind


def check_q(q: int) -> int:
    if q not in (1, 2):
        raise UnsupportedMomentCount(f"moment count must be 1 or 2, got {q!r}")
    return int(q)


def moments_per_column(task: TaskKind, q: int) -> int:
    """Width contributed by one categorical column under CBM encoding."""
    q = check_q(q)
    if task.kind == BINARY:
        return q
    if task.kind == MULTICLASS:
        return task.n_classes * q
    return 2 * q


def encoded_width(task: TaskKind, n_categorical: int, q: int, n_numeric: int = 0) -> int:
    """Total CBM-encoded width: one block per categorical column plus passthrough.

    >>> encoded_width(TaskKind.binary(), 3, 1, 2)
    5
    """
    if n_categorical < 0 or n_numeric < 0:
        raise ValueError("column counts must be non-negative")
    return n_categorical * moments_per_column(task, q) + n_numeric


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    kind: str
    index: int


@dataclass(frozen=True)
class CategoricalColumn:
    """Interned categorical column: ``levels[codes[i]]`` is the value of row i."""

    codes: np.ndarray
    levels: tuple[str, ...]

    @classmethod
    def from_values(cls, values: Sequence) -> "CategoricalColumn":
        cleaned = [MISSING if _is_missing(v) else str(v) for v in values]
        levels, codes = np.unique(np.asarray(cleaned, dtype=object), return_inverse=True)
        return cls(codes.astype(np.intp).ravel(), tuple(str(v) for v in levels))

    def values(self) -> np.ndarray:
        return np.asarray(self.levels, dtype=object)[self.codes]

    def take(self, idx) -> "CategoricalColumn":
        return CategoricalColumn(self.codes[idx], self.levels)

    def __len__(self):
        return len(self.codes)


def _is_missing(v) -> bool:
    if v is None:
        return True
    return isinstance(v, float) and np.isnan(v)


def _as_target(target, task: TaskKind) -> np.ndarray:
    if task.kind == REGRESSION:
        t = np.asarray(target, dtype=np.float64)
        if not np.all(np.isfinite(t)):
            raise TaskMismatchError("regression target has non-finite values")
        return t
    raw = np.asarray(target)
    t = raw.astype(np.int64)
    if raw.dtype.kind == "f" and not np.array_equal(t, raw):
        raise TaskMismatchError("classification target must hold integer class ids")
    upper = 2 if task.kind == BINARY else task.n_classes
    if t.size and (t.min() < 0 or t.max() >= upper):
        raise TaskMismatchError(f"{task} target values must lie in 0..{upper - 1}")
    return t


@dataclass(frozen=True, eq=False)
class Dataset:
    """Columnar table of categorical and numeric features plus an optional target.

    ``target`` and ``task`` are both ``None`` for unlabeled scoring data.
    """

    schema: tuple[ColumnSchema, ...]
    categorical: Mapping[str, CategoricalColumn]
    numeric: Mapping[str, np.ndarray]
    target: np.ndarray | None = None
    task: TaskKind | None = None
    class_labels: tuple[str, ...] | None = None
    n_rows: int = field(init=False)

    def __post_init__(self):
        names = [c.name for c in self.schema]
        if len(set(names)) != len(names):
            raise SchemaMismatchError("duplicate column names")
        if [c.index for c in self.schema] != list(range(len(self.schema))):
            raise SchemaMismatchError("column indices must be contiguous from 0")
        lengths = {len(self.categorical[c.name]) if c.kind == CATEGORICAL
                   else len(self.numeric[c.name]) for c in self.schema}
        if self.target is not None:
            lengths.add(len(self.target))
        if len(lengths) > 1:
            raise SchemaMismatchError(f"columns have differing lengths {sorted(lengths)}")
        n = lengths.pop() if lengths else 0
        for name, col in self.numeric.items():
            if not np.all(np.isfinite(col)):
                raise SchemaMismatchError(f"numeric column {name!r} has non-finite values")
        if (self.target is None) != (self.task is None):
            raise TaskMismatchError("target and task must be given together")
        if self.target is not None:
            object.__setattr__(self, "target", _as_target(self.target, self.task))
        object.__setattr__(self, "n_rows", n)

    @classmethod
    def from_columns(cls, categorical: Mapping[str, Sequence] | None = None,
                     numeric: Mapping[str, Sequence[float]] | None = None,
                     target=None, task: TaskKind | None = None,
                     class_labels: Sequence[str] | None = None) -> "Dataset":
        """Build a dataset; categorical columns come first in the schema.

        ``None``/NaN categorical cells become the ``__missing__`` level.
        """
        categorical = dict(categorical or {})
        numeric = dict(numeric or {})
        schema = []
        for name in categorical:
            schema.append(ColumnSchema(name, CATEGORICAL, len(schema)))
        for name in numeric:
            schema.append(ColumnSchema(name, NUMERIC, len(schema)))
        return cls(
            tuple(schema),
            {k: v if isinstance(v, CategoricalColumn) else CategoricalColumn.from_values(v)
             for k, v in categorical.items()},
            {k: np.asarray(v, dtype=np.float64) for k, v in numeric.items()},
            target, task,
            tuple(class_labels) if class_labels is not None else None,
        )

    @property
    def categorical_names(self) -> list[str]:
        return [c.name for c in self.schema if c.kind == CATEGORICAL]

    @property
    def numeric_names(self) -> list[str]:
        return [c.name for c in self.schema if c.kind == NUMERIC]

    def take(self, idx) -> "Dataset":
        """Row subset (index array or boolean mask)."""
        idx = np.asarray(idx)
        return Dataset(
            self.schema,
            {k: v.take(idx) for k, v in self.categorical.items()},
            {k: v[idx] for k, v in self.numeric.items()},
            None if self.target is None else self.target[idx],
            self.task, self.class_labels,
        )

    def with_numeric(self, numeric: Mapping[str, np.ndarray]) -> "Dataset":
        merged = dict(self.numeric)
        merged.update(numeric)
        return Dataset(self.schema, self.categorical, merged, self.target,
                       self.task, self.class_labels)

    def require_target(self) -> np.ndarray:
        if self.target is None:
            raise TaskMismatchError("dataset has no target column")
        return self.target


@dataclass(frozen=True, eq=False)
class EncodedMatrix:
    """Dense N x D feature matrix with one label per column."""

    values: np.ndarray
    column_labels: tuple[str, ...]

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != len(self.column_labels):
            raise ValueError(f"shape {v.shape} does not match {len(self.column_labels)} labels")
        if not np.isfinite(v).all():
            raise ValueError("encoded matrix has non-finite entries")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "column_labels", tuple(self.column_labels))

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


def passthrough_block(data: Dataset, names: Sequence[str]) -> np.ndarray:
    """Numeric columns stacked as an (N, len(names)) block."""
    missing = [n for n in names if n not in data.numeric]
    if missing:
        raise SchemaMismatchError(f"numeric columns absent from input: {missing}")
    if not names:
        return np.empty((data.n_rows, 0))
    return np.column_stack([data.numeric[n] for n in names])


def require_categorical(data: Dataset, names: Sequence[str]) -> None:
    missing = [n for n in names if n not in data.categorical]
    if missing:
        raise SchemaMismatchError(f"categorical columns absent from input: {missing}")
