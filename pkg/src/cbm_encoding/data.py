"""CSV ingestion, numeric standardization and deterministic splitting."""

from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import IngestError, TaskMismatchError
from .types import (
    BINARY, CATEGORICAL, MULTICLASS, NUMERIC, REGRESSION,
    CategoricalColumn, ColumnSchema, Dataset, TaskKind,
)

DEFAULT_NA_TOKENS = frozenset({"", "NA", "null"})
STD_EPS = 1e-12


@dataclass(frozen=True)
class IngestOptions:
    target_column: str | None = None
    task: TaskKind | str = "infer"
    delimiter: str = ","
    na_tokens: frozenset = DEFAULT_NA_TOKENS
    max_float_parse_failures: float = 0.0
    categorical: tuple[str, ...] = ()
    numeric: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.delimiter.encode("utf-8")) != 1:
            raise ValueError("delimiter must be a single byte")
        if not 0.0 <= self.max_float_parse_failures < 1.0:
            raise ValueError("max_float_parse_failures must be in [0, 1)")
        object.__setattr__(self, "na_tokens", frozenset(self.na_tokens))


def _parse_float(s: str) -> float | None:
    try:
        v = float(s)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def _infer_numeric(cells: list[str], na: frozenset, max_fail: float):
    """Parsed float column (NaN for NA) or ``None`` if the column is categorical."""
    present = [c for c in cells if c not in na]
    if not present:
        return None
    parsed = [None if c in na else _parse_float(c) for c in cells]
    failures = sum(1 for c, p in zip(cells, parsed) if c not in na and p is None)
    if failures > max_fail * len(present) or failures == len(present):
        return None
    return np.array([np.nan if p is None else p for p in parsed], dtype=np.float64)


def _mean_impute(col: np.ndarray) -> np.ndarray:
    mask = np.isnan(col)
    if mask.any():
        col = col.copy()
        col[mask] = col[~mask].mean()
    return col


def _resolve_task(task) -> TaskKind | str:
    if isinstance(task, TaskKind):
        return task
    if task in ("infer", MULTICLASS):
        return task
    if task == BINARY:
        return TaskKind.binary()
    if task == REGRESSION:
        return TaskKind.regression()
    if isinstance(task, str) and task.startswith(MULTICLASS + ":"):
        return TaskKind.multiclass(int(task.split(":", 1)[1]))
    raise ValueError(f"unknown task {task!r}")


def _sorted_labels(labels: Iterable[str]) -> list[str]:
    labels = set(labels)
    if all(_parse_float(s) is not None for s in labels):
        return sorted(labels, key=lambda s: (float(s), s))
    return sorted(labels)


def parse_target(cells: Sequence[str], task, na_tokens=DEFAULT_NA_TOKENS):
    """Returns ``(target, task, class_labels)``; class ids follow sorted label order."""
    if any(c in na_tokens for c in cells):
        raise IngestError("target column has missing values")
    task = _resolve_task(task)
    floats = [_parse_float(c) for c in cells]
    all_numeric = all(f is not None for f in floats)

    if task == "infer":
        distinct = set(cells)
        if all_numeric and {float(c) for c in distinct} <= {0.0, 1.0}:
            task = TaskKind.binary()
        elif all_numeric:
            task = TaskKind.regression()
        elif len(distinct) == 2:
            task = TaskKind.binary()
        else:
            task = MULTICLASS

    if task == MULTICLASS or (isinstance(task, TaskKind) and task.kind == MULTICLASS):
        ints = all_numeric and all(f == int(f) and f >= 0 for f in floats)
        if ints:
            ids = np.array([int(f) for f in floats], dtype=np.int64)
            k = int(ids.max()) + 1
            labels = tuple(str(i) for i in range(k))
        else:
            order = _sorted_labels(cells)
            lookup = {s: i for i, s in enumerate(order)}
            ids = np.array([lookup[c] for c in cells], dtype=np.int64)
            k, labels = len(order), tuple(order)
        if isinstance(task, TaskKind):
            if k > task.n_classes:
                raise TaskMismatchError(f"target has {k} classes but task declares {task.n_classes}")
            labels = labels + tuple(str(i) for i in range(k, task.n_classes))
        else:
            task = TaskKind.multiclass(max(k, 2))
            labels = labels + tuple(str(i) for i in range(k, task.n_classes))
        return ids, task, labels

    if task.kind == REGRESSION:
        if not all_numeric:
            raise IngestError("regression target has unparsable values")
        return np.array(floats, dtype=np.float64), task, None

    distinct = set(cells)
    if all_numeric and {float(c) for c in distinct} <= {0.0, 1.0}:
        return np.array([int(f) for f in floats], dtype=np.int64), task, ("0", "1")
    if len(distinct) > 2:
        raise TaskMismatchError(f"binary target has {len(distinct)} distinct values")
    order = _sorted_labels(distinct)
    lookup = {s: i for i, s in enumerate(order)}
    return np.array([lookup[c] for c in cells], dtype=np.int64), task, tuple(order)


def read_csv(path, opts: IngestOptions | None = None, **kwargs) -> Dataset:
    """Load a headed CSV into a :class:`Dataset`.

    A column is numeric when every non-NA cell parses as a finite decimal
    (up to ``max_float_parse_failures``); NA numeric cells are mean-imputed,
    NA categorical cells become ``__missing__``. Names listed in
    ``opts.categorical``/``opts.numeric`` skip inference.
    """
    opts = opts or IngestOptions(**kwargs)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh, delimiter=opts.delimiter, strict=True))
    if not rows:
        raise IngestError(f"{path}: empty file, header required")
    header, body = rows[0], rows[1:]
    if not body:
        raise IngestError(f"{path}: no data rows")
    for lineno, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise IngestError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
    if len(set(header)) != len(header):
        raise IngestError(f"{path}: duplicate column names in header")
    columns = {name: [r[i] for r in body] for i, name in enumerate(header)}
    return dataset_from_strings(columns, opts)


def dataset_from_strings(columns: Mapping[str, list[str]], opts: IngestOptions) -> Dataset:
    target = task = labels = None
    if opts.target_column is not None:
        if opts.target_column not in columns:
            raise IngestError(f"target column {opts.target_column!r} not found")
        target, task, labels = parse_target(columns[opts.target_column], opts.task, opts.na_tokens)

    schema, cat, num = [], {}, {}
    for name, cells in columns.items():
        if name == opts.target_column:
            continue
        if name in opts.categorical:
            parsed = None
        elif name in opts.numeric:
            parsed = _infer_numeric(cells, opts.na_tokens, 1.0 - 1e-12)
            if parsed is None:
                raise IngestError(f"column {name!r} declared numeric has no parsable cells")
        else:
            parsed = _infer_numeric(cells, opts.na_tokens, opts.max_float_parse_failures)
        if parsed is None:
            cat[name] = CategoricalColumn.from_values(
                [None if c in opts.na_tokens else c for c in cells])
            schema.append(ColumnSchema(name, CATEGORICAL, len(schema)))
        else:
            num[name] = _mean_impute(parsed)
            schema.append(ColumnSchema(name, NUMERIC, len(schema)))
    return Dataset(tuple(schema), cat, num, target, task, labels)


def write_matrix_csv(path, matrix, extra: Mapping[str, Sequence] | None = None) -> None:
    """Write an encoded matrix with its labels as header; floats use shortest round-trip repr."""
    extra = dict(extra or {})
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(matrix.column_labels) + list(extra))
        cols = list(extra.values())
        for i, row in enumerate(matrix.values.tolist()):
            w.writerow([repr(v) for v in row] + [c[i] for c in cols])


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def dataset_fingerprint(data: Dataset) -> dict:
    """Row/column counts and a content hash independent of the file it came from."""
    h = hashlib.sha256()
    for col in data.schema:
        h.update(col.name.encode() + b"\0" + col.kind.encode() + b"\0")
        if col.kind == CATEGORICAL:
            c = data.categorical[col.name]
            h.update("\0".join(c.levels).encode())
            h.update(np.ascontiguousarray(c.codes, dtype=np.int64).tobytes())
        else:
            h.update(np.ascontiguousarray(data.numeric[col.name]).tobytes())
    if data.target is not None:
        h.update(np.ascontiguousarray(data.target).tobytes())
    return {
        "n_rows": data.n_rows,
        "n_categorical": len(data.categorical_names),
        "n_numeric": len(data.numeric_names),
        "content_hash": h.hexdigest(),
    }


# Standardization

@dataclass(frozen=True)
class ScalerParams:
    mean: dict = field(default_factory=dict)
    std: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"mean": dict(self.mean), "std": dict(self.std)}

    @classmethod
    def from_dict(cls, d) -> "ScalerParams":
        return cls({k: float(v) for k, v in d["mean"].items()},
                   {k: float(v) for k, v in d["std"].items()})


def scaler_fit(data: Dataset) -> ScalerParams:
    mean, std = {}, {}
    for name in data.numeric_names:
        col = data.numeric[name]
        mean[name] = float(col.mean())
        std[name] = max(float(col.std()), STD_EPS)
    return ScalerParams(mean, std)


def scaler_transform(params: ScalerParams, data: Dataset) -> Dataset:
    missing = [n for n in params.mean if n not in data.numeric]
    if missing:
        raise IngestError(f"numeric columns absent from input: {missing}")
    return data.with_numeric({n: (data.numeric[n] - params.mean[n]) / params.std[n]
                              for n in params.mean})


# Splitting

def _check_labels(stratify, n):
    if stratify is None:
        return None
    labels = np.asarray(stratify)
    if labels.shape != (n,):
        raise ValueError("stratification labels must have one entry per row")
    return labels


def kfold_indices(n: int, k: int, seed: int, stratify=None) -> list[np.ndarray]:
    """Partition ``0..n-1`` into ``k`` folds whose sizes differ by at most one.

    With ``stratify`` labels, rows are grouped by class (classes in sorted
    order, rows shuffled within class) and dealt round-robin, so every class
    is spread over the folds within one row of proportional.
    """
    if not 2 <= k <= n:
        raise ValueError(f"need 2 <= k <= n, got k={k}, n={n}")
    rng = np.random.default_rng(seed)
    labels = _check_labels(stratify, n)
    if labels is None:
        order = rng.permutation(n)
    else:
        order = np.concatenate([rng.permutation(np.flatnonzero(labels == c))
                                for c in np.unique(labels)])
    fold_of = np.empty(n, dtype=np.intp)
    fold_of[order] = np.arange(n) % k
    return [np.flatnonzero(fold_of == f) for f in range(k)]


def _largest_remainder(counts: np.ndarray, total: int) -> np.ndarray:
    ideal = counts * (total / counts.sum())
    alloc = np.floor(ideal).astype(np.int64)
    short = total - alloc.sum()
    order = np.argsort(-(ideal - alloc), kind="stable")
    alloc[order[:short]] += 1
    return alloc


def train_test_split(n: int, test_fraction: float, seed: int,
                     stratify=None) -> tuple[np.ndarray, np.ndarray]:
    """Disjoint (train, test) index arrays with ``|test| = round(n * test_fraction)``."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must be in (0, 1)")
    n_test = int(math.floor(n * test_fraction + 0.5))
    if n_test == 0 or n_test == n:
        raise ValueError(f"test_fraction={test_fraction} leaves an empty side for n={n}")
    rng = np.random.default_rng(seed)
    labels = _check_labels(stratify, n)
    if labels is None:
        test = rng.permutation(n)[:n_test]
    else:
        classes = np.unique(labels)
        members = [np.flatnonzero(labels == c) for c in classes]
        alloc = _largest_remainder(np.array([len(m) for m in members]), n_test)
        test = np.concatenate([rng.permutation(m)[:a] for m, a in zip(members, alloc)])
    mask = np.zeros(n, dtype=bool)
    mask[test] = True
    return np.flatnonzero(~mask), np.flatnonzero(mask)
