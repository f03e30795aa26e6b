"""CBM encoding: per-level conjugate posteriors and their moment lookup.

Fitting runs one conjugate model per (column, level) on the targets of the
rows holding that level; every model starts from the same prior, which is
initialized from the full training target. Transforming replaces each
categorical cell by the posterior moments of its level, column block by
column block, followed by the numeric passthrough columns. Levels never seen
during fit receive the prior's moments.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import conjugate
from .data import ScalerParams, scaler_transform
from .errors import (
    CbmDataError, MalformedModelError, TaskMismatchError, UnsupportedVersionError,
)
from .types import (
    BINARY, MULTICLASS, Dataset, EncodedMatrix, TaskKind, check_q, encoded_width,
    moments_per_column, passthrough_block, require_categorical,
)

FORMAT_VERSION = 1


def moment_labels(column: str, task: TaskKind, q: int) -> list[str]:
    """Column labels for one categorical block, in moment order."""
    if task.kind == BINARY:
        return [f"{column}__m{j}" for j in range(1, q + 1)]
    if task.kind == MULTICLASS:
        return [f"{column}__c{k}_m{j}" for j in range(1, q + 1) for k in range(task.n_classes)]
    return [f"{column}__{name}_m{j}" for j in range(1, q + 1) for name in ("mu", "var")]


@dataclass(frozen=True)
class LevelPosterior:
    params: object
    moments: np.ndarray
    count: int


@dataclass(frozen=True, eq=False)
class FittedColumnEncoding:
    """Moment lookup ``level -> vector`` for one column, plus the prior fallback."""

    column_name: str
    prior: object
    levels: dict = field(default_factory=dict)
    fallback_moments: np.ndarray = None

    @property
    def level_to_moments(self) -> dict[str, np.ndarray]:
        return {lvl: post.moments for lvl, post in self.levels.items()}

    @property
    def level_counts(self) -> dict[str, int]:
        return {lvl: post.count for lvl, post in self.levels.items()}

    def lookup(self, level: str) -> np.ndarray:
        post = self.levels.get(level)
        return self.fallback_moments if post is None else post.moments

    def table_for(self, levels) -> np.ndarray:
        """Moment rows aligned with an interned level tuple."""
        return np.array([self.lookup(lvl) for lvl in levels], dtype=np.float64).reshape(
            len(levels), len(self.fallback_moments))


@dataclass(frozen=True, eq=False)
class CbmEncoder:
    """A fitted CBM encoder. Immutable; safe to share for transforming."""

    task: TaskKind
    q: int
    columns: tuple[FittedColumnEncoding, ...]
    numeric_columns: tuple[str, ...] = ()
    noise_sigma: float = 0.0
    scaler: ScalerParams | None = None
    format_version: int = FORMAT_VERSION

    @property
    def width(self) -> int:
        return encoded_width(self.task, len(self.columns), self.q, len(self.numeric_columns))

    @property
    def cbm_width(self) -> int:
        return len(self.columns) * moments_per_column(self.task, self.q)

    @property
    def column_labels(self) -> list[str]:
        labels = []
        for col in self.columns:
            labels += moment_labels(col.column_name, self.task, self.q)
        return labels + list(self.numeric_columns)

    def column(self, name: str) -> FittedColumnEncoding:
        for col in self.columns:
            if col.column_name == name:
                return col
        raise KeyError(name)

    def transform(self, data: Dataset) -> EncodedMatrix:
        """Deterministic encoding; unseen levels get the prior's moments."""
        require_categorical(data, [c.column_name for c in self.columns])
        if self.scaler is not None:
            data = scaler_transform(self.scaler, data)
        w = moments_per_column(self.task, self.q)
        out = np.empty((data.n_rows, self.width), dtype=np.float64)
        for m, col in enumerate(self.columns):
            cat = data.categorical[col.column_name]
            out[:, m * w:(m + 1) * w] = col.table_for(cat.levels)[cat.codes]
        out[:, self.cbm_width:] = passthrough_block(data, self.numeric_columns)
        return EncodedMatrix(out, tuple(self.column_labels))

    def save(self, path) -> None:
        save(self, path)

    @classmethod
    def load(cls, path) -> "CbmEncoder":
        return load(path)


def _grouped_targets(codes: np.ndarray, y: np.ndarray):
    """Yield ``(code, targets)`` per distinct code.

    Targets within a group are sorted so the result does not depend on row order.
    """
    if codes.size == 0:
        return
    order = np.lexsort((y, codes))
    sc = codes[order]
    starts = np.flatnonzero(np.r_[True, sc[1:] != sc[:-1]])
    for code, group in zip(sc[starts], np.split(y[order], starts[1:])):
        yield int(code), group


def fit(data: Dataset, q: int = 1, *, task: TaskKind | None = None,
        prior=None, noise_sigma: float = 0.0,
        numeric_columns=None, scaler: ScalerParams | None = None) -> CbmEncoder:
    """Fit one posterior per (categorical column, level).

    ``prior`` overrides the target-initialized prior (it must belong to the
    task's conjugate family). ``noise_sigma`` is recorded on the encoder and
    used only by :func:`fit_transform`.
    """
    q = check_q(q)
    y = data.require_target()
    if task is not None and task != data.task:
        raise TaskMismatchError(f"encoder task {task} does not match dataset task {data.task}")
    task = data.task
    if data.n_rows == 0:
        raise CbmDataError("cannot fit on an empty dataset")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be non-negative")
    if prior is None:
        prior = conjugate.prior_from_target(task, y)
    elif not conjugate.family_matches(task, prior):
        raise TaskMismatchError(f"prior {type(prior).__name__} does not fit task {task}")
    fallback = conjugate.moments(prior, q)

    columns = []
    for name in data.categorical_names:
        cat = data.categorical[name]
        levels = {}
        for code, ys in _grouped_targets(cat.codes, y):
            post = conjugate.update(prior, ys)
            levels[cat.levels[code]] = LevelPosterior(post, conjugate.moments(post, q), len(ys))
        columns.append(FittedColumnEncoding(name, prior, levels, fallback))

    if numeric_columns is None:
        numeric_columns = data.numeric_names
    return CbmEncoder(task, q, tuple(columns), tuple(numeric_columns), float(noise_sigma), scaler)


def add_noise(matrix: EncodedMatrix, n_cols: int, sigma: float, seed: int) -> EncodedMatrix:
    """Add N(0, sigma) noise to the first ``n_cols`` columns."""
    if sigma <= 0 or n_cols == 0:
        return matrix
    rng = np.random.default_rng(seed)
    values = matrix.values.copy()
    values[:, :n_cols] += rng.normal(0.0, sigma, size=(values.shape[0], n_cols))
    return EncodedMatrix(values, matrix.column_labels)


def fit_transform(data: Dataset, q: int = 1, noise_sigma: float = 0.0, seed: int = 0,
                  **fit_kwargs) -> tuple[CbmEncoder, EncodedMatrix]:
    """Fit, encode the training rows, then jitter the CBM columns with training-time noise.

    The returned encoder holds clean lookups; numeric passthrough is never jittered.
    """
    enc = fit(data, q, noise_sigma=noise_sigma, **fit_kwargs)
    z = enc.transform(data)
    return enc, add_noise(z, enc.cbm_width, noise_sigma, seed)


# Model file

def _encoder_to_dict(enc: CbmEncoder) -> dict:
    return {
        "format_version": enc.format_version,
        "task": enc.task.to_dict(),
        "q": enc.q,
        "noise_sigma": enc.noise_sigma,
        "numeric_columns": list(enc.numeric_columns),
        "scaler": None if enc.scaler is None else enc.scaler.to_dict(),
        "priors": {c.column_name: c.prior.to_list() for c in enc.columns},
        "columns": [
            {
                "name": c.column_name,
                "fallback": c.fallback_moments.tolist(),
                "levels": {
                    lvl: {"params": post.params.to_list(),
                          "moments": post.moments.tolist(),
                          "count": post.count}
                    for lvl, post in c.levels.items()
                },
            }
            for c in enc.columns
        ],
    }


def dumps(enc: CbmEncoder) -> str:
    return json.dumps(_encoder_to_dict(enc), indent=1, ensure_ascii=False, allow_nan=False)


def save(enc: CbmEncoder, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(enc))
        fh.write("\n")


def _vector(values, width, what) -> np.ndarray:
    v = np.asarray(values, dtype=np.float64)
    if v.shape != (width,) or not np.isfinite(v).all():
        raise MalformedModelError(f"{what}: expected {width} finite numbers")
    return v


def loads(text: str) -> CbmEncoder:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedModelError(f"model file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "format_version" not in doc:
        raise MalformedModelError("model file lacks format_version")
    if doc["format_version"] != FORMAT_VERSION:
        raise UnsupportedVersionError(f"unsupported model format_version {doc['format_version']!r}")
    try:
        task = TaskKind.from_dict(doc["task"])
        q = check_q(doc["q"])
        width = moments_per_column(task, q)
        columns = []
        for c in doc["columns"]:
            name = c["name"]
            prior = conjugate.params_from_list(task, doc["priors"][name])
            levels = {
                lvl: LevelPosterior(conjugate.params_from_list(task, entry["params"]),
                                    _vector(entry["moments"], width, f"{name}/{lvl}"),
                                    int(entry["count"]))
                for lvl, entry in c["levels"].items()
            }
            columns.append(FittedColumnEncoding(
                name, prior, levels, _vector(c["fallback"], width, f"{name} fallback")))
        scaler = doc.get("scaler")
        return CbmEncoder(
            task, q, tuple(columns), tuple(doc["numeric_columns"]),
            float(doc["noise_sigma"]),
            None if scaler is None else ScalerParams.from_dict(scaler),
        )
    except CbmDataError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise MalformedModelError(f"malformed model file: {exc!r}") from exc


def load(path) -> CbmEncoder:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())
