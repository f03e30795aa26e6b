"""Comparison encoders: truncated one-hot, ordinal, binary, signed hashing, target.

Every encoder emits one block per categorical column followed by the numeric
passthrough columns, like the CBM encoder, so learners see the same layout.
"""

from __future__ import annotations

import hashlib
import math

import numpy as np

from .encoder import add_noise
from .errors import UnsupportedCombinationError
from .types import (
    MULTICLASS, Dataset, EncodedMatrix, passthrough_block, require_categorical,
)

OTHER = "__other__"
DEFAULT_HASH_SEED = 0


class _Encoder:
    """Shared fit/transform plumbing. Subclasses fill ``_fit_column`` and ``_encode_column``."""

    def fit(self, data: Dataset):
        self.categorical_ = list(data.categorical_names)
        self.numeric_ = list(data.numeric_names)
        self.state_ = {name: self._fit_column(data, name) for name in self.categorical_}
        return self

    def _blocks(self, data: Dataset):
        require_categorical(data, self.categorical_)
        blocks, labels = [], []
        for name in self.categorical_:
            block, block_labels = self._encode_column(data.categorical[name], name, self.state_[name])
            blocks.append(block)
            labels += block_labels
        return blocks, labels

    def transform(self, data: Dataset) -> EncodedMatrix:
        blocks, labels = self._blocks(data)
        blocks.append(passthrough_block(data, self.numeric_))
        return EncodedMatrix(np.hstack(blocks) if blocks else np.empty((data.n_rows, 0)),
                             tuple(labels + self.numeric_))

    def fit_transform(self, data: Dataset, seed: int = 0) -> EncodedMatrix:
        return self.fit(data).transform(data)


def _counts(cat) -> dict[str, int]:
    counts = np.bincount(cat.codes, minlength=len(cat.levels))
    return {lvl: int(c) for lvl, c in zip(cat.levels, counts) if c > 0}


class OneHotEncoder(_Encoder):
    """Indicators for levels seen at least ``threshold`` times, plus one ``__other__`` column.

    Rare and unseen levels share ``__other__``; each source column contributes
    exactly one 1 per row.
    """

    def __init__(self, threshold: int = 0):
        if threshold < 0:
            raise ValueError("threshold must be >= 0")
        self.threshold = threshold

    def _fit_column(self, data, name):
        kept = sorted(lvl for lvl, c in _counts(data.categorical[name]).items()
                      if c >= self.threshold)
        return {lvl: i for i, lvl in enumerate(kept)}

    def transform(self, data: Dataset) -> EncodedMatrix:
        # Allocates the full matrix once; dense one-hot blocks can be large.
        require_categorical(data, self.categorical_)
        widths = [len(self.state_[n]) + 1 for n in self.categorical_]
        out = np.zeros((data.n_rows, sum(widths) + len(self.numeric_)))
        labels, offset = [], 0
        rows = np.arange(data.n_rows)
        for name, width in zip(self.categorical_, widths):
            cat, index = data.categorical[name], self.state_[name]
            col_of_level = np.array([index.get(lvl, width - 1) for lvl in cat.levels], dtype=np.intp)
            out[rows, offset + col_of_level[cat.codes]] = 1.0
            labels += [f"{name}__{lvl}" for lvl in index] + [f"{name}__{OTHER}"]
            offset += width
        out[:, offset:] = passthrough_block(data, self.numeric_)
        return EncodedMatrix(out, tuple(labels + self.numeric_))


class OrdinalEncoder(_Encoder):
    """Levels numbered 1..K in lexicographic order; unseen levels map to 0."""

    def _fit_column(self, data, name):
        return {lvl: i + 1 for i, lvl in enumerate(sorted(_counts(data.categorical[name])))}

    def _ids(self, cat, mapping) -> np.ndarray:
        return np.array([mapping.get(lvl, 0) for lvl in cat.levels], dtype=np.int64)[cat.codes]

    def _encode_column(self, cat, name, mapping):
        return self._ids(cat, mapping).astype(np.float64)[:, None], [name]


class BinaryEncoder(OrdinalEncoder):
    """Bit pattern of the ordinal id, ``ceil(log2(K + 1))`` columns per source column."""

    def _encode_column(self, cat, name, mapping):
        n_bits = max(1, math.ceil(math.log2(len(mapping) + 1)))
        ids = self._ids(cat, mapping)
        bits = (ids[:, None] >> np.arange(n_bits - 1, -1, -1)) & 1
        return bits.astype(np.float64), [f"{name}__bit{b}" for b in range(n_bits)]


def hash_index(column: str, level: str, dimensions: int,
               seed: int = DEFAULT_HASH_SEED) -> tuple[int, float]:
    """Stable ``(index, sign)`` for a (column, level) pair.

    BLAKE2b keyed by the seed; the low 63 bits pick the index and the top bit
    the sign, so results are identical across processes and platforms.
    """
    digest = hashlib.blake2b(
        f"{column}\x1f{level}".encode("utf-8"), digest_size=8,
        key=int(seed).to_bytes(8, "little", signed=False),
    ).digest()
    h = int.from_bytes(digest, "little")
    return (h & ((1 << 63) - 1)) % dimensions, (-1.0 if h >> 63 else 1.0)


class HashingEncoder(_Encoder):
    """Signed feature hashing of all categorical columns into one shared block.

    Stateless apart from remembering column names; width is
    ``dimensions + numeric_count``.
    """

    def __init__(self, dimensions: int = 1000, seed: int = DEFAULT_HASH_SEED):
        if dimensions < 1:
            raise ValueError("dimensions must be >= 1")
        self.dimensions = dimensions
        self.seed = seed

    def _fit_column(self, data, name):
        return None

    def _blocks(self, data):
        require_categorical(data, self.categorical_)
        block = np.zeros((data.n_rows, self.dimensions))
        rows = np.arange(data.n_rows)
        for name in self.categorical_:
            cat = data.categorical[name]
            pairs = [hash_index(name, lvl, self.dimensions, self.seed) for lvl in cat.levels]
            idx = np.array([p[0] for p in pairs], dtype=np.intp)
            sign = np.array([p[1] for p in pairs])
            np.add.at(block, (rows, idx[cat.codes]), sign[cat.codes])
        return [block], [f"hash_{j}" for j in range(self.dimensions)]


class TargetEncoder(_Encoder):
    """Smoothed per-level target mean.

    Level ``v`` maps to ``(n_v * mean_v + s * global_mean) / (n_v + s)``;
    unseen levels map to the global mean. Binary and regression targets only.
    """

    def __init__(self, smoothing: float = 1.0, noise_sigma: float = 0.0):
        if smoothing < 0 or noise_sigma < 0:
            raise ValueError("smoothing and noise_sigma must be non-negative")
        self.smoothing = smoothing
        self.noise_sigma = noise_sigma

    def fit(self, data: Dataset):
        y = data.require_target()
        if data.task.kind == MULTICLASS:
            raise UnsupportedCombinationError("target encoding is undefined for multiclass targets")
        self.global_mean_ = float(np.mean(y))
        self._y = y.astype(np.float64)
        super().fit(data)
        del self._y
        return self

    def _fit_column(self, data, name):
        cat = data.categorical[name]
        n = np.bincount(cat.codes, minlength=len(cat.levels))
        s = np.bincount(cat.codes, weights=self._y, minlength=len(cat.levels))
        k = self.smoothing
        return {lvl: (s_v + k * self.global_mean_) / (n_v + k)
                for lvl, n_v, s_v in zip(cat.levels, n, s) if n_v > 0}

    def _encode_column(self, cat, name, mapping):
        table = np.array([mapping.get(lvl, self.global_mean_) for lvl in cat.levels])
        return table[cat.codes][:, None], [name]

    def fit_transform(self, data: Dataset, seed: int = 0) -> EncodedMatrix:
        z = self.fit(data).transform(data)
        return add_noise(z, len(self.categorical_), self.noise_sigma, seed)
