import csv

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cbm_encoding import TaskKind
from cbm_encoding.data import (
    IngestOptions, kfold_indices, read_csv, scaler_fit, scaler_transform, train_test_split,
)
from cbm_encoding.errors import IngestError, TaskMismatchError
from cbm_encoding.types import CATEGORICAL, NUMERIC


def write(tmp_path, rows, name="d.csv"):
    path = tmp_path / name
    with open(path, "w", newline="", encoding="utf-8") as fh:
        csv.writer(fh).writerows(rows)
    return path


def test_schema_inference(tmp_path):
    path = write(tmp_path, [["a", "b", "y"], ["1.5", "1", "0"], ["2", "", "1"], ["x", "3", "1"]])
    d = read_csv(path, target_column="y")
    kinds = {c.name: c.kind for c in d.schema}
    assert kinds == {"a": CATEGORICAL, "b": NUMERIC}
    assert len(d.categorical["a"].levels) == 3
    assert d.numeric["b"].tolist() == [1.0, 2.0, 3.0]
    assert d.task == TaskKind.binary()
    assert d.target.tolist() == [0, 1, 1]


def test_na_categorical_and_quoting(tmp_path):
    path = tmp_path / "q.csv"
    path.write_text('c,y\n"a, b",0\nNA,1\nnull,0\n"say ""hi""",1\n', encoding="utf-8")
    d = read_csv(path, target_column="y")
    assert list(d.categorical["c"].values()) == ["a, b", "__missing__", "__missing__", 'say "hi"']


def test_custom_na_tokens(tmp_path):
    path = write(tmp_path, [["c", "y"], ["?", "0"], ["a", "1"]])
    d = read_csv(path, IngestOptions(target_column="y", na_tokens={"?"}))
    assert list(d.categorical["c"].values()) == ["__missing__", "a"]


def test_ingest_errors(tmp_path):
    with pytest.raises(IngestError):
        read_csv(write(tmp_path, [["a", "y"], ["1", "0"]]), target_column="nope")
    with pytest.raises(IngestError):
        read_csv(write(tmp_path, [["a", "y"]]), target_column="y")
    with pytest.raises(IngestError):
        read_csv(write(tmp_path, [["a", "y"], ["1", "0", "9"]]), target_column="y")


def test_target_kinds(tmp_path):
    path = write(tmp_path, [["c", "y"], ["a", "low"], ["b", "mid"], ["a", "high"]])
    d = read_csv(path, target_column="y")
    assert d.task == TaskKind.multiclass(3)
    assert d.class_labels == ("high", "low", "mid")
    assert d.target.tolist() == [1, 2, 0]

    path = write(tmp_path, [["c", "y"], ["a", "1.5"], ["b", "2"]])
    assert read_csv(path, target_column="y").task == TaskKind.regression()

    path = write(tmp_path, [["c", "y"], ["a", " >50K"], ["b", " <=50K"]])
    d = read_csv(path, target_column="y", task="binary")
    assert d.target.tolist() == [1, 0]

    path = write(tmp_path, [["c", "y"], ["a", "0"], ["b", "2"]])
    d = read_csv(path, target_column="y", task="multiclass:4")
    assert d.task == TaskKind.multiclass(4) and d.target.tolist() == [0, 2]
    with pytest.raises(TaskMismatchError):
        read_csv(path, target_column="y", task="multiclass:2")


def test_forced_kinds(tmp_path):
    path = write(tmp_path, [["zip", "v"], ["10001", "1"], ["94105", "2"]])
    d = read_csv(path, categorical=("zip",))
    assert d.categorical["zip"].levels == ("10001", "94105")
    assert d.target is None


def test_schema_idempotent(tmp_path):
    path = write(tmp_path, [["a", "b", "y"], ["x", "1", "0"], ["y", "2.5", "1"], ["", "", "0"]])
    d = read_csv(path, target_column="y")
    rows = [[c.name for c in d.schema] + ["y"]]
    for i in range(d.n_rows):
        rows.append([d.categorical["a"].values()[i], repr(float(d.numeric["b"][i])), str(d.target[i])])
    d2 = read_csv(write(tmp_path, rows, "again.csv"), target_column="y")
    assert d2.schema == d.schema


def test_scaler():
    from cbm_encoding import Dataset
    d = Dataset.from_columns(numeric={"x": [0.0, 2.0], "k": [5.0, 5.0]})
    p = scaler_fit(d)
    assert (p.mean["x"], p.std["x"]) == (1.0, 1.0)
    out = scaler_transform(p, d)
    assert out.numeric["x"].tolist() == [-1.0, 1.0]
    assert out.numeric["k"].tolist() == [0.0, 0.0]


def test_scaler_train_mean_zero(rng):
    from cbm_encoding import Dataset
    d = Dataset.from_columns(numeric={"x": rng.normal(5, 3, 1000), "z": rng.exponential(2, 1000)})
    out = scaler_transform(scaler_fit(d), d)
    for col in out.numeric.values():
        assert abs(col.mean()) < 1e-9


def test_kfold_singletons():
    folds = kfold_indices(10, 10, seed=0)
    assert sorted(len(f) for f in folds) == [1] * 10
    assert sorted(np.concatenate(folds).tolist()) == list(range(10))


def test_kfold_stratified():
    y = np.array([1] * 30 + [0] * 70)
    folds = kfold_indices(100, 10, seed=4, stratify=y)
    for f in folds:
        assert len(f) == 10
        assert abs(y[f].sum() - 3) <= 1


@given(st.integers(2, 300), st.integers(2, 12), st.integers(0, 2 ** 31), st.booleans())
def test_kfold_partition(n, k, seed, stratified):
    k = min(k, n)
    labels = np.random.default_rng(seed).integers(0, 3, n) if stratified else None
    folds = kfold_indices(n, k, seed, labels)
    sizes = [len(f) for f in folds]
    assert max(sizes) - min(sizes) <= 1
    assert sorted(np.concatenate(folds).tolist()) == list(range(n))
    again = kfold_indices(n, k, seed, labels)
    assert all(np.array_equal(a, b) for a, b in zip(folds, again))
    if stratified:
        for c in range(3):
            share = (labels == c).sum() / k
            for f in folds:
                assert abs((labels[f] == c).sum() - share) < 1 + 1e-9


def test_kfold_errors():
    with pytest.raises(ValueError):
        kfold_indices(5, 6, 0)


@pytest.mark.parametrize("stratify", [None, np.array([0, 1] * 5)])
def test_train_test_split(stratify):
    tr, te = train_test_split(10, 0.3, seed=1, stratify=stratify)
    assert len(te) == 3
    assert set(tr) | set(te) == set(range(10)) and not set(tr) & set(te)
    tr2, te2 = train_test_split(10, 0.3, seed=1, stratify=stratify)
    assert np.array_equal(te, te2)


@pytest.mark.parametrize("fraction", [0.0, 1.0, 0.01])
def test_train_test_split_degenerate(fraction):
    with pytest.raises(ValueError):
        train_test_split(10, fraction, seed=0)
