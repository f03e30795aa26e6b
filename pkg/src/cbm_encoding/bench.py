"""Cross-validated encoder comparison, the sample-size scaling experiment,
and a synthetic high-cardinality generator with a known Bayes-optimal AUC.
"""

from __future__ import annotations

import csv
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import baselines, encoder as cbm
from .data import dataset_fingerprint, kfold_indices, scaler_fit, scaler_transform, train_test_split
from .errors import UnsupportedCombinationError
from .learners import fit_logistic, fit_multinomial, fit_ridge
from .metrics import accuracy, auc, qwk, r2
from .types import BINARY, MULTICLASS, REGRESSION, Dataset, TaskKind

REPORT_SCHEMA_VERSION = 1
TIMING_FIELDS = ("training_time",)
CBM_FAMILIES = {"beta": BINARY, "dirichlet": MULTICLASS, "gig": REGRESSION}
ENCODER_NAMES = ("cbm", *CBM_FAMILIES, "onehot", "ordinal", "binary", "hashing", "target")
LEARNER_NAMES = ("auto", "logistic", "multinomial", "ridge")
MA_WINDOW = 5


# Synthetic data

@dataclass(frozen=True)
class SyntheticSpec:
    """Binary task whose first categorical column carries all the signal.

    Each level of ``cat0`` gets a true positive rate drawn once from
    ``Beta(signal_alpha, signal_beta)``; rows pick levels uniformly. Further
    categorical columns and numeric columns are pure noise. The number of
    levels is ``cardinality`` if given, else ``round(cardinality_ratio * n_rows)``.
    """

    n_rows: int
    cardinality: int | None = None
    cardinality_ratio: float | None = None
    n_cat_columns: int = 1
    n_numeric: int = 0
    signal_alpha: float = 0.5
    signal_beta: float = 0.5
    seed: int = 0

    @property
    def n_levels(self) -> int:
        if self.cardinality is not None:
            k = self.cardinality
        elif self.cardinality_ratio is not None:
            k = int(round(self.cardinality_ratio * self.n_rows))
        else:
            raise ValueError("give cardinality or cardinality_ratio")
        return max(k, 1)

    def __post_init__(self):
        if self.n_rows < 1 or self.n_cat_columns < 1:
            raise ValueError("need at least one row and one categorical column")
        if self.n_levels > self.n_rows:
            raise ValueError("cardinality cannot exceed n_rows")


@dataclass(frozen=True, eq=False)
class SyntheticTruth:
    level_probs: np.ndarray
    level_weights: np.ndarray


def make_synthetic(spec: SyntheticSpec) -> tuple[Dataset, SyntheticTruth]:
    rng = np.random.default_rng(spec.seed)
    k = spec.n_levels
    probs = rng.beta(spec.signal_alpha, spec.signal_beta, size=k)
    width = len(str(k - 1))
    names = np.array([f"L{j:0{width}d}" for j in range(k)], dtype=object)
    cat = {}
    for c in range(spec.n_cat_columns):
        codes = rng.integers(0, k, size=spec.n_rows)
        cat[f"cat{c}"] = names[codes]
        if c == 0:
            y = (rng.random(spec.n_rows) < probs[codes]).astype(np.int64)
    num = {f"num{j}": rng.normal(size=spec.n_rows) for j in range(spec.n_numeric)}
    data = Dataset.from_columns(cat, num, y, TaskKind.binary())
    return data, SyntheticTruth(probs, np.full(k, 1.0 / k))


def bayes_auc(level_probs, level_weights=None) -> float:
    """Population AUC of scoring each row by its level's true positive rate.

    Enumerates every (positive level, negative level) pair; equal rates count one half.
    """
    p = np.asarray(level_probs, dtype=np.float64)
    w = np.full(p.size, 1.0 / p.size) if level_weights is None else np.asarray(level_weights)
    pos = w * p
    neg = w * (1.0 - p)
    order = p[:, None] - p[None, :]
    credit = (order > 0) + 0.5 * (order == 0)
    return float(pos @ credit @ neg / (pos.sum() * neg.sum()))


# Encoders and learners by name

@dataclass(frozen=True)
class BenchmarkConfig:
    encoders: tuple[str, ...] = ("cbm",)
    learner: str = "auto"
    k: int = 10
    seed: int = 0
    q: int = 1
    noise_sigma: float = 0.0
    stratify: bool | None = None
    onehot_threshold: int = 150
    hash_dims: int = 1000
    target_smoothing: float = 1.0
    l2: float = 1e-3
    max_iter: int = 1000
    tol: float = 1e-6
    threads: int = 1


def _check_encoder(name: str, task: TaskKind) -> None:
    if name not in ENCODER_NAMES:
        raise UnsupportedCombinationError(f"unknown encoder {name!r}; choose from {ENCODER_NAMES}")
    if name in CBM_FAMILIES and CBM_FAMILIES[name] != task.kind:
        raise UnsupportedCombinationError(f"{name} encoder does not apply to a {task} task")
    if name == "target" and task.kind == MULTICLASS:
        raise UnsupportedCombinationError("target encoder does not apply to multiclass tasks")


def _check_learner(name: str, task: TaskKind) -> str:
    if name not in LEARNER_NAMES:
        raise UnsupportedCombinationError(f"unknown learner {name!r}; choose from {LEARNER_NAMES}")
    if name == "auto":
        return {BINARY: "logistic", MULTICLASS: "multinomial", REGRESSION: "ridge"}[task.kind]
    ok = {"logistic": (BINARY,), "multinomial": (BINARY, MULTICLASS),
          "ridge": (BINARY, REGRESSION)}[name]
    if task.kind not in ok:
        raise UnsupportedCombinationError(f"{name} learner does not apply to a {task} task")
    return name


def _make_encoder(name: str, cfg: BenchmarkConfig):
    """Returns ``fit(train, seed) -> (transform, Z_train)`` and whether Z is standardized."""
    if name == "cbm" or name in CBM_FAMILIES:
        def fit(train, seed):
            enc, z = cbm.fit_transform(train, cfg.q, cfg.noise_sigma, seed)
            return enc.transform, z
        return fit, True
    make = {
        "onehot": lambda: baselines.OneHotEncoder(cfg.onehot_threshold),
        "ordinal": baselines.OrdinalEncoder,
        "binary": baselines.BinaryEncoder,
        "hashing": lambda: baselines.HashingEncoder(cfg.hash_dims),
        "target": lambda: baselines.TargetEncoder(cfg.target_smoothing, cfg.noise_sigma),
    }[name]

    def fit(train, seed):
        enc = make()
        z = enc.fit_transform(train, seed)
        return enc.transform, z
    return fit, name in ("target", "ordinal")


def _standardize(z_train: np.ndarray, z_test: np.ndarray):
    mean = z_train.mean(axis=0)
    std = np.maximum(z_train.std(axis=0), 1e-12)
    return (z_train - mean) / std, (z_test - mean) / std


def _fit_learner(learner: str, task: TaskKind, z, y, cfg: BenchmarkConfig):
    if learner == "logistic":
        return fit_logistic(z, y, cfg.l2, cfg.max_iter, cfg.tol)
    if learner == "multinomial":
        k = task.n_classes if task.kind == MULTICLASS else 2
        return fit_multinomial(z, y, k, cfg.l2, cfg.max_iter, cfg.tol)
    return fit_ridge(z, y, max(cfg.l2, 1e-12))


def _scores(learner, model, z, task):
    """(predicted labels or values, continuous scores for AUC)."""
    if learner == "ridge":
        s = model.decision_function(z)
        return ((s > 0.5).astype(np.int64) if task.kind == BINARY else s), s
    if learner == "multinomial" and task.kind == BINARY:
        p = model.predict_proba(z)
        return np.argmax(p, axis=1), p[:, 1]
    if task.kind == BINARY:
        return model.predict(z), model.decision_function(z)
    return model.predict(z), None


def _fold_metrics(task: TaskKind, pred, score, y) -> dict:
    if task.kind == REGRESSION:
        return {"r2": r2(pred, y)}
    out = {"accuracy": accuracy(pred, y)}
    if np.unique(y).size > 1:
        if task.kind == BINARY:
            out["auc"] = auc(score, y)
        else:
            out["qwk"] = qwk(pred, y, task.n_classes)
    return out


def _fold_seed(seed: int, fold: int) -> int:
    return int(np.random.SeedSequence([seed, fold]).generate_state(1)[0])


def _thread_cap(requested: int) -> int:
    env = os.environ.get("CBM_THREADS")
    cap = int(env) if env and env.isdigit() and int(env) > 0 else requested
    return max(1, min(requested, cap))


@dataclass
class BenchmarkReport:
    environment: dict
    cells: list = field(default_factory=list)
    schema_version: int = REPORT_SCHEMA_VERSION

    def to_dict(self, include_timing: bool = True) -> dict:
        d = asdict(self)
        if not include_timing:
            for cell in d["cells"]:
                for key in TIMING_FIELDS:
                    cell.pop(key, None)
        return d

    def to_json(self, include_timing: bool = True) -> str:
        return json.dumps(self.to_dict(include_timing), indent=2, sort_keys=True)

    def write_csv(self, path) -> None:
        """One row per (encoder, learner, metric)."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["encoder", "learner", "metric", "mean", "std", "width",
                        "training_time_mean", "training_time_std"])
            for c in self.cells:
                for metric, stats in c["metrics"].items():
                    w.writerow([c["encoder"], c["learner"], metric, repr(stats["mean"]),
                                repr(stats["std"]), c["width"],
                                repr(c["training_time"]["mean"]), repr(c["training_time"]["std"])])


def _summary(values: Sequence[float]) -> dict:
    v = np.asarray(values, dtype=np.float64)
    return {"mean": float(v.mean()), "std": float(v.std(ddof=1)) if v.size > 1 else 0.0,
            "folds": [float(x) for x in v]}


def run_benchmark(data: Dataset, config: BenchmarkConfig = BenchmarkConfig(),
                  fingerprint: dict | None = None,
                  on_fold: Callable | None = None) -> BenchmarkReport:
    """k-fold comparison of encoders under one learner.

    For every fold the numeric scaler and the encoder are fit on the training
    folds only; the held-out fold is only transformed. ``training_time``
    covers encoder fit + training transform + learner fit. ``on_fold`` is
    called as ``on_fold(encoder, fold, encoder_fit_rows, eval_rows)``.
    """
    y = data.require_target()
    task = data.task
    cfg = config
    if data.n_rows < cfg.k:
        raise UnsupportedCombinationError(f"k={cfg.k} folds need at least {cfg.k} rows")
    for name in cfg.encoders:
        _check_encoder(name, task)
    learner = _check_learner(cfg.learner, task)
    stratify = task.is_classification if cfg.stratify is None else cfg.stratify
    folds = kfold_indices(data.n_rows, cfg.k, cfg.seed, y if stratify else None)
    all_rows = np.arange(data.n_rows)

    def run_cell(name, fold):
        test_idx = folds[fold]
        train_idx = np.setdiff1d(all_rows, test_idx, assume_unique=True)
        if on_fold is not None:
            on_fold(name, fold, train_idx, test_idx)
        fit_encoder, standardize = _make_encoder(name, cfg)
        train, test = data.take(train_idx), data.take(test_idx)
        scaler = scaler_fit(train)
        train, test = scaler_transform(scaler, train), scaler_transform(scaler, test)

        t0 = time.perf_counter()
        transform, z_train = fit_encoder(train, _fold_seed(cfg.seed, fold))
        t_fit = time.perf_counter() - t0
        z_train, z_test = z_train.values, transform(test).values
        if standardize:
            t1 = time.perf_counter()
            z_train, z_test = _standardize(z_train, z_test)
            t_fit += time.perf_counter() - t1
        t1 = time.perf_counter()
        model = _fit_learner(learner, task, z_train, train.target, cfg)
        elapsed = t_fit + time.perf_counter() - t1
        pred, score = _scores(learner, model, z_test, task)
        return _fold_metrics(task, pred, score, test.target), elapsed, z_train.shape[1]

    jobs = [(name, f) for name in cfg.encoders for f in range(cfg.k)]
    threads = _thread_cap(cfg.threads)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda j: run_cell(*j), jobs))
    else:
        results = [run_cell(*j) for j in jobs]

    env = {
        "seed": cfg.seed, "k": cfg.k, "stratified": bool(stratify), "q": cfg.q,
        "noise_sigma": cfg.noise_sigma, "learner": learner, "task": task.to_dict(),
        "l2": cfg.l2, "max_iter": cfg.max_iter, "onehot_threshold": cfg.onehot_threshold,
        "hash_dims": cfg.hash_dims, "target_smoothing": cfg.target_smoothing,
        "dataset": fingerprint or dataset_fingerprint(data),
    }
    report = BenchmarkReport(env)
    for i, name in enumerate(cfg.encoders):
        cell = results[i * cfg.k:(i + 1) * cfg.k]
        metric_names = sorted(set().union(*(m for m, _, _ in cell)))
        report.cells.append({
            "encoder": name,
            "learner": learner,
            "width": int(max(w for _, _, w in cell)),
            "fold_widths": [int(w) for _, _, w in cell],
            "metrics": {m: _summary([fm[m] for fm, _, _ in cell if m in fm])
                        for m in metric_names},
            "training_time": _summary([t for _, t, _ in cell]),
        })
    return report


# Scaling experiment

def moving_average(values: Sequence[float], window: int = MA_WINDOW) -> np.ndarray:
    """Trailing mean over the last ``window`` points (fewer at the start)."""
    v = np.asarray(values, dtype=np.float64)
    c = np.concatenate([[0.0], np.cumsum(v)])
    idx = np.arange(1, v.size + 1)
    lo = np.maximum(idx - window, 0)
    return (c[idx] - c[lo]) / (idx - lo)


def parse_sizes(text: str) -> list[int]:
    """``"start:stop:step"`` (stop inclusive) or a comma-separated list."""
    if ":" in text:
        start, stop, step = (int(x) for x in text.split(":"))
        if step <= 0 or start <= 0 or stop < start:
            raise ValueError(f"bad size range {text!r}")
        return list(range(start, stop + 1, step))
    sizes = [int(x) for x in text.split(",") if x.strip()]
    if any(b <= a for a, b in zip(sizes, sizes[1:])) or not sizes:
        raise ValueError("sizes must be ascending")
    return sizes


@dataclass(frozen=True)
class ScalingConfig:
    sizes: tuple[int, ...]
    encoders: tuple[str, ...] = ("beta", "onehot")
    cardinality_ratio: float = 0.1
    signal_alpha: float = 0.5
    signal_beta: float = 0.5
    seed: int = 0
    test_fraction: float = 0.3
    q: int = 1
    onehot_threshold: int = 0
    hash_dims: int = 1000
    l2: float = 1e-3
    max_iter: int = 100
    tol: float = 1e-6


SCALING_FIELDS = ("n_rows", "cardinality", "encoder", "width", "n_test", "train_time",
                  "accuracy", "train_time_ma", "accuracy_ma")


def run_scaling(config: ScalingConfig, progress: Callable | None = None) -> list[dict]:
    """Training time and held-out accuracy per encoder as the sample size grows.

    One synthetic dataset per size (cardinality scales with size); a
    stratified hold-out split; logistic learner. Curves are also reported
    smoothed by a trailing moving average over five sizes.
    """
    task = TaskKind.binary()
    for name in config.encoders:
        _check_encoder(name, task)
    cfg = BenchmarkConfig(encoders=config.encoders, q=config.q,
                          onehot_threshold=config.onehot_threshold, hash_dims=config.hash_dims,
                          l2=config.l2, max_iter=config.max_iter, tol=config.tol)
    rows = []
    for n in config.sizes:
        spec = SyntheticSpec(n, cardinality_ratio=config.cardinality_ratio,
                             signal_alpha=config.signal_alpha, signal_beta=config.signal_beta,
                             seed=config.seed)
        data, _ = make_synthetic(spec)
        tr, te = train_test_split(n, config.test_fraction, config.seed, data.target)
        train, test = data.take(tr), data.take(te)
        for name in config.encoders:
            fit_encoder, standardize = _make_encoder(name, cfg)
            t0 = time.perf_counter()
            transform, z_train = fit_encoder(train, config.seed)
            t_enc = time.perf_counter() - t0
            z_train, z_test = z_train.values, transform(test).values
            t1 = time.perf_counter()
            if standardize:
                z_train, z_test = _standardize(z_train, z_test)
            model = fit_logistic(z_train, train.target, cfg.l2, cfg.max_iter, cfg.tol)
            elapsed = t_enc + time.perf_counter() - t1
            acc = accuracy(model.predict(z_test), test.target)
            rows.append({"n_rows": n, "cardinality": spec.n_levels, "encoder": name,
                         "width": int(z_train.shape[1]), "n_test": int(len(te)),
                         "train_time": elapsed, "accuracy": acc})
            del z_train, z_test
            if progress is not None:
                progress(rows[-1])
    for name in config.encoders:
        mine = [r for r in rows if r["encoder"] == name]
        for key in ("train_time", "accuracy"):
            for r, v in zip(mine, moving_average([r[key] for r in mine])):
                r[key + "_ma"] = float(v)
    return rows


def write_scaling_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=SCALING_FIELDS, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
