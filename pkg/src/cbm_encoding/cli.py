"""``cbm <fit|transform|benchmark|scaling> [flags]``

Exit codes: 0 success, 2 usage, 3 data/schema, 4 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import bench, encoder as cbm
from .data import IngestOptions, dataset_fingerprint, file_sha256, read_csv, scaler_fit, write_matrix_csv
from .errors import CbmDataError, UnsupportedCombinationError

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 2, 3, 4


def _ingest_flags(p, target=True):
    if target:
        p.add_argument("--target", default="target", help="target column name")
        p.add_argument("--task", default="infer",
                       help="binary | multiclass[:K] | regression | infer (default)")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--na-tokens", default=",NA,null",
                   help="comma-separated tokens read as missing (default: empty, NA, null)")


def _opts(args, **extra) -> IngestOptions:
    return IngestOptions(
        target_column=extra.pop("target_column", getattr(args, "target", None)),
        task=getattr(args, "task", "infer"),
        delimiter=args.delimiter,
        na_tokens=frozenset(args.na_tokens.split(",")),
        **extra,
    )


def _csv_list(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cbm", description="Conjugate Bayesian model encoding")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a CBM encoder and write a model file")
    p.add_argument("train_csv")
    _ingest_flags(p)
    p.add_argument("--q", type=int, choices=(1, 2), default=1, help="posterior moments per level")
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("transform", help="encode a CSV with a fitted model")
    p.add_argument("model")
    p.add_argument("data_csv")
    _ingest_flags(p, target=False)
    p.add_argument("--out", required=True)

    p = sub.add_parser("benchmark", help="k-fold encoder comparison")
    p.add_argument("data_csv")
    _ingest_flags(p)
    p.add_argument("--encoders", type=_csv_list, default=("cbm",),
                   help=f"comma-separated from {','.join(bench.ENCODER_NAMES)}")
    p.add_argument("--learner", default="auto", choices=bench.LEARNER_NAMES)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--q", type=int, choices=(1, 2), default=1)
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--onehot-threshold", type=int, default=150)
    p.add_argument("--hash-dims", type=int, default=1000)
    p.add_argument("--target-smoothing", type=float, default=1.0)
    p.add_argument("--l2", type=float, default=1e-3)
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--stratify", action=argparse.BooleanOptionalAction, default=None,
                   help="stratified folds (default: on for classification)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--csv", help="also write a flattened CSV report")

    p = sub.add_parser("scaling", help="time/accuracy curves over growing sample sizes")
    p.add_argument("--spec", choices=("synthetic",), default="synthetic")
    p.add_argument("--sizes", default="2000:50000:2000", help="start:stop:step or a,b,c")
    p.add_argument("--encoders", type=_csv_list, default=("beta", "onehot"))
    p.add_argument("--cardinality-ratio", type=float, default=0.1)
    p.add_argument("--signal-alpha", type=float, default=0.5)
    p.add_argument("--signal-beta", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--test-fraction", type=float, default=0.3)
    p.add_argument("--q", type=int, choices=(1, 2), default=1)
    p.add_argument("--onehot-threshold", type=int, default=0)
    p.add_argument("--l2", type=float, default=1e-3)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--out", required=True)
    return parser


def cmd_fit(args) -> int:
    data = read_csv(args.train_csv, _opts(args))
    scaler = scaler_fit(data)
    enc = cbm.fit(data, args.q, noise_sigma=args.noise_sigma, scaler=scaler)
    enc.save(args.out)
    print(f"task: {enc.task}")
    for col in enc.columns:
        print(f"column {col.column_name}: cardinality {len(col.levels)}")
    print(f"encoded width: {enc.width}")
    return EXIT_OK


def cmd_transform(args) -> int:
    enc = cbm.load(args.model)
    opts = _opts(args, target_column=None,
                 categorical=tuple(c.column_name for c in enc.columns),
                 numeric=tuple(enc.numeric_columns))
    data = read_csv(args.data_csv, opts)
    write_matrix_csv(args.out, enc.transform(data))
    return EXIT_OK


def cmd_benchmark(args) -> int:
    data = read_csv(args.data_csv, _opts(args))
    cfg = bench.BenchmarkConfig(
        encoders=tuple(args.encoders), learner=args.learner, k=args.k, seed=args.seed,
        q=args.q, noise_sigma=args.noise_sigma, stratify=args.stratify,
        onehot_threshold=args.onehot_threshold, hash_dims=args.hash_dims,
        target_smoothing=args.target_smoothing, l2=args.l2, max_iter=args.max_iter,
        threads=args.threads,
    )
    fingerprint = dataset_fingerprint(data)
    fingerprint["file_sha256"] = file_sha256(args.data_csv)
    report = bench.run_benchmark(data, cfg, fingerprint=fingerprint)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(report.to_json() + "\n")
    if args.csv:
        report.write_csv(args.csv)
    for cell in report.cells:
        stats = " ".join(f"{m}={s['mean']:.4f}+/-{s['std']:.4f}" for m, s in cell["metrics"].items())
        print(f"{cell['encoder']:>10} width={cell['width']:<6} {stats} "
              f"time={cell['training_time']['mean']:.3f}s")
    return EXIT_OK


def cmd_scaling(args) -> int:
    cfg = bench.ScalingConfig(
        sizes=tuple(bench.parse_sizes(args.sizes)), encoders=tuple(args.encoders),
        cardinality_ratio=args.cardinality_ratio, signal_alpha=args.signal_alpha,
        signal_beta=args.signal_beta, seed=args.seed, test_fraction=args.test_fraction,
        q=args.q, onehot_threshold=args.onehot_threshold, l2=args.l2, max_iter=args.max_iter,
    )

    def progress(row):
        print(f"n={row['n_rows']:>7} {row['encoder']:>8} width={row['width']:<6} "
              f"acc={row['accuracy']:.4f} time={row['train_time']:.3f}s", file=sys.stderr)

    rows = bench.run_scaling(cfg, progress)
    bench.write_scaling_csv(rows, args.out)
    return EXIT_OK


COMMANDS = {"fit": cmd_fit, "transform": cmd_transform,
            "benchmark": cmd_benchmark, "scaling": cmd_scaling}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UnsupportedCombinationError as exc:
        print(f"cbm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CbmDataError, OSError) as exc:
        print(f"cbm: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"cbm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"cbm: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
