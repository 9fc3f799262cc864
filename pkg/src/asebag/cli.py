"""Command-line surface: benchmark, ablate, curve, gen-synth, summarize.

Exit codes: 0 success, 1 data/runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import re
import sys

from ._rng import derive_seed
from .core import AsebagError, DataError
from .datasets import CsvSchema, SynthSpec, generate_synth, load_csv, summarize, write_csv
from .ensemble import AseConfig, CLASSIFIERS, DETECTORS
from .harness import ABLATION_VARIANTS, BENCHMARK_MODELS, run_ablation, run_benchmark, run_curve
from .report import dumps_report, write_text

SYNTH_SEED_STREAM = 909

_PREDICATE_RE = re.compile(r"^\s*(\S+)\s*(>=|<=|==|!=|>|<)\s*(-?[\d.eE+-]+)\s*$")


class UsageError(Exception):
    """Bad flag combination detected after parsing."""


def _parse_contamination(text: str) -> tuple[float, float]:
    try:
        lo, hi = text.split(":")
        return float(lo), float(hi)
    except ValueError:
        raise UsageError(f"--contamination expects MIN:MAX, got {text!r}") from None


def _parse_synth(text: str) -> tuple[int, int, int, float]:
    try:
        neg, pos, dim, sep = text.split(",")
        return int(neg), int(pos), int(dim), float(sep)
    except ValueError:
        raise UsageError(f"--synth expects NEG,POS,DIM,SEP, got {text!r}") from None


def _parse_predicate(text: str) -> tuple[str, str, float]:
    match = _PREDICATE_RE.match(text)
    if not match:
        raise UsageError(f"--positive-if expects e.g. 'quality >= 7', got {text!r}")
    column, op, value = match.groups()
    return column, op, float(value)


def _add_data_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("data")
    group.add_argument("--data", help="CSV file to load")
    group.add_argument("--synth", metavar="NEG,POS,DIM,SEP",
                       help="generate a synthetic dataset instead of loading one")
    group.add_argument("--label-column", help="label column name (or index with --no-header)")
    group.add_argument("--positive-label", help="literal label value mapped to class 1")
    group.add_argument("--positive-if", metavar="EXPR",
                       help="threshold predicate on the label column, e.g. 'quality >= 7'")
    group.add_argument("--no-header", action="store_true", help="CSV has no header row")
    group.add_argument("--delimiter", default=",", help="CSV cell delimiter (default ',')")


def _add_model_flags(parser: argparse.ArgumentParser, default_members: int = 50) -> None:
    group = parser.add_argument_group("model")
    group.add_argument("--detector", choices=DETECTORS, default="iforest")
    group.add_argument("--trees", type=int, default=100, help="isolation forest tree count")
    group.add_argument("--subsample", type=int, default=256,
                       help="isolation forest subsample size per tree")
    group.add_argument("--detector-k", type=int, default=10, help="knn detector neighbour count")
    group.add_argument("--base-classifier", choices=CLASSIFIERS, default="decision_tree")
    group.add_argument("--max-depth", type=int, default=10)
    group.add_argument("--learning-rate", type=float, default=0.1)
    group.add_argument("--epochs", type=int, default=500)
    group.add_argument("--neighbors", type=int, default=5, help="knn classifier neighbour count")
    group.add_argument("--bins", type=int, default=5)
    group.add_argument("--members", type=int, default=default_members)
    group.add_argument("--contamination", default="0.05:0.40", metavar="MIN:MAX")
    group.add_argument("--train-fraction", type=float, default=0.8)
    group.add_argument("--seed", type=int, default=0)


def _load_dataset(args):
    """Dataset plus its report-ready description, from --data or --synth."""
    if args.data and args.synth:
        raise UsageError("give either --data or --synth, not both")
    if args.synth:
        neg, pos, dim, sep = _parse_synth(args.synth)
        spec = SynthSpec(negatives=neg, positives=pos, dim=dim, separation=sep,
                         seed=derive_seed(args.seed, SYNTH_SEED_STREAM))
        ds = generate_synth(spec)
        info = {"source": f"synth({args.synth})", **summarize(ds)}
        return ds, info
    if not args.data:
        raise UsageError("a dataset is required: --data PATH or --synth NEG,POS,DIM,SEP")
    try:
        if args.positive_if:
            column, op, value = _parse_predicate(args.positive_if)
            schema = CsvSchema(label_column=column, positive_predicate=(op, value),
                               has_header=not args.no_header, delimiter=args.delimiter)
        elif args.positive_label is not None:
            if args.label_column is None:
                raise UsageError("--positive-label requires --label-column")
            label_column = int(args.label_column) if args.no_header else args.label_column
            schema = CsvSchema(label_column=label_column, positive_label=args.positive_label,
                               has_header=not args.no_header, delimiter=args.delimiter)
        else:
            raise UsageError("give --positive-label or --positive-if to define the positive class")
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    ds = load_csv(args.data, schema)
    info = {"source": args.data, **summarize(ds)}
    return ds, info


def _build_config(args) -> AseConfig:
    c_min, c_max = _parse_contamination(args.contamination)
    return AseConfig(
        bins=args.bins, members=args.members, c_min=c_min, c_max=c_max,
        detector=args.detector, trees=args.trees, subsample=args.subsample,
        detector_k=args.detector_k, classifier=args.base_classifier,
        max_depth=args.max_depth, learning_rate=args.learning_rate,
        epochs=args.epochs, neighbors=args.neighbors, seed=args.seed,
    )


def _cmd_benchmark(args) -> int:
    ds, info = _load_dataset(args)
    config = _build_config(args)
    models = tuple(args.models.split(","))
    for name in models:
        if name not in BENCHMARK_MODELS:
            raise UsageError(f"unknown model {name!r}; choose from {BENCHMARK_MODELS}")
    out = run_benchmark(ds, config, repeats=args.repeats,
                        train_fraction=args.train_fraction,
                        models=models, dataset_info=info)
    write_text(dumps_report(out), args.output)
    return 0


def _cmd_ablate(args) -> int:
    ds, info = _load_dataset(args)
    config = _build_config(args)
    variants = ABLATION_VARIANTS if args.variant == "all" else (args.variant,)
    out = run_ablation(ds, config, repeats=args.repeats,
                       train_fraction=args.train_fraction,
                       variants=variants, dataset_info=info)
    write_text(dumps_report(out), args.output)
    return 0


def _cmd_curve(args) -> int:
    ds, info = _load_dataset(args)
    config = _build_config(args)
    out = run_curve(ds, config, max_members=args.max_members,
                    train_fraction=args.train_fraction, dataset_info=info)
    if args.format == "json":
        write_text(dumps_report(out), args.output)
    else:
        lines = ["members,auc,f1"]
        for point in out["series"]:
            auc = "" if point["auc"] is None else repr(point["auc"])
            lines.append(f"{point['members']},{auc},{point['f1']!r}")
        write_text("\n".join(lines) + "\n", args.output)
    return 0


def _cmd_gen_synth(args) -> int:
    spec = SynthSpec(negatives=args.negatives, positives=args.positives,
                     dim=args.dim, separation=args.separation, seed=args.seed)
    ds = generate_synth(spec)
    write_csv(ds, args.output)
    return 0


def _cmd_summarize(args) -> int:
    ds, info = _load_dataset(args)
    summary = summarize(ds)
    if args.format == "json":
        write_text(dumps_report({"dataset": info, **summary}), args.output)
    else:
        width = max(len(k) for k in summary)
        lines = []
        for key, value in summary.items():
            if value is None:
                shown = "undefined"
            elif isinstance(value, float):
                shown = f"{value:.2f}"
            else:
                shown = str(value)
            lines.append(f"{key:<{width}}  {shown}")
        write_text("\n".join(lines) + "\n", args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="asebag",
        description="Anomaly-score guided undersampling bagging for imbalanced binary data.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="-v for info logging, -vv for debug")
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("benchmark", help="train and evaluate models over repeated splits")
    _add_data_flags(bench)
    _add_model_flags(bench)
    bench.add_argument("--repeats", type=int, default=1)
    bench.add_argument("--models", default=",".join(BENCHMARK_MODELS),
                       help="comma list from: " + ",".join(BENCHMARK_MODELS))
    bench.add_argument("--output", default="-", help="report path, or - for stdout")
    bench.set_defaults(func=_cmd_benchmark)

    ablate = sub.add_parser("ablate", help="run the ablation variants")
    _add_data_flags(ablate)
    _add_model_flags(ablate, default_members=20)
    ablate.add_argument("--repeats", type=int, default=1)
    ablate.add_argument("--variant", choices=(*ABLATION_VARIANTS, "all"), default="all")
    ablate.add_argument("--output", default="-", help="report path, or - for stdout")
    ablate.set_defaults(func=_cmd_ablate)

    curve = sub.add_parser("curve", help="metrics versus member count for one trained model")
    _add_data_flags(curve)
    _add_model_flags(curve)
    curve.add_argument("--max-members", type=int, default=50)
    curve.add_argument("--format", choices=("csv", "json"), default="csv")
    curve.add_argument("--output", default="-", help="series path, or - for stdout")
    curve.set_defaults(func=_cmd_curve)

    gen = sub.add_parser("gen-synth", help="write a synthetic dataset as CSV")
    gen.add_argument("--negatives", type=int, required=True)
    gen.add_argument("--positives", type=int, required=True)
    gen.add_argument("--dim", type=int, required=True)
    gen.add_argument("--separation", type=float, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--output", required=True, help="CSV path to write")
    gen.set_defaults(func=_cmd_gen_synth)

    summ = sub.add_parser("summarize", help="dataset shape, class counts, imbalance ratio")
    _add_data_flags(summ)
    summ.add_argument("--seed", type=int, default=0, help="seed for --synth data")
    summ.add_argument("--format", choices=("text", "json"), default="text")
    summ.add_argument("--output", default="-")
    summ.set_defaults(func=_cmd_summarize)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.verbose:
        logging.basicConfig(level=logging.DEBUG if args.verbose > 1 else logging.INFO)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (DataError, AsebagError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
