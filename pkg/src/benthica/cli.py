"""Single entry point for the whole pipeline.

Subcommands: tree, data, synth, train, predict, eval, curve, cover.
Exit codes: 0 success, 1 domain error (printed as ``error[Code]: message``
on stderr), 2 usage error.  Every subcommand that involves randomness
takes ``--seed`` and is deterministic for a fixed seed.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import __version__
from .cover import AnnotationSet, cover_at_level, cover_error, load_annotations
from .curve import CurveConfig, default_train_sizes, emit_results, run_learning_curve, summary_path
from .data import load_dataset, read_label_column, save_dataset, stratified_split
from .errors import BenthicaError
from .metrics import evaluate
from .mlp import TrainConfig
from .models import FlatLeafClassifier, HierarchicalClassifier, load_model, save_model
from .synth import SynthSpec, gen_samples, gen_tree
from .tree import format_tree, load_tree


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v]


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v]


def _add_train_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--epochs", type=int, default=50)
    parser.add_argument("--lr", type=float, default=1e-3)
    parser.add_argument("--batch-size", type=int, default=64)
    parser.add_argument("--l2", type=float, default=1e-4)
    parser.add_argument("--optimizer", choices=["adam", "sgd"], default="adam")
    parser.add_argument(
        "--class-weight", choices=["balanced"], default=None,
        help="weight samples by inverse class frequency",
    )
    parser.add_argument(
        "--hidden", type=_int_list, default=[200, 100], metavar="H1,H2",
        help="hidden layer widths (default 200,100)",
    )
    parser.add_argument(
        "--no-standardize", action="store_true",
        help="skip per-dimension feature standardization",
    )


def _train_config(args) -> TrainConfig:
    return TrainConfig(
        learning_rate=args.lr,
        batch_size=args.batch_size,
        epochs=args.epochs,
        seed=args.seed,
        l2=args.l2,
        optimizer=args.optimizer,
        class_weight=args.class_weight,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="benthica",
        description="Hierarchical benthic point-annotation toolkit",
    )
    parser.add_argument("--version", action="version", version=f"benthica {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_tree = sub.add_parser("tree", help="label hierarchy utilities")
    tree_sub = p_tree.add_subparsers(dest="tree_command", required=True)
    p_validate = tree_sub.add_parser("validate", help="check a tree document")
    p_validate.add_argument("path")
    p_show = tree_sub.add_parser("show", help="print the normalized tree document")
    p_show.add_argument("path")

    p_data = sub.add_parser("data", help="dataset utilities")
    data_sub = p_data.add_subparsers(dest="data_command", required=True)
    p_stats = data_sub.add_parser("stats", help="print the class histogram, descending")
    p_stats.add_argument("path")
    p_split = data_sub.add_parser("split", help="stratified train/test split")
    p_split.add_argument("--data", required=True)
    p_split.add_argument("--tree", required=True)
    p_split.add_argument("--test-fraction", type=float, default=0.1)
    p_split.add_argument("--seed", type=int, default=0)
    p_split.add_argument("--out-train", required=True)
    p_split.add_argument("--out-test", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic hierarchical dataset")
    p_synth.add_argument("--branching", type=_int_list, required=True, metavar="B1,B2,...")
    p_synth.add_argument("--n", type=int, default=None, help="total samples (power-law mode)")
    p_synth.add_argument("--alpha", type=float, default=None, help="power-law exponent")
    p_synth.add_argument("--samples-per-leaf", type=int, default=None)
    p_synth.add_argument("--d", type=int, default=64, help="feature dimension")
    p_synth.add_argument("--noise-sigma", type=float, default=1.0)
    p_synth.add_argument(
        "--level-spread", type=_float_list, default=None, metavar="S1,S2,...",
        help="per-level mean displacement scales (default 3,2,1,... truncated)",
    )
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--out", required=True, help="output directory")

    p_train = sub.add_parser("train", help="fit a model and save a bundle")
    p_train.add_argument("--model", choices=["hier", "flat"], required=True)
    p_train.add_argument("--tree", required=True)
    p_train.add_argument("--data", required=True)
    p_train.add_argument("--out", required=True, help="bundle directory")
    _add_train_config_flags(p_train)

    p_predict = sub.add_parser("predict", help="predict leaves for a dataset")
    p_predict.add_argument("--model", required=True, help="bundle directory")
    p_predict.add_argument("--data", required=True)
    p_predict.add_argument("--out", required=True)
    p_predict.add_argument(
        "--emit-path", action="store_true",
        help="append the full top-down path (name:prob per step)",
    )

    p_eval = sub.add_parser("eval", help="score predictions against truth")
    p_eval.add_argument("--tree", required=True)
    p_eval.add_argument("--truth", required=True)
    p_eval.add_argument("--pred", required=True)
    p_eval.add_argument("--json", default=None, help="also write a JSON report here")

    p_curve = sub.add_parser("curve", help="flat-vs-hierarchical learning curve")
    p_curve.add_argument("--tree", required=True)
    p_curve.add_argument("--train", required=True)
    p_curve.add_argument("--test", required=True)
    p_curve.add_argument("--sizes", type=_int_list, default=None, metavar="N1,N2,...")
    p_curve.add_argument("--repeats", type=int, default=5)
    p_curve.add_argument(
        "--metrics", type=lambda s: tuple(s.split(",")), default=("macro_f1", "h_f1")
    )
    p_curve.add_argument("--jobs", type=int, default=1)
    p_curve.add_argument("--out", required=True)
    _add_train_config_flags(p_curve)

    p_cover = sub.add_parser("cover", help="cover proportions at a tree level")
    p_cover.add_argument("--tree", required=True)
    p_cover.add_argument("--truth", required=True)
    p_cover.add_argument("--pred", default=None)
    p_cover.add_argument(
        "--level", type=_int_list, required=True, metavar="K1,K2,...",
        help="tree depth(s) to aggregate at",
    )
    p_cover.add_argument("--out", default=None, help="directory for per-level tables")

    return parser


# ---------------------------------------------------------------------------
# subcommand bodies

def _cmd_tree(args) -> int:
    tree = load_tree(args.path)
    if args.tree_command == "validate":
        print("OK")
    else:
        sys.stdout.write(format_tree(tree))
    return 0


def _cmd_data(args) -> int:
    if args.data_command == "stats":
        labels = read_label_column(args.path)
        counts: dict[str, int] = {}
        for label in labels:
            counts[label] = counts.get(label, 0) + 1
        print("label,count")
        for label, count in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])):
            print(f"{label},{count}")
        return 0
    tree = load_tree(args.tree)
    data = load_dataset(args.data, tree)
    train, test = stratified_split(data, args.test_fraction, args.seed)
    save_dataset(train, args.out_train)
    save_dataset(test, args.out_test)
    print(f"train: {len(train)} samples -> {args.out_train}")
    print(f"test:  {len(test)} samples -> {args.out_test}")
    return 0


def _cmd_synth(args) -> int:
    tree = gen_tree(args.branching, args.seed)
    spread = args.level_spread
    if spread is None:
        spread = [float(max(1, len(args.branching) - k)) for k in range(len(args.branching))]
    spec = SynthSpec(
        tree=tree,
        feature_dim=args.d,
        level_spread=tuple(spread),
        noise_sigma=args.noise_sigma,
        samples_per_leaf=args.samples_per_leaf,
        total_samples=args.n,
        alpha=args.alpha,
        seed=args.seed,
    )
    data = gen_samples(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "tree.txt").write_text(format_tree(tree), encoding="utf-8")
    save_dataset(data, out / "dataset.csv")
    print(f"tree:    {out / 'tree.txt'} ({len(tree.leaf_ids())} leaves)")
    print(f"dataset: {out / 'dataset.csv'} ({len(data)} samples, d={data.feature_dim})")
    return 0


def _cmd_train(args) -> int:
    tree = load_tree(args.tree)
    data = load_dataset(args.data, tree)
    cls = HierarchicalClassifier if args.model == "hier" else FlatLeafClassifier
    model = cls(
        tree=tree,
        config=_train_config(args),
        hidden_sizes=tuple(args.hidden),
        standardize=not args.no_standardize,
    )
    model.fit(data.features, list(data.labels))
    save_model(model, args.out)
    kind = "hierarchical" if args.model == "hier" else "flat"
    print(f"saved {kind} model to {args.out}")
    if model.unreachable_leaves_:
        print(f"unreachable leaves: {len(model.unreachable_leaves_)}")
    return 0


def _cmd_predict(args) -> int:
    model = load_model(args.model)
    data = load_dataset(args.data, tree=None)
    pred = model.predict(data.features)
    with Path(args.out).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        header = ["image_id", "point_id", "predicted_label"]
        if args.emit_path:
            header.append("path")
        writer.writerow(header)
        for i in range(len(data)):
            row = [data.image_ids[i], data.point_ids[i], pred[i]]
            if args.emit_path:
                if isinstance(model, HierarchicalClassifier):
                    path = model.predict_path(data.features[i])
                    row.append("/".join(
                        f"{name}:{p:.6f}" for name, p in zip(path.node_names, path.probs)
                    ))
                else:
                    chain = model.tree.ancestors(model.tree.leaf_id(pred[i]))
                    row.append("/".join(model.tree.name(n) for n in chain))
            writer.writerow(row)
    print(f"wrote {len(data)} predictions to {args.out}")
    return 0


def _cmd_eval(args) -> int:
    tree = load_tree(args.tree)
    truth = load_annotations(args.truth, tree)
    pred = load_annotations(args.pred, tree)
    true_by_key = {(i, p): label for i, p, label in truth.records}
    pred_by_key = {(i, p): label for i, p, label in pred.records}
    if set(true_by_key) != set(pred_by_key):
        raise BenthicaError(
            "truth and prediction files cover different (image_id, point_id) keys"
        )
    keys = sorted(true_by_key)
    report = evaluate(
        tree, [true_by_key[k] for k in keys], [pred_by_key[k] for k in keys]
    )
    print(report.format_table())
    if args.json:
        Path(args.json).write_text(report.to_json() + "\n", encoding="utf-8")
    return 0


def _cmd_curve(args) -> int:
    tree = load_tree(args.tree)
    train = load_dataset(args.train, tree)
    test = load_dataset(args.test, tree)
    sizes = tuple(args.sizes) if args.sizes else default_train_sizes(len(train))
    config = CurveConfig(
        train_sizes=sizes,
        repeats=args.repeats,
        base_seed=args.seed,
        train_config=_train_config(args),
        metrics=args.metrics,
        hidden_sizes=tuple(args.hidden),
        standardize=not args.no_standardize,
    )
    points = run_learning_curve(tree, train, test, config, n_jobs=args.jobs)
    emit_results(points, args.out)
    print(f"wrote {len(points)} curve points to {args.out}")
    print(f"summary: {summary_path(args.out)}")
    return 0


def _cmd_cover(args) -> int:
    tree = load_tree(args.tree)
    truth = load_annotations(args.truth, tree)
    pred = load_annotations(args.pred, tree) if args.pred else None
    out_dir = Path(args.out) if args.out else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    for level in args.level:
        report = cover_at_level(tree, truth, level)
        err = cover_error(tree, truth, pred, level) if pred else None
        lines = ["category,cover" + (",abs_error" if err else "")]
        for category, proportion in report.per_category.items():
            row = f"{category},{proportion!r}"
            if err:
                row += f",{err.per_category.get(category, 0.0)!r}"
            lines.append(row)
        if err:
            lines.append(f"# mean_abs_error,{err.mean_abs_error!r}")
            lines.append(f"# total_abs_error,{err.total_abs_error!r}")
        text = "\n".join(lines) + "\n"
        if out_dir:
            target = out_dir / f"cover_level{level}.csv"
            target.write_text(text, encoding="utf-8")
            print(f"level {level}: {target}")
        else:
            print(f"# level {level} ({report.n_points} points)")
            sys.stdout.write(text)
    return 0


_COMMANDS = {
    "tree": _cmd_tree,
    "data": _cmd_data,
    "synth": _cmd_synth,
    "train": _cmd_train,
    "predict": _cmd_predict,
    "eval": _cmd_eval,
    "curve": _cmd_curve,
    "cover": _cmd_cover,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except BenthicaError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error[IoFailure]: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error[InvalidArgument]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
