"""Batch entry points over the library: ingest, split, featurize, train,
score, eval, serve.

Exit codes: 0 success, 1 domain error, 2 usage error. Diagnostics go to
stderr; machine output goes to files or stdout only.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .corpus import (
    dedupe,
    parse_mohler,
    parse_seb,
    read_pairs_csv,
    write_pairs_csv,
    write_scored_csv,
)
from .embed import provider_from_spec
from .errors import AsagError
from .evalmetrics import evaluate
from .features import FEATURE_SETS, feature_matrix, scaled_targets, write_feature_csv
from .forest import ForestConfig, forest_fit, forest_predict, load_forest, save_forest
from .model import (
    HeadConfig,
    checkpoint_timestamp,
    load_checkpoint,
    predict_score,
    save_checkpoint,
)
from .splitter import SplitSpec, stratified_split
from .trainer import TrainConfig, fit_with_controller

__all__ = ["main", "build_parser"]


def _fractions(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad fractions {text!r}, expected e.g. 0.8,0.1,0.1")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="asag", description="Automatic short-answer grading tools")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="parse a dataset tree into a pairs CSV")
    p_ingest.add_argument("layout", choices=("mohler", "seb"))
    p_ingest.add_argument("root", type=Path, help="dataset root directory")
    p_ingest.add_argument("--split", choices=("train", "ua", "uq", "ud"), default="train",
                          help="SciEntsBank split (seb only)")
    p_ingest.add_argument("--dedupe", action="store_true", help="drop duplicate answer pairs")
    p_ingest.add_argument("--expect-pairs", type=int, default=None,
                          help="fail unless the parsed pair count matches")
    p_ingest.add_argument("-o", "--out", type=Path, required=True)

    p_split = sub.add_parser("split", help="stratified split of a pairs CSV")
    p_split.add_argument("input", type=Path)
    p_split.add_argument("--fractions", type=_fractions, default=(0.8, 0.1, 0.1))
    p_split.add_argument("--seed", type=int, default=40)
    p_split.add_argument("--no-stratify", action="store_true")
    p_split.add_argument("--score-max", type=float, default=5.0)
    p_split.add_argument("-o", "--out", required=True,
                         help="comma-separated output CSVs, one per fraction")

    p_feat = sub.add_parser("featurize", help="emit a named feature matrix as CSV")
    p_feat.add_argument("input", type=Path)
    p_feat.add_argument("--set", dest="feature_set", choices=FEATURE_SETS, default="all")
    p_feat.add_argument("--provider", default="hash:256",
                        help="hash:<dim> | file:<path> | http:<url>")
    p_feat.add_argument("--score-max", type=float, default=5.0)
    p_feat.add_argument("-o", "--out", type=Path, required=True)

    p_train = sub.add_parser("train", help="fit a model on a training CSV")
    p_train.add_argument("input", type=Path)
    p_train.add_argument("--pipeline", choices=("head", "forest"), default="head")
    p_train.add_argument("--provider", default="hash:256")
    p_train.add_argument("--score-max", type=float, default=5.0)
    p_train.add_argument("--seed", type=int, default=40, help="controller base seed")
    p_train.add_argument("--lr", type=float, default=None)
    p_train.add_argument("--weight-decay", type=float, default=None)
    p_train.add_argument("--warmup", type=float, default=None)
    p_train.add_argument("--epochs", type=int, default=None)
    p_train.add_argument("--max-restarts", type=int, default=None)
    p_train.add_argument("--hidden-dims", default=None, help="comma-separated widths, e.g. 256")
    p_train.add_argument("--dropout", type=float, default=None)
    p_train.add_argument("--fractions", type=_fractions, default=(0.9, 0.1))
    p_train.add_argument("--feature-set", choices=FEATURE_SETS, default="vecsim",
                         help="feature set for the forest pipeline")
    p_train.add_argument("--trees", type=int, default=100)
    p_train.add_argument("--curve-log", type=Path, default=None,
                         help="append per-epoch records to this ndjson file")
    p_train.add_argument("-o", "--out", type=Path, required=True, help="checkpoint path")

    p_score = sub.add_parser("score", help="score a test CSV with a trained checkpoint")
    p_score.add_argument("input", type=Path)
    p_score.add_argument("--model", type=Path, required=True)
    p_score.add_argument("--provider", default="hash:256")
    p_score.add_argument("--score-max", type=float, default=None,
                         help="defaults to the score_max stored in the checkpoint")
    p_score.add_argument("-o", "--out", type=Path, required=True)

    p_eval = sub.add_parser("eval", help="compare predictions against gold scores")
    p_eval.add_argument("--pred", type=Path, required=True)
    p_eval.add_argument("--gold", type=Path, required=True)
    p_eval.add_argument("--score-max", type=float, default=5.0)

    p_serve = sub.add_parser("serve", help="run the grading service")
    p_serve.add_argument("--config", type=Path, default=None)
    p_serve.add_argument("--data-dir", default=None)
    p_serve.add_argument("--bind", default=None)
    p_serve.add_argument("--provider", default=None)

    return parser


def _cmd_ingest(args) -> int:
    corpus = parse_mohler(args.root) if args.layout == "mohler" else parse_seb(args.root, args.split)
    if args.dedupe:
        corpus = dedupe(corpus)
    if args.expect_pairs is not None and len(corpus) != args.expect_pairs:
        raise AsagError(f"parsed {len(corpus)} pairs, expected {args.expect_pairs}")
    write_pairs_csv(corpus, args.out, include_scores=True)
    print(f"{len(corpus)} pairs -> {args.out}", file=sys.stderr)
    return 0


def _cmd_split(args) -> int:
    outputs = [Path(p) for p in args.out.split(",")]
    if len(outputs) != len(args.fractions):
        raise AsagError(f"{len(args.fractions)} fractions but {len(outputs)} output paths")
    corpus = read_pairs_csv(args.input, expect_scores=True, score_max=args.score_max)
    spec = SplitSpec(fractions=args.fractions, seed=args.seed,
                     stratify_by_question=not args.no_stratify)
    for part, path in zip(stratified_split(corpus, spec), outputs):
        write_pairs_csv(part, path, include_scores=True)
        print(f"{len(part)} pairs -> {path}", file=sys.stderr)
    return 0


def _cmd_featurize(args) -> int:
    corpus = read_pairs_csv(args.input, expect_scores=False, score_max=args.score_max)
    provider = provider_from_spec(args.provider) if args.feature_set in ("vecsim", "all") else None
    X = feature_matrix(corpus, args.feature_set, provider)
    write_feature_csv(args.out, corpus, args.feature_set, X)
    print(f"{X.shape[0]}x{X.shape[1]} features -> {args.out}", file=sys.stderr)
    return 0


def _train_config_from_args(args) -> TrainConfig:
    config = TrainConfig(base_seed=args.seed)
    overrides = {
        "lr_peak": args.lr,
        "weight_decay": args.weight_decay,
        "warmup_proportion": args.warmup,
        "max_epochs": args.epochs,
        "max_restarts": args.max_restarts,
    }
    return replace(config, **{k: v for k, v in overrides.items() if v is not None})


def _cmd_train(args) -> int:
    corpus = read_pairs_csv(args.input, expect_scores=True, score_max=args.score_max)
    provider = provider_from_spec(args.provider)
    train_config = _train_config_from_args(args)
    spec = SplitSpec(fractions=args.fractions, seed=train_config.base_seed)

    if args.pipeline == "forest":
        train_part, _val_part = stratified_split(corpus, spec)[:2]
        X = feature_matrix(train_part, args.feature_set, provider)
        y = scaled_targets(train_part)
        forest = forest_fit(X, y, ForestConfig(n_trees=args.trees, seed=train_config.base_seed))
        metadata = {
            "score_max": args.score_max,
            "created_at": checkpoint_timestamp(),
            "seed": train_config.base_seed,
            "pipeline": "features-forest",
            "feature_set": args.feature_set,
        }
        save_forest(forest, args.out, metadata)
        print(f"forest ({args.trees} trees) -> {args.out}", file=sys.stderr)
        return 0

    head_overrides = {}
    if args.hidden_dims is not None:
        head_overrides["hidden_dims"] = tuple(int(d) for d in args.hidden_dims.split(","))
    if args.dropout is not None:
        head_overrides["dropout_p"] = args.dropout
    head_config = HeadConfig(input_dim=provider.dim, **head_overrides)

    sink = None
    curve_file = None
    if args.curve_log is not None:
        curve_file = args.curve_log.open("a", encoding="utf-8")

        def sink(record):
            curve_file.write(json.dumps({
                "attempt": record.attempt,
                "epoch": record.epoch,
                "train_loss": record.train_loss,
                "val_loss": record.val_loss,
                "val_rmse_scaled": record.val_rmse_scaled,
                "val_pearson": record.val_pearson,
            }) + "\n")

    try:
        report, model = fit_with_controller(
            corpus, provider, head_config, train_config, spec, curve_sink=sink
        )
    finally:
        if curve_file is not None:
            curve_file.close()

    metadata = {
        "score_max": args.score_max,
        "created_at": checkpoint_timestamp(),
        "seed": train_config.base_seed,
        "chosen_epoch": report.chosen_epoch,
        "chosen_attempt": report.chosen_attempt,
        "accepted": report.accepted,
        "pipeline": "head",
        "provider_dim": provider.dim,
    }
    save_checkpoint(model, args.out, metadata)
    status = "accepted" if report.accepted else "not-accepted"
    print(
        f"{status}: attempt {report.chosen_attempt}, epoch {report.chosen_epoch}, "
        f"val pearson {report.final_val_pearson:.4f}, val rmse (scaled) "
        f"{report.final_val_rmse_scaled:.4f} -> {args.out}",
        file=sys.stderr,
    )
    return 0


def _cmd_score(args) -> int:
    raw = json.loads(args.model.read_text("utf-8")) if args.model.is_file() else {}
    fmt = raw.get("format", "")
    provider = provider_from_spec(args.provider)
    if fmt.startswith("asag-forest-ckpt"):
        forest, metadata = load_forest(args.model)
        score_max = args.score_max or float(metadata.get("score_max", 5.0))
        corpus = read_pairs_csv(args.input, expect_scores=False, score_max=score_max)
        X = feature_matrix(corpus, metadata.get("feature_set", "vecsim"), provider)
        scores = [min(1.0, max(0.0, forest_predict(forest, row))) * score_max for row in X]
    else:
        model, metadata = load_checkpoint(args.model)
        score_max = args.score_max or float(metadata.get("score_max", 5.0))
        corpus = read_pairs_csv(args.input, expect_scores=False, score_max=score_max)
        scores = [
            predict_score(model, provider.embed_pair(p.reference_answer, p.student_answer), score_max)
            for p in corpus
        ]
    write_scored_csv(corpus, scores, args.out)
    print(f"{len(scores)} scores -> {args.out}", file=sys.stderr)
    return 0


def _cmd_eval(args) -> int:
    gold = read_pairs_csv(args.gold, expect_scores=True, score_max=args.score_max)
    pred = read_pairs_csv(args.pred, expect_scores=True, score_max=args.score_max)
    predictions = {pair.id: pair.gold_score for pair in pred}
    result = evaluate(gold.pairs, predictions, args.score_max)
    print(json.dumps({
        "pearson": result.pearson,
        "rmse": result.rmse,
        "mae": result.mae,
        "r_squared": result.r_squared,
        "n": result.n,
    }))
    print()
    print(f"{'Metric':<28}Result")
    print(f"{'Mean Absolute Error':<28}{result.mae:.2f}")
    print(f"{'Root Mean Squared Error:':<28}{result.rmse:.2f}")
    print(f"{'R-Squared:':<28}{result.r_squared:.2f}")
    print(f"{'Correlation:':<28}{result.pearson:.2f}")
    return 0


def _cmd_serve(args) -> int:
    from .service import load_service_config, run_server

    config = load_service_config(
        config_path=args.config,
        data_dir=args.data_dir,
        bind=args.bind,
        provider=args.provider,
    )
    run_server(config)
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "split": _cmd_split,
    "featurize": _cmd_featurize,
    "train": _cmd_train,
    "score": _cmd_score,
    "eval": _cmd_eval,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except AsagError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
