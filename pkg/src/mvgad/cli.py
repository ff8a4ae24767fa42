"""Command-line entry points: generate, train, score, eval.

Every subcommand exits 0 on success and nonzero with a message on stderr
otherwise.  Only ``eval`` writes to stdout (its result as JSON); everything
else reports what it wrote.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import __version__
from .config import load_config
from .datasets import load_dataset, save_dataset
from .decoders import AnomalyReport
from .evaluation import evaluate
from .synthetic import generate
from .training import load_checkpoint, save_checkpoint, score, train

log = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mvgad",
        description="Multi-task anomaly detection for multi-view attributed networks",
    )
    parser.add_argument("--version", action="version", version=f"mvgad {__version__}")
    parser.add_argument(
        "-v", "--verbose", action="store_true", help="log progress to stderr"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic labeled dataset")
    p.add_argument("--config", help="TOML config file (defaults used if omitted)")
    p.add_argument("--out", required=True, help="output dataset directory")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="train a model on a dataset")
    p.add_argument("--data", required=True, help="dataset directory")
    p.add_argument("--config", help="TOML config file")
    p.add_argument("--out", required=True, help="output checkpoint file")
    p.add_argument(
        "--lambda",
        dest="lam",
        type=float,
        help="structure/attribute balance in [0, 1]",
    )
    p.add_argument("--gamma", type=float, help="autoencoder loss weight (>= 0)")
    p.add_argument("--fusion", choices=["concat", "weighted"], help="aggregation mode")
    p.add_argument("--seed", type=int, help="training seed")
    p.add_argument("--epochs", type=int, help="number of epochs")
    p.add_argument("--history", help="optional CSV file for the per-epoch losses")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("score", help="score a dataset with a trained checkpoint")
    p.add_argument("--data", required=True, help="dataset directory")
    p.add_argument("--ckpt", required=True, help="checkpoint file")
    p.add_argument("--out", required=True, help="output scores.csv")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("eval", help="evaluate a scores file against dataset labels")
    p.add_argument("--scores", required=True, help="scores.csv from `score`")
    p.add_argument("--data", required=True, help="labeled dataset directory")
    p.add_argument(
        "--k",
        type=int,
        nargs="+",
        help="cutoffs for precision@k (default: the number of labeled anomalies)",
    )
    p.set_defaults(func=cmd_eval)
    return parser


def cmd_generate(args) -> int:
    cfg = load_config(args.config)
    graph = generate(cfg.gen)
    save_dataset(graph, args.out)
    print(f"wrote dataset ({graph.n} nodes, {graph.edge_count} edges) to {args.out}")
    return 0


def cmd_train(args) -> int:
    cfg = load_config(args.config).train
    if args.lam is not None:
        cfg.lam = args.lam
    if args.gamma is not None:
        cfg.gamma = args.gamma
    if args.fusion is not None:
        cfg.fusion_mode = args.fusion
    if args.seed is not None:
        cfg.seed = args.seed
    if args.epochs is not None:
        cfg.epochs = args.epochs
    graph = load_dataset(args.data)
    params, history = train(graph, cfg)
    save_checkpoint(params, cfg, args.out)
    if args.history:
        history.write_csv(args.history)
    print(
        f"trained {cfg.epochs} epochs "
        f"(loss {history.total[0]:.4g} -> {history.total[-1]:.4g}); "
        f"wrote checkpoint to {args.out}"
    )
    return 0


def cmd_score(args) -> int:
    graph = load_dataset(args.data)
    params, cfg = load_checkpoint(args.ckpt)
    report = score(graph, params, cfg)
    report.write_csv(args.out)
    print(f"wrote scores for {graph.n} nodes to {args.out}")
    return 0


def cmd_eval(args) -> int:
    report = AnomalyReport.read_csv(args.scores)
    graph = load_dataset(args.data)
    if graph.labels is None:
        raise ValueError(f"dataset at {args.data} has no labels; cannot evaluate")
    if report.scores.size != graph.n:
        raise ValueError(
            f"scores file has {report.scores.size} nodes but dataset has {graph.n}"
        )
    ks = args.k
    if ks is None:
        ks = [max(1, int(graph.anomaly_flags.sum()))]
    result = evaluate(report.scores, graph.labels, ks)
    print(json.dumps(result.to_dict(), indent=2))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already wrote its message
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except Exception as exc:
        if args.verbose:
            log.exception("command failed")
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
