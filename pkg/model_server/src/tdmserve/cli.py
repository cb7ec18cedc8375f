"""Command line: train a classifier artifact, or serve one over HTTP."""

from __future__ import annotations

import argparse
import sys

from tdmserve.data import SchemaError
from tdmserve.models import FAMILIES, ModelLoadError
from tdmserve.train import TrainConfig, train


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tdmserve")
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="fine-tune a sequence-pair classifier")
    t.add_argument("--instances", required=True, help="training instances JSONL")
    t.add_argument("--model", required=True, choices=sorted(FAMILIES), dest="family")
    t.add_argument("--out", required=True, help="artifact output directory")
    t.add_argument("--lr", type=float, default=1e-5)
    t.add_argument("--epochs", type=int, default=14)
    t.add_argument("--weight-decay", type=float, default=0.01)
    t.add_argument("--max-seq-len", type=int, default=512)
    t.add_argument("--batch-size", type=int, default=8)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument(
        "--init",
        choices=("pretrained", "scratch", "auto"),
        default="pretrained",
        help="scratch builds the architecture with fresh weights (offline hosts)",
    )
    t.add_argument("--scratch-hidden", type=int)
    t.add_argument("--scratch-layers", type=int)
    t.add_argument("--scratch-heads", type=int)

    s = sub.add_parser("serve", help="serve a trained artifact on /score")
    s.add_argument("--model-dir", required=True)
    s.add_argument("--port", type=int, required=True)
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--max-batch", type=int, default=1024)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "train":
        config = TrainConfig(
            family=args.family,
            learning_rate=args.lr,
            epochs=args.epochs,
            weight_decay=args.weight_decay,
            max_seq_len=args.max_seq_len,
            batch_size=args.batch_size,
            seed=args.seed,
            init=args.init,
            scratch_hidden=args.scratch_hidden,
            scratch_layers=args.scratch_layers,
            scratch_heads=args.scratch_heads,
        )
        try:
            result = train(args.instances, args.out, config)
        except (SchemaError, ModelLoadError, OSError, ValueError) as exc:
            print(f"train: error: {exc}", file=sys.stderr)
            return 1
        print(
            f"trained {config.family} ({result.init_used}) "
            f"train_accuracy={result.final_train_accuracy:.3f} -> {result.artifact_dir}"
        )
        return 0

    from tdmserve.server import serve

    try:
        serve(args.model_dir, port=args.port, host=args.host, max_batch=args.max_batch)
    except (OSError, ValueError) as exc:
        print(f"serve: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
