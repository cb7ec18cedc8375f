"""Fine-tuning of sequence-pair entailment classifiers.

Defaults pin the working recipe: learning rate 1e-5 for 14 epochs with
AdamW, weight decay 0.01 except 0 for bias and normalization parameters,
sequences truncated to 512. All values are overridable. The artifact
directory holds the last-epoch checkpoint, the tokenizer, a per-epoch
loss/accuracy log, and the training-time predictions for later
agreement checks against the serving path.
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import torch

from tdmserve import __version__
from tdmserve.data import TrainingPair, read_instances
from tdmserve.models import ModelLoadError, build_scratch, family_for, load_pretrained

NO_DECAY_MARKERS = ("bias", "LayerNorm", "layer_norm")


@dataclass
class TrainConfig:
    family: str = "bidirectional-autoencoder"
    learning_rate: float = 1e-5
    epochs: int = 14
    weight_decay: float = 0.01
    max_seq_len: int = 512
    batch_size: int = 8
    seed: int = 0
    init: str = "pretrained"  # or "scratch", or "auto" (fall back offline)
    scratch_hidden: int | None = None
    scratch_layers: int | None = None
    scratch_heads: int | None = None

    def __post_init__(self):
        if self.init not in ("pretrained", "scratch", "auto"):
            raise ValueError("init must be pretrained, scratch, or auto")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")


@dataclass
class TrainResult:
    artifact_dir: Path
    init_used: str
    epoch_log: list[dict]
    final_train_accuracy: float
    train_scores: list[float] = field(repr=False, default_factory=list)


def _param_groups(model, weight_decay: float):
    decay, no_decay = [], []
    for name, param in model.named_parameters():
        if not param.requires_grad:
            continue
        if any(marker in name for marker in NO_DECAY_MARKERS):
            no_decay.append(param)
        else:
            decay.append(param)
    return [
        {"params": decay, "weight_decay": weight_decay},
        {"params": no_decay, "weight_decay": 0.0},
    ]


def _encode(tokenizer, pairs: Sequence[TrainingPair], max_seq_len: int):
    return tokenizer(
        [p.premise for p in pairs],
        [p.hypothesis for p in pairs],
        truncation=True,
        max_length=max_seq_len,
        padding=True,
        return_tensors="pt",
    )


def _build_model(config: TrainConfig, pairs: Sequence[TrainingPair]):
    family = family_for(config.family)
    if config.init == "pretrained":
        return "pretrained", *load_pretrained(family)
    if config.init == "scratch":
        tokenizer, model = build_scratch(
            family,
            pairs,
            hidden_size=config.scratch_hidden,
            num_layers=config.scratch_layers,
            num_heads=config.scratch_heads,
        )
        return "scratch", tokenizer, model
    try:
        return "pretrained", *load_pretrained(family)
    except ModelLoadError:
        tokenizer, model = build_scratch(
            family,
            pairs,
            hidden_size=config.scratch_hidden,
            num_layers=config.scratch_layers,
            num_heads=config.scratch_heads,
        )
        return "scratch", tokenizer, model


@torch.no_grad()
def _predict_scores(model, tokenizer, pairs, max_seq_len: int, batch_size: int = 32):
    model.eval()
    scores: list[float] = []
    for start in range(0, len(pairs), batch_size):
        batch = pairs[start : start + batch_size]
        encoded = _encode(tokenizer, batch, max_seq_len)
        logits = model(**encoded).logits
        scores.extend(torch.softmax(logits, dim=-1)[:, 1].tolist())
    return scores


def train(instances_path: str | Path, out_dir: str | Path, config: TrainConfig) -> TrainResult:
    """Fine-tune one classifier on an instances file and save the artifact."""
    pairs = read_instances(instances_path)
    torch.manual_seed(config.seed)
    init_used, tokenizer, model = _build_model(config, pairs)

    optimizer = torch.optim.AdamW(
        _param_groups(model, config.weight_decay), lr=config.learning_rate
    )
    rng = random.Random(config.seed)
    order = list(range(len(pairs)))
    epoch_log: list[dict] = []

    model.train()
    for epoch in range(config.epochs):
        rng.shuffle(order)
        total_loss = 0.0
        correct = 0
        for start in range(0, len(order), config.batch_size):
            batch = [pairs[i] for i in order[start : start + config.batch_size]]
            encoded = _encode(tokenizer, batch, config.max_seq_len)
            labels = torch.tensor([p.label for p in batch])
            output = model(**encoded, labels=labels)
            output.loss.backward()
            optimizer.step()
            optimizer.zero_grad()
            total_loss += output.loss.item() * len(batch)
            correct += int((output.logits.argmax(dim=-1) == labels).sum())
        epoch_log.append(
            {
                "epoch": epoch,
                "loss": total_loss / len(pairs),
                "accuracy": correct / len(pairs),
            }
        )

    train_scores = _predict_scores(model, tokenizer, pairs, config.max_seq_len)
    predictions = [int(s > 0.5) for s in train_scores]
    final_accuracy = sum(
        int(pred == pair.label) for pred, pair in zip(predictions, pairs)
    ) / len(pairs)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model.save_pretrained(out)
    tokenizer.save_pretrained(out)
    (out / "training_log.json").write_text(
        json.dumps(epoch_log, indent=2) + "\n", encoding="utf-8"
    )
    (out / "train_predictions.json").write_text(
        json.dumps({"scores": train_scores}, indent=2) + "\n", encoding="utf-8"
    )
    (out / "artifact.json").write_text(
        json.dumps(
            {
                "version": __version__,
                "family": config.family,
                "init": init_used,
                "hyperparameters": asdict(config),
                "instances": str(instances_path),
                "n_instances": len(pairs),
                "final_train_accuracy": final_accuracy,
                # no per-epoch selection: the served weights are the
                # last-epoch checkpoint
                "checkpoint_policy": "last-epoch",
            },
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    return TrainResult(
        artifact_dir=out,
        init_used=init_used,
        epoch_log=epoch_log,
        final_train_accuracy=final_accuracy,
        train_scores=train_scores,
    )
