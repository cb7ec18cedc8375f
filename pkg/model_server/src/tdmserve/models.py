"""Model family registry and construction.

Three sequence-pair classifier families are supported, each mapping to a
published pretrained checkpoint: a bidirectional autoencoder, its
science-pretrained variant (both uncased), and a permutation-based
autoregressive model (cased only). When the checkpoint cannot be fetched
(offline hosts), ``init="scratch"`` builds the same architecture with
fresh weights and a word-level tokenizer derived from the training text;
this keeps the pipeline runnable but removes the benefit of pretraining.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

from tokenizers import Tokenizer, models as token_models, normalizers, pre_tokenizers, processors
from transformers import (
    AutoModelForSequenceClassification,
    AutoTokenizer,
    BertConfig,
    BertForSequenceClassification,
    PreTrainedTokenizerFast,
    XLNetConfig,
    XLNetForSequenceClassification,
)

from tdmserve.data import TrainingPair

SPECIAL_TOKENS = ("[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]")

# mirrors the Whitespace pre-tokenizer: words or punctuation runs
_WORD_RE = re.compile(r"\w+|[^\w\s]+")


class ModelLoadError(RuntimeError):
    """Could not construct the requested model (e.g. checkpoint fetch failed)."""


@dataclass(frozen=True)
class ModelFamily:
    name: str
    checkpoint: str
    uncased: bool
    config_cls: type
    model_cls: type


FAMILIES = {
    family.name: family
    for family in (
        ModelFamily(
            name="bidirectional-autoencoder",
            checkpoint="bert-base-uncased",
            uncased=True,
            config_cls=BertConfig,
            model_cls=BertForSequenceClassification,
        ),
        ModelFamily(
            name="science-pretrained-autoencoder",
            checkpoint="allenai/scibert_scivocab_uncased",
            uncased=True,
            config_cls=BertConfig,
            model_cls=BertForSequenceClassification,
        ),
        ModelFamily(
            name="permutation-autoregressive",
            checkpoint="xlnet-base-cased",
            uncased=False,
            config_cls=XLNetConfig,
            model_cls=XLNetForSequenceClassification,
        ),
    )
}


def family_for(name: str) -> ModelFamily:
    if name not in FAMILIES:
        raise ValueError(f"unknown model family {name!r}; choose from {sorted(FAMILIES)}")
    return FAMILIES[name]


def _scratch_tokenizer(
    pairs: Sequence[TrainingPair], uncased: bool, max_vocab: int = 30000
) -> PreTrainedTokenizerFast:
    """Word-level tokenizer over the training text; whole words only."""
    seen: dict[str, None] = {}
    for pair in pairs:
        for text in (pair.premise, pair.hypothesis):
            if uncased:
                text = text.lower()
            for token in _WORD_RE.findall(text):
                seen.setdefault(token, None)
    words = list(SPECIAL_TOKENS) + sorted(seen)[: max_vocab - len(SPECIAL_TOKENS)]
    vocab = {word: index for index, word in enumerate(words)}

    tokenizer = Tokenizer(token_models.WordPiece(vocab=vocab, unk_token="[UNK]"))
    if uncased:
        tokenizer.normalizer = normalizers.Lowercase()
    tokenizer.pre_tokenizer = pre_tokenizers.Whitespace()
    tokenizer.post_processor = processors.TemplateProcessing(
        single="[CLS] $A [SEP]",
        pair="[CLS] $A [SEP] $B:1 [SEP]:1",
        special_tokens=[("[CLS]", vocab["[CLS]"]), ("[SEP]", vocab["[SEP]"])],
    )
    return PreTrainedTokenizerFast(
        tokenizer_object=tokenizer,
        unk_token="[UNK]",
        pad_token="[PAD]",
        cls_token="[CLS]",
        sep_token="[SEP]",
        mask_token="[MASK]",
        model_max_length=512,
        model_input_names=["input_ids", "token_type_ids", "attention_mask"],
    )


def load_pretrained(family: ModelFamily):
    """Tokenizer and classifier initialized from the published checkpoint."""
    try:
        tokenizer = AutoTokenizer.from_pretrained(family.checkpoint)
        model = AutoModelForSequenceClassification.from_pretrained(
            family.checkpoint, num_labels=2
        )
    except Exception as exc:  # transformers raises many flavors offline
        raise ModelLoadError(
            f"could not fetch checkpoint {family.checkpoint!r}: {exc}"
        ) from exc
    return tokenizer, model


def build_scratch(
    family: ModelFamily,
    pairs: Sequence[TrainingPair],
    hidden_size: int | None = None,
    num_layers: int | None = None,
    num_heads: int | None = None,
):
    """Same architecture as the family's checkpoint, fresh weights.

    Size overrides exist so tests can run tiny models; by default the
    full published architecture dimensions apply.
    """
    tokenizer = _scratch_tokenizer(pairs, family.uncased)
    if family.config_cls is XLNetConfig:
        # the permutation model summarizes at the sequence end, so pad left
        tokenizer.padding_side = "left"
        config = XLNetConfig(
            vocab_size=tokenizer.vocab_size,
            num_labels=2,
            pad_token_id=tokenizer.pad_token_id,
            bos_token_id=tokenizer.cls_token_id,
            eos_token_id=tokenizer.sep_token_id,
        )
        if hidden_size:
            config.d_model = hidden_size
            config.d_inner = hidden_size * 4
        if num_layers:
            config.n_layer = num_layers
        if num_heads:
            config.n_head = num_heads
    else:
        config = BertConfig(vocab_size=tokenizer.vocab_size, num_labels=2)
        if hidden_size:
            config.hidden_size = hidden_size
            config.intermediate_size = hidden_size * 4
        if num_layers:
            config.num_hidden_layers = num_layers
        if num_heads:
            config.num_attention_heads = num_heads
    model = family.model_cls(config)
    return tokenizer, model
