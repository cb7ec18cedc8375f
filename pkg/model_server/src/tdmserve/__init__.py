"""Transformer-based entailment scorer: training and serving for the
(premise, hypothesis) /score wire protocol."""

__version__ = "0.1.0"
