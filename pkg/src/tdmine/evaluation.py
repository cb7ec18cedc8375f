"""Multi-label evaluation protocol.

Micro scores are computed from TP/FP/FN summed over all (paper, label)
decisions; macro scores average per-label P/R/F1 over the labels that
occur in the gold test data, unweighted. Two settings (papers with the
Unknown label included or excluded) cross four granularities (full
triples, or projection onto task / dataset / metric).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

from tdmine.corpus import UNKNOWN, LabeledPaper, TdmTriple, UnknownLabel, label_sort_key
from tdmine.doctaet import FeatureConfig, build_feature
from tdmine.instances import candidate_label_set
from tdmine.scoring import PaperPrediction, Scorer, predict_paper


class EvaluationError(ValueError):
    """Inconsistent evaluation inputs."""


class Setting(str, Enum):
    WITH_UNKNOWN = "with_unknown"
    WITHOUT_UNKNOWN = "without_unknown"


class Granularity(str, Enum):
    TRIPLE = "triple"
    TASK = "task"
    DATASET = "dataset"
    METRIC = "metric"


@dataclass
class EvalReport:
    """Six-figure report for one (setting, granularity) cell."""

    setting: Setting
    granularity: Granularity
    macro_p: float
    macro_r: float
    macro_f1: float
    micro_p: float
    micro_r: float
    micro_f1: float
    support: dict

    def metrics(self) -> dict[str, float]:
        return {
            "macro_p": self.macro_p,
            "macro_r": self.macro_r,
            "macro_f1": self.macro_f1,
            "micro_p": self.micro_p,
            "micro_r": self.micro_r,
            "micro_f1": self.micro_f1,
        }

    def to_dict(self, places: int = 4) -> dict:
        # Serialized figures are rounded; internal math stays full precision.
        d: dict = {"setting": self.setting.value, "granularity": self.granularity.value}
        d.update({k: round(v, places) for k, v in self.metrics().items()})
        d["support"] = self.support
        return d


def _safe_div(num: float, den: float) -> float:
    return num / den if den else 0.0


def _f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if (p + r) > 0 else 0.0


def _project(label, granularity: Granularity):
    """Map a label to the evaluated granularity. Unknown projects to
    itself; triples project to the named component string."""
    if isinstance(label, UnknownLabel) or granularity is Granularity.TRIPLE:
        return label
    return getattr(label, granularity.value)


def evaluate(
    predictions: Sequence[PaperPrediction],
    gold: Sequence[LabeledPaper],
    setting: Setting = Setting.WITH_UNKNOWN,
    granularity: Granularity = Granularity.TRIPLE,
) -> EvalReport:
    """Score predictions against gold under one setting/granularity.

    Predictions and gold must cover the same paper ids. In the
    without-unknown setting, papers whose gold is exactly ``{Unknown}``
    are removed before counting. Labels are projected and de-duplicated
    per paper before TP/FP/FN counting.
    """
    pred_by_id = {p.paper_id: p for p in predictions}
    gold_by_id = {p.paper_id: p for p in gold}
    if set(pred_by_id) != set(gold_by_id):
        missing = sorted(set(gold_by_id) - set(pred_by_id))[:5]
        extra = sorted(set(pred_by_id) - set(gold_by_id))[:5]
        raise EvaluationError(
            f"paper id mismatch between predictions and gold; "
            f"missing from predictions: {missing}, unexpected: {extra}"
        )

    paper_ids = sorted(gold_by_id)
    if setting is Setting.WITHOUT_UNKNOWN:
        paper_ids = [pid for pid in paper_ids if gold_by_id[pid].gold != {UNKNOWN}]

    gold_sets: dict[str, set] = {}
    pred_sets: dict[str, set] = {}
    for pid in paper_ids:
        gold_sets[pid] = {_project(lab, granularity) for lab in gold_by_id[pid].gold}
        pred_sets[pid] = {_project(lab, granularity) for lab in pred_by_id[pid].predicted}

    tp = fp = fn = 0
    per_label: dict = {}
    for pid in paper_ids:
        g, p = gold_sets[pid], pred_sets[pid]
        tp += len(g & p)
        fp += len(p - g)
        fn += len(g - p)
        for label in g | p:
            counts = per_label.setdefault(label, [0, 0, 0])  # tp, fp, fn
            if label in g and label in p:
                counts[0] += 1
            elif label in p:
                counts[1] += 1
            else:
                counts[2] += 1

    micro_p = _safe_div(tp, tp + fp)
    micro_r = _safe_div(tp, tp + fn)

    # Macro mean runs over labels with gold support only; a label that was
    # only ever predicted has undefined recall and is excluded.
    gold_labels = sorted(
        {lab for g in gold_sets.values() for lab in g},
        key=lambda lab: label_sort_key(lab) if not isinstance(lab, str) else (2, lab),
    )
    label_p = []
    label_r = []
    label_f1 = []
    for label in gold_labels:
        ltp, lfp, lfn = per_label[label]
        p = _safe_div(ltp, ltp + lfp)
        r = _safe_div(ltp, ltp + lfn)
        label_p.append(p)
        label_r.append(r)
        label_f1.append(_f1(p, r))

    n_labels = len(gold_labels)
    return EvalReport(
        setting=setting,
        granularity=granularity,
        macro_p=_safe_div(sum(label_p), n_labels),
        macro_r=_safe_div(sum(label_r), n_labels),
        macro_f1=_safe_div(sum(label_f1), n_labels),
        micro_p=micro_p,
        micro_r=micro_r,
        micro_f1=_f1(micro_p, micro_r),
        support={
            "papers": len(paper_ids),
            "gold_labels": n_labels,
            "tp": tp,
            "fp": fp,
            "fn": fn,
        },
    )


def average_folds(reports: Sequence[EvalReport]) -> EvalReport:
    """Arithmetic mean of per-fold reports; supports are summed."""
    if not reports:
        raise EvaluationError("no reports to average")
    first = reports[0]
    for report in reports[1:]:
        if report.setting != first.setting or report.granularity != first.granularity:
            raise EvaluationError("cannot average reports across settings/granularities")
    n = len(reports)
    mean = {k: sum(r.metrics()[k] for r in reports) / n for k in first.metrics()}
    support_keys = first.support.keys()
    support = {k: sum(r.support.get(k, 0) for r in reports) for k in support_keys}
    support["folds"] = n
    return EvalReport(
        setting=first.setting, granularity=first.granularity, support=support, **mean
    )


def predict_fold(
    corpus: Sequence[LabeledPaper],
    split,
    scorer: Scorer,
    feature_config: FeatureConfig,
    threshold: float = 0.5,
) -> tuple[list[PaperPrediction], list[LabeledPaper]]:
    """Predict every test paper of one fold.

    Candidates are the training fold's distinct gold triples; premises
    are built from each test document with the given feature config.
    Returns (predictions, test gold papers) aligned by paper id.
    """
    by_id = {p.paper_id: p for p in corpus}
    train = [by_id[pid] for pid in sorted(split.train_ids)]
    test = [by_id[pid] for pid in sorted(split.test_ids)]
    candidates = candidate_label_set(train)
    if not candidates:
        raise EvaluationError("training fold has no candidate triples")
    predictions = []
    for paper in test:
        feature = build_feature(paper.document, feature_config)
        predictions.append(
            predict_paper(scorer, paper.paper_id, feature.combined, candidates, threshold)
        )
    return predictions, test


def evaluate_all_cells(
    predictions: Sequence[PaperPrediction], gold: Sequence[LabeledPaper]
) -> dict[str, dict[str, EvalReport]]:
    """Every (setting, granularity) cell for one fold."""
    return {
        setting.value: {
            granularity.value: evaluate(predictions, gold, setting, granularity)
            for granularity in Granularity
        }
        for setting in Setting
    }


def ablation_matrix(
    corpus: Sequence[LabeledPaper],
    splits: Sequence,
    scorer: Scorer,
    configs: Sequence[FeatureConfig],
    threshold: float = 0.5,
    setting: Setting = Setting.WITH_UNKNOWN,
    granularity: Granularity = Granularity.TRIPLE,
) -> list[tuple[str, EvalReport]]:
    """One fold-averaged evaluation row per feature configuration.

    Rows keep the order of ``configs`` and are labeled by the enabled
    part names.
    """
    from tdmine.doctaet import parts_label

    rows = []
    for config in configs:
        fold_reports = []
        for split in splits:
            predictions, test = predict_fold(corpus, split, scorer, config, threshold)
            fold_reports.append(evaluate(predictions, test, setting, granularity))
        rows.append((parts_label(config.enabled_parts), average_folds(fold_reports)))
    return rows
