"""Pipeline entry point.

Stages run in order: ingest -> build-corpus -> make-instances ->
predict -> evaluate (plus the independent ablate stage). Each stage
checks its prerequisites, writes outputs atomically, and records a
manifest chaining the input/output digests.

Exit codes: 0 success, 1 module error, 2 usage or missing prerequisite.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from tdmine import __version__
from tdmine import corpus as corpus_mod
from tdmine import tei as tei_mod
from tdmine.config import PipelineConfig
from tdmine.doctaet import FeatureRecord, ablation_configs, build_feature
from tdmine.evaluation import (
    EvaluationError,
    Granularity,
    Setting,
    average_folds,
    evaluate_all_cells,
    predict_fold,
)
from tdmine.instances import (
    InstanceError,
    SamplingConfig,
    candidate_label_set,
    generate_instances,
    instance_stats,
    instances_filename,
    write_instances_jsonl,
)
from tdmine.manifest import (
    MissingPrerequisite,
    atomic_write_bytes,
    atomic_write_text,
    require_dir,
    require_file,
    tree_digest,
    write_stage_manifest,
)
from tdmine.scoring import ScorerError, make_scorer, write_predictions_jsonl
from tdmine.synthetic import write_demo_corpus

STAGES = ("ingest", "build-corpus", "make-instances", "predict", "evaluate", "ablate")


# ---------------------------------------------------------------------------
# Stage implementations
# ---------------------------------------------------------------------------


def _stage_ingest(cfg: PipelineConfig) -> dict:
    tei_dir = require_dir(Path(cfg.tei_dir or "."), "set tei_dir")
    files = sorted(tei_dir.glob("*.tei.xml"))
    if not files:
        raise MissingPrerequisite(tei_dir / "*.tei.xml", "no TEI files found")

    def parse_one(path: Path) -> tei_mod.Document:
        pid = path.name[: -len(".tei.xml")]
        return tei_mod.parse_tei(path.read_bytes(), pid)

    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            documents = list(pool.map(parse_one, files))
    else:
        documents = [parse_one(f) for f in files]

    out = io.StringIO()
    tei_mod.write_documents_jsonl(documents, out)
    work = cfg.work_path()
    target = work / "documents.jsonl"
    atomic_write_text(target, out.getvalue())
    write_stage_manifest(
        work,
        "ingest",
        __version__,
        cfg.to_dict(),
        inputs={
            "tei_dir": {
                "path": str(tei_dir),
                "files": len(files),
                "sha256": tree_digest(files),
            }
        },
        outputs={"documents": target},
    )
    return {"documents": len(documents), "output": str(target)}


def _stage_build_corpus(cfg: PipelineConfig) -> dict:
    work = cfg.work_path()
    documents_path = require_file(work / "documents.jsonl", "run the ingest stage first")
    papers_path = require_file(Path(cfg.papers_file or "papers.json"), "set papers_file")
    evaluations_path = require_file(
        Path(cfg.evaluations_file or "evaluations.json"), "set evaluations_file"
    )

    with open(documents_path, encoding="utf-8") as fp:
        documents = tei_mod.read_documents_jsonl(fp)
    load = corpus_mod.load_metadata(str(papers_path), str(evaluations_path))
    corpus, join_report = corpus_mod.build_corpus(documents, load.annotations)
    corpus = corpus_mod.filter_rare_labels(corpus, cfg.min_papers)
    corpus = corpus_mod.assign_unknown(corpus)
    splits = corpus_mod.split_folds(
        corpus, train_ratio=cfg.train_ratio, n_folds=cfg.n_folds, seed=cfg.seed
    )
    stats = corpus_mod.corpus_stats(corpus, splits)

    out = io.StringIO()
    corpus_mod.write_corpus_jsonl(corpus, out)
    corpus_path = work / "corpus.jsonl"
    atomic_write_text(corpus_path, out.getvalue())

    folds_path = work / "folds.json"
    atomic_write_text(
        folds_path,
        json.dumps(
            {"seed": cfg.seed, "folds": [s.to_dict() for s in splits]},
            indent=2,
        )
        + "\n",
    )
    stats_path = work / "stats.json"
    atomic_write_text(
        stats_path,
        json.dumps(
            {
                "seed": cfg.seed,
                "min_papers": cfg.min_papers,
                "metadata_skipped": load.skipped,
                "join": join_report,
                "stats": stats,
            },
            indent=2,
        )
        + "\n",
    )
    write_stage_manifest(
        work,
        "build-corpus",
        __version__,
        cfg.to_dict(),
        inputs={
            "documents": documents_path,
            "papers": papers_path,
            "evaluations": evaluations_path,
        },
        outputs={"corpus": corpus_path, "folds": folds_path, "stats": stats_path},
    )
    return {
        "papers": len(corpus),
        "unknown_papers": stats["overall"]["unknown_papers"],
        "outputs": [str(corpus_path), str(folds_path), str(stats_path)],
    }


def _load_corpus_and_folds(cfg: PipelineConfig):
    work = cfg.work_path()
    corpus_path = require_file(work / "corpus.jsonl", "run the build-corpus stage first")
    folds_path = require_file(work / "folds.json", "run the build-corpus stage first")
    with open(corpus_path, encoding="utf-8") as fp:
        corpus = corpus_mod.read_corpus_jsonl(fp)
    folds_doc = json.loads(folds_path.read_text(encoding="utf-8"))
    splits = [corpus_mod.FoldSplit.from_dict(d) for d in folds_doc["folds"]]
    if cfg.fold is not None:
        splits = [s for s in splits if s.fold_id == cfg.fold]
        if not splits:
            raise EvaluationError(f"fold {cfg.fold} not present in {folds_path}")
    return corpus, splits, corpus_path, folds_path


def _stage_make_instances(cfg: PipelineConfig) -> dict:
    corpus, splits, corpus_path, folds_path = _load_corpus_and_folds(cfg)
    work = cfg.work_path()
    feature_config = cfg.feature_config()
    fingerprint = feature_config.fingerprint()

    features = {
        paper.paper_id: build_feature(paper.document, feature_config)
        for paper in corpus
    }
    feature_lines = [
        json.dumps(
            FeatureRecord(pid, features[pid], fingerprint).to_dict(), ensure_ascii=False
        )
        for pid in sorted(features)
    ]
    features_path = work / "features.jsonl"
    atomic_write_text(features_path, "\n".join(feature_lines) + "\n")

    by_id = {p.paper_id: p for p in corpus}
    premises = {pid: features[pid].combined for pid in features}
    outputs = {"features": features_path}
    counts = {}
    for split in splits:
        train = [by_id[pid] for pid in sorted(split.train_ids)]
        candidates = candidate_label_set(train)
        instances = generate_instances(
            train, premises, candidates, SamplingConfig(k_false=cfg.k_false, seed=cfg.seed)
        )
        out = io.StringIO()
        write_instances_jsonl(instances, out)
        path = work / instances_filename(split.fold_id, cfg.k_false)
        atomic_write_text(path, out.getvalue())
        outputs[f"instances_fold{split.fold_id}"] = path
        stats = instance_stats(instances)
        counts[f"fold{split.fold_id}"] = {
            "true": stats["true"],
            "false": stats["false"],
            "candidates": len(candidates),
        }
    write_stage_manifest(
        work,
        "make-instances",
        __version__,
        cfg.to_dict(),
        inputs={"corpus": corpus_path, "folds": folds_path},
        outputs=outputs,
    )
    return {"counts": counts, "outputs": [str(p) for p in outputs.values()]}


def _make_scorer(cfg: PipelineConfig):
    if cfg.scorer.startswith(("http://", "https://")):
        return make_scorer(cfg.scorer, pool_size=max(1, cfg.jobs))
    return make_scorer(cfg.scorer)


def _stage_predict(cfg: PipelineConfig) -> dict:
    corpus, splits, corpus_path, folds_path = _load_corpus_and_folds(cfg)
    work = cfg.work_path()
    scorer = _make_scorer(cfg)
    feature_config = cfg.feature_config()
    outputs = {}
    for split in splits:
        predictions, _ = predict_fold(corpus, split, scorer, feature_config, cfg.threshold)
        out = io.StringIO()
        write_predictions_jsonl(predictions, out)
        path = work / f"predictions-{split.fold_id}.jsonl"
        atomic_write_text(path, out.getvalue())
        outputs[f"predictions_fold{split.fold_id}"] = path
    write_stage_manifest(
        work,
        "predict",
        __version__,
        cfg.to_dict(),
        inputs={"corpus": corpus_path, "folds": folds_path},
        outputs=outputs,
    )
    return {"folds": [s.fold_id for s in splits], "outputs": [str(p) for p in outputs.values()]}


def _stage_evaluate(cfg: PipelineConfig) -> dict:
    from tdmine import reporting
    from tdmine.scoring import read_predictions_jsonl

    corpus, splits, corpus_path, folds_path = _load_corpus_and_folds(cfg)
    work = cfg.work_path()
    by_id = {p.paper_id: p for p in corpus}

    inputs = {"corpus": corpus_path, "folds": folds_path}
    fold_trees = {}
    for split in splits:
        pred_path = require_file(
            work / f"predictions-{split.fold_id}.jsonl", "run the predict stage first"
        )
        inputs[f"predictions_fold{split.fold_id}"] = pred_path
        with open(pred_path, encoding="utf-8") as fp:
            predictions = read_predictions_jsonl(fp)
        test_gold = [by_id[pid] for pid in sorted(split.test_ids)]
        fold_trees[split.fold_id] = evaluate_all_cells(predictions, test_gold)

    average_tree = {
        setting.value: {
            granularity.value: average_folds(
                [fold_trees[fid][setting.value][granularity.value] for fid in fold_trees]
            )
            for granularity in Granularity
        }
        for setting in Setting
    }

    payload = {
        "seed": cfg.seed,
        "scorer": cfg.scorer,
        "threshold": cfg.threshold,
        "macro_averaging": "unweighted over labels with gold support",
        "folds": {
            str(fid): reporting.report_tree_to_dict(tree) for fid, tree in fold_trees.items()
        },
        "average": reporting.report_tree_to_dict(average_tree),
    }
    report_path = work / "report.json"
    atomic_write_text(report_path, json.dumps(payload, indent=2, ensure_ascii=False) + "\n")

    text_path = work / "report.txt"
    atomic_write_text(
        text_path,
        f"Fold-averaged evaluation ({len(fold_trees)} folds)\n\n"
        + reporting.format_report_tree(average_tree),
    )
    tsv_path = work / "report.tsv"
    reporting.write_tsv(reporting.tree_rows(average_tree), tsv_path, label_header="cell")

    figures_dir = work / "figures"
    figures_dir.mkdir(parents=True, exist_ok=True)
    figure_path = figures_dir / "report.png"
    reporting.render_report_figure(average_tree, figure_path, title="Fold-averaged")

    write_stage_manifest(
        work,
        "evaluate",
        __version__,
        cfg.to_dict(),
        inputs=inputs,
        outputs={
            "report": report_path,
            "report_txt": text_path,
            "report_tsv": tsv_path,
            "report_png": figure_path,
        },
    )
    micro = average_tree[Setting.WITH_UNKNOWN.value][Granularity.TRIPLE.value].micro_f1
    return {"micro_f1_with_unknown_triple": round(micro, 4), "output": str(report_path)}


def _stage_ablate(cfg: PipelineConfig) -> dict:
    from tdmine import reporting
    from tdmine.evaluation import ablation_matrix

    corpus, splits, corpus_path, folds_path = _load_corpus_and_folds(cfg)
    work = cfg.work_path()
    scorer = _make_scorer(cfg)
    rows = ablation_matrix(
        corpus,
        splits,
        scorer,
        ablation_configs(cfg.feature_config()),
        threshold=cfg.threshold,
    )
    payload = {
        "seed": cfg.seed,
        "scorer": cfg.scorer,
        "threshold": cfg.threshold,
        "rows": [{"parts": label, **report.to_dict()} for label, report in rows],
    }
    json_path = work / "ablation.json"
    atomic_write_text(json_path, json.dumps(payload, indent=2, ensure_ascii=False) + "\n")
    text_path = work / "ablation.txt"
    atomic_write_text(
        text_path, reporting.format_metric_table(rows, title="Context-part ablation") + "\n"
    )
    tsv_path = work / "ablation.tsv"
    reporting.write_tsv(rows, tsv_path, label_header="parts")
    figures_dir = work / "figures"
    figures_dir.mkdir(parents=True, exist_ok=True)
    figure_path = figures_dir / "ablation.png"
    reporting.render_ablation_figure(rows, figure_path)
    write_stage_manifest(
        work,
        "ablate",
        __version__,
        cfg.to_dict(),
        inputs={"corpus": corpus_path, "folds": folds_path},
        outputs={
            "ablation": json_path,
            "ablation_txt": text_path,
            "ablation_tsv": tsv_path,
            "ablation_png": figure_path,
        },
    )
    return {"rows": [label for label, _ in rows], "output": str(json_path)}


_STAGE_FUNCS = {
    "ingest": _stage_ingest,
    "build-corpus": _stage_build_corpus,
    "make-instances": _stage_make_instances,
    "predict": _stage_predict,
    "evaluate": _stage_evaluate,
    "ablate": _stage_ablate,
}


def run_stage(stage: str, cfg: PipelineConfig) -> int:
    """Run one stage; returns the process exit code."""
    if stage not in _STAGE_FUNCS:
        print(f"unknown stage: {stage}", file=sys.stderr)
        return 2
    try:
        summary = _STAGE_FUNCS[stage](cfg)
    except MissingPrerequisite as exc:
        print(f"{stage}: {exc}", file=sys.stderr)
        return 2
    except (
        ValueError,
        OSError,
        KeyError,
        ScorerError,
        EvaluationError,
        InstanceError,
        json.JSONDecodeError,
    ) as exc:
        print(f"{stage}: error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps({"stage": stage, **summary}, ensure_ascii=False))
    return 0


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file; flags override it")
    parser.add_argument("--tei-dir", dest="tei_dir")
    parser.add_argument("--papers", dest="papers_file")
    parser.add_argument("--evaluations", dest="evaluations_file")
    parser.add_argument("--work-dir", dest="work_dir")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--min-papers", dest="min_papers", type=int)
    parser.add_argument("--k-false", dest="k_false", type=int)
    parser.add_argument("--threshold", type=float)
    parser.add_argument("--scorer", help="lexical: or http(s)://host/score")
    parser.add_argument("--parts", help="comma-separated feature parts")
    parser.add_argument("--jobs", type=int)
    parser.add_argument("--fold", type=int, help="restrict to one fold id")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tdmine",
        description="Leaderboard triple mining pipeline over parsed articles",
    )
    parser.add_argument("--version", action="version", version=f"tdmine {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for stage in STAGES:
        stage_parser = sub.add_parser(stage, help=f"run the {stage} stage")
        _add_common_flags(stage_parser)
    demo = sub.add_parser("make-demo", help="write the bundled synthetic mini-corpus")
    demo.add_argument("--out", required=True, help="output directory")
    demo.add_argument("--papers", type=int, default=30, dest="n_papers")
    return parser


def _config_from_args(args: argparse.Namespace) -> PipelineConfig:
    cfg = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    return cfg.override(
        tei_dir=args.tei_dir,
        papers_file=args.papers_file,
        evaluations_file=args.evaluations_file,
        work_dir=args.work_dir,
        seed=args.seed,
        min_papers=args.min_papers,
        k_false=args.k_false,
        threshold=args.threshold,
        scorer=args.scorer,
        parts=args.parts,
        jobs=args.jobs,
        fold=args.fold,
    )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "make-demo":
        try:
            summary = write_demo_corpus(args.out, args.n_papers)
        except (ValueError, OSError) as exc:
            print(f"make-demo: error: {exc}", file=sys.stderr)
            return 1
        print(json.dumps({"stage": "make-demo", **summary}))
        return 0
    return run_stage(args.command, _config_from_args(args))


if __name__ == "__main__":
    sys.exit(main())
