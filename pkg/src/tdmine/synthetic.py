"""Bundled synthetic mini-corpus.

Generates a small, fully deterministic corpus of TEI files plus metadata
whose abstracts embed their gold triples verbatim in rendered form. With
the lexical scorer this makes the gold answer recoverable exactly: gold
hypotheses overlap their premise completely while every other candidate
shares only the separator token. A handful of papers carry one-off
triples that rare-label filtering turns into Unknown papers.
"""

from __future__ import annotations

import json
from pathlib import Path
from xml.sax.saxutils import escape

from tdmine.corpus import TdmTriple
from tdmine.scoring import render_hypothesis

N_COMMON_TRIPLES = 5
N_RARE_PAPERS = 5

_TEI_TEMPLATE = """<?xml version="1.0" encoding="UTF-8"?>
<TEI xmlns="http://www.tei-c.org/ns/1.0">
  <teiHeader>
    <fileDesc>
      <titleStmt>
        <title level="a" type="main">{title}</title>
      </titleStmt>
    </fileDesc>
    <profileDesc>
      <abstract>
        <p>{abstract}</p>
      </abstract>
    </profileDesc>
  </teiHeader>
  <text>
    <body>
      <div>
        <head>Introduction</head>
        <p>Prior systems report mixed findings on these problems .</p>
      </div>
      <div>
        <head>Experimental Setup</head>
        <p>{exp_setup}</p>
      </div>
      <figure type="table">
        <head>Table 1</head>
        <figDesc>{table_caption}</figDesc>
        <table>
          <row><cell>system</cell><cell>value</cell></row>
          <row><cell>baseline</cell><cell>0.71</cell></row>
          <row><cell>ours</cell><cell>{table_value}</cell></row>
        </table>
      </figure>
    </body>
  </text>
</TEI>
"""


def common_triple(i: int) -> TdmTriple:
    """The i-th recurring triple; token vocabulary is disjoint per i."""
    return TdmTriple(
        task=f"taskword{i}q topic{i}q",
        dataset=f"benchset{i}q corpusword{i}q",
        metric=f"meter{i}q gauge{i}q",
    )


def rare_triple(i: int) -> TdmTriple:
    return TdmTriple(
        task=f"raretask{i}q loner{i}q",
        dataset=f"rarebench{i}q oddset{i}q",
        metric=f"raremeter{i}q solo{i}q",
    )


def paper_gold(index: int, n_papers: int) -> list[TdmTriple]:
    """Gold triples for paper ``index``.

    The first five papers carry two common triples each, the bulk carry
    one, and the final :data:`N_RARE_PAPERS` papers carry a unique rare
    triple that the corpus-level frequency filter will remove.
    """
    if index >= n_papers - N_RARE_PAPERS:
        return [rare_triple(index)]
    if index < N_COMMON_TRIPLES:
        return [
            common_triple(index),
            common_triple((index + 1) % N_COMMON_TRIPLES),
        ]
    return [common_triple((index - N_COMMON_TRIPLES) % N_COMMON_TRIPLES)]


def paper_id(index: int) -> str:
    return f"paper{index:04d}"


def _tei_for_paper(index: int, n_papers: int) -> str:
    gold = paper_gold(index, n_papers)
    embedded = " ".join(render_hypothesis(t) for t in gold)
    abstract = (
        "We investigate several benchmark problems and report numbers . "
        f"{embedded} "
        "Our findings generalize across repeated trials ."
    )
    return _TEI_TEMPLATE.format(
        title=escape(f"A careful empirical look at benchmark suite {index}"),
        abstract=escape(abstract),
        exp_setup=escape(
            "We train compact models on commodity hardware for a handful of epochs "
            "and select nothing by peeking ."
        ),
        table_caption=escape("Main results overview"),
        table_value=f"0.{80 + (index % 19)}",
    )


def write_demo_corpus(out_dir: Path | str, n_papers: int = 30) -> dict:
    """Write TEI files and metadata for the demo corpus.

    Layout: ``tei/<paper_id>.tei.xml``, ``papers.json``,
    ``evaluations.json``. Content is a pure function of ``n_papers``.
    """
    # Below 25 papers every common triple falls under the default
    # rare-label threshold of 5 and the whole corpus degenerates to Unknown.
    if n_papers < 25:
        raise ValueError("n_papers must be >= 25")
    out = Path(out_dir)
    tei_dir = out / "tei"
    tei_dir.mkdir(parents=True, exist_ok=True)

    papers = []
    evaluations = []
    for index in range(n_papers):
        pid = paper_id(index)
        (tei_dir / f"{pid}.tei.xml").write_text(
            _tei_for_paper(index, n_papers), encoding="utf-8"
        )
        papers.append(
            {
                "paper_url": f"https://example.org/paper/{pid}",
                "title": f"A careful empirical look at benchmark suite {index}",
            }
        )
        for triple in paper_gold(index, n_papers):
            evaluations.append(
                {
                    "paper_url": f"https://example.org/paper/{pid}",
                    "task": triple.task,
                    "dataset": triple.dataset,
                    "metric": triple.metric,
                }
            )

    (out / "papers.json").write_text(
        json.dumps(papers, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    (out / "evaluations.json").write_text(
        json.dumps(evaluations, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    return {
        "papers": n_papers,
        "rare_papers": N_RARE_PAPERS,
        "evaluation_rows": len(evaluations),
        "tei_dir": str(tei_dir),
    }
