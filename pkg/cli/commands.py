"""
Pipeline stages behind the CLI subcommands.

Each cmd_* validates its inputs first, writes its files under config.out and
returns an exit code. Output order always follows the manifest.
"""

import logging
from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import pandas as pd

from cli.config import RunConfig, validate_paths
from core.corpus import Corpus, TokenStream, load_corpus, segment_corpus
from core.coword import (
    ClusterResult,
    CowordMatrix,
    cluster_frame,
    coword_matrix,
    dendrogram_text,
    edge_list,
    hierarchical_cluster,
    merge_frame,
)
from core.errors import ScorecardError
from core.keywords import (
    aggregate_textrank,
    aggregate_tfidf,
    frequency_markdown,
    fuse_keywords,
    keyword_frame,
    per_document_frame,
    term_frequencies,
    textrank_corpus,
    tfidf,
)
from core.pmc import PmcResult, compute_result, descriptive_stats, display, level_surfaces
from core.schema import IndicatorSchema, build_miot, load_schema, miot_csv
from core.scoring import (
    Scorecard,
    check_complete,
    load_overrides,
    load_scorecards,
    resolve_scorecard,
    scorecard_frame,
    suggest_scores,
)
from panel.charts import ChartSpec, render, render_dendrogram
from panel.tables import emit_stats_table, emit_table, read_results
from services.storage import atomic_write_text, save_frame, save_json
from services.workers import map_ordered

logger = logging.getLogger(__name__)


def _load(config: RunConfig) -> Corpus:
    return load_corpus(config.manifest, config.dictionary, config.stopwords)


def _streams(config: RunConfig, corpus: Corpus) -> List[TokenStream]:
    return segment_corpus(corpus, config.workers)


# --- ingest -------------------------------------------------------------------

def cmd_ingest(config: RunConfig) -> int:
    validate_paths(config, required=["manifest"])
    corpus = _load(config)
    streams = _streams(config, corpus)
    report = {
        "documents": len(corpus),
        "dictionary_terms": len(corpus.dictionary),
        "stopwords": len(corpus.stopwords),
        "entries": [
            {
                "id": doc.id,
                "title": doc.title,
                "issuer": doc.issuer,
                "release_date": doc.release_date.isoformat(),
                "characters": len(doc.body),
                "tokens": len(stream),
            }
            for doc, stream in zip(corpus, streams)
        ],
    }
    save_json(Path(config.out) / "ingest_report.json", report)
    print(f"✅ {len(corpus)} documents loaded")
    return 0


# --- keywords -----------------------------------------------------------------

def _fused(config: RunConfig, streams: Sequence[TokenStream], write: bool = True):
    out = Path(config.out) / "keywords"
    doc_ids = [s.doc_id for s in streams]
    method = config.method

    if write and method in ("all", "freq"):
        table = term_frequencies(streams)
        save_frame(out / "frequency.csv", table.to_frame())
        if config.wants("markdown"):
            atomic_write_text(out / "frequency.md", frequency_markdown(table))
        if method == "freq":
            return []

    per_doc_tfidf = tfidf(streams)
    if write and method in ("all", "tfidf"):
        save_frame(out / "tfidf.csv", per_document_frame(doc_ids, per_doc_tfidf, "tfidf"))
        if method == "tfidf":
            return []

    runs = textrank_corpus(streams, config.window, config.damping, config.tol, config.max_iter, config.workers)
    textrank_totals = aggregate_textrank(runs)
    if write and method in ("all", "textrank"):
        if config.textrank_scope == "corpus":
            ranked = sorted(textrank_totals.items(), key=lambda kv: (-kv[1], kv[0]))
            frame = pd.DataFrame(ranked, columns=["term", "textrank"])
        else:
            frame = per_document_frame([r.doc_id for r in runs], [r.scores for r in runs], "textrank")
        save_frame(out / "textrank.csv", frame)
        save_frame(out / "textrank_runs.csv", pd.DataFrame(
            [(r.doc_id, r.iterations, r.residual, r.converged) for r in runs],
            columns=["doc_id", "iterations", "residual", "converged"],
        ))
        if method == "textrank":
            return []

    fused = fuse_keywords(aggregate_tfidf(per_doc_tfidf), textrank_totals, config.top)
    if write:
        save_frame(out / "fused.csv", keyword_frame(fused))
    return fused


def cmd_keywords(config: RunConfig) -> int:
    validate_paths(config, required=["manifest"])
    corpus = _load(config)
    streams = _streams(config, corpus)
    fused = _fused(config, streams)
    if fused:
        print(f"✅ top {len(fused)} keywords: {', '.join(s.term for s in fused)}")
    else:
        print(f"✅ keyword tables ({config.method}) written to {Path(config.out) / 'keywords'}")
    return 0


# --- coword / cluster -----------------------------------------------------------

def _keyword_terms(config: RunConfig, streams: Sequence[TokenStream]) -> List[str]:
    fused = _fused(replace(config, method="fused"), streams, write=False)
    return [s.term for s in fused]


def _coword(config: RunConfig) -> CowordMatrix:
    corpus = _load(config)
    streams = _streams(config, corpus)
    matrix = coword_matrix(streams, _keyword_terms(config, streams))
    out = Path(config.out) / "coword"
    save_frame(out / "matrix.csv", matrix.to_frame())
    save_frame(out / "edges.csv", edge_list(matrix))
    return matrix


def cmd_coword(config: RunConfig) -> int:
    validate_paths(config, required=["manifest"])
    matrix = _coword(config)
    print(f"✅ co-word matrix over {len(matrix.terms)} keywords written")
    return 0


def cmd_cluster(config: RunConfig) -> int:
    validate_paths(config, required=["manifest"])
    matrix = _coword(config)
    k = min(config.k_clusters, len(matrix.terms))
    if k != config.k_clusters:
        logger.warning("⚠️ Only %d keywords available; clustering into %d groups", len(matrix.terms), k)
    result: ClusterResult = hierarchical_cluster(matrix, k)

    out = Path(config.out) / "clusters"
    atomic_write_text(out / "dendrogram.txt", dendrogram_text(result.dendrogram))
    save_frame(out / "merges.csv", merge_frame(result.dendrogram))
    save_frame(out / "clusters.csv", cluster_frame(result.clusters))
    if config.wants("svg") and len(matrix.terms) > 1:
        render_dendrogram(result.dendrogram, out / "dendrogram.svg")
    print(f"✅ {len(matrix.terms)} keywords grouped into {len(result.clusters)} clusters")
    return 0


# --- suggest / score -------------------------------------------------------------

def _suggested(config: RunConfig, schema: IndicatorSchema, corpus: Corpus) -> Dict[str, Scorecard]:
    streams = _streams(config, corpus)
    cards = map_ordered(
        lambda pair: suggest_scores(pair[0], pair[1], schema, corpus.stopwords),
        list(zip(corpus.documents, streams)),
        config.workers,
    )
    return {card.doc_id: card for card in cards}


def _apply_overrides(config: RunConfig, schema: IndicatorSchema, cards: Dict[str, Scorecard]) -> Dict[str, Scorecard]:
    if config.overrides is None:
        return cards
    overrides = load_overrides(config.overrides, schema)
    unknown_docs = sorted(set(overrides) - set(cards))
    if unknown_docs:
        raise ScorecardError("overrides name unknown documents", ids=unknown_docs)
    return {
        doc_id: resolve_scorecard(card, overrides.get(doc_id, {}))
        for doc_id, card in cards.items()
    }


def cmd_suggest(config: RunConfig) -> int:
    validate_paths(config, required=["manifest", "schema"])
    schema = load_schema(config.schema)
    corpus = _load(config)
    cards = _apply_overrides(config, schema, _suggested(config, schema, corpus))
    save_frame(Path(config.out) / "scoring" / "scorecards_suggested.csv",
               scorecard_frame(list(cards.values()), schema))
    ones = sum(sum(card.values.values()) for card in cards.values())
    print(f"✅ suggested scorecards for {len(cards)} documents ({ones} items set)")
    return 0


def _scorecards(config: RunConfig, schema: IndicatorSchema, corpus: Optional[Corpus]) -> List[Scorecard]:
    if config.scorecards is not None:
        cards = load_scorecards(config.scorecards, schema)
    else:
        cards = _suggested(config, schema, corpus)
    cards = _apply_overrides(config, schema, cards)

    if corpus is not None:
        missing_docs = [doc.id for doc in corpus if doc.id not in cards]
        if missing_docs:
            raise ScorecardError("no scorecard for documents", ids=missing_docs)
        order = [doc.id for doc in corpus]
    else:
        order = list(cards)

    incomplete = []
    for doc_id in order:
        missing = check_complete(cards[doc_id], schema)
        if missing:
            incomplete.append(f"{doc_id} ({', '.join(missing)})")
            logger.error("Scorecard for %s misses %s", doc_id, ", ".join(missing))
    if incomplete:
        raise ScorecardError("incomplete scorecards", ids=incomplete)
    return [cards[doc_id] for doc_id in order]


def _labels(corpus: Optional[Corpus]) -> Dict[str, str]:
    if corpus is None:
        return {}
    return {doc.id: str(doc.release_date.year) for doc in corpus}


def _emit_reports(config: RunConfig, results: Sequence[PmcResult], corpus: Optional[Corpus]) -> None:
    out = Path(config.out)
    stats = descriptive_stats(results)
    if config.wants("csv"):
        emit_table(results, "csv", out / "results" / "results.csv")
        emit_stats_table(stats, "csv", out / "results" / "stats.csv")
    if config.wants("markdown"):
        emit_table(results, "markdown", out / "results" / "table.md", _labels(corpus))
        emit_stats_table(stats, "markdown", out / "results" / "stats.md")
    if not config.wants("svg"):
        return

    charts = out / "charts"
    specs = []
    for r in results:
        if r.surface is not None:
            specs.append(ChartSpec("surface-heatmap", f"PMC-Surface {r.doc_id}", r.surface,
                                   charts / f"surface_{r.doc_id}.svg"))
        specs.append(ChartSpec(
            "spider",
            f"{r.doc_id}: PMC {display(r.pmc)}, G {display(r.g)} ({r.level.name})",
            list(zip(r.main_ids, r.main_values)),
            charts / f"spider_{r.doc_id}.svg",
        ))
    if any(r.surface is not None for r in results):
        for name, surface in level_surfaces(results).items():
            specs.append(ChartSpec("surface-heatmap", f"Mean PMC-Surface: {name}", surface,
                                   charts / f"surface_level_{name.lower()}.svg"))
    dates = {doc.id: doc.release_date for doc in corpus} if corpus is not None else {}
    if len(results) >= 2 and all(r.doc_id in dates for r in results):
        specs.append(ChartSpec("trend", "Implicit government guarantee intensity",
                               [(dates[r.doc_id], r.g) for r in results], charts / "trend.svg"))
    # pyplot keeps global state, so charts render one at a time
    for spec in specs:
        render(spec)


def cmd_score(config: RunConfig) -> int:
    required = ["schema"] + ([] if config.scorecards is not None else ["manifest"])
    validate_paths(config, required=required)
    schema = load_schema(config.schema)
    corpus = _load(config) if config.manifest is not None else None

    cards = _scorecards(config, schema, corpus)
    results = map_ordered(lambda card: compute_result(card, schema), cards, config.workers)

    out = Path(config.out)
    save_frame(out / "scoring" / "scorecards.csv", scorecard_frame(cards, schema))
    atomic_write_text(out / "scoring" / "miot.csv", miot_csv(build_miot(schema)))
    _emit_reports(config, results, corpus)

    mean_pmc = sum(r.pmc for r in results) / len(results)
    print(f"✅ scored {len(results)} documents, mean PMC {display(mean_pmc)}")
    return 0


def cmd_report(config: RunConfig) -> int:
    validate_paths(config)
    results_path = Path(config.out) / "results" / "results.csv"
    results = read_results(results_path)
    corpus = _load(config) if config.manifest is not None else None
    _emit_reports(config, results, corpus)
    print(f"✅ reports regenerated for {len(results)} documents")
    return 0


def cmd_run(config: RunConfig) -> int:
    validate_paths(config, required=["manifest", "schema"])
    for stage in (cmd_ingest, cmd_keywords, cmd_cluster, cmd_score):
        stage(config)
    return 0


COMMANDS = {
    "ingest": cmd_ingest,
    "keywords": cmd_keywords,
    "coword": cmd_coword,
    "cluster": cmd_cluster,
    "suggest": cmd_suggest,
    "score": cmd_score,
    "report": cmd_report,
    "run": cmd_run,
}
