"""
Keyword extraction: term frequencies, TF-IDF, TextRank and the fused ranking.

Every ranking uses the total order (score descending, term ascending).
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
import pandas as pd
from sklearn.feature_extraction.text import CountVectorizer

from core.corpus import TokenStream
from core.errors import KeywordError
from services.workers import map_ordered

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = 5
DEFAULT_DAMPING = 0.85
DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 100


@dataclass(frozen=True)
class FrequencyTable:
    entries: Tuple[Tuple[str, int], ...]

    def as_dict(self) -> Dict[str, int]:
        return dict(self.entries)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(list(self.entries), columns=["term", "count"])


@dataclass(frozen=True)
class KeywordScore:
    term: str
    tfidf: float = 0.0
    textrank: float = 0.0
    fused: float = 0.0


@dataclass(frozen=True)
class TextRankResult:
    doc_id: str
    scores: Tuple[KeywordScore, ...]
    residual: float
    iterations: int
    converged: bool
    residuals: Tuple[float, ...] = field(default=(), repr=False)

    def as_dict(self) -> Dict[str, float]:
        return {s.term: s.textrank for s in self.scores}


def _ranked(items: Iterable[Tuple[str, float]]) -> List[Tuple[str, float]]:
    return sorted(items, key=lambda kv: (-kv[1], kv[0]))


def term_frequencies(streams: Sequence[TokenStream]) -> FrequencyTable:
    if not streams:
        raise KeywordError("term_frequencies needs at least one token stream")
    counts = Counter()
    for stream in streams:
        counts.update(stream.tokens)
    return FrequencyTable(entries=tuple(_ranked(counts.items())))


def frequency_markdown(table: FrequencyTable, pairs: int = 3, limit: Optional[int] = None) -> str:
    """Keyword/Frequency column pairs side by side, filled column by column."""
    entries = list(table.entries[:limit] if limit else table.entries)
    rows = -(-len(entries) // pairs) if entries else 0
    header = " | ".join(["Keyword | Frequency"] * pairs)
    lines = [f"| {header} |", "|" + "---|" * (2 * pairs)]
    for r in range(rows):
        cells = []
        for p in range(pairs):
            idx = p * rows + r
            if idx < len(entries):
                cells.extend([entries[idx][0], str(entries[idx][1])])
            else:
                cells.extend(["", ""])
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def _identity(tokens):
    return list(tokens)


def tfidf(streams: Sequence[TokenStream]) -> List[List[KeywordScore]]:
    """tf = count/len(d), idf = ln(N/df), no smoothing; one ranked list per stream.

    N counts every stream, empty ones included; empty streams get no scores.
    """
    if not streams:
        raise KeywordError("tfidf needs at least one token stream")
    if not any(len(s) for s in streams):
        return [[] for _ in streams]

    vectorizer = CountVectorizer(analyzer=_identity, lowercase=False)
    counts = vectorizer.fit_transform([s.tokens for s in streams]).toarray().astype(float)
    terms = vectorizer.get_feature_names_out()

    n_docs = len(streams)
    df = np.count_nonzero(counts, axis=0)
    idf = np.log(n_docs / df)
    lengths = counts.sum(axis=1)

    results: List[List[KeywordScore]] = []
    for row, length in zip(counts, lengths):
        if length == 0:
            results.append([])
            continue
        scores = (row / length) * idf
        present = np.flatnonzero(row)
        ranked = _ranked((str(terms[j]), float(scores[j])) for j in present)
        results.append([KeywordScore(term=t, tfidf=s) for t, s in ranked])
    return results


def aggregate_tfidf(per_doc: Sequence[Sequence[KeywordScore]]) -> Dict[str, float]:
    totals: Dict[str, float] = {}
    for scores in per_doc:
        for s in scores:
            totals[s.term] = totals.get(s.term, 0.0) + s.tfidf
    return totals


def cooccurrence_graph(tokens: Sequence[str], window: int) -> nx.Graph:
    """Undirected graph over distinct terms, weighted by co-occurrences inside the window."""
    graph = nx.Graph()
    graph.add_nodes_from(sorted(set(tokens)))
    for i, left in enumerate(tokens):
        for right in tokens[i + 1:i + window]:
            if right == left:
                continue
            if graph.has_edge(left, right):
                graph[left][right]["weight"] += 1
            else:
                graph.add_edge(left, right, weight=1)
    return graph


def textrank(
    stream: TokenStream,
    window: int = DEFAULT_WINDOW,
    damping: float = DEFAULT_DAMPING,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> TextRankResult:
    if not stream.tokens:
        raise KeywordError(f"textrank on empty token stream {stream.doc_id!r}")
    if window < 2:
        raise KeywordError(f"window must be >= 2, got {window}")
    if not 0 < damping < 1:
        raise KeywordError(f"damping must lie in (0, 1), got {damping}")
    if tol <= 0 or max_iter < 1:
        raise KeywordError("tol must be positive and max_iter at least 1")

    graph = cooccurrence_graph(stream.tokens, window)
    nodes = list(graph.nodes)
    weights = nx.to_numpy_array(graph, nodelist=nodes, weight="weight")
    out_strength = weights.sum(axis=1)

    # transition[v, u] = w(u, v) / strength(u); isolated columns stay zero
    transition = np.divide(
        weights, out_strength[:, None], out=np.zeros_like(weights), where=out_strength[:, None] > 0
    ).T

    ws = np.ones(len(nodes))
    residuals: List[float] = []
    converged = False
    for _ in range(max_iter):
        updated = (1 - damping) + damping * (transition @ ws)
        residual = float(np.abs(updated - ws).sum())
        residuals.append(residual)
        ws = updated
        if residual < tol:
            converged = True
            break

    if not converged:
        logger.warning("TextRank did not converge for %s after %d iterations (residual %.3g)",
                       stream.doc_id, max_iter, residuals[-1])

    ranked = _ranked((term, float(score)) for term, score in zip(nodes, ws))
    return TextRankResult(
        doc_id=stream.doc_id,
        scores=tuple(KeywordScore(term=t, textrank=s) for t, s in ranked),
        residual=residuals[-1],
        iterations=len(residuals),
        converged=converged,
        residuals=tuple(residuals),
    )


def textrank_corpus(
    streams: Sequence[TokenStream],
    window: int = DEFAULT_WINDOW,
    damping: float = DEFAULT_DAMPING,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    workers: Optional[int] = None,
) -> List[TextRankResult]:
    """Per-document TextRank over the non-empty streams, in stream order."""
    return map_ordered(
        lambda s: textrank(s, window, damping, tol, max_iter),
        [s for s in streams if s.tokens],
        workers,
    )


def aggregate_textrank(results: Sequence[TextRankResult]) -> Dict[str, float]:
    """Corpus-wide score: sum of per-document scores."""
    totals: Dict[str, float] = {}
    for result in results:
        for s in result.scores:
            totals[s.term] = totals.get(s.term, 0.0) + s.textrank
    return totals


def _min_max(values: np.ndarray) -> np.ndarray:
    low, high = values.min(), values.max()
    if high == low:
        return np.full_like(values, 0.5)
    return (values - low) / (high - low)


def fuse_keywords(
    tfidf_scores: Mapping[str, float],
    textrank_scores: Mapping[str, float],
    k: int,
) -> List[KeywordScore]:
    """Mean of min-max normalized score families over the union of candidate terms."""
    if k < 1:
        raise KeywordError(f"k must be positive, got {k}")
    candidates = sorted(set(tfidf_scores) | set(textrank_scores))
    if not candidates:
        return []

    raw_tfidf = np.array([float(tfidf_scores.get(t, 0.0)) for t in candidates])
    raw_textrank = np.array([float(textrank_scores.get(t, 0.0)) for t in candidates])
    fused = (_min_max(raw_tfidf) + _min_max(raw_textrank)) / 2

    scored = [
        KeywordScore(term=t, tfidf=float(a), textrank=float(b), fused=float(f))
        for t, a, b, f in zip(candidates, raw_tfidf, raw_textrank, fused)
    ]
    scored.sort(key=lambda s: (-s.fused, s.term))
    return scored[:k]


def keyword_frame(scores: Sequence[KeywordScore]) -> pd.DataFrame:
    return pd.DataFrame(
        [(s.term, s.tfidf, s.textrank, s.fused) for s in scores],
        columns=["term", "tfidf", "textrank", "fused"],
    )


def per_document_frame(doc_ids: Sequence[str], per_doc: Sequence[Sequence[KeywordScore]], column: str) -> pd.DataFrame:
    rows = [
        (doc_id, s.term, getattr(s, column))
        for doc_id, scores in zip(doc_ids, per_doc)
        for s in scores
    ]
    return pd.DataFrame(rows, columns=["doc_id", "term", column])
