"""
Co-word analysis: document-level keyword co-occurrence and average-linkage
agglomerative clustering of the keywords.
"""

import json
import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd
from sklearn.feature_extraction.text import CountVectorizer
from sklearn.metrics.pairwise import cosine_distances

from core.corpus import TokenStream
from core.errors import ClusteringError

logger = logging.getLogger(__name__)

# linkage distances are compared and reported at this many decimals so that
# summation-order noise cannot reorder tied merges
HEIGHT_DECIMALS = 12


@dataclass(frozen=True)
class CowordMatrix:
    terms: Tuple[str, ...]
    counts: np.ndarray

    def index(self, term: str) -> int:
        return self.terms.index(term)

    def count(self, a: str, b: str) -> int:
        return int(self.counts[self.index(a), self.index(b)])

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.counts, index=list(self.terms), columns=list(self.terms))
        frame.index.name = "term"
        return frame.reset_index()


@dataclass(frozen=True)
class Merge:
    cluster_a: str
    cluster_b: str
    height: float
    size: int


@dataclass(frozen=True)
class Dendrogram:
    leaves: Tuple[str, ...]
    merges: Tuple[Merge, ...]

    def cut(self, k: int) -> List[Tuple[str, ...]]:
        """Apply the first len(leaves) - k merges; clusters ordered by their smallest term."""
        if not 1 <= k <= len(self.leaves):
            raise ClusteringError(f"k must lie in [1, {len(self.leaves)}], got {k}")
        members: Dict[str, List[str]] = {leaf: [leaf] for leaf in self.leaves}
        for merge in self.merges[:len(self.leaves) - k]:
            members[merge.cluster_a] = members[merge.cluster_a] + members.pop(merge.cluster_b)
        return [tuple(sorted(members[label])) for label in sorted(members)]


@dataclass(frozen=True)
class ClusterResult:
    dendrogram: Dendrogram
    clusters: Tuple[Tuple[str, ...], ...]


def _identity(tokens):
    return list(tokens)


def coword_matrix(streams: Sequence[TokenStream], terms: Sequence[str]) -> CowordMatrix:
    """counts[i][j] = documents containing both terms; the diagonal is document frequency."""
    terms = list(terms)
    if not terms:
        raise ClusteringError("co-word matrix needs at least one term")
    if len(set(terms)) != len(terms):
        duplicated = sorted({t for t in terms if terms.count(t) > 1})
        raise ClusteringError(f"duplicate terms: {', '.join(duplicated)}")

    vectorizer = CountVectorizer(analyzer=_identity, vocabulary=terms, binary=True, lowercase=False)
    presence = vectorizer.fit_transform([s.tokens for s in streams]).astype(np.int64)
    counts = (presence.T @ presence).toarray()
    return CowordMatrix(terms=tuple(terms), counts=counts)


def edge_list(matrix: CowordMatrix) -> pd.DataFrame:
    rows = []
    n = len(matrix.terms)
    for i in range(n):
        for j in range(i + 1, n):
            weight = int(matrix.counts[i, j])
            if weight:
                a, b = sorted((matrix.terms[i], matrix.terms[j]))
                rows.append((a, b, weight))
    rows.sort(key=lambda r: (-r[2], r[0], r[1]))
    return pd.DataFrame(rows, columns=["source", "target", "weight"])


def distance_matrix(matrix: CowordMatrix) -> np.ndarray:
    """1 - cosine over co-occurrence rows; an all-zero row is at distance 1 from everything."""
    return cosine_distances(matrix.counts.astype(float))


def hierarchical_cluster(matrix: CowordMatrix, k: int) -> ClusterResult:
    n = len(matrix.terms)
    if not 1 <= k <= n:
        raise ClusteringError(f"k must lie in [1, {n}], got {k}")

    distances = distance_matrix(matrix)
    label_of = list(matrix.terms)
    sizes: Dict[str, int] = {t: 1 for t in label_of}
    # pair_sum[(a, b)] with a < b: sum of leaf distances across the two clusters
    pair_sum: Dict[Tuple[str, str], float] = {}
    for i in range(n):
        for j in range(i + 1, n):
            a, b = sorted((label_of[i], label_of[j]))
            pair_sum[(a, b)] = float(distances[i, j])

    merges: List[Merge] = []
    while len(sizes) > 1:
        best = None
        for (a, b), total in pair_sum.items():
            height = round(total / (sizes[a] * sizes[b]), HEIGHT_DECIMALS)
            key = (height, a, b)
            if best is None or key < best:
                best = key
        height, a, b = best

        merged_size = sizes[a] + sizes.pop(b)
        sizes[a] = merged_size
        merges.append(Merge(cluster_a=a, cluster_b=b, height=height, size=merged_size))

        updated: Dict[Tuple[str, str], float] = {}
        for (x, y), total in pair_sum.items():
            if {x, y} == {a, b}:
                continue
            other = None
            if x in (a, b):
                other = y
            elif y in (a, b):
                other = x
            if other is None:
                updated[(x, y)] = total
                continue
            pair = tuple(sorted((a, other)))
            updated[pair] = updated.get(pair, 0.0) + total
        pair_sum = updated
        logger.debug("merge %s + %s at %.6f", a, b, height)

    dendrogram = Dendrogram(leaves=tuple(matrix.terms), merges=tuple(merges))
    clusters = tuple(dendrogram.cut(k))
    logger.info("Clustered %d terms into %d clusters", n, len(clusters))
    return ClusterResult(dendrogram=dendrogram, clusters=clusters)


def _nested(dendrogram: Dendrogram):
    nodes = {leaf: leaf for leaf in dendrogram.leaves}
    for merge in dendrogram.merges:
        nodes[merge.cluster_a] = [nodes[merge.cluster_a], nodes.pop(merge.cluster_b)]
    (root,) = nodes.values()
    return root


def dendrogram_text(dendrogram: Dendrogram) -> str:
    """Nested-list rendering of the merge tree, e.g. [["a", "b"], "c"]."""
    return json.dumps(_nested(dendrogram), ensure_ascii=False) + "\n"


def merge_frame(dendrogram: Dendrogram) -> pd.DataFrame:
    rows = [(step, m.cluster_a, m.cluster_b, m.height, m.size) for step, m in enumerate(dendrogram.merges, start=1)]
    return pd.DataFrame(rows, columns=["step", "cluster_a", "cluster_b", "height", "size"])


def cluster_frame(clusters: Sequence[Sequence[str]]) -> pd.DataFrame:
    rows = [(term, number) for number, members in enumerate(clusters, start=1) for term in members]
    return pd.DataFrame(rows, columns=["term", "cluster"])


def to_linkage(dendrogram: Dendrogram) -> np.ndarray:
    """scipy-style linkage matrix; leaf ids follow dendrogram.leaves order."""
    n = len(dendrogram.leaves)
    ids = {leaf: i for i, leaf in enumerate(dendrogram.leaves)}
    rows = []
    for step, merge in enumerate(dendrogram.merges):
        rows.append([ids[merge.cluster_a], ids.pop(merge.cluster_b), merge.height, merge.size])
        ids[merge.cluster_a] = n + step
    return np.array(rows, dtype=float).reshape(-1, 4)
