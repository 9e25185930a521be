"""
Corpus ingestion: manifest loading, text normalization and dictionary-assisted
segmentation.

Manifest format (YAML)::

    dictionary: dictionary.txt        # optional, relative to the manifest
    stopwords: stopwords.txt          # optional
    documents:
      - id: "1"
        title: Notice on ...
        issuer: National Development and Reform Commission
        release_date: 2008-01-01      # ISO date; a quoted "2008.01" is read as 2008-01-01
        goal: Simplify the bond issuance process ...
        body: docs/01.txt             # UTF-8 plain text, relative to the manifest
"""

import logging
import re
import unicodedata
from dataclasses import dataclass, field
from datetime import date, datetime
from pathlib import Path
from typing import FrozenSet, Iterable, List, Optional, Tuple, Union

from core.errors import CorpusError, NormalizationError
from services.storage import load_yaml, read_term_lines
from services.workers import map_ordered

logger = logging.getLogger(__name__)

REQUIRED_FIELDS = ("id", "title", "issuer", "release_date", "goal", "body")

_WHITESPACE = re.compile(r"\s+")
_WORD = re.compile(r"\w+")
_YEAR_MONTH = re.compile(r"^(\d{4})\.(\d{1,2})$")


@dataclass(frozen=True)
class PolicyDocument:
    id: str
    title: str
    issuer: str
    release_date: date
    goal: str
    body: str


@dataclass(frozen=True)
class Corpus:
    documents: Tuple[PolicyDocument, ...]
    dictionary: FrozenSet[str] = field(default_factory=frozenset)
    stopwords: FrozenSet[str] = field(default_factory=frozenset)

    def __iter__(self):
        return iter(self.documents)

    def __len__(self):
        return len(self.documents)

    def get(self, doc_id: str) -> PolicyDocument:
        for doc in self.documents:
            if doc.id == doc_id:
                return doc
        raise KeyError(doc_id)


@dataclass(frozen=True)
class TokenStream:
    doc_id: str
    tokens: Tuple[str, ...]

    def __len__(self):
        return len(self.tokens)


def normalize(raw: Union[str, bytes]) -> str:
    """Unify line endings, collapse whitespace runs to one space, NFKC-compose.

    NFKC also folds compatibility characters (ligatures, fullwidth forms,
    superscripts): "ﬁ" becomes "fi" and "²" becomes "2".
    """
    if isinstance(raw, (bytes, bytearray)):
        try:
            raw = bytes(raw).decode("utf-8")
        except UnicodeDecodeError as e:
            raise NormalizationError("invalid UTF-8 byte sequence", e.start) from e
    text = unicodedata.normalize("NFKC", raw)
    text = text.replace("\r\n", "\n").replace("\r", "\n")
    return _WHITESPACE.sub(" ", text).strip()


def fold(term: str) -> str:
    # casefold is a no-op for caseless scripts
    return term.casefold()


def _terms(raw_terms: Iterable[str]) -> FrozenSet[str]:
    terms = set()
    for term in raw_terms:
        term = fold(normalize(term))
        if term:
            terms.add(term)
    return frozenset(terms)


def load_dictionary(path: Union[str, Path]) -> FrozenSet[str]:
    terms = _terms(read_term_lines(path))
    logger.info("Loaded %d dictionary terms from %s", len(terms), path)
    return terms


def load_stopwords(path: Union[str, Path]) -> FrozenSet[str]:
    terms = _terms(read_term_lines(path))
    logger.info("Loaded %d stopwords from %s", len(terms), path)
    return terms


def _parse_date(value, entry_id: str) -> date:
    if isinstance(value, datetime):
        return value.date()
    if isinstance(value, date):
        return value
    if isinstance(value, float):
        # YAML reads an unquoted 2016.10 as 2016.1
        raise CorpusError(f"release_date {value!r} was read as a number; quote it, e.g. \"2016.10\"", entry_id)
    text = str(value).strip()
    match = _YEAR_MONTH.match(text)
    try:
        if match:
            return date(int(match.group(1)), int(match.group(2)), 1)
        return date.fromisoformat(text)
    except ValueError as e:
        raise CorpusError(f"unparseable release_date {text!r}", entry_id) from e


def _read_body(path: Path, entry_id: str) -> str:
    try:
        raw = path.read_bytes()
    except FileNotFoundError as e:
        raise CorpusError(f"missing body file {path}", entry_id) from e
    try:
        body = normalize(raw)
    except NormalizationError as e:
        raise CorpusError(str(e), entry_id) from e
    if not body:
        raise CorpusError(f"empty body in {path}", entry_id)
    return body


def _entry_to_document(entry: dict, base: Path, position: int) -> PolicyDocument:
    if not isinstance(entry, dict):
        raise CorpusError(f"manifest entry #{position} is not a record")
    entry_id = str(entry["id"]).strip() if entry.get("id") is not None else f"#{position}"
    missing = [name for name in REQUIRED_FIELDS if entry.get(name) in (None, "")]
    if missing:
        raise CorpusError(f"missing fields {', '.join(missing)}", entry_id)

    return PolicyDocument(
        id=entry_id,
        title=normalize(str(entry["title"])),
        issuer=normalize(str(entry["issuer"])),
        release_date=_parse_date(entry["release_date"], entry_id),
        goal=normalize(str(entry["goal"])),
        body=_read_body(base / str(entry["body"]), entry_id),
    )


def load_corpus(
    manifest_path: Union[str, Path],
    dictionary_path: Optional[Union[str, Path]] = None,
    stopwords_path: Optional[Union[str, Path]] = None,
) -> Corpus:
    """Load every manifest entry, in manifest order.

    Explicit dictionary/stopword paths win over the ones named in the manifest.
    """
    manifest_path = Path(manifest_path)
    if not manifest_path.is_file():
        raise CorpusError(f"manifest not found: {manifest_path}")
    manifest = load_yaml(manifest_path) or {}
    if isinstance(manifest, list):
        manifest = {"documents": manifest}
    base = manifest_path.parent

    entries = manifest.get("documents") or []
    if not entries:
        raise CorpusError("empty corpus")

    documents: List[PolicyDocument] = []
    seen = set()
    for position, entry in enumerate(entries, start=1):
        doc = _entry_to_document(entry, base, position)
        if doc.id in seen:
            raise CorpusError("duplicate id", doc.id)
        seen.add(doc.id)
        documents.append(doc)

    if dictionary_path is None and manifest.get("dictionary"):
        dictionary_path = base / manifest["dictionary"]
    if stopwords_path is None and manifest.get("stopwords"):
        stopwords_path = base / manifest["stopwords"]

    dictionary = load_dictionary(dictionary_path) if dictionary_path else frozenset()
    stopwords = load_stopwords(stopwords_path) if stopwords_path else frozenset()

    logger.info("Loaded %d documents from %s", len(documents), manifest_path)
    return Corpus(documents=tuple(documents), dictionary=dictionary, stopwords=stopwords)


def _fallback_tokens(span: str) -> List[str]:
    return _WORD.findall(span)


def segment(doc: PolicyDocument, dictionary: Iterable[str], stopwords: Iterable[str] = ()) -> TokenStream:
    """Greedy left-to-right longest dictionary match; uncovered spans split on Unicode words."""
    text = fold(doc.body)
    terms = frozenset(fold(t) for t in dictionary if t)
    stop = frozenset(fold(t) for t in stopwords)
    lengths = sorted({len(t) for t in terms}, reverse=True)

    tokens: List[str] = []
    pending = 0
    i = 0
    while i < len(text):
        match = None
        for size in lengths:
            if i + size <= len(text) and text[i:i + size] in terms:
                match = text[i:i + size]
                break
        if match is None:
            i += 1
            continue
        tokens.extend(_fallback_tokens(text[pending:i]))
        tokens.append(match)
        i += len(match)
        pending = i
    tokens.extend(_fallback_tokens(text[pending:]))

    return TokenStream(doc_id=doc.id, tokens=tuple(t for t in tokens if t and t not in stop))


def segment_corpus(corpus: Corpus, workers: Optional[int] = None) -> List[TokenStream]:
    streams = map_ordered(
        lambda doc: segment(doc, corpus.dictionary, corpus.stopwords),
        corpus.documents,
        workers,
    )
    logger.info("Segmented %d documents (%d tokens)", len(streams), sum(len(s) for s in streams))
    return streams
