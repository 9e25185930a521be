"""
Binary sub-variable scoring.

Evidence rules suggest values; manual scorecards and override files are
authoritative. Scorecard CSV columns, in this order: doc_id, subvar_id, value, source.
"""

import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import pandas as pd

from core.corpus import PolicyDocument, TokenStream, fold, normalize
from core.errors import ScorecardError
from core.schema import IndicatorSchema, SubVariable
from services.storage import read_frame

logger = logging.getLogger(__name__)

SCORECARD_COLUMNS = ["doc_id", "subvar_id", "value", "source"]

MANUAL = "manual"
DEFAULT_ZERO = "default-zero"
RULE_PREFIX = "rule:"

_WORD = re.compile(r"\w+")


@dataclass(frozen=True)
class Scorecard:
    doc_id: str
    values: Mapping[str, int]
    provenance: Mapping[str, str]

    def value(self, item_id: str) -> int:
        return self.values[item_id]


def _contains_sequence(tokens: Sequence[str], needle: Sequence[str]) -> bool:
    width = len(needle)
    if not width:
        return False
    return any(tuple(tokens[i:i + width]) == tuple(needle) for i in range(len(tokens) - width + 1))


def _words(text: str, stop: FrozenSet[str]) -> List[str]:
    return [w for w in _WORD.findall(fold(text)) if w not in stop]


@dataclass(frozen=True)
class _Evidence:
    body: str
    tokens: Tuple[str, ...]
    token_set: FrozenSet[str]
    words: Tuple[str, ...]
    stop: FrozenSet[str]


def _evidence(item: SubVariable, seen: _Evidence) -> Optional[str]:
    for keyword in item.rules.keywords:
        term = fold(normalize(keyword))
        needle = _words(term, seen.stop)
        # body words catch keywords that segmentation folded into a longer dictionary term
        if (term in seen.token_set or _contains_sequence(seen.tokens, needle)
                or _contains_sequence(seen.words, needle)):
            return f"{RULE_PREFIX}{item.id}:keyword={keyword}"
    for number, pattern in enumerate(item.rules.compiled, start=1):
        if pattern.search(seen.body):
            return f"{RULE_PREFIX}{item.id}:pattern={number}"
    return None


def suggest_scores(
    doc: PolicyDocument,
    stream: TokenStream,
    schema: IndicatorSchema,
    stopwords: Iterable[str] = (),
) -> Scorecard:
    """P_ij = 1 iff a keyword rule occurs in the token stream or the body's words,
    or a pattern matches the body. Stopwords are ignored inside keywords.
    """
    stop = frozenset(fold(t) for t in stopwords)
    seen = _Evidence(
        body=doc.body,
        tokens=tuple(stream.tokens),
        token_set=frozenset(stream.tokens),
        words=tuple(_words(doc.body, stop)),
        stop=stop,
    )
    values: Dict[str, int] = {}
    provenance: Dict[str, str] = {}

    for _, item in schema.scoreable_items():
        if not item.rules:
            values[item.id] = 0
            provenance[item.id] = DEFAULT_ZERO
            continue
        hit = _evidence(item, seen)
        values[item.id] = 1 if hit else 0
        provenance[item.id] = hit or f"{RULE_PREFIX}{item.id}:unmatched"

    logger.debug("Suggested %d/%d items for %s", sum(values.values()), len(values), doc.id)
    return Scorecard(doc_id=doc.id, values=values, provenance=provenance)


def _binary(raw, doc_id: str, item_id: str) -> int:
    text = str(raw).strip()
    if text not in ("0", "1"):
        raise ScorecardError(f"value {text!r} is not binary", doc_id, [item_id])
    return int(text)


def resolve_scorecard(suggested: Scorecard, overrides: Mapping[str, int]) -> Scorecard:
    """Manual entries replace suggested ones; everything else is kept as is."""
    unknown = sorted(set(overrides) - set(suggested.values))
    if unknown:
        raise ScorecardError("override references unknown sub-variable ids", suggested.doc_id, unknown)

    values = dict(suggested.values)
    provenance = dict(suggested.provenance)
    for item_id, value in overrides.items():
        values[item_id] = _binary(value, suggested.doc_id, item_id)
        provenance[item_id] = MANUAL
    return Scorecard(doc_id=suggested.doc_id, values=values, provenance=provenance)


def check_complete(scorecard: Scorecard, schema: IndicatorSchema) -> List[str]:
    return [item_id for item_id in schema.item_ids if item_id not in scorecard.values]


def _read_rows(path: Union[str, Path], schema: IndicatorSchema) -> Dict[str, Dict[str, tuple]]:
    frame = read_frame(path, dtype=str, keep_default_na=False)
    missing = [c for c in SCORECARD_COLUMNS[:3] if c not in frame.columns]
    if missing:
        raise ScorecardError(f"{path} lacks columns {', '.join(missing)}")

    known = set(schema.item_ids)
    rows: Dict[str, Dict[str, tuple]] = {}
    for record in frame.itertuples(index=False):
        doc_id = str(record.doc_id).strip()
        item_id = str(record.subvar_id).strip()
        if item_id not in known:
            raise ScorecardError("unknown sub-variable id", doc_id, [item_id])
        entries = rows.setdefault(doc_id, {})
        if item_id in entries:
            raise ScorecardError("duplicate entry", doc_id, [item_id])
        source = str(getattr(record, "source", "") or "").strip() or MANUAL
        entries[item_id] = (_binary(record.value, doc_id, item_id), source)
    return rows


def load_scorecards(path: Union[str, Path], schema: IndicatorSchema) -> Dict[str, Scorecard]:
    """Scorecards keyed by doc_id, in file order. Completeness is checked by the caller."""
    cards = {
        doc_id: Scorecard(
            doc_id=doc_id,
            values={item: v for item, (v, _) in entries.items()},
            provenance={item: s for item, (_, s) in entries.items()},
        )
        for doc_id, entries in _read_rows(path, schema).items()
    }
    logger.info("Loaded %d scorecards from %s", len(cards), path)
    return cards


def load_overrides(path: Union[str, Path], schema: IndicatorSchema) -> Dict[str, Dict[str, int]]:
    return {
        doc_id: {item: v for item, (v, _) in entries.items()}
        for doc_id, entries in _read_rows(path, schema).items()
    }


def scorecard_frame(cards: Sequence[Scorecard], schema: IndicatorSchema) -> pd.DataFrame:
    rows = [
        (card.doc_id, item_id, card.values[item_id], card.provenance.get(item_id, MANUAL))
        for card in cards
        for item_id in schema.item_ids
        if item_id in card.values
    ]
    return pd.DataFrame(rows, columns=SCORECARD_COLUMNS)
