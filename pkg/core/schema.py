"""
Hierarchical indicator schema (main variables and their binary sub-variables)
and the multi-input-output table built from it.

Schema file format (YAML)::

    name: pmc-default
    main_variables:
      - id: P1
        name: characteristics of policy
        sub_variables:
          - id: P11
            name: Prediction
            rules:                      # optional evidence rules
              keywords: [forecast, outlook]
              patterns: ['\\bexpect(ed|s)?\\b']
      - id: P10
        name: transparency of policy
        direct: true                    # scored as a single item, id == main id
        rules:
          keywords: [publicly released]

Sub-variables carry no weight field: all items of a main variable count equally.
"""

import csv
import io
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Pattern, Tuple, Union

from core.errors import SchemaError
from services.storage import load_yaml

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvidenceRules:
    keywords: Tuple[str, ...] = ()
    patterns: Tuple[str, ...] = ()
    compiled: Tuple[Pattern, ...] = field(default=(), repr=False, compare=False)

    def __bool__(self):
        return bool(self.keywords or self.patterns)


@dataclass(frozen=True)
class SubVariable:
    id: str
    name: str
    rules: EvidenceRules = field(default_factory=EvidenceRules)


@dataclass(frozen=True)
class MainVariable:
    id: str
    name: str
    sub_variables: Tuple[SubVariable, ...] = ()
    direct: bool = False
    rules: EvidenceRules = field(default_factory=EvidenceRules)

    @property
    def items(self) -> Tuple[SubVariable, ...]:
        """The scoreable items; a direct variable scores itself."""
        if self.direct:
            return (SubVariable(id=self.id, name=self.name, rules=self.rules),)
        return self.sub_variables

    @property
    def n_items(self) -> int:
        return len(self.items)


@dataclass(frozen=True)
class IndicatorSchema:
    main_variables: Tuple[MainVariable, ...]
    name: str = "schema"

    @property
    def n(self) -> int:
        return len(self.main_variables)

    @property
    def main_ids(self) -> Tuple[str, ...]:
        return tuple(m.id for m in self.main_variables)

    def main(self, main_id: str) -> MainVariable:
        for main in self.main_variables:
            if main.id == main_id:
                return main
        raise KeyError(main_id)

    def scoreable_items(self) -> List[Tuple[str, SubVariable]]:
        return [(main.id, item) for main in self.main_variables for item in main.items]

    @property
    def item_ids(self) -> Tuple[str, ...]:
        return tuple(item.id for _, item in self.scoreable_items())

    def counts(self) -> Dict[str, int]:
        return {main.id: main.n_items for main in self.main_variables}


@dataclass(frozen=True)
class MiotRow:
    main_id: str
    slots: Tuple[str, ...]


@dataclass(frozen=True)
class MiotTable:
    rows: Tuple[MiotRow, ...]


def _rules(raw, owner_id: str) -> EvidenceRules:
    if not raw:
        return EvidenceRules()
    if not isinstance(raw, dict):
        raise SchemaError("rules must be a mapping", [owner_id])
    keywords = tuple(str(k).strip() for k in raw.get("keywords") or () if str(k).strip())
    patterns = tuple(str(p) for p in raw.get("patterns") or ())
    compiled = []
    for pattern in patterns:
        try:
            compiled.append(re.compile(pattern, re.IGNORECASE))
        except re.error as e:
            raise SchemaError(f"malformed rule pattern {pattern!r} ({e})", [owner_id]) from e
    return EvidenceRules(keywords=keywords, patterns=patterns, compiled=tuple(compiled))


def _main_variable(raw: dict) -> MainVariable:
    if not isinstance(raw, dict) or not raw.get("id"):
        raise SchemaError("main variable without id")
    main_id = str(raw["id"]).strip()
    direct = bool(raw.get("direct", False))
    subs_raw = raw.get("sub_variables") or []

    if direct and subs_raw:
        raise SchemaError("direct main variable cannot have sub-variables", [main_id])
    if not direct and not subs_raw:
        raise SchemaError("empty main variable", [main_id])

    subs = []
    for sub in subs_raw:
        if not isinstance(sub, dict) or not sub.get("id"):
            raise SchemaError("sub-variable without id", [main_id])
        sub_id = str(sub["id"]).strip()
        subs.append(SubVariable(id=sub_id, name=str(sub.get("name", sub_id)), rules=_rules(sub.get("rules"), sub_id)))

    return MainVariable(
        id=main_id,
        name=str(raw.get("name", main_id)),
        sub_variables=tuple(subs),
        direct=direct,
        rules=_rules(raw.get("rules"), main_id) if direct else EvidenceRules(),
    )


def schema_from_dict(data: dict) -> IndicatorSchema:
    if not isinstance(data, dict) or not data.get("main_variables"):
        raise SchemaError("schema has no main variables")
    mains = tuple(_main_variable(raw) for raw in data["main_variables"])

    seen, duplicated = set(), []
    for main in mains:
        ids = [main.id] if main.direct else [main.id] + [s.id for s in main.sub_variables]
        for item_id in ids:
            if item_id in seen:
                duplicated.append(item_id)
            seen.add(item_id)
    if duplicated:
        raise SchemaError("duplicate ids", sorted(set(duplicated)))

    return IndicatorSchema(main_variables=mains, name=str(data.get("name", "schema")))


def load_schema(schema_path: Union[str, Path]) -> IndicatorSchema:
    schema = schema_from_dict(load_yaml(schema_path))
    logger.info(
        "Loaded schema %s: %d main variables, %d scoreable items",
        schema.name, schema.n, len(schema.item_ids),
    )
    return schema


def build_miot(schema: IndicatorSchema) -> MiotTable:
    return MiotTable(rows=tuple(
        MiotRow(main_id=main.id, slots=tuple(item.id for item in main.items))
        for main in schema.main_variables
    ))


def miot_csv(table: MiotTable) -> str:
    """One ragged row per main variable: P1,P11:1,P12:2,..."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    for row in table.rows:
        writer.writerow([row.main_id] + [f"{slot}:{i}" for i, slot in enumerate(row.slots, start=1)])
    return buffer.getvalue()


def parse_miot(text: str) -> MiotTable:
    rows = []
    for record in csv.reader(io.StringIO(text)):
        if not record:
            continue
        slots = []
        for position, cell in enumerate(record[1:], start=1):
            slot, _, number = cell.rpartition(":")
            if not slot or number != str(position):
                raise SchemaError(f"malformed MIOT slot {cell!r}", [record[0]])
            slots.append(slot)
        rows.append(MiotRow(main_id=record[0], slots=tuple(slots)))
    return MiotTable(rows=tuple(rows))
