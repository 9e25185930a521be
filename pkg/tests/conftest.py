from datetime import date
from pathlib import Path

import numpy as np
import pytest
import yaml

from core.corpus import PolicyDocument, TokenStream
from core.schema import load_schema, schema_from_dict
from core.scoring import Scorecard, MANUAL

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "data"
DEFAULT_SCHEMA = DATA / "schema" / "pmc_default.yaml"
GOLDEN_SCORECARDS = DATA / "scorecards" / "golden.csv"
MANIFEST = DATA / "corpus" / "manifest.yaml"

YEARS = list(range(2008, 2025))

# per main variable: (n_i, number of sub-variables set for each year 2008..2024)
GOLDEN_COUNTS = {
    "P1": (6, [2, 3, 1, 1, 2, 2, 3, 4, 4, 4, 4, 2, 3, 5, 4, 4, 4]),
    "P2": (3, [3, 3, 3, 2, 2, 3, 3, 2, 3, 3, 2, 2, 3, 3, 3, 2, 2]),
    "P3": (5, [1, 2, 1, 1, 1, 1, 3, 3, 3, 0, 1, 2, 2, 3, 3, 3, 3]),
    "P4": (4, [3, 3, 4, 3, 3, 3, 4, 4, 3, 3, 3, 4, 3, 4, 4, 4, 4]),
    "P5": (5, [1, 2, 0, 1, 1, 1, 1, 3, 3, 0, 2, 3, 3, 2, 2, 2, 2]),
    "P6": (5, [3, 2, 3, 2, 2, 2, 2, 4, 4, 5, 5, 3, 3, 4, 3, 3, 4]),
    "P7": (5, [2, 2, 1, 2, 2, 2, 2, 3, 4, 5, 2, 3, 3, 2, 4, 1, 4]),
    "P8": (4, [1, 2, 2, 2, 1, 1, 1, 3, 3, 3, 2, 2, 2, 3, 2, 3, 2]),
    "P9": (5, [3, 4, 4, 3, 3, 3, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4]),
    "P10": (1, [1] * 17),
}

# displayed values, one string per year 2008..2024
GOLDEN_VALUES = {
    "P1": "0.33 0.50 0.17 0.17 0.33 0.33 0.50 0.67 0.67 0.67 0.67 0.33 0.50 0.83 0.67 0.67 0.67",
    "P2": "1.00 1.00 1.00 0.67 0.67 1.00 1.00 0.67 1.00 1.00 0.67 0.67 1.00 1.00 1.00 0.67 0.67",
    "P3": "0.20 0.40 0.20 0.20 0.20 0.20 0.60 0.60 0.60 0.00 0.20 0.40 0.40 0.60 0.60 0.60 0.60",
    "P4": "0.75 0.75 1.00 0.75 0.75 0.75 1.00 1.00 0.75 0.75 0.75 1.00 0.75 1.00 1.00 1.00 1.00",
    "P5": "0.20 0.40 0.00 0.20 0.20 0.20 0.20 0.60 0.60 0.00 0.40 0.60 0.60 0.40 0.40 0.40 0.40",
    "P6": "0.60 0.40 0.60 0.40 0.40 0.40 0.40 0.80 0.80 1.00 1.00 0.60 0.60 0.80 0.60 0.60 0.80",
    "P7": "0.40 0.40 0.20 0.40 0.40 0.40 0.40 0.60 0.80 1.00 0.40 0.60 0.60 0.40 0.80 0.20 0.80",
    "P8": "0.25 0.50 0.50 0.50 0.25 0.25 0.25 0.75 0.75 0.75 0.50 0.50 0.50 0.75 0.50 0.75 0.50",
    "P9": "0.60 0.80 0.80 0.60 0.60 0.60 0.80 0.80 0.80 0.80 0.80 0.80 0.80 0.80 0.80 0.80 0.80",
    "P10": "1.00 1.00 1.00 1.00 1.00 1.00 1.00 1.00 1.00 1.00 1.00 1.00 1.00 1.00 1.00 1.00 1.00",
    "PMC": "5.33 6.15 5.47 4.88 4.80 5.13 6.15 7.48 7.77 6.97 6.38 6.50 6.75 7.58 7.37 6.68 7.23",
    "G": "4.67 3.85 4.53 5.12 5.20 4.87 3.85 2.52 2.23 3.03 3.62 3.50 3.25 2.42 2.63 3.32 2.77",
}


def golden_column(year: int):
    i = YEARS.index(year)
    return {name: row.split()[i] for name, row in GOLDEN_VALUES.items()}


def golden_card(schema, index: int, doc_id: str = None) -> Scorecard:
    """Scorecard for document index (0-based) setting the first c items of every main variable."""
    values = {}
    for main in schema.main_variables:
        _, counts = GOLDEN_COUNTS[main.id]
        for j, item in enumerate(main.items):
            values[item.id] = 1 if j < counts[index] else 0
    doc_id = doc_id or str(index + 1)
    return Scorecard(doc_id=doc_id, values=values, provenance={k: MANUAL for k in values})


@pytest.fixture(scope="session")
def default_schema():
    return load_schema(DEFAULT_SCHEMA)


@pytest.fixture(scope="session")
def golden_cards(default_schema):
    return [golden_card(default_schema, i) for i in range(17)]


def make_doc(doc_id: str, body: str, when: date = date(2020, 1, 1)) -> PolicyDocument:
    return PolicyDocument(id=doc_id, title=f"doc {doc_id}", issuer="issuer", release_date=when, goal="goal", body=body)


def stream(doc_id: str, tokens) -> TokenStream:
    return TokenStream(doc_id=doc_id, tokens=tuple(tokens))


@pytest.fixture
def write_corpus(tmp_path):
    """Write a manifest plus body files; entries are dicts, 'text' becomes the body file."""

    def _write(entries, dictionary=None, stopwords=None, name="manifest.yaml"):
        docs_dir = tmp_path / "docs"
        docs_dir.mkdir(exist_ok=True)
        records = []
        for position, entry in enumerate(entries, start=1):
            entry = dict(entry)
            text = entry.pop("text", None)
            raw = entry.pop("raw", None)
            record = {
                "id": str(position),
                "title": f"Policy {position}",
                "issuer": "State Council",
                "release_date": f"{2000 + position}-01-01",
                "goal": "goal",
                "body": f"docs/{position:02d}.txt",
            }
            record.update(entry)
            if raw is not None:
                (tmp_path / record["body"]).write_bytes(raw)
            elif text is not None:
                (tmp_path / record["body"]).write_text(text, encoding="utf-8")
            records.append(record)
        manifest = {"documents": records}
        if dictionary is not None:
            (tmp_path / "dictionary.txt").write_text("\n".join(dictionary) + "\n", encoding="utf-8")
            manifest["dictionary"] = "dictionary.txt"
        if stopwords is not None:
            (tmp_path / "stopwords.txt").write_text("\n".join(stopwords) + "\n", encoding="utf-8")
            manifest["stopwords"] = "stopwords.txt"
        path = tmp_path / name
        path.write_text(yaml.safe_dump(manifest, sort_keys=False, allow_unicode=True), encoding="utf-8")
        return path

    return _write


def random_schema(rng: np.random.Generator, max_main: int = 6, max_sub: int = 7):
    mains = []
    for i in range(1, int(rng.integers(1, max_main + 1)) + 1):
        if rng.random() < 0.2:
            mains.append({"id": f"M{i}", "name": f"main {i}", "direct": True})
            continue
        subs = [{"id": f"M{i}S{j}", "name": f"sub {j}"} for j in range(1, int(rng.integers(1, max_sub + 1)) + 1)]
        mains.append({"id": f"M{i}", "name": f"main {i}", "sub_variables": subs})
    return schema_from_dict({"name": "random", "main_variables": mains})


def random_card(rng: np.random.Generator, schema, doc_id: str = "r") -> Scorecard:
    values = {item_id: int(rng.integers(0, 2)) for item_id in schema.item_ids}
    return Scorecard(doc_id=doc_id, values=values, provenance={k: MANUAL for k in values})
