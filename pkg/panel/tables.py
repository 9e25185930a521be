#!/usr/bin/env python3
"""
Result and statistics tables as CSV (full precision) or Markdown (2 decimals, half-up)
"""

import logging
from pathlib import Path
from typing import List, Mapping, Optional, Sequence, Union

import pandas as pd

from core.errors import ReportError
from core.pmc import (
    PmcResult,
    StatsSummary,
    classify_intensity,
    display,
    surface_matrix,
    SURFACE_SIZE,
)
from services.storage import atomic_write_text, read_frame, save_frame

logger = logging.getLogger(__name__)

FORMATS = ("csv", "markdown")

STATS_HEADER = ["Variables", "Number", "Mean", "Standard deviation", "Minimum value", "Maximum value"]


def results_frame(results: Sequence[PmcResult]) -> pd.DataFrame:
    if not results:
        raise ReportError("no results to emit")
    main_ids = list(results[0].main_ids)
    rows = [
        [r.doc_id] + list(r.main_values) + [r.pmc, r.g, r.level.name]
        for r in results
    ]
    return pd.DataFrame(rows, columns=["doc_id"] + main_ids + ["PMC", "G", "level"])


def read_results(path: Union[str, Path]) -> List[PmcResult]:
    """Parse a results CSV written by emit_table back into PmcResults."""
    frame = read_frame(path, dtype={"doc_id": str}, float_precision="round_trip")
    required = {"doc_id", "PMC", "G", "level"}
    if not required.issubset(frame.columns):
        raise ReportError(f"{path} is not a results table")
    main_ids = tuple(c for c in frame.columns if c not in required)

    results = []
    for _, row in frame.iterrows():
        values = tuple(float(row[m]) for m in main_ids)
        g = float(row["G"])
        results.append(PmcResult(
            doc_id=str(row["doc_id"]),
            main_ids=main_ids,
            main_values=values,
            pmc=float(row["PMC"]),
            g=g,
            level=classify_intensity(g),
            surface=surface_matrix(values) if len(values) >= SURFACE_SIZE else None,
        ))
    return results


def _markdown(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    lines = [
        "| " + " | ".join(header) + " |",
        "|" + "|".join("---" for _ in header) + "|",
    ]
    lines.extend("| " + " | ".join(row) + " |" for row in rows)
    return "\n".join(lines) + "\n"


def results_markdown(results: Sequence[PmcResult], labels: Optional[Mapping[str, str]] = None) -> str:
    """Variables as rows, documents as columns."""
    if not results:
        raise ReportError("no results to emit")
    labels = labels or {}
    header = [""] + [labels.get(r.doc_id, r.doc_id) for r in results]
    rows = [
        [main_id] + [display(r.main_values[i]) for r in results]
        for i, main_id in enumerate(results[0].main_ids)
    ]
    rows.append(["PMC"] + [display(r.pmc) for r in results])
    rows.append(["G"] + [display(r.g) for r in results])
    return _markdown(header, rows)


def emit_table(
    results: Sequence[PmcResult],
    fmt: str,
    path: Union[str, Path],
    labels: Optional[Mapping[str, str]] = None,
) -> Path:
    if not results:
        raise ReportError("no results to emit")
    if fmt == "csv":
        return save_frame(path, results_frame(results))
    if fmt == "markdown":
        return atomic_write_text(path, results_markdown(results, labels))
    raise ReportError(f"unknown table format {fmt!r}")


def stats_markdown(summary: StatsSummary) -> str:
    rows = [
        [r.name, str(r.count), display(r.mean), display(r.sd), display(r.min), display(r.max)]
        for r in summary.rows
    ]
    return _markdown(STATS_HEADER, rows)


def emit_stats_table(summary: StatsSummary, fmt: str, path: Union[str, Path]) -> Path:
    if fmt == "csv":
        return save_frame(path, summary.to_frame())
    if fmt == "markdown":
        return atomic_write_text(path, stats_markdown(summary))
    raise ReportError(f"unknown table format {fmt!r}")
