"""
PMC engine: main-variable values, PMC index, guarantee intensity G = 10 - PMC,
intensity levels, PMC-Surface and descriptive statistics.

All arithmetic is carried at full precision; rounding (half-up, 2 decimals)
only happens when a value is displayed.
"""

import logging
import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from core.errors import PmcError, ScorecardError
from core.schema import IndicatorSchema
from core.scoring import Scorecard, check_complete

logger = logging.getLogger(__name__)

PMC_MAX = 10.0
SURFACE_SIZE = 9


@dataclass(frozen=True)
class IntensityLevel:
    name: str
    low: float
    high: float
    closed_high: bool = False

    def contains(self, g: float) -> bool:
        if self.closed_high:
            return self.low <= g <= self.high
        return self.low <= g < self.high

    @property
    def interval(self) -> str:
        return f"[{self.low:g},{self.high:g}{']' if self.closed_high else ')'}"


# the top bracket is closed so that G = 10 still classifies
PERFECT = IntensityLevel("Perfect", 5.0, 10.0, closed_high=True)
GOOD = IntensityLevel("Good", 3.0, 5.0)
ACCEPTABLE = IntensityLevel("Acceptable", 1.0, 3.0)
LOW = IntensityLevel("Low", 0.0, 1.0)
LEVELS: Tuple[IntensityLevel, ...] = (PERFECT, GOOD, ACCEPTABLE, LOW)


@dataclass(frozen=True)
class PmcResult:
    doc_id: str
    main_ids: Tuple[str, ...]
    main_values: Tuple[float, ...]
    pmc: float
    g: float
    level: IntensityLevel
    surface: Optional[Tuple[Tuple[float, ...], ...]] = None

    def value(self, main_id: str) -> float:
        return self.main_values[self.main_ids.index(main_id)]


@dataclass(frozen=True)
class VariableStats:
    name: str
    count: int
    mean: float
    sd: float
    min: float
    max: float


@dataclass(frozen=True)
class StatsSummary:
    rows: Tuple[VariableStats, ...]

    def __getitem__(self, name: str) -> VariableStats:
        for row in self.rows:
            if row.name == name:
                return row
        raise KeyError(name)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(r.name, r.count, r.mean, r.sd, r.min, r.max) for r in self.rows],
            columns=["variable", "count", "mean", "sd", "min", "max"],
        )


def round_half_up(value: float, places: int = 2) -> Decimal:
    return Decimal(repr(float(value))).quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_UP)


def display(value: float, places: int = 2) -> str:
    rounded = round_half_up(value, places)
    if rounded.is_zero():
        rounded = abs(rounded)
    return f"{rounded:.{places}f}"


def main_variable_value(scorecard: Scorecard, main_id: str, schema: IndicatorSchema) -> float:
    """(sum_j P_ij) / n_i."""
    try:
        main = schema.main(main_id)
    except KeyError:
        raise PmcError(f"unknown main variable {main_id!r}") from None
    item_ids = [item.id for item in main.items]
    missing = [i for i in item_ids if i not in scorecard.values]
    if missing:
        raise ScorecardError("incomplete scorecard", scorecard.doc_id, missing)
    return sum(scorecard.values[i] for i in item_ids) / len(item_ids)


def main_values(scorecard: Scorecard, schema: IndicatorSchema) -> Tuple[float, ...]:
    missing = check_complete(scorecard, schema)
    if missing:
        raise ScorecardError("incomplete scorecard", scorecard.doc_id, missing)
    return tuple(main_variable_value(scorecard, m, schema) for m in schema.main_ids)


def pmc_index(scorecard: Scorecard, schema: IndicatorSchema) -> float:
    return math.fsum(main_values(scorecard, schema))


def guarantee_intensity(pmc: float) -> float:
    if not 0.0 <= pmc <= PMC_MAX:
        raise PmcError(f"PMC index {pmc!r} outside [0, 10]")
    return PMC_MAX - pmc


def classify_intensity(g: float) -> IntensityLevel:
    for level in LEVELS:
        if level.contains(g):
            return level
    raise PmcError(f"intensity {g!r} outside [0, 10]")


def surface_matrix(values: Sequence[float]) -> Tuple[Tuple[float, ...], ...]:
    """[[P1,P2,P3],[P4,P5,P6],[P7,P8,P9]] in schema order; P10 onward is left out."""
    if len(values) < SURFACE_SIZE:
        raise PmcError(f"PMC-Surface needs {SURFACE_SIZE} main-variable values, got {len(values)}")
    if len(values) != SURFACE_SIZE + 1:
        logger.warning("⚠️ Schema has %d main variables; surface uses the first %d", len(values), SURFACE_SIZE)
    grid = np.asarray(values[:SURFACE_SIZE], dtype=float).reshape(3, 3)
    return tuple(tuple(float(v) for v in row) for row in grid)


def compute_result(scorecard: Scorecard, schema: IndicatorSchema) -> PmcResult:
    values = main_values(scorecard, schema)
    pmc = math.fsum(values)
    g = guarantee_intensity(pmc)
    surface = surface_matrix(values) if len(values) >= SURFACE_SIZE else None
    return PmcResult(
        doc_id=scorecard.doc_id,
        main_ids=schema.main_ids,
        main_values=values,
        pmc=pmc,
        g=g,
        level=classify_intensity(g),
        surface=surface,
    )


def results_table(results: Sequence[PmcResult]) -> pd.DataFrame:
    """One row per document: main values, PMC and G at full precision."""
    if not results:
        raise PmcError("no PMC results")
    main_ids = list(results[0].main_ids)
    rows = [list(r.main_values) + [r.pmc, r.g] for r in results]
    return pd.DataFrame(rows, columns=main_ids + ["PMC", "G"], index=[r.doc_id for r in results])


def descriptive_stats(results: Sequence[PmcResult]) -> StatsSummary:
    """count, mean, sample sd (n - 1), min, max per main variable, PMC and G.

    A single result has sd 0.
    """
    table = results_table(results)
    described = table.agg(["count", "mean", "std", "min", "max"]).T
    rows = []
    for name, stats in described.iterrows():
        sd = float(stats["std"]) if len(results) > 1 else 0.0
        rows.append(VariableStats(
            name=str(name),
            count=int(stats["count"]),
            mean=float(stats["mean"]),
            sd=sd,
            min=float(stats["min"]),
            max=float(stats["max"]),
        ))
    return StatsSummary(rows=tuple(rows))


def level_surfaces(results: Sequence[PmcResult]) -> Dict[str, Tuple[Tuple[float, ...], ...]]:
    """Mean PMC-Surface per intensity level present, plus "All" across every document."""
    with_surface = [r for r in results if r.surface is not None]
    if not with_surface:
        raise PmcError("no results carry a PMC-Surface")

    def mean_of(group: List[PmcResult]):
        grid = np.mean([np.asarray(r.surface) for r in group], axis=0)
        return tuple(tuple(float(v) for v in row) for row in grid)

    surfaces = {}
    for level in LEVELS:
        group = [r for r in with_surface if r.level == level]
        if group:
            surfaces[level.name] = mean_of(group)
    surfaces["All"] = mean_of(with_surface)
    return surfaces
