import pytest

from core.errors import ReportError
from core.pmc import compute_result, descriptive_stats
from panel.tables import (
    STATS_HEADER,
    emit_stats_table,
    emit_table,
    read_results,
    results_frame,
    results_markdown,
    stats_markdown,
)
from tests.conftest import GOLDEN_VALUES, YEARS, golden_card


@pytest.fixture(scope="module")
def results(default_schema):
    return [compute_result(golden_card(default_schema, i), default_schema) for i in range(17)]


@pytest.fixture(scope="module")
def year_labels():
    return {str(i + 1): str(year) for i, year in enumerate(YEARS)}


def test_markdown_matches_golden_rows(results, year_labels):
    lines = results_markdown(results, year_labels).splitlines()
    assert lines[0] == "|  | " + " | ".join(str(y) for y in YEARS) + " |"
    body = {line.split(" | ")[0].lstrip("| "): line for line in lines[2:]}
    for name, row in GOLDEN_VALUES.items():
        assert body[name] == f"| {name} | " + " | ".join(row.split()) + " |"


def test_markdown_defaults_to_doc_ids(results):
    header = results_markdown(results[:2]).splitlines()[0]
    assert header == "|  | 1 | 2 |"


def test_csv_keeps_full_precision(results, tmp_path):
    path = emit_table(results, "csv", tmp_path / "results.csv")
    back = read_results(path)
    assert [r.doc_id for r in back] == [r.doc_id for r in results]
    for original, parsed in zip(results, back):
        assert parsed.pmc == original.pmc
        assert parsed.g == original.g
        assert parsed.main_values == original.main_values
        assert parsed.level == original.level
        assert parsed.surface == original.surface


def test_results_frame_columns(results):
    frame = results_frame(results)
    assert list(frame.columns) == ["doc_id"] + [f"P{i}" for i in range(1, 11)] + ["PMC", "G", "level"]
    assert frame["level"].iloc[3] == "Perfect"


def test_read_results_rejects_other_tables(tmp_path):
    path = tmp_path / "other.csv"
    path.write_text("a,b\n1,2\n", encoding="utf-8")
    with pytest.raises(ReportError):
        read_results(path)


def test_stats_markdown(results):
    lines = stats_markdown(descriptive_stats(results)).splitlines()
    assert lines[0] == "| " + " | ".join(STATS_HEADER) + " |"
    assert "| PMC | 17 | 6.39 | 0.97 | 4.80 | 7.77 |" in lines
    assert "| P10 | 17 | 1.00 | 0.00 | 1.00 | 1.00 |" in lines


def test_stats_csv(results, tmp_path):
    path = emit_stats_table(descriptive_stats(results), "csv", tmp_path / "stats.csv")
    assert path.read_text(encoding="utf-8").splitlines()[0] == "variable,count,mean,sd,min,max"


@pytest.mark.parametrize("emit", [emit_table, emit_stats_table])
def test_unknown_format(results, tmp_path, emit):
    payload = results if emit is emit_table else descriptive_stats(results)
    with pytest.raises(ReportError):
        emit(payload, "html", tmp_path / "x.html")


def test_empty_results(tmp_path):
    with pytest.raises(ReportError):
        emit_table([], "csv", tmp_path / "x.csv")


def test_writes_leave_no_temp_files(results, tmp_path):
    emit_table(results, "markdown", tmp_path / "table.md")
    assert sorted(p.name for p in tmp_path.iterdir()) == ["table.md"]
