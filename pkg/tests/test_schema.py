import pytest

from core.errors import InputValidationError, SchemaError
from core.schema import build_miot, load_schema, miot_csv, parse_miot, schema_from_dict

DEFAULT_COUNTS = {"P1": 6, "P2": 3, "P3": 5, "P4": 4, "P5": 5, "P6": 5, "P7": 5, "P8": 4, "P9": 5, "P10": 1}


def test_default_schema_shape(default_schema):
    assert default_schema.n == 10
    assert default_schema.counts() == DEFAULT_COUNTS
    assert len(default_schema.item_ids) == 43
    assert default_schema.main_ids == tuple(f"P{i}" for i in range(1, 11))


def test_direct_variable_scores_itself(default_schema):
    p10 = default_schema.main("P10")
    assert p10.direct
    assert [item.id for item in p10.items] == ["P10"]
    assert p10.items[0].rules.keywords == ("publicly released", "disclosure")


def test_rules_are_compiled_case_insensitive(default_schema):
    p11 = default_schema.main("P1").sub_variables[0]
    assert p11.id == "P11"
    assert p11.rules.compiled[0].search("We EXPECT steady issuance")


def test_minimal_schema():
    schema = schema_from_dict({"main_variables": [{"id": "A", "direct": True}]})
    assert schema.counts() == {"A": 1}
    assert schema.item_ids == ("A",)


def test_duplicate_ids_rejected():
    data = {
        "main_variables": [
            {"id": "P1", "sub_variables": [{"id": "P11"}, {"id": "P12"}]},
            {"id": "P2", "sub_variables": [{"id": "P11"}]},
        ]
    }
    with pytest.raises(SchemaError) as info:
        schema_from_dict(data)
    assert info.value.ids == ["P11"]


@pytest.mark.parametrize("main", [
    {"id": "P1"},
    {"id": "P1", "sub_variables": []},
    {"id": "P1", "direct": True, "sub_variables": [{"id": "P11"}]},
    {"name": "no id", "direct": True},
    {"id": "P1", "sub_variables": [{"id": "P11", "rules": {"patterns": ["(unclosed"]}}]},
])
def test_malformed_main_variables(main):
    with pytest.raises(SchemaError):
        schema_from_dict({"main_variables": [main]})


def test_no_main_variables():
    with pytest.raises(SchemaError):
        schema_from_dict({"name": "empty"})


def test_missing_schema_file(tmp_path):
    with pytest.raises(InputValidationError):
        load_schema(tmp_path / "absent.yaml")


def test_miot_layout(default_schema):
    lines = miot_csv(build_miot(default_schema)).splitlines()
    assert lines[0] == "P1,P11:1,P12:2,P13:3,P14:4,P15:5,P16:6"
    assert lines[3] == "P4,P41:1,P42:2,P43:3,P44:4"
    assert lines[-1] == "P10,P10:1"
    assert len(lines) == 10


def test_miot_parses_back(default_schema):
    table = build_miot(default_schema)
    assert parse_miot(miot_csv(table)) == table


def test_miot_rejects_misnumbered_slot():
    with pytest.raises(SchemaError):
        parse_miot("P1,P11:2\n")
