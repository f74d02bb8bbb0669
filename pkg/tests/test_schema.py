import pytest

from parcube import CubeSchema, DimensionSpec, MeasureSpec
from parcube.errors import SchemaError


def make_geo():
    return DimensionSpec(
        name="geo",
        levels=("city", "country"),
        members={"city": ("NYC", "SFO", "BER"), "country": ("US", "DE")},
        parents={"city": {"NYC": "US", "SFO": "US", "BER": "DE"}},
    )


def test_from_dict_roundtrip(f6_schema_doc):
    schema = CubeSchema.from_dict(f6_schema_doc)
    assert [d.name for d in schema.dimensions] == ["geo", "product", "quarter"]
    assert schema.measures[0].kind == "integer"
    again = CubeSchema.from_dict(schema.to_dict())
    assert again.to_dict() == schema.to_dict()


def test_member_interning_order():
    geo = make_geo()
    assert geo.member_index["city"] == {"NYC": 0, "SFO": 1, "BER": 2}
    assert geo.member_index["country"] == {"US": 0, "DE": 1}


def test_lift_composes_parent_chain():
    geo = make_geo()
    assert geo.lift("city", "country") == [0, 0, 1]
    assert geo.lift("city", "city") == [0, 1, 2]
    with pytest.raises(SchemaError):
        geo.lift("country", "city")


def test_deep_hierarchy_lift():
    dim = DimensionSpec(
        name="time",
        levels=("day", "month", "year"),
        members={
            "day": ("d1", "d2", "d3", "d4"),
            "month": ("m1", "m2"),
            "year": ("y",),
        },
        parents={
            "day": {"d1": "m1", "d2": "m1", "d3": "m2", "d4": "m2"},
            "month": {"m1": "y", "m2": "y"},
        },
    )
    assert dim.lift("day", "year") == [0, 0, 0, 0]
    assert dim.lift("month", "year") == [0, 0]
    assert dim.lift("day", "month") == [0, 0, 1, 1]


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d["dimensions"].clear(),
        lambda d: d["measures"].clear(),
        lambda d: d["measures"].append({"name": "sales", "kind": "integer"}),
        lambda d: d["dimensions"][0]["members"]["city"].append("NYC"),
        lambda d: d["dimensions"][0]["parents"]["city"].pop("NYC"),
        lambda d: d["dimensions"][0]["parents"]["city"].update({"NYC": "XX"}),
        lambda d: d["dimensions"][0].update({"levels": []}),
        lambda d: d["measures"][0].update({"kind": "decimal"}),
        lambda d: d["measures"][0].update({"name": ""}),
        lambda d: d["dimensions"][0].update({"name": "sales"}),
    ],
)
def test_schema_invariants_rejected(f6_schema_doc, mutate):
    import copy

    doc = copy.deepcopy(f6_schema_doc)
    mutate(doc)
    with pytest.raises(SchemaError):
        CubeSchema.from_dict(doc)


def test_reserved_level_name_rejected():
    with pytest.raises(SchemaError):
        DimensionSpec(name="d", levels=("ALL",), members={"ALL": ("x",)})


def test_from_json_errors():
    with pytest.raises(SchemaError):
        CubeSchema.from_json(b"not json")
    with pytest.raises(SchemaError):
        CubeSchema.from_json(b"[1,2]")
    with pytest.raises(SchemaError):
        CubeSchema.from_json(b"\xff\xfe")


def test_duplicate_names_across_kinds_rejected():
    with pytest.raises(SchemaError):
        CubeSchema(
            dimensions=[make_geo()],
            measures=[MeasureSpec("geo", "integer")],
        )
