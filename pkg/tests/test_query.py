import json

import pytest

from parcube import canonical_json_bytes, run_operations, run_query
from parcube.errors import AxisError, FilterError, QueryError, SchemaError
from parcube.query import parse_query_document


def grid_total(result, measure="sales"):
    return sum(
        cell[measure] for row in result["values"] for cell in row if cell is not None
    )


def test_empty_operations_is_base_full_view(f6_schema, f6_facts):
    result = run_query(f6_schema, f6_facts, [])
    assert result["row_axes"] == ["geo", "product", "quarter"]
    assert result["col_axes"] == []
    assert grid_total(result) == 210
    assert len(result["row_headers"]) == 6


def test_slice_then_view(f6_schema, f6_facts):
    doc = [
        {"op": "slice", "dimension": "quarter", "member": "Q1"},
        {"op": "view", "rows": ["geo", "product"], "cols": []},
    ]
    result = run_query(f6_schema, f6_facts, doc)
    assert grid_total(result) == 70
    assert result["row_headers"] == [["NYC", "A"], ["NYC", "B"], ["BER", "A"]]


def test_rollup_updates_default_axes(f6_schema, f6_facts):
    doc = [
        {"op": "rollup", "dimension": "geo", "level": "country"},
        {"op": "rollup", "dimension": "product", "level": "ALL"},
    ]
    result = run_query(f6_schema, f6_facts, doc)
    assert result["row_axes"] == ["geo", "quarter"]
    assert grid_total(result) == 210


def test_drilldown_reattaches_on_row_shelf(f6_schema, f6_facts):
    doc = [
        {"op": "rollup", "dimension": "quarter", "level": "ALL"},
        {"op": "drilldown", "dimension": "quarter", "level": "quarter"},
    ]
    result = run_query(f6_schema, f6_facts, doc)
    assert result["row_axes"] == ["geo", "product", "quarter"]
    assert grid_total(result) == 210


def test_pivot_in_document(f6_schema, f6_facts):
    doc = [
        {"op": "view", "rows": ["geo", "product"], "cols": ["quarter"]},
        {"op": "pivot", "rows": ["quarter"], "cols": ["geo", "product"]},
    ]
    result = run_query(f6_schema, f6_facts, doc)
    assert result["row_axes"] == ["quarter"]
    assert result["col_axes"] == ["geo", "product"]
    assert grid_total(result) == 210


def test_pivot_requires_permutation(f6_schema, f6_facts):
    doc = [
        {"op": "view", "rows": ["geo", "product"], "cols": ["quarter"]},
        {"op": "pivot", "rows": ["geo"], "cols": ["quarter"]},
    ]
    with pytest.raises(AxisError):
        run_query(f6_schema, f6_facts, doc)


def test_aggregation_override(f6_schema, f6_facts):
    doc = {
        "aggregations": {"sales": "mean"},
        "operations": [
            {"op": "rollup", "dimension": "geo", "level": "ALL"},
            {"op": "rollup", "dimension": "product", "level": "ALL"},
            {"op": "rollup", "dimension": "quarter", "level": "ALL"},
        ],
    }
    result = run_query(f6_schema, f6_facts, doc)
    assert result["values"] == [[{"sales": 35.0}]]


def test_dice_in_document(f6_schema, f6_facts):
    doc = [{"op": "dice", "filter": {"product": ["A"], "quarter": ["Q2"]}}]
    result = run_query(f6_schema, f6_facts, doc)
    assert grid_total(result) == 30


def test_malformed_documents_rejected():
    with pytest.raises(QueryError):
        parse_query_document("nope")
    with pytest.raises(QueryError):
        parse_query_document({"operations": "nope"})
    with pytest.raises(QueryError):
        parse_query_document([{"noop": 1}])
    with pytest.raises(QueryError):
        parse_query_document({"aggregations": [1]})


def test_unknown_op_and_missing_args(f6_schema, f6_facts):
    with pytest.raises(QueryError):
        run_query(f6_schema, f6_facts, [{"op": "transmogrify"}])
    with pytest.raises(QueryError):
        run_query(f6_schema, f6_facts, [{"op": "slice", "dimension": "quarter"}])
    with pytest.raises(QueryError):
        run_query(f6_schema, f6_facts, [{"op": "dice"}])


def test_engine_errors_pass_through(f6_schema, f6_facts):
    with pytest.raises(SchemaError):
        run_query(f6_schema, f6_facts, [{"op": "rollup", "dimension": "color", "level": "ALL"}])
    with pytest.raises(FilterError):
        run_query(f6_schema, f6_facts, [{"op": "dice", "filter": {"product": []}}])


def test_reused_base_cube_matches_fresh_build(f6_schema, f6_facts, f6_cube):
    doc = [{"op": "slice", "dimension": "quarter", "member": "Q1"}]
    fresh = run_query(f6_schema, f6_facts, doc)
    reused = run_query(f6_schema, f6_facts, doc, base=f6_cube)
    assert canonical_json_bytes(fresh) == canonical_json_bytes(reused)


def test_canonical_json_is_stable():
    a = canonical_json_bytes({"b": 1, "a": [1.5, None, "x"]})
    b = canonical_json_bytes(json.loads(a.decode("utf-8")))
    assert a == b == b'{"a":[1.5,null,"x"],"b":1}'


def test_canonical_json_utf8():
    assert canonical_json_bytes({"k": "münchen"}) == '{"k":"münchen"}'.encode("utf-8")


def test_run_operations_immutability(f6_cube):
    before = dict(f6_cube.cells)
    run_operations(f6_cube, [{"op": "slice", "dimension": "quarter", "member": "Q1"}])
    assert f6_cube.cells == before
