import pytest

from parcube import CubeSchema, ParallelConfig, build_cube, cell, load_facts, validate
from parcube.errors import CoordinateError, PreconditionError, SchemaError

from conftest import F6_ROW_DICTS, F6_SCHEMA_DOC
from helpers import group_by_oracle


def test_build_f6_sum(f6_cube):
    assert len(f6_cube.cells) == 6
    assert cell(f6_cube, ("NYC", "A", "Q1")) == {"sales": 10}
    assert cell(f6_cube, ("SFO", "B", "Q2")) == {"sales": 60}
    total = sum(states[0].finalized() for states in f6_cube.cells.values())
    assert total == 210


def test_build_matches_group_by_oracle(f6_cube):
    oracle = group_by_oracle(
        F6_ROW_DICTS,
        F6_SCHEMA_DOC,
        {"geo": "city", "product": "product", "quarter": "quarter"},
        {"sales": "sum"},
    )
    named = {
        f6_cube.coordinate_names(k): f6_cube.finalized_cell(k)["sales"]
        for k in f6_cube.cells
    }
    assert named == {coord: c["sales"] for coord, c in oracle.items()}


def test_single_row_identity(f6_schema):
    facts = load_facts(b"geo,product,quarter,sales\nNYC,A,Q1,10\n", f6_schema)
    assert validate(facts).ok
    cube = build_cube(facts, {"sales": "sum"})
    assert len(cube.cells) == 1
    assert cell(cube, ("NYC", "A", "Q1")) == {"sales": 10}


def test_mean_cells(f6_facts):
    cube = build_cube(f6_facts, {"sales": "mean"})
    assert cell(cube, ("BER", "B", "Q2")) == {"sales": 50.0}
    from parcube import roll_up

    total = roll_up(roll_up(roll_up(cube, "geo", "ALL"), "product", "ALL"), "quarter", "ALL")
    assert total.finalized_cell(()) == {"sales": 35.0}


def test_empty_cell_is_none(f6_cube):
    assert cell(f6_cube, ("SFO", "A", "Q1")) is None


def test_wrong_arity_coordinate(f6_cube):
    with pytest.raises(CoordinateError):
        cell(f6_cube, ("NYC", "A"))
    with pytest.raises(CoordinateError):
        cell(f6_cube, ("NYC", "A", "Q1", "extra"))


def test_unknown_member_coordinate(f6_cube):
    with pytest.raises(CoordinateError):
        cell(f6_cube, ("LAX", "A", "Q1"))
    with pytest.raises(CoordinateError):
        cell(f6_cube, ("US", "A", "Q1"))  # country member at city level


def test_build_requires_validation(f6_schema, f6_csv):
    facts = load_facts(f6_csv.encode(), f6_schema)
    with pytest.raises(PreconditionError):
        build_cube(facts, {"sales": "sum"})


def test_build_rejects_invalid_facts(f6_schema, f6_csv):
    facts = load_facts((f6_csv + "LAX,A,Q1,5\n").encode(), f6_schema)
    assert not validate(facts).ok
    with pytest.raises(PreconditionError):
        build_cube(facts, {"sales": "sum"})


def test_build_rejects_unknown_measure(f6_facts):
    with pytest.raises(SchemaError):
        build_cube(f6_facts, {"sales": "sum", "revenue": "sum"})


def test_sum_conservation(f6_facts, f6_cube):
    column_sum = sum(f6_facts.measure_columns[0])
    cube_sum = sum(states[0].finalized() for states in f6_cube.cells.values())
    assert cube_sum == column_sum


def test_repeated_builds_identical(f6_facts):
    a = build_cube(f6_facts, {"sales": "sum"})
    b = build_cube(f6_facts, {"sales": "sum"})
    assert a.cells == b.cells
    assert a.levels == b.levels


def test_parallel_config_does_not_change_cells(f6_facts):
    a = build_cube(f6_facts, {"sales": "sum"}, ParallelConfig(worker_count=1, chunk_size=2))
    b = build_cube(f6_facts, {"sales": "sum"}, ParallelConfig(worker_count=4, chunk_size=2))
    assert a.cells == b.cells


def test_cell_count_bound(f6_cube, f6_facts):
    product = 1
    for dim in f6_facts.schema.dimensions:
        product *= len(dim.members[dim.base_level])
    assert len(f6_cube.cells) <= min(f6_facts.row_count, product)


def test_cube_retains_facts_handle(f6_cube, f6_facts):
    assert f6_cube.facts is f6_facts
