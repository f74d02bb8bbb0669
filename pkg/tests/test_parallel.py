import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parcube import (
    CubeSchema,
    ParallelConfig,
    PartialAggregate,
    last_call_metadata,
    load_facts,
    merge_partials,
    parallel_group_aggregate,
    quicksort_par,
    quicksort_seq,
    validate,
)
from parcube.aggregate import AGG_SUM, new_state
from parcube.errors import (
    ConfigError,
    ContractError,
    MeasureOverflowError,
    PreconditionError,
    SchemaError,
)
from parcube.parallel import FilterPredicate

from conftest import F6_SCHEMA_DOC, F6_CSV, F6_ROW_DICTS
from helpers import group_by_oracle, insertion_sort

PAR2 = ParallelConfig(worker_count=2, sequential_cutoff=64)


# ---------------------------------------------------------------------------
# quicksort
# ---------------------------------------------------------------------------


def test_sort_tiny_examples():
    assert quicksort_seq([3, 1, 2]) == [1, 2, 3]
    assert quicksort_seq([]) == []
    assert quicksort_seq([5]) == [5]
    assert quicksort_par([3, 1, 2], PAR2) == [1, 2, 3]
    assert quicksort_par([], PAR2) == []


def test_sort_leaves_input_unmodified():
    values = [9, 4, 7, 1]
    quicksort_seq(values)
    assert values == [9, 4, 7, 1]
    quicksort_par(values, PAR2)
    assert values == [9, 4, 7, 1]


@pytest.mark.parametrize(
    "values",
    [
        [2, 2, 2, 2, 2],
        list(range(100)),
        list(range(100, 0, -1)),
        [1, 1, 2, 2, 1, 1, 2, 2] * 30,
        [-(2**63), 2**63 - 1, 0, -1, 1],
    ],
)
def test_sort_structured_inputs(values):
    expected = insertion_sort(values)
    assert quicksort_seq(values) == expected
    assert quicksort_par(values, PAR2) == expected


@settings(max_examples=150, deadline=None)
@given(st.lists(st.integers(-(2**63), 2**63 - 1), max_size=300))
def test_sort_equivalence_property(values):
    expected = sorted(values)
    assert quicksort_seq(values) == expected
    assert quicksort_par(values, ParallelConfig(worker_count=2, sequential_cutoff=32)) == expected


def test_par_equals_seq_on_seeded_arrays():
    rng = random.Random(7)
    for _ in range(40):
        n = rng.randrange(0, 3000)
        values = [rng.randrange(-(10**6), 10**6) for _ in range(n)]
        assert quicksort_par(values, PAR2) == quicksort_seq(values)


def test_worker_one_spawns_nothing():
    values = list(range(10_000, 0, -1))
    quicksort_par(values, ParallelConfig(worker_count=1, sequential_cutoff=128))
    meta = last_call_metadata()
    assert meta.task_spawns == 0
    assert meta.partitions == 1


def test_parallel_path_spawns_tasks():
    rng = random.Random(3)
    values = [rng.randrange(0, 100_000) for _ in range(20_000)]
    out = quicksort_par(values, ParallelConfig(worker_count=2, sequential_cutoff=1024))
    assert out == sorted(values)
    meta = last_call_metadata()
    assert meta.task_spawns >= 1
    assert meta.partitions >= meta.task_spawns


def test_small_input_stays_sequential():
    values = [3, 2, 1]
    quicksort_par(values, ParallelConfig(worker_count=8, sequential_cutoff=2048))
    assert last_call_metadata().task_spawns == 0


def test_config_validation():
    with pytest.raises(ConfigError):
        ParallelConfig(worker_count=0)
    with pytest.raises(ConfigError):
        ParallelConfig(sequential_cutoff=-1)
    with pytest.raises(ConfigError):
        ParallelConfig(chunk_size=0)


def test_denied_worker_pool_degrades_to_sequential(monkeypatch):
    # embeddings that forbid process spawning must still get correct,
    # identical results -- just without task spawns
    import parcube.parallel as par_mod

    def deny(workers):
        return None

    monkeypatch.setattr(par_mod, "_try_pool", deny)
    values = [9, 1, 8, 2] * 2000
    out = quicksort_par(values, ParallelConfig(worker_count=4, sequential_cutoff=64))
    assert out == sorted(values)
    assert last_call_metadata().task_spawns == 0

    facts = f6_facts()
    cells = parallel_group_aggregate(
        facts,
        base_levels(facts.schema),
        (),
        {"sales": "sum"},
        ParallelConfig(worker_count=4, chunk_size=2),
    )
    assert last_call_metadata().task_spawns == 0
    assert last_call_metadata().partitions == 3
    reference = parallel_group_aggregate(
        facts, base_levels(facts.schema), (), {"sales": "sum"},
        ParallelConfig(worker_count=1, chunk_size=2),
    )
    assert cells == reference


def test_half_million_element_sort():
    from collections import Counter

    from parcube.bench import SplitMix64, generate_array

    values = generate_array(500_000, 0, 100_000, SplitMix64(31))
    out = quicksort_seq(values)
    assert all(out[i] <= out[i + 1] for i in range(len(out) - 1))
    assert Counter(out) == Counter(values)  # a permutation, nothing lost
    # library-independent oracle on a 1,000-element prefix
    assert quicksort_seq(values[:1000]) == insertion_sort(values[:1000])
    par = quicksort_par(values, ParallelConfig(worker_count=8))
    assert par == out
    assert last_call_metadata().task_spawns >= 1


# ---------------------------------------------------------------------------
# grouped aggregation
# ---------------------------------------------------------------------------


def f6_facts():
    schema = CubeSchema.from_dict(F6_SCHEMA_DOC)
    facts = load_facts(F6_CSV.encode(), schema)
    assert validate(facts).ok
    return facts


def base_levels(schema):
    return {d.name: d.base_level for d in schema.dimensions}


def test_chunked_equals_single_partition():
    facts = f6_facts()
    levels = base_levels(facts.schema)
    whole = parallel_group_aggregate(
        facts, levels, (), {"sales": "sum"}, ParallelConfig(worker_count=1, chunk_size=6)
    )
    chunked = parallel_group_aggregate(
        facts, levels, (), {"sales": "sum"}, ParallelConfig(worker_count=1, chunk_size=2)
    )
    assert whole == chunked
    assert last_call_metadata().partitions == 3


def test_pool_path_matches_inline():
    facts = f6_facts()
    levels = base_levels(facts.schema)
    inline = parallel_group_aggregate(
        facts, levels, (), {"sales": "sum"}, ParallelConfig(worker_count=1, chunk_size=2)
    )
    pooled = parallel_group_aggregate(
        facts, levels, (), {"sales": "sum"}, ParallelConfig(worker_count=2, chunk_size=2)
    )
    assert last_call_metadata().task_spawns == 3
    assert inline == pooled


def test_aggregate_requires_validated_facts():
    schema = CubeSchema.from_dict(F6_SCHEMA_DOC)
    facts = load_facts(F6_CSV.encode(), schema)
    with pytest.raises(PreconditionError):
        parallel_group_aggregate(facts, base_levels(schema), (), {"sales": "sum"})


def test_aggregate_rejects_bad_agg_spec():
    facts = f6_facts()
    levels = base_levels(facts.schema)
    with pytest.raises(SchemaError):
        parallel_group_aggregate(facts, levels, (), {"revenue": "sum", "sales": "sum"})
    with pytest.raises(SchemaError):
        parallel_group_aggregate(facts, levels, (), {"sales": "median"})
    with pytest.raises(SchemaError):
        parallel_group_aggregate(facts, levels, (), {})


def test_aggregate_with_filter_and_levels():
    facts = f6_facts()
    schema = facts.schema
    levels = {"geo": "country", "product": "product", "quarter": None}
    filters = (FilterPredicate(dimension="quarter", level="quarter", members=frozenset({0})),)
    cells = parallel_group_aggregate(facts, levels, filters, {"sales": "sum"})
    oracle = group_by_oracle(
        F6_ROW_DICTS,
        F6_SCHEMA_DOC,
        {"geo": "country", "product": "product", "quarter": None},
        {"sales": "sum"},
        filters=[("quarter", "quarter", {"Q1"})],
    )
    named = {
        (
            schema.dimensions[0].members["country"][k[0]],
            schema.dimensions[1].members["product"][k[1]],
        ): states[0].finalized()
        for k, states in cells.items()
    }
    assert named == {coord: cell["sales"] for coord, cell in oracle.items()}


def random_fact_rows(rng, n, cards):
    rows = []
    for _ in range(n):
        rows.append(
            {
                **{f"dim{d}": f"m{rng.randrange(c)}" for d, c in enumerate(cards)},
                "value": rng.randrange(-1000, 1000),
            }
        )
    return rows


def synthetic_schema_doc(cards):
    return {
        "dimensions": [
            {
                "name": f"dim{d}",
                "levels": [f"dim{d}"],
                "members": {f"dim{d}": [f"m{i}" for i in range(c)]},
            }
            for d, c in enumerate(cards)
        ],
        "measures": [{"name": "value", "kind": "integer"}],
    }


@pytest.mark.parametrize("fn", ["sum", "count", "min", "max", "mean"])
def test_aggregate_matches_brute_force_oracle(fn):
    rng = random.Random(11)
    cards = (4, 3, 2)
    rows = random_fact_rows(rng, 500, cards)
    doc = synthetic_schema_doc(cards)
    schema = CubeSchema.from_dict(doc)
    csv_text = "dim0,dim1,dim2,value\n" + "\n".join(
        f"{r['dim0']},{r['dim1']},{r['dim2']},{r['value']}" for r in rows
    )
    facts = load_facts(csv_text.encode(), schema)
    assert validate(facts).ok
    cells = parallel_group_aggregate(
        facts,
        base_levels(schema),
        (),
        {"value": fn},
        ParallelConfig(worker_count=2, chunk_size=64),
    )
    oracle = group_by_oracle(rows, doc, {f"dim{d}": f"dim{d}" for d in range(3)}, {"value": fn})
    named = {
        tuple(f"m{i}" for i in key): states[0].finalized() for key, states in cells.items()
    }
    assert named == {coord: cell["value"] for coord, cell in oracle.items()}


def test_overflow_names_measure_and_coordinate():
    doc = synthetic_schema_doc((2,))
    schema = CubeSchema.from_dict(doc)
    csv_text = "dim0,value\n" + "\n".join("m1,900000000000000000" for _ in range(11))
    facts = load_facts(csv_text.encode(), schema)
    assert validate(facts).ok
    with pytest.raises(MeasureOverflowError) as err:
        parallel_group_aggregate(facts, base_levels(schema), (), {"value": "sum"})
    assert err.value.measure == "value"
    assert err.value.coordinate == ("m1",)


def test_overflow_detected_at_merge():
    doc = synthetic_schema_doc((2,))
    schema = CubeSchema.from_dict(doc)
    # two partitions of 6 rows each stay in range; the merged total overflows
    csv_text = "dim0,value\n" + "\n".join("m0,900000000000000000" for _ in range(12))
    facts = load_facts(csv_text.encode(), schema)
    assert validate(facts).ok
    with pytest.raises(MeasureOverflowError) as err:
        parallel_group_aggregate(
            facts,
            base_levels(schema),
            (),
            {"value": "sum"},
            ParallelConfig(worker_count=1, chunk_size=6),
        )
    assert err.value.measure == "value"
    assert err.value.coordinate == ("m0",)


# ---------------------------------------------------------------------------
# merge_partials
# ---------------------------------------------------------------------------


def sum_state(value):
    state = new_state(AGG_SUM, "integer")
    state.add(value)
    return state


def test_merge_identity():
    cells = {(0,): (sum_state(10),)}
    merged_map = merge_partials([PartialAggregate(0, cells)])
    assert merged_map == cells
    # first-insert copies: sources must stay untouched by later mutation
    merged_map[(0,)][0].add(99)
    assert cells[(0,)][0].finalized() == 10


def test_merge_disjoint_union():
    a = PartialAggregate(0, {(0,): (sum_state(1),)})
    b = PartialAggregate(1, {(1,): (sum_state(2),)})
    out = merge_partials([a, b])
    assert {k: s[0].finalized() for k, s in out.items()} == {(0,): 1, (1,): 2}


def test_merge_shared_coordinate_sums():
    a = PartialAggregate(0, {(0, 0, 0): (sum_state(10),)})
    b = PartialAggregate(1, {(0, 0, 0): (sum_state(5),)})
    out = merge_partials([a, b])
    assert out[(0, 0, 0)][0].finalized() == 15


def test_merge_duplicate_partition_rejected():
    a = PartialAggregate(0, {})
    with pytest.raises(ContractError):
        merge_partials([a, PartialAggregate(0, {})])


def test_merge_non_dense_rejected():
    with pytest.raises(ContractError):
        merge_partials([PartialAggregate(1, {})])
    with pytest.raises(ContractError):
        merge_partials([PartialAggregate(0, {}), PartialAggregate(2, {})])
