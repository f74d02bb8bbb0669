"""Fork-join data-parallel kernels: quicksort and partitioned aggregation.

All parallelism in the package lives here. The model is caller-blocking
fork-join over a pool of OS processes: CPython threads cannot run
pure-Python compute on multiple cores, so workers are forked per call and
never outlive it. Every kernel is deterministic by construction:

* sorting is by value, so any parallel schedule yields the sequential
  answer;
* grouped aggregation splits rows into contiguous partitions whose
  boundaries depend only on (row count, chunk_size), aggregates each
  partition independently, and merges partials in ascending partition
  order -- so results are bitwise stable across runs and worker counts,
  including compensated real sums.

``worker_count=1`` short-circuits to plain sequential execution (zero task
spawns) while still flowing through the same partition/merge pipeline, which
is what makes the determinism contract hold across worker counts.
"""

from __future__ import annotations

import multiprocessing
import os
import threading
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .aggregate import AGG_FUNCTIONS, AccumulatorOverflow, AggregateState
from .errors import (
    ConfigError,
    ContractError,
    MeasureOverflowError,
    PreconditionError,
    SchemaError,
)
from .facts import FactTable

_INSERTION_CUTOFF = 24


def _detected_workers() -> int:
    return os.cpu_count() or 1


def _pool_context():
    methods = multiprocessing.get_all_start_methods()
    return multiprocessing.get_context("fork" if "fork" in methods else None)


def _try_pool(workers: int) -> ProcessPoolExecutor | None:
    """Best-effort pool creation: embeddings that forbid spawning worker
    processes get sequential execution with identical results instead of a
    crash. Failures inside tasks still propagate normally."""
    try:
        return ProcessPoolExecutor(max_workers=workers, mp_context=_pool_context())
    except (OSError, PermissionError):
        return None


@dataclass(frozen=True)
class ParallelConfig:
    """Execution knobs for the fork-join kernels.

    ``sequential_cutoff`` is the sub-problem size at or below which sorting
    stays sequential (no task spawn); ``chunk_size`` is the number of fact
    rows per aggregation partition and therefore the determinism grain.
    """

    worker_count: int = field(default_factory=_detected_workers)
    sequential_cutoff: int = 2048
    chunk_size: int = 65536

    def __post_init__(self):
        for name in ("worker_count", "sequential_cutoff", "chunk_size"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")


@dataclass(frozen=True)
class CallMetadata:
    """Introspection counters for the most recent kernel call on this thread."""

    task_spawns: int
    partitions: int


_local = threading.local()


def _record(task_spawns: int, partitions: int) -> None:
    _local.meta = CallMetadata(task_spawns=task_spawns, partitions=partitions)


def last_call_metadata() -> CallMetadata | None:
    return getattr(_local, "meta", None)


# ---------------------------------------------------------------------------
# Quicksort
# ---------------------------------------------------------------------------


def _partition(a: list, lo: int, hi: int) -> tuple[int, int]:
    """Median-of-three Hoare partition; returns (i, j) with j < i such that
    a[lo..j] <= pivot <= a[i..hi] and anything between is pivot-equal."""
    mid = (lo + hi) >> 1
    if a[mid] < a[lo]:
        a[mid], a[lo] = a[lo], a[mid]
    if a[hi] < a[lo]:
        a[hi], a[lo] = a[lo], a[hi]
    if a[hi] < a[mid]:
        a[hi], a[mid] = a[mid], a[hi]
    pivot = a[mid]
    i, j = lo, hi
    while i <= j:
        while a[i] < pivot:
            i += 1
        while a[j] > pivot:
            j -= 1
        if i <= j:
            a[i], a[j] = a[j], a[i]
            i += 1
            j -= 1
    return i, j


def _insertion_range(a: list, lo: int, hi: int) -> None:
    for k in range(lo + 1, hi + 1):
        v = a[k]
        m = k - 1
        while m >= lo and a[m] > v:
            a[m + 1] = a[m]
            m -= 1
        a[m + 1] = v


def _sort_range(a: list, lo: int, hi: int) -> None:
    """Iterative quicksort over a[lo..hi]; small runs finish by insertion.

    Pushes the larger side and keeps working the smaller, bounding the
    explicit stack at O(log n) regardless of pivot luck.
    """
    if hi - lo < 1:
        return
    stack = [(lo, hi)]
    while stack:
        lo, hi = stack.pop()
        while hi - lo >= _INSERTION_CUTOFF:
            i, j = _partition(a, lo, hi)
            if j - lo < hi - i:
                if i < hi:
                    stack.append((i, hi))
                hi = j
            else:
                if lo < j:
                    stack.append((lo, j))
                lo = i
        _insertion_range(a, lo, hi)


def _sorted_segment(segment: list) -> list:
    _sort_range(segment, 0, len(segment) - 1)
    return segment


def quicksort_seq(values: Sequence[int]) -> list[int]:
    """Sequential quicksort; returns a sorted copy, input untouched."""
    arr = list(values)
    _sort_range(arr, 0, len(arr) - 1)
    _record(task_spawns=0, partitions=1)
    return arr


def quicksort_par(values: Sequence[int], cfg: ParallelConfig | None = None) -> list[int]:
    """Fork-join quicksort; element-for-element equal to :func:`quicksort_seq`.

    The coordinator partitions until segments reach the spawn grain, then
    ships only segments larger than ``sequential_cutoff`` to worker
    processes; smaller leftovers are sorted inline. Partitioning places
    every segment at its final position, so the splice-back needs no merge.
    """
    cfg = cfg or ParallelConfig()
    arr = list(values)
    n = len(arr)
    if cfg.worker_count == 1 or n <= cfg.sequential_cutoff:
        _sort_range(arr, 0, n - 1)
        _record(task_spawns=0, partitions=1)
        return arr

    # Oversubscribe 4x for load balance, but never spawn below the cutoff.
    grain = max(cfg.sequential_cutoff, -(-n // (cfg.worker_count * 4)))
    segments: list[tuple[int, int]] = []
    stack = [(0, n - 1)]
    while stack:
        lo, hi = stack.pop()
        while hi - lo + 1 > grain:
            i, j = _partition(arr, lo, hi)
            if j - lo < hi - i:
                if i < hi:
                    stack.append((i, hi))
                hi = j
            else:
                if lo < j:
                    stack.append((lo, j))
                lo = i
        if lo <= hi:
            segments.append((lo, hi))

    spawn = [(lo, hi) for lo, hi in segments if hi - lo + 1 > cfg.sequential_cutoff]
    inline = [(lo, hi) for lo, hi in segments if hi - lo + 1 <= cfg.sequential_cutoff]
    pool = _try_pool(min(cfg.worker_count, len(spawn))) if spawn else None
    if pool is not None:
        with pool:
            futures = [
                (lo, hi, pool.submit(_sorted_segment, arr[lo : hi + 1])) for lo, hi in spawn
            ]
            for lo, hi in inline:
                _sort_range(arr, lo, hi)
            for lo, hi, fut in futures:
                arr[lo : hi + 1] = fut.result()
        spawned = len(spawn)
    else:
        for lo, hi in spawn + inline:
            _sort_range(arr, lo, hi)
        spawned = 0
    _record(task_spawns=spawned, partitions=len(segments))
    return arr


# ---------------------------------------------------------------------------
# Partitioned grouped aggregation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FilterPredicate:
    """Conjunctive restriction: the fact's member, lifted to ``level``,
    must land in ``members`` (interned indices at that level)."""

    dimension: str
    level: str
    members: frozenset[int]


@dataclass
class PartialAggregate:
    """One partition's sparse cell map; merged in ascending index order."""

    partition_index: int
    cells: dict[tuple[int, ...], tuple[AggregateState, ...]]


def _aggregate_rows(
    filter_pairs: list,
    lift_cols: list,
    measure_cols: list,
    start: int,
    end: int,
    fn_kinds: list,
    measure_names: tuple,
    coord_names: tuple,
) -> dict:
    cells: dict = {}
    for i in range(start, end):
        keep = True
        for allowed, col in filter_pairs:
            if not allowed[col[i]]:
                keep = False
                break
        if not keep:
            continue
        key = tuple(lift[col[i]] for lift, col in lift_cols)
        states = cells.get(key)
        if states is None:
            states = cells[key] = tuple(AggregateState(fn, kind) for fn, kind in fn_kinds)
        for m, col in enumerate(measure_cols):
            try:
                states[m].add(col[i])
            except AccumulatorOverflow:
                coordinate = tuple(coord_names[d][key[d]] for d in range(len(key)))
                raise MeasureOverflowError(
                    f"measure {measure_names[m]!r} overflowed the signed 64-bit "
                    f"accumulator at coordinate {coordinate}",
                    measure=measure_names[m],
                    coordinate=coordinate,
                ) from None
    return cells


def _aggregate_task(payload: tuple) -> tuple[int, dict]:
    index, filter_pairs, lift_cols, measure_cols, rows, fn_kinds, measure_names, coord_names = payload
    cells = _aggregate_rows(
        filter_pairs, lift_cols, measure_cols, 0, rows, fn_kinds, measure_names, coord_names
    )
    return index, cells


def merge_partials(
    partials: Iterable[PartialAggregate],
) -> dict[tuple[int, ...], tuple[AggregateState, ...]]:
    """Reduce partials into one cell map, ascending partition order.

    Indices must be dense 0..P-1; a repeated index is a contract violation.
    Source states are never mutated -- first occurrence of a coordinate is
    copied, later ones are merged in.
    """
    partials = list(partials)
    seen: set[int] = set()
    for p in partials:
        if p.partition_index in seen:
            raise ContractError(f"duplicate partition index {p.partition_index}")
        seen.add(p.partition_index)
    expected = list(range(len(partials)))
    if [p.partition_index for p in partials] != expected:
        raise ContractError(
            f"partition indices must be dense and ascending, got "
            f"{[p.partition_index for p in partials]}"
        )
    out: dict = {}
    for p in partials:
        for key, states in p.cells.items():
            current = out.get(key)
            if current is None:
                out[key] = tuple(s.copy() for s in states)
            else:
                for m, incoming in enumerate(states):
                    try:
                        current[m].merge_in_place(incoming)
                    except AccumulatorOverflow:
                        raise MeasureOverflowError(
                            f"measure #{m} overflowed the signed 64-bit accumulator "
                            f"while merging partition {p.partition_index} at {key}",
                            measure=f"#{m}",
                            coordinate=key,
                        ) from None
    return out


def parallel_group_aggregate(
    facts: FactTable,
    levels: Mapping[str, str | None],
    filters: Iterable[FilterPredicate],
    aggregations: Mapping[str, str],
    cfg: ParallelConfig | None = None,
) -> dict[tuple[int, ...], tuple[AggregateState, ...]]:
    """Group facts by their coordinates at ``levels`` and aggregate.

    ``levels`` assigns each dimension a current level name or ``None`` for
    an absent (rolled-away) dimension; coordinates carry one component per
    retained dimension in schema order. ``filters`` restrict rows before
    grouping. Rows are cut into ``ceil(N / chunk_size)`` contiguous
    partitions, aggregated independently, and merged ascending -- the same
    pipeline whether work runs inline or on the pool.
    """
    if not facts.validated_ok:
        raise PreconditionError(
            "facts must pass validation before aggregation; run validate() first"
        )
    cfg = cfg or ParallelConfig()
    schema = facts.schema

    for name, fn in aggregations.items():
        if name not in schema.measure_index:
            raise SchemaError(f"aggregation names unknown measure {name!r}")
        if fn not in AGG_FUNCTIONS:
            raise SchemaError(f"unknown aggregate function {fn!r} for measure {name!r}")
    missing = [m.name for m in schema.measures if m.name not in aggregations]
    if missing:
        raise SchemaError(f"measures {missing} have no aggregation function")

    lift_specs: list[tuple[int, list[int]]] = []
    coord_names: list[tuple[str, ...]] = []
    for d, dim in enumerate(schema.dimensions):
        level = levels.get(dim.name)
        if level is None:
            continue
        if level not in dim.level_pos:
            raise SchemaError(f"dimension {dim.name!r} has no level {level!r}")
        lift_specs.append((d, dim.lift(dim.base_level, level)))
        coord_names.append(dim.members[level])

    filter_specs: list[tuple[int, list[bool]]] = []
    for f in filters:
        dim = schema.dimension(f.dimension)
        lift = dim.lift(dim.base_level, f.level)
        allowed = [x in f.members for x in lift]
        filter_specs.append((schema.dim_index[f.dimension], allowed))

    fn_kinds = [(aggregations[m.name], m.kind) for m in schema.measures]
    measure_names = tuple(m.name for m in schema.measures)
    coord_names_t = tuple(coord_names)

    n = facts.row_count
    chunk = cfg.chunk_size
    starts = list(range(0, n, chunk)) or [0]
    ranges = [(k, s, min(n, s + chunk)) for k, s in enumerate(starts)]

    interned = facts.interned
    assert interned is not None
    partials: list[PartialAggregate | None] = [None] * len(ranges)
    spawns = 0
    pool = None
    if cfg.worker_count > 1 and len(ranges) > 1:
        pool = _try_pool(min(cfg.worker_count, len(ranges)))
    if pool is not None:
        def payload(k: int, s: int, e: int) -> tuple:
            return (
                k,
                [(allowed, interned[d][s:e]) for d, allowed in filter_specs],
                [(lift, interned[d][s:e]) for d, lift in lift_specs],
                [col[s:e] for col in facts.measure_columns],
                e - s,
                fn_kinds,
                measure_names,
                coord_names_t,
            )

        with pool:
            futures = [pool.submit(_aggregate_task, payload(k, s, e)) for k, s, e in ranges]
            spawns = len(futures)
            for fut in futures:
                index, cells = fut.result()
                partials[index] = PartialAggregate(partition_index=index, cells=cells)
    else:
        filter_pairs = [(allowed, interned[d]) for d, allowed in filter_specs]
        lift_cols = [(lift, interned[d]) for d, lift in lift_specs]
        for k, s, e in ranges:
            cells = _aggregate_rows(
                filter_pairs,
                lift_cols,
                facts.measure_columns,
                s,
                e,
                fn_kinds,
                measure_names,
                coord_names_t,
            )
            partials[k] = PartialAggregate(partition_index=k, cells=cells)

    try:
        result = merge_partials(partials)  # type: ignore[arg-type]
    except MeasureOverflowError as exc:
        # merge_partials only knows positions; restore names for the caller
        if isinstance(exc.measure, str) and exc.measure.startswith("#"):
            m = int(exc.measure[1:])
            key = exc.coordinate
            coordinate = tuple(coord_names_t[d][key[d]] for d in range(len(key)))
            raise MeasureOverflowError(
                f"measure {measure_names[m]!r} overflowed the signed 64-bit "
                f"accumulator at coordinate {coordinate}",
                measure=measure_names[m],
                coordinate=coordinate,
            ) from None
        raise
    _record(task_spawns=spawns, partitions=len(ranges))
    return result
