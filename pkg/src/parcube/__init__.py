"""parcube: in-memory OLAP cubes with deterministic parallel aggregation.

Layers, bottom up: schema/facts declaration and validation, exact
aggregate states, the fork-join parallel engine, cube construction and the
OLAP operations, the shared query-document executor, the benchmark
harness, and the embeddable byte-buffer bridge (served over HTTP by
:mod:`parcube.service`).
"""

from .aggregate import AGG_COUNT, AGG_FUNCTIONS, AGG_MAX, AGG_MEAN, AGG_MIN, AGG_SUM, AggregateState
from .bridge import BridgeHost, BridgeModule
from .cube import Cube, build_cube, cell
from .errors import CubeError
from .facts import FactTable, ValidationReport, load_facts, validate
from .ops import CubeView, dice, drill_down, pivot, roll_up, slice, to_view
from .parallel import (
    CallMetadata,
    FilterPredicate,
    ParallelConfig,
    PartialAggregate,
    last_call_metadata,
    merge_partials,
    parallel_group_aggregate,
    quicksort_par,
    quicksort_seq,
)
from .query import canonical_json_bytes, run_operations, run_query
from .schema import ALL_LEVEL, CubeSchema, DimensionSpec, MeasureSpec

__version__ = "0.1.0"

__all__ = [
    "AGG_COUNT",
    "AGG_FUNCTIONS",
    "AGG_MAX",
    "AGG_MEAN",
    "AGG_MIN",
    "AGG_SUM",
    "ALL_LEVEL",
    "AggregateState",
    "BridgeHost",
    "BridgeModule",
    "CallMetadata",
    "Cube",
    "CubeError",
    "CubeSchema",
    "CubeView",
    "DimensionSpec",
    "FactTable",
    "FilterPredicate",
    "MeasureSpec",
    "ParallelConfig",
    "PartialAggregate",
    "ValidationReport",
    "build_cube",
    "canonical_json_bytes",
    "cell",
    "dice",
    "drill_down",
    "last_call_metadata",
    "load_facts",
    "merge_partials",
    "parallel_group_aggregate",
    "pivot",
    "quicksort_par",
    "quicksort_seq",
    "roll_up",
    "run_operations",
    "run_query",
    "slice",
    "to_view",
    "validate",
]
