"""Query documents and result documents -- the shared wire format.

A query document is either a bare list of operations or an object::

    {"aggregations": {"sales": "sum"}, "operations": [ ... ]}

with operations drawn from::

    {"op": "rollup",    "dimension": d, "level": L | "ALL"}
    {"op": "drilldown", "dimension": d, "level": L}
    {"op": "slice",     "dimension": d, "member": m}
    {"op": "dice",      "filter": {d: [members, ...]}}
    {"op": "view",      "rows": [d, ...], "cols": [d, ...]}
    {"op": "pivot",     "rows": [d, ...], "cols": [d, ...]}

Unspecified measures aggregate by sum. The result document is the
materialized grid of the final state: row/col header arrays plus a dense
value matrix with explicit nulls. Every consumer (CLI, bridge, service,
studio) serializes through :func:`canonical_json_bytes`, which is what
makes byte-for-byte output parity a meaningful contract.

Axis bookkeeping between explicit view ops: dimensions removed by
slice/roll-up-to-ALL leave their shelf; a dimension re-attached by
drill-down joins the end of the row shelf.
"""

from __future__ import annotations

import json
from typing import Mapping

from .aggregate import AGG_SUM
from .cube import Cube, build_cube
from .errors import AxisError, QueryError
from .facts import FactTable
from .ops import dice, drill_down, roll_up, slice as slice_op, to_view
from .parallel import ParallelConfig
from .schema import CubeSchema


def canonical_json_bytes(obj) -> bytes:
    """One serialization for every wire document: sorted keys, no spaces, UTF-8."""
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":")).encode(
        "utf-8"
    )


def parse_query_document(doc) -> tuple[dict[str, str], list[dict]]:
    """Split a query document into (aggregations, operations), validating shape."""
    if isinstance(doc, list):
        aggregations: dict[str, str] = {}
        operations = doc
    elif isinstance(doc, Mapping):
        aggregations = doc.get("aggregations", {})
        operations = doc.get("operations", [])
        if not isinstance(aggregations, Mapping):
            raise QueryError("'aggregations' must map measure names to function tags")
        aggregations = dict(aggregations)
    else:
        raise QueryError("query document must be a list of operations or an object")
    if not isinstance(operations, list):
        raise QueryError("'operations' must be a list")
    for entry in operations:
        if not isinstance(entry, Mapping) or not isinstance(entry.get("op"), str):
            raise QueryError(f"malformed operation entry: {entry!r}")
    return aggregations, operations


def default_aggregations(schema: CubeSchema, overrides: Mapping[str, str]) -> dict[str, str]:
    agg = {m.name: AGG_SUM for m in schema.measures}
    for name, fn in overrides.items():
        agg[name] = fn
    return agg


def run_operations(
    base: Cube, operations: list[dict], cfg: ParallelConfig | None = None
) -> dict:
    """Apply operations in order to ``base`` and materialize the final grid."""
    return execute_operations(base, operations, cfg)[0]


def execute_operations(
    base: Cube, operations: list[dict], cfg: ParallelConfig | None = None
) -> tuple[dict, Cube]:
    """Like :func:`run_operations` but also hands back the final cube."""
    cube = base
    rows: list[str] = list(cube.retained)
    cols: list[str] = []

    def drop_axis(name: str) -> None:
        if name in rows:
            rows.remove(name)
        if name in cols:
            cols.remove(name)

    for entry in operations:
        op = entry["op"]
        if op == "rollup":
            cube = roll_up(cube, _req(entry, "dimension"), _req(entry, "level"), cfg)
            if cube.levels[entry["dimension"]] is None:
                drop_axis(entry["dimension"])
        elif op == "drilldown":
            was_absent = cube.levels.get(_req(entry, "dimension")) is None
            cube = drill_down(cube, entry["dimension"], _req(entry, "level"), cfg)
            if was_absent:
                rows.append(entry["dimension"])
        elif op == "slice":
            cube = slice_op(cube, _req(entry, "dimension"), _req(entry, "member"))
            drop_axis(entry["dimension"])
        elif op == "dice":
            filter_arg = entry.get("filter")
            if not isinstance(filter_arg, Mapping):
                raise QueryError("dice requires a 'filter' object")
            cube = dice(cube, {d: list(ms) for d, ms in filter_arg.items()})
        elif op in ("view", "pivot"):
            new_rows = entry.get("rows", [])
            new_cols = entry.get("cols", [])
            if not isinstance(new_rows, list) or not isinstance(new_cols, list):
                raise QueryError(f"{op} requires 'rows' and 'cols' lists")
            if op == "pivot":
                combined = list(new_rows) + list(new_cols)
                if sorted(combined) != sorted(rows + cols) or len(set(combined)) != len(
                    combined
                ):
                    raise AxisError(
                        f"pivot axes rows={new_rows} cols={new_cols} are not a "
                        f"permutation of the current axes rows={rows} cols={cols}"
                    )
            rows, cols = list(new_rows), list(new_cols)
        else:
            raise QueryError(f"unknown operation {op!r}")

    view = to_view(cube, rows, cols)
    result = {
        "measures": [m.name for m in cube.schema.measures],
        "row_axes": list(view.row_axes),
        "col_axes": list(view.col_axes),
        "row_headers": [list(h) for h in view.row_headers],
        "col_headers": [list(h) for h in view.col_headers],
        "values": view.values,
    }
    return result, cube


def run_query(
    schema: CubeSchema,
    facts: FactTable,
    doc,
    cfg: ParallelConfig | None = None,
    base: Cube | None = None,
) -> dict:
    """Execute a query document from validated facts; returns the result document.

    ``base`` may supply a pre-built default-aggregation cube to reuse when
    the document does not override aggregations.
    """
    return run_query_full(schema, facts, doc, cfg, base)[0]


def run_query_full(
    schema: CubeSchema,
    facts: FactTable,
    doc,
    cfg: ParallelConfig | None = None,
    base: Cube | None = None,
) -> tuple[dict, Cube]:
    overrides, operations = parse_query_document(doc)
    aggregations = default_aggregations(schema, overrides)
    if base is not None and base.aggregations == aggregations:
        cube = base
    else:
        cube = build_cube(facts, aggregations, cfg)
    return execute_operations(cube, operations, cfg)


def _req(entry: Mapping, key: str):
    value = entry.get(key)
    if value is None:
        raise QueryError(f"operation {entry.get('op')!r} requires {key!r}")
    return value
