"""The OLAP operations over immutable cubes.

Roll-up, drill-down, slice, and dice transform cube *content*; pivot (and
the to_view materialization it acts on) is pure *arrangement* of an
unchanged cube. Content ops return new cubes; the inputs can always be
re-queried unchanged.

Contracts worth keeping in mind:

* roll-up merges existing aggregate states upward through parent chains --
  never recomputes from finalized values, which would break mean/min/max;
* drill-down re-aggregates base facts at the finer level and re-applies
  every recorded slice/dice predicate;
* slice drops its dimension (one fewer coordinate component), dice keeps
  all dimensions;
* pivot never changes any value, only the row/column arrangement.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cube import Cube
from .errors import (
    AxisError,
    CoordinateError,
    FilterError,
    LevelOrderError,
    SchemaError,
    UnsupportedDrillError,
)
from .parallel import FilterPredicate, ParallelConfig, parallel_group_aggregate
from .schema import ALL_LEVEL


def roll_up(cube: Cube, dimension: str, target: str, cfg: ParallelConfig | None = None) -> Cube:
    """Re-aggregate ``dimension`` to a strictly coarser level, or remove it.

    ``target`` is a coarser level name or :data:`ALL_LEVEL` to make the
    dimension absent entirely. New cells merge the old cells' states in
    ascending coordinate order (deterministic for compensated real sums).
    """
    dim = cube.schema.dimension(dimension)
    current = cube.levels[dimension]
    if current is None:
        raise LevelOrderError(
            f"dimension {dimension!r} is already rolled away; nothing coarser exists"
        )
    if target == ALL_LEVEL:
        lift = None
    else:
        if target not in dim.level_pos:
            raise SchemaError(f"dimension {dimension!r} has no level {target!r}")
        if not dim.is_coarser(target, current):
            raise LevelOrderError(
                f"roll-up target {target!r} is not strictly coarser than the "
                f"current level {current!r} of dimension {dimension!r}"
            )
        lift = dim.lift(current, target)

    pos = cube.retained.index(dimension)
    new_cells: dict = {}
    for key in sorted(cube.cells):
        if lift is None:
            new_key = key[:pos] + key[pos + 1 :]
        else:
            new_key = key[:pos] + (lift[key[pos]],) + key[pos + 1 :]
        states = cube.cells[key]
        current_states = new_cells.get(new_key)
        if current_states is None:
            new_cells[new_key] = tuple(s.copy() for s in states)
        else:
            for m, incoming in enumerate(states):
                current_states[m].merge_in_place(incoming)

    levels = dict(cube.levels)
    levels[dimension] = None if target == ALL_LEVEL else target
    return Cube(
        schema=cube.schema,
        levels=levels,
        cells=new_cells,
        facts=cube.facts,
        aggregations=cube.aggregations,
        filters=cube.filters,
    )


def drill_down(
    cube: Cube, dimension: str, target: str, cfg: ParallelConfig | None = None
) -> Cube:
    """Re-aggregate base facts with ``dimension`` at a strictly finer level.

    An absent dimension counts as coarsest, so drilling re-attaches it.
    All other dimensions keep their levels and every recorded slice/dice
    predicate is re-applied to the base facts.
    """
    dim = cube.schema.dimension(dimension)
    if target not in dim.level_pos:
        raise SchemaError(f"dimension {dimension!r} has no level {target!r}")
    current = cube.levels[dimension]
    if current is not None and dim.level_pos[target] >= dim.level_pos[current]:
        raise LevelOrderError(
            f"drill-down target {target!r} is not strictly finer than the "
            f"current level {current!r} of dimension {dimension!r}"
        )
    if cube.facts is None:
        raise UnsupportedDrillError(
            "cube holds no base-facts handle; drill-down needs base data"
        )
    levels = dict(cube.levels)
    levels[dimension] = target
    cells = parallel_group_aggregate(cube.facts, levels, cube.filters, cube.aggregations, cfg)
    return Cube(
        schema=cube.schema,
        levels=levels,
        cells=cells,
        facts=cube.facts,
        aggregations=cube.aggregations,
        filters=cube.filters,
    )


def slice(cube: Cube, dimension: str, member: str) -> Cube:  # noqa: A001 - OLAP verb
    """Fix ``dimension`` to one member, then drop the dimension.

    The predicate is recorded so a later drill-down re-applies it.
    """
    if dimension not in cube.levels:
        raise SchemaError(f"unknown dimension {dimension!r}")
    level = cube.levels[dimension]
    if level is None:
        raise CoordinateError(f"dimension {dimension!r} is not present in this cube")
    dim = cube.schema.dimension(dimension)
    idx = dim.member_index[level].get(member)
    if idx is None:
        raise CoordinateError(
            f"{member!r} is not a member of dimension {dimension!r} at level {level!r}"
        )
    pos = cube.retained.index(dimension)
    new_cells = {
        key[:pos] + key[pos + 1 :]: states
        for key, states in cube.cells.items()
        if key[pos] == idx
    }
    levels = dict(cube.levels)
    levels[dimension] = None
    predicate = FilterPredicate(dimension=dimension, level=level, members=frozenset((idx,)))
    return Cube(
        schema=cube.schema,
        levels=levels,
        cells=new_cells,
        facts=cube.facts,
        aggregations=cube.aggregations,
        filters=cube.filters + (predicate,),
    )


def dice(cube: Cube, filter: dict) -> Cube:  # noqa: A002 - OLAP verb
    """Restrict several dimensions to member subsets; dimensionality unchanged."""
    if not isinstance(filter, dict) or not filter:
        raise FilterError("dice filter must map dimension names to member sets")
    compiled: list[tuple[int, set[int]]] = []
    predicates: list[FilterPredicate] = []
    retained = cube.retained
    for dim_name, members in filter.items():
        if dim_name not in cube.levels:
            raise FilterError(f"unknown dimension {dim_name!r} in dice filter")
        level = cube.levels[dim_name]
        if level is None:
            raise FilterError(f"dimension {dim_name!r} is not present in this cube")
        member_list = list(members)
        if not member_list:
            raise FilterError(f"dice filter for dimension {dim_name!r} is empty")
        dim = cube.schema.dimension(dim_name)
        index = dim.member_index[level]
        idxs = set()
        for m in member_list:
            if m not in index:
                raise FilterError(
                    f"{m!r} is not a member of dimension {dim_name!r} at level {level!r}"
                )
            idxs.add(index[m])
        compiled.append((retained.index(dim_name), idxs))
        predicates.append(
            FilterPredicate(dimension=dim_name, level=level, members=frozenset(idxs))
        )
    new_cells = {
        key: states
        for key, states in cube.cells.items()
        if all(key[pos] in idxs for pos, idxs in compiled)
    }
    return Cube(
        schema=cube.schema,
        levels=dict(cube.levels),
        cells=new_cells,
        facts=cube.facts,
        aggregations=cube.aggregations,
        filters=cube.filters + tuple(predicates),
    )


# ---------------------------------------------------------------------------
# Views
# ---------------------------------------------------------------------------


@dataclass
class CubeView:
    """A presentation arrangement: cube content spread over row/column axes.

    Headers are the distinct member tuples occurring in cells, ordered by
    interning index (declaration order), so output is deterministic. Grid
    cells are finalized measure dicts, or None where the cube is empty.
    """

    cube: Cube
    row_axes: tuple[str, ...]
    col_axes: tuple[str, ...]
    row_headers: list[tuple[str, ...]]
    col_headers: list[tuple[str, ...]]
    values: list[list[dict | None]]


def to_view(cube: Cube, row_axes: list[str], col_axes: list[str]) -> CubeView:
    """Materialize the cube over a row/column partition of its dimensions."""
    rows = tuple(row_axes)
    cols = tuple(col_axes)
    claimed = list(rows) + list(cols)
    retained = cube.retained
    if len(set(claimed)) != len(claimed):
        raise AxisError(f"axes overlap: rows={list(rows)} cols={list(cols)}")
    if set(claimed) != set(retained):
        raise AxisError(
            f"axes {sorted(claimed)} must cover exactly the cube dimensions {retained}"
        )

    positions = {name: i for i, name in enumerate(retained)}
    row_pos = [positions[name] for name in rows]
    col_pos = [positions[name] for name in cols]

    row_keys = sorted({tuple(key[p] for p in row_pos) for key in cube.cells})
    col_keys = sorted({tuple(key[p] for p in col_pos) for key in cube.cells})
    row_lookup = {rk: i for i, rk in enumerate(row_keys)}
    col_lookup = {ck: i for i, ck in enumerate(col_keys)}

    values: list[list[dict | None]] = [
        [None] * len(col_keys) for _ in range(len(row_keys))
    ]
    for key in cube.cells:
        rk = tuple(key[p] for p in row_pos)
        ck = tuple(key[p] for p in col_pos)
        values[row_lookup[rk]][col_lookup[ck]] = cube.finalized_cell(key)

    def names(axis_names: tuple[str, ...], keys: list[tuple[int, ...]]) -> list[tuple[str, ...]]:
        dims = [cube.schema.dimension(n) for n in axis_names]
        lvls = [cube.levels[n] for n in axis_names]
        return [
            tuple(dims[i].members[lvls[i]][idx] for i, idx in enumerate(key))
            for key in keys
        ]

    return CubeView(
        cube=cube,
        row_axes=rows,
        col_axes=cols,
        row_headers=names(rows, row_keys),
        col_headers=names(cols, col_keys),
        values=values,
    )


def pivot(view: CubeView, new_row_axes: list[str], new_col_axes: list[str]) -> CubeView:
    """Rearrange which dimensions form rows vs columns; content untouched.

    The new axes must be a permutation of the view's axes; the underlying
    cube is shared, not copied.
    """
    old = sorted(view.row_axes + view.col_axes)
    new = sorted(list(new_row_axes) + list(new_col_axes))
    if old != new or len(set(new)) != len(new):
        raise AxisError(
            f"pivot axes rows={list(new_row_axes)} cols={list(new_col_axes)} are "
            f"not a permutation of the view axes {old}"
        )
    return to_view(view.cube, list(new_row_axes), list(new_col_axes))
