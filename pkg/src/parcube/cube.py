"""Cube construction and point queries.

A cube is a sparse map from coordinate tuples to aggregate states, one
component per retained dimension in schema order, all members interned to
indices at each dimension's current level. Cubes keep a handle to their
base facts (drill-down must re-aggregate finer data that aggregated cells
no longer contain) plus any slice/dice predicates recorded along the way,
so re-aggregation honors them.

Cubes are immutable: every operation in :mod:`parcube.ops` returns a new
one sharing the schema and facts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .aggregate import AggregateState
from .errors import CoordinateError
from .facts import FactTable
from .parallel import FilterPredicate, ParallelConfig, parallel_group_aggregate
from .schema import CubeSchema


@dataclass
class Cube:
    schema: CubeSchema
    levels: dict[str, str | None]  # dimension -> current level, None = absent
    cells: dict[tuple[int, ...], tuple[AggregateState, ...]]
    facts: FactTable | None
    aggregations: dict[str, str]
    filters: tuple[FilterPredicate, ...] = field(default_factory=tuple)

    @property
    def retained(self) -> list[str]:
        """Non-absent dimension names, schema order (= coordinate order)."""
        return [d.name for d in self.schema.dimensions if self.levels[d.name] is not None]

    def coordinate_names(self, key: tuple[int, ...]) -> tuple[str, ...]:
        names = []
        for pos, dim_name in enumerate(self.retained):
            dim = self.schema.dimension(dim_name)
            names.append(dim.members[self.levels[dim_name]][key[pos]])
        return tuple(names)

    def intern_coordinate(self, coordinate: tuple[str, ...]) -> tuple[int, ...]:
        retained = self.retained
        if len(coordinate) != len(retained):
            raise CoordinateError(
                f"coordinate {coordinate} has {len(coordinate)} components; "
                f"cube has {len(retained)} dimensions ({retained})"
            )
        key = []
        for member, dim_name in zip(coordinate, retained):
            dim = self.schema.dimension(dim_name)
            level = self.levels[dim_name]
            idx = dim.member_index[level].get(member)
            if idx is None:
                raise CoordinateError(
                    f"{member!r} is not a member of dimension {dim_name!r} "
                    f"at level {level!r}"
                )
            key.append(idx)
        return tuple(key)

    def finalized_cell(self, key: tuple[int, ...]) -> dict[str, int | float] | None:
        states = self.cells.get(key)
        if states is None:
            return None
        return {
            m.name: states[i].finalized() for i, m in enumerate(self.schema.measures)
        }


def build_cube(
    facts: FactTable,
    aggregations: Mapping[str, str],
    cfg: ParallelConfig | None = None,
) -> Cube:
    """Aggregate validated facts into a base-granularity cube.

    Facts must have passed :func:`parcube.facts.validate` cleanly. The cell
    map is produced by the parallel engine and is identical whether it ran
    sequentially or partitioned.
    """
    levels = {d.name: d.base_level for d in facts.schema.dimensions}
    cells = parallel_group_aggregate(facts, levels, (), aggregations, cfg)
    return Cube(
        schema=facts.schema,
        levels=levels,
        cells=cells,
        facts=facts,
        aggregations=dict(aggregations),
        filters=(),
    )


def cell(cube: Cube, coordinate: tuple[str, ...]) -> dict[str, int | float] | None:
    """Finalized measure values at ``coordinate`` (member names), or None."""
    return cube.finalized_cell(cube.intern_coordinate(tuple(coordinate)))
