"""Cube schema declaration: dimensions with level hierarchies, and measures.

A dimension declares its levels finest-to-coarsest, the member names of
every level, and the parent of each non-top member one level up. Members
are interned to integer indices in declaration order; all interior engine
data (fact columns, cell coordinates) speaks indices, and names reappear
only at presentation boundaries.

Schemas are immutable after construction and safe to share across threads
and forked worker processes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import SchemaError

MEASURE_INTEGER = "integer"
MEASURE_REAL = "real"
MEASURE_KINDS = (MEASURE_INTEGER, MEASURE_REAL)

# Reserved roll-up target meaning "remove the dimension entirely".
ALL_LEVEL = "ALL"


@dataclass(frozen=True)
class MeasureSpec:
    name: str
    kind: str

    def __post_init__(self):
        if not self.name:
            raise SchemaError("measure name must be non-empty")
        if self.kind not in MEASURE_KINDS:
            raise SchemaError(
                f"measure {self.name!r} has unknown kind {self.kind!r}; "
                f"expected one of {MEASURE_KINDS}"
            )


@dataclass
class DimensionSpec:
    """One axis of analysis with an ordered level hierarchy.

    ``levels`` runs finest to coarsest. ``members[level]`` lists member
    names in declaration order (that order defines interning indices and
    all deterministic header ordering downstream). ``parents[level]`` maps
    each member of ``level`` to its single parent at the next-coarser
    level; the top level has no entry.
    """

    name: str
    levels: tuple[str, ...]
    members: dict[str, tuple[str, ...]]
    parents: dict[str, dict[str, str]] = field(default_factory=dict)

    # Derived interning tables, built once in __post_init__.
    member_index: dict[str, dict[str, int]] = field(init=False, repr=False)
    parent_index: dict[str, list[int]] = field(init=False, repr=False)
    level_pos: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.levels = tuple(self.levels)
        self.members = {lvl: tuple(ms) for lvl, ms in self.members.items()}
        self.parents = {lvl: dict(ps) for lvl, ps in self.parents.items()}
        self._check()
        self.level_pos = {lvl: i for i, lvl in enumerate(self.levels)}
        self.member_index = {
            lvl: {m: i for i, m in enumerate(ms)} for lvl, ms in self.members.items()
        }
        self.parent_index = {}
        for pos in range(len(self.levels) - 1):
            lvl, up = self.levels[pos], self.levels[pos + 1]
            up_idx = self.member_index[up]
            pmap = self.parents[lvl]
            self.parent_index[lvl] = [pmap[m] for m in self.members[lvl]]
            # replace names with indices in one pass
            self.parent_index[lvl] = [up_idx[p] for p in self.parent_index[lvl]]
        self._lift_cache: dict[tuple[str, str], list[int]] = {}

    def _check(self):
        if not self.name:
            raise SchemaError("dimension name must be non-empty")
        if not self.levels:
            raise SchemaError(f"dimension {self.name!r} declares no levels")
        if len(set(self.levels)) != len(self.levels):
            raise SchemaError(f"dimension {self.name!r} has duplicate level names")
        if ALL_LEVEL in self.levels:
            raise SchemaError(
                f"dimension {self.name!r}: level name {ALL_LEVEL!r} is reserved"
            )
        for lvl in self.levels:
            ms = self.members.get(lvl)
            if not ms:
                raise SchemaError(
                    f"dimension {self.name!r} level {lvl!r} declares no members"
                )
            if len(set(ms)) != len(ms):
                raise SchemaError(
                    f"dimension {self.name!r} level {lvl!r} has duplicate members"
                )
        extra = set(self.members) - set(self.levels)
        if extra:
            raise SchemaError(
                f"dimension {self.name!r} lists members for undeclared levels {sorted(extra)}"
            )
        # Every non-top member needs exactly one parent in the next level up.
        for pos in range(len(self.levels) - 1):
            lvl, up = self.levels[pos], self.levels[pos + 1]
            pmap = self.parents.get(lvl, {})
            up_members = set(self.members[up])
            for m in self.members[lvl]:
                parent = pmap.get(m)
                if parent is None:
                    raise SchemaError(
                        f"dimension {self.name!r}: member {m!r} at level {lvl!r} "
                        f"has no parent at level {up!r}"
                    )
                if parent not in up_members:
                    raise SchemaError(
                        f"dimension {self.name!r}: member {m!r} names parent "
                        f"{parent!r} which is not declared at level {up!r}"
                    )

    @property
    def base_level(self) -> str:
        return self.levels[0]

    def lift(self, from_level: str, to_level: str) -> list[int]:
        """Index map from members of ``from_level`` to members of ``to_level``.

        ``to_level`` must be the same level or coarser; the composed parent
        chain is cached per (from, to) pair.
        """
        key = (from_level, to_level)
        cached = self._lift_cache.get(key)
        if cached is not None:
            return cached
        lo, hi = self.level_pos[from_level], self.level_pos[to_level]
        if hi < lo:
            raise SchemaError(
                f"dimension {self.name!r}: cannot lift downward from "
                f"{from_level!r} to {to_level!r}"
            )
        mapping = list(range(len(self.members[from_level])))
        for pos in range(lo, hi):
            step = self.parent_index[self.levels[pos]]
            mapping = [step[i] for i in mapping]
        self._lift_cache[key] = mapping
        return mapping

    def is_coarser(self, level: str, than: str) -> bool:
        return self.level_pos[level] > self.level_pos[than]


@dataclass
class CubeSchema:
    dimensions: list[DimensionSpec]
    measures: list[MeasureSpec]

    dim_index: dict[str, int] = field(init=False, repr=False)
    measure_index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        if not self.dimensions:
            raise SchemaError("schema declares no dimensions")
        if not self.measures:
            raise SchemaError("schema declares no measures")
        names = [d.name for d in self.dimensions] + [m.name for m in self.measures]
        if len(set(names)) != len(names):
            raise SchemaError("dimension and measure names must be unique")
        self.dim_index = {d.name: i for i, d in enumerate(self.dimensions)}
        self.measure_index = {m.name: i for i, m in enumerate(self.measures)}

    def dimension(self, name: str) -> DimensionSpec:
        try:
            return self.dimensions[self.dim_index[name]]
        except KeyError:
            raise SchemaError(f"unknown dimension {name!r}") from None

    def measure(self, name: str) -> MeasureSpec:
        try:
            return self.measures[self.measure_index[name]]
        except KeyError:
            raise SchemaError(f"unknown measure {name!r}") from None

    @classmethod
    def from_dict(cls, doc: Mapping) -> "CubeSchema":
        """Build a schema from the JSON document shape.

        Expected layout::

            {"dimensions": [{"name": ..., "levels": [...],
                             "members": {level: [names]},
                             "parents": {level: {member: parent}}}],
             "measures": [{"name": ..., "kind": "integer"|"real"}]}
        """
        if not isinstance(doc, Mapping):
            raise SchemaError("schema document must be a JSON object")
        dims_doc = _require_list(doc, "dimensions")
        measures_doc = _require_list(doc, "measures")
        dimensions = []
        for entry in dims_doc:
            if not isinstance(entry, Mapping):
                raise SchemaError("each dimension must be a JSON object")
            name = entry.get("name")
            levels = entry.get("levels")
            members = entry.get("members")
            if not isinstance(name, str):
                raise SchemaError("dimension is missing a string 'name'")
            if not isinstance(levels, list) or not all(isinstance(x, str) for x in levels):
                raise SchemaError(f"dimension {name!r}: 'levels' must be a list of strings")
            if not isinstance(members, Mapping):
                raise SchemaError(f"dimension {name!r}: 'members' must map level to member list")
            parents = entry.get("parents", {})
            if not isinstance(parents, Mapping):
                raise SchemaError(f"dimension {name!r}: 'parents' must be an object")
            dimensions.append(
                DimensionSpec(
                    name=name,
                    levels=tuple(levels),
                    members={lvl: tuple(_str_list(ms, name, lvl)) for lvl, ms in members.items()},
                    parents={lvl: dict(pm) for lvl, pm in parents.items()},
                )
            )
        measures = []
        for entry in measures_doc:
            if not isinstance(entry, Mapping) or not isinstance(entry.get("name"), str):
                raise SchemaError("each measure needs a string 'name'")
            measures.append(MeasureSpec(name=entry["name"], kind=entry.get("kind", "")))
        return cls(dimensions=dimensions, measures=measures)

    @classmethod
    def from_json(cls, payload: bytes | str) -> "CubeSchema":
        if isinstance(payload, bytes):
            try:
                payload = payload.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise SchemaError(f"schema document is not valid UTF-8: {exc}") from None
        try:
            doc = json.loads(payload)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"schema document is not valid JSON: {exc}") from None
        return cls.from_dict(doc)

    def to_dict(self) -> dict:
        return {
            "dimensions": [
                {
                    "name": d.name,
                    "levels": list(d.levels),
                    "members": {lvl: list(ms) for lvl, ms in d.members.items()},
                    "parents": {lvl: dict(pm) for lvl, pm in d.parents.items()},
                }
                for d in self.dimensions
            ],
            "measures": [{"name": m.name, "kind": m.kind} for m in self.measures],
        }


def _require_list(doc: Mapping, key: str) -> list:
    value = doc.get(key)
    if not isinstance(value, list):
        raise SchemaError(f"schema document is missing the {key!r} list")
    return value


def _str_list(values: Iterable, dim: str, level: str) -> list[str]:
    out = list(values)
    if not all(isinstance(v, str) for v in out):
        raise SchemaError(f"dimension {dim!r} level {level!r}: members must be strings")
    return out
