"""Fact-table ingestion and pitfall validation.

Facts arrive as a star-schema CSV: a header row naming every dimension and
measure, then one fact per line. Dimension cells stay raw member strings
until :func:`validate` interns them against the schema's base levels; the
two classic fact-table pitfalls surface as findings, not exceptions:

* orphan references -- a fact names a member the dimension never declared;
* granularity violations -- a fact column carries members that exist only
  at a coarser level of the dimension.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from .errors import EmptyTableError, ParseError, SchemaMismatchError
from .schema import MEASURE_INTEGER, CubeSchema

I64_MIN = -(1 << 63)
I64_MAX = (1 << 63) - 1


@dataclass(frozen=True)
class OrphanReference:
    """A fact row referencing a member its dimension never declared."""

    row: int  # 1-based data-row number
    dimension: str
    member: str

    def to_dict(self) -> dict:
        return {"row": self.row, "dimension": self.dimension, "member": self.member}


@dataclass(frozen=True)
class GranularityViolation:
    """A fact column carrying members declared only at a coarser level."""

    dimension: str
    detail: str

    def to_dict(self) -> dict:
        return {"dimension": self.dimension, "detail": self.detail}


@dataclass
class ValidationReport:
    orphan_references: list[OrphanReference] = field(default_factory=list)
    granularity_violations: list[GranularityViolation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.orphan_references and not self.granularity_violations

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "orphan_references": [o.to_dict() for o in self.orphan_references],
            "granularity_violations": [g.to_dict() for g in self.granularity_violations],
        }


@dataclass
class FactTable:
    """Columnar base-granularity facts bound to a schema.

    ``dim_columns`` holds raw member strings per dimension (schema order);
    ``interned`` holds base-level member indices, present only after a
    clean :func:`validate`. Instances are immutable by convention once
    validated and are shared freely across worker processes.
    """

    schema: CubeSchema
    dim_columns: list[list[str]]
    measure_columns: list[list]
    interned: list[list[int]] | None = None
    report: ValidationReport | None = None

    @property
    def row_count(self) -> int:
        return len(self.dim_columns[0]) if self.dim_columns else 0

    @property
    def validated_ok(self) -> bool:
        return self.interned is not None


def load_facts(csv_bytes: bytes | str, schema: CubeSchema) -> FactTable:
    """Parse a fact CSV against ``schema``.

    Measure cells are parsed per measure kind (integer cells must fit in a
    signed 64-bit value); dimension cells are kept as raw strings until
    validation. Raises on structural problems only -- member-level findings
    belong to :func:`validate`.
    """
    if isinstance(csv_bytes, bytes):
        text = csv_bytes.decode("utf-8-sig")
    else:
        text = csv_bytes
    if not text.strip():
        raise EmptyTableError("fact CSV is empty")

    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyTableError("fact CSV is empty") from None
    except csv.Error as exc:
        raise ParseError(f"malformed CSV header: {exc}") from None
    positions = {name.strip(): i for i, name in enumerate(header)}

    dim_pos = []
    for dim in schema.dimensions:
        if dim.name not in positions:
            raise SchemaMismatchError(
                f"fact CSV is missing dimension column {dim.name!r}", column=dim.name
            )
        dim_pos.append(positions[dim.name])
    measure_pos = []
    for measure in schema.measures:
        if measure.name not in positions:
            raise SchemaMismatchError(
                f"fact CSV is missing measure column {measure.name!r}",
                column=measure.name,
            )
        measure_pos.append(positions[measure.name])

    dim_columns: list[list[str]] = [[] for _ in schema.dimensions]
    measure_columns: list[list] = [[] for _ in schema.measures]
    width = max(dim_pos + measure_pos) + 1

    row_num = 0
    while True:
        try:
            row = next(reader)
        except StopIteration:
            break
        except csv.Error as exc:
            raise ParseError(f"malformed CSV near data row {row_num + 1}: {exc}") from None
        if not row:
            continue  # blank line
        row_num += 1
        if len(row) < width:
            raise ParseError(
                f"row {row_num} has {len(row)} cells; expected at least {width}",
                row=row_num,
            )
        for d, pos in enumerate(dim_pos):
            dim_columns[d].append(row[pos].strip())
        for m, pos in enumerate(measure_pos):
            spec = schema.measures[m]
            cell = row[pos].strip()
            try:
                if spec.kind == MEASURE_INTEGER:
                    value = int(cell)
                    if not I64_MIN <= value <= I64_MAX:
                        raise ValueError("outside signed 64-bit range")
                else:
                    value = float(cell)
            except ValueError as exc:
                raise ParseError(
                    f"row {row_num}, column {spec.name!r}: cannot parse {cell!r} "
                    f"as {spec.kind} ({exc})",
                    row=row_num,
                    column=spec.name,
                ) from None
            measure_columns[m].append(value)

    if row_num == 0:
        raise EmptyTableError("fact CSV has a header but no data rows")
    return FactTable(schema=schema, dim_columns=dim_columns, measure_columns=measure_columns)


def validate(facts: FactTable) -> ValidationReport:
    """Check every dimension reference; intern members when the table is clean.

    Findings are data: orphans list every (row, dimension) whose member is
    unknown, and a dimension collects one granularity violation when its
    column carries members that only exist at coarser levels. On a clean
    report the fact table gains interned base-level index columns.
    """
    schema = facts.schema
    report = ValidationReport()
    interned: list[list[int]] = []

    for d, dim in enumerate(schema.dimensions):
        base_index = dim.member_index[dim.base_level]
        coarser: dict[str, str] = {}
        for lvl in dim.levels[1:]:
            for m in dim.members[lvl]:
                coarser.setdefault(m, lvl)
        column = facts.dim_columns[d]
        idx_column = [0] * len(column)
        coarse_hits: dict[str, tuple[str, list[int]]] = {}
        for i, member in enumerate(column):
            idx = base_index.get(member)
            if idx is not None:
                idx_column[i] = idx
                continue
            lvl = coarser.get(member)
            if lvl is not None:
                hit = coarse_hits.setdefault(member, (lvl, []))
                hit[1].append(i + 1)
            else:
                report.orphan_references.append(
                    OrphanReference(row=i + 1, dimension=dim.name, member=member)
                )
        for member, (lvl, rows) in coarse_hits.items():
            report.granularity_violations.append(
                GranularityViolation(
                    dimension=dim.name,
                    detail=(
                        f"member {member!r} is declared at coarser level {lvl!r} "
                        f"but appears in fact rows {rows}"
                    ),
                )
            )
        interned.append(idx_column)

    report.orphan_references.sort(key=lambda o: (o.row, o.dimension))
    facts.report = report
    facts.interned = interned if report.ok else None
    return report
