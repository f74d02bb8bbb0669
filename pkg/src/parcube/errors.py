"""Exception hierarchy shared by the engine, CLI, bridge, and service.

Every error carries a short machine-readable ``code`` used verbatim in
error documents, plus optional structured ``details``. Exceptions survive
pickling across process-pool boundaries because ``args`` holds only the
message and extra attributes ride along in ``__dict__``.
"""

from __future__ import annotations

from typing import Any


class CubeError(Exception):
    """Base class for all engine errors."""

    code = "error"

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.details = details

    @property
    def message(self) -> str:
        return self.args[0]

    def to_document(self) -> dict:
        doc: dict = {"code": self.code, "message": self.message}
        if self.details:
            doc["details"] = self.details
        return doc


class SchemaError(CubeError):
    """Schema document violates a structural invariant."""

    code = "schema"


class SchemaMismatchError(CubeError):
    """A declared dimension or measure column is missing from the CSV."""

    code = "schema-mismatch"


class ParseError(CubeError):
    """A measure cell could not be parsed per its declared kind."""

    code = "parse"


class EmptyTableError(CubeError):
    """The fact CSV contains no data rows."""

    code = "empty-table"


class PreconditionError(CubeError):
    """An operation was invoked on facts that were never validated clean."""

    code = "precondition"


class CoordinateError(CubeError):
    """A coordinate has the wrong arity or names an unknown member."""

    code = "coordinate"


class LevelOrderError(CubeError):
    """Roll-up / drill-down target is not strictly coarser / finer."""

    code = "level-order"


class UnsupportedDrillError(CubeError):
    """Drill-down requested on a cube with no base-facts handle."""

    code = "unsupported-drill"


class FilterError(CubeError):
    """Dice filter names an unknown dimension, member, or an empty set."""

    code = "filter"


class AxisError(CubeError):
    """View axes overlap, are incomplete, or are not a permutation."""

    code = "axis"


class MeasureOverflowError(CubeError):
    """A signed 64-bit integer accumulator left its representable range."""

    code = "overflow"

    def __init__(self, message: str, *, measure: str, coordinate: tuple):
        super().__init__(message, measure=measure, coordinate=list(coordinate))
        self.measure = measure
        self.coordinate = tuple(coordinate)


class ValidationFailedError(CubeError):
    """Facts failed pitfall validation; the report rides in details."""

    code = "validation"


class QueryError(CubeError):
    """Malformed query document."""

    code = "query"


class HandleError(CubeError):
    """Unknown, freed, or double-freed bridge session handle."""

    code = "handle"


class ContractError(CubeError):
    """Internal parallel-engine contract violated (e.g. duplicate partition)."""

    code = "contract"


class DeterminismError(CubeError):
    """Sequential and parallel aggregation disagreed; always a bug."""

    code = "determinism"


class ReportError(CubeError):
    """Benchmark report requested over an empty stats list."""

    code = "report"


class ConfigError(CubeError):
    """Invalid experiment or parallelism configuration."""

    code = "config"
