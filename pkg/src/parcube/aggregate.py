"""Mergeable aggregate states with exact 64-bit and compensated arithmetic.

Each cube cell holds one state per measure. States are built from raw fact
values and merged pairwise; merging states of two row subsets must equal
the state of their union -- exactly for integer, count, min and max, and
deterministically for reals as long as callers fix the merge order (the
parallel engine merges partitions in ascending index order, roll-up merges
source cells in ascending coordinate order).

Integer accumulators are signed 64-bit exact: any add or merge that leaves
the representable range raises instead of wrapping or drifting. Real
accumulators use Neumaier's compensated summation, carrying (total,
compensation, count); the final value is ``total + compensation`` and the
mean is always derived as sum/count at read time, never stored rounded.
"""

from __future__ import annotations

from dataclasses import dataclass

from .schema import MEASURE_INTEGER

AGG_SUM = "sum"
AGG_COUNT = "count"
AGG_MIN = "min"
AGG_MAX = "max"
AGG_MEAN = "mean"
AGG_FUNCTIONS = (AGG_SUM, AGG_COUNT, AGG_MIN, AGG_MAX, AGG_MEAN)

_I64_MIN = -(1 << 63)
_I64_MAX = (1 << 63) - 1


class AccumulatorOverflow(Exception):
    """Internal signal; the aggregation site re-raises with measure/coordinate."""


@dataclass
class AggregateState:
    """State of one aggregate function over one cell's fact rows.

    ``total``/``comp``/``count`` serve sum and mean (``comp`` stays 0 for
    integer measures), ``extremum`` serves min and max. States are mutated
    only while their owning cell map is under construction; once a cube is
    published they are treated as frozen and merges go through copies.
    """

    fn: str
    kind: str
    total: int | float = 0
    comp: float = 0.0
    count: int = 0
    extremum: int | float | None = None

    def add(self, value) -> None:
        fn = self.fn
        if fn == AGG_SUM or fn == AGG_MEAN:
            if self.kind == MEASURE_INTEGER:
                total = self.total + value
                if total < _I64_MIN or total > _I64_MAX:
                    raise AccumulatorOverflow()
                self.total = total
            else:
                self._comp_add(value)
            self.count += 1
        elif fn == AGG_COUNT:
            self.count += 1
        elif fn == AGG_MIN:
            if self.extremum is None or value < self.extremum:
                self.extremum = value
        else:  # AGG_MAX
            if self.extremum is None or value > self.extremum:
                self.extremum = value

    def merge_in_place(self, other: "AggregateState") -> None:
        """Absorb ``other``; for reals this applies other.total then other.comp."""
        fn = self.fn
        if fn == AGG_SUM or fn == AGG_MEAN:
            if self.kind == MEASURE_INTEGER:
                total = self.total + other.total
                if total < _I64_MIN or total > _I64_MAX:
                    raise AccumulatorOverflow()
                self.total = total
            else:
                self._comp_add(other.total)
                self._comp_add(other.comp)
            self.count += other.count
        elif fn == AGG_COUNT:
            self.count += other.count
        elif fn == AGG_MIN:
            if self.extremum is None or (
                other.extremum is not None and other.extremum < self.extremum
            ):
                self.extremum = other.extremum
        else:
            if self.extremum is None or (
                other.extremum is not None and other.extremum > self.extremum
            ):
                self.extremum = other.extremum

    def _comp_add(self, value: float) -> None:
        # Neumaier: the branch keeps the low-order bits of whichever
        # operand would otherwise lose them.
        total = self.total
        t = total + value
        if abs(total) >= abs(value):
            self.comp += (total - t) + value
        else:
            self.comp += (value - t) + total
        self.total = t

    def copy(self) -> "AggregateState":
        return AggregateState(
            fn=self.fn,
            kind=self.kind,
            total=self.total,
            comp=self.comp,
            count=self.count,
            extremum=self.extremum,
        )

    def finalized(self) -> int | float:
        """Resolve the state to a reportable value; mean divides at the end."""
        fn = self.fn
        if fn == AGG_SUM:
            if self.kind == MEASURE_INTEGER:
                return self.total
            return self.total + self.comp
        if fn == AGG_COUNT:
            return self.count
        if fn == AGG_MEAN:
            if self.kind == MEASURE_INTEGER:
                return self.total / self.count
            return (self.total + self.comp) / self.count
        return self.extremum


def new_state(fn: str, kind: str) -> AggregateState:
    return AggregateState(fn=fn, kind=kind)


def merged(a: AggregateState, b: AggregateState) -> AggregateState:
    out = a.copy()
    out.merge_in_place(b)
    return out
