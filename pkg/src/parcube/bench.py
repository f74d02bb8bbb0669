"""Benchmark harness: seeded sort and aggregation experiments with reports.

The experiment loop fills an array with seeded pseudorandom integers, then
times only the sort call on a monotonic clock -- generation is outside the
clock. In ``both`` mode the array is cloned and the clone checked
bitwise-identical before the sequential and parallel sorts each consume
one copy, so the two timings cover the same input.

The PRNG is pinned: splitmix64, named in every report's environment
record, so identical configs regenerate identical arrays on any host and
Python version. Bounded draws take the remainder of the next 64-bit word;
the modulo bias is irrelevant for benchmarking and keeps the generator a
four-line loop.
"""

from __future__ import annotations

import csv
import io
import json
import os
import statistics
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .cube import build_cube
from .errors import ConfigError, DeterminismError, ReportError
from .facts import FactTable, ValidationReport
from .parallel import ParallelConfig, quicksort_par, quicksort_seq
from .schema import CubeSchema, DimensionSpec, MeasureSpec, MEASURE_INTEGER

PRNG_NAME = "splitmix64"

MODE_SEQ = "seq"
MODE_PAR = "par"
MODE_BOTH = "both"
MODES = (MODE_SEQ, MODE_PAR, MODE_BOTH)

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """Tiny fixed-forever PRNG (Steele/Lea/Flood mixing constants)."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def randint(self, lo: int, hi: int) -> int:
        """Uniform-ish draw from the half-open interval [lo, hi)."""
        return lo + self.next_u64() % (hi - lo)


def generate_array(size: int, lo: int, hi: int, rng: SplitMix64) -> list[int]:
    return [lo + rng.next_u64() % (hi - lo) for _ in range(size)]


@dataclass(frozen=True)
class ExperimentConfig:
    iterations: int = 50
    array_size: int = 100_000
    value_range: tuple[int, int] = (0, 100_000)
    seed: int = 42
    mode: str = MODE_BOTH
    parallel: ParallelConfig = field(default_factory=ParallelConfig)

    def __post_init__(self):
        if self.iterations < 1:
            raise ConfigError("iterations must be >= 1")
        if self.array_size < 1:
            raise ConfigError("array_size must be >= 1")
        lo, hi = self.value_range
        if hi <= lo:
            raise ConfigError(f"value_range {self.value_range} is empty")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")


def full_scale_config(parallel: ParallelConfig | None = None) -> ExperimentConfig:
    """The full-size experiment profile: 1000 iterations over 500k values."""
    return ExperimentConfig(
        iterations=1000,
        array_size=500_000,
        value_range=(0, 100_000),
        parallel=parallel or ParallelConfig(),
    )


@dataclass
class RunStats:
    """Summary of one timed experiment arm."""

    experiment: str
    mode: str
    durations_ms: list[float]
    mean_ms: float
    median_ms: float
    min_ms: float
    max_ms: float
    stddev_ms: float
    config: dict
    environment: dict

    @classmethod
    def from_durations(
        cls, experiment: str, mode: str, durations_ms: list[float], config: dict
    ) -> "RunStats":
        return cls(
            experiment=experiment,
            mode=mode,
            durations_ms=list(durations_ms),
            mean_ms=sum(durations_ms) / len(durations_ms),
            median_ms=statistics.median(durations_ms),
            min_ms=min(durations_ms),
            max_ms=max(durations_ms),
            stddev_ms=statistics.pstdev(durations_ms),
            config=config,
            environment=environment_record(),
        )

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "mode": self.mode,
            "durations_ms": self.durations_ms,
            "mean_ms": self.mean_ms,
            "median_ms": self.median_ms,
            "min_ms": self.min_ms,
            "max_ms": self.max_ms,
            "stddev_ms": self.stddev_ms,
            "config": self.config,
            "environment": self.environment,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RunStats":
        return cls(**doc)


def environment_record() -> dict:
    return {
        "cpu_count": os.cpu_count() or 1,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "prng": PRNG_NAME,
        "python": sys.version.split()[0],
    }


def _config_echo(cfg: ExperimentConfig) -> dict:
    return {
        "iterations": cfg.iterations,
        "array_size": cfg.array_size,
        "value_range": list(cfg.value_range),
        "seed": cfg.seed,
        "mode": cfg.mode,
        "workers": cfg.parallel.worker_count,
        "sequential_cutoff": cfg.parallel.sequential_cutoff,
    }


def run_sort_experiment(cfg: ExperimentConfig) -> list[RunStats]:
    """Time quicksort over seeded arrays; one RunStats per requested mode.

    The clock covers the sort call only. A fresh generator is seeded once,
    so iteration k's array depends only on (seed, array_size, k) and both
    modes of a ``both`` run sort identical data.
    """
    rng = SplitMix64(cfg.seed)
    lo, hi = cfg.value_range
    seq_durations: list[float] = []
    par_durations: list[float] = []
    for _ in range(cfg.iterations):
        values = generate_array(cfg.array_size, lo, hi, rng)
        if cfg.mode == MODE_BOTH:
            clone = list(values)
            if clone != values:
                raise DeterminismError("array clone is not bitwise identical")
            t0 = time.perf_counter_ns()
            quicksort_seq(values)
            seq_durations.append((time.perf_counter_ns() - t0) / 1e6)
            t0 = time.perf_counter_ns()
            quicksort_par(clone, cfg.parallel)
            par_durations.append((time.perf_counter_ns() - t0) / 1e6)
        elif cfg.mode == MODE_SEQ:
            t0 = time.perf_counter_ns()
            quicksort_seq(values)
            seq_durations.append((time.perf_counter_ns() - t0) / 1e6)
        else:
            t0 = time.perf_counter_ns()
            quicksort_par(values, cfg.parallel)
            par_durations.append((time.perf_counter_ns() - t0) / 1e6)

    echo = _config_echo(cfg)
    out = []
    if seq_durations:
        out.append(RunStats.from_durations("sort", MODE_SEQ, seq_durations, echo))
    if par_durations:
        out.append(RunStats.from_durations("sort", MODE_PAR, par_durations, echo))
    return out


# ---------------------------------------------------------------------------
# Synthetic facts + aggregation experiment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SyntheticFactSpec:
    rows: int
    cardinalities: tuple[int, ...]
    seed: int = 42
    value_range: tuple[int, int] = (0, 1000)
    aggregation: str = "sum"

    def __post_init__(self):
        if self.rows < 1:
            raise ConfigError("rows must be >= 1")
        if not self.cardinalities or any(c < 1 for c in self.cardinalities):
            raise ConfigError(f"bad cardinalities {self.cardinalities}")


def synthetic_facts(spec: SyntheticFactSpec) -> FactTable:
    """Seeded random fact table: one single-level dimension per cardinality,
    one integer measure named 'value'. Returned pre-validated."""
    dimensions = [
        DimensionSpec(
            name=f"dim{d}",
            levels=(f"dim{d}",),
            members={f"dim{d}": tuple(f"m{i}" for i in range(card))},
        )
        for d, card in enumerate(spec.cardinalities)
    ]
    schema = CubeSchema(
        dimensions=dimensions, measures=[MeasureSpec(name="value", kind=MEASURE_INTEGER)]
    )
    rng = SplitMix64(spec.seed)
    lo, hi = spec.value_range
    idx_columns: list[list[int]] = [[] for _ in spec.cardinalities]
    measure_column = []
    for _ in range(spec.rows):
        for d, card in enumerate(spec.cardinalities):
            idx_columns[d].append(rng.next_u64() % card)
        measure_column.append(lo + rng.next_u64() % (hi - lo))
    facts = FactTable(
        schema=schema,
        dim_columns=[[f"m{i}" for i in col] for col in idx_columns],
        measure_columns=[measure_column],
    )
    # members are valid by construction; intern directly
    facts.interned = idx_columns
    facts.report = ValidationReport()
    return facts


def run_aggregate_experiment(
    cfg: ExperimentConfig, fact_spec: SyntheticFactSpec
) -> list[RunStats]:
    """Time cube construction sequentially and in parallel over one table.

    The synthetic table is generated once. Before any timing is reported
    the two cell maps are asserted equal; a mismatch is a determinism bug
    and raises instead of producing a report.
    """
    facts = synthetic_facts(fact_spec)
    aggregations = {"value": fact_spec.aggregation}
    seq_cfg = ParallelConfig(worker_count=1, chunk_size=max(1, facts.row_count))

    check_seq = build_cube(facts, aggregations, seq_cfg)
    check_par = build_cube(facts, aggregations, cfg.parallel)
    if check_seq.cells != check_par.cells:
        raise DeterminismError(
            "sequential and parallel aggregation produced different cell maps"
        )

    seq_durations: list[float] = []
    par_durations: list[float] = []
    for _ in range(cfg.iterations):
        t0 = time.perf_counter_ns()
        build_cube(facts, aggregations, seq_cfg)
        seq_durations.append((time.perf_counter_ns() - t0) / 1e6)
        t0 = time.perf_counter_ns()
        build_cube(facts, aggregations, cfg.parallel)
        par_durations.append((time.perf_counter_ns() - t0) / 1e6)

    echo = _config_echo(cfg)
    echo.update(
        {
            "rows": fact_spec.rows,
            "cardinalities": list(fact_spec.cardinalities),
            "aggregation": fact_spec.aggregation,
            "chunk_size": cfg.parallel.chunk_size,
        }
    )
    return [
        RunStats.from_durations("agg", MODE_SEQ, seq_durations, echo),
        RunStats.from_durations("agg", MODE_PAR, par_durations, echo),
    ]


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

_CSV_COLUMNS = [
    "experiment",
    "mode",
    "iterations",
    "mean_ms",
    "median_ms",
    "min_ms",
    "max_ms",
    "stddev_ms",
]


def emit_report(stats: list[RunStats], format: str = "json") -> bytes:
    """Serialize stats: json keeps full fidelity, csv is one summary row
    per (experiment, mode) with millisecond columns at 3 decimals."""
    if not stats:
        raise ReportError("no run statistics to report")
    if format == "json":
        return json.dumps([s.to_dict() for s in stats], indent=2).encode("utf-8")
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(_CSV_COLUMNS)
        for s in stats:
            writer.writerow(
                [
                    s.experiment,
                    s.mode,
                    len(s.durations_ms),
                    f"{s.mean_ms:.3f}",
                    f"{s.median_ms:.3f}",
                    f"{s.min_ms:.3f}",
                    f"{s.max_ms:.3f}",
                    f"{s.stddev_ms:.3f}",
                ]
            )
        return buf.getvalue().encode("utf-8")
    raise ReportError(f"unknown report format {format!r}")


def parse_report(payload: bytes) -> list[RunStats]:
    return [RunStats.from_dict(doc) for doc in json.loads(payload.decode("utf-8"))]
