"""Command-line entry points: the `bench` harness and the `cube` tool."""

from __future__ import annotations

import json
import sys

import click

from .bench import (
    MODES,
    ExperimentConfig,
    SyntheticFactSpec,
    emit_report,
    full_scale_config,
    run_aggregate_experiment,
    run_sort_experiment,
)
from .errors import CubeError, ValidationFailedError
from .facts import load_facts, validate
from .parallel import ParallelConfig
from .query import canonical_json_bytes, run_query
from .schema import CubeSchema


def _write_out(payload: bytes, out: str | None) -> None:
    if out:
        with open(out, "wb") as fh:
            fh.write(payload)
    else:
        sys.stdout.buffer.write(payload)
        sys.stdout.buffer.write(b"\n")


def _fail(exc: CubeError) -> None:
    click.echo(json.dumps(exc.to_document()), err=True)
    raise SystemExit(1)


@click.group()
def bench():
    """Timing experiments: sequential vs. parallel kernels."""


@bench.command("sort")
@click.option("--iterations", type=int, default=None, help="Timed repetitions.")
@click.option("--size", type=int, default=None, help="Array length per iteration.")
@click.option("--min", "lo", type=int, default=None, help="Inclusive value lower bound.")
@click.option("--max", "hi", type=int, default=None, help="Exclusive value upper bound.")
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--mode", type=click.Choice(MODES), default="both", show_default=True)
@click.option("--workers", type=int, default=None, help="Worker processes (default: detected cores).")
@click.option("--cutoff", type=int, default=2048, show_default=True, help="Sequential cutoff.")
@click.option("--full-scale", is_flag=True, help="Full-size profile: 1000 x 500000 in [0,100000).")
@click.option("--out", type=click.Path(), default=None, help="Report file (default: stdout).")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
def bench_sort(iterations, size, lo, hi, seed, mode, workers, cutoff, full_scale, out, fmt):
    """Time quicksort over seeded random arrays."""
    try:
        parallel = ParallelConfig(
            worker_count=workers if workers is not None else ParallelConfig().worker_count,
            sequential_cutoff=cutoff,
        )
        profile = full_scale_config(parallel) if full_scale else ExperimentConfig(parallel=parallel)
        cfg = ExperimentConfig(
            iterations=iterations if iterations is not None else profile.iterations,
            array_size=size if size is not None else profile.array_size,
            value_range=(
                lo if lo is not None else profile.value_range[0],
                hi if hi is not None else profile.value_range[1],
            ),
            seed=seed,
            mode=mode,
            parallel=parallel,
        )
        stats = run_sort_experiment(cfg)
        payload = emit_report(stats, fmt)
    except CubeError as exc:
        _fail(exc)
    for s in stats:
        click.echo(f"{s.experiment} {s.mode}: mean {s.mean_ms:.3f} ms over {len(s.durations_ms)} iterations", err=True)
    _write_out(payload, out)


@bench.command("agg")
@click.option("--rows", type=int, required=True, help="Synthetic fact rows.")
@click.option("--dims", default="100,10,4", show_default=True, help="Dimension cardinalities, comma-separated.")
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--iterations", type=int, default=5, show_default=True)
@click.option("--workers", type=int, default=None)
@click.option("--chunk-size", type=int, default=65536, show_default=True)
@click.option("--agg", default="sum", show_default=True, type=click.Choice(["sum", "count", "min", "max", "mean"]))
@click.option("--out", type=click.Path(), default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
def bench_agg(rows, dims, seed, iterations, workers, chunk_size, agg, out, fmt):
    """Time cube construction, sequential vs. parallel, on synthetic facts."""
    try:
        cardinalities = tuple(int(c) for c in dims.replace("x", ",").split(",") if c.strip())
    except ValueError:
        click.echo(f"cannot parse --dims {dims!r}; expected e.g. 100,10,4", err=True)
        raise SystemExit(1)
    try:
        parallel = ParallelConfig(
            worker_count=workers if workers is not None else ParallelConfig().worker_count,
            chunk_size=chunk_size,
        )
        cfg = ExperimentConfig(iterations=iterations, seed=seed, parallel=parallel)
        spec = SyntheticFactSpec(rows=rows, cardinalities=cardinalities, seed=seed, aggregation=agg)
        stats = run_aggregate_experiment(cfg, spec)
        payload = emit_report(stats, fmt)
    except CubeError as exc:
        _fail(exc)
    for s in stats:
        click.echo(f"{s.experiment} {s.mode}: mean {s.mean_ms:.3f} ms over {len(s.durations_ms)} iterations", err=True)
    _write_out(payload, out)


@click.group()
def cube():
    """Cube engine: run query documents, validate facts, serve the studio."""


@cube.command("query")
@click.option("--schema", "schema_path", type=click.Path(exists=True), required=True)
@click.option("--facts", "facts_path", type=click.Path(exists=True), required=True)
@click.option("--query", "query_path", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), default=None, help="Result file (default: stdout).")
def cube_query(schema_path, facts_path, query_path, out):
    """Run a query document against a schema + fact CSV."""
    try:
        with open(schema_path, "rb") as fh:
            schema = CubeSchema.from_json(fh.read())
        with open(facts_path, "rb") as fh:
            facts = load_facts(fh.read(), schema)
        report = validate(facts)
        if not report.ok:
            raise ValidationFailedError("facts failed validation", report=report.to_dict())
        with open(query_path, "rb") as fh:
            doc = json.loads(fh.read().decode("utf-8"))
        result = run_query(schema, facts, doc)
    except json.JSONDecodeError as exc:
        click.echo(json.dumps({"code": "parse", "message": f"query document is not valid JSON: {exc}"}), err=True)
        raise SystemExit(1)
    except CubeError as exc:
        _fail(exc)
    _write_out(canonical_json_bytes(result), out)


@cube.command("validate")
@click.option("--schema", "schema_path", type=click.Path(exists=True), required=True)
@click.option("--facts", "facts_path", type=click.Path(exists=True), required=True)
def cube_validate(schema_path, facts_path):
    """Print the pitfall-validation report; exit 1 when findings exist."""
    try:
        with open(schema_path, "rb") as fh:
            schema = CubeSchema.from_json(fh.read())
        with open(facts_path, "rb") as fh:
            facts = load_facts(fh.read(), schema)
        report = validate(facts)
    except CubeError as exc:
        _fail(exc)
    click.echo(json.dumps(report.to_dict(), indent=2))
    raise SystemExit(0 if report.ok else 1)


@cube.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def cube_serve(host, port):
    """Serve the bridge over HTTP for the studio frontend."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port, log_level="info")
