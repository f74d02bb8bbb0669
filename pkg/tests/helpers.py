"""Independent oracles used to freeze expected values.

Everything here works on plain row dicts and the raw schema document --
no engine types -- and aggregates with naive nested loops, so it cannot
share a bug with the columnar/partitioned path it checks.
"""

from __future__ import annotations

import math


def insertion_sort(values: list[int]) -> list[int]:
    out = list(values)
    for i in range(1, len(out)):
        v = out[i]
        j = i - 1
        while j >= 0 and out[j] > v:
            out[j + 1] = out[j]
            j -= 1
        out[j + 1] = v
    return out


def parent_chain_map(schema_doc: dict, dimension: str, level: str) -> dict[str, str]:
    """Map base-level members of ``dimension`` to their ancestor at ``level``."""
    entry = next(d for d in schema_doc["dimensions"] if d["name"] == dimension)
    levels = entry["levels"]
    mapping = {m: m for m in entry["members"][levels[0]]}
    for pos in range(levels.index(level)):
        parents = entry["parents"][levels[pos]]
        mapping = {base: parents[cur] for base, cur in mapping.items()}
    return mapping


def group_by_oracle(
    rows: list[dict],
    schema_doc: dict,
    levels: dict[str, str | None],
    aggregations: dict[str, str],
    filters: list[tuple[str, str, set[str]]] = (),
) -> dict[tuple[str, ...], dict[str, float]]:
    """Brute-force nested-loop group-by over row dicts.

    ``levels`` maps dimension name to target level (None drops the
    dimension); ``filters`` are (dimension, level, allowed members).
    Mean is computed as naive sum / count.
    """
    dim_order = [d["name"] for d in schema_doc["dimensions"]]
    retained = [d for d in dim_order if levels.get(d) is not None]
    lift = {d: parent_chain_map(schema_doc, d, levels[d]) for d in retained}
    filter_maps = [
        (dim, parent_chain_map(schema_doc, dim, lvl), allowed) for dim, lvl, allowed in filters
    ]

    groups: dict[tuple[str, ...], list[dict]] = {}
    for row in rows:
        if any(fmap[row[dim]] not in allowed for dim, fmap, allowed in filter_maps):
            continue
        key = tuple(lift[d][row[d]] for d in retained)
        groups.setdefault(key, []).append(row)

    out: dict[tuple[str, ...], dict[str, float]] = {}
    for key, members in groups.items():
        cell = {}
        for measure, fn in aggregations.items():
            values = [row[measure] for row in members]
            if fn == "sum":
                cell[measure] = sum(values)
            elif fn == "count":
                cell[measure] = len(values)
            elif fn == "min":
                cell[measure] = min(values)
            elif fn == "max":
                cell[measure] = max(values)
            elif fn == "mean":
                cell[measure] = sum(values) / len(values)
            else:
                raise ValueError(fn)
        out[key] = cell
    return out


def close_enough(a, b, rel=1e-12) -> bool:
    if isinstance(a, float) or isinstance(b, float):
        return math.isclose(a, b, rel_tol=rel, abs_tol=1e-12)
    return a == b
