"""Append-only JSONL record store and CSV summaries.

One JSON object per line, keys in fixed order, floats written with 17
significant digits so a re-read reproduces every value bit-exactly.
Parallel runs write separate files and are merged at summarize time.
"""
from __future__ import annotations

import csv
import io
import json
import os
import sys
import time
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

TOOL_VERSION = "invgen 0.1.0"

_FIELD_ORDER = (
    "run_id",
    "experiment",
    "params",
    "seed",
    "estimate",
    "ci",
    "trials",
    "payload",
    "tool_version",
    "wall_time_ms",
)

_counter = 0


def new_run_id() -> str:
    """Time-ordered id, unique within (and across) processes."""
    global _counter
    _counter += 1
    return f"{time.time_ns():020d}-{os.getpid()}-{_counter:04d}"


@dataclass
class ExperimentRecord:
    run_id: str
    experiment: str
    params: dict
    seed: int
    estimate: Optional[float] = None
    ci: Optional[tuple] = None
    trials: Optional[int] = None
    payload: object = None
    tool_version: str = TOOL_VERSION
    wall_time_ms: int = 0


def _jdump(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if v != v or v in (float("inf"), float("-inf")):
            return "null"
        return format(v, ".17g")
    if isinstance(v, str):
        return json.dumps(v, ensure_ascii=False)
    if isinstance(v, dict):
        inner = ",".join(f"{json.dumps(str(k))}:{_jdump(val)}" for k, val in v.items())
        return "{" + inner + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ",".join(_jdump(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def record_to_json(rec: ExperimentRecord) -> str:
    parts = []
    for name in _FIELD_ORDER:
        parts.append(f"{json.dumps(name)}:{_jdump(getattr(rec, name))}")
    return "{" + ",".join(parts) + "}"


def write_record(rec: ExperimentRecord, path: str) -> None:
    """Append one record as a single UTF-8 line."""
    with open(path, "a", encoding="utf-8") as f:
        f.write(record_to_json(rec))
        f.write("\n")


def read_records(paths: Iterable[str] | str, strict: bool = False) -> list[dict]:
    """Parse records from one or more store files, skipping malformed lines.

    With strict=False a malformed line produces a warning on stderr; an
    exception is raised only if every line was malformed.
    """
    if isinstance(paths, str):
        paths = [paths]
    out = []
    total = 0
    for path in paths:
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, 1):
                line = line.strip()
                if not line:
                    continue
                total += 1
                try:
                    out.append(json.loads(line))
                except json.JSONDecodeError:
                    if strict:
                        raise
                    print(
                        f"warning: {path}:{lineno}: malformed record skipped",
                        file=sys.stderr,
                    )
    if total and not out:
        raise ValueError("all record lines were malformed")
    return out


def _flatten(rec: dict) -> dict:
    row = {
        "run_id": rec.get("run_id", ""),
        "experiment": rec.get("experiment", ""),
        "seed": rec.get("seed", ""),
        "trials": rec.get("trials", ""),
        "estimate": rec.get("estimate", ""),
        "ci_low": "",
        "ci_high": "",
        "wall_time_ms": rec.get("wall_time_ms", ""),
    }
    ci = rec.get("ci")
    if isinstance(ci, (list, tuple)) and len(ci) == 2:
        row["ci_low"], row["ci_high"] = ci[0], ci[1]
    for key, val in sorted((rec.get("params") or {}).items()):
        row[f"param_{key}"] = val
    return row


def _matches(rec: dict, filters: Sequence[tuple[str, str]]) -> bool:
    for key, want in filters:
        val = rec.get(key)
        if val is None:
            val = (rec.get("params") or {}).get(key)
        if val is None or str(val) != want:
            return False
    return True


def summarize(
    paths: Iterable[str] | str,
    filters: Optional[Sequence[tuple[str, str]]] = None,
    group_by: Optional[Sequence[str]] = None,
) -> str:
    """Selected records flattened to CSV with a stable column order.

    group_by aggregates the mean estimate per group of parameter values.
    """
    recs = [r for r in read_records(paths) if _matches(r, filters or [])]
    buf = io.StringIO()
    if group_by:
        groups: dict[tuple, list[float]] = {}
        for r in recs:
            if r.get("estimate") is None:
                continue
            params = r.get("params") or {}
            key = tuple(str(params.get(g, r.get(g, ""))) for g in group_by)
            groups.setdefault(key, []).append(float(r["estimate"]))
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(list(group_by) + ["n_records", "mean_estimate"])
        for key in sorted(groups):
            vals = groups[key]
            writer.writerow(
                list(key) + [len(vals), format(sum(vals) / len(vals), ".17g")]
            )
        return buf.getvalue()
    rows = [_flatten(r) for r in recs]
    base_cols = [
        "run_id",
        "experiment",
        "seed",
        "trials",
        "estimate",
        "ci_low",
        "ci_high",
        "wall_time_ms",
    ]
    param_cols = sorted({c for row in rows for c in row if c.startswith("param_")})
    cols = base_cols + param_cols
    writer = csv.DictWriter(buf, fieldnames=cols, restval="", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({c: row.get(c, "") for c in cols})
    return buf.getvalue()
