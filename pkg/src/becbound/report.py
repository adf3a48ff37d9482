"""Serialization of reports: JSON documents, CSV curves and the statistics table."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

from .bound import CONFIRMED, BoundReport
from .decoder import AboveCap, ExactBer

SCHEMA_VERSION = 1


def dumps(doc: Any) -> str:
    """Canonical JSON: sorted keys, fixed separators, trailing newline."""
    return json.dumps(doc, sort_keys=True, indent=1, separators=(",", ": "), allow_nan=False) + "\n"


def fmt(x: float | None) -> str:
    if x is None:
        return ""
    return format(float(x), ".17g")


def curves_csv(reports: Sequence[BoundReport], composite: Sequence[BoundReport] | None = None) -> str:
    """Long-format curves: one row per (bit, epsilon).

    Columns: bit, epsilon, ub, then cub when a composite run exists, lb, and
    exact when the oracle ran.
    """
    has_cub = bool(composite)
    has_exact = any(r.exact_values is not None for r in reports)
    header = ["bit", "epsilon", "ub"] + (["cub"] if has_cub else []) + ["lb"] + (["exact"] if has_exact else [])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for i, r in enumerate(reports):
        c = composite[i] if has_cub else None
        for j, e in enumerate(r.grid):
            row = [r.target, fmt(e), fmt(r.ub_values[j])]
            if has_cub:
                row.append(fmt(c.ub_values[j]))
            lb = max(r.lb_values[j], c.lb_values[j]) if c is not None else r.lb_values[j]
            row.append(fmt(lb))
            if has_exact:
                row.append(fmt(r.exact_values[j]) if r.exact_values is not None else "")
            w.writerow(row)
    return buf.getvalue()


@dataclass
class StatsRow:
    order: str
    num_bits: int
    order_star: int
    multi_star: int


def actual_leading(rep: BoundReport, exact: ExactBer | None = None,
                   enumerated=None) -> tuple[float | None, int | None, float | None]:
    """Best knowledge of the true (order, multiplicity) for one bit.

    Returns (order, multiplicity, lower). Unknown entries are None; when the
    order is unknown ``lower`` is a strict lower bound on it. A bit that can
    never fail has order inf.
    """
    if exact is not None:
        k, m = exact.leading()
        return k, (None if math.isinf(k) else int(m)), None
    if enumerated is not None and not isinstance(enumerated, AboveCap):
        return int(enumerated[0]), int(enumerated[1]), None
    if math.isinf(rep.order):
        return math.inf, None, None
    if rep.verdict == CONFIRMED:
        return int(rep.order), (None if rep.x_min.capped else len(rep.x_min_ss)), None
    # an uncapped, unconfirmed minimum weight rules out equality
    lower = int(rep.order) - (1 if rep.x_min.capped else 0)
    if isinstance(enumerated, AboveCap):
        lower = max(lower, enumerated.cap)
    return None, None, lower


def stats_table(reports: Sequence[BoundReport], exacts: Sequence[ExactBer | None] | None = None,
                enumerated: Sequence | None = None) -> list[StatsRow]:
    """Per-order counts: bits, bits whose UB order is tight, and tight in multiplicity too."""
    exacts = exacts or [None] * len(reports)
    enumerated = enumerated or [None] * len(reports)
    rows: dict[tuple[int, int], StatsRow] = {}
    for rep, ex, en in zip(reports, exacts, enumerated):
        k, m, lower = actual_leading(rep, ex, en)
        if k is None:
            key, label = (1, lower), f">{lower}"
        elif math.isinf(k):
            key, label = (2, 0), "none"
        else:
            key, label = (0, k), str(k)
        row = rows.setdefault(key, StatsRow(label, 0, 0, 0))
        row.num_bits += 1
        if k is not None and rep.order == k:
            row.order_star += 1
            if m is not None and rep.multiplicity == m:
                row.multi_star += 1
    return [rows[k] for k in sorted(rows)]


STATS_COLUMNS = ("order", "num_bits", "order_star", "multi_star")


def stats_csv(rows: Iterable[StatsRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(STATS_COLUMNS)
    for r in rows:
        w.writerow([r.order, r.num_bits, r.order_star, r.multi_star])
    return buf.getvalue()


def stats_text(rows: Sequence[StatsRow]) -> str:
    head = f"{'Order':>6} {'Num. bits':>10} {'order*':>7} {'+multi*':>8}"
    lines = [head] + [f"{r.order:>6} {r.num_bits:>10} {r.order_star:>7} {r.multi_star:>8}" for r in rows]
    return "\n".join(lines) + "\n"


def document(kind: str, code: dict[str, Any], config: dict[str, Any], body: dict[str, Any]) -> dict[str, Any]:
    return {"schema": SCHEMA_VERSION, "command": kind, "code": code, "config": config, **body}
