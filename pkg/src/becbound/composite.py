"""Composite upper bound: condition on a few variables, bound each cell, recombine."""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Any, Sequence

import numpy as np

from .bound import (CONFIRMED, UNCONFIRMED, UNKNOWN, BoundConfig, BoundReport, bound_bit,
                    lower_bound)
from .decoder import peel
from .code import Conditioning, TannerGraph, VariableSet, is_stopping_set, set_sort_key
from .poly import LeadingTerm, TruncatedPoly
from .tree import MinWeightSets, TreeStats

MAX_DEPTH = 6
STRATEGIES = ("uniform", "nonuniform")


@dataclass(frozen=True)
class Cell:
    conditioning: Conditioning
    ones: int
    zeros: int

    def probability(self, cap: int) -> TruncatedPoly:
        return TruncatedPoly.bernoulli_weight(self.ones, self.zeros, cap)

    def probability_values(self, eps: np.ndarray) -> np.ndarray:
        return eps ** self.ones * (1.0 - eps) ** self.zeros


@dataclass(frozen=True)
class Partition:
    cells: tuple[Cell, ...]
    variables: tuple[int, ...]
    strategy: str

    @property
    def depth(self) -> int:
        return len(self.variables)

    def total_probability(self, cap: int = 32) -> TruncatedPoly:
        acc = TruncatedPoly([], cap)
        for c in self.cells:
            acc = acc + c.probability(cap)
        return acc

    def descriptor(self) -> dict[str, Any]:
        return {"strategy": self.strategy, "variables": list(self.variables),
                "cells": [c.conditioning.to_dict() for c in self.cells]}


def split_scores(x_min: MinWeightSets | Sequence[VariableSet], target: int) -> Counter:
    sets = x_min.sets if isinstance(x_min, MinWeightSets) else x_min
    return Counter(v for s in sets for v in s.indices() if v != target)


def choose_variables(n: int, target: int, depth: int, scores: Counter | None = None,
                     exclude: Sequence[int] = ()) -> list[int]:
    """Highest-scoring variables first, ties and the remainder by index."""
    scores = scores or Counter()
    pool = [v for v in range(n) if v != target and v not in exclude]
    pool.sort(key=lambda v: (-scores.get(v, 0), v))
    return pool[:depth]


def make_partition(variables: Sequence[int], strategy: str = "nonuniform") -> Partition:
    variables = tuple(variables)
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown partition strategy {strategy!r}")
    if len(set(variables)) != len(variables):
        raise ValueError("split variables must be distinct")
    d = len(variables)
    if strategy == "uniform":
        cells = tuple(Cell(Conditioning(dict(zip(variables, bits))), sum(bits), d - sum(bits))
                      for bits in itertools.product((0, 1), repeat=d))
    else:
        cells = []
        for k in range(d):
            a = {u: 1 for u in variables[:k]}
            a[variables[k]] = 0
            cells.append(Cell(Conditioning(a), k, 1))
        cells.append(Cell(Conditioning({u: 1 for u in variables}), d, 0))
        cells = tuple(cells)
    return Partition(cells, variables, strategy)


def design_partition(g: TannerGraph, target: int, depth: int, strategy: str = "nonuniform",
                     base: BoundReport | None = None, variables: Sequence[int] | None = None,
                     max_depth: int = MAX_DEPTH) -> Partition:
    """Pick split variables (by frequency in the base run's minimum sets) and build cells."""
    if depth < 0 or depth > max_depth:
        raise ValueError(f"partition depth must lie in 0..{max_depth}")
    if variables is None:
        scores = split_scores(base.x_min, target) if base is not None else None
        variables = choose_variables(g.n, target, depth, scores)
    variables = list(variables)[:depth] if len(variables) > depth else list(variables)
    if target in variables:
        raise ValueError("the target bit cannot be a split variable")
    for v in variables:
        if not 0 <= v < g.n:
            raise ValueError(f"split variable {v} out of range")
    return make_partition(variables, strategy)


def _verified(g: TannerGraph, target: int, s: VariableSet) -> bool:
    return target in s and is_stopping_set(g, s)


def composite_bound(g: TannerGraph, target: int, partition: Partition,
                    cfg: BoundConfig | None = None, base: BoundReport | None = None,
                    cell_budget: int | None = None) -> BoundReport:
    """C-UB = sum_j P(A_j) UB_j, with the budget shared equally by default."""
    cfg = cfg or BoundConfig()
    grid = np.asarray(cfg.grid, dtype=float)
    M = len(partition.cells)
    per_cell = cell_budget if cell_budget is not None else max(1, cfg.budget // M)
    total = TruncatedPoly([], cfg.cap)
    values = np.zeros_like(grid)
    terms: list[tuple[float, int]] = []
    cells_out = []
    witnesses: dict[int, VariableSet] = {}
    any_capped = False
    stats = TreeStats(lf=cfg.lf)
    parts = []
    for cell in partition.cells:
        cond = cfg.conditioning.merged(cell.conditioning)
        sub = replace(cfg, budget=per_cell, conditioning=cond, exact=False, mc_trials=0)
        rep = bound_bit(g, target, sub)
        total = total + cell.probability(cfg.cap) * rep.ub
        values = values + cell.probability_values(grid) * rep.ub_values
        parts.append((cell, rep.evaluator))
        k, m = rep.leading
        terms.append((k + cell.ones, m))
        forced = sum(1 << v for v in cond.erased)
        for s in rep.x_min_ss:
            # the residual after peeling is the largest stopping set inside the pattern
            core = peel(g, s.bits | forced)
            if _verified(g, target, core):
                witnesses[core.bits] = core
        any_capped |= rep.x_min.capped
        for key in ("steps", "pivots", "refused_pivots", "closures", "relaxed", "size"):
            setattr(stats, key, getattr(stats, key) + getattr(rep.stats, key))
        stats.stopped_on_budget |= rep.stats.stopped_on_budget
        cells_out.append({"conditioning": cond.to_dict(), "ones": cell.ones, "zeros": cell.zeros,
                          "order": None if math.isinf(k) else int(k), "multiplicity": int(m),
                          "verdict": rep.verdict, "size": rep.stats.size})
    if base is not None:
        for s in base.x_min_ss:
            witnesses[s.bits] = s
    order = min(t[0] for t in terms)
    mult = 0 if math.isinf(order) else sum(t[1] for t in terms if t[0] == order)
    leading = LeadingTerm(order, mult)
    ws = sorted(witnesses.values(), key=lambda s: set_sort_key(s.bits))
    best = [s for s in ws if ws and len(s) == len(ws[0])]
    if best and len(best[0]) == order:
        verdict = CONFIRMED
    elif any_capped:
        verdict = UNKNOWN
    else:
        verdict = UNCONFIRMED
    ss = best if verdict == CONFIRMED else []
    lb, bonf = lower_bound(g, target, ss, cfg.cap)
    lb_values = lb.evaluate(grid)
    if bonf:
        lb_values = np.maximum(lb_values, 0.0)
    x_min = MinWeightSets(order, ss, any_capped)
    exact = base.exact if base is not None else None
    return BoundReport(
        target=target, ub=total, grid=grid, ub_values=values, leading=leading, verdict=verdict,
        x_min=x_min, x_min_ss=ss, lb=lb, lb_values=np.asarray(lb_values, dtype=float),
        lb_bonferroni=bonf, stats=stats, conditioning=cfg.conditioning, exact=exact,
        exact_values=None if exact is None else base.exact_values,
        partition=partition.descriptor(), cells=cells_out, label="cub",
        evaluator=lambda e: sum(c.probability_values(e) * f(e) for c, f in parts))
