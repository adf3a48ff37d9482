"""Per-bit bound reports: upper bound, tightness check, lower bound."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .code import (Conditioning, TannerGraph, VariableSet, fer_transform, is_stopping_set,
                   set_sort_key)
from .decoder import DEFAULT_EXHAUSTIVE_LIMIT, ExactBer, McEstimate, exact_ber, monte_carlo, peel
from .poly import DEFAULT_CAP, LeadingTerm, TruncatedPoly
from .tree import (DEFAULT_BUDGET, DEFAULT_SET_CAP, ComputationTree, LFStrategy, MinWeightSets,
                   TreeStats)

CONFIRMED = "order-tight-confirmed"
UNCONFIRMED = "unconfirmed"
UNKNOWN = "unknown-beyond-cap"
VERDICTS = (CONFIRMED, UNCONFIRMED, UNKNOWN)

EXACT_LB_SETS = 20


def default_grid() -> np.ndarray:
    return np.linspace(0.01, 1.0, 100)


@dataclass
class BoundConfig:
    budget: int = DEFAULT_BUDGET
    lf: str = "narrowing"
    refresh: int = 16
    cap: int = DEFAULT_CAP
    set_cap: int = DEFAULT_SET_CAP
    grid: np.ndarray = field(default_factory=default_grid)
    conditioning: Conditioning = field(default_factory=Conditioning)
    pivoting: str = "lazy"
    exact: bool | None = None            # None: attach when the code is small enough
    exact_limit: int = DEFAULT_EXHAUSTIVE_LIMIT
    mc_trials: int = 0
    seed: int = 0

    def strategy(self) -> LFStrategy:
        return LFStrategy(self.lf, self.refresh)


def _witness_check(g: TannerGraph, target: int, forced: frozenset[int], revealed: frozenset[int]):
    if not forced and not revealed:
        return lambda s: target in s and is_stopping_set(g, s)

    def check(s: VariableSet) -> bool:
        pattern = s.bits
        for v in forced:
            pattern |= 1 << v
        for v in revealed:
            pattern &= ~(1 << v)
        return target in peel(g, pattern)
    return check


def confirm_tightness(tree: ComputationTree, x_min: MinWeightSets) -> tuple[str, list[VariableSet]]:
    """Filter the minimum-weight sets through the stopping-set test."""
    ss = [s for s in x_min.sets if tree.confirms(s)]
    if ss:
        return CONFIRMED, ss
    if x_min.capped:
        return UNKNOWN, []
    return UNCONFIRMED, []


def _masks(sets: Sequence[VariableSet]) -> np.ndarray:
    n = sets[0].n
    words = (n + 63) // 64
    out = np.zeros((len(sets), words), dtype=np.uint64)
    for i, s in enumerate(sets):
        b = s.bits
        for w in range(words):
            out[i, w] = (b >> (64 * w)) & 0xFFFFFFFFFFFFFFFF
    return out


def _popcount(m: np.ndarray) -> np.ndarray:
    return np.bitwise_count(m).sum(axis=-1).astype(np.int64)


def union_probability_coeffs(sets: Sequence[VariableSet]) -> tuple[np.ndarray, bool]:
    """Integer coefficients (by degree) of P(some set fully erased).

    Exact inclusion-exclusion up to ``EXACT_LB_SETS`` sets; beyond that the
    second Bonferroni truncation, which is a lower bound (flag True).
    """
    if not sets:
        return np.zeros(0, dtype=np.int64), False
    m = _masks(sets)
    n = sets[0].n
    coeffs = np.zeros(n + 1, dtype=np.int64)
    k = len(sets)
    if k <= EXACT_LB_SETS:
        unions = np.zeros((1, m.shape[1]), dtype=np.uint64)
        signs = np.array([-1], dtype=np.int64)
        for i in range(k):
            unions = np.concatenate([unions, unions | m[i]])
            signs = np.concatenate([signs, -signs])
        np.add.at(coeffs, _popcount(unions[1:]), signs[1:])
        return coeffs, False
    np.add.at(coeffs, _popcount(m), 1)
    for i in range(k - 1):
        np.add.at(coeffs, _popcount(m[i + 1:] | m[i]), -1)
    return coeffs, True


def lower_bound(g: TannerGraph, target: int, x_min_ss: Sequence[VariableSet],
                cap: int = DEFAULT_CAP, conditioning: Conditioning | None = None,
                punctured: VariableSet | None = None) -> tuple[TruncatedPoly, bool]:
    """P(one of the stopping sets is fully erased) <= P(target unrecovered).

    Returns the polynomial and whether it is the clamped pairwise truncation
    (evaluate with ``max(0, .)`` in that case).
    """
    conditioning = conditioning or Conditioning()
    forced = frozenset(conditioning.erased) | frozenset(
        punctured.indices() if punctured is not None else ())
    ok = _witness_check(g, target, forced, frozenset(conditioning.revealed))
    for s in x_min_ss:
        if s.n != g.n or not ok(s):
            raise ValueError(f"{s!r} is not a verified stopping set for bit {target}")
    if not x_min_ss:
        return TruncatedPoly([], cap), False
    coeffs, bonferroni = union_probability_coeffs(list(x_min_ss))
    return TruncatedPoly(coeffs.astype(float), cap), bonferroni


@dataclass
class BoundReport:
    target: int
    ub: TruncatedPoly
    grid: np.ndarray
    ub_values: np.ndarray
    leading: LeadingTerm
    verdict: str
    x_min: MinWeightSets
    x_min_ss: list[VariableSet]
    lb: TruncatedPoly
    lb_values: np.ndarray
    lb_bonferroni: bool
    stats: TreeStats
    conditioning: Conditioning = field(default_factory=Conditioning)
    exact: ExactBer | None = None
    exact_values: np.ndarray | None = None
    mc: McEstimate | None = None
    partition: dict[str, Any] | None = None
    cells: list[dict[str, Any]] | None = None
    label: str = "ub"
    # UB(eps) computed from the tree itself, exact even where the polynomial was truncated
    evaluator: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)

    def evaluate(self, eps) -> np.ndarray:
        e = np.atleast_1d(np.asarray(eps, dtype=float))
        if self.evaluator is not None:
            return self.evaluator(e)
        return np.atleast_1d(self.ub.evaluate(e))

    @property
    def order(self) -> float:
        return self.leading.order

    @property
    def multiplicity(self) -> float:
        return self.leading.multiplicity

    def max_ratio(self) -> float | None:
        """Largest UB/exact ratio on the grid, where exact is positive."""
        if self.exact_values is None:
            return None
        pos = self.exact_values > 0
        if not np.any(pos):
            return None
        return float(np.max(self.ub_values[pos] / self.exact_values[pos]))

    def to_dict(self) -> dict[str, Any]:
        lead = self.leading
        d: dict[str, Any] = {
            "target": self.target,
            "kind": self.label,
            "order": None if math.isinf(lead.order) else int(lead.order),
            "multiplicity": int(lead.multiplicity),
            "verdict": self.verdict,
            "ub": self.ub.to_dict(),
            "lb": self.lb.to_dict(),
            "lb_bonferroni": self.lb_bonferroni,
            "x_min": {
                "weight": None if math.isinf(self.x_min.weight) else int(self.x_min.weight),
                "sets": [s.indices() for s in self.x_min.sets],
                "capped": self.x_min.capped,
            },
            "x_min_ss": [s.indices() for s in self.x_min_ss],
            "conditioning": self.conditioning.to_dict(),
            "stats": self.stats.to_dict(),
            "grid": [float(e) for e in self.grid],
            "ub_values": [float(v) for v in self.ub_values],
            "lb_values": [float(v) for v in self.lb_values],
        }
        if self.exact is not None:
            d["exact"] = {"counts": list(self.exact.counts), "n_free": self.exact.n_free,
                          "coeffs": self.exact.int_coeffs,
                          "values": [float(v) for v in self.exact_values]}
            d["max_ratio"] = self.max_ratio()
        if self.mc is not None:
            d["mc"] = {"trials": self.mc.trials, "eps": self.mc.eps, "seed": self.mc.seed,
                       "failures": int(self.mc.per_bit_failures[self.target])}
        if self.partition is not None:
            d["partition"] = self.partition
        if self.cells is not None:
            d["cells"] = self.cells
        return d


def _exact_for(g: TannerGraph, target: int, cfg: BoundConfig,
               punctured: VariableSet | None) -> ExactBer | None:
    free = g.n - (len(punctured) if punctured is not None else 0)
    want = cfg.exact if cfg.exact is not None else free <= cfg.exact_limit
    if not want or cfg.conditioning.assignment:
        return None
    return exact_ber(g, target, punctured, max(cfg.exact_limit, free) if cfg.exact else cfg.exact_limit)


def bound_bit(g: TannerGraph, target: int, cfg: BoundConfig | None = None,
              punctured: VariableSet | None = None) -> BoundReport:
    """Build the tree for one bit and assemble its report."""
    cfg = cfg or BoundConfig()
    grid = np.asarray(cfg.grid, dtype=float)
    tree = ComputationTree(g, target, cfg.budget, cfg.strategy(), cfg.conditioning, punctured,
                           cfg.pivoting).build()
    ub = tree.evaluate_poly(cfg.cap)
    x_min = tree.min_sets(cfg.set_cap)
    verdict, ss = confirm_tightness(tree, x_min)
    lb, bonf = lower_bound(g, target, ss, cfg.cap, cfg.conditioning, punctured)
    lb_values = lb.evaluate(grid)
    if bonf:
        lb_values = np.maximum(lb_values, 0.0)
    exact = _exact_for(g, target, cfg, punctured)
    mc = None
    if cfg.mc_trials:
        # one estimate at the grid midpoint; curves come from the CLI
        mc = monte_carlo(g, float(grid[len(grid) // 2]), cfg.mc_trials, cfg.seed, punctured)
    return BoundReport(
        target=target, ub=ub, grid=grid, ub_values=tree.evaluate_values(grid),
        leading=tree.leading_exact(), verdict=verdict, x_min=x_min, x_min_ss=ss,
        lb=lb, lb_values=np.asarray(lb_values, dtype=float), lb_bonferroni=bonf,
        stats=tree.stats, conditioning=cfg.conditioning, exact=exact,
        exact_values=None if exact is None else np.asarray(exact.evaluate(grid)), mc=mc,
        evaluator=tree.evaluate_values)


def bound_fer(g: TannerGraph, cfg: BoundConfig | None = None) -> BoundReport:
    """Frame-error bound: the auxiliary bit of the transformed code."""
    g2, target, punct = fer_transform(g)
    cfg = cfg or BoundConfig()
    rep = bound_bit(g2, target, cfg, punct)
    rep.label = "fer"
    return rep


@dataclass
class StoppingDistance:
    answer: str                      # "yes" | "no" | "unknown"
    t: int
    witness: VariableSet | None = None
    min_weight: float = math.inf
    stats: TreeStats | None = None
    stage: str = "frame"             # which search settled the answer
    trees: int = 1

    def to_dict(self) -> dict[str, Any]:
        return {"answer": self.answer, "t": self.t,
                "witness": None if self.witness is None else self.witness.indices(),
                "min_weight": None if math.isinf(self.min_weight) else int(self.min_weight),
                "stage": self.stage, "trees": self.trees,
                "stats": None if self.stats is None else self.stats.to_dict()}


def _search(tree: ComputationTree, t: int, set_cap: int, check_every: int, verify, low: int):
    """Grow ``tree`` until it certifies weight > t, yields a verified witness, or stops.

    Returns (answer, witness) with answer in {"no", "yes", None}.
    """
    def probe():
        if tree.min_weight > t:
            return "no", None
        for s in tree.min_sets(set_cap).sets:
            bits = s.bits & low
            if bits and verify(bits):
                return "yes", bits
        return None, None

    steps = 0
    while tree.step():
        steps += 1
        if steps % check_every == 0:
            found = probe()
            if found[0]:
                tree.freeze()
                return found
    tree.freeze()
    return probe()


def decide_stopping_distance(g: TannerGraph, t: int, budget: int = DEFAULT_BUDGET,
                             lf: str = "narrowing", set_cap: int = DEFAULT_SET_CAP,
                             check_every: int = 64, pivoting: str = "lazy",
                             split: bool = True) -> StoppingDistance:
    """Is there a stopping set of weight <= t?

    The frame tree is tried first. ``no`` is certified once its minimum weight
    exceeds t, since the tree function dominates the decoder everywhere; ``yes``
    needs a verified witness among the minimum-weight sets.

    If the frame tree runs out of budget and ``split`` is set, bit ``i`` gets
    its own tree with bits ``0..i-1`` revealed. A stopping set whose smallest
    member is ``i`` still stalls bit ``i`` under that conditioning, so all
    trees exceeding weight t again rules out every set of weight <= t. Each
    tree gets the full ``budget``.
    """
    if t < 1:
        raise ValueError("t must be >= 1")
    g2, target, punct = fer_transform(g)
    low = (1 << g.n) - 1
    verify = lambda bits: is_stopping_set(g, bits)  # noqa: E731
    tree = ComputationTree(g2, target, budget, lf, None, punct, pivoting)
    answer, bits = _search(tree, t, set_cap, check_every, verify, low)
    if answer:
        witness = VariableSet(g.n, bits) if bits else None
        return StoppingDistance(answer, t, witness, tree.min_weight, tree.stats)
    if not split:
        return StoppingDistance("unknown", t, None, tree.min_weight, tree.stats)
    weight = math.inf
    unsettled = False
    for i in range(g.n):
        cond = Conditioning({v: 0 for v in range(i)})
        sub = ComputationTree(g, i, budget, lf, cond, None, pivoting)
        answer, bits = _search(sub, t, set_cap, check_every, verify, low)
        weight = min(weight, sub.min_weight)
        if answer == "yes":
            return StoppingDistance("yes", t, VariableSet(g.n, bits), sub.min_weight, sub.stats, "split", i + 2)
        if answer is None:
            unsettled = True
    final = "unknown" if unsettled else "no"
    return StoppingDistance(final, t, None, weight, None, "split", g.n + 1)


def sort_sets(sets: Sequence[VariableSet]) -> list[VariableSet]:
    return sorted(sets, key=lambda s: set_sort_key(s.bits))
