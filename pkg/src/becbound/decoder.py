"""BEC peeling decoder, exhaustive oracles and Monte-Carlo estimation.

The batch routines are bit-sliced: every variable carries one machine word per
64 erasure patterns, so a synchronous peeling sweep over all patterns is a
handful of AND/OR operations per edge.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .code import (BudgetExceeded, TannerGraph, VariableSet, enumerate_stopping_sets,
                   DEFAULT_ENUM_BUDGET)
from .poly import DEFAULT_CAP, LeadingTerm, TruncatedPoly

DEFAULT_EXHAUSTIVE_LIMIT = 24
MC_BLOCK = 1 << 16

_ONES = np.uint64(0xFFFFFFFFFFFFFFFF)
_LOW_PATTERNS = [np.uint64(x) for x in (
    0xAAAAAAAAAAAAAAAA, 0xCCCCCCCCCCCCCCCC, 0xF0F0F0F0F0F0F0F0,
    0xFF00FF00FF00FF00, 0xFFFF0000FFFF0000, 0xFFFFFFFF00000000)]


def peel(g: TannerGraph, pattern: VariableSet | int, max_iters: int | None = None) -> VariableSet:
    """Residual erasures after synchronous peeling sweeps (to the fixed point by default)."""
    if isinstance(pattern, VariableSet):
        if pattern.n != g.n:
            raise ValueError(f"pattern width {pattern.n} does not match n = {g.n}")
        erased = pattern.bits
    else:
        erased = int(pattern)
    masks = g.check_masks
    sweeps = 0
    while erased and (max_iters is None or sweeps < max_iters):
        recovered = 0
        for cm in masks:
            hit = cm & erased
            if hit and hit & (hit - 1) == 0:
                recovered |= hit
        if not recovered:
            break
        erased &= ~recovered
        sweeps += 1
    return VariableSet(g.n, erased)


def peel_sequential(g: TannerGraph, pattern: int, order) -> int:
    """One-check-at-a-time peeling in the given check order, repeated to the fixed point."""
    masks = g.check_masks
    erased = int(pattern)
    changed = True
    while changed:
        changed = False
        for c in order:
            hit = masks[c] & erased
            if hit and hit & (hit - 1) == 0:
                erased &= ~hit
                changed = True
    return erased


def peel_sliced(g: TannerGraph, E: np.ndarray) -> np.ndarray:
    """Bit-sliced peeling to the fixed point; ``E`` has shape (n, words), modified in place."""
    rows = [np.asarray(r, dtype=np.intp) for r in g.check_neighbors]
    while True:
        rec = np.zeros_like(E)
        for r in rows:
            k = len(r)
            if k == 0:
                continue
            clear = ~E[r]
            if k == 1:
                rec[r[0]] |= _ONES
                continue
            # prefix/suffix ANDs give "all other neighbours clear" per position
            pre = np.empty_like(clear)
            suf = np.empty_like(clear)
            pre[0] = _ONES
            for i in range(1, k):
                pre[i] = pre[i - 1] & clear[i - 1]
            suf[k - 1] = _ONES
            for i in range(k - 2, -1, -1):
                suf[i] = suf[i + 1] & clear[i + 1]
            rec[r] |= pre & suf
        gain = E & rec
        if not gain.any():
            return E
        E &= ~rec


def _enumeration_words(N: int) -> tuple[np.ndarray, np.ndarray]:
    """Bit-sliced indicator words for all 2**N patterns, plus the valid-pattern mask."""
    W = max(1, (1 << N) >> 6)
    words = np.zeros((N, W), dtype=np.uint64)
    j = np.arange(W, dtype=np.uint64)
    for k in range(N):
        if k < 6:
            words[k] = _LOW_PATTERNS[k]
        else:
            words[k] = np.where((j >> np.uint64(k - 6)) & np.uint64(1), _ONES, np.uint64(0))
    valid = np.full(W, _ONES, dtype=np.uint64)
    if N < 6:
        valid[0] = np.uint64((1 << (1 << N)) - 1)
    return words, valid


def _weight_masks(N: int) -> np.ndarray:
    total = 1 << N
    weights = np.bitwise_count(np.arange(total, dtype=np.uint32))
    pad = max(64, total)
    out = np.zeros((N + 1, pad // 64), dtype=np.uint64)
    for w in range(N + 1):
        flags = np.zeros(pad, dtype=bool)
        flags[:total] = weights == w
        out[w] = np.packbits(flags, bitorder="little").view(np.uint64)
    return out


class ExhaustiveCounts(NamedTuple):
    free: tuple[int, ...]           # non-punctured variables, pattern bit k -> free[k]
    per_bit: np.ndarray             # (n, N+1) object array of ints
    frame: np.ndarray               # (N+1,) residual non-empty


@lru_cache(maxsize=32)
def _exhaustive(g: TannerGraph, punctured_bits: int, limit: int) -> ExhaustiveCounts:
    free = tuple(v for v in range(g.n) if not punctured_bits >> v & 1)
    N = len(free)
    if N > limit:
        raise BudgetExceeded(f"{N} free variables exceed the exhaustive limit {limit}")
    words, valid = _enumeration_words(N)
    E = np.empty((g.n, words.shape[1]), dtype=np.uint64)
    for k, v in enumerate(free):
        E[v] = words[k]
    for v in range(g.n):
        if punctured_bits >> v & 1:
            E[v] = valid
    del words
    peel_sliced(g, E)
    E &= valid
    wm = _weight_masks(N)
    per_bit = np.zeros((g.n, N + 1), dtype=object)
    for v in range(g.n):
        per_bit[v] = [int(x) for x in np.bitwise_count(E[v][None, :] & wm).sum(axis=1)]
    any_left = np.bitwise_or.reduce(E, axis=0)
    frame = np.array([int(x) for x in np.bitwise_count(any_left[None, :] & wm).sum(axis=1)],
                     dtype=object)
    return ExhaustiveCounts(free, per_bit, frame)


def exhaustive_counts(g: TannerGraph, punctured: VariableSet | None = None,
                      limit: int = DEFAULT_EXHAUSTIVE_LIMIT) -> ExhaustiveCounts:
    bits = 0 if punctured is None else punctured.bits
    return _exhaustive(g, bits, limit)


@dataclass(frozen=True)
class ExactBer:
    """Exact failure probability: sum_w counts[w] eps^w (1-eps)^(free - w)."""

    counts: tuple[int, ...]
    n_free: int
    target: int | None = None

    def __post_init__(self):
        for w, c in enumerate(self.counts):
            if not 0 <= c <= math.comb(self.n_free, w):
                raise ValueError(f"count {c} at weight {w} exceeds C({self.n_free},{w})")

    @property
    def int_coeffs(self) -> list[int]:
        N = self.n_free
        out = [0] * (N + 1)
        for w, c in enumerate(self.counts):
            if not c:
                continue
            for j in range(N - w + 1):
                out[w + j] += c * math.comb(N - w, j) * (-1) ** j
        while out and out[-1] == 0:
            out.pop()
        return out

    def polynomial(self, cap: int = DEFAULT_CAP) -> TruncatedPoly:
        return TruncatedPoly([float(c) for c in self.int_coeffs], cap)

    def evaluate(self, eps):
        e = np.asarray(eps, dtype=float)
        out = np.zeros_like(e)
        for w, c in enumerate(self.counts):
            if c:
                out = out + c * e ** w * (1 - e) ** (self.n_free - w)
        return float(out) if out.ndim == 0 else out

    def leading(self) -> LeadingTerm:
        coeffs = self.int_coeffs
        for k, c in enumerate(coeffs):
            if c:
                return LeadingTerm(k, c)
        return LeadingTerm(math.inf, 0)

    def to_json(self) -> str:
        return json.dumps({"target": self.target, "n_free": self.n_free,
                           "counts": list(self.counts), "coeffs": self.int_coeffs},
                          separators=(",", ":"))


def exact_ber(g: TannerGraph, target: int, punctured: VariableSet | None = None,
              limit: int = DEFAULT_EXHAUSTIVE_LIMIT) -> ExactBer:
    if not 0 <= target < g.n:
        raise ValueError(f"target {target} out of range")
    ec = exhaustive_counts(g, punctured, limit)
    return ExactBer(tuple(int(x) for x in ec.per_bit[target]), len(ec.free), target)


def exact_fer(g: TannerGraph, limit: int = DEFAULT_EXHAUSTIVE_LIMIT) -> ExactBer:
    """Probability that peeling leaves any erasure."""
    ec = exhaustive_counts(g, None, limit)
    return ExactBer(tuple(int(x) for x in ec.frame), len(ec.free), None)


class AboveCap(NamedTuple):
    cap: int

    def __str__(self):
        return f"greater than {self.cap}"


def exact_leading(g: TannerGraph, target: int, weight_cap: int,
                  budget: int = DEFAULT_ENUM_BUDGET) -> LeadingTerm | AboveCap:
    """Minimum weight and count of stopping sets that contain ``target``."""
    sets = enumerate_stopping_sets(g, weight_cap, must_contain=target, budget=budget)
    if not sets:
        return AboveCap(weight_cap)
    w = len(sets[0])
    return LeadingTerm(w, sum(1 for s in sets if len(s) == w))


# ---------------------------------------------------------------------------
# Monte-Carlo

@dataclass
class McEstimate:
    per_bit_failures: np.ndarray
    frame_failures: int
    trials: int
    eps: float
    seed: int
    punctured: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if np.any(self.per_bit_failures > self.trials) or self.frame_failures > self.trials:
            raise ValueError("failures exceed trials")

    @property
    def bit_rates(self) -> np.ndarray:
        return self.per_bit_failures / self.trials

    @property
    def frame_rate(self) -> float:
        return self.frame_failures / self.trials

    @property
    def bit_half_widths(self) -> np.ndarray:
        p = self.bit_rates
        return 1.96 * np.sqrt(p * (1 - p) / self.trials)

    @property
    def frame_half_width(self) -> float:
        p = self.frame_rate
        return 1.96 * math.sqrt(p * (1 - p) / self.trials)

    def sigma(self, bit: int) -> float:
        p = self.bit_rates[bit]
        return math.sqrt(p * (1 - p) / self.trials)

    def __eq__(self, other):
        if not isinstance(other, McEstimate):
            return NotImplemented
        return (np.array_equal(self.per_bit_failures, other.per_bit_failures)
                and self.frame_failures == other.frame_failures and self.trials == other.trials
                and self.eps == other.eps and self.seed == other.seed)


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, block])))


def _mc_block(args):
    g, eps, seed, block, size, punctured_bits = args
    rng = _block_rng(seed, block)
    W = (size + 63) // 64
    flags = rng.random((g.n, W * 64)) < eps
    flags[:, size:] = False
    E = np.packbits(flags, axis=1, bitorder="little").view(np.uint64).copy()
    valid = np.packbits(np.arange(W * 64) < size, bitorder="little").view(np.uint64)
    for v in range(g.n):
        if punctured_bits >> v & 1:
            E[v] = valid
    peel_sliced(g, E)
    E &= valid
    per_bit = np.bitwise_count(E).sum(axis=1).astype(np.int64)
    frame = int(np.bitwise_count(np.bitwise_or.reduce(E, axis=0)).sum())
    return per_bit, frame


def monte_carlo(g: TannerGraph, eps: float, trials: int, seed: int,
                punctured: VariableSet | None = None, workers: int = 1) -> McEstimate:
    """Estimate per-bit and frame failure rates.

    Trials are drawn in fixed blocks of ``MC_BLOCK``; block ``b`` uses a Philox
    stream keyed by ``(seed, b)``, so results do not depend on ``workers``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0 <= eps <= 1:
        raise ValueError("eps must lie in [0, 1]")
    pbits = 0 if punctured is None else punctured.bits
    jobs = []
    done = 0
    b = 0
    while done < trials:
        size = min(MC_BLOCK, trials - done)
        jobs.append((g, float(eps), int(seed), b, size, pbits))
        done += size
        b += 1
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(_mc_block, jobs))
    else:
        results = [_mc_block(j) for j in jobs]
    per_bit = np.sum([r[0] for r in results], axis=0).astype(np.int64)
    frame = sum(r[1] for r in results)
    punct = tuple(punctured.indices()) if punctured is not None else ()
    return McEstimate(per_bit, frame, trials, float(eps), int(seed), punct)


def mc_to_csv(estimates: list[McEstimate]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["epsilon", "bit", "rate", "ci_half_width", "trials"])
    for est in estimates:
        hw = est.bit_half_widths
        for v, r in enumerate(est.bit_rates):
            w.writerow([repr(est.eps), v, repr(float(r)), repr(float(hw[v])), est.trials])
    return buf.getvalue()
