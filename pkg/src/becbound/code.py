"""Tanner graphs, stopping sets and code fixtures."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np


class AlistError(ValueError):
    """Malformed alist input; ``line`` is 1-based."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class TannerGraph:
    n: int
    m: int
    check_neighbors: tuple[tuple[int, ...], ...]
    name: str = ""
    var_neighbors: tuple[tuple[int, ...], ...] = field(init=False, repr=False)

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError("a Tanner graph needs n >= 1 and m >= 1")
        if len(self.check_neighbors) != self.m:
            raise ValueError(f"expected {self.m} check rows, got {len(self.check_neighbors)}")
        rows = []
        var_nb: list[list[int]] = [[] for _ in range(self.n)]
        for c, row in enumerate(self.check_neighbors):
            row = tuple(sorted(int(v) for v in row))
            if len(set(row)) != len(row):
                raise ValueError(f"check {c} lists a variable twice")
            for v in row:
                if not 0 <= v < self.n:
                    raise ValueError(f"check {c}: variable {v} out of range")
                var_nb[v].append(c)
            rows.append(row)
        object.__setattr__(self, "check_neighbors", tuple(rows))
        object.__setattr__(self, "var_neighbors", tuple(tuple(r) for r in var_nb))

    @classmethod
    def from_checks(cls, n: int, checks: Iterable[Iterable[int]], name: str = "") -> "TannerGraph":
        checks = [tuple(c) for c in checks]
        return cls(n, len(checks), tuple(checks), name)

    @classmethod
    def from_matrix(cls, H, name: str = "") -> "TannerGraph":
        H = np.asarray(H)
        m, n = H.shape
        return cls(n, m, tuple(tuple(np.flatnonzero(row).tolist()) for row in H), name)

    def to_matrix(self) -> np.ndarray:
        H = np.zeros((self.m, self.n), dtype=np.uint8)
        for c, row in enumerate(self.check_neighbors):
            H[c, list(row)] = 1
        return H

    @property
    def check_masks(self) -> tuple[int, ...]:
        return tuple(sum(1 << v for v in row) for row in self.check_neighbors)

    def __eq__(self, other):
        if not isinstance(other, TannerGraph):
            return NotImplemented
        return (self.n, self.m, self.check_neighbors) == (other.n, other.m, other.check_neighbors)

    def __hash__(self):
        return hash((self.n, self.m, self.check_neighbors))

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "m": self.m,
                           "checks": [list(r) for r in self.check_neighbors]},
                          separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str, name: str = "") -> "TannerGraph":
        d = json.loads(text)
        return cls(d["n"], d["m"], tuple(tuple(r) for r in d["checks"]), name)


@dataclass(frozen=True)
class VariableSet:
    """Fixed-width bit set over variable indices; bit v set means v is erased."""

    n: int
    bits: int = 0

    def __post_init__(self):
        if self.bits < 0 or self.bits >> self.n:
            raise ValueError("bits outside the declared width")

    @classmethod
    def of(cls, n: int, indices: Iterable[int]) -> "VariableSet":
        bits = 0
        for v in indices:
            if not 0 <= v < n:
                raise ValueError(f"index {v} outside width {n}")
            bits |= 1 << v
        return cls(n, bits)

    def _check(self, other: "VariableSet"):
        if other.n != self.n:
            raise ValueError(f"width mismatch: {self.n} vs {other.n}")

    def __or__(self, other):
        self._check(other)
        return VariableSet(self.n, self.bits | other.bits)

    def __and__(self, other):
        self._check(other)
        return VariableSet(self.n, self.bits & other.bits)

    def __sub__(self, other):
        self._check(other)
        return VariableSet(self.n, self.bits & ~other.bits)

    def __len__(self):
        return self.bits.bit_count()

    def __contains__(self, v: int):
        return bool(self.bits >> v & 1)

    def __iter__(self):
        return iter(mask_indices(self.bits))

    def issubset(self, other: "VariableSet") -> bool:
        self._check(other)
        return self.bits & ~other.bits == 0

    def indices(self) -> list[int]:
        return mask_indices(self.bits)

    def __repr__(self):
        return f"VariableSet({self.indices()})"


def mask_indices(bits: int) -> list[int]:
    out = []
    while bits:
        low = bits & -bits
        out.append(low.bit_length() - 1)
        bits ^= low
    return out


def set_sort_key(bits: int):
    return (bits.bit_count(), mask_indices(bits))


@dataclass(frozen=True)
class Conditioning:
    """Variables pinned to revealed (0) or erased (1)."""

    assignment: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        for v, b in self.assignment.items():
            if b not in (0, 1):
                raise ValueError(f"variable {v}: value must be 0 or 1, got {b}")
        object.__setattr__(self, "assignment", dict(sorted(self.assignment.items())))

    def validate(self, n: int, target: int | None = None):
        for v in self.assignment:
            if not 0 <= v < n:
                raise ValueError(f"conditioned variable {v} out of range")
        if target is not None and target in self.assignment:
            raise ValueError(f"target {target} cannot be conditioned")

    @property
    def erased(self) -> frozenset[int]:
        return frozenset(v for v, b in self.assignment.items() if b == 1)

    @property
    def revealed(self) -> frozenset[int]:
        return frozenset(v for v, b in self.assignment.items() if b == 0)

    def merged(self, other: "Conditioning") -> "Conditioning":
        both = dict(self.assignment)
        for v, b in other.assignment.items():
            if both.get(v, b) != b:
                raise ValueError(f"conflicting conditioning on variable {v}")
            both[v] = b
        return Conditioning(both)

    def to_dict(self) -> dict[str, int]:
        return {str(v): b for v, b in self.assignment.items()}


# ---------------------------------------------------------------------------
# alist I/O

def parse_alist(text: str, name: str = "") -> TannerGraph:
    lines = [(i + 1, ln.split()) for i, ln in enumerate(text.splitlines())]
    lines = [(i, toks) for i, toks in lines if toks]
    pos = 0

    def take(what: str):
        nonlocal pos
        if pos >= len(lines):
            last = lines[-1][0] if lines else 0
            raise AlistError(f"unexpected end of input, expected {what}", last + 1)
        lineno, toks = lines[pos]
        pos += 1
        try:
            return lineno, [int(t) for t in toks]
        except ValueError:
            raise AlistError(f"non-integer token in {what}", lineno) from None

    lineno, head = take("header 'n m'")
    if len(head) != 2 or head[0] < 1 or head[1] < 1:
        raise AlistError("header must be two positive integers 'n m'", lineno)
    n, m = head
    lineno, maxes = take("maximum degrees")
    if len(maxes) != 2:
        raise AlistError("second line must hold 'max_var_deg max_chk_deg'", lineno)
    lineno, vdeg = take("variable degrees")
    if len(vdeg) != n:
        raise AlistError(f"expected {n} variable degrees, got {len(vdeg)}", lineno)
    lineno, cdeg = take("check degrees")
    if len(cdeg) != m:
        raise AlistError(f"expected {m} check degrees, got {len(cdeg)}", lineno)
    if max(vdeg) > maxes[0] or max(cdeg) > maxes[1]:
        raise AlistError("a degree exceeds the declared maximum", lineno)

    def rows(count: int, degrees: list[int], limit: int, kind: str):
        out = []
        for k in range(count):
            lineno, vals = take(f"{kind} row {k + 1}")
            entries = [v for v in vals if v != 0]
            if len(entries) != degrees[k]:
                raise AlistError(f"{kind} {k + 1} has {len(entries)} entries, degree says {degrees[k]}",
                                 lineno)
            if len(set(entries)) != len(entries):
                raise AlistError(f"duplicate edge in {kind} row {k + 1}", lineno)
            for v in entries:
                if not 1 <= v <= limit:
                    raise AlistError(f"index {v} out of range 1..{limit}", lineno)
            out.append((lineno, sorted(v - 1 for v in entries)))
        return out

    var_rows = rows(n, vdeg, m, "variable")
    chk_rows = rows(m, cdeg, n, "check")
    from_vars = {(c, v) for v, (_, r) in enumerate(var_rows) for c in r}
    for c, (lineno, r) in enumerate(chk_rows):
        for v in r:
            if (c, v) not in from_vars:
                raise AlistError(f"check {c + 1} lists variable {v + 1}, which does not list it back",
                                 lineno)
    if len(from_vars) != sum(cdeg):
        raise AlistError("variable and check rows describe different edge sets", var_rows[0][0])
    return TannerGraph(n, m, tuple(tuple(r) for _, r in chk_rows), name)


def write_alist(g: TannerGraph) -> str:
    vdeg = [len(r) for r in g.var_neighbors]
    cdeg = [len(r) for r in g.check_neighbors]
    mv, mc = max(vdeg), max(cdeg)

    def fmt(row, width):
        vals = [v + 1 for v in row] + [0] * (width - len(row))
        return " ".join(map(str, vals))

    out = [f"{g.n} {g.m}", f"{mv} {mc}", " ".join(map(str, vdeg)), " ".join(map(str, cdeg))]
    out += [fmt(r, mv) for r in g.var_neighbors]
    out += [fmt(r, mc) for r in g.check_neighbors]
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# fixtures

FIG1_CHECKS = ((0, 1, 2), (1, 3, 5), (2, 3, 4), (0, 4, 5))

# Bordered extended-Golay matrix B (border row/column first); G24 = [I12 | B].
_GOLAY_B12 = (
    "011111111111",
    "111011100010",
    "110111000101",
    "101110001011",
    "111100010110",
    "111000101101",
    "110001011011",
    "100010110111",
    "100101101110",
    "101011011100",
    "110110111000",
    "101101110001",
)
GOLAY_PUNCTURED_COLUMN = 3


def golay_parity_block() -> np.ndarray:
    """12 x 11 parity block P of the systematic (23,12) Golay generator [I | P]."""
    B = np.array([[int(ch) for ch in row] for row in _GOLAY_B12], dtype=np.uint8)
    return np.delete(B, GOLAY_PUNCTURED_COLUMN, axis=1)


def golay_generator_matrix() -> np.ndarray:
    return np.hstack([np.eye(12, dtype=np.uint8), golay_parity_block()])


def builtin_code(name: str) -> TannerGraph:
    if name == "fig1":
        return TannerGraph.from_checks(6, FIG1_CHECKS, "fig1")
    if name == "hamming74":
        A = np.array([[1, 1, 0, 1], [1, 0, 1, 1], [0, 1, 1, 1]], dtype=np.uint8)
        return TannerGraph.from_matrix(np.hstack([A, np.eye(3, dtype=np.uint8)]), "hamming74")
    if name == "golay23":
        B = golay_parity_block().T
        return TannerGraph.from_matrix(np.hstack([B, np.eye(11, dtype=np.uint8)]), "golay23")
    raise KeyError(f"unknown builtin code {name!r}; choose from fig1, hamming74, golay23")


BUILTIN_NAMES = ("fig1", "hamming74", "golay23")


def generate_regular(n: int, dv: int, dc: int, seed: int, max_rounds: int = 1000) -> TannerGraph:
    """Seeded (dv, dc)-regular simple graph via the configuration model.

    Multi-edges are removed by swapping the check endpoint of a duplicate edge
    with that of a uniformly chosen other edge, for at most ``max_rounds`` passes.
    """
    if n < 1 or dv < 1 or dc < 1:
        raise ValueError("n, dv and dc must be positive")
    if (n * dv) % dc:
        raise ValueError(f"n*dv = {n * dv} is not divisible by dc = {dc}")
    m = n * dv // dc
    if dc > n or dv > m:
        raise ValueError("degrees too large for a simple graph")
    rng = np.random.default_rng(seed)
    var_sock = np.repeat(np.arange(n), dv)
    chk_sock = rng.permutation(np.repeat(np.arange(m), dc))
    E = len(var_sock)
    for _ in range(max_rounds):
        seen: dict[tuple[int, int], int] = {}
        dups = []
        for e in range(E):
            key = (int(var_sock[e]), int(chk_sock[e]))
            if key in seen:
                dups.append(e)
            else:
                seen[key] = e
        if not dups:
            break
        for e in dups:
            f = int(rng.integers(E))
            chk_sock[e], chk_sock[f] = chk_sock[f], chk_sock[e]
    else:
        raise RuntimeError(f"could not remove multi-edges in {max_rounds} rounds")
    checks: list[list[int]] = [[] for _ in range(m)]
    for v, c in zip(var_sock.tolist(), chk_sock.tolist()):
        checks[c].append(v)
    return TannerGraph.from_checks(n, checks, f"regular-{dv}-{dc}-n{n}-s{seed}")


def generate_random(n: int, m: int, seed: int, density: float = 0.4) -> TannerGraph:
    """Small irregular code: Bernoulli(density) incidence, every node degree >= 1."""
    rng = np.random.default_rng(seed)
    H = (rng.random((m, n)) < density).astype(np.uint8)
    for v in range(n):
        if not H[:, v].any():
            H[rng.integers(m), v] = 1
    for c in range(m):
        if not H[c].any():
            H[c, rng.integers(n)] = 1
    return TannerGraph.from_matrix(H, f"random-n{n}-m{m}-s{seed}")


def fer_transform(g: TannerGraph) -> tuple[TannerGraph, int, VariableSet]:
    """Append a punctured variable tied by one new check to every variable."""
    n = g.n + 1
    checks = list(g.check_neighbors) + [tuple(range(n))]
    g2 = TannerGraph.from_checks(n, checks, f"{g.name}+fer" if g.name else "fer")
    return g2, g.n, VariableSet.of(n, [g.n])


# ---------------------------------------------------------------------------
# stopping sets

def is_stopping_set(g: TannerGraph, s: VariableSet | int) -> bool:
    bits = _bits(g, s)
    if not bits:
        return False
    for cm in g.check_masks:
        if (cm & bits).bit_count() == 1:
            return False
    return True


def _bits(g: TannerGraph, s) -> int:
    if isinstance(s, VariableSet):
        if s.n != g.n:
            raise ValueError(f"set width {s.n} does not match n = {g.n}")
        return s.bits
    return int(s)


DEFAULT_ENUM_BUDGET = 50_000_000


def enumerate_stopping_sets(g: TannerGraph, max_weight: int, must_contain: int | None = None,
                            budget: int = DEFAULT_ENUM_BUDGET, chunk: int = 200_000) -> list[VariableSet]:
    """All stopping sets of weight <= max_weight by exhaustive subset scan."""
    free = [v for v in range(g.n) if v != must_contain]
    base = 0 if must_contain is None else 1
    work = sum(math.comb(len(free), w - base) for w in range(base, max_weight + 1) if w - base >= 0)
    if work > budget:
        raise BudgetExceeded(f"{work} subsets exceed the enumeration budget {budget}")
    H = g.to_matrix().astype(np.int16)
    out: list[int] = []
    for w in range(1, max_weight + 1):
        k = w - base
        if k < 0 or k > len(free):
            continue
        combos = itertools.combinations(free, k)
        while True:
            block = list(itertools.islice(combos, chunk))
            if not block:
                break
            idx = np.array(block, dtype=np.int64).reshape(len(block), k)
            if must_contain is not None:
                idx = np.hstack([np.full((len(block), 1), must_contain), idx])
            counts = H[:, idx].sum(axis=2)          # m x B
            ok = ~(counts == 1).any(axis=0)
            for row in idx[ok]:
                out.append(sum(1 << int(v) for v in row))
    out.sort(key=set_sort_key)
    return [VariableSet(g.n, b) for b in out]


def is_simple(checks: Sequence[Sequence[int]]) -> bool:
    return all(len(set(r)) == len(r) for r in checks)
