"""Budget-limited, pivoted decoding trees and their bounds.

A tree node is one of

* a variable node: the AND of its literal and its check children. A Free
  literal contributes ``x_v``; a Fixed1 literal contributes the constant 1.
  Fixed0 occurrences are the constant 0 and are pruned on creation, together
  with every ancestor they force to 0.
* a check node: the OR of its variable children (empty OR is 0, i.e. the
  check recovers its parent).
* a pivot node: ``f|_{v=0} + x_v * f|_{v=1}``, stored as OR(S0, gate) where the
  gate is a variable node carrying the Free literal ``x_v`` above S1.

Invariant maintained by the builder: two Free occurrences of the same variable
never meet at a variable node (their youngest common ancestor is a check or a
pivot). Under that invariant the product rule at variable nodes is exact and
the independent-OR rule at check/pivot nodes is an upper bound, so the
evaluated polynomial bounds the bit error rate from above.

A newly created occurrence of ``v`` below another (non-gate) occurrence of
``v`` closes a cycle; it is hardwired to 1 and its check drops out of the AND.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable

import numpy as np

from .code import Conditioning, TannerGraph, VariableSet, is_stopping_set, set_sort_key
from .decoder import peel
from .poly import DEFAULT_CAP, LeadingTerm, TruncatedPoly

VAR, CHECK, PIVOT = 0, 1, 2
KIND_NAMES = {VAR: "var", CHECK: "check", PIVOT: "pivot"}

DEFAULT_BUDGET = 4096
DEFAULT_SET_CAP = 4096
DEFAULT_REFRESH = 16
# eager: resolve a repeated literal by pivoting as soon as it appears;
# lazy: drop its literal and pivot only when the leaf is chosen for expansion;
# never: drop the literal for good (looser polynomial, far smaller trees).
PIVOT_POLICIES = ("eager", "lazy", "never")


class LiteralState(Enum):
    FREE = "free"
    FIXED0 = "fixed0"
    FIXED1 = "fixed1"


FREE = LiteralState.FREE
FIXED1 = LiteralState.FIXED1


@dataclass(frozen=True)
class LFStrategy:
    """Leaf-finding strategy: ``bfs`` (oldest leaf) or ``narrowing``."""

    identifier: str = "narrowing"
    refresh: int = DEFAULT_REFRESH

    def __post_init__(self):
        if self.identifier not in ("bfs", "narrowing"):
            raise ValueError(f"unknown leaf-finding strategy {self.identifier!r}")
        if self.refresh < 1:
            raise ValueError("refresh period must be >= 1")

    @classmethod
    def coerce(cls, lf) -> "LFStrategy":
        if isinstance(lf, LFStrategy):
            return lf
        return cls(str(lf))


class TreeNode:
    __slots__ = ("id", "kind", "index", "state", "gate", "parent", "children", "via",
                 "expanded", "depth", "mask", "w", "hot", "alive", "relaxed", "pending")

    def __init__(self, nid, kind, index, state=FREE, parent=None, via=None, depth=0):
        self.id = nid
        self.kind = kind
        self.index = index          # variable index, check index, or pivot variable
        self.state = state
        self.gate = False
        self.parent = parent
        self.children: list[TreeNode] = []
        self.via = via
        self.expanded = False
        self.depth = depth
        self.mask = 0               # Free variables in the subtree
        self.w = 0                  # minimum satisfying weight of the subtree
        self.hot = False
        self.alive = True
        self.relaxed = False        # literal dropped to 1 until restored by a pivot
        self.pending = False

    @property
    def literal_state(self) -> LiteralState:
        return self.state

    @property
    def is_free_literal(self) -> bool:
        return self.kind == VAR and self.state is FREE

    def __repr__(self):
        extra = ""
        if self.kind == VAR:
            extra = f", {self.state.value}{', gate' if self.gate else ''}"
        return f"<{KIND_NAMES[self.kind]} {self.index} #{self.id}{extra}>"


@dataclass
class TreeStats:
    size: int = 0
    steps: int = 0
    pivots: int = 0
    refused_pivots: int = 0
    closures: int = 0
    relaxed: int = 0
    stopped_on_budget: bool = False
    lf: str = ""

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class MinWeightSets:
    weight: float
    sets: list[VariableSet] = field(default_factory=list)
    capped: bool = False


class ComputationTree:
    """Builder state for one target bit; mutate only through :meth:`step`/:meth:`build`."""

    def __init__(self, g: TannerGraph, target: int, budget: int = DEFAULT_BUDGET,
                 lf: LFStrategy | str = "narrowing", conditioning: Conditioning | None = None,
                 punctured: VariableSet | None = None, pivoting: str = "eager"):
        if budget < 1:
            raise ValueError("budget must be >= 1")
        if not 0 <= target < g.n:
            raise ValueError(f"target {target} out of range 0..{g.n - 1}")
        conditioning = conditioning or Conditioning()
        conditioning.validate(g.n, target)
        self.g = g
        self.target = target
        self.budget = budget
        self.lf = LFStrategy.coerce(lf)
        if pivoting not in PIVOT_POLICIES:
            raise ValueError(f"unknown pivoting policy {pivoting!r}")
        self.pivoting = pivoting
        self._pending: deque[TreeNode] = deque()
        self.conditioning = conditioning
        self.punctured = punctured if punctured is not None else VariableSet(g.n)
        self.revealed = frozenset(conditioning.revealed)
        self.forced = frozenset(conditioning.erased) | frozenset(self.punctured.indices())
        if self.revealed & set(self.punctured.indices()):
            raise ValueError("a punctured variable cannot be revealed")
        self.stats = TreeStats(lf=self.lf.identifier)
        self._next_id = 0
        self.count = 0
        self.frontier: deque[TreeNode] = deque()
        self._queue: list[TreeNode] = []
        self._since_refresh = 0
        self._batch = self.lf.refresh
        self.on_pivot: Callable[["ComputationTree", str], None] | None = None
        self.frozen = False
        state = FIXED1 if target in self.forced else FREE
        self.root: TreeNode | None = self._new(VAR, target, state, None, None, 0)
        self._refresh_local(self.root)
        self.frontier.append(self.root)

    # -- bookkeeping -------------------------------------------------------

    def _new(self, kind, index, state=FREE, parent=None, via=None, depth=0) -> TreeNode:
        nd = TreeNode(self._next_id, kind, index, state, parent, via, depth)
        self._next_id += 1
        self.count += 1
        return nd

    @staticmethod
    def _local(nd: TreeNode) -> tuple[int, float, bool]:
        """(Free-variable mask, minimum weight, expandable leaf on a minimum witness)."""
        if nd.kind == VAR:
            free = nd.state is FREE
            mask = (1 << nd.index) if free else 0
            w = 1 if free else 0
            hot = not nd.expanded and not nd.gate
            for c in nd.children:
                mask |= c.mask
                w += c.w
                hot = hot or c.hot
            return mask, w, hot
        mask = 0
        w = math.inf
        for c in nd.children:
            mask |= c.mask
            if c.w < w:
                w = c.w
        hot = any(c.hot for c in nd.children if c.w == w)
        return mask, w, hot

    def _refresh_local(self, nd: TreeNode):
        nd.mask, nd.w, nd.hot = self._local(nd)

    def _refresh_up(self, nd: TreeNode | None):
        while nd is not None:
            mask, w, hot = self._local(nd)
            if mask == nd.mask and w == nd.w and hot == nd.hot:
                return
            nd.mask, nd.w, nd.hot = mask, w, hot
            nd = nd.parent

    def _kill(self, nd: TreeNode):
        stack = [nd]
        while stack:
            x = stack.pop()
            if not x.alive:
                continue
            x.alive = False
            self.count -= 1
            stack.extend(x.children)

    def _replace_child(self, parent: TreeNode | None, old: TreeNode, new: TreeNode):
        new.parent = parent
        if parent is None:
            self.root = new
        else:
            parent.children[parent.children.index(old)] = new

    @staticmethod
    def _shift_depth(nd: TreeNode, delta: int):
        stack = [nd]
        while stack:
            x = stack.pop()
            x.depth += delta
            stack.extend(x.children)

    def _make_zero(self, nd: TreeNode):
        """``nd`` is identically 0: remove it and propagate the constant upward."""
        while True:
            p = nd.parent
            if p is None:
                self._kill(nd)
                if nd is self.root:
                    self.root = None
                return
            if p.kind == CHECK and len(p.children) > 1:
                p.children.remove(nd)
                self._kill(nd)
                self._refresh_up(p)
                return
            if p.kind == PIVOT:
                other = p.children[1] if p.children[0] is nd else p.children[0]
                self._kill(nd)
                gp = p.parent
                p.children = []
                p.alive = False
                self.count -= 1
                self._replace_child(gp, p, other)
                self._shift_depth(other, -1)
                self._refresh_up(gp)
                return
            nd = p

    def _collapse_check(self, c: TreeNode):
        """A check with a constant-1 child is 1 and leaves its parent's AND."""
        x = c.parent
        x.children.remove(c)
        self._kill(c)
        self._refresh_up(x)

    def expandable(self, nd: TreeNode) -> bool:
        return nd.alive and nd.kind == VAR and not nd.expanded and not nd.gate

    # -- queries -----------------------------------------------------------

    def nodes(self) -> list[TreeNode]:
        """Alive nodes in pre-order (parents before children)."""
        if self.root is None:
            return []
        out, stack = [], [self.root]
        while stack:
            x = stack.pop()
            out.append(x)
            stack.extend(reversed(x.children))
        return out

    def occurrences(self, v: int, free_only: bool = True) -> list[TreeNode]:
        return [x for x in self.nodes() if x.kind == VAR and x.index == v
                and (x.state is FREE or not free_only)]

    def leaves(self) -> list[TreeNode]:
        return [x for x in self.nodes() if self.expandable(x)]

    def path(self, nd: TreeNode) -> list[TreeNode]:
        out = []
        while nd is not None:
            out.append(nd)
            nd = nd.parent
        return out[::-1]

    def yca(self, a: TreeNode, b: TreeNode) -> TreeNode:
        """Youngest (deepest) common ancestor; a node is its own ancestor."""
        while a.depth > b.depth:
            a = a.parent
        while b.depth > a.depth:
            b = b.parent
        while a is not b:
            a, b = a.parent, b.parent
        return a

    @property
    def is_zero(self) -> bool:
        return self.root is None

    @property
    def min_weight(self) -> float:
        return math.inf if self.root is None else self.root.w

    # -- construction ------------------------------------------------------

    def _context(self, nd: TreeNode) -> tuple[set[int], dict[int, int]]:
        anc: set[int] = set()
        ctx: dict[int, int] = {}
        child = None
        x = nd
        while x is not None:
            if x.kind == VAR:
                if x.gate:
                    ctx.setdefault(x.index, 1)
                else:
                    anc.add(x.index)
            elif x.kind == PIVOT and child is x.children[0]:
                ctx.setdefault(x.index, 0)
            child = x
            x = x.parent
        return anc, ctx

    def _expand(self, x: TreeNode) -> bool:
        """Attach check children and variable grandchildren. False if over budget."""
        g = self.g
        if x.relaxed and self._restore(x) is None:
            x.expanded = True
            self.stats.steps += 1
            self._make_zero(x)
            return True
        anc, ctx = self._context(x)
        plan: list[tuple[int, list[tuple[int, LiteralState]]]] = []
        closed = 0
        for c in g.var_neighbors[x.index]:
            if c == x.via:
                continue
            kids = []
            collapsed = False
            for w in g.check_neighbors[c]:
                if w == x.index:
                    continue
                if w in self.revealed or ctx.get(w) == 0:
                    continue
                if w in anc:
                    collapsed = True
                    break
                kids.append((w, FIXED1 if (w in self.forced or ctx.get(w) == 1) else FREE))
            if collapsed:
                closed += 1
                continue
            if not kids:
                # every other neighbour is known: the check recovers x
                x.expanded = True
                self.stats.steps += 1
                self._make_zero(x)
                return True
            plan.append((c, kids))
        new = sum(1 + len(k) for _, k in plan)
        if self.count + new > self.budget:
            return False
        self.stats.steps += 1
        self.stats.closures += closed
        x.expanded = True
        fresh = []
        for c, kids in plan:
            cn = self._new(CHECK, c, FREE, x, None, x.depth + 1)
            x.children.append(cn)
            for w, st in kids:
                vn = self._new(VAR, w, st, cn, c, x.depth + 2)
                self._refresh_local(vn)
                cn.children.append(vn)
                fresh.append(vn)
            self._refresh_local(cn)
        self._refresh_up(x)
        for vn in fresh:
            self.frontier.append(vn)
            if vn.state is FREE:
                vn.pending = True
                self._pending.append(vn)
        self._drain_pending()
        return True

    def _drain_pending(self):
        while self._pending:
            y = self._pending.popleft()
            if not (y.alive and y.pending):
                continue
            y.pending = False
            if y.state is not FREE:
                continue
            site = self._conflict_site(y)
            if site is None:
                continue
            if self.pivoting != "eager" or not self._pivot(y.index, site):
                if self.pivoting == "eager":
                    self.stats.refused_pivots += 1
                self._relax(y)

    def _relax(self, y: TreeNode):
        y.state = FIXED1
        y.relaxed = True
        self.stats.relaxed += 1
        self._refresh_up(y)

    def _restore(self, y: TreeNode) -> bool | None:
        """Give a relaxed leaf its literal back, pivoting if another occurrence is in the way.

        Returns None when an enclosing pivot has fixed the variable to 0 (the
        leaf is then the constant 0), else whether the literal is Free again.
        """
        known = self._context(y)[1].get(y.index)
        if known is not None:
            y.relaxed = False
            if known == 0:
                return None
            self._refresh_up(y)
            return False
        site = self._conflict_site(y)
        if site is None:
            y.state = FREE
            y.relaxed = False
            self._refresh_up(y)
            return True
        if self.pivoting == "never":
            return False
        if self._pivot(y.index, site):
            self._drain_pending()
            return True
        self.stats.refused_pivots += 1
        return False

    def _conflict_site(self, y: TreeNode) -> TreeNode | None:
        """Shallowest variable node where ``y`` meets another Free occurrence of its variable."""
        bit = 1 << y.index
        path = self.path(y)
        for i in range(len(path) - 1):
            a = path[i]
            if a.kind != VAR:
                continue
            nxt = path[i + 1]
            for d in a.children:
                if d is not nxt and d.mask & bit:
                    return a
        return None

    def _copy_zeroing(self, top: TreeNode, v: int, made: list[TreeNode]) -> TreeNode | None:
        """Copy of ``top``'s subtree with every Free ``v`` set to 0, constants folded.

        Relaxed occurrences of ``v`` already stand for the constant 1 and are
        copied as they are, which keeps the pivot an exact identity.
        """
        order = []
        stack = [top]
        while stack:
            x = stack.pop()
            order.append(x)
            stack.extend(x.children)
        copies: dict[int, TreeNode | None] = {}
        for x in reversed(order):
            if x.kind == VAR:
                if x.index == v and x.state is FREE:
                    copies[x.id] = None
                    continue
                kids = [copies[c.id] for c in x.children]
                if any(k is None for k in kids):
                    copies[x.id] = None
                    continue
                nd = TreeNode(-1, VAR, x.index, x.state, None, x.via)
                nd.gate, nd.expanded = x.gate, x.expanded
                nd.relaxed, nd.pending = x.relaxed, x.pending
            else:
                kids = [copies[c.id] for c in x.children if copies[c.id] is not None]
                if not kids:
                    copies[x.id] = None
                    continue
                if x.kind == PIVOT and len(kids) == 1:
                    copies[x.id] = kids[0]
                    continue
                nd = TreeNode(-1, x.kind, x.index, x.state)
            nd.children = kids
            for k in kids:
                k.parent = nd
            self._refresh_local(nd)
            copies[x.id] = nd
        root = copies[top.id]
        # folding can orphan finished copies; keep only what the root reaches
        stack = [root] if root is not None else []
        while stack:
            x = stack.pop()
            made.append(x)
            stack.extend(x.children)
        return root

    def _pivot(self, v: int, at: TreeNode) -> bool:
        if self.count + 2 > self.budget:
            return False
        made: list[TreeNode] = []
        s0 = self._copy_zeroing(at, v, made)
        extra = len(made) + (2 if s0 is not None else 1)
        if self.count + extra > self.budget:
            return False
        if self.on_pivot:
            self.on_pivot(self, "before")
        # commit the copy: ids in creation order
        for nd in made:
            nd.id = self._next_id
            self._next_id += 1
        self.count += len(made)
        parent = at.parent
        depth = at.depth
        # S1: every Free v below `at` becomes the constant 1
        s1 = []
        stack = [at]
        while stack:
            x = stack.pop()
            s1.append(x)
            if x.kind == VAR and x.index == v and (x.state is FREE or x.relaxed):
                x.state = FIXED1
                x.relaxed = False
            stack.extend(x.children)
        for x in reversed(s1):
            self._refresh_local(x)
        gate = self._new(VAR, v, FREE)
        gate.gate = gate.expanded = True
        gate.children = [at]
        if s0 is not None:
            top = self._new(PIVOT, v)
            top.children = [s0, gate]
            s0.parent = top
            gate.parent = top
            shift = 2
        else:
            top = gate
            shift = 1
        self._replace_child(parent, at, top)
        at.parent = gate
        self._shift_depth(at, shift)
        top.depth = depth
        if s0 is not None:
            gate.depth = depth + 1
            stack = [s0]
            s0.depth = depth + 1
            while stack:
                x = stack.pop()
                for c in x.children:
                    c.depth = x.depth + 1
                    stack.append(c)
        self._refresh_local(gate)
        self._refresh_local(top)
        self._refresh_up(parent)
        for nd in made:
            if nd.kind == VAR and not nd.expanded and not nd.gate:
                self.frontier.append(nd)
            if nd.pending:
                self._pending.append(nd)
        self.stats.pivots += 1
        if self.on_pivot:
            self.on_pivot(self, "after")
        # S0 fixes v = 0, so relaxed copies of v there (x_v AND ...) are 0;
        # a separate narrowing step after the exact pivot
        for nd in made:
            if nd.relaxed and nd.index == v and nd.alive and self._attached(nd):
                self._make_zero(nd)
        return True

    def _attached(self, nd: TreeNode) -> bool:
        while nd.parent is not None:
            nd = nd.parent
        return nd is self.root

    def pivot(self, v: int, at: TreeNode) -> bool:
        """Apply the pivoting rule for ``v`` at variable node ``at``.

        Returns False (tree unchanged) when the duplicated subtree would exceed
        the budget.
        """
        if at.kind != VAR or not at.alive:
            raise ValueError("pivot site must be a live variable node")
        occ = [x for x in self._subtree(at) if x.kind == VAR and x.index == v and x.state is FREE]
        if len(occ) < 2:
            raise ValueError(f"pivot site holds {len(occ)} Free occurrences of {v}, need >= 2")
        if at.index == v and not at.gate:
            raise ValueError("use closure, not pivoting, below an occurrence of the same variable")
        ok = self._pivot(v, at)
        self._drain_pending()
        return ok

    @staticmethod
    def _subtree(nd: TreeNode) -> list[TreeNode]:
        out, stack = [], [nd]
        while stack:
            x = stack.pop()
            out.append(x)
            stack.extend(x.children)
        return out

    # -- leaf finding --------------------------------------------------------

    def _next_bfs(self) -> TreeNode | None:
        while self.frontier:
            x = self.frontier[0]
            if self.expandable(x):
                return x
            self.frontier.popleft()
        return None

    def min_witness_leaves(self) -> list[TreeNode]:
        """Expandable leaves lying on some minimum-weight satisfying sub-tree."""
        if self.root is None:
            return []
        out, stack = [], [self.root]
        while stack:
            x = stack.pop()
            if not x.hot:
                continue
            if x.kind == VAR:
                if self.expandable(x):
                    out.append(x)
                stack.extend(x.children)
            else:
                stack.extend(c for c in x.children if c.w == x.w)
        return out

    def _refill_queue(self):
        leaves = self.min_witness_leaves()
        if leaves:
            sets = self.min_sets(set_cap=64)
            bad = 0
            for s in sets.sets:
                if not self.confirms(s):
                    bad |= s.bits
            if bad or sets.capped:
                focused = [x for x in leaves if bad >> x.index & 1 or x.state is not FREE]
                if focused:
                    leaves = focused
        leaves.sort(key=lambda x: (x.depth, x.index, x.id))
        # a wide witness frontier is consumed in larger batches so that
        # refresh cost stays proportional to the work done between refreshes
        self._batch = max(self.lf.refresh, len(leaves) // 4)
        self._queue = leaves[: self._batch][::-1]
        self._since_refresh = 0

    def _next_narrowing(self) -> TreeNode | None:
        if self._since_refresh >= self._batch or not self._queue:
            self._refill_queue()
        while self._queue:
            x = self._queue.pop()
            if self.expandable(x):
                self._since_refresh += 1
                return x
        return self._next_bfs()

    def next_leaf(self) -> TreeNode | None:
        if self.root is None:
            return None
        if self.lf.identifier == "bfs":
            return self._next_bfs()
        return self._next_narrowing()

    def step(self) -> bool:
        """One iteration: pick a leaf and expand it. False when finished."""
        if self.frozen:
            return False
        x = self.next_leaf()
        if x is None:
            return False
        if not self._expand(x):
            self.stats.stopped_on_budget = True
            return False
        return True

    def build(self, callback: Callable[["ComputationTree"], None] | None = None,
              every: int = 8) -> "ComputationTree":
        while self.step():
            if callback is not None and self.stats.steps % every == 0:
                callback(self)
        return self.freeze()

    def freeze(self) -> "ComputationTree":
        self.frozen = True
        self.stats.size = self.count
        return self

    # -- tightness helpers ---------------------------------------------------

    def confirms(self, s: VariableSet) -> bool:
        """Does erasing ``s`` (plus forced erasures) stall the target?"""
        if not self.forced:
            return is_stopping_set(self.g, s)
        pattern = s.bits
        for v in self.forced:
            pattern |= 1 << v
        for v in self.revealed:
            pattern &= ~(1 << v)
        return self.target in peel(self.g, pattern)

    # -- evaluation ------------------------------------------------------------

    def _postorder(self) -> list[TreeNode]:
        return self.nodes()[::-1]

    def boolean_table(self) -> np.ndarray:
        """f_T on all 2**n inputs (index bit v = x_v erased)."""
        n = self.g.n
        size = 1 << n
        if self.root is None:
            return np.zeros(size, dtype=bool)
        idx = np.arange(size, dtype=np.int64)
        lits = [((idx >> v) & 1).astype(bool) for v in range(n)]
        ones = np.ones(size, dtype=bool)
        val: dict[int, np.ndarray] = {}
        for x in self._postorder():
            if x.kind == VAR:
                acc = lits[x.index].copy() if x.state is FREE else ones.copy()
                for c in x.children:
                    acc &= val[c.id]
            else:
                acc = np.zeros(size, dtype=bool)
                for c in x.children:
                    acc |= val[c.id]
            val[x.id] = acc
        return val[self.root.id]

    def function_value(self, bits: int) -> bool:
        if self.root is None:
            return False
        val: dict[int, bool] = {}
        for x in self._postorder():
            if x.kind == VAR:
                r = bool(bits >> x.index & 1) if x.state is FREE else True
                val[x.id] = r and all(val[c.id] for c in x.children)
            else:
                val[x.id] = any(val[c.id] for c in x.children)
        return val[self.root.id]

    def evaluate_values(self, eps) -> np.ndarray:
        """UB at each probability in ``eps``; cost linear in the tree size."""
        e = np.atleast_1d(np.asarray(eps, dtype=float))
        if self.root is None:
            return np.zeros_like(e)
        val: dict[int, np.ndarray] = {}
        for x in self._postorder():
            if x.kind == VAR:
                acc = e.copy() if x.state is FREE else np.ones_like(e)
                for c in x.children:
                    acc = acc * val[c.id]
            else:
                miss = np.ones_like(e)
                for c in x.children:
                    miss = miss * (1.0 - val[c.id])
                acc = 1.0 - miss
            val[x.id] = acc
        return val[self.root.id]

    def evaluate_poly(self, cap: int = DEFAULT_CAP) -> TruncatedPoly:
        if self.root is None:
            return TruncatedPoly([], cap)
        eps = np.array([0.0, 1.0])
        one = np.array([1.0])
        spilled = False
        val: dict[int, np.ndarray] = {}

        def mul(a, b):
            nonlocal spilled
            c = np.convolve(a, b)
            if len(c) > cap + 1:
                if np.any(c[cap + 1:] != 0):
                    spilled = True
                c = c[: cap + 1]
            return c

        for x in self._postorder():
            if x.kind == VAR:
                acc = eps if x.state is FREE else one
                for c in x.children:
                    acc = mul(acc, val[c.id])
            else:
                miss = one
                for c in x.children:
                    q = -val[c.id]
                    q = q.copy()
                    q[0] += 1.0
                    miss = mul(miss, q)
                acc = -miss
                acc = acc.copy()
                acc[0] += 1.0
            val[x.id] = acc
        return TruncatedPoly(val[self.root.id], cap, spilled)

    def leading_exact(self) -> LeadingTerm:
        """Exact integer (order, multiplicity) of the UB polynomial."""
        if self.root is None:
            return LeadingTerm(math.inf, 0)
        val: dict[int, tuple[int, int]] = {}
        for x in self._postorder():
            if x.kind == VAR:
                k, m = (1, 1) if x.state is FREE else (0, 1)
                for c in x.children:
                    ck, cm = val[c.id]
                    k += ck
                    m *= cm
            else:
                k = min(val[c.id][0] for c in x.children)
                m = 1 if k == 0 else sum(val[c.id][1] for c in x.children if val[c.id][0] == k)
            val[x.id] = (k, m)
        return LeadingTerm(*val[self.root.id])

    def min_sets(self, set_cap: int = DEFAULT_SET_CAP) -> MinWeightSets:
        """Minimum-weight inputs accepted by f_T (Free variables only)."""
        if self.root is None:
            return MinWeightSets(math.inf, [], False)
        order, stack = [], [self.root]
        while stack:
            x = stack.pop()
            order.append(x)
            if x.kind == VAR:
                stack.extend(x.children)
            else:
                stack.extend(c for c in x.children if c.w == x.w)
        capped = False
        fam: dict[int, list[int]] = {}
        for x in reversed(order):
            if x.kind == VAR:
                cur = [(1 << x.index) if x.state is FREE else 0]
                for c in x.children:
                    cf = fam[c.id]
                    if len(cur) * len(cf) > set_cap:
                        capped = True
                    cur = list(itertools.islice((a | b for a in cur for b in cf), set_cap))
                fam[x.id] = cur
            else:
                seen: dict[int, None] = {}
                for c in x.children:
                    if c.w == x.w:
                        for s in fam[c.id]:
                            seen[s] = None
                cur = list(seen)
                if len(cur) > set_cap:
                    capped = True
                    cur = cur[:set_cap]
                fam[x.id] = cur
        sets = sorted(set(fam[self.root.id]), key=set_sort_key)
        return MinWeightSets(self.root.w, [VariableSet(self.g.n, b) for b in sets], capped)


def build_tree(g: TannerGraph, target: int, budget: int = DEFAULT_BUDGET,
               lf: LFStrategy | str = "narrowing", conditioning: Conditioning | None = None,
               punctured: VariableSet | None = None, pivoting: str = "eager",
               callback: Callable[[ComputationTree], None] | None = None,
               every: int = 8) -> ComputationTree:
    tree = ComputationTree(g, target, budget, lf, conditioning, punctured, pivoting)
    return tree.build(callback, every)


def yca(tree: ComputationTree, a: TreeNode, b: TreeNode) -> TreeNode:
    return tree.yca(a, b)


def pivot(tree: ComputationTree, pivot_var: int, at: TreeNode) -> bool:
    return tree.pivot(pivot_var, at)


def evaluate_ub(tree: ComputationTree, cap: int = DEFAULT_CAP) -> TruncatedPoly:
    return tree.evaluate_poly(cap)


def extract_min_sets(tree: ComputationTree, set_cap: int = DEFAULT_SET_CAP) -> MinWeightSets:
    return tree.min_sets(set_cap)
