"""Estimator-style wrappers: ``fit`` a code, ``predict`` failure-rate bounds.

The "training data" is the code itself; fitting builds one tree per requested
bit and stores the reports in ``reports_``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .bound import BoundConfig, BoundReport, bound_bit, bound_fer
from .composite import composite_bound, design_partition
from .poly import DEFAULT_CAP
from .tree import DEFAULT_BUDGET, DEFAULT_SET_CAP
from .validation import check_bits, check_graph, check_grid, check_probability


class TreeBoundEstimator(BaseEstimator):
    """Per-bit upper bound on the erasure-decoding failure probability.

    Parameters mirror the command-line options. ``bits`` is ``"all"`` or a
    list of variable indices.
    """

    def __init__(self, budget: int = DEFAULT_BUDGET, lf: str = "narrowing", refresh: int = 16,
                 cap: int = DEFAULT_CAP, set_cap: int = DEFAULT_SET_CAP, pivoting: str = "lazy",
                 bits="all", grid=None, exact=None):
        self.budget = budget
        self.lf = lf
        self.refresh = refresh
        self.cap = cap
        self.set_cap = set_cap
        self.pivoting = pivoting
        self.bits = bits
        self.grid = grid
        self.exact = exact

    def _config(self) -> BoundConfig:
        cfg = BoundConfig(budget=self.budget, lf=self.lf, refresh=self.refresh, cap=self.cap,
                          set_cap=self.set_cap, pivoting=self.pivoting, exact=self.exact)
        if self.grid is not None:
            cfg.grid = check_grid(self.grid)
        return cfg

    def _bound(self, g, bit, cfg) -> BoundReport:
        return bound_bit(g, bit, cfg)

    def fit(self, X, y=None):
        g = check_graph(X)
        self.graph_ = g
        self.bits_ = check_bits(self.bits, g.n)
        cfg = self._config()
        self.reports_ = {b: self._bound(g, b, cfg) for b in self.bits_}
        self.n_features_in_ = g.n
        return self

    def predict(self, eps) -> np.ndarray:
        """Upper-bound values, shape (len(eps), number of bits)."""
        check_is_fitted(self, "reports_")
        e = check_probability(eps)
        return np.column_stack([self.reports_[b].evaluate(e) for b in self.bits_])

    def predict_lower(self, eps) -> np.ndarray:
        check_is_fitted(self, "reports_")
        e = check_probability(eps)
        cols = []
        for b in self.bits_:
            rep = self.reports_[b]
            v = rep.lb.evaluate(e)
            cols.append(np.maximum(v, 0.0) if rep.lb_bonferroni else v)
        return np.column_stack(cols)

    def leading_terms(self) -> dict[int, tuple]:
        check_is_fitted(self, "reports_")
        return {b: tuple(r.leading) for b, r in self.reports_.items()}

    def verdicts(self) -> dict[int, str]:
        check_is_fitted(self, "reports_")
        return {b: r.verdict for b, r in self.reports_.items()}


class CompositeBoundEstimator(TreeBoundEstimator):
    """Composite bound: split on ``depth`` variables chosen from a base run."""

    def __init__(self, budget: int = DEFAULT_BUDGET, lf: str = "narrowing", refresh: int = 16,
                 cap: int = DEFAULT_CAP, set_cap: int = DEFAULT_SET_CAP, pivoting: str = "lazy",
                 bits="all", grid=None, exact=None, depth: int = 2, strategy: str = "nonuniform"):
        super().__init__(budget, lf, refresh, cap, set_cap, pivoting, bits, grid, exact)
        self.depth = depth
        self.strategy = strategy

    def _bound(self, g, bit, cfg) -> BoundReport:
        base = bound_bit(g, bit, cfg)
        part = design_partition(g, bit, self.depth, self.strategy, base)
        return composite_bound(g, bit, part, cfg, base)


class FrameBoundEstimator(TreeBoundEstimator):
    """Frame-error bound through the auxiliary-bit transform; one output column."""

    def fit(self, X, y=None):
        g = check_graph(X)
        self.graph_ = g
        self.bits_ = [g.n]
        self.reports_ = {g.n: bound_fer(g, self._config())}
        self.n_features_in_ = g.n
        return self
