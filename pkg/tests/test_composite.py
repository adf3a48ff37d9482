import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from becbound import (CONFIRMED, BoundConfig, bound_bit, composite_bound, design_partition, exact_ber,
                      is_stopping_set, make_partition)
from becbound.composite import choose_variables, split_scores

from conftest import sweep_code

GRID = np.linspace(0.01, 1.0, 100)


def test_depth_zero_equals_plain_bound(hamming):
    cfg = BoundConfig(budget=300, grid=GRID)
    for b in range(7):
        plain = bound_bit(hamming, b, cfg)
        part = design_partition(hamming, b, 0, "nonuniform", plain)
        assert len(part.cells) == 1
        c = composite_bound(hamming, b, part, cfg)
        assert c.ub == plain.ub
        assert np.array_equal(c.ub_values, plain.ub_values)
        assert c.label == "cub"


@given(st.lists(st.integers(0, 30), min_size=0, max_size=5, unique=True),
       st.sampled_from(["uniform", "nonuniform"]))
def test_cell_probabilities_sum_to_one(variables, strategy):
    part = make_partition(variables, strategy)
    total = part.total_probability(cap=16)
    assert total.coeffs.tolist() == [1.0]
    x = np.linspace(0, 1, 11)
    assert np.allclose(sum(c.probability_values(x) for c in part.cells), 1.0)


def test_cells_are_disjoint_and_cover():
    for strategy in ("uniform", "nonuniform"):
        part = make_partition([3, 1, 4], strategy)
        for bits in range(8):
            assign = {3: bits & 1, 1: bits >> 1 & 1, 4: bits >> 2 & 1}
            hits = [c for c in part.cells
                    if all(assign[v] == b for v, b in c.conditioning.assignment.items())]
            assert len(hits) == 1


def test_partition_shapes():
    assert len(make_partition([0, 1, 2], "uniform").cells) == 8
    non = make_partition([0, 1, 2], "nonuniform")
    assert [c.conditioning.to_dict() for c in non.cells] == [
        {"0": 0}, {"0": 1, "1": 0}, {"0": 1, "1": 1, "2": 0}, {"0": 1, "1": 1, "2": 1}]
    with pytest.raises(ValueError):
        make_partition([1, 1])
    with pytest.raises(ValueError):
        make_partition([1], "diagonal")


def test_design_partition_validation(fig1):
    with pytest.raises(ValueError):
        design_partition(fig1, 1, 7)
    with pytest.raises(ValueError):
        design_partition(fig1, 1, 1, variables=[1])


def test_split_variables_follow_min_set_frequency(fig1):
    rep = bound_bit(fig1, 1, BoundConfig(budget=512))
    scores = split_scores(rep.x_min, 1)
    assert 1 not in scores
    assert choose_variables(6, 1, 2, scores) == [0, 2]


@given(st.integers(0, 400), st.integers(0, 3), st.sampled_from(["uniform", "nonuniform"]))
def test_composite_dominates_exact(seed, depth, strategy):
    g = sweep_code(seed)
    cfg = BoundConfig(budget=64, grid=GRID)
    for b in range(g.n):
        base = bound_bit(g, b, cfg)
        part = design_partition(g, b, depth, strategy, base)
        c = composite_bound(g, b, part, cfg, base)
        ex = exact_ber(g, b).evaluate(GRID)
        assert np.all(c.ub_values >= ex - 1e-12)
        assert np.all(c.lb_values <= ex + 1e-12)
        assert np.allclose(c.evaluate(GRID), c.ub_values)
        for s in c.x_min_ss:
            assert is_stopping_set(g, s) and b in s


def test_composite_report_fields(fig1):
    cfg = BoundConfig(budget=2000, grid=GRID)
    base = bound_bit(fig1, 1, cfg)
    part = design_partition(fig1, 1, 2, "uniform", base)
    c = composite_bound(fig1, 1, part, cfg, base)
    d = c.to_dict()
    assert d["kind"] == "cub"
    assert d["partition"]["strategy"] == "uniform" and len(d["cells"]) == 4
    assert c.order == 3 and c.verdict == CONFIRMED


def test_golay_composite_tightens_small_budget(golay):
    cfg = BoundConfig(budget=40_000, grid=GRID, exact=False)
    base = bound_bit(golay, 20, cfg)
    part = design_partition(golay, 20, 3, "nonuniform", base)
    c = composite_bound(golay, 20, part, cfg, base, cell_budget=40_000)
    assert c.order >= base.order
