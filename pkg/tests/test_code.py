import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from becbound import (Conditioning, TannerGraph, VariableSet, builtin_code, enumerate_stopping_sets,
                      fer_transform, generate_random, generate_regular, is_stopping_set, parse_alist,
                      write_alist)
from becbound.code import AlistError, BudgetExceeded

FIG1_ALIST = """6 4
2 3
2 2 2 2 2 2
3 3 3 3
1 4
1 2
1 3
2 3
3 4
2 4
1 2 3
2 4 6
3 4 5
1 5 6
"""


def test_fig1_adjacency(fig1):
    assert fig1.check_neighbors == ((0, 1, 2), (1, 3, 5), (2, 3, 4), (0, 4, 5))
    assert all(len(r) == 2 for r in fig1.var_neighbors)


def test_write_alist_fig1_frozen(fig1):
    assert write_alist(fig1) == FIG1_ALIST


def test_alist_round_trip_builtins():
    for name in ("fig1", "hamming74", "golay23"):
        g = builtin_code(name)
        back = parse_alist(write_alist(g))
        assert back.check_neighbors == g.check_neighbors


@pytest.mark.parametrize("text, line", [
    ("", 1),
    ("6\n", 1),
    ("2 1\n1 2\n1 1\n2\n1\n1\n1 3\n", 7),          # index out of range
    ("2 1\n1 2\n1 1\n2\n1\n1\n1 1\n", 7),          # duplicate edge
    ("2 1\n1 2\n1 1\n2\n1\nx\n1 2\n", 6),          # non-integer
])
def test_alist_errors_carry_line_numbers(text, line):
    with pytest.raises(AlistError) as info:
        parse_alist(text)
    assert info.value.line == line


def test_alist_asymmetric_rows_rejected():
    bad = "2 2\n1 1\n1 1\n1 1\n1\n2\n2\n1\n"
    with pytest.raises(AlistError, match="does not list it back"):
        parse_alist(bad)


def test_json_round_trip(hamming):
    assert TannerGraph.from_json(hamming.to_json()).check_neighbors == hamming.check_neighbors


def test_golay_is_the_23_12_code(golay):
    assert (golay.n, golay.m) == (23, 11)
    H = golay.to_matrix()
    from becbound.code import golay_generator_matrix
    G = golay_generator_matrix()
    assert not ((G.astype(int) @ H.T.astype(int)) % 2).any()
    # minimum distance 7: every nonzero codeword of the 2^12 has weight >= 7
    words = (np.array(list(itertools.product([0, 1], repeat=12))) @ G.astype(int)) % 2
    assert words[1:].sum(axis=1).min() == 7


def test_generate_regular_degrees():
    g = generate_regular(50, 3, 6, 4)
    assert (g.n, g.m) == (50, 25)
    assert all(len(r) == 3 for r in g.var_neighbors)
    assert all(len(r) == 6 and len(set(r)) == 6 for r in g.check_neighbors)
    assert generate_regular(50, 3, 6, 4).check_neighbors == g.check_neighbors


def test_generate_regular_rejects_bad_degrees():
    with pytest.raises(ValueError):
        generate_regular(10, 3, 7, 0)


@given(st.integers(0, 10_000))
def test_generate_random_has_no_isolated_nodes(seed):
    g = generate_random(7, 4, seed)
    assert all(g.var_neighbors) and all(g.check_neighbors)


def test_variable_set_algebra():
    a = VariableSet.of(6, [0, 2])
    b = VariableSet.of(6, [2, 3])
    assert (a | b).indices() == [0, 2, 3]
    assert (a & b).indices() == [2]
    assert (a - b).indices() == [0]
    assert len(a) == 2 and 2 in a and 1 not in a
    assert a.issubset(a | b)
    with pytest.raises(ValueError):
        VariableSet.of(3, [5])
    with pytest.raises(ValueError):
        a | VariableSet(5)


def test_conditioning():
    c = Conditioning({3: 1, 1: 0})
    assert c.erased == {3} and c.revealed == {1}
    assert list(c.assignment) == [1, 3]
    assert c.merged(Conditioning({4: 1})).to_dict() == {"1": 0, "3": 1, "4": 1}
    with pytest.raises(ValueError):
        c.merged(Conditioning({3: 0}))
    with pytest.raises(ValueError):
        Conditioning({0: 2})
    with pytest.raises(ValueError):
        c.validate(6, target=3)


def test_fig1_stopping_sets(fig1):
    small = enumerate_stopping_sets(fig1, 3)
    assert [s.indices() for s in small] == [[0, 1, 5], [0, 2, 4], [1, 2, 3], [3, 4, 5]]
    assert [s.indices() for s in enumerate_stopping_sets(fig1, 3, must_contain=1)] == [[0, 1, 5], [1, 2, 3]]


@given(st.integers(0, 500), st.integers(0, 1023))
def test_stopping_set_definition(seed, bits):
    g = generate_random(8, 4, seed)
    bits &= (1 << g.n) - 1
    expect = bits != 0 and all((cm & bits).bit_count() != 1 for cm in g.check_masks)
    assert is_stopping_set(g, bits) == expect


def test_enumeration_matches_definition():
    g = generate_random(9, 5, 3)
    found = {s.bits for s in enumerate_stopping_sets(g, 9)}
    brute = {b for b in range(1, 1 << 9) if is_stopping_set(g, b)}
    assert found == brute


def test_enumeration_budget(golay):
    with pytest.raises(BudgetExceeded):
        enumerate_stopping_sets(golay, 12, budget=1000)


def test_fer_transform(fig1):
    g2, target, punct = fer_transform(fig1)
    assert target == 6 and punct.indices() == [6]
    assert g2.check_neighbors[-1] == tuple(range(7))
