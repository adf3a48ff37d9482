import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from becbound import (VariableSet, builtin_code, enumerate_stopping_sets, exact_ber, exact_fer,
                      exact_leading, fer_transform, generate_random, is_stopping_set, monte_carlo, peel)
from becbound.code import BudgetExceeded
from becbound.decoder import AboveCap, ExactBer, mc_to_csv, peel_sequential, peel_sliced
from becbound.poly import LeadingTerm

from conftest import sweep_code

# Exhaustive oracle values, frozen from the 2^n enumeration.
FIG1_BIT_COUNTS = (0, 0, 0, 2, 8, 5, 1)
FIG1_BIT_COEFFS = [0, 0, 0, 2, 2, -5, 2]
FIG1_FRAME_COUNTS = (0, 0, 0, 4, 15, 6, 1)
HAMMING_COUNTS = {0: (0, 0, 0, 5, 18, 15, 6, 1), 3: (0, 0, 0, 6, 17, 15, 6, 1),
                  4: (0, 0, 0, 3, 19, 15, 6, 1)}
GOLAY_PAIRS = {0: (4, 75), 5: (4, 45), 19: (4, 1), 20: (4, 1)}


def test_peel_fixed_point(fig1):
    assert peel(fig1, VariableSet.of(6, [1, 2, 3])).indices() == [1, 2, 3]
    assert peel(fig1, VariableSet.of(6, [1, 2])).indices() == []
    assert peel(fig1, 0b111111).bits == 0b111111


@given(st.integers(0, 300), st.integers(0, 1023), st.permutations(range(5)))
def test_peeling_order_does_not_matter(seed, pattern, order):
    g = generate_random(10, 5, seed)
    assert peel(g, pattern).bits == peel_sequential(g, pattern, order)


@given(st.integers(0, 300))
def test_residual_is_a_stopping_set_or_empty(seed):
    g = sweep_code(seed)
    for pattern in range(0, 1 << g.n, 7):
        r = peel(g, pattern).bits
        assert r == 0 or is_stopping_set(g, r)
        assert r & ~pattern == 0


def test_sliced_peeling_matches_scalar():
    g = generate_random(9, 5, 11)
    N = 1 << g.n
    pats = np.arange(N)
    flags = ((pats[None, :] >> np.arange(g.n)[:, None]) & 1).astype(bool)
    E = np.packbits(flags, axis=1, bitorder="little").view(np.uint64).copy()
    peel_sliced(g, E)
    got = np.unpackbits(E.view(np.uint8), axis=1, bitorder="little")[:, :N]
    for p in range(N):
        r = peel(g, p).bits
        assert [(r >> v) & 1 for v in range(g.n)] == got[:, p].tolist()


def test_fig1_exact_counts(fig1):
    for b in range(6):
        ex = exact_ber(fig1, b)
        assert ex.counts == FIG1_BIT_COUNTS
        assert ex.int_coeffs == FIG1_BIT_COEFFS
        assert ex.leading() == LeadingTerm(3, 2)
    assert exact_fer(fig1).counts == FIG1_FRAME_COUNTS


def test_hamming_exact_counts(hamming):
    for b, counts in HAMMING_COUNTS.items():
        assert exact_ber(hamming, b).counts == counts


def test_exact_value_matches_brute_force_sum():
    g = sweep_code(4)
    for b in range(g.n):
        ex = exact_ber(g, b)
        for e in (0.1, 0.5, 0.9):
            direct = sum(e ** bin(p).count("1") * (1 - e) ** (g.n - bin(p).count("1"))
                         for p in range(1 << g.n) if b in peel(g, p))
            assert ex.evaluate(e) == pytest.approx(direct, rel=1e-12)


def test_exact_counts_validated():
    with pytest.raises(ValueError):
        ExactBer((0, 5), 2)


def test_punctured_variable_is_always_erased(fig1):
    g2, t, punct = fer_transform(fig1)
    ex = exact_ber(g2, t, punct)
    assert ex.n_free == 6
    assert ex.counts == exact_fer(fig1).counts


def test_exact_limit():
    with pytest.raises(BudgetExceeded):
        exact_ber(builtin_code("golay23"), 0, limit=10)


def test_exact_leading(fig1, golay):
    assert exact_leading(fig1, 1, 4) == LeadingTerm(3, 2)
    assert exact_leading(fig1, 1, 2) == AboveCap(2)
    for b, pair in GOLAY_PAIRS.items():
        assert tuple(exact_leading(golay, b, 4)) == pair


@given(st.integers(0, 200))
def test_exact_leading_agrees_with_polynomial(seed):
    g = sweep_code(seed)
    for b in range(g.n):
        lead = exact_ber(g, b).leading()
        got = exact_leading(g, b, g.n)
        if math.isinf(lead.order):
            assert isinstance(got, AboveCap)
        else:
            assert tuple(got) == (lead.order, lead.multiplicity)


def test_monte_carlo_deterministic_across_workers(hamming):
    a = monte_carlo(hamming, 0.3, 150_000, seed=5, workers=1)
    b = monte_carlo(hamming, 0.3, 150_000, seed=5, workers=3)
    assert a == b
    assert mc_to_csv([a]) == mc_to_csv([b])
    assert monte_carlo(hamming, 0.3, 150_000, seed=6) != a


def test_monte_carlo_agrees_with_exact(hamming):
    est = monte_carlo(hamming, 0.35, 200_000, seed=1)
    for b in range(7):
        p = exact_ber(hamming, b).evaluate(0.35)
        assert abs(est.bit_rates[b] - p) < 5 * math.sqrt(p * (1 - p) / est.trials)
    pf = exact_fer(hamming).evaluate(0.35)
    assert abs(est.frame_rate - pf) < 5 * math.sqrt(pf * (1 - pf) / est.trials)


def test_monte_carlo_edges(fig1):
    assert monte_carlo(fig1, 0.0, 1000, 0).frame_failures == 0
    assert monte_carlo(fig1, 1.0, 1000, 0).frame_failures == 1000
    with pytest.raises(ValueError):
        monte_carlo(fig1, 0.5, 0, 0)


def test_mc_csv_header(fig1):
    text = mc_to_csv([monte_carlo(fig1, 0.5, 100, 0)])
    assert text.splitlines()[0] == "epsilon,bit,rate,ci_half_width,trials"
    assert len(text.splitlines()) == 7


def test_fer_equals_union_of_stopping_sets(fig1):
    sets = [s.bits for s in enumerate_stopping_sets(fig1, 6)]
    counts = [0] * 7
    for p in range(64):
        if any(s & ~p == 0 for s in sets):
            counts[bin(p).count("1")] += 1
    assert tuple(counts) == exact_fer(fig1).counts
