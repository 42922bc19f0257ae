# -*- coding: utf-8 -*-
import math

import numpy as np
import pytest

from simon32lab.bitops import rotl
from simon32lab.diff_models import (
    CERTAIN,
    IMPOSSIBLE,
    DyadicProb,
    and_zero_state,
    monte_carlo_dp,
    one_round_dp_exact,
    paper_model_hw,
    paper_model_state,
    paper_round_propagate,
    prefix_dp_monotone,
    simon_and_dp_bruteforce,
    simon_and_dp_exact,
    xdp_add,
    xdp_add_bruteforce,
    xdp_add_bruteforce_table,
    xdp_add_weights,
)
from simon32lab.errors import ContractError
from simon32lab.simon_core import DiffState, SimonParams


def test_dyadic_prob():
    p = DyadicProb.from_weight(3)
    assert p.probability == 0.125
    assert p.log2 == -3
    assert str(p) == "2^-3"
    assert IMPOSSIBLE.probability == 0.0
    assert not IMPOSSIBLE.possible
    assert CERTAIN.probability == 1.0
    with pytest.raises(ContractError):
        DyadicProb.from_weight(-1)
    with pytest.raises(ContractError):
        IMPOSSIBLE.log2


def test_xdp_add_small_cases():
    assert xdp_add(0, 0, 0, 16) == CERTAIN
    assert xdp_add(1, 1, 2, 4).weight == 2
    # The top bit carries out of the word for free.
    assert xdp_add(8, 8, 0, 4).weight == 0
    assert not xdp_add(0, 0, 1, 4).possible


def test_xdp_add_matches_exhaustive_ddt_n4():
    table = xdp_add_bruteforce_table(4)
    a, b, c = np.meshgrid(np.arange(16, dtype=np.uint32), np.arange(16, dtype=np.uint32), np.arange(16, dtype=np.uint32), indexing="ij")
    assert np.array_equal(xdp_add_weights(a, b, c, 4), table)


def test_xdp_add_scalar_matches_vectorized():
    rng = np.random.default_rng(3)
    t = rng.integers(0, 1 << 16, size=(3, 200), dtype=np.uint64).astype(np.uint32)
    vec = xdp_add_weights(t[0], t[1], t[2], 16)
    for i in range(200):
        assert xdp_add_weights(int(t[0, i]), int(t[1, i]), int(t[2, i]), 16) == int(vec[i])


def _random_triples_n8(count, seed):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 256, size=count)
    b = rng.integers(0, 256, size=count)
    # Half of the outputs are drawn from real additions so possible triples appear often.
    x = rng.integers(0, 256, size=count)
    y = rng.integers(0, 256, size=count)
    real = (((x ^ a) + (y ^ b)) ^ (x + y)) & 0xFF
    c = np.where(np.arange(count) % 2 == 0, real, rng.integers(0, 256, size=count))
    return zip(a.tolist(), b.tolist(), c.tolist())


def test_xdp_add_matches_bruteforce_n8_sample():
    for a, b, c in _random_triples_n8(300, 5):
        assert xdp_add(a, b, c, 8) == xdp_add_bruteforce(a, b, c, 8)


@pytest.mark.slow
def test_xdp_add_matches_bruteforce_n8_full_sample():
    for a, b, c in _random_triples_n8(10_000, 6):
        assert xdp_add(a, b, c, 8) == xdp_add_bruteforce(a, b, c, 8)


def test_bruteforce_size_limit():
    with pytest.raises(ContractError):
        xdp_add_bruteforce(0, 0, 0, 11)
    with pytest.raises(ContractError):
        xdp_add_bruteforce_table(7)


def test_prefix_monotonicity_exhaustive_n4():
    violations = 0
    for k in range(0, 4):
        size = 1 << k
        for a in range(size):
            for b in range(size):
                for c in range(size):
                    parent = prefix_dp_monotone(a, b, c, k)
                    for bits in range(8):
                        ea = a | (((bits >> 2) & 1) << k)
                        eb = b | (((bits >> 1) & 1) << k)
                        ec = c | ((bits & 1) << k)
                        child = prefix_dp_monotone(ea, eb, ec, k + 1)
                        if child.fraction > parent.fraction:
                            violations += 1
    assert violations == 0


def test_paper_round_propagate():
    s, w = paper_round_propagate(DiffState(0x8000, 0x8000))
    assert s == DiffState(0xA000, 0x8000)
    assert w == 0
    assert paper_round_propagate(DiffState(0, 0)) == (DiffState(0, 0), 0)


def test_paper_model_anchor_weights():
    assert int(paper_model_hw(0x8000, 0x8000, 10)) == 17
    assert int(paper_model_hw(0x8000, 0x8000, 20)) == 32
    hw = paper_model_hw(np.array([0x8000, 0], dtype=np.uint32), np.array([0x8000, 0], dtype=np.uint32), 20)
    assert hw.tolist() == [32, 0]


def test_simon_and_exact_single_bit():
    # One active bit: A and B differ, both output bits are free.
    assert simon_and_dp_exact(0x8000, 0).weight == 2
    assert simon_and_dp_exact(0x8000, rotl(0x8000, 1)).weight == 2
    assert not simon_and_dp_exact(0x8000, 0x0100 ^ 0x4000).possible


def test_simon_and_all_ones():
    assert simon_and_dp_exact(0xFFFF, 0).weight == 15
    assert not simon_and_dp_exact(0xFFFF, 1).possible


@pytest.mark.parametrize("n,rotations", [(8, (1, 4)), (6, (1, 2)), (7, (1, 3))])
def test_simon_and_exact_matches_bruteforce(n, rotations):
    rng = np.random.default_rng(n)
    mask = (1 << n) - 1
    for _ in range(100):
        alpha = int(rng.integers(0, 1 << n))
        x = int(rng.integers(0, 1 << n))
        real = (rotl(x ^ alpha, rotations[0], n) & rotl(x ^ alpha, rotations[1], n)) ^ (rotl(x, rotations[0], n) & rotl(x, rotations[1], n))
        for gamma in (real & mask, int(rng.integers(0, 1 << n))):
            assert simon_and_dp_exact(alpha, gamma, n, rotations) == simon_and_dp_bruteforce(alpha, gamma, n, rotations)


def test_simon_and_rejects_split_chains():
    with pytest.raises(ContractError):
        simon_and_dp_exact(1, 0, 8, (2, 0))


def test_one_round_exact():
    s = DiffState(0x8000, 0)
    target = DiffState(rotl(0x8000, 2), 0x8000)
    assert one_round_dp_exact(s, target).weight == 2
    assert not one_round_dp_exact(s, DiffState(0, 0)).possible


def test_monte_carlo_zero_difference():
    est = monte_carlo_dp(DiffState(0, 0), 3, 64, seed=1)
    assert est.estimate == 1.0
    assert est.stderr == 0.0


def test_monte_carlo_is_deterministic():
    s0 = DiffState(0x0040, 0x0001)
    a = monte_carlo_dp(s0, 2, 500, seed=9)
    b = monte_carlo_dp(s0, 2, 500, seed=9)
    assert a == b


def test_monte_carlo_requires_trials():
    with pytest.raises(ContractError):
        monte_carlo_dp(DiffState(1, 0), 1, 0, seed=0)


@pytest.mark.parametrize("s0", [DiffState(0x8000, 0), DiffState(0x0001, 0x0400), DiffState(0x0120, 0)])
def test_monte_carlo_one_round_within_three_sigma(s0):
    target = DiffState(rotl(s0.dL, 2) ^ s0.dR, s0.dL)
    exact = one_round_dp_exact(s0, target).probability
    est = monte_carlo_dp(s0, 1, 4096, seed=2025, target=target)
    sigma = math.sqrt(exact * (1 - exact) / est.trials)
    assert abs(est.estimate - exact) <= 3 * sigma + 1e-12


def test_paper_model_state():
    assert paper_model_state(DiffState(0x8000, 0x8000), 1) == DiffState(0xA000, 0x8000)


def test_and_zero_state_is_always_reachable():
    assert and_zero_state(DiffState(0x8000, 0x0001), 1) == DiffState(rotl(0x8000, 2) ^ 0x0001, 0x8000)
    assert and_zero_state(DiffState(0x8000, 0), 2) == and_zero_state(and_zero_state(DiffState(0x8000, 0), 1), 1)
    for i in range(16):
        for j in range(i + 1, 16):
            s0 = DiffState((1 << i) | (1 << j), 0)
            assert one_round_dp_exact(s0, and_zero_state(s0, 1)).possible


def test_monte_carlo_on_reduced_words():
    params = SimonParams(word_size=8, rotations=(1, 4, 2))
    est = monte_carlo_dp(DiffState(0, 0), 2, 16, seed=0, params=params)
    assert est.estimate == 1.0
