import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from daqlink import channel as ch

import oracles


@pytest.mark.parametrize("x", [-2.0, -0.5, 0.0, 0.3, 1.0, 1.2816, 2.0, 3.5, 5.0])
def test_qfunc_against_numerical_integral(x):
    expected = oracles.trapezoid_qfunc(x)
    assert ch.qfunc(x) == pytest.approx(expected, rel=1e-6)


def test_qfunc_reference_points():
    assert ch.qfunc(0.0) == 0.5
    assert ch.qfunc(1.2816) == pytest.approx(0.1, abs=1e-4)
    assert ch.qfunc(math.sqrt(2)) == pytest.approx(0.0786, abs=1e-4)


@given(st.floats(-8, 8))
def test_qfunc_symmetry(x):
    assert ch.qfunc(x) + ch.qfunc(-x) == pytest.approx(1.0, abs=1e-12)


def test_ebn0_to_p():
    assert ch.ebn0_to_p(0.0, 1.0) == pytest.approx(ch.qfunc(math.sqrt(2)))
    assert ch.ebn0_to_p(10.0, 7 / 15) == pytest.approx(ch.qfunc(math.sqrt(2 * 7 / 15 * 10)))
    assert ch.ebn0_to_p(math.inf, 0.5) == 0.0
    with pytest.raises(ValueError):
        ch.ebn0_to_p(3.0, 0.0)
    with pytest.raises(ValueError):
        ch.ebn0_to_p(3.0, 1.5)
    grid = [ch.ebn0_to_p(d, 7 / 15) for d in range(11)]
    assert grid == sorted(grid, reverse=True)


def test_awgn_is_equivalent_bsc():
    m = ch.Awgn(3.0, 7 / 15)
    assert m.p == ch.ebn0_to_p(3.0, 7 / 15)
    a, na = ch.apply(np.zeros(5000, dtype=np.uint8), m, ch.make_rng(4))
    b, nb = ch.apply(np.zeros(5000, dtype=np.uint8), ch.Bsc(m.p), ch.make_rng(4))
    assert np.array_equal(a, b) and na == nb


@pytest.mark.parametrize("p", [1e-3, 1e-2, 1e-1])
def test_bsc_flip_rate_within_three_sigma(p):
    n = 1_000_000
    _, flips = ch.bsc_apply(np.zeros(n, dtype=np.uint8), p, ch.make_rng(11))
    sigma = math.sqrt(n * p * (1 - p))
    assert abs(flips - n * p) <= 3 * sigma


def test_bsc_count_matches_difference(rng):
    s = rng.integers(0, 2, 10_000, dtype=np.uint8)
    out, flips = ch.bsc_apply(s, 0.05, rng)
    assert flips == np.count_nonzero(out != s)


def test_bsc_zero_and_validation(rng):
    s = np.ones(100, dtype=np.uint8)
    out, flips = ch.bsc_apply(s, 0.0, rng)
    assert flips == 0 and np.array_equal(out, s) and out is not s
    with pytest.raises(ValueError):
        ch.Bsc(0.7)
    with pytest.raises(ValueError):
        ch.bsc_apply(s, -0.1, rng)


def test_seed_determinism():
    s = np.zeros(10_000, dtype=np.uint8)
    a, _ = ch.apply(s, ch.Bsc(0.1), ch.make_rng(5))
    b, _ = ch.apply(s, ch.Bsc(0.1), ch.make_rng(5))
    c, _ = ch.apply(s, ch.Bsc(0.1), ch.make_rng(6))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert ch.ChannelConfig(ch.Bsc(0.1), 5).rng().random() == ch.make_rng(5).random()


def test_burst_at():
    out, n = ch.burst_at(np.zeros(20, dtype=np.uint8), 3, 5)
    assert n == 5
    assert np.flatnonzero(out).tolist() == [3, 4, 5, 6, 7]
    with pytest.raises(ValueError):
        ch.burst_at(np.zeros(20), 18, 5)


def test_burst_statistics():
    model = ch.Burst(arrival_rate=10.0, mean_len=8.0, flip_prob_in_burst=1.0)
    n = 2_000_000
    out, flips = ch.apply(np.zeros(n, dtype=np.uint8), model, ch.make_rng(3))
    assert flips == np.count_nonzero(out)
    # expected coverage fraction 1 - exp(-rate * mean) for sparse bursts
    lam = 10.0 / 1e4
    expected = n * (1 - math.exp(-lam * 8.0))
    assert flips == pytest.approx(expected, rel=0.05)
    # flips come in runs
    runs = np.count_nonzero(np.diff(np.concatenate(([0], out))) == 1)
    assert flips / runs > 4


def test_burst_validation():
    with pytest.raises(ValueError):
        ch.Burst(arrival_rate=-1, mean_len=3)
    with pytest.raises(ValueError):
        ch.Burst(arrival_rate=1, mean_len=0.5)


def test_composite_counts_net_flips(rng):
    s = rng.integers(0, 2, 50_000, dtype=np.uint8)
    model = ch.Composite((ch.Bsc(0.01), ch.Burst(5.0, 4.0)))
    out, n = ch.apply(s, model, ch.make_rng(9))
    assert n == np.count_nonzero(out != s)


def test_unknown_model(rng):
    with pytest.raises(TypeError):
        ch.apply(np.zeros(4), object(), rng)
