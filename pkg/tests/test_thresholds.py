import math

import numpy as np
import pytest

import plantedlab as pl
from plantedlab.errors import TooLarge
from plantedlab.thresholds import transfer_matrix


def test_ks_rho_zero_reduces_to_max():
    rep = pl.ks_threshold(0.0, [3.0, 5.0, 2.0], [0.4, 0.3, 0.5])
    deltas = [3 * 0.16, 5 * 0.09, 2 * 0.25]
    assert rep.F_value == max(deltas)
    assert rep.below_threshold


def test_ks_single_layer_rho_one():
    d, lam = 4.0, 0.45
    rep = pl.ks_threshold(1.0, [d], [lam])
    assert rep.F_value == pytest.approx(lam * lam * d)
    assert rep.sigma_plus == pytest.approx(lam * lam * d, abs=1e-10)


def test_ks_two_layer_example():
    # rho = 1, Delta = (0.3, 0.4): F = max(0.4, 0.7) = 0.7
    rep = pl.ks_threshold(1.0, [30.0, 40.0], [0.1, 0.1])
    assert rep.F_value == pytest.approx(0.7)


def test_ks_infinite_marker():
    # denominator 1 - (1 - rho^4) lam^2 d <= 0
    rep = pl.ks_threshold(0.0, [5.0], [0.5])  # 1 - 1.25 < 0
    assert math.isinf(rep.F_value)
    assert not rep.below_threshold


def test_transfer_matrix_shape():
    p = transfer_matrix(0.5, [0.2, 0.3])
    r4 = 0.5 ** 4
    assert np.allclose(p, [[0.2, 0.2 * r4], [0.3 * r4, 0.3]])


def test_chain_sum_single_layer_and_length_one():
    res = pl.transfer_chain_sum(5, 0.4, [0.7])
    assert res.recursion == pytest.approx(0.7 ** 5)
    assert res.brute_force == pytest.approx(0.7 ** 5)
    res = pl.transfer_chain_sum(1, 0.9, [0.2, 0.5, 0.1])
    assert res.recursion == pytest.approx(0.8)
    assert res.brute_force == pytest.approx(0.8)


def test_chain_sum_two_by_two_closed_form():
    rho, x, y = 0.8, 0.25, 0.5
    r = rho ** 4
    res = pl.transfer_chain_sum(2, rho, [x, y])
    expected = x * x + y * y + 2 * r * x * y
    assert res.recursion == pytest.approx(expected, abs=1e-14)
    assert res.brute_force == pytest.approx(expected, abs=1e-14)


def test_chain_sum_recursion_vs_brute_force_random():
    gen = np.random.default_rng(5)
    for _ in range(10):
        L = int(gen.integers(1, 4))
        aleph = int(gen.integers(1, 9))
        rho = float(gen.uniform(0, 1))
        delta = gen.uniform(0.05, 0.95, size=L).tolist()
        res = pl.transfer_chain_sum(aleph, rho, delta)
        assert res.brute_force is not None
        assert abs(res.recursion - res.brute_force) <= 1e-10 * max(
            1.0, abs(res.brute_force))


def test_chain_sum_guard():
    with pytest.raises(TooLarge):
        pl.transfer_chain_sum(20, 0.5, [0.5, 0.5, 0.5], brute_force="always")
    res = pl.transfer_chain_sum(20, 0.5, [0.5, 0.5, 0.5])
    assert res.brute_force is None  # auto mode skips past the guard


def test_sigma_plus_below_one_iff_ks_below_one():
    gen = np.random.default_rng(9)
    for _ in range(60):
        L = int(gen.integers(1, 5))
        rho = float(gen.uniform(0, 1))
        lam = gen.uniform(0.05, 0.95, size=L)
        d = gen.uniform(0.2, 3.0, size=L)
        rep = pl.ks_threshold(rho, d.tolist(), lam.tolist())
        if rep.F_value <= 0.9:
            assert rep.sigma_plus < 1.0
        if math.isfinite(rep.F_value) and rep.F_value > 1.1:
            assert rep.sigma_plus > 1.0
