"""Distribution factories, quantization, and network validation."""

import math

import pytest
from scipy import integrate

from dicnet.model import (DicNetwork, PropagationDistribution,
                          fixed_distribution, mean_propagation,
                          quantize_exponential,
                          uniform_discrete_distribution, validate_network)
from dicnet.fixtures import TWO_POINT, fixture_g1


def test_two_point_mean():
    # 0.4 * 0.8 + 0.8 * 0.2, computable by hand
    assert mean_propagation(TWO_POINT) == pytest.approx(0.48, abs=1e-12)


def test_fixed_distribution():
    d = fixed_distribution(0.25)
    assert d.values == (0.25,)
    assert d.masses == (1.0,)
    assert d.check() is None
    assert mean_propagation(d) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        fixed_distribution(1.5)
    with pytest.raises(ValueError):
        fixed_distribution(-0.1)


def test_uniform_discrete_distribution():
    d = uniform_discrete_distribution([0.1, 0.01, 0.001])
    assert d.values == (0.001, 0.01, 0.1)      # sorted ascending
    assert all(m == pytest.approx(1 / 3) for m in d.masses)
    assert d.check() is None
    assert mean_propagation(d) == pytest.approx(0.111 / 3)
    with pytest.raises(ValueError):
        uniform_discrete_distribution([])
    with pytest.raises(ValueError):
        uniform_discrete_distribution([0.1, 0.1])
    with pytest.raises(ValueError):
        uniform_discrete_distribution([0.1, 1.2])


def test_check_reports_violations():
    assert "mass sum" in PropagationDistribution((0.1, 0.2), (0.5, 0.6)).check()
    assert "empty" in PropagationDistribution((), ()).check()
    assert "increasing" in PropagationDistribution((0.2, 0.1), (0.5, 0.5)).check()
    assert "outside" in PropagationDistribution((1.2,), (1.0,)).check()


def test_quantize_exponential_against_quadrature():
    # independent check: each atom must equal the conditional mean of
    # min(X, 1) over its equal-mass quantile bin, X ~ Exp(mean)
    for mean, bins in [(0.01, 2), (0.01, 5), (0.3, 4), (2.0, 3)]:
        d = quantize_exponential(mean, bins)
        assert d.check() is None
        assert abs(math.fsum(d.masses) - 1.0) < 1e-12

        def pdf(x):
            return math.exp(-x / mean) / mean

        # reconstruct per-bin conditional means numerically
        total = 0.0
        for i in range(bins):
            lo = -mean * math.log(1 - i / bins)
            hi = math.inf if i == bins - 1 else -mean * math.log(1 - (i + 1) / bins)
            clip_hi = min(hi, 1.0) if hi != math.inf else 1.0
            contrib = 0.0
            if lo < 1.0:
                contrib += integrate.quad(lambda x: x * pdf(x), lo, clip_hi)[0]
            # mass of the bin that lies beyond the clip point sits at 1
            if hi == math.inf:
                tail = math.exp(-max(lo, 1.0) / mean)
            else:
                tail = max(0.0, math.exp(-max(lo, 1.0) / mean)
                           - math.exp(-max(hi, 1.0) / mean)) if hi > 1.0 else 0.0
            contrib += tail
            total += contrib
        assert mean_propagation(d) == pytest.approx(total, abs=1e-6)


def test_quantize_exponential_two_bin_atoms():
    # frozen from the quadrature cross-check above
    d = quantize_exponential(0.01, 2)
    assert d.masses == (0.5, 0.5)
    assert d.values[0] == pytest.approx(0.0030685281944005469, abs=1e-12)
    assert d.values[1] == pytest.approx(0.0169314718055994, abs=1e-9)


def test_quantize_exponential_preserves_the_clipped_mean():
    # equal-mass bins with conditional-mean atoms keep E[min(X,1)] exactly,
    # which equals mean*(1 - exp(-1/mean)), at every bin count
    for mean in (0.01, 0.3, 1.0):
        target = mean * (1.0 - math.exp(-1.0 / mean))
        for bins in (1, 2, 4, 8, 16):
            d = quantize_exponential(mean, bins)
            assert mean_propagation(d) == pytest.approx(target, abs=1e-9)


def test_quantize_exponential_large_mean_clips():
    d = quantize_exponential(5.0, 4)     # most mass beyond 1
    assert d.values[-1] == 1.0
    assert d.check() is None
    with pytest.raises(ValueError):
        quantize_exponential(0.0, 2)
    with pytest.raises(ValueError):
        quantize_exponential(0.1, 0)


def test_network_cached_views():
    net = fixture_g1()
    assert net.node_count == 6
    assert net.out_edges[0] == ((0, 1),)
    assert net.out_edges[5] == ()
    assert net.edge_means == pytest.approx((0.48,) * 5)
    src, dst, means = net.edge_arrays
    assert list(src) == [0, 1, 2, 3, 4]
    assert list(dst) == [1, 2, 3, 4, 5]


def test_validate_network():
    good = fixture_g1()
    assert validate_network(good) is None
    bad = DicNetwork(2, (0.5, 1.5), ((0, 1, TWO_POINT),), 1)
    assert "activation" in validate_network(bad)
    bad = DicNetwork(2, (0.5, 0.5), ((0, 0, TWO_POINT),), 1)
    assert "self-loop" in validate_network(bad)
    bad = DicNetwork(2, (0.5, 0.5), ((0, 1, TWO_POINT), (0, 1, TWO_POINT)), 1)
    assert "duplicate" in validate_network(bad)
    bad = DicNetwork(2, (0.5, 0.5), ((0, 1, TWO_POINT),), 3)
    assert "budget" in validate_network(bad)
    bad_dist = PropagationDistribution((0.4,), (0.9,))
    bad = DicNetwork(2, (0.5, 0.5), ((0, 1, bad_dist),), 1)
    assert "mass sum" in validate_network(bad)
