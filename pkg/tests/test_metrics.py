import math

import numpy as np
import pytest

from netcpd.degstats import DegreeSample, ecdf
from netcpd.metrics import (MetricKind, batched_distances, ccdh, distance, kl_divergence, ks_distance,
                            rh_distance)

from oracles import kl_scalar, ks_bruteforce, rh_grid


def S(*d):
    return DegreeSample(np.array(d))


def test_ks_examples():
    assert ks_distance(ecdf(S(1, 2, 3)), ecdf(S(3, 2, 1))) == 0.0
    assert ks_distance(ecdf(S(1, 1, 2)), ecdf(S(1, 2, 2))) == pytest.approx(1 / 3, abs=1e-15)
    assert ks_distance(ecdf(S(1)), ecdf(S(10))) == 1.0


def test_ks_matches_bruteforce():
    rng = np.random.default_rng(11)
    for _ in range(100):
        a = rng.integers(1, 21, rng.integers(1, 51)).tolist()
        b = rng.integers(1, 21, rng.integers(1, 51)).tolist()
        assert ks_distance(ecdf(S(*a)), ecdf(S(*b))) == ks_bruteforce(a, b)


def test_kl_identity():
    assert kl_divergence(S(1, 2, 2, 7), S(1, 2, 2, 7)) <= 1e-12


def test_kl_example_matches_scalar_oracle():
    expected = 0.9 * math.log(0.9 / 0.1) + 0.1 * math.log(0.1 / 0.9)
    assert kl_divergence(S(1, 1, 1, 1), S(2, 2, 2, 2), 0.5) == pytest.approx(expected, abs=1e-12)
    assert expected > 0


def test_kl_random_vs_oracle():
    rng = np.random.default_rng(3)
    for _ in range(100):
        a = rng.integers(1, 15, rng.integers(1, 40)).tolist()
        b = rng.integers(1, 15, rng.integers(1, 40)).tolist()
        assert abs(kl_divergence(S(*a), S(*b), 0.5) - kl_scalar(a, b, 0.5)) <= 1e-12


def test_kl_rejects_bad_pseudocount():
    with pytest.raises(ValueError):
        MetricKind("kl", 0.0)


@pytest.mark.parametrize("degs,support,counts", [
    ((1, 1, 2), [1, 2], [3, 1]),
    ((5, 5, 5), [5], [3]),
    ((1, 2, 3), [1, 2, 3], [3, 2, 1]),
])
def test_ccdh(degs, support, counts):
    c = ccdh(S(*degs))
    assert c.support.tolist() == support and c.counts_at_least.tolist() == counts


def test_rh_identity_and_example():
    assert rh_distance(ccdh(S(1, 2, 4)), ccdh(S(1, 2, 4))) == 0.0
    d = rh_distance(ccdh(S(1, 1, 2)), ccdh(S(1, 2, 2)))
    assert d > 0
    assert abs(d - rh_grid([1, 1, 2], [1, 2, 2])) <= 2e-3


def test_rh_matches_grid_oracle():
    rng = np.random.default_rng(21)
    for _ in range(50):
        a = rng.integers(1, 21, rng.integers(1, 51)).tolist()
        b = rng.integers(1, 21, rng.integers(1, 51)).tolist()
        got = rh_distance(ccdh(S(*a)), ccdh(S(*b)))
        assert abs(got - rh_grid(a, b)) <= 2e-3, (a, b)


def test_rh_symmetric():
    a, b = ccdh(S(1, 3, 3, 8)), ccdh(S(2, 2, 5))
    assert rh_distance(a, b) == rh_distance(b, a)


def test_distance_direction_kl():
    base, comp = S(1, 1, 2), S(2, 2, 2, 3)
    assert distance(MetricKind("kl"), base, comp) == kl_divergence(comp, base)


@pytest.mark.parametrize("tag", ["ks", "kl", "rh"])
def test_batched_matches_scalar(tag):
    rng = np.random.default_rng(5)
    base = S(*rng.integers(1, 12, 60))
    draws = rng.multinomial(40, base.counts / base.node_count, size=25)
    got = batched_distances(MetricKind(tag), base, draws)
    for row, g in zip(draws, got):
        sample = S(*np.repeat(base.support, row))
        assert g == pytest.approx(distance(MetricKind(tag), base, sample), abs=1e-12)


def test_metric_kind_validation():
    assert MetricKind("KS").tag == "ks"
    with pytest.raises(ValueError):
        MetricKind("emd")
