import logging

import numpy as np
import pytest

from netcpd.degstats import DegreeSample, degrees_from_edges
from netcpd.detector import (VERDICT_FIELDS, BootstrapConfig, NullDistribution, TooFewWindows, bootstrap_test,
                             detect_samples, detect_sequence, iter_verdicts, pair_rng, sensitivity_profile,
                             threshold_at, threshold_rank)
from netcpd.ingest import InteractionEvent, Window
from netcpd.metrics import MetricKind
from netcpd.synth import gen_er


def er_sample(n, p, rng):
    return degrees_from_edges(gen_er(n, p, rng), n)


def poisson_sample(rng, n=200, lam=3.0):
    return DegreeSample(rng.poisson(lam, n) + 1)


def test_threshold_is_950th_smallest():
    d = np.random.default_rng(0).permutation(np.arange(1000) / 1000.0)
    assert threshold_rank(0.95, 1000) == 950
    assert threshold_at(np.sort(d), 0.95) == 949 / 1000.0


def test_threshold_rank_edges():
    assert threshold_rank(0.9, 1000) == 900
    assert threshold_rank(0.999, 100) == 100
    assert threshold_rank(0.001, 100) == 1


def test_p_value_and_rejection_rule():
    null = NullDistribution(np.arange(1000) / 1000.0, 0.95)
    assert null.p_value() == (1 + 50) / 1001
    assert null.rejects(0.9) and not null.rejects(0.99)
    tie = NullDistribution(np.arange(1000) / 1000.0, 0.949)
    assert not tie.rejects(0.95)  # strict inequality: equal to threshold is not a change


def test_config_validation():
    with pytest.raises(ValueError):
        BootstrapConfig(n_resamples=99)
    with pytest.raises(ValueError):
        BootstrapConfig(alpha=1.0)
    with pytest.raises(ValueError):
        BootstrapConfig(resample_size="half")
    with pytest.raises(ValueError):
        BootstrapConfig(subsample=0)


def test_calibrated_on_iid_samples():
    rng = np.random.default_rng(42)
    cfg = BootstrapConfig(alpha=0.95, n_resamples=500)
    rej = 0
    for k in range(300):
        v = bootstrap_test(poisson_sample(rng), poisson_sample(rng), cfg, pair_rng(1, k, k + 1))
        rej += v.rejected
    assert 0.01 <= rej / 300 <= 0.10


def test_er_change_detected():
    rng = np.random.default_rng(7)
    cfg = BootstrapConfig(alpha=0.95)
    hits = sum(bootstrap_test(er_sample(200, 0.003, rng), er_sample(200, 0.009, rng), cfg, pair_rng(0, k, k)).rejected
               for k in range(200))
    assert hits / 200 >= 0.99


@pytest.mark.parametrize("tag", ["ks", "kl", "rh"])
def test_every_metric_runs(tag):
    rng = np.random.default_rng(1)
    cfg = BootstrapConfig(metric=MetricKind(tag), n_resamples=200)
    v = bootstrap_test(er_sample(200, 0.02, rng), er_sample(200, 0.06, rng), cfg, pair_rng(0, 0, 1))
    assert v.metric == tag and v.distance >= 0 and 0 < v.p_value <= 1


def test_consecutive_pairs():
    rng = np.random.default_rng(2)
    samples = [poisson_sample(rng) for _ in range(5)]
    vs = detect_samples(samples, BootstrapConfig(n_resamples=100))
    assert [(v.base_index, v.comp_index) for v in vs] == [(0, 1), (1, 2), (2, 3), (3, 4)]


def _window(i, edges):
    return Window(i, i * 10, i * 10 + 10, tuple(InteractionEvent(a, b, i * 10) for a, b in edges))


def test_bridge_over_empty_window(caplog):
    ws = [_window(0, [("a", "b"), ("b", "c")]), _window(1, []), _window(2, [("a", "b"), ("c", "d")])]
    with caplog.at_level(logging.INFO):
        vs = detect_sequence(ws, BootstrapConfig(n_resamples=100))
    assert len(vs) == 1
    assert (vs[0].base_index, vs[0].comp_index, vs[0].skipped) == (0, 2, (1,))
    assert "window 1 is empty" in caplog.text


def test_too_few_windows():
    with pytest.raises(TooFewWindows):
        detect_samples([DegreeSample(np.array([1, 1])), None], BootstrapConfig())


def test_pair_results_independent_of_order():
    rng = np.random.default_rng(3)
    samples = [poisson_sample(rng) for _ in range(4)]
    cfg = BootstrapConfig(n_resamples=200, seed=9)
    full = detect_samples(samples, cfg)
    tail = next(iter_verdicts([None, None, samples[2], samples[3]], cfg))
    assert full[2].threshold == tail.threshold and full[2].p_value == tail.p_value


def test_deterministic_given_seed():
    rng = np.random.default_rng(4)
    samples = [poisson_sample(rng) for _ in range(4)]
    cfg = BootstrapConfig(n_resamples=200, seed=5, subsample=50)
    assert detect_samples(samples, cfg) == detect_samples(samples, cfg)


def test_record_fields():
    rng = np.random.default_rng(0)
    v = detect_samples([poisson_sample(rng), poisson_sample(rng)], BootstrapConfig(n_resamples=100))[0]
    assert tuple(v.as_record()) == VERDICT_FIELDS


def test_sensitivity_profile_consistent_with_single_runs():
    rng = np.random.default_rng(8)
    samples = [poisson_sample(rng, lam=l) for l in (3, 3, 3.6, 3.6, 5, 3)]
    cfg = BootstrapConfig(n_resamples=300, seed=2)
    prof = sensitivity_profile(samples, cfg, [0.90, 0.99])
    for a in (0.90, 0.99):
        single = detect_samples(samples, BootstrapConfig(n_resamples=300, seed=2, alpha=a))
        assert [m[a] for _, m in prof] == [v.rejected for v in single]
    for _, m in prof:
        assert m[0.90] or not m[0.99]


def test_sensitivity_profile_cases():
    low = NullDistribution(np.arange(1000) / 1000.0, 0.1)
    mid = NullDistribution(np.arange(1000) / 1000.0, 0.95)
    assert {a: low.rejects(a) for a in (0.9, 0.99)} == {0.9: False, 0.99: False}
    assert {a: mid.rejects(a) for a in (0.9, 0.99)} == {0.9: True, 0.99: False}


def test_sensitivity_profile_requires_sorted():
    with pytest.raises(ValueError):
        sensitivity_profile([], BootstrapConfig(), [0.99, 0.9])
