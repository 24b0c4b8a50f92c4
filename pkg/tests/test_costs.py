"""Cost families against their from-scratch definitions, plus the contract
details: eval counter, minimum segment lengths, parameter validation."""

import threading

import numpy as np
import pytest

import _oracles as oracle
from segscan import (
    AUTO_METRIC,
    MEDIAN_HEURISTIC,
    CostSpec,
    fit,
    median_heuristic,
    validate_signal,
)
from segscan.exceptions import (
    BadParamError,
    DegenerateSignalWarning,
    IndexOutOfRangeError,
    MemoryBudgetError,
    SegmentTooShortError,
    SignalTooShortError,
)


def close(a, b, rel=1e-9):
    return abs(a - b) <= rel * (1.0 + abs(b))


@pytest.fixture(scope="module")
def noisy_signal():
    rng = np.random.default_rng(42)
    steps = np.repeat(rng.normal(scale=3.0, size=(5, 3)), 24, axis=0)
    return validate_signal(steps + rng.normal(size=(120, 3)))


def random_queries(rng, n_samples, min_len, count=200):
    out = []
    for _ in range(count):
        a = int(rng.integers(0, n_samples - min_len + 1))
        b = int(rng.integers(a + min_len, n_samples + 1))
        out.append((a, b))
    return out


def test_l2_matches_definition(noisy_signal):
    fitted = fit(CostSpec(family="l2"), noisy_signal)
    rng = np.random.default_rng(1)
    for a, b in random_queries(rng, 120, 1):
        assert close(fitted.cost(a, b), oracle.l2_cost(noisy_signal.data, a, b))


def test_normal_matches_definition(noisy_signal):
    fitted = fit(CostSpec(family="normal"), noisy_signal)
    rng = np.random.default_rng(2)
    for a, b in random_queries(rng, 120, fitted.min_seg_len):
        assert close(fitted.cost(a, b), oracle.normal_cost(noisy_signal.data, a, b))


def test_linear_matches_definition(noisy_signal):
    fitted = fit(CostSpec(family="linear"), noisy_signal)
    rng = np.random.default_rng(3)
    for a, b in random_queries(rng, 120, fitted.min_seg_len):
        assert close(fitted.cost(a, b), oracle.linear_cost(noisy_signal.data, a, b))


def test_ar_matches_definition():
    rng = np.random.default_rng(4)
    data = np.zeros((150, 2))
    data[0] = rng.normal(size=2)
    for t in range(1, 150):
        data[t] = 0.6 * data[t - 1] + rng.normal(size=2)
    signal = validate_signal(data)
    fitted = fit(CostSpec(family="ar", order=3), signal)
    assert fitted.min_seg_len == 5
    for a, b in random_queries(rng, 150, fitted.min_seg_len):
        assert close(fitted.cost(a, b), oracle.ar_cost(data, a, b, order=3))


def test_kernel_linear_matches_definition(noisy_signal):
    fitted = fit(CostSpec(family="kernel", kernel="linear"), noisy_signal)
    rng = np.random.default_rng(5)
    for a, b in random_queries(rng, 120, 1, count=100):
        assert close(fitted.cost(a, b), oracle.kernel_cost(noisy_signal.data, a, b, "linear"))


def test_kernel_rbf_matches_definition(noisy_signal):
    fitted = fit(CostSpec(family="kernel", kernel="rbf", gamma=0.35), noisy_signal)
    rng = np.random.default_rng(6)
    for a, b in random_queries(rng, 120, 1, count=100):
        direct = oracle.kernel_cost(noisy_signal.data, a, b, "rbf", gamma=0.35)
        assert close(fitted.cost(a, b), direct)


def test_kernel_rbf_median_bandwidth(noisy_signal):
    fitted = fit(CostSpec(family="kernel", kernel="rbf", gamma=MEDIAN_HEURISTIC), noisy_signal)
    assert close(fitted.gamma, oracle.median_gamma(noisy_signal.data))


def test_mahalanobis_auto_matches_definition(noisy_signal):
    fitted = fit(CostSpec(family="mahalanobis"), noisy_signal)
    metric = oracle.auto_metric(noisy_signal.data)
    rng = np.random.default_rng(7)
    for a, b in random_queries(rng, 120, 1, count=100):
        assert close(fitted.cost(a, b), oracle.mahalanobis_cost(noisy_signal.data, a, b, metric))


def test_mahalanobis_explicit_metric(noisy_signal):
    metric = np.array([[2.0, 0.5, 0.0], [0.5, 1.0, 0.0], [0.0, 0.0, 3.0]])
    fitted = fit(CostSpec(family="mahalanobis", metric=metric), noisy_signal)
    rng = np.random.default_rng(8)
    for a, b in random_queries(rng, 120, 1, count=100):
        assert close(fitted.cost(a, b), oracle.mahalanobis_cost(noisy_signal.data, a, b, metric))


def test_kernel_linear_equals_l2(noisy_signal):
    lin = fit(CostSpec(family="kernel", kernel="linear"), noisy_signal)
    l2 = fit(CostSpec(family="l2"), noisy_signal)
    rng = np.random.default_rng(9)
    for a, b in random_queries(rng, 120, 1, count=100):
        assert close(lin.cost(a, b), l2.cost(a, b))


def test_mahalanobis_identity_equals_l2(noisy_signal):
    maha = fit(CostSpec(family="mahalanobis", metric=np.eye(3)), noisy_signal)
    l2 = fit(CostSpec(family="l2"), noisy_signal)
    rng = np.random.default_rng(10)
    for a, b in random_queries(rng, 120, 1, count=100):
        assert close(maha.cost(a, b), l2.cost(a, b))


def test_l2_nonnegative_and_zero_on_constant():
    signal = validate_signal(np.ones((30, 2)))
    fitted = fit(CostSpec(family="l2"), signal)
    assert fitted.cost(0, 30) == 0.0
    assert fitted.cost(5, 20) == 0.0


@pytest.mark.parametrize("family,kw", [
    ("l2", {}),
    ("linear", {}),
    ("ar", {"order": 2}),
    ("kernel", {"kernel": "linear"}),
    ("kernel", {"kernel": "rbf", "gamma": 0.5}),
    ("mahalanobis", {}),
])
def test_costs_nonnegative(noisy_signal, family, kw):
    fitted = fit(CostSpec(family=family, **kw), noisy_signal)
    rng = np.random.default_rng(11)
    for a, b in random_queries(rng, 120, fitted.min_seg_len, count=100):
        assert fitted.cost(a, b) >= 0.0


def test_normal_cost_can_be_negative():
    # near-constant segment: covariance close to the 1e-6 ridge, so the log
    # determinant and with it the cost drop well below zero
    rng = np.random.default_rng(12)
    signal = validate_signal(1e-4 * rng.normal(size=(40, 2)))
    fitted = fit(CostSpec(family="normal"), signal)
    assert fitted.cost(0, 40) < 0.0


def test_min_seg_len_per_family(noisy_signal):
    assert fit(CostSpec(family="l2"), noisy_signal).min_seg_len == 1
    assert fit(CostSpec(family="normal"), noisy_signal).min_seg_len == 4
    assert fit(CostSpec(family="linear"), noisy_signal).min_seg_len == 4
    assert fit(CostSpec(family="ar", order=4), noisy_signal).min_seg_len == 6
    assert fit(CostSpec(family="kernel"), noisy_signal).min_seg_len == 1
    assert fit(CostSpec(family="mahalanobis"), noisy_signal).min_seg_len == 1


def test_cost_bounds_and_short_segments(noisy_signal):
    fitted = fit(CostSpec(family="normal"), noisy_signal)
    with pytest.raises(IndexOutOfRangeError):
        fitted.cost(-1, 10)
    with pytest.raises(IndexOutOfRangeError):
        fitted.cost(0, 121)
    with pytest.raises(IndexOutOfRangeError):
        fitted.cost(10, 10)
    with pytest.raises(IndexOutOfRangeError):
        fitted.cost(12, 10)
    with pytest.raises(SegmentTooShortError):
        fitted.cost(0, 3)


def test_eval_counter_counts_every_call(noisy_signal):
    fitted = fit(CostSpec(family="l2"), noisy_signal)
    assert fitted.eval_counter == 0
    fitted.cost(0, 10)
    fitted.cost(0, 10)
    fitted.cost(3, 9)
    assert fitted.eval_counter == 3


def test_eval_counter_is_thread_safe(noisy_signal):
    fitted = fit(CostSpec(family="l2"), noisy_signal)

    def hammer():
        for _ in range(500):
            fitted.cost(0, 60)

    threads = [threading.Thread(target=hammer) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert fitted.eval_counter == 2000


def test_median_heuristic_frozen_values():
    assert median_heuristic([0.0, 2.0]) == 0.25
    assert median_heuristic([0.0, 1.0, 2.0]) == 1.0
    with pytest.warns(DegenerateSignalWarning):
        assert median_heuristic([0.0, 0.0, 0.0]) == 1.0
    with pytest.raises(SignalTooShortError):
        median_heuristic([1.0])


def test_median_heuristic_sampled_path_is_deterministic():
    rng = np.random.default_rng(13)
    data = rng.normal(size=(400, 2))  # 79800 pairs, beyond the exact cap
    first = median_heuristic(data)
    second = median_heuristic(data)
    assert first == second
    exact = oracle.median_gamma(data)
    assert 0.5 * exact < first < 2.0 * exact


def test_costspec_validation():
    with pytest.raises(BadParamError):
        CostSpec(family="huber")
    with pytest.raises(BadParamError):
        CostSpec(order=0)
    with pytest.raises(BadParamError):
        CostSpec(order=True)
    with pytest.raises(BadParamError):
        CostSpec(kernel="poly")
    with pytest.raises(BadParamError):
        CostSpec(gamma=0.0)
    with pytest.raises(BadParamError):
        CostSpec(gamma=-2.0)
    with pytest.raises(BadParamError):
        CostSpec(gamma="bandwidth")
    with pytest.raises(BadParamError):
        CostSpec(metric=np.ones((2, 3)))
    with pytest.raises(BadParamError):
        CostSpec(metric=np.array([[1.0, 5.0], [-5.0, 1.0]]))
    with pytest.raises(BadParamError):
        CostSpec(metric=np.array([[1.0, 0.0], [0.0, -1.0]]))
    spec = CostSpec(metric=np.eye(2))
    assert not spec.metric.flags.writeable
    assert CostSpec(gamma=MEDIAN_HEURISTIC).gamma == MEDIAN_HEURISTIC
    assert CostSpec(metric=AUTO_METRIC).metric == AUTO_METRIC


def test_fit_rejections(noisy_signal):
    with pytest.raises(BadParamError):
        fit("l2", noisy_signal)
    with pytest.raises(BadParamError):
        fit(CostSpec(family="ar", order=10), validate_signal(np.zeros(8)))
    with pytest.raises(SignalTooShortError):
        fit(CostSpec(family="normal"), validate_signal(np.zeros((2, 2))))
    with pytest.raises(MemoryBudgetError):
        fit(CostSpec(family="kernel"), validate_signal(np.zeros(20_001)))


def test_mahalanobis_metric_shape_must_match(noisy_signal):
    with pytest.raises(BadParamError):
        fit(CostSpec(family="mahalanobis", metric=np.eye(2)), noisy_signal)
