from fractions import Fraction

import numpy as np
import numpy.testing as np_test
import pytest
from scipy import stats as sp_stats

from chilab.core.exceptions import ParameterError
from chilab.services.oracles import brute_triangle_moments
from chilab.services.stats import (
    SampleStats,
    exact_triangle_moments,
    exact_triangle_moments_fraction,
    ks_distance,
    skewness,
    standard_error,
    standardize,
    y_moment_bounds,
)


def test_streaming_moments_match_numpy():
    values = np.random.default_rng(0).exponential(size=500)
    acc = SampleStats.of(values)
    assert acc.count == 500
    assert acc.mean == pytest.approx(values.mean(), rel=1e-12)
    assert acc.variance == pytest.approx(values.var(ddof=1), rel=1e-10)
    assert acc.skewness == pytest.approx(sp_stats.skew(values, bias=True), rel=1e-9)
    assert (acc.min, acc.max) == (values.min(), values.max())


def test_merge_equals_single_stream():
    values = np.random.default_rng(1).normal(3.0, 2.0, size=300)
    whole = SampleStats.of(values)
    merged = SampleStats.of(values[:70]).merge(SampleStats.of(values[70:]))
    assert merged.count == whole.count
    assert merged.mean == pytest.approx(whole.mean, rel=1e-12)
    assert merged.m2 == pytest.approx(whole.m2, rel=1e-10)
    assert merged.m3 == pytest.approx(whole.m3, rel=1e-8, abs=1e-8)
    assert merged.samples == list(values)


def test_merge_with_empty():
    acc = SampleStats.of([1.0, 2.0, 4.0])
    merged = SampleStats().merge(acc)
    assert (merged.count, merged.mean, merged.m2) == (acc.count, acc.mean, acc.m2)


def test_retention_limit_drops_samples():
    acc = SampleStats(limit=5)
    for value in range(6):
        acc.add(value)
    assert not acc.retain
    assert acc.samples == []
    with pytest.raises(ParameterError):
        acc.quantile(0.5)
    summary = acc.summary()
    assert summary.ks is None
    assert summary.mean == pytest.approx(2.5)


def test_summary_quartiles():
    summary = SampleStats.of(range(1, 10)).summary()
    assert (summary.q1, summary.median, summary.q3) == (3.0, 5.0, 7.0)
    assert summary.n_trials == 9


def test_standard_error():
    assert standard_error(SampleStats.of([1.0])) == 0.0
    assert standard_error(SampleStats.of([0.0, 2.0])) == pytest.approx(1.0)


def test_ks_distance_examples():
    assert ks_distance([0.0]) == pytest.approx(0.5)
    assert ks_distance([10.0] * 5) == pytest.approx(1.0, abs=1e-12)
    draws = np.random.default_rng(2).standard_normal(100_000)
    assert ks_distance(draws) <= 0.01
    with pytest.raises(ParameterError):
        ks_distance([])


def test_skewness_examples():
    assert skewness([-1, 0, 1]) == pytest.approx(0.0, abs=1e-15)
    assert skewness([-3, -1, 0, 1, 3]) == pytest.approx(0.0, abs=1e-12)
    draws = np.random.default_rng(3).exponential(size=100_000)
    assert skewness(draws) == pytest.approx(2.0, abs=0.1)
    with pytest.raises(ParameterError):
        skewness([1, 1, 1])


def test_standardize():
    np_test.assert_allclose(standardize([0, 2], 1, 1), [-1, 1])
    np_test.assert_allclose(standardize([4.0], 4.0, 2.0), [0.0])
    with pytest.raises(ParameterError):
        standardize([1, 2], 0, 0)


def test_exact_triangle_moments_examples():
    assert exact_triangle_moments(4, 0.5) == (0.5, 0.625)
    assert exact_triangle_moments(7, 0.0) == (0.0, 0.0)
    assert exact_triangle_moments(7, 1.0) == (35.0, 0.0)


@pytest.mark.parametrize("n", [3, 4, 5])
@pytest.mark.parametrize("q", [Fraction(1, 4), Fraction(1, 2), Fraction(2, 3)])
def test_exact_triangle_moments_match_enumeration(n, q):
    assert exact_triangle_moments_fraction(n, q) == brute_triangle_moments(n, q)


def test_exact_triangle_moments_reject_bad_input():
    with pytest.raises(ParameterError):
        exact_triangle_moments(5, 1.5)


def test_y_moment_bounds():
    first, second = y_moment_bounds(10, 0.1)
    assert first == pytest.approx(0.2)
    assert second >= first
    assert y_moment_bounds(10, 0.0) == (0.0, 0.0)
