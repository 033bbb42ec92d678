import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pdbrw.stats import (LineFit, StatSummary, fit_tail_rates, median_ci,
                         wls_line)

finite_floats = st.floats(-50.0, 80.0, allow_nan=False)


def summarize(xs, **kw):
    s = StatSummary(**kw)
    s.add_many(xs)
    return s


def test_moments_match_numpy():
    xs = np.random.default_rng(0).normal(3.0, 2.0, 500)
    s = summarize(xs)
    assert s.count == 500
    assert s.mean == pytest.approx(xs.mean(), rel=1e-12)
    assert s.variance == pytest.approx(xs.var(ddof=1), rel=1e-10)
    assert s.min == xs.min() and s.max == xs.max()
    assert s.median == pytest.approx(np.median(xs), rel=1e-12)
    assert s.sem == pytest.approx(xs.std(ddof=1) / math.sqrt(500), rel=1e-10)


def test_empty_summary():
    s = StatSummary()
    assert s.count == 0
    assert math.isnan(s.variance)
    with pytest.raises(ValueError):
        s.quantile(0.5)


@settings(max_examples=80, deadline=None)
@given(st.lists(finite_floats, max_size=60),
       st.lists(finite_floats, max_size=60),
       st.lists(finite_floats, max_size=60))
def test_merge_is_associative_and_commutative(a, b, c):
    sa, sb, sc = summarize(a), summarize(b), summarize(c)
    left = sa.merge(sb).merge(sc)
    right = sa.merge(sb.merge(sc))
    flipped = sb.merge(sa)
    direct = summarize(a + b + c)
    for other in (right, direct):
        assert left.count == other.count
        assert left.mean == pytest.approx(other.mean, rel=1e-9, abs=1e-9)
        assert left.m2 == pytest.approx(other.m2, rel=1e-6, abs=1e-6)
    assert flipped.count == sa.merge(sb).count
    assert flipped.mean == pytest.approx(sa.merge(sb).mean, rel=1e-9,
                                         abs=1e-9)
    assert np.array_equal(left.hist, direct.hist)


def test_merge_with_empty_is_identity():
    s = summarize([1.0, 2.0, 5.0])
    merged = s.merge(StatSummary())
    assert merged.count == s.count
    assert merged.mean == s.mean
    assert merged.m2 == s.m2
    assert merged.min == s.min and merged.max == s.max


def test_merge_rejects_mismatched_histograms():
    with pytest.raises(ValueError):
        StatSummary(hist_lo=0.0).merge(StatSummary(hist_lo=1.0))


def test_quantile_falls_back_to_histogram_beyond_cap():
    xs = np.random.default_rng(1).exponential(2.0, 4000)
    s = summarize(xs, value_cap=100, hist_lo=0.0, hist_width=0.05,
                  hist_bins=800)
    assert not s.values_complete
    assert s.median == pytest.approx(np.median(xs), abs=0.06)
    assert s.quantile(0.9) == pytest.approx(np.quantile(xs, 0.9), abs=0.1)


def test_quantile_validation():
    s = summarize([1.0, 2.0])
    with pytest.raises(ValueError):
        s.quantile(1.5)


def test_to_dict_round():
    d = summarize([1.0, 3.0]).to_dict()
    assert d["count"] == 2 and d["mean"] == 2.0


def test_median_ci_covers_synthetic_median():
    # estimated median of Exponential(1) data: CI should cover log 2
    rng = np.random.default_rng(7)
    hits = 0
    trials = 100
    for _ in range(trials):
        xs = np.sort(rng.exponential(size=400))
        lo, hi = median_ci(xs)
        hits += lo <= math.log(2.0) <= hi
    assert hits >= 90  # nominal 95%, generous slack


def test_median_ci_tiny_sample():
    lo, hi = median_ci(np.array([1.0, 2.0, 3.0]))
    assert lo == 1.0 and hi == 3.0


def test_wls_recovers_exact_line():
    x = np.array([0.0, 1.0, 2.0, 3.0])
    y = 2.5 * x - 1.0
    fit = wls_line(x, y, np.ones(4))
    assert fit.slope == pytest.approx(2.5, abs=1e-12)
    assert fit.intercept == pytest.approx(-1.0, abs=1e-12)
    assert fit.slope_se == pytest.approx(0.0, abs=1e-9)


def test_wls_slope_ci_covers_truth_with_noise():
    rng = np.random.default_rng(3)
    x = np.linspace(0, 5, 40)
    y = 1.7 * x + 0.3 + rng.normal(0, 0.5, 40)
    fit = wls_line(x, y, np.full(40, 4.0))
    lo, hi = fit.slope_ci()
    assert lo < 1.7 < hi
    assert isinstance(fit, LineFit)


def test_wls_needs_three_points():
    with pytest.raises(ValueError):
        wls_line([0, 1], [0, 1], [1, 1])


def test_tail_fit_recovers_asymmetric_exponential_rates():
    rng = np.random.default_rng(11)
    n = 100000
    sides = rng.random(n) < 0.5
    vals = np.where(sides, -rng.exponential(1 / 2.0, n),
                    rng.exponential(1.0, n))
    fit = fit_tail_rates(vals, center=0.0)
    assert fit.left_rate == pytest.approx(2.0, abs=3 * fit.left_rate_se + 0.1)
    assert fit.right_rate == pytest.approx(1.0,
                                           abs=3 * fit.right_rate_se + 0.05)
    assert fit.left_buckets >= 3 and fit.right_buckets >= 3


def test_tail_fit_ignores_censored_values():
    rng = np.random.default_rng(12)
    vals = np.concatenate([rng.laplace(0, 1, 50000), [np.inf] * 100])
    fit = fit_tail_rates(vals)
    assert math.isfinite(fit.right_rate)


def test_tail_fit_needs_data():
    with pytest.raises(ValueError):
        fit_tail_rates(np.array([1.0, 2.0]))
