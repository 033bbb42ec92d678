import itertools
import math
from decimal import Decimal, getcontext

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pdbrw import analytics
from pdbrw.analytics import (LevelClass, LogValue, adaptive_simpson,
                             concentration_ratio, count_tnk, count_tnk_exact,
                             d_of_m, expected_tn, f_nk, f_nk_integral,
                             f_nk_stirling, gamma_density,
                             gamma_density_integral, har, m_n, poisson_tail,
                             poisson_partial_sum)


# ----------------------------------------------------------------- LogValue

def test_logvalue_arithmetic():
    a = LogValue(math.log(3.0))
    b = LogValue(math.log(4.0))
    assert (a * b).linear() == pytest.approx(12.0, rel=1e-12)
    assert (b / a).linear() == pytest.approx(4.0 / 3.0, rel=1e-12)
    assert (a + b).linear() == pytest.approx(7.0, rel=1e-12)


def test_logvalue_zero_and_guard():
    assert LogValue(-math.inf).linear() == 0.0
    with pytest.raises(OverflowError):
        LogValue(701.0).linear()
    with pytest.raises(OverflowError):
        LogValue(-701.0).linear()


def test_levelclass_validation():
    LevelClass(1, 0)
    with pytest.raises(ValueError):
        LevelClass(0, 3)
    with pytest.raises(ValueError):
        LevelClass(2, -1)


# ------------------------------------------------------------ gamma density

def test_gamma_density_trivial_points():
    assert gamma_density(1, 0.0).linear() == pytest.approx(1.0)
    assert gamma_density(2, 1.0).linear() == pytest.approx(math.exp(-1.0),
                                                           rel=1e-12)
    assert gamma_density(3, 0.0).linear() == 0.0


def test_gamma_density_against_extended_precision():
    # independent high-precision evaluation of x^(h-1) e^(-x) / (h-1)!
    getcontext().prec = 60
    h, x = 50, 50
    exact = (Decimal(x) ** (h - 1) / Decimal(math.factorial(h - 1))).ln() \
        - Decimal(x)
    assert gamma_density(h, float(x)).log_magnitude == pytest.approx(
        float(exact), abs=1e-10)


def test_gamma_density_rejects_bad_args():
    with pytest.raises(ValueError):
        gamma_density(0, 1.0)
    with pytest.raises(ValueError):
        gamma_density(2, -0.5)


def test_gamma_density_normalizes():
    for h in (1, 3, 7):
        total = gamma_density_integral(h, 60.0)
        assert total == pytest.approx(1.0, abs=1e-8)


def test_gamma_density_matches_scipy():
    from scipy import stats as sps

    for h, x in [(1, 0.3), (4, 2.0), (20, 19.5)]:
        assert gamma_density(h, x).linear() == pytest.approx(
            sps.gamma.pdf(x, h), rel=1e-10)


# ------------------------------------------------------------------- counts

def enumerate_weight_vectors(n: int, k: int) -> list[tuple[int, ...]]:
    """All strictly increasing vectors 0 < h_1 < ... < h_n = n + k."""
    return [combo + (n + k,)
            for combo in itertools.combinations(range(1, n + k), n - 1)]


def test_count_matches_enumeration():
    for n in range(1, 12):
        for k in range(0, 12 - n + 1):
            exact = len(enumerate_weight_vectors(n, k))
            assert count_tnk_exact(LevelClass(n, k)) == exact
            assert count_tnk(LevelClass(n, k)).linear() == pytest.approx(
                exact, rel=1e-10)


def test_count_exact_limit():
    with pytest.raises(ValueError):
        count_tnk_exact(LevelClass(40, 30))
    # log form keeps working far beyond
    big = count_tnk(LevelClass(500, 300))
    assert big.log_magnitude == pytest.approx(
        math.lgamma(800) - math.lgamma(301) - math.lgamma(500), rel=1e-12)


# ------------------------------------------------------------- level density

@settings(max_examples=200, deadline=None)
@given(st.integers(1, 80), st.integers(0, 80),
       st.floats(1e-3, 120.0, allow_nan=False))
def test_fnk_factorizes(n, k, x):
    lhs = f_nk(LevelClass(n, k), x).log_magnitude
    rhs = (count_tnk(LevelClass(n, k))
           * gamma_density(n + k, x)).log_magnitude
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_fnk_at_zero():
    assert f_nk(LevelClass(1, 0), 0.0).linear() == pytest.approx(1.0)
    assert f_nk(LevelClass(2, 0), 0.0).linear() == 0.0


def test_fnk_integral_normalizes_to_count():
    # integral over all x of the class density is the class count
    for n, k in [(2, 1), (3, 2), (5, 0)]:
        total = f_nk_integral(LevelClass(n, k), 80.0)
        assert total == pytest.approx(count_tnk_exact(LevelClass(n, k)),
                                      rel=1e-8)


def test_stirling_form_accuracy_improves_with_n():
    def rel_log_err(n):
        k = round(n / math.e)
        x = n / math.e
        exact = f_nk(LevelClass(n, k), x).log_magnitude
        approx = f_nk_stirling(LevelClass(n, k), x).log_magnitude
        return abs(approx - exact)

    e100, e400, e1600 = rel_log_err(100), rel_log_err(400), rel_log_err(1600)
    assert e100 < 0.05
    assert e400 < e100
    assert e1600 < e400


def test_stirling_form_rejections():
    with pytest.raises(ValueError):
        f_nk_stirling(LevelClass(10, 0), 3.0)
    with pytest.raises(ValueError):
        f_nk_stirling(LevelClass(10, 2), 0.0)
    with pytest.raises(ValueError):
        f_nk_stirling(LevelClass(1, 2), 3.0)


def test_expected_tn_values():
    assert expected_tn(3, 2.0).linear() == pytest.approx(8.0 / 6.0, rel=1e-12)
    assert expected_tn(1, 0.0).linear() == 0.0
    with pytest.raises(ValueError):
        expected_tn(0, 1.0)


# ------------------------------------------------------------ Poisson tails

def test_poisson_tail_bounds_dominate_partial_sums():
    for z in (2.0, 7.0, 31.0):
        for alpha in (0.3, 0.7, 1.0):
            bound = poisson_tail(z, "lower", alpha).log_magnitude
            actual = poisson_partial_sum(z, 0, math.floor(alpha * z))
            assert actual.log_magnitude < bound
        for beta in (1.0, 1.5, 3.0):
            bound = poisson_tail(z, "upper", beta).log_magnitude
            actual = poisson_partial_sum(z, math.ceil(beta * z), 50 * int(z) + 200)
            assert actual.log_magnitude < bound


def test_poisson_tail_validation():
    with pytest.raises(ValueError):
        poisson_tail(-1.0, "lower", 0.5)
    with pytest.raises(ValueError):
        poisson_tail(2.0, "lower", 1.5)
    with pytest.raises(ValueError):
        poisson_tail(2.0, "upper", 0.5)
    with pytest.raises(ValueError):
        poisson_tail(2.0, "sideways", 1.0)


def test_poisson_partial_sum_totals():
    # full sum is e^z
    for z in (1.0, 4.0):
        total = poisson_partial_sum(z, 0, 200)
        assert total.log_magnitude == pytest.approx(z, abs=1e-12)
    assert poisson_partial_sum(3.0, 5, 4).linear() == 0.0


# ------------------------------------------------------ concentration ratio

def test_concentration_ratio_is_one_at_t_zero():
    assert concentration_ratio(5, 9.0, 0.0) == pytest.approx(1.0, abs=1e-9)
    assert concentration_ratio(30, 12.5, 0.0) == pytest.approx(1.0, abs=1e-9)


def test_concentration_ratio_is_generation_free():
    # the ratio collapses to a pure Poisson tail expression in (x, t)
    for x, t in [(9.0, 1.0), (20.0, 1.4)]:
        r1 = concentration_ratio(3, x, t)
        r2 = concentration_ratio(40, x, t)
        assert r1 == pytest.approx(r2, rel=1e-9)


def test_concentration_ratio_matches_poisson_tail_probability():
    from scipy import stats as sps

    for x, t in [(9.0, 1.0), (25.0, 1.5)]:
        half = t * math.sqrt(x)
        k_lo = math.floor(x - half)
        k_hi = max(math.ceil(x + half), k_lo + 1)
        prob = sps.poisson.cdf(k_lo, x) + sps.poisson.sf(k_hi - 1, x)
        expect = math.exp(t * t / 2.0) * prob
        assert concentration_ratio(10, x, t) == pytest.approx(expect, rel=1e-9)


def test_concentration_ratio_domain():
    with pytest.raises(ValueError):
        concentration_ratio(5, 9.0, 9.0 ** (1 / 6) + 0.1)
    with pytest.raises(ValueError):
        concentration_ratio(5, -1.0, 0.5)


# --------------------------------------------------- deterministic sequences

def test_har_against_fsum():
    assert har(0) == 0.0
    assert har(1) == 1.0
    for s in (10, 1234):
        assert har(s) == pytest.approx(
            math.fsum(1.0 / i for i in range(1, s + 1)), abs=1e-14)
    with pytest.raises(ValueError):
        har(-1)


def test_mn_centering():
    assert m_n(1) == pytest.approx(1 / math.e)
    assert m_n(10) == pytest.approx(10 / math.e
                                    + 1.5 * math.log(10) / math.e, rel=1e-14)
    vals = [m_n(n) for n in range(1, 50)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_d_of_m_is_the_last_generation_below_harmonic():
    for m in (5, 50, 1000):
        d = d_of_m(m)
        target = har(m - 1)
        assert m_n(d) <= target < m_n(d + 1)
    with pytest.raises(ValueError):
        d_of_m(1)


def test_d_of_m_growth_is_roughly_e_log_m():
    # har(m-1) ~ log m, and m_n(n) ~ n/e, so d(m)/log(m) -> e
    assert d_of_m(10 ** 6) / math.log(10 ** 6) == pytest.approx(math.e,
                                                                rel=0.15)


# ---------------------------------------------------------------- quadrature

def test_adaptive_simpson_known_integrals():
    assert adaptive_simpson(math.sin, 0.0, math.pi) == pytest.approx(
        2.0, abs=1e-9)
    assert adaptive_simpson(lambda t: t * t, 0.0, 3.0) == pytest.approx(
        9.0, abs=1e-10)
    assert adaptive_simpson(math.exp, 1.0, 1.0) == 0.0
