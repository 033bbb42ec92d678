import math

import pytest

from pdbrw.pratt import (PrattSurveyRecord, build_pratt, distinct_prime_factors,
                         factorize, height_bound, is_prime, pratt_height,
                         pratt_survey, sieve_primes, survey_summary)


def naive_is_prime(n: int) -> bool:
    if n < 2:
        return False
    for d in range(2, int(math.isqrt(n)) + 1):
        if n % d == 0:
            return False
    return True


def naive_height(p: int) -> int:
    """Direct recursion straight from the definition; no memoization."""
    if p == 2:
        return 0
    qs = set()
    m = p - 1
    d = 2
    while d * d <= m:
        while m % d == 0:
            qs.add(d)
            m //= d
        d += 1
    if m > 1:
        qs.add(m)
    return 1 + max(naive_height(q) for q in qs)


def test_is_prime_matches_naive_oracle():
    for n in range(0, 3000):
        assert is_prime(n) == naive_is_prime(n), n


def test_is_prime_on_pseudoprimes_and_large_values():
    # Carmichael numbers fool Fermat tests; these must come back composite
    for n in (561, 1105, 1729, 2465, 75361, 101101):
        assert not is_prime(n)
    assert is_prime(2 ** 61 - 1)
    assert not is_prime(2 ** 61 + 1)
    with pytest.raises(ValueError):
        is_prime(1 << 64)


def test_factorize_reconstructs_products():
    cases = [2, 12, 360, 1 << 20, 999999999989, 1000003 * 1000033,
             (2 ** 31 - 1) * 7]
    for n in cases:
        fs = factorize(n)
        prod = 1
        for f in fs:
            prod *= f
            assert is_prime(f)
        assert prod == n
        assert list(fs) == sorted(fs)
    assert factorize(1) == ()
    with pytest.raises(ValueError):
        factorize(0)


def test_distinct_prime_factors():
    assert distinct_prime_factors(12) == (2, 3)
    assert distinct_prime_factors(1) == ()


def test_small_certificate_trees():
    t2 = build_pratt(2)
    assert t2.height == 0 and t2.children == () and t2.size == 1
    t3 = build_pratt(3)
    assert t3.height == 1 and [c.p for c in t3.children] == [2]
    t7 = build_pratt(7)
    assert t7.height == 2
    assert sorted(c.p for c in t7.children) == [2, 3]
    with pytest.raises(ValueError):
        build_pratt(8)


def test_heights_match_naive_oracle_exhaustively():
    for p in sieve_primes(2, 10000):
        assert pratt_height(p) == naive_height(p), p


def test_height_is_one_plus_max_child_height():
    for p in sieve_primes(900, 1200):
        if p == 2:
            continue
        assert pratt_height(p) == 1 + max(pratt_height(q)
                                          for q in distinct_prime_factors(p - 1))


def test_height_respects_binary_log_bound():
    for p in sieve_primes(100000, 101000):
        assert pratt_height(p) <= height_bound(p)


def test_pratt_height_rejects_composites():
    with pytest.raises(ValueError):
        pratt_height(10)


def test_sieve_matches_naive():
    assert sieve_primes(2, 30) == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    lo, hi = 10 ** 6, 10 ** 6 + 200
    assert sieve_primes(lo, hi) == [n for n in range(lo, hi)
                                    if naive_is_prime(n)]
    assert sieve_primes(5, 5) == []
    with pytest.raises(ValueError):
        sieve_primes(2, 1 << 55)


def test_survey_records_and_summary():
    records = list(pratt_survey(10 ** 5, 10 ** 5 + 2000))
    assert records
    for r in records:
        assert is_prime(r.p)
        prod = 1
        for f in r.factors:
            prod *= f
        assert prod == r.p - 1
        assert r.height <= height_bound(r.p)
        assert math.isfinite(r.error_loglog)
    summary = survey_summary(records)
    assert summary["count"] == len(records)
    exceed = [summary["exceedance"][z] for z in ("0.0", "1.0", "2.0", "3.0")]
    assert exceed == sorted(exceed, reverse=True)  # nested sets


def test_survey_validation():
    with pytest.raises(ValueError):
        list(pratt_survey(10, 5))
    with pytest.raises(ValueError):
        list(pratt_survey(2, 10 ** 6, work_limit=10))
    with pytest.raises(ValueError):
        survey_summary([])


def test_survey_record_centering_fields():
    (rec,) = list(pratt_survey(1000003, 1000004))
    ll = math.log(math.log(rec.p))
    assert rec.error_loglog == pytest.approx(
        rec.height - math.e * ll + 1.5 * math.log(ll))
    assert rec.error_log == pytest.approx(
        rec.height - math.e * math.log(rec.p)
        + 1.5 * math.log(math.log(rec.p)))
    assert isinstance(rec, PrattSurveyRecord)
