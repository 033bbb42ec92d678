"""Pratt trees: the recursive certificate structure of a prime.

The Pratt tree of a prime p has root p and one child subtree per distinct
prime factor of p - 1, stopping at p = 2 (a leaf, height 0).  The height
satisfies H(p) <= log p / log 2 + 1 because each child is at most (p-1)/2.
Subtrees repeat massively across primes, so heights are memoized globally.

The growth-law analogy with random recursive trees suggests centering H(p)
at e log log p - (3/2) log log log p; the survey records the error term
under that centering and, for reference, under the literal e log p -
(3/2) log log p expression as well (the latter exceeds the deterministic
height bound for large p, so nothing is asserted about it).

Primality is deterministic Miller-Rabin (witness set complete below 2^64);
factorization is trial division below 10^6 followed by Brent-cycle Pollard
rho, complete for 64-bit inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
import math
import random

__all__ = [
    "is_prime",
    "factorize",
    "distinct_prime_factors",
    "PrattTree",
    "build_pratt",
    "pratt_height",
    "height_bound",
    "PrattSurveyRecord",
    "pratt_survey",
    "survey_summary",
    "sieve_primes",
]

# Sufficient deterministic witness set for all n < 2^64.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_TRIAL_LIMIT = 10 ** 6

_height_memo: dict[int, int] = {2: 0}
_factor_memo: dict[int, tuple[int, ...]] = {}


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 2^64."""
    if n >= 1 << 64:
        raise ValueError(f"{n} is out of the 64-bit certified range")
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    d = n - 1
    r = (d & -d).bit_length() - 1
    d >>= r
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_rho(n: int) -> int:
    """A nontrivial factor of composite n (Brent's cycle variant)."""
    if n % 2 == 0:
        return 2
    rnd = random.Random(n)
    while True:
        y = rnd.randrange(1, n)
        c = rnd.randrange(1, n)
        m = 128
        g = r = q = 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


def factorize(n: int) -> tuple[int, ...]:
    """Sorted prime factorization with multiplicity; complete for n < 2^64."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n == 1:
        return ()
    cached = _factor_memo.get(n)
    if cached is not None:
        return cached
    factors: list[int] = []
    m = n
    for p in (2, 3, 5):
        while m % p == 0:
            factors.append(p)
            m //= p
    # wheel over numbers coprime to 30
    inc = (4, 2, 4, 2, 4, 6, 2, 6)
    p, i = 7, 0
    while p * p <= m and p < _TRIAL_LIMIT:
        while m % p == 0:
            factors.append(p)
            m //= p
        p += inc[i]
        i = (i + 1) % 8
    stack = [m] if m > 1 else []
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if m < _TRIAL_LIMIT * _TRIAL_LIMIT or is_prime(m):
            factors.append(m)
            continue
        d = _pollard_rho(m)
        stack.append(d)
        stack.append(m // d)
    out = tuple(sorted(factors))
    if n < 1 << 32:
        _factor_memo[n] = out
    return out


def distinct_prime_factors(n: int) -> tuple[int, ...]:
    return tuple(sorted(set(factorize(n))))


@dataclass(frozen=True)
class PrattTree:
    """Root prime, child subtrees (one per distinct prime factor of p-1),
    and the height H(p)."""

    p: int
    children: tuple["PrattTree", ...]
    height: int

    @property
    def size(self) -> int:
        return 1 + sum(c.size for c in self.children)


def build_pratt(p: int) -> PrattTree:
    """Materialize the full Pratt tree of p.

    Exponential in the worst case; use pratt_height for surveys.
    """
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if p == 2:
        return PrattTree(2, (), 0)
    children = tuple(build_pratt(q) for q in distinct_prime_factors(p - 1))
    return PrattTree(p, children, 1 + max(c.height for c in children))


def pratt_height(p: int) -> int:
    """H(p) with global memoization (subtrees shared across primes)."""
    cached = _height_memo.get(p)
    if cached is not None:
        return cached
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    # iterative post-order; recursion depth can exceed Python's limit
    stack = [p]
    while stack:
        q = stack[-1]
        if q in _height_memo:
            stack.pop()
            continue
        pending = [f for f in distinct_prime_factors(q - 1)
                   if f not in _height_memo]
        if pending:
            stack.extend(pending)
        else:
            stack.pop()
            _height_memo[q] = 1 + max(_height_memo[f]
                                      for f in distinct_prime_factors(q - 1))
    return _height_memo[p]


def height_bound(p: int) -> float:
    """The deterministic bound H(p) <= log p / log 2 + 1."""
    return math.log(p) / math.log(2) + 1.0


@dataclass(frozen=True)
class PrattSurveyRecord:
    """One surveyed prime with its height and centered heights.

    error_loglog centers at e log log p - (3/2) log log log p (the recursive
    growth-law scale); error_log centers at e log p - (3/2) log log p (kept
    for reference only; see module docstring).
    """

    p: int
    height: int
    error_loglog: float
    error_log: float
    factors: tuple[int, ...]  # prime factorization of p - 1, with multiplicity


def sieve_primes(lo: int, hi: int) -> list[int]:
    """Primes in [lo, hi) by a segmented Eratosthenes sieve."""
    if hi <= lo:
        return []
    if hi > 1 << 50:
        raise ValueError("range end beyond the supported 2^50 survey limit")
    import numpy as np

    root = math.isqrt(hi - 1) + 1
    base = np.ones(root + 1, dtype=bool)
    base[:2] = False
    for i in range(2, math.isqrt(root) + 1):
        if base[i]:
            base[i * i:: i] = False
    small = np.flatnonzero(base)
    seg = np.ones(hi - lo, dtype=bool)
    for i in range(max(lo, 0), min(hi, 2)):
        seg[i - lo] = False
    for q in small:
        q = int(q)
        if q * q >= hi:
            break
        start = max(q * q, ((lo + q - 1) // q) * q)
        seg[start - lo:: q] = False
    return [int(x) + lo for x in np.flatnonzero(seg)]


def _loglog_center(p: int) -> float:
    return math.e * math.log(math.log(p)) - 1.5 * math.log(math.log(math.log(p)))


def pratt_survey(x_lo: int, x_hi: int, *, work_limit: int = 10 ** 6):
    """Stream PrattSurveyRecord for every prime in [x_lo, x_hi).

    Primes below e^e get error_loglog = nan (the centering is undefined
    there); below 17 error_log is nan for the same reason.
    """
    if not 2 <= x_lo < x_hi:
        raise ValueError(f"need 2 <= x_lo < x_hi, got [{x_lo}, {x_hi})")
    primes = sieve_primes(x_lo, x_hi)
    if len(primes) > work_limit:
        raise ValueError(f"{len(primes)} primes in range exceeds the work "
                         f"limit {work_limit}")
    for p in primes:
        h = pratt_height(p)
        e_loglog = (h - _loglog_center(p)) if math.log(p) > math.e else math.nan
        e_log = ((h - math.e * math.log(p) + 1.5 * math.log(math.log(p)))
                 if math.log(p) > 1 else math.nan)
        yield PrattSurveyRecord(p, h, e_loglog, e_log, factorize(p - 1))


def survey_summary(records) -> dict:
    """Quantiles of the centered heights and an exceedance table normalized
    by the prime count in range."""
    import numpy as np

    records = list(records)
    if not records:
        raise ValueError("empty survey")
    e = np.array([r.error_loglog for r in records])
    e = e[np.isfinite(e)]
    zs = [0.0, 1.0, 2.0, 3.0]
    return {
        "count": len(records),
        "p_min": records[0].p,
        "p_max": records[-1].p,
        "height_min": min(r.height for r in records),
        "height_max": max(r.height for r in records),
        "error_loglog_quantiles": {
            str(q): float(np.quantile(e, q)) for q in (0.05, 0.25, 0.5, 0.75, 0.95)
        },
        "exceedance": {str(z): float(np.mean(e >= z)) for z in zs},
    }
