"""Closed-form level densities, counts and tail bounds for exponential-step
branching random walks.

Everything here is a pure function.  Magnitudes that underflow in linear
scale for deep generations (densities, counts, x^n/n!) are carried in
natural-log scale via `LogValue`; conversion to linear scale is always
explicit and guarded.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

__all__ = [
    "LogValue",
    "LevelClass",
    "gamma_density",
    "count_tnk",
    "count_tnk_exact",
    "f_nk",
    "f_nk_stirling",
    "expected_tn",
    "poisson_tail",
    "poisson_partial_sum",
    "concentration_ratio",
    "m_n",
    "har",
    "d_of_m",
    "adaptive_simpson",
    "f_nk_integral",
    "gamma_density_integral",
]

E = math.e
_LINEAR_GUARD = 700.0  # exp() overflows shortly above this


@dataclass(frozen=True)
class LogValue:
    """A non-negative magnitude stored as its natural logarithm.

    log_magnitude = -inf encodes an exact zero.  Conversion to linear scale
    never happens implicitly; `linear()` raises if the exponent would
    overflow or fully underflow a float64.
    """

    log_magnitude: float

    def linear(self) -> float:
        lm = self.log_magnitude
        if lm == -math.inf:
            return 0.0
        if abs(lm) > _LINEAR_GUARD:
            raise OverflowError(
                f"|log magnitude| = {abs(lm):.1f} > {_LINEAR_GUARD}; "
                "value not representable in linear scale")
        return math.exp(lm)

    def __mul__(self, other: "LogValue") -> "LogValue":
        return LogValue(self.log_magnitude + other.log_magnitude)

    def __truediv__(self, other: "LogValue") -> "LogValue":
        return LogValue(self.log_magnitude - other.log_magnitude)

    def __add__(self, other: "LogValue") -> "LogValue":
        return LogValue(np.logaddexp(self.log_magnitude, other.log_magnitude))


@dataclass(frozen=True)
class LevelClass:
    """Generation n and excess weight k: the nodes v at depth n with
    weight(v) = n + k."""

    n: int
    k: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"generation n must be >= 1, got {self.n}")
        if self.k < 0:
            raise ValueError(f"excess weight k must be >= 0, got {self.k}")


def gamma_density(h: int, x: float) -> LogValue:
    """Density of a Gamma(h) displacement: x^(h-1) e^(-x) / (h-1)!.

    This is the density of the path sum of a node of weight h.
    """
    if h < 1:
        raise ValueError(f"weight h must be >= 1, got {h}")
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x}")
    if x == 0.0:
        return LogValue(0.0 if h == 1 else -math.inf)
    return LogValue((h - 1) * math.log(x) - x - math.lgamma(h))


def count_tnk(c: LevelClass) -> LogValue:
    """log of the number of depth-n nodes with excess weight k,
    binomial(n+k-1, k)."""
    n, k = c.n, c.k
    return LogValue(math.lgamma(n + k) - math.lgamma(k + 1) - math.lgamma(n))


def count_tnk_exact(c: LevelClass) -> int:
    """Exact big-integer count; restricted to n + k <= 64."""
    if c.n + c.k > 64:
        raise ValueError("exact count limited to n + k <= 64; use count_tnk")
    return math.comb(c.n + c.k - 1, c.k)


def f_nk(c: LevelClass, x: float) -> LogValue:
    """Aggregate displacement density of the (n, k) level class:
    x^(n+k-1) e^(-x) / (k! (n-1)!).

    Equals count_tnk(c) * gamma_density(n+k, x); the identity is asserted
    in the test suite.
    """
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x}")
    n, k = c.n, c.k
    if x == 0.0:
        return LogValue(0.0 if n + k == 1 else -math.inf)
    return LogValue((n + k - 1) * math.log(x) - x
                    - math.lgamma(k + 1) - math.lgamma(n))


def f_nk_stirling(c: LevelClass, x: float) -> LogValue:
    """Stirling-regime approximation of f_nk near k ~ x ~ n/e.

    Writes k = (n+r)/e and x = (n+y)/e and evaluates

        (1/(n+y)) sqrt(n/(n+r)) e^((r-y)/e) (1-(r-y)/(n+r))^((n+r)/e)
            (1+y/n)^n e^(3/2) / (2 pi)

    with the 1 + O(1/n + 1/k) correction factor set to 1.  Accuracy is
    checked against the exact f_nk in tests; intended for k >= 1, x > 0.
    """
    n, k = c.n, c.k
    if k == 0:
        raise ValueError("Stirling form requires k >= 1")
    if x <= 0:
        raise ValueError("Stirling form requires x > 0")
    if n < 2:
        raise ValueError("Stirling form requires n >= 2")
    r = E * k - n
    y = E * x - n
    # 1 - (r-y)/(n+r) = (n+y)/(n+r) > 0 because n + y = e x > 0
    log_val = (
        -math.log(n + y)
        + 0.5 * (math.log(n) - math.log(n + r))
        + (r - y) / E
        + ((n + r) / E) * math.log((n + y) / (n + r))
        + n * math.log1p(y / n)
        + 1.5
        - math.log(2.0 * math.pi)
    )
    return LogValue(log_val)


def expected_tn(n: int, x: float) -> LogValue:
    """Expected number of depth-n nodes with displacement <= x: x^n / n!."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x}")
    if x == 0.0:
        return LogValue(-math.inf)
    return LogValue(n * math.log(x) - math.lgamma(n + 1))


def poisson_tail(z: float, side: str, factor: float) -> LogValue:
    """Upper bound on an unnormalized Poisson tail sum.

    For 0 < alpha <= 1:  sum_{k <= alpha z} z^k/k!  <  (e/alpha)^(alpha z);
    for beta >= 1:       sum_{k >= beta z} z^k/k!   <  (e/beta)^(beta z).

    `side` selects 'lower' (factor = alpha) or 'upper' (factor = beta);
    the returned LogValue is the bound itself.
    """
    if z <= 0:
        raise ValueError(f"z must be positive, got {z}")
    if side == "lower":
        if not 0 < factor <= 1:
            raise ValueError(f"lower tail needs 0 < alpha <= 1, got {factor}")
    elif side == "upper":
        if factor < 1:
            raise ValueError(f"upper tail needs beta >= 1, got {factor}")
    else:
        raise ValueError(f"side must be 'lower' or 'upper', got {side!r}")
    return LogValue(factor * z * (1.0 - math.log(factor)))


def poisson_partial_sum(z: float, k_lo: int, k_hi: int) -> LogValue:
    """log of sum_{k_lo <= k <= k_hi} z^k / k!  by direct stable summation."""
    if k_hi < k_lo:
        return LogValue(-math.inf)
    ks = np.arange(max(k_lo, 0), k_hi + 1, dtype=np.float64)
    if len(ks) == 0:
        return LogValue(-math.inf)
    from scipy.special import gammaln, logsumexp

    with np.errstate(divide="ignore"):
        logs = np.where(ks == 0, 0.0, ks * np.log(z)) - gammaln(ks + 1)
    return LogValue(float(logsumexp(logs)))


def concentration_ratio(n: int, x: float, t: float) -> float:
    """Ratio of sum_{|k-x| >= t sqrt(x)} f_{n,k}(x) to
    e^(-t^2/2) x^(n-1)/(n-1)!, by direct summation.

    The numerator sum over large k is truncated once the Poisson upper-tail
    bound certifies the remainder is below 1e-15 of the running total.
    """
    if x <= 0:
        raise ValueError(f"x must be positive, got {x}")
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    if t > x ** (1.0 / 6.0):
        raise ValueError(f"t = {t} exceeds x^(1/6) = {x ** (1/6):.4f}")

    half = t * math.sqrt(x)
    k_left_hi = math.floor(x - half)
    # start the right range past the left one so integer boundaries are not
    # counted twice when t = 0
    k_right_lo = max(math.ceil(x + half), k_left_hi + 1, 0)

    terms = []
    for k in range(0, k_left_hi + 1):
        terms.append(f_nk(LevelClass(n, k), x).log_magnitude)
    # right tail: sum until the remainder is certifiably negligible
    k = k_right_lo
    running_max = max(terms, default=-math.inf)
    while True:
        lv = f_nk(LevelClass(n, k), x).log_magnitude
        terms.append(lv)
        running_max = max(running_max, lv)
        # remainder beyond k is < (e z / (k+1))^(k+1)-style; use the simple
        # ratio test: once terms decay geometrically (ratio z/(k+1) < 1/2),
        # the remainder is < 2 * current term
        if k > 2 * x + 10 and lv < running_max - 40.0:
            break
        k += 1
        if k > 10 * x + 1000 + n:
            break

    from scipy.special import logsumexp

    log_num = float(logsumexp(np.array(terms)))
    log_den = (-0.5 * t * t) + (n - 1) * math.log(x) - math.lgamma(n)
    return math.exp(log_num - log_den)


def m_n(n: int) -> float:
    """Deterministic centering n/e + (3 log n)/(2e) of the level-n minimum."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return n / E + 3.0 * math.log(n) / (2.0 * E)


def har(s: int) -> float:
    """Harmonic number sum_{i=1}^s 1/i by compensated direct summation."""
    if s < 0:
        raise ValueError(f"s must be >= 0, got {s}")
    if s > 10 ** 8:
        raise ValueError("direct summation limited to s <= 1e8")
    total = 0.0
    chunk = 10 ** 6
    partials = []
    for lo in range(1, s + 1, chunk):
        hi = min(lo + chunk - 1, s)
        block = 1.0 / np.arange(lo, hi + 1, dtype=np.float64)
        partials.append(math.fsum(block.tolist()))
    return math.fsum(partials)


def d_of_m(m: int) -> int:
    """max{n : m_n(n) <= har(m-1)}, the deterministic surrogate for the
    largest generation whose typical minimum fits below har(m-1).

    Uses the m_n centering in place of the true median (which is only known
    to within an additive constant); m_n is strictly increasing in n, so a
    monotone search applies.
    """
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m}")
    target = har(m - 1)
    if m_n(1) > target:
        raise ValueError("no generation satisfies the constraint")
    lo, hi = 1, 2
    while m_n(hi) <= target:
        lo = hi
        hi *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if m_n(mid) <= target:
            lo = mid
        else:
            hi = mid
    return lo


def adaptive_simpson(f, a: float, b: float, tol: float = 1e-10,
                     max_depth: int = 50) -> float:
    """Adaptive Simpson quadrature with an absolute error target.

    Suitable for the smooth, unimodal densities in this module.
    """
    def simpson(fa, fm, fb, a_, b_):
        return (b_ - a_) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a_, b_, fa, fm, fb, whole, tol_, depth):
        m_ = 0.5 * (a_ + b_)
        lm = 0.5 * (a_ + m_)
        rm = 0.5 * (m_ + b_)
        flm = f(lm)
        frm = f(rm)
        left = simpson(fa, flm, fm, a_, m_)
        right = simpson(fm, frm, fb, m_, b_)
        if depth >= max_depth or abs(left + right - whole) <= 15.0 * tol_:
            return left + right + (left + right - whole) / 15.0
        return (recurse(a_, m_, fa, flm, fm, left, tol_ / 2.0, depth + 1)
                + recurse(m_, b_, fm, frm, fb, right, tol_ / 2.0, depth + 1))

    if b <= a:
        return 0.0
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = simpson(fa, fm, fb, a, b)
    return recurse(a, b, fa, fm, fb, whole, tol, 0)


def f_nk_integral(c: LevelClass, x: float, tol: float = 1e-10) -> float:
    """integral_0^x f_{n,k}(t) dt: expected |T_{n,k}(x)|, by quadrature."""

    def integrand(t: float) -> float:
        lv = f_nk(c, t).log_magnitude
        return 0.0 if lv == -math.inf else math.exp(lv)

    return adaptive_simpson(integrand, 0.0, x, tol)


def gamma_density_integral(h: int, x: float, tol: float = 1e-10) -> float:
    """integral_0^x gamma_h(t) dt, by the same quadrature."""

    def integrand(t: float) -> float:
        lv = gamma_density(h, t).log_magnitude
        return 0.0 if lv == -math.inf else math.exp(lv)

    return adaptive_simpson(integrand, 0.0, x, tol)
