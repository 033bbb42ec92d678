"""Mergeable streaming summaries and tail-rate fitting.

`StatSummary` accumulates count/mean/M2/min/max with Welford updates and
merges pairwise with Chan's parallel formula, so replicate blocks computed
in any order or grouping combine to the same moments.  Values themselves
are retained up to a configurable cap (enough for exact quantiles at the
scales used here) alongside a fixed-bin histogram that keeps working past
the cap.

`fit_tail_rates` estimates the exponential decay rates of the left and
right tails of an empirical distribution by weighted least squares on
log-frequencies over unit-width displacement buckets, excluding
under-populated buckets and the bucket adjacent to the center (where the
exponential regime has not set in).
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

__all__ = [
    "StatSummary",
    "TailFitResult",
    "fit_tail_rates",
    "median_ci",
    "wls_line",
    "LineFit",
]


@dataclass
class StatSummary:
    """Streaming count/mean/M2/min/max plus capped value retention.

    Histogram bins are [lo + j*width, lo + (j+1)*width) with underflow and
    overflow buckets at the ends; bin edges are fixed at construction so
    merged summaries must agree on them.
    """

    value_cap: int = 1_000_000
    hist_lo: float = 0.0
    hist_width: float = 0.5
    hist_bins: int = 200
    count: int = 0
    mean: float = 0.0
    m2: float = 0.0
    min: float = math.inf
    max: float = -math.inf
    values: list[float] = field(default_factory=list)
    values_complete: bool = True
    hist: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.hist is None:
            self.hist = np.zeros(self.hist_bins + 2, dtype=np.int64)

    def add(self, x: float) -> None:
        x = float(x)
        self.count += 1
        delta = x - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (x - self.mean)
        if x < self.min:
            self.min = x
        if x > self.max:
            self.max = x
        if len(self.values) < self.value_cap:
            self.values.append(x)
        else:
            self.values_complete = False
        self.hist[self._bin(x)] += 1

    def add_many(self, xs) -> None:
        for x in np.asarray(xs, dtype=np.float64).ravel():
            self.add(x)

    def _bin(self, x: float) -> int:
        j = math.floor((x - self.hist_lo) / self.hist_width)
        return min(max(j + 1, 0), self.hist_bins + 1)

    @property
    def variance(self) -> float:
        return self.m2 / (self.count - 1) if self.count > 1 else math.nan

    @property
    def std(self) -> float:
        v = self.variance
        return math.sqrt(v) if v == v else math.nan

    @property
    def sem(self) -> float:
        return self.std / math.sqrt(self.count) if self.count > 1 else math.nan

    def merge(self, other: "StatSummary") -> "StatSummary":
        """Combine two summaries; associative and commutative up to float
        roundoff (exercised by the property tests)."""
        if (self.hist_lo, self.hist_width, self.hist_bins) != \
                (other.hist_lo, other.hist_width, other.hist_bins):
            raise ValueError("histogram layouts differ; cannot merge")
        out = StatSummary(value_cap=min(self.value_cap, other.value_cap),
                          hist_lo=self.hist_lo, hist_width=self.hist_width,
                          hist_bins=self.hist_bins)
        n = self.count + other.count
        if n == 0:
            return out
        delta = other.mean - self.mean
        out.count = n
        out.mean = self.mean + delta * other.count / n
        out.m2 = self.m2 + other.m2 + delta * delta * self.count * other.count / n
        out.min = min(self.min, other.min)
        out.max = max(self.max, other.max)
        merged = self.values + other.values
        out.values = merged[: out.value_cap]
        out.values_complete = (self.values_complete and other.values_complete
                               and len(merged) <= out.value_cap)
        out.hist = self.hist + other.hist
        return out

    def quantile(self, q: float) -> float:
        """Exact sample quantile when all values were retained; falls back to
        histogram interpolation otherwise."""
        if not 0.0 <= q <= 1.0:
            raise ValueError(f"q must lie in [0, 1], got {q}")
        if self.count == 0:
            raise ValueError("empty summary has no quantiles")
        if self.values_complete:
            return float(np.quantile(np.array(self.values), q))
        cum = np.cumsum(self.hist)
        target = q * self.count
        j = int(np.searchsorted(cum, target))
        lo = self.hist_lo + (j - 1) * self.hist_width
        inside = self.hist[j]
        frac = (target - (cum[j] - inside)) / max(inside, 1)
        return float(lo + frac * self.hist_width)

    @property
    def median(self) -> float:
        return self.quantile(0.5)

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "mean": self.mean,
            "std": self.std,
            "min": self.min if self.count else None,
            "max": self.max if self.count else None,
            "median": self.median if self.count else None,
        }


def median_ci(sorted_values: np.ndarray, confidence: float = 0.95):
    """Distribution-free CI for the median from order statistics.

    The number of observations below the median is Binomial(n, 1/2); the
    normal approximation to its quantiles picks the order-statistic ranks.
    """
    from scipy import stats as sps

    n = len(sorted_values)
    if n < 4:
        return float(sorted_values[0]), float(sorted_values[-1])
    z = sps.norm.ppf(0.5 + confidence / 2)
    half = z * math.sqrt(n) / 2
    lo = max(int(math.floor(n / 2 - half)), 0)
    hi = min(int(math.ceil(n / 2 + half)), n - 1)
    return float(sorted_values[lo]), float(sorted_values[hi])


@dataclass(frozen=True)
class LineFit:
    """Weighted least squares line y = intercept + slope * x."""

    slope: float
    intercept: float
    slope_se: float
    intercept_se: float

    def slope_ci(self, z: float = 1.96):
        return self.slope - z * self.slope_se, self.slope + z * self.slope_se


def wls_line(x, y, weights) -> LineFit:
    """Weighted least squares fit with standard errors from the weighted
    normal equations (weights = 1/variance of each y)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    if len(x) < 3:
        raise ValueError(f"need >= 3 points for a slope CI, got {len(x)}")
    sw = w.sum()
    xbar = (w * x).sum() / sw
    ybar = (w * y).sum() / sw
    sxx = (w * (x - xbar) ** 2).sum()
    slope = (w * (x - xbar) * (y - ybar)).sum() / sxx
    intercept = ybar - slope * xbar
    # dispersion from weighted residuals; guards against misstated weights
    resid = y - intercept - slope * x
    dof = len(x) - 2
    scale = (w * resid ** 2).sum() / dof
    slope_se = math.sqrt(scale / sxx)
    intercept_se = math.sqrt(scale * (1.0 / sw + xbar ** 2 / sxx))
    return LineFit(slope, intercept, slope_se, intercept_se)


@dataclass(frozen=True)
class TailFitResult:
    """Exponential tail-rate estimates around a center value."""

    center: float
    left_rate: float
    left_rate_se: float
    right_rate: float
    right_rate_se: float
    left_buckets: int
    right_buckets: int


def fit_tail_rates(values: np.ndarray, *, center: float | None = None,
                   bucket_widths=(0.25, 0.5, 1.0), min_bucket: int = 30,
                   skip_adjacent: int = 1) -> TailFitResult:
    """Fit log P(bucket) ~ -rate * distance on each side of the center.

    Buckets with fewer than min_bucket hits are dropped, as are the
    skip_adjacent buckets nearest the center.  Weights are the bucket counts
    (the delta-method variance of a log count is 1/count).  Per side, the
    finest bucket width yielding at least 4 usable buckets is used (thin
    tails need fine buckets, steep ones coarse).
    """
    values = np.asarray(values, dtype=np.float64)
    values = values[np.isfinite(values)]
    if len(values) < 10 * min_bucket:
        raise ValueError(f"too few values ({len(values)}) for a tail fit")
    if center is None:
        center = float(np.median(values))

    def side_buckets(side: int, width: float):
        # side = -1: left tail (values below center), +1: right tail
        d = side * (values - center)
        d = d[d > 0]
        nb = int(math.floor(d.max() / width)) + 1
        counts, _ = np.histogram(d, bins=nb, range=(0.0, nb * width))
        mids = (np.arange(nb) + 0.5) * width
        keep = (counts >= min_bucket) & (np.arange(nb) >= skip_adjacent)
        return counts, mids, keep

    def one_side(side: int) -> tuple[float, float, int]:
        chosen = None
        for width in bucket_widths:
            counts, mids, keep = side_buckets(side, width)
            if keep.sum() >= 4:
                chosen = (counts, mids, keep)
                break
            if chosen is None or keep.sum() > chosen[2].sum():
                chosen = (counts, mids, keep)
        counts, mids, keep = chosen
        if keep.sum() < 3:
            raise ValueError("fewer than 3 usable tail buckets; need more "
                             "replicates or a wider bucket")
        c = counts[keep].astype(np.float64)
        fit = wls_line(mids[keep], np.log(c / len(values)), c)
        return -fit.slope, fit.slope_se, int(keep.sum())

    lr, lse, lb = one_side(-1)
    rr, rse, rb = one_side(+1)
    return TailFitResult(center, lr, lse, rr, rse, lb, rb)
