"""Randomly sampled displacement paths of fixed generation and weight.

A node of generation n with excess weight k has a weight trajectory
0 < h_1 < ... < h_n = n+k and a displacement path W_1 < ... < W_n whose
increments, given the weights, are independent Gamma(h_i - h_{i-1})
variables.  Equivalently: drop n+k iid Exponential(1) spacings, take their
cumulative sums, and read off positions h_1, ..., h_n -- which is how
`sample_walk` generates paths (grouped exponential sums are exact for every
integer shape).

The module also implements the chord events used to classify paths:

  leading   L_a : W_i >= (i/n) W_n - a for all i <= n
  trailing  R_a : W_i <= (i/n) W_n + a for all i <= n
  dip       B_a : some m in [a^40, n - a^40] has
                  W_m <= (m/n) W_n + min(m, n-m)^(1/40)
  heavy     D_a : some j has h_j > 3 a j or h_n - h_j > 3 a (n-j)

together with the cyclic-rotation construction under which exactly one of
the n rotations of a path is leading (and exactly one trailing), and Monte
Carlo estimation of conditional event probabilities given the endpoint.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
import math

import numpy as np

from .rng import RngStream

__all__ = [
    "WalkSample",
    "EventParams",
    "EventFlags",
    "sample_h",
    "sample_walk",
    "sample_h_bulk",
    "sample_walk_bulk",
    "condition_on_endpoint",
    "event_flags",
    "rotations",
    "estimate_event_prob",
    "EventProbEstimate",
]


@dataclass(frozen=True)
class WalkSample:
    """Weight trajectory h and displacement path w of one sampled node."""

    n: int
    k: int
    h: tuple[int, ...]
    w: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.h) != self.n or len(self.w) != self.n:
            raise ValueError("h and w must have length n")
        if self.h[-1] != self.n + self.k:
            raise ValueError(f"h_n = {self.h[-1]} must equal n + k = "
                             f"{self.n + self.k}")


@dataclass(frozen=True)
class EventParams:
    """Slack a plus the (parametrized) exponents of the B and D events.

    The defaults are the canonical values; they are exposed only to allow
    sensitivity experiments.
    """

    a: float
    window_exponent: float = 40.0   # B window is [a^40, n - a^40]
    margin_exponent: float = 1.0 / 40.0
    weight_factor: float = 3.0      # D threshold is 3 a j

    def __post_init__(self) -> None:
        if self.a < 0:
            raise ValueError(f"slack a must be >= 0, got {self.a}")


@dataclass(frozen=True)
class EventFlags:
    leading: bool    # L_a
    trailing: bool   # R_a
    dip: bool        # B_a
    heavy: bool      # D_a


def sample_h(n: int, k: int, rng: RngStream) -> tuple[int, ...]:
    """Uniform weight trajectory: 0 < h_1 < ... < h_n = n + k.

    Realized by Floyd's algorithm for a uniform (n-1)-subset of
    {1, ..., n+k-1}, plus the forced last element.
    """
    if n < 1 or k < 0:
        raise ValueError(f"need n >= 1 and k >= 0, got n={n}, k={k}")
    pool = n + k - 1
    chosen: set[int] = set()
    for j in range(pool - (n - 1) + 1, pool + 1):
        t = 1 + rng.integer(j)
        chosen.add(t if t not in chosen else j)
    return tuple(sorted(chosen)) + (n + k,)


def sample_walk(n: int, k: int, rng: RngStream) -> WalkSample:
    """One draw from the sampled-path law at generation n, excess weight k."""
    h = sample_h(n, k, rng)
    total = 0.0
    w = []
    prev = 0
    for hi in h:
        for _ in range(hi - prev):
            total += rng.exponential()
        w.append(total)
        prev = hi
    return WalkSample(n, k, h, tuple(w))


def sample_h_bulk(n: int, k: int, reps: int, rng: RngStream) -> np.ndarray:
    """reps x n matrix of uniform weight trajectories (bulk sampler)."""
    if n < 1 or k < 0:
        raise ValueError(f"need n >= 1 and k >= 0, got n={n}, k={k}")
    gen = rng.numpy_generator()
    if k == 0:
        return np.tile(np.arange(1, n + 1, dtype=np.int64), (reps, 1))
    # uniform (n-1)-subset of {1..n+k-1} via random keys
    keys = gen.random((reps, n + k - 1))
    idx = np.argpartition(keys, n - 1, axis=1)[:, : n - 1]
    h = np.sort(idx + 1, axis=1)
    return np.hstack([h, np.full((reps, 1), n + k, dtype=np.int64)])


def sample_walk_bulk(n: int, k: int, reps: int, rng: RngStream):
    """Bulk path sampling: returns (h[reps, n], w[reps, n]).

    Paths are grouped cumulative sums of n+k iid Exponential(1) spacings,
    evaluated at the weight trajectory.
    """
    h = sample_h_bulk(n, k, reps, rng)
    gen = rng.numpy_generator()
    spacings = gen.exponential(size=(reps, n + k))
    cum = np.cumsum(spacings, axis=1)
    w = np.take_along_axis(cum, h - 1, axis=1)
    return h, w


def condition_on_endpoint(walk: WalkSample, endpoint: float) -> WalkSample:
    """Rescale the path so W_n = endpoint.

    Because the ratios W_i / W_n are independent of W_n, the rescaled path
    has the conditional law of the sampled path given its endpoint.
    """
    if endpoint <= 0:
        raise ValueError(f"endpoint must be positive, got {endpoint}")
    scale = endpoint / walk.w[-1]
    return replace(walk, w=tuple(x * scale for x in walk.w))


def event_flags(walk: WalkSample, params: EventParams) -> EventFlags:
    """Evaluate the four chord events, inequalities non-strict as stated."""
    n = walk.n
    a = params.a
    wn = walk.w[-1]
    leading = all(walk.w[i - 1] >= (i / n) * wn - a for i in range(1, n + 1))
    trailing = all(walk.w[i - 1] <= (i / n) * wn + a for i in range(1, n + 1))

    dip = False
    lo = a ** params.window_exponent
    hi = n - lo
    m = max(1, math.ceil(lo))
    while m <= min(n, math.floor(hi)):
        margin = min(m, n - m) ** params.margin_exponent
        if walk.w[m - 1] <= (m / n) * wn + margin:
            dip = True
            break
        m += 1

    c = params.weight_factor * a
    hn = walk.h[-1]
    heavy = any(walk.h[j - 1] > c * j or hn - walk.h[j - 1] > c * (n - j)
                for j in range(1, n + 1))
    return EventFlags(leading, trailing, dip, heavy)


def rotations(walk: WalkSample) -> list[WalkSample]:
    """The n cyclic shifts of the path (shift 0 is the identity).

    Shift l maps position j to W_{j+l} - W_l with wraparound
    W_{n+l} = W_n + W_l; every shift shares the endpoint W_n, and exactly
    one shift is leading (resp. trailing), almost surely.
    """
    n = walk.n
    w_ext = list(walk.w) + [walk.w[-1] + x for x in walk.w[:-1]]
    h_ext = list(walk.h) + [walk.h[-1] + x for x in walk.h[:-1]]
    out = []
    for l in range(n):
        base_w = 0.0 if l == 0 else walk.w[l - 1]
        base_h = 0 if l == 0 else walk.h[l - 1]
        w = tuple(w_ext[j + l - 1] - base_w for j in range(1, n + 1))
        h = tuple(h_ext[j + l - 1] - base_h for j in range(1, n + 1))
        out.append(WalkSample(walk.n, walk.k, h, w))
    return out


@dataclass(frozen=True)
class EventProbEstimate:
    """Monte Carlo estimate of a conditional event probability."""

    probability: float
    standard_error: float
    wilson_low: float
    wilson_high: float
    hits: int
    replicates: int


def wilson_interval(hits: int, trials: int, z: float = 1.96):
    """Wilson score interval; preferable to the normal interval for small
    probabilities."""
    if trials == 0:
        return 0.0, 1.0
    p = hits / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def estimate_event_prob(n: int, k: int, endpoint: float, params: EventParams,
                        event, replicates: int,
                        rng: RngStream) -> EventProbEstimate:
    """P(event | W_n = endpoint) under the sampled-path law, by Monte Carlo.

    `event` is a callable EventFlags -> bool (any boolean combination of the
    four flags).  Sampling is bulk; the endpoint conditioning is the exact
    rescaling of `condition_on_endpoint`.
    """
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    h, w = sample_walk_bulk(n, k, replicates, rng)
    scale = endpoint / w[:, -1]
    w = w * scale[:, None]
    hits = 0
    for r in range(replicates):
        walk = WalkSample(n, k, tuple(int(x) for x in h[r]),
                          tuple(float(x) for x in w[r]))
        if event(event_flags(walk, params)):
            hits += 1
    p = hits / replicates
    se = math.sqrt(max(p * (1 - p), 1e-300) / replicates)
    lo, hi = wilson_interval(hits, replicates)
    return EventProbEstimate(p, se, lo, hi, hits, replicates)
