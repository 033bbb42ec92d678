"""Compiled replicate kernels for the heavy Monte Carlo experiments.

These numba kernels re-implement the keyed splitmix64 stream derivation from
`rng` bit-for-bit, so a kernel run with a replicate's root key walks the
*same* sampled tree as the pure-Python engine on the matching `RngStream`
(verified in the test suite).  They exist because the sweep experiments
need 1e10-1e12 child visits, far beyond interpreter speed.

The minimal-displacement kernel is an iterative depth-first search with
branch-and-bound pruning at the current best, re-run with an escalated
budget when generation n was not reached (the keyed streams make re-runs
revisit the identical tree, so escalation is sound).  Per-frame state is a
handful of scalars, so memory is O(depth).
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .rng import hash_label, stream_key
from .samplers import PD, PWIT

__all__ = [
    "replicate_keys",
    "min_displacement_batch",
    "census_batch",
    "rrt_height_batch",
]

_U64 = np.uint64
_PHI = _U64(0x9E3779B97F4A7C15)
_DRAW_SALT = _U64(0xD1B54A32D192ED03)
_CHILD_SALT = _U64(0x8BB84B93962EACC9)
_M1 = _U64(0xBF58476D1CE4E5B9)
_M2 = _U64(0x94D049BB133111EB)
_S30 = _U64(30)
_S27 = _U64(27)
_S31 = _U64(31)
_S12 = _U64(12)
_HALF = 0.5
_INV52 = 2.0 ** -52


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True, inline="always")
def _draw_u(key, ctr):
    x = _mix64((key ^ _DRAW_SALT) + ctr * _PHI)
    return (np.float64(x >> _S12) + _HALF) * _INV52


@njit(cache=True, inline="always")
def _child_key(key, idx):
    return _mix64((key ^ _CHILD_SALT) + idx * _PHI)


@njit(cache=True)
def _min_disp_pass_pwit(root_key, n, budget):
    """One bounded DFS pass; returns (min at depth n or inf, child visits)."""
    keys = np.empty(n, dtype=np.uint64)
    totals = np.empty(n, dtype=np.float64)
    cursors = np.empty(n, dtype=np.float64)
    indices = np.empty(n, dtype=np.uint64)
    keys[0] = root_key
    totals[0] = 0.0
    cursors[0] = 0.0
    indices[0] = _U64(1)
    d = 0
    best = np.inf
    visits = 0
    while d >= 0:
        i = indices[d]
        x = cursors[d] - math.log(_draw_u(keys[d], i))
        visits += 1
        limit = budget if budget < best else best
        if totals[d] + x > limit:
            d -= 1  # siblings are increasing: subtree exhausted
            continue
        cursors[d] = x
        indices[d] = i + _U64(1)
        s_child = totals[d] + x
        if d + 1 == n:
            if s_child < best:
                best = s_child
            continue
        ck = _child_key(keys[d], i)
        d += 1
        keys[d] = ck
        totals[d] = s_child
        cursors[d] = 0.0
        indices[d] = _U64(1)
    return best, visits


@njit(cache=True)
def _min_disp_pass_pd(root_key, n, budget):
    keys = np.empty(n, dtype=np.uint64)
    totals = np.empty(n, dtype=np.float64)
    envelopes = np.empty(n, dtype=np.float64)
    indices = np.empty(n, dtype=np.uint64)
    keys[0] = root_key
    totals[0] = 0.0
    envelopes[0] = 0.0
    indices[0] = _U64(1)
    d = 0
    best = np.inf
    visits = 0
    while d >= 0:
        limit = budget if budget < best else best
        if totals[d] + envelopes[d] > limit:
            d -= 1  # envelope is non-decreasing: no later child can fit
            continue
        k = indices[d]
        u = _draw_u(keys[d], k)
        x = envelopes[d] - math.log(u)
        envelopes[d] = envelopes[d] - math.log1p(-u)
        indices[d] = k + _U64(1)
        visits += 1
        s_child = totals[d] + x
        if s_child > limit:
            continue  # skipped child; envelope keeps advancing
        if d + 1 == n:
            if s_child < best:
                best = s_child
            continue
        ck = _child_key(keys[d], k)
        d += 1
        keys[d] = ck
        totals[d] = s_child
        envelopes[d] = 0.0
        indices[d] = _U64(1)
    return best, visits


@njit(cache=True)
def _min_disp_batch(root_keys, n, is_pd, b0, step, cap):
    reps = root_keys.shape[0]
    out = np.empty(reps, dtype=np.float64)
    visits = np.zeros(reps, dtype=np.int64)
    for r in range(reps):
        budget = b0
        best = np.inf
        while True:
            if is_pd:
                best, v = _min_disp_pass_pd(root_keys[r], n, budget)
            else:
                best, v = _min_disp_pass_pwit(root_keys[r], n, budget)
            visits[r] += v
            if best < np.inf:
                break
            budget += step
            if budget > cap:
                best = np.inf  # censored: minimum exceeds cap
                break
        out[r] = best
    return out, visits


@njit(cache=True)
def _census_pass(root_key, n, x, is_pd, level_counts, k_counts, k_max):
    """Exhaustive bounded DFS; accumulates per-level counts and, at depth n,
    a histogram over excess weight k (last bucket catches overflow)."""
    keys = np.empty(n + 1, dtype=np.uint64)
    totals = np.empty(n + 1, dtype=np.float64)
    cursors = np.empty(n + 1, dtype=np.float64)
    indices = np.empty(n + 1, dtype=np.uint64)
    weights = np.empty(n + 1, dtype=np.int64)
    level_counts[0] += 1
    if n == 0:
        return 0
    keys[0] = root_key
    totals[0] = 0.0
    cursors[0] = 0.0
    indices[0] = _U64(1)
    weights[0] = 0
    d = 0
    visits = 0
    while d >= 0:
        i = indices[d]
        if is_pd:
            if totals[d] + cursors[d] > x:
                d -= 1
                continue
            u = _draw_u(keys[d], i)
            disp = cursors[d] - math.log(u)
            cursors[d] = cursors[d] - math.log1p(-u)
            indices[d] = i + _U64(1)
            visits += 1
            s_child = totals[d] + disp
            if s_child > x:
                continue
        else:
            disp = cursors[d] - math.log(_draw_u(keys[d], i))
            visits += 1
            s_child = totals[d] + disp
            if s_child > x:
                d -= 1
                continue
            cursors[d] = disp
            indices[d] = i + _U64(1)
        w_child = weights[d] + np.int64(i)
        level_counts[d + 1] += 1
        if d + 1 == n:
            k = w_child - np.int64(n)
            if k > k_max:
                k = k_max
            k_counts[k] += 1
            continue
        ck = _child_key(keys[d], i)
        d += 1
        keys[d] = ck
        totals[d] = s_child
        cursors[d] = 0.0
        indices[d] = _U64(1)
        weights[d] = w_child
    return visits


@njit(cache=True)
def _census_batch(root_keys, n, x, is_pd, k_max):
    reps = root_keys.shape[0]
    levels = np.zeros((reps, n + 1), dtype=np.int64)
    khist = np.zeros((reps, k_max + 1), dtype=np.int64)
    for r in range(reps):
        _census_pass(root_keys[r], n, x, is_pd, levels[r], khist[r], k_max)
    return levels, khist


@njit(cache=True)
def _rrt_height_batch(root_keys, m):
    reps = root_keys.shape[0]
    heights = np.empty(reps, dtype=np.int64)
    depth = np.empty(m + 1, dtype=np.int64)
    for r in range(reps):
        key = root_keys[r]
        depth[1] = 0
        h = 0
        for i in range(2, m + 1):
            u = _draw_u(key, _U64(i))
            p = 1 + np.int64(u * (i - 1))
            if p > i - 1:
                p = i - 1
            depth[i] = depth[p] + 1
            if depth[i] > h:
                h = depth[i]
        heights[r] = h
    return heights


def replicate_keys(master_seed: int, experiment: str, replicates: int,
                   start: int = 0) -> np.ndarray:
    """Root stream keys for a block of replicates of one experiment.

    Matches RngStream(master_seed, hash_label(experiment, index)).key, so a
    kernel replicate and a Python-engine replicate with the same index see
    the same tree.
    """
    keys = np.empty(replicates, dtype=np.uint64)
    for i in range(replicates):
        keys[i] = stream_key(master_seed, hash_label(experiment, start + i))
    return keys


def min_displacement_batch(n: int, model: str, root_keys: np.ndarray, *,
                           initial_budget: float | None = None,
                           step: float = 1.0,
                           budget_cap: float | None = None):
    """Exact M_n per replicate; +inf marks replicates censored at budget_cap.

    Returns (values, child_visit_counts).
    """
    from .analytics import m_n

    if model not in (PWIT, PD):
        raise ValueError(f"unknown model {model!r}")
    b0 = m_n(n) - 1.0 if initial_budget is None else initial_budget
    cap = (m_n(n) + 12.0) if budget_cap is None else budget_cap
    return _min_disp_batch(np.asarray(root_keys, dtype=np.uint64), n,
                           model == PD, b0, step, cap)


def census_batch(n: int, x: float, model: str, root_keys: np.ndarray,
                 k_max: int = 64):
    """Per-replicate level counts |T_j(x)| for j <= n, plus the histogram of
    excess weight k over depth-n nodes (last bucket aggregates k >= k_max).

    Returns (levels[reps, n+1], k_hist[reps, k_max+1]).
    """
    if model not in (PWIT, PD):
        raise ValueError(f"unknown model {model!r}")
    return _census_batch(np.asarray(root_keys, dtype=np.uint64), n, x,
                         model == PD, k_max)


def rrt_height_batch(m: int, root_keys: np.ndarray) -> np.ndarray:
    """Heights of directly-grown random recursive trees, one per replicate.

    Uses draw counter i for the attachment of node i, matching
    trees.build_rrt on the same stream.
    """
    return _rrt_height_batch(np.asarray(root_keys, dtype=np.uint64), m)
