"""Random recursive trees, grown directly or extracted from the sampled
branching random walk.

In a random recursive tree on m nodes, node i+1 attaches to a uniformly
random node of {1, ..., i}.  The same tree arises from the exponential-step
walk: ranking nodes by total displacement and taking the subtree induced by
the m lowest gives a random recursive tree (after relabeling by rank), with
the m-th lowest displacement distributed as the maximum of m-1 iid
Exponential(1) variables: mean har(m-1), upper tail <= e^{-x}, lower tail
<= exp(-e^{x-1}) at offset x.  Heights grow like e log m - (3/2) log log m.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .analytics import har
from .engine import lowest_m
from .rng import RngStream
from .stats import StatSummary

__all__ = [
    "RecursiveTree",
    "build_rrt",
    "rrt_from_pwit",
    "height_centering",
    "height_tail",
    "lowest_upper_tail_bound",
    "lowest_lower_tail_bound",
]


@dataclass
class RecursiveTree:
    """Increasing tree on {1..m}: parent(i) < i, node 1 is the root.

    `parents[i]` is the parent of node i+2 (node 1 has no entry), so a
    single-node tree has an empty parent vector.
    """

    parents: tuple[int, ...]

    def __post_init__(self) -> None:
        for i, p in enumerate(self.parents):
            if not 1 <= p <= i + 1:
                raise ValueError(f"parent of node {i + 2} is {p}, "
                                 f"must lie in [1, {i + 1}]")

    @property
    def size(self) -> int:
        return len(self.parents) + 1

    def depths(self) -> np.ndarray:
        """Depth of every node; depth[0] is the root's (0)."""
        d = np.zeros(self.size, dtype=np.int64)
        for i, p in enumerate(self.parents):
            d[i + 1] = d[p - 1] + 1
        return d

    @property
    def height(self) -> int:
        return int(self.depths().max()) if self.size > 1 else 0


def build_rrt(m: int, rng: RngStream) -> RecursiveTree:
    """Grow a random recursive tree on m nodes.

    The attachment of node i consumes the stream's draw of counter i, which
    is what the compiled height kernel replays.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    parents = []
    for i in range(2, m + 1):
        u = rng.uniform_at(i)
        parents.append(min(1 + int(u * (i - 1)), i - 1))
    return RecursiveTree(tuple(parents))


def rrt_from_pwit(m: int, rng: RngStream, *, model: str = "pwit",
                  return_displacements: bool = False):
    """The subtree induced by the m lowest-displacement walk nodes, relabeled
    by displacement rank.

    Displacement is strictly increasing along root paths, so the m lowest
    nodes are closed under taking parents and the ranks satisfy
    parent rank < child rank.
    """
    nodes = lowest_m(m, model, rng)
    rank = {node.id: r + 1 for r, node in enumerate(nodes)}
    parents = tuple(rank[node.parent_id] for node in nodes[1:])
    tree = RecursiveTree(parents)
    if return_displacements:
        return tree, tuple(node.displacement for node in nodes)
    return tree


def height_centering(m: int) -> float:
    """The growth-law centering e log m - (3/2) log log m (valid for m >= 2)."""
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m}")
    return math.e * math.log(m) - 1.5 * math.log(math.log(m))


def lowest_upper_tail_bound(x: float) -> float:
    """Bound on P(max of iid Exponential(1) >= mean + x): e^{-x}."""
    return math.exp(-x)


def lowest_lower_tail_bound(x: float) -> float:
    """Bound on P(max of iid Exponential(1) <= mean - x): exp(-e^{x-1})."""
    return math.exp(-math.exp(x - 1.0))


def height_tail(m: int, ks, replicates: int, rng: RngStream,
                *, heights: np.ndarray | None = None):
    """MC tail of |H_m - mean|: per-k exceedance frequencies plus a fitted
    log-linear decay rate over the usable part of the grid.

    Returns (summary: StatSummary of heights, table: {k: frequency},
    rate or nan).  Pass precomputed heights to reuse a batch.
    """
    from .fastbrw import rrt_height_batch
    from .stats import wls_line

    if heights is None:
        keys = np.array([rng.child(i).key for i in range(replicates)],
                        dtype=np.uint64)
        heights = rrt_height_batch(m, keys)
    summary = StatSummary(hist_lo=0.0, hist_width=1.0, hist_bins=4 * m)
    summary.add_many(heights)
    mean = summary.mean
    table = {}
    for k in ks:
        if k < 0:
            raise ValueError(f"offsets must be >= 0, got {k}")
        table[k] = float(np.mean(np.abs(heights - mean) >= k))
    usable = [(k, p) for k, p in table.items()
              if p > 0 and p * len(heights) >= 30 and k > 0]
    rate = math.nan
    if len(usable) >= 3:
        xs = np.array([k for k, _ in usable], dtype=np.float64)
        ys = np.log([p for _, p in usable])
        ws = np.array([table[k] * len(heights) for k, _ in usable])
        rate = -wls_line(xs, ys, ws).slope
    return summary, table, rate
