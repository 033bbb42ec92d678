"""Exact minimal displacements and level censuses on a sampled branching
random walk.

The tree is infinite-branching, so nothing can be materialized up front.
Instead:

* `min_displacement` runs a budgeted uniform-cost (best-first) search.
  Edge displacements are strictly positive, so the first depth-n node popped
  from the min-heap attains the exact minimum M_n -- provided every node with
  total displacement below the current budget has been generated, which the
  samplers' envelope-complete generation guarantees.  If the heap drains
  before a depth-n pop, the budget is escalated and each already-expanded
  node contributes only its not-yet-emitted children (sound because child
  generation is a pure function of the node's keyed stream).

* `census` exhaustively enumerates all nodes with displacement <= x up to a
  given depth by bounded depth-first search.

* `lowest_m` is the same best-first search without a depth stop: the pops
  are the m globally lowest-displacement nodes in increasing order, starting
  with the root at displacement 0.

Node randomness is keyed by the node's path from the root, so any two
traversals of the same stream explore the identical sampled tree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import heapq
import math

from .analytics import m_n
from .rng import RngStream, child_key
from .samplers import MODELS, DisplacementStream

__all__ = [
    "BrwNode",
    "SearchResult",
    "CensusTable",
    "WorkLimitExceeded",
    "min_displacement",
    "census",
    "lowest_m",
    "DEFAULT_DEPTH_CAP",
]

DEFAULT_DEPTH_CAP = 50
_DEFAULT_SLACK = 2.0


class WorkLimitExceeded(RuntimeError):
    """Raised when a search would exceed its configured work budget."""


@dataclass
class BrwNode:
    """An explored node: generation, weight h(v), total displacement S(v)."""

    id: int
    parent_id: int | None
    depth: int
    weight: int
    displacement: float
    child_index: int  # index under its parent; 0 for the root
    stream: DisplacementStream = field(repr=False)

    def __post_init__(self) -> None:
        if not math.isfinite(self.displacement):
            raise ValueError(f"non-finite displacement {self.displacement}; "
                             "sampler fault")


@dataclass(frozen=True)
class SearchResult:
    """Outcome of a minimal-displacement search at a fixed depth."""

    value: float
    argmin_path: tuple[int, ...]
    nodes_expanded: int
    budget_used: float


@dataclass
class CensusTable:
    """Counts of nodes with displacement <= x, by level (and optionally by
    excess weight k at each level)."""

    x: float
    per_level: dict[int, int]
    per_level_k: dict[tuple[int, int], int] | None = None

    def level(self, j: int) -> int:
        return self.per_level.get(j, 0)


class _Search:
    """Shared machinery: keyed node construction plus budget escalation."""

    def __init__(self, model: str, rng: RngStream):
        if model not in MODELS:
            raise ValueError(f"unknown model {model!r}")
        self.model = model
        self.root_key = rng.key
        self.next_id = 0
        self.heap: list[tuple[float, int, int]] = []  # (S, -depth, id)
        self.nodes: dict[int, BrwNode] = {}
        self.expanded: list[BrwNode] = []
        self.pops = 0
        self.last_pop = -math.inf

    def make_root(self) -> BrwNode:
        root = BrwNode(self._take_id(), None, 0, 0, 0.0, 0,
                       DisplacementStream(self.model, self.root_key))
        self.nodes[root.id] = root
        return root

    def make_child(self, parent: BrwNode, index: int, x: float) -> BrwNode:
        key = child_key(parent.stream.node_key, index)
        node = BrwNode(self._take_id(), parent.id, parent.depth + 1,
                       parent.weight + index, parent.displacement + x, index,
                       DisplacementStream(self.model, key))
        self.nodes[node.id] = node
        return node

    def _take_id(self) -> int:
        self.next_id += 1
        return self.next_id

    def push(self, node: BrwNode) -> None:
        heapq.heappush(self.heap, (node.displacement, -node.depth, node.id))

    def pop(self) -> BrwNode:
        s, _, nid = heapq.heappop(self.heap)
        assert s >= self.last_pop, "pop order must be non-decreasing"
        self.last_pop = s
        self.pops += 1
        return self.nodes[nid]

    def expand(self, node: BrwNode, budget: float) -> None:
        """Generate node's children with total displacement <= budget."""
        slack = budget - node.displacement
        if slack <= 0.0:
            return
        for c in node.stream.children_within(slack):
            self.push(self.make_child(node, c.index, c.displacement))

    def escalate(self, old_budget: float, new_budget: float) -> None:
        """Raise the budget: emit only the children newly inside it."""
        for node in self.expanded:
            self.expand(node, new_budget)

    def path_to(self, node: BrwNode) -> tuple[int, ...]:
        path = []
        cur: BrwNode | None = node
        while cur is not None and cur.parent_id is not None:
            path.append(cur.child_index)
            cur = self.nodes[cur.parent_id]
        return tuple(reversed(path))


def min_displacement(n: int, model: str, rng: RngStream, *,
                     depth_cap: int = DEFAULT_DEPTH_CAP,
                     initial_slack: float = _DEFAULT_SLACK,
                     max_expansions: int | None = None) -> SearchResult:
    """Exact minimum total displacement over generation n of the sampled walk.

    Best-first by displacement; the initial budget is m_n(n) + initial_slack
    and escalates by the same slack whenever the frontier drains, so the
    slack choice affects only performance, never the result.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n > depth_cap:
        raise WorkLimitExceeded(
            f"n = {n} exceeds depth cap {depth_cap}; expected work grows "
            "like e^(n/e) -- raise depth_cap explicitly to override")

    search = _Search(model, rng)
    budget = m_n(n) + initial_slack
    root = search.make_root()
    search.expand(root, budget)
    search.expanded.append(root)

    while True:
        if not search.heap:
            new_budget = budget + initial_slack
            search.escalate(budget, new_budget)
            budget = new_budget
            continue
        node = search.pop()
        if node.depth == n:
            return SearchResult(node.displacement, search.path_to(node),
                                search.pops, budget)
        if max_expansions is not None and search.pops > max_expansions:
            raise WorkLimitExceeded(f"expansion limit {max_expansions} hit")
        search.expand(node, budget)
        search.expanded.append(node)


def census(n: int, x: float, model: str, rng: RngStream, *,
           by_k: bool = False, work_limit: float = 1e7) -> CensusTable:
    """Exact counts of nodes with displacement <= x at every level <= n.

    Expected total work is about e^x nodes; the guard rejects x for which
    that exceeds work_limit.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x}")
    if math.exp(min(x, 700.0)) > work_limit:
        raise WorkLimitExceeded(
            f"expected node count e^{x:.2f} exceeds work limit {work_limit:g}")

    per_level = {0: 1}
    per_level_k: dict[tuple[int, int], int] | None = {(0, 0): 1} if by_k else None
    visited = 0

    # iterative DFS over (depth, weight, displacement, stream)
    stack = [(0, 0, 0.0, DisplacementStream(model, rng.key))]
    while stack:
        depth, weight, s, stream = stack.pop()
        if depth == n:
            continue
        slack = x - s
        if slack <= 0.0:
            continue
        for c in stream.children_within(slack):
            cd, cw = depth + 1, weight + c.index
            per_level[cd] = per_level.get(cd, 0) + 1
            if per_level_k is not None:
                kk = (cd, cw - cd)
                per_level_k[kk] = per_level_k.get(kk, 0) + 1
            visited += 1
            if visited > work_limit:
                raise WorkLimitExceeded(f"node count exceeded {work_limit:g}")
            stack.append((cd, cw, s + c.displacement,
                          DisplacementStream(model,
                                             child_key(stream.node_key, c.index))))
    for j in range(n + 1):
        per_level.setdefault(j, 0)
    return CensusTable(x, per_level, per_level_k)


def lowest_m(m: int, model: str, rng: RngStream, *,
             initial_slack: float = _DEFAULT_SLACK,
             max_expansions: int | None = 10 ** 7) -> list[BrwNode]:
    """The m globally lowest-displacement nodes, in increasing order.

    The first is always the root (displacement 0).  Budget starts at
    har-scale (the typical size of the m-th lowest displacement) and
    escalates as needed.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    from .analytics import har

    search = _Search(model, rng)
    budget = har(max(m - 1, 0)) + initial_slack
    root = search.make_root()

    out: list[BrwNode] = [root]
    search.expand(root, budget)
    search.expanded.append(root)
    while len(out) < m:
        if not search.heap:
            new_budget = budget + initial_slack
            search.escalate(budget, new_budget)
            budget = new_budget
            continue
        node = search.pop()
        out.append(node)
        if max_expansions is not None and search.pops > max_expansions:
            raise WorkLimitExceeded(f"expansion limit {max_expansions} hit")
        search.expand(node, budget)
        search.expanded.append(node)
    return out
