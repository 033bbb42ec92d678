"""Lazy, budget-bounded child-displacement generation for the two
exponential-step models.

Two concrete displacement vectors are provided:

* PWIT -- children sit at the points of a unit-rate Poisson process:
  X_i = E_1 + ... + E_i with iid Exponential(1) spacings.  The envelope is
  X_i itself, which is strictly increasing, so generation stops at the
  first point past the budget.

* PD -- the Poisson-Dirichlet (GEM stick-breaking) walk: with iid uniforms
  U_i on (0, 1), G_k = (1-U_1)...(1-U_{k-1}) U_k and X_k = -log G_k.
  Writing L_k = -log prod_{i<k} (1-U_i), we have X_k >= L_k and L_k is
  non-decreasing, so L_k is a sound pruning envelope: once L_k exceeds the
  budget no later child can fit.

Both generators emit *exactly* the children with displacement at most the
budget; there is no truncation parameter.  Raising the budget on the same
stream only adds children, never changes ones already emitted.  All
stick-breaking arithmetic is done in log scale.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

from .rng import RngStream, child_key, draw_u64, u64_to_open_unit

__all__ = [
    "PWIT",
    "PD",
    "MODELS",
    "ChildDisplacement",
    "DisplacementStream",
    "pwit_children",
    "pd_children",
    "children",
]

PWIT = "pwit"
PD = "pd"
MODELS = (PWIT, PD)


@dataclass(frozen=True)
class ChildDisplacement:
    """Child label i and its displacement X_i from the parent."""

    index: int
    displacement: float


class DisplacementStream:
    """Resumable child generator for a single node.

    Children are drawn from the node's keyed random stream: the i-th draw is
    a pure function of (node key, i), so re-running with a larger budget
    reproduces the earlier children bit-identically and appends the new ones
    (the prefix property the search engine's budget escalation relies on).
    """

    def __init__(self, model: str, node_key: int):
        if model not in MODELS:
            raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")
        self.model = model
        self.node_key = node_key
        self._next_index = 1
        # PWIT: cumulative sum of accepted spacings.
        # PD: cumulative stick envelope L_k = -log prod_{i<k}(1-U_i).
        self._cursor = 0.0
        self._skipped: list[ChildDisplacement] = []  # PD only: X > past budgets

    def _u(self, i: int) -> float:
        return u64_to_open_unit(draw_u64(self.node_key, i))

    def children_within(self, budget: float) -> list[ChildDisplacement]:
        """Emit all not-yet-emitted children with displacement <= budget.

        Successive calls with non-decreasing budgets partition the full child
        set; a child is returned exactly once.
        """
        if not budget > 0.0:
            raise ValueError(f"budget must be positive, got {budget}")
        if self.model == PWIT:
            return self._pwit_within(budget)
        return self._pd_within(budget)

    def _pwit_within(self, budget: float) -> list[ChildDisplacement]:
        out = []
        while True:
            i = self._next_index
            x = self._cursor - math.log(self._u(i))
            if x > budget:
                # not consumed: the same keyed draw will reproduce x later
                return out
            out.append(ChildDisplacement(i, x))
            self._cursor = x
            self._next_index = i + 1

    def _pd_within(self, budget: float) -> list[ChildDisplacement]:
        out = []
        if self._skipped:
            keep = []
            for c in self._skipped:
                (out if c.displacement <= budget else keep).append(c)
            self._skipped = keep
        while self._cursor <= budget:
            k = self._next_index
            u = self._u(k)
            x = self._cursor - math.log(u)       # X_k = L_k - log U_k
            self._cursor -= math.log1p(-u)       # L_{k+1}
            self._next_index = k + 1
            if x <= budget:
                out.append(ChildDisplacement(k, x))
            else:
                self._skipped.append(ChildDisplacement(k, x))
        out.sort(key=lambda c: c.index)
        return out


def _fresh_stream(model: str, rng: RngStream) -> DisplacementStream:
    return DisplacementStream(model, rng.key)


def pwit_children(budget: float, rng: RngStream) -> list[ChildDisplacement]:
    """All PWIT children with displacement <= budget.

    The count is Poisson(budget)-distributed and the displacements are the
    increasing points of a rate-1 Poisson process on [0, budget].
    """
    return _fresh_stream(PWIT, rng).children_within(budget)


def pd_children(budget: float, rng: RngStream) -> list[ChildDisplacement]:
    """All Poisson-Dirichlet children with displacement <= budget."""
    return _fresh_stream(PD, rng).children_within(budget)


def children(model: str, budget: float, rng: RngStream) -> list[ChildDisplacement]:
    """Model dispatch with the common (budget, stream) contract."""
    if model == PWIT:
        return pwit_children(budget, rng)
    if model == PD:
        return pd_children(budget, rng)
    raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")


def node_key_for_path(root_key: int, path: tuple[int, ...]) -> int:
    """Key of the node reached from the root by the given child indices.

    Depends only on the path, not on exploration order, so different search
    strategies over the same stream explore the identical sampled tree.
    """
    k = root_key
    for idx in path:
        k = child_key(k, idx)
    return k
