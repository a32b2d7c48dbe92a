"""Edge probabilities for the JAG and AGM models and the JAG log-likelihood.

JAG: ``p(u, v) = alpha * J(S_u, S_v)``. A background probability ``epsilon``
is composed by noisy-OR, ``1 - (1 - alpha*J) * (1 - epsilon)``, so that an
observed edge between nodes sharing no community does not zero the
likelihood. ``epsilon = 0`` recovers the plain model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .graph import Affiliation, Graph, comember_pairs, jaccard, shared_communities


@dataclass(frozen=True)
class ModelParams:
    alpha: float
    epsilon: float = 1e-8

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if not 0.0 <= self.epsilon < 1.0:
            raise ValueError(f"epsilon must be in [0, 1), got {self.epsilon}")


@dataclass(frozen=True)
class AgmParams:
    per_community_prob: tuple[float, ...]
    epsilon: float = 0.0

    def __post_init__(self):
        probs = tuple(float(p) for p in self.per_community_prob)
        if any(not 0.0 <= p <= 1.0 for p in probs):
            raise ValueError("per-community probabilities must lie in [0, 1]")
        if not 0.0 <= self.epsilon < 1.0:
            raise ValueError("epsilon must be in [0, 1)")
        object.__setattr__(self, "per_community_prob", probs)


@dataclass(frozen=True)
class GridSpec:
    """Alpha grid over ``[lo, hi]``.

    With ``refine`` the search is two-stage: a coarse pass at
    ``coarse_step`` followed by a local pass at ``fine_step`` around the
    coarse optimum.
    """

    step: float = 0.01
    lo: float = 0.0
    hi: float = 1.0
    refine: bool = False
    coarse_step: float = 0.05
    fine_step: float = 0.005

    def __post_init__(self):
        if self.step <= 0 or self.coarse_step <= 0 or self.fine_step <= 0:
            raise ValueError("grid step must be positive")
        if not 0.0 <= self.lo <= self.hi <= 1.0:
            raise ValueError("grid bounds must satisfy 0 <= lo <= hi <= 1")

    def points(self, step: float | None = None, lo: float | None = None,
               hi: float | None = None) -> np.ndarray:
        step = self.step if step is None else step
        lo = self.lo if lo is None else lo
        hi = self.hi if hi is None else hi
        k = int(math.floor((hi - lo) / step + 1e-9))
        pts = np.round(lo + step * np.arange(k + 1), 12)
        return pts[pts <= hi + 1e-12]


def _compose(p: float | np.ndarray, epsilon: float):
    # 1 - (1-p)(1-eps), arranged to be exact when eps == 0
    return p + epsilon * (1.0 - p)


def jag_edge_prob(a: Affiliation, params: ModelParams, u: int, v: int) -> float:
    return float(_compose(params.alpha * jaccard(a, u, v), params.epsilon))


def agm_edge_prob(a: Affiliation, params: AgmParams, u: int, v: int) -> float:
    if len(params.per_community_prob) != a.community_count:
        raise ValueError("need one probability per community")
    keep = 1.0
    for k in sorted(shared_communities(a, u, v)):
        keep *= 1.0 - params.per_community_prob[k]
    return float(_compose(1.0 - keep, params.epsilon))


class PairStatistics(NamedTuple):
    """Sufficient statistics of the JAG likelihood for a fixed assignment.

    ``jaccard_values`` are the distinct positive Jaccard values among
    co-member pairs, with edge / non-edge counts at each. Pairs sharing no
    community are summarized by ``zero_edges`` and ``zero_non_edges``.
    """

    jaccard_values: np.ndarray
    edges: np.ndarray
    non_edges: np.ndarray
    zero_edges: int
    zero_non_edges: int


def pair_statistics(g: Graph, a: Affiliation) -> PairStatistics:
    if g.node_count != a.node_count:
        raise ValueError(f"graph has {g.node_count} nodes, affiliation {a.node_count}")
    pairs = comember_pairs(a)
    m = a.matrix
    sizes = a.set_sizes
    if len(pairs):
        inter = np.einsum("ij,ij->i", m[pairs[:, 0]], m[pairs[:, 1]])
        union = sizes[pairs[:, 0]] + sizes[pairs[:, 1]] - inter
        # exact rational keys so equal J values group together
        g_ = np.gcd(inter, union)
        keys = (inter // g_) * (int(union.max()) + 1) + union // g_
        is_edge = g.has_edges(pairs[:, 0], pairs[:, 1])
        uniq, inv = np.unique(keys, return_inverse=True)
        num = uniq // (int(union.max()) + 1)
        den = uniq % (int(union.max()) + 1)
        jvals = num / den
        edges = np.bincount(inv, weights=is_edge, minlength=len(uniq)).astype(np.int64)
        total = np.bincount(inv, minlength=len(uniq)).astype(np.int64)
        inside_edges = int(is_edge.sum())
    else:
        jvals = np.empty(0)
        edges = total = np.empty(0, dtype=np.int64)
        inside_edges = 0
    zero_edges = g.edge_count - inside_edges
    zero_non_edges = g.pair_count - len(pairs) - zero_edges
    return PairStatistics(jvals, edges, total - edges, zero_edges, zero_non_edges)


def _term_sum(p: np.ndarray, edges: np.ndarray, non_edges: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        le = np.where(edges > 0, edges * np.log(p), 0.0)
        ln = np.where(non_edges > 0, non_edges * np.log1p(-p), 0.0)
    return le + ln


def likelihood_from_stats(stats: PairStatistics, alpha: float | np.ndarray,
                          epsilon: float) -> float | np.ndarray:
    """Log-likelihood for one alpha or a vector of alphas."""
    alpha = np.asarray(alpha, dtype=np.float64)
    p = _compose(alpha[..., None] * stats.jaccard_values, epsilon)
    total = _term_sum(p, stats.edges, stats.non_edges).sum(axis=-1)
    total = total + _term_sum(np.float64(epsilon), np.int64(stats.zero_edges),
                              np.int64(stats.zero_non_edges))
    return float(total) if total.ndim == 0 else total


def log_likelihood(g: Graph, a: Affiliation, params: ModelParams) -> float:
    """Log of L(A): edges contribute ``log p``, non-edges ``log(1 - p)``.

    Only pairs sharing a community are enumerated; every other pair has
    ``p = epsilon`` and is counted in closed form.
    """
    return likelihood_from_stats(pair_statistics(g, a), params.alpha, params.epsilon)


def log_likelihood_naive(g: Graph, a: Affiliation, params: ModelParams) -> float:
    """O(n^2) double loop over all pairs; reference for the fast paths."""
    if g.node_count != a.node_count:
        raise ValueError("node count mismatch")
    total = 0.0
    for u in range(g.node_count):
        for v in range(u + 1, g.node_count):
            p = jag_edge_prob(a, params, u, v)
            if g.has_edge(u, v):
                total += math.log(p) if p > 0 else -math.inf
            else:
                total += math.log1p(-p) if p < 1 else -math.inf
    return total


class MoveKind(Enum):
    DELETE = "delete"
    ADD = "add"
    SWITCH = "switch"


@dataclass(frozen=True)
class MembershipMove:
    kind: MoveKind
    node: int
    remove_comm: int | None = None
    add_comm: int | None = None

    def validate(self, a: Affiliation) -> None:
        u = self.node
        if not 0 <= u < a.node_count:
            raise ValueError(f"move node {u} out of range")
        need_remove = self.kind in (MoveKind.DELETE, MoveKind.SWITCH)
        need_add = self.kind in (MoveKind.ADD, MoveKind.SWITCH)
        if need_remove != (self.remove_comm is not None) or need_add != (self.add_comm is not None):
            raise ValueError(f"malformed {self.kind.value} move: {self}")
        if need_remove and not a.has(u, self.remove_comm):
            raise ValueError(f"node {u} is not in community {self.remove_comm}")
        if need_add and a.has(u, self.add_comm):
            raise ValueError(f"node {u} is already in community {self.add_comm}")

    def apply(self, a: Affiliation) -> None:
        if self.remove_comm is not None:
            a.remove(self.node, self.remove_comm)
        if self.add_comm is not None:
            a.add(self.node, self.add_comm)

    def revert(self, a: Affiliation) -> None:
        if self.add_comm is not None:
            a.remove(self.node, self.add_comm)
        if self.remove_comm is not None:
            a.add(self.node, self.remove_comm)

    def new_row(self, a: Affiliation) -> np.ndarray:
        row = a.matrix[self.node].copy()
        if self.remove_comm is not None:
            row[self.remove_comm] = 0
        if self.add_comm is not None:
            row[self.add_comm] = 1
        return row


def _row_terms(m: np.ndarray, sizes: np.ndarray, others: np.ndarray, row: np.ndarray,
               is_edge: np.ndarray, params: ModelParams) -> np.ndarray:
    inter = m[others] @ row
    union = sizes[others] + row.sum() - inter
    j = np.divide(inter, union, out=np.zeros(len(others)), where=union > 0)
    p = _compose(params.alpha * j, params.epsilon)
    with np.errstate(divide="ignore"):
        return np.where(is_edge, np.log(p), np.log1p(-p))


def log_likelihood_delta(g: Graph, a: Affiliation, params: ModelParams,
                         move: MembershipMove) -> float:
    """``log L(A') - log L(A)`` for a one-node move, without applying it.

    Only pairs ``(u, w)`` whose probability can change are re-scored: ``w``
    in a community of ``S_u`` or ``S_u'``, or adjacent to ``u``.
    """
    move.validate(a)
    u = move.node
    m = a.matrix
    old = m[u]
    new = move.new_row(a)
    touched = np.flatnonzero(old | new)
    nbrs = g.neighbors(u)
    mask = m[:, touched].any(axis=1) if len(touched) else np.zeros(a.node_count, dtype=bool)
    mask[nbrs] = True
    mask[u] = False
    others = np.flatnonzero(mask)
    if not len(others):
        return 0.0
    is_edge = np.isin(others, nbrs, assume_unique=True)
    sizes = a.set_sizes
    before = _row_terms(m, sizes, others, old, is_edge, params)
    after = _row_terms(m, sizes, others, new, is_edge, params)
    # identical terms (including -inf == -inf) cancel exactly
    diff = np.where(before == after, 0.0, after - before)
    return float(diff.sum())


def fit_alpha(g: Graph, a: Affiliation, grid: GridSpec = GridSpec(),
              epsilon: float = 1e-8) -> tuple[float, float]:
    """Grid-search alpha maximizing the log-likelihood; ties go to the smaller alpha."""
    return fit_alpha_from_stats(pair_statistics(g, a), grid, epsilon)


def fit_alpha_from_stats(stats: PairStatistics, grid: GridSpec,
                         epsilon: float) -> tuple[float, float]:
    def best(points: np.ndarray) -> tuple[float, float]:
        if not len(points):
            raise ValueError("empty alpha grid")
        vals = likelihood_from_stats(stats, points, epsilon)
        vals = np.where(np.isnan(vals), -np.inf, vals)
        i = int(np.argmax(vals))  # first max, i.e. smallest alpha
        return float(points[i]), float(vals[i])

    if not grid.refine:
        return best(grid.points())
    a0, _ = best(grid.points(step=grid.coarse_step))
    lo = max(grid.lo, a0 - grid.coarse_step)
    hi = min(grid.hi, a0 + grid.coarse_step)
    return best(grid.points(step=grid.fine_step, lo=lo, hi=hi))
