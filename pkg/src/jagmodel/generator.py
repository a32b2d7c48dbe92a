"""Synthetic affiliations and graphs.

Samplers draw every unordered pair independently from the JAG or AGM edge
probability. :func:`simulate_event_process` runs the community-event
friendship process, and :func:`coattendance_prob_exact` computes its
single-round co-attendance probability by enumerating every ranking.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import CapacityError
from .graph import Affiliation, Graph, comember_pairs, jaccard_pairs
from .models import AgmParams, ModelParams

MAX_ENUMERATION_COMMUNITIES = 10


@dataclass(frozen=True)
class PlantedConfig:
    """Random planted affiliation.

    Each node draws a membership count uniformly from
    ``[min_memberships, max_memberships]`` and joins that many distinct
    communities chosen uniformly. ``memberships`` overrides this with
    explicit per-community member lists.
    """

    node_count: int
    community_count: int
    min_memberships: int = 1
    max_memberships: int = 3
    seed: int = 0
    memberships: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        if self.node_count < 1 or self.community_count < 1:
            raise ValueError("node_count and community_count must be positive")
        if self.memberships is None:
            if not 0 <= self.min_memberships <= self.max_memberships <= self.community_count:
                raise ValueError("need 0 <= min_memberships <= max_memberships <= community_count")
        elif len(self.memberships) > self.community_count:
            raise ValueError("more membership lists than communities")


@dataclass(frozen=True)
class ProcessConfig:
    rounds: int
    meet_prob: float
    seed: int = 0

    def __post_init__(self):
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if not 0.0 < self.meet_prob <= 1.0:
            raise ValueError("meet_prob must be in (0, 1]")


def planted_affiliation(cfg: PlantedConfig) -> Affiliation:
    if cfg.memberships is not None:
        return Affiliation.from_communities(cfg.node_count, cfg.memberships, cfg.community_count)
    rng = np.random.default_rng(cfg.seed)
    a = Affiliation(cfg.node_count, cfg.community_count)
    counts = rng.integers(cfg.min_memberships, cfg.max_memberships + 1, size=cfg.node_count)
    for u, k in enumerate(counts):
        for c in rng.choice(cfg.community_count, size=int(k), replace=False):
            a.add(u, int(c))
    return a


def pairwise_overlap_affiliation(community_count: int, size: int, overlap: int) -> Affiliation:
    """Equal-size communities where every pair shares ``overlap`` nodes.

    Each shared block belongs to exactly its two communities; the rest of
    each community is exclusive to it. Node ids are laid out block by block.
    """
    exclusive = size - (community_count - 1) * overlap
    if exclusive < 0:
        raise ValueError("size too small for the requested pairwise overlap")
    comms: list[list[int]] = [[] for _ in range(community_count)]
    nxt = 0
    for c in range(community_count):
        comms[c].extend(range(nxt, nxt + exclusive))
        nxt += exclusive
    for c1, c2 in itertools.combinations(range(community_count), 2):
        block = range(nxt, nxt + overlap)
        comms[c1].extend(block)
        comms[c2].extend(block)
        nxt += overlap
    return Affiliation.from_communities(nxt, comms)


def disjoint_union(*parts: Affiliation) -> Affiliation:
    """Stack affiliations on disjoint node and community ranges."""
    n = sum(p.node_count for p in parts)
    k = sum(p.community_count for p in parts)
    out = Affiliation(n, k)
    n0 = k0 = 0
    for p in parts:
        for u, c in p.memberships():
            out.add(n0 + u, k0 + c)
        n0 += p.node_count
        k0 += p.community_count
    return out


def isolated_affiliation(count: int, size: int) -> Affiliation:
    """``count`` disjoint communities of ``size`` nodes each."""
    return Affiliation.from_communities(
        count * size, [range(i * size, (i + 1) * size) for i in range(count)])


def _sample_background(rng: np.random.Generator, n: int, excluded: np.ndarray,
                       epsilon: float) -> np.ndarray:
    """Edges among pairs not in ``excluded`` (sorted codes), each with prob ``epsilon``."""
    total = n * (n - 1) // 2 - len(excluded)
    if epsilon <= 0 or total <= 0:
        return np.empty((0, 2), dtype=np.int64)
    k = int(rng.binomial(total, epsilon))
    chosen: set[int] = set()
    while len(chosen) < k:
        u, v = rng.integers(0, n, size=2)
        if u == v:
            continue
        code = int(min(u, v) * n + max(u, v))
        i = np.searchsorted(excluded, code)
        if i < len(excluded) and excluded[i] == code:
            continue
        chosen.add(code)
    codes = np.array(sorted(chosen), dtype=np.int64)
    return np.stack([codes // n, codes % n], axis=1) if k else np.empty((0, 2), dtype=np.int64)


def _sample_pairs(rng: np.random.Generator, a: Affiliation, pairs: np.ndarray,
                  probs: np.ndarray, epsilon: float) -> Graph:
    n = a.node_count
    hit = rng.random(len(pairs)) < probs
    background = _sample_background(rng, n, pairs[:, 0] * n + pairs[:, 1], epsilon)
    return Graph(n, np.concatenate([pairs[hit], background]))


def sample_jag_graph(a: Affiliation, params: ModelParams, seed: int | None = None) -> Graph:
    rng = np.random.default_rng(seed)
    pairs = comember_pairs(a)
    j = jaccard_pairs(a.matrix, pairs[:, 0], pairs[:, 1])
    p = params.alpha * j
    probs = p + params.epsilon * (1.0 - p)
    return _sample_pairs(rng, a, pairs, probs, params.epsilon)


def sample_agm_graph(a: Affiliation, params: AgmParams, seed: int | None = None) -> Graph:
    if len(params.per_community_prob) != a.community_count:
        raise ValueError("need one probability per community")
    rng = np.random.default_rng(seed)
    pairs = comember_pairs(a)
    q = 1.0 - np.asarray(params.per_community_prob)
    m = a.matrix.astype(bool)
    keep = np.ones(len(pairs))
    for s in range(0, len(pairs), 1 << 16):
        p = pairs[s:s + (1 << 16)]
        shared = m[p[:, 0]] & m[p[:, 1]]
        keep[s:s + len(p)] = np.where(shared, q, 1.0).prod(axis=1)
    probs = 1.0 - keep * (1.0 - params.epsilon)
    return _sample_pairs(rng, a, pairs, probs, params.epsilon)


def attended_communities(a: Affiliation, ranks: np.ndarray) -> np.ndarray:
    """Community each node attends under each ranking.

    ``ranks[t, c]`` is the position of community ``c`` in ranking ``t``
    (lower is preferred). Returns ``(T, n)``; ``-1`` for nodes with no
    communities.
    """
    m = a.matrix.astype(bool)
    big = a.community_count + 1
    masked = np.where(m[None, :, :], ranks[:, None, :], big)
    best = masked.argmin(axis=2)
    best[:, ~m.any(axis=1)] = -1
    return best


def simulate_event_process(a: Affiliation, cfg: ProcessConfig) -> tuple[Graph, np.ndarray]:
    """Run the friendship process for ``cfg.rounds`` rounds.

    Every round a uniformly random global ranking of all communities is
    drawn, each node attends its best-ranked community, and each absent
    pair attending the same event becomes an edge with probability
    ``meet_prob``. Edges are never removed.

    Returns the graph and an ``(n, n)`` upper-triangular matrix of
    co-attendance counts.
    """
    rng = np.random.default_rng(cfg.seed)
    n, k = a.node_count, a.community_count
    counts = np.zeros((n, n), dtype=np.int64)
    formed = np.zeros((n, n), dtype=bool)
    upper = np.triu(np.ones((n, n), dtype=bool), k=1)
    chunk = max(1, min(4096, 4_000_000 // max(n * k, 1)))
    done = 0
    while done < cfg.rounds and k:
        t = min(chunk, cfg.rounds - done)
        ranks = rng.permuted(np.tile(np.arange(k), (t, 1)), axis=1)
        att = attended_communities(a, ranks)
        for r in range(t):
            row = att[r]
            together = (row[:, None] == row[None, :]) & (row[:, None] >= 0) & upper
            counts += together
            if cfg.meet_prob >= 1.0:
                formed |= together
            else:
                fresh = together & ~formed
                formed |= fresh & (rng.random((n, n)) < cfg.meet_prob)
        done += t
    us, vs = np.nonzero(formed)
    return Graph(n, np.stack([us, vs], axis=1)), counts


@lru_cache(maxsize=None)
def _positions(k: int) -> np.ndarray:
    """Position of each community in each of the ``k!`` rankings, ``(k!, k)``."""
    perms = np.array(list(itertools.permutations(range(k))), dtype=np.int8).reshape(-1, k)
    pos = np.empty_like(perms)
    rows = np.arange(len(perms))[:, None]
    pos[rows, perms] = np.arange(k, dtype=np.int8)
    pos.setflags(write=False)
    return pos


def _route(sets: Sequence[Sequence[int]], pos: np.ndarray) -> list[np.ndarray]:
    out = []
    for s in sets:
        s = sorted(s)
        if not s:
            out.append(np.full(len(pos), -1))
        else:
            cols = np.asarray(s)
            out.append(cols[pos[:, cols].argmin(axis=1)])
    return out


def coattendance_prob_exact(a: Affiliation, u: int, v: int,
                            restricted: bool = False) -> Fraction:
    """Exact single-round probability that ``u`` and ``v`` attend the same event.

    Enumerates all rankings of every community (or, with ``restricted``,
    only rankings of ``S_u | S_v``) and routes both nodes through each.
    """
    su, sv = a.community_set(u), a.community_set(v)
    if restricted:
        universe = sorted(su | sv)
        remap = {c: i for i, c in enumerate(universe)}
        su = [remap[c] for c in su]
        sv = [remap[c] for c in sv]
        k = len(universe)
    else:
        k = a.community_count
    if k > MAX_ENUMERATION_COMMUNITIES:
        raise CapacityError(f"{k} communities exceed the enumeration bound "
                            f"of {MAX_ENUMERATION_COMMUNITIES}")
    if k == 0:
        return Fraction(0)
    pos = _positions(k)
    ru, rv = _route([su, sv], pos)
    hits = int(np.count_nonzero((ru == rv) & (ru >= 0)))
    return Fraction(hits, math.factorial(k))


def coattendance_table_exact(a: Affiliation) -> dict[tuple[int, int], Fraction]:
    """:func:`coattendance_prob_exact` for every pair, sharing one enumeration."""
    k = a.community_count
    if k > MAX_ENUMERATION_COMMUNITIES:
        raise CapacityError(f"{k} communities exceed the enumeration bound")
    n = a.node_count
    if k == 0:
        return {(u, v): Fraction(0) for u in range(n) for v in range(u + 1, n)}
    pos = _positions(k)
    routes = _route([a.community_set(u) for u in range(n)], pos)
    total = math.factorial(k)
    return {(u, v): Fraction(int(np.count_nonzero((routes[u] == routes[v]) & (routes[u] >= 0))), total)
            for u in range(n) for v in range(u + 1, n)}


def process_edge_prob(jaccard_value: float, cfg: ProcessConfig) -> float:
    """Edge probability after ``cfg.rounds`` independent rounds."""
    return 1.0 - (1.0 - cfg.meet_prob * jaccard_value) ** cfg.rounds
