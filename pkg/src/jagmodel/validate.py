"""Observation experiments relating edge probability to community overlap.

* Binned edge frequency against the Jaccard similarity of community sets,
  for pairs sharing exactly a fixed set of communities or for uniformly
  random pairs, with a slope fitted through the origin.
* Internal edge density of isolated communities (communities whose members
  belong to nothing else), which under JAG should all sit at alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import EmptyReportError, SamplingExhausted
from .graph import Affiliation, Graph, jaccard_pairs

DEFAULT_MAX_ATTEMPTS = 1_000_000


def pair_from_index(n: int, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map linear indices over the ``n*(n-1)/2`` pairs ``u < v`` (row-major) to pairs."""
    idx = np.asarray(idx, dtype=np.int64)
    # rows start at offsets s(u) = u*(2n - u - 1)/2
    b = 2 * n - 1
    u = np.floor((b - np.sqrt(np.maximum(b * b - 8.0 * idx, 0.0))) / 2).astype(np.int64)
    start = u * (2 * n - u - 1) // 2
    # float rounding can be off by one in either direction
    too_far = start > idx
    u[too_far] -= 1
    start = u * (2 * n - u - 1) // 2
    nxt = (u + 1) * (2 * n - u - 2) // 2
    short = idx >= nxt
    u[short] += 1
    start = u * (2 * n - u - 1) // 2
    v = idx - start + u + 1
    return u, v


def sample_uniform_pairs(n: int, n_pairs: int, seed: int | None = None,
                         replace: bool = False) -> np.ndarray:
    """Uniformly random unordered node pairs, distinct unless ``replace``."""
    total = n * (n - 1) // 2
    if total == 0:
        raise ValueError("need at least two nodes")
    if not replace and n_pairs > total:
        raise ValueError(f"cannot draw {n_pairs} distinct pairs from {total}")
    rng = np.random.default_rng(seed)
    idx = rng.choice(total, size=n_pairs, replace=replace)
    u, v = pair_from_index(n, idx)
    return np.stack([u, v], axis=1)


def sample_constrained_pairs(g: Graph, a: Affiliation, fixed: Iterable[int], n_pairs: int,
                             seed: int | None = None,
                             max_attempts: int = DEFAULT_MAX_ATTEMPTS) -> np.ndarray:
    """Rejection-sample pairs whose shared communities are exactly ``fixed``.

    Proposals are uniform pairs of members of the smallest fixed community,
    which contains every qualifying pair, so accepted pairs are uniform
    over the qualifying set (sampled with replacement).
    """
    fixed = frozenset(int(c) for c in fixed)
    if not fixed:
        raise ValueError("fixed community set must be non-empty")
    if g.node_count != a.node_count:
        raise ValueError("graph and affiliation node counts differ")
    smallest = min(fixed, key=lambda c: len(a.members(c)))
    pool = a.member_array(smallest)
    if len(pool) < 2:
        raise SamplingExhausted("fixed community has fewer than two members", 0)
    rng = np.random.default_rng(seed)
    sets = [a.community_set(u) for u in range(a.node_count)]
    out: list[tuple[int, int]] = []
    attempts = 0
    while len(out) < n_pairs:
        if attempts >= max_attempts:
            raise SamplingExhausted(f"rejection budget of {max_attempts} attempts spent", len(out))
        batch = min(max(4 * (n_pairs - len(out)), 256), max_attempts - attempts)
        i = rng.integers(0, len(pool), size=batch)
        j = rng.integers(0, len(pool), size=batch)
        for x, y in zip(pool[i], pool[j]):
            attempts += 1
            if x == y:
                continue
            if sets[x] & sets[y] == fixed:
                out.append((min(int(x), int(y)), max(int(x), int(y))))
                if len(out) == n_pairs:
                    break
    return np.asarray(out, dtype=np.int64).reshape(-1, 2)


@dataclass
class BinningReport:
    bin_edges: np.ndarray
    pair_count: np.ndarray
    edge_count: np.ndarray
    jaccard_mean: np.ndarray
    flagged: np.ndarray  # bins below the minimum pair count
    fitted_slope: float
    fit_residual: float
    min_count: int = 30

    @property
    def p_edge(self) -> np.ndarray:
        return np.divide(self.edge_count, self.pair_count,
                         out=np.full(len(self.pair_count), np.nan), where=self.pair_count > 0)

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    def rows(self) -> list[tuple]:
        p = self.p_edge
        return [(float(self.bin_edges[i]), float(self.bin_edges[i + 1]), int(self.pair_count[i]),
                 int(self.edge_count[i]), float(p[i]) if self.pair_count[i] else "",
                 float(self.jaccard_mean[i]) if self.pair_count[i] else "", bool(self.flagged[i]))
                for i in range(len(self.pair_count))]

    header = ["j_lo", "j_hi", "pair_count", "edge_count", "p_edge", "jaccard_mean", "low_count"]

    def summary(self) -> dict:
        return {
            "fitted_slope": self.fitted_slope,
            "fit_residual": self.fit_residual,
            "pairs": int(self.pair_count.sum()),
            "edges": int(self.edge_count.sum()),
            "bins": len(self.pair_count),
            "min_bin_count": self.min_count,
            "low_count_bins": int(self.flagged.sum()),
        }


def fit_slope_through_origin(x: np.ndarray, y: np.ndarray, w: np.ndarray) -> tuple[float, float]:
    """Weighted least squares ``y ~ slope * x``; returns (slope, weighted RSS)."""
    x, y, w = (np.asarray(v, dtype=np.float64) for v in (x, y, w))
    keep = w > 0
    x, y, w = x[keep], y[keep], w[keep]
    denom = float((w * x * x).sum())
    if denom == 0:
        return 0.0, float((w * y * y).sum())
    slope = float((w * x * y).sum()) / denom
    return slope, float((w * (y - slope * x) ** 2).sum())


def binning_experiment(g: Graph, a: Affiliation, pairs: np.ndarray | int,
                       bins: int | np.ndarray = 10, seed: int | None = None,
                       min_count: int = 30) -> BinningReport:
    """Edge frequency per Jaccard bin over the given pairs.

    ``pairs`` is an ``(m, 2)`` array, or an int to draw that many distinct
    uniform random pairs. Bins are right-open except the last, which
    includes J = 1. The slope regresses per-bin edge frequency on per-bin
    mean Jaccard, weighted by pair count.
    """
    if g.node_count != a.node_count:
        raise ValueError("graph and affiliation node counts differ")
    if isinstance(pairs, (int, np.integer)):
        pairs = sample_uniform_pairs(g.node_count, int(pairs), seed)
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if not len(pairs):
        raise ValueError("need at least one pair")
    edges = np.linspace(0.0, 1.0, bins + 1) if np.isscalar(bins) else np.asarray(bins, dtype=float)
    if np.any(np.diff(edges) <= 0) or edges[0] < 0 or edges[-1] > 1:
        raise ValueError("bin edges must be ascending within [0, 1]")
    j = jaccard_pairs(a.matrix, pairs[:, 0], pairs[:, 1])
    hit = g.has_edges(pairs[:, 0], pairs[:, 1])
    which = np.clip(np.searchsorted(edges, j, side="right") - 1, 0, len(edges) - 2)
    nb = len(edges) - 1
    count = np.bincount(which, minlength=nb).astype(np.int64)
    ecount = np.bincount(which, weights=hit, minlength=nb).astype(np.int64)
    jsum = np.bincount(which, weights=j, minlength=nb)
    jmean = np.divide(jsum, count, out=np.zeros(nb), where=count > 0)
    p = np.divide(ecount, count, out=np.zeros(nb), where=count > 0)
    slope, resid = fit_slope_through_origin(jmean, p, count)
    return BinningReport(edges, count, ecount, jmean, count < min_count, slope, resid, min_count)


def find_isolated_communities(a: Affiliation, min_size: int = 5, max_count: int | None = 5,
                              seed: int | None = None) -> list[int]:
    """Communities of at least ``min_size`` whose members belong to nothing else.

    If more than ``max_count`` qualify, a uniform subsample is returned
    (sorted by id).
    """
    sizes = a.set_sizes
    found = []
    for c in range(a.community_count):
        members = a.member_array(c)
        if len(members) >= min_size and np.all(sizes[members] == 1):
            found.append(c)
    if max_count is not None and len(found) > max_count:
        rng = np.random.default_rng(seed)
        found = sorted(int(c) for c in rng.choice(found, size=max_count, replace=False))
    return found


@dataclass
class IsolatedCommunityReport:
    communities: list[int]
    sizes: list[int]
    densities: list[float]
    alpha: float | None = None
    extra: dict = field(default_factory=dict)

    @property
    def mean(self) -> float:
        return float(np.mean(self.densities))

    @property
    def std(self) -> float:
        return float(np.std(self.densities, ddof=1)) if len(self.densities) > 1 else 0.0

    header = ["community", "size", "internal_edges", "density"]

    def rows(self) -> list[tuple]:
        return [(c, s, int(round(d * s * (s - 1) / 2)), d)
                for c, s, d in zip(self.communities, self.sizes, self.densities)]

    def summary(self) -> dict:
        return {"communities": len(self.communities), "mean_density": self.mean,
                "std_density": self.std, "alpha": self.alpha,
                "record": f"{self.mean:.2f} ± {self.std:.2f}"}


def internal_density(g: Graph, members: np.ndarray) -> float:
    m = len(members)
    if m < 2:
        return math.nan
    sub, _ = g.subgraph(members)
    return sub.edge_count / (m * (m - 1) / 2)


def isolated_density_experiment(g: Graph, a: Affiliation, min_size: int = 5,
                                max_count: int | None = 5, seed: int | None = None,
                                alpha: float | None = None) -> IsolatedCommunityReport:
    """Internal edge density of isolated communities, against a given alpha."""
    if g.node_count != a.node_count:
        raise ValueError("graph and affiliation node counts differ")
    comms = find_isolated_communities(a, min_size, max_count, seed)
    if not comms:
        raise EmptyReportError("no isolated communities found")
    sizes, dens = [], []
    for c in comms:
        members = a.member_array(c)
        sizes.append(len(members))
        dens.append(internal_density(g, members))
    return IsolatedCommunityReport(comms, sizes, dens, alpha)
