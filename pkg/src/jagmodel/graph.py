"""Graph, affiliation and cover containers plus community-set queries.

Nodes and communities are dense integer ids. ``Graph`` is immutable after
construction; ``Affiliation`` is the mutable node/community membership
structure that an inference chain owns exclusively.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np


def _check_node(n: int, u: int) -> None:
    if not 0 <= u < n:
        raise ValueError(f"node {u} out of range [0, {n})")


class Graph:
    """Undirected simple graph over nodes ``0..node_count-1``.

    Self-loops and duplicate edges in the input are dropped; how many were
    dropped is kept in ``dropped_self_loops`` / ``dropped_duplicates``.
    Adjacency is stored CSR-style with sorted neighbor lists.
    """

    def __init__(self, node_count: int, edges: Iterable[Sequence[int]] | np.ndarray = ()):
        if node_count < 0:
            raise ValueError("node_count must be non-negative")
        n = int(node_count)
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        arr = arr.reshape(-1, 2)
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise ValueError(f"edge endpoint out of range [0, {n})")

        loops = arr[:, 0] == arr[:, 1]
        arr = arr[~loops]
        lo = np.minimum(arr[:, 0], arr[:, 1])
        hi = np.maximum(arr[:, 0], arr[:, 1])
        codes = np.unique(lo * n + hi)

        self.node_count = n
        self.dropped_self_loops = int(loops.sum())
        self.dropped_duplicates = int(len(arr) - len(codes))

        self._codes = codes
        self._edges = np.stack([codes // max(n, 1), codes % max(n, 1)], axis=1) if len(codes) else np.empty((0, 2), np.int64)

        both = np.concatenate([self._edges, self._edges[:, ::-1]])
        order = np.lexsort((both[:, 1], both[:, 0]))
        both = both[order]
        self._indices = both[:, 1].copy()
        self._indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(self._indptr, both[:, 0] + 1, 1)
        np.cumsum(self._indptr, out=self._indptr)

        for a in (self._codes, self._edges, self._indices, self._indptr):
            a.setflags(write=False)

    @property
    def edge_count(self) -> int:
        return len(self._codes)

    @property
    def edges(self) -> np.ndarray:
        """``(m, 2)`` array of edges, canonical ``u < v``, lexicographically sorted."""
        return self._edges

    @property
    def edge_codes(self) -> np.ndarray:
        """Sorted ``u * node_count + v`` codes of the canonical edges."""
        return self._codes

    @property
    def pair_count(self) -> int:
        return self.node_count * (self.node_count - 1) // 2

    def neighbors(self, u: int) -> np.ndarray:
        _check_node(self.node_count, u)
        return self._indices[self._indptr[u]:self._indptr[u + 1]]

    def degree(self, u: int) -> int:
        _check_node(self.node_count, u)
        return int(self._indptr[u + 1] - self._indptr[u])

    def degrees(self) -> np.ndarray:
        return np.diff(self._indptr)

    def has_edge(self, u: int, v: int) -> bool:
        nbrs = self.neighbors(u)
        _check_node(self.node_count, v)
        i = np.searchsorted(nbrs, v)
        return bool(i < len(nbrs) and nbrs[i] == v)

    def has_edges(self, us: np.ndarray, vs: np.ndarray) -> np.ndarray:
        """Vectorized edge membership for pairs ``(us[i], vs[i])``."""
        us = np.asarray(us, dtype=np.int64)
        vs = np.asarray(vs, dtype=np.int64)
        codes = np.minimum(us, vs) * self.node_count + np.maximum(us, vs)
        if not len(self._codes):
            return np.zeros(codes.shape, dtype=bool)
        idx = np.searchsorted(self._codes, codes)
        idx = np.minimum(idx, len(self._codes) - 1)
        return (self._codes[idx] == codes) & (us != vs)

    def __iter__(self) -> Iterator[tuple[int, int]]:
        for u, v in self._edges:
            yield int(u), int(v)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.node_count == other.node_count and np.array_equal(self._codes, other._codes)

    def __hash__(self) -> int:
        return hash((self.node_count, self._codes.tobytes()))

    def __repr__(self) -> str:
        return f"Graph(node_count={self.node_count}, edge_count={self.edge_count})"

    def with_node_count(self, node_count: int) -> Graph:
        """Same edges on a larger node set (extra nodes isolated)."""
        if node_count < self.node_count:
            raise ValueError("cannot shrink a graph")
        return Graph(node_count, self._edges)

    def subgraph(self, nodes: Sequence[int]) -> tuple[Graph, np.ndarray]:
        """Induced subgraph on ``nodes``; returns it with the new->old id map."""
        keep = np.unique(np.asarray(nodes, dtype=np.int64))
        if keep.size and (keep[0] < 0 or keep[-1] >= self.node_count):
            raise ValueError("subgraph node out of range")
        remap = np.full(self.node_count, -1, dtype=np.int64)
        remap[keep] = np.arange(len(keep))
        e = remap[self._edges]
        e = e[(e >= 0).all(axis=1)]
        return Graph(len(keep), e), keep

    def check(self) -> None:
        """Raise ``AssertionError`` if adjacency and edge set disagree."""
        n = self.node_count
        assert len(self._indptr) == n + 1
        assert np.all(self._edges[:, 0] < self._edges[:, 1])
        assert len(np.unique(self._codes)) == len(self._codes)
        seen = set()
        for u in range(n):
            nbrs = self.neighbors(u)
            assert np.all(np.diff(nbrs) > 0), "adjacency not sorted/unique"
            for v in nbrs:
                v = int(v)
                assert v != u
                assert self.has_edge(v, u), "asymmetric adjacency"
                seen.add((min(u, v), max(u, v)))
        assert seen == {(int(a), int(b)) for a, b in self._edges}


class Affiliation:
    """Bipartite node/community membership ``A(V, C, M)``.

    Three synchronized views: ``node -> communities``, ``community -> nodes``
    and the dense 0/1 membership matrix ``M`` (rows are nodes). Mutate only
    through :meth:`add` / :meth:`remove`.
    """

    def __init__(self, node_count: int, community_count: int,
                 memberships: Iterable[tuple[int, int]] = ()):
        if node_count < 0 or community_count < 0:
            raise ValueError("counts must be non-negative")
        self.node_count = int(node_count)
        self.community_count = int(community_count)
        self._matrix = np.zeros((self.node_count, self.community_count), dtype=np.int32)
        self._node_comms: list[set[int]] = [set() for _ in range(self.node_count)]
        self._comm_nodes: list[set[int]] = [set() for _ in range(self.community_count)]
        self._sizes = np.zeros(self.node_count, dtype=np.int64)
        for u, c in memberships:
            if not self.has(u, c):
                self.add(u, c)

    @classmethod
    def from_communities(cls, node_count: int, communities: Iterable[Iterable[int]],
                         community_count: int | None = None) -> Affiliation:
        comms = [list(c) for c in communities]
        k = len(comms) if community_count is None else community_count
        if k < len(comms):
            raise ValueError("community_count smaller than number of communities given")
        return cls(node_count, k, ((u, c) for c, members in enumerate(comms) for u in members))

    @classmethod
    def from_cover(cls, cover: Cover, node_count: int | None = None) -> Affiliation:
        n = cover.node_bound() if node_count is None else node_count
        return cls.from_communities(n, cover.communities)

    def _check(self, u: int, c: int) -> None:
        _check_node(self.node_count, u)
        if not 0 <= c < self.community_count:
            raise ValueError(f"community {c} out of range [0, {self.community_count})")

    def has(self, u: int, c: int) -> bool:
        self._check(u, c)
        return bool(self._matrix[u, c])

    def add(self, u: int, c: int) -> None:
        self._check(u, c)
        if self._matrix[u, c]:
            raise ValueError(f"node {u} already in community {c}")
        self._matrix[u, c] = 1
        self._node_comms[u].add(c)
        self._comm_nodes[c].add(u)
        self._sizes[u] += 1

    def remove(self, u: int, c: int) -> None:
        self._check(u, c)
        if not self._matrix[u, c]:
            raise ValueError(f"node {u} not in community {c}")
        self._matrix[u, c] = 0
        self._node_comms[u].discard(c)
        self._comm_nodes[c].discard(u)
        self._sizes[u] -= 1

    def community_set(self, u: int) -> frozenset[int]:
        """``S_u``: the communities node ``u`` belongs to."""
        _check_node(self.node_count, u)
        return frozenset(self._node_comms[u])

    def members(self, c: int) -> frozenset[int]:
        if not 0 <= c < self.community_count:
            raise ValueError(f"community {c} out of range [0, {self.community_count})")
        return frozenset(self._comm_nodes[c])

    def member_array(self, c: int) -> np.ndarray:
        return np.flatnonzero(self._matrix[:, c])

    @property
    def matrix(self) -> np.ndarray:
        """Read-only view of the membership matrix ``M``."""
        view = self._matrix.view()
        view.setflags(write=False)
        return view

    @property
    def set_sizes(self) -> np.ndarray:
        """``|S_u|`` for every node (read-only view)."""
        view = self._sizes.view()
        view.setflags(write=False)
        return view

    def community_sizes(self) -> np.ndarray:
        return self._matrix.sum(axis=0)

    @property
    def membership_count(self) -> int:
        return int(self._sizes.sum())

    def memberships(self) -> Iterator[tuple[int, int]]:
        for u, c in zip(*np.nonzero(self._matrix)):
            yield int(u), int(c)

    def copy(self) -> Affiliation:
        out = Affiliation.__new__(Affiliation)
        out.node_count = self.node_count
        out.community_count = self.community_count
        out._matrix = self._matrix.copy()
        out._node_comms = [set(s) for s in self._node_comms]
        out._comm_nodes = [set(s) for s in self._comm_nodes]
        out._sizes = self._sizes.copy()
        return out

    def to_cover(self) -> Cover:
        """Non-empty communities as a :class:`Cover` (empty ones dropped)."""
        return Cover(tuple(frozenset(s) for s in self._comm_nodes if s))

    def check(self) -> None:
        """Exhaustive consistency check of the three membership views."""
        for u in range(self.node_count):
            assert self._node_comms[u] == set(np.flatnonzero(self._matrix[u]).tolist())
            assert self._sizes[u] == len(self._node_comms[u])
            for c in self._node_comms[u]:
                assert u in self._comm_nodes[c]
        for c in range(self.community_count):
            assert self._comm_nodes[c] == set(np.flatnonzero(self._matrix[:, c]).tolist())
            for u in self._comm_nodes[c]:
                assert c in self._node_comms[u]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Affiliation):
            return NotImplemented
        return np.array_equal(self._matrix, other._matrix)

    __hash__ = None  # mutable

    def __repr__(self) -> str:
        return (f"Affiliation(node_count={self.node_count}, community_count={self.community_count}, "
                f"memberships={self.membership_count})")


def community_set(a: Affiliation, u: int) -> frozenset[int]:
    return a.community_set(u)


def shared_communities(a: Affiliation, u: int, v: int) -> frozenset[int]:
    """``C_uv = S_u & S_v``."""
    _check_node(a.node_count, u)
    _check_node(a.node_count, v)
    return frozenset(a._node_comms[u] & a._node_comms[v])


def jaccard(a: Affiliation, u: int, v: int) -> float:
    """Jaccard similarity of the two community sets; 0 when both are empty."""
    _check_node(a.node_count, u)
    _check_node(a.node_count, v)
    su, sv = a._node_comms[u], a._node_comms[v]
    inter = len(su & sv)
    if not inter:
        return 0.0
    return inter / (len(su) + len(sv) - inter)


def jaccard_pairs(matrix: np.ndarray, us: np.ndarray, vs: np.ndarray,
                  chunk: int = 1 << 18) -> np.ndarray:
    """Vectorized Jaccard for many pairs given a 0/1 membership matrix."""
    us = np.asarray(us, dtype=np.int64)
    vs = np.asarray(vs, dtype=np.int64)
    sizes = matrix.sum(axis=1)
    out = np.empty(len(us), dtype=np.float64)
    for s in range(0, len(us), chunk):
        a, b = us[s:s + chunk], vs[s:s + chunk]
        inter = np.einsum("ij,ij->i", matrix[a], matrix[b])
        union = sizes[a] + sizes[b] - inter
        out[s:s + chunk] = np.divide(inter, union, out=np.zeros(len(a)), where=union > 0)
    return out


def comember_pairs(a: Affiliation) -> np.ndarray:
    """All unordered pairs ``u < v`` sharing at least one community, as ``(P, 2)``."""
    n = a.node_count
    codes = []
    for c in range(a.community_count):
        m = a.member_array(c)
        if len(m) < 2:
            continue
        i, j = np.triu_indices(len(m), k=1)
        codes.append(m[i] * n + m[j])
    if not codes:
        return np.empty((0, 2), dtype=np.int64)
    codes = np.unique(np.concatenate(codes))
    return np.stack([codes // n, codes % n], axis=1)


@dataclass(frozen=True)
class Cover:
    """A collection of non-empty, possibly overlapping node sets."""

    communities: tuple[frozenset[int], ...]

    def __post_init__(self):
        comms = tuple(frozenset(int(x) for x in c) for c in self.communities)
        if any(not c for c in comms):
            raise ValueError("cover communities must be non-empty")
        object.__setattr__(self, "communities", comms)

    @classmethod
    def of(cls, communities: Iterable[Iterable[int]]) -> Cover:
        return cls(tuple(frozenset(c) for c in communities))

    def __len__(self) -> int:
        return len(self.communities)

    def __iter__(self) -> Iterator[frozenset[int]]:
        return iter(self.communities)

    def nodes(self) -> frozenset[int]:
        return frozenset().union(*self.communities) if self.communities else frozenset()

    def node_bound(self) -> int:
        ns = self.nodes()
        return max(ns) + 1 if ns else 0

    def unique(self) -> Cover:
        """Duplicate communities removed, first occurrence order kept."""
        return Cover(tuple(dict.fromkeys(self.communities)))

    def restrict(self, nodes: Iterable[int], min_size: int = 1) -> Cover:
        keep = frozenset(nodes)
        return Cover(tuple(r for c in self.communities if len(r := c & keep) >= max(min_size, 1)))

    def memberships_of(self, u: int) -> list[int]:
        return [i for i, c in enumerate(self.communities) if u in c]

    def same_as(self, other: Cover) -> bool:
        """Equality ignoring community order and duplicates."""
        return set(self.communities) == set(other.communities)
