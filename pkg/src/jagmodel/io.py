"""Reading and writing graphs and covers, plus ego-subnetwork sampling.

Edge lists are whitespace-separated label pairs with ``#`` comments.
Community files hold one community per line. Labels are mapped to dense
ids in first-appearance order by a :class:`LabelMap` that graph and cover
files share.
"""

from __future__ import annotations

import json
import logging
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Literal, NamedTuple

import numpy as np

from .errors import ParseError, ResolutionError, SamplingExhausted
from .graph import Cover, Graph

log = logging.getLogger(__name__)

UnknownPolicy = Literal["extend", "strict", "lenient"]


class LabelMap:
    """Bidirectional label <-> dense id dictionary."""

    def __init__(self, labels: Iterable[str] = ()):
        self._ids: dict[str, int] = {}
        self._labels: list[str] = []
        for lab in labels:
            self.add(lab)

    def add(self, label: str) -> int:
        i = self._ids.get(label)
        if i is None:
            i = self._ids[label] = len(self._labels)
            self._labels.append(label)
        return i

    def get(self, label: str) -> int | None:
        return self._ids.get(label)

    def __getitem__(self, label: str) -> int:
        return self._ids[label]

    def __contains__(self, label: str) -> bool:
        return label in self._ids

    def __len__(self) -> int:
        return len(self._labels)

    def label(self, i: int) -> str:
        return self._labels[i]

    @property
    def labels(self) -> list[str]:
        return list(self._labels)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, LabelMap) and self._labels == other._labels

    @classmethod
    def identity(cls, n: int) -> LabelMap:
        return cls(str(i) for i in range(n))


class ParsedEdgeList(NamedTuple):
    graph: Graph
    labels: LabelMap
    duplicates: int
    self_loops: int


def _open_text(path: str | os.PathLike):
    try:
        return open(path, encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror}", str(path)) from exc


def parse_edge_list(path: str | os.PathLike, labels: LabelMap | None = None) -> ParsedEdgeList:
    labels = LabelMap() if labels is None else labels
    pairs: list[tuple[int, int]] = []
    with _open_text(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            tok = s.split()
            if len(tok) != 2:
                raise ParseError(f"expected 2 tokens, got {len(tok)}", str(path), lineno)
            pairs.append((labels.add(tok[0]), labels.add(tok[1])))
    g = Graph(len(labels), pairs)
    if g.dropped_duplicates or g.dropped_self_loops:
        log.warning("%s: dropped %d duplicate edges and %d self-loops",
                    path, g.dropped_duplicates, g.dropped_self_loops)
    return ParsedEdgeList(g, labels, g.dropped_duplicates, g.dropped_self_loops)


def parse_community_file(path: str | os.PathLike, labels: LabelMap | None = None,
                         unknown: UnknownPolicy = "extend", min_size: int = 1) -> Cover:
    """One community per line; blank and ``#`` lines skipped.

    ``unknown`` decides what happens to labels missing from ``labels``:
    ``extend`` adds them, ``strict`` raises :class:`ResolutionError`,
    ``lenient`` drops them (and any community left empty) with a warning.
    """
    labels = LabelMap() if labels is None else labels
    comms: list[frozenset[int]] = []
    skipped = 0
    with _open_text(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            members = set()
            for tok in s.split():
                if unknown == "extend":
                    members.add(labels.add(tok))
                    continue
                i = labels.get(tok)
                if i is None:
                    if unknown == "strict":
                        raise ResolutionError(f"{path}:{lineno}: unknown node label {tok!r}")
                    skipped += 1
                    continue
                members.add(i)
            if not members:
                log.warning("%s:%d: community has no known nodes, dropped", path, lineno)
                continue
            if len(members) >= min_size:
                comms.append(frozenset(members))
    if skipped:
        log.warning("%s: skipped %d unknown labels", path, skipped)
    return Cover(tuple(comms))


def load_dataset(edge_path: str | os.PathLike, community_path: str | os.PathLike,
                 unknown: UnknownPolicy = "extend") -> tuple[Graph, Cover, LabelMap]:
    """Parse a graph and its ground truth against one label map.

    Nodes that appear only in the community file become isolated nodes.
    """
    g, labels, _, _ = parse_edge_list(edge_path)
    cover = parse_community_file(community_path, labels, unknown=unknown)
    if len(labels) > g.node_count:
        g = g.with_node_count(len(labels))
    return g, cover, labels


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    """Write via a temp file in the same directory, then rename."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise OSError(f"{path}: {exc.strerror or exc}") from exc


def format_edge_list(g: Graph, labels: LabelMap | None = None) -> str:
    lab = (lambda i: str(i)) if labels is None else labels.label
    lines = [f"# nodes: {g.node_count} edges: {g.edge_count}"]
    lines += [f"{lab(u)}\t{lab(v)}" for u, v in g]
    return "\n".join(lines) + "\n"


def write_edge_list(path: str | os.PathLike, g: Graph, labels: LabelMap | None = None) -> None:
    atomic_write_text(path, format_edge_list(g, labels))


def format_cover(cover: Cover | Iterable[Iterable[int]], labels: LabelMap | None = None) -> str:
    lab = (lambda i: str(i)) if labels is None else labels.label
    lines = []
    for c in cover:
        if c:
            lines.append("\t".join(lab(u) for u in sorted(c)))
    return "\n".join(lines) + ("\n" if lines else "")


def write_community_file(path: str | os.PathLike, cover: Cover | Iterable[Iterable[int]],
                         labels: LabelMap | None = None) -> None:
    atomic_write_text(path, format_cover(cover, labels))


def write_json(path: str | os.PathLike, obj) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_csv(path: str | os.PathLike, header: list[str], rows: Iterable[Iterable]) -> None:
    def fmt(x):
        if isinstance(x, (bool, np.bool_)):
            return str(int(x))
        if isinstance(x, (float, np.floating)):
            return repr(float(x))
        return str(x)
    lines = [",".join(header)] + [",".join(fmt(x) for x in r) for r in rows]
    atomic_write_text(path, "\n".join(lines) + "\n")


def label_edges(g: Graph, labels: LabelMap) -> set[frozenset[str]]:
    """Edge set in label space, for comparing graphs parsed separately."""
    return {frozenset((labels.label(u), labels.label(v))) for u, v in g}


@dataclass(frozen=True)
class SubnetSamplerConfig:
    k: int = 2
    count: int = 500
    seed: int = 0
    min_community_size: int = 2

    def __post_init__(self):
        if self.k < 1 or self.count < 1:
            raise ValueError("k and count must be >= 1")


@dataclass
class Subnetwork:
    graph: Graph
    cover: Cover
    nodes: np.ndarray  # new id -> original id
    seed_node: int


def sample_subnetworks(g: Graph, cover: Cover, cfg: SubnetSamplerConfig) -> list[Subnetwork]:
    """Ego subnetworks around random nodes with at least ``k`` memberships.

    Each sample is the induced subgraph on every node sharing a community
    with the seed node. The ground truth is restricted to that node set;
    communities left with fewer than ``min_community_size`` members are
    dropped.
    """
    member_of: dict[int, list[int]] = {}
    for j, c in enumerate(cover.communities):
        for u in c:
            member_of.setdefault(u, []).append(j)
    seeds = sorted(u for u, cs in member_of.items() if len(cs) >= cfg.k and u < g.node_count)
    if not seeds:
        raise SamplingExhausted(f"no node belongs to at least {cfg.k} communities", 0)
    rng = np.random.default_rng(cfg.seed)
    out = []
    for u in rng.choice(seeds, size=cfg.count, replace=True):
        u = int(u)
        nodes = sorted(frozenset().union(*(cover.communities[j] for j in member_of[u])))
        sub, back = g.subgraph(nodes)
        remap = {int(old): new for new, old in enumerate(back)}
        restricted = cover.restrict(nodes, cfg.min_community_size)
        new_cover = Cover(tuple(frozenset(remap[x] for x in c) for c in restricted.unique()))
        out.append(Subnetwork(sub, new_cover, back, u))
    return out


def write_subnetwork(out_dir: str | os.PathLike, sub: Subnetwork, labels: LabelMap | None = None) -> None:
    out_dir = Path(out_dir)
    lab = (lambda i: str(i)) if labels is None else labels.label
    names = LabelMap(lab(int(o)) for o in sub.nodes)
    write_edge_list(out_dir / "graph.txt", sub.graph, names)
    write_community_file(out_dir / "communities.txt", sub.cover, names)
    write_csv(out_dir / "mapping.csv", ["local_id", "label"],
              ((i, names.label(i)) for i in range(len(names))))


REPORT_KEYS = ("alpha_hat", "log_likelihood", "iterations", "acceptance_rate",
               "restarts", "seed", "config")


def detection_report(result, extra_config: dict | None = None) -> dict:
    cfg = result.config.to_dict()
    if extra_config:
        cfg.update(extra_config)
    return {
        "alpha_hat": result.alpha_hat,
        "log_likelihood": result.best_log_likelihood,
        "iterations": result.iterations,
        "acceptance_rate": result.acceptance_rate,
        "restarts": result.config.restarts,
        "seed": result.config.seed,
        "config": cfg,
    }


def write_detection_result(result, labels: LabelMap | None, out_dir: str | os.PathLike,
                           extra_config: dict | None = None) -> dict[str, Path]:
    """Write ``communities.txt`` (original labels) and ``report.json``."""
    out_dir = Path(out_dir)
    paths = {"communities": out_dir / "communities.txt", "report": out_dir / "report.json"}
    write_community_file(paths["communities"], result.best_affiliation.to_cover(), labels)
    write_json(paths["report"], detection_report(result, extra_config))
    return paths
