"""Cover comparison scores: best-match F1, overlapping NMI and the Omega index.

Variants:

* F1 is the symmetric best-match average: every community is matched to
  its best-F1 partner in the other cover, both directions are averaged,
  and the two directions are averaged again.
* NMI is the Lancichinetti-Fortunato-Kertesz overlapping form, defined on
  binary membership vectors.
* Omega is the Collins-Dent chance-corrected agreement on the number of
  communities each node pair shares.

Every score deduplicates communities first, so repeated sets do not change it.
"""

from __future__ import annotations

from collections import Counter
from fractions import Fraction
from typing import Iterable

import numpy as np

from .graph import Cover


def _prepare(cover: Cover | Iterable[Iterable[int]], name: str) -> list[frozenset[int]]:
    if not isinstance(cover, Cover):
        cover = Cover.of(cover)
    comms = list(cover.unique().communities)
    if not comms:
        raise ValueError(f"{name} cover is empty")
    return comms


def _set_f1(a: frozenset[int], b: frozenset[int]) -> float:
    inter = len(a & b)
    if not inter:
        return 0.0
    return 2.0 * inter / (len(a) + len(b))


def f1_score(truth: Cover, detected: Cover) -> float:
    t = _prepare(truth, "truth")
    d = _prepare(detected, "detected")
    fwd = np.mean([max(_set_f1(x, y) for y in d) for x in t])
    bwd = np.mean([max(_set_f1(y, x) for x in t) for y in d])
    return float(0.5 * (fwd + bwd))


def _universe(covers: list[list[frozenset[int]]], node_universe: Iterable[int] | None) -> list[int]:
    nodes: set[int] = set()
    for c in covers:
        for s in c:
            nodes |= s
    if node_universe is not None:
        nodes |= set(node_universe)
    return sorted(nodes)


def _pair_levels(comms: list[frozenset[int]], index: dict[int, int]) -> np.ndarray:
    n = len(index)
    m = np.zeros((n, len(comms)), dtype=np.int64)
    for j, c in enumerate(comms):
        m[[index[u] for u in c], j] = 1
    shared = m @ m.T
    iu = np.triu_indices(n, k=1)
    return shared[iu]


def omega_index(truth: Cover, detected: Cover, node_universe: Iterable[int] | None = None,
                exact: bool = False) -> float | Fraction:
    """Chance-corrected agreement on per-pair co-membership counts.

    The node universe is the union of both covers plus ``node_universe``;
    pairs outside every community agree at level 0. With ``exact`` the
    score is returned as a :class:`~fractions.Fraction`.
    """
    t = _prepare(truth, "truth")
    d = _prepare(detected, "detected")
    nodes = _universe([t, d], node_universe)
    index = {u: i for i, u in enumerate(nodes)}
    lt = _pair_levels(t, index)
    ld = _pair_levels(d, index)
    n_pairs = len(lt)
    if n_pairs == 0:
        raise ValueError("omega index needs at least two nodes")
    agree = int(np.count_nonzero(lt == ld))
    ct, cd = Counter(lt.tolist()), Counter(ld.tolist())
    expected_num = sum(ct[j] * cd[j] for j in ct)
    obs = Fraction(agree, n_pairs)
    exp = Fraction(expected_num, n_pairs * n_pairs)
    if exp == 1:
        if obs != 1:
            raise ValueError("omega index undefined: degenerate expected agreement")
        score = Fraction(1)
    else:
        score = (obs - exp) / (1 - exp)
    return score if exact else float(score)


def _h(p: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(p > 0, -p * np.log2(p), 0.0)


def _membership(comms: list[frozenset[int]], index: dict[int, int]) -> np.ndarray:
    m = np.zeros((len(comms), len(index)), dtype=bool)
    for j, c in enumerate(comms):
        m[j, [index[u] for u in c]] = True
    return m


def _conditional_norm(x: np.ndarray, y: np.ndarray) -> float:
    """Mean over rows of ``x`` of ``H(X_k | Y) / H(X_k)``."""
    n = x.shape[1]
    xf, yf = x.astype(np.float64), y.astype(np.float64)
    n11 = xf @ yf.T
    nx = xf.sum(axis=1)[:, None]
    ny = yf.sum(axis=1)[None, :]
    n10 = nx - n11
    n01 = ny - n11
    n00 = n - n11 - n10 - n01
    p11, p10, p01, p00 = (c / n for c in (n11, n10, n01, n00))
    hx = _h(nx[:, 0] / n) + _h(1 - nx[:, 0] / n)
    hy = _h(ny[0] / n) + _h(1 - ny[0] / n)
    joint = _h(p11) + _h(p10) + _h(p01) + _h(p00)
    cond = joint - hy[None, :]
    admissible = _h(p11) + _h(p00) >= _h(p01) + _h(p10)
    cond = np.where(admissible, cond, np.inf)
    best = np.minimum(cond.min(axis=1), hx)
    # constant membership vectors carry no information to lose
    ratios = np.divide(best, hx, out=np.zeros_like(hx), where=hx > 0)
    return float(ratios.mean())


def overlapping_nmi(truth: Cover, detected: Cover,
                    node_universe: Iterable[int] | None = None) -> float:
    """LFK overlapping NMI: ``1 - (H(X|Y)_norm + H(Y|X)_norm) / 2``."""
    t = _prepare(truth, "truth")
    d = _prepare(detected, "detected")
    nodes = _universe([t, d], node_universe)
    index = {u: i for i, u in enumerate(nodes)}
    x, y = _membership(t, index), _membership(d, index)
    score = 1.0 - 0.5 * (_conditional_norm(x, y) + _conditional_norm(y, x))
    return float(min(1.0, max(0.0, score)))


def score_all(truth: Cover, detected: Cover,
              node_universe: Iterable[int] | None = None) -> dict[str, float]:
    return {
        "f1": f1_score(truth, detected),
        "nmi": overlapping_nmi(truth, detected, node_universe),
        "omega": omega_index(truth, detected, node_universe),
    }
