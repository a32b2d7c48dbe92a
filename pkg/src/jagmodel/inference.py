"""MCMC search for the maximum-likelihood community assignment.

A chain repeatedly proposes a one-node membership move (delete, add or
switch), scores it with the incremental likelihood difference and accepts
it outright when the likelihood improves, otherwise with probability
``exp(delta)``. Alpha is refit on the grid every ``alpha_refit_interval``
accepted moves. Several chains run from independent random starts and the
best assignment over all of them is reported.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ProposalExhausted
from .graph import Affiliation, Graph
from .models import (
    GridSpec,
    MembershipMove,
    ModelParams,
    MoveKind,
    fit_alpha,
    log_likelihood,
    log_likelihood_delta,
)

log = logging.getLogger(__name__)

KIND_CODES = {MoveKind.DELETE: 0, MoveKind.ADD: 1, MoveKind.SWITCH: 2}
_KINDS = (MoveKind.DELETE, MoveKind.ADD, MoveKind.SWITCH)


@dataclass(frozen=True)
class McmcConfig:
    community_count: int
    max_iters: int = 100_000
    patience: int = 2000
    restarts: int = 5
    batch: int = 1
    alpha_refit_interval: int = 50
    grid: GridSpec = field(default_factory=GridSpec)
    init_membership_prob: float | None = None  # None -> 1 / community_count
    epsilon: float = 1e-8
    seed: int = 0
    profile_alpha: bool = False  # score every proposal at its own best alpha

    def __post_init__(self):
        for name in ("community_count", "max_iters", "patience", "restarts", "batch",
                     "alpha_refit_interval"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        p = self.init_membership_prob
        if p is not None and not 0.0 < p <= 1.0:
            raise ValueError("init_membership_prob must be in (0, 1]")
        if not 0.0 <= self.epsilon < 1.0:
            raise ValueError("epsilon must be in [0, 1)")

    @property
    def membership_prob(self) -> float:
        if self.init_membership_prob is not None:
            return self.init_membership_prob
        return 1.0 / self.community_count

    def to_dict(self) -> dict:
        d = asdict(self)
        d["grid"] = asdict(self.grid)
        return d


@dataclass
class ChainResult:
    restart_index: int
    affiliation: Affiliation
    alpha: float
    log_likelihood: float
    iterations: int
    accepted: int
    trace_log_likelihood: np.ndarray
    trace_best: np.ndarray
    trace_accepted: np.ndarray
    trace_kind: np.ndarray

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.iterations if self.iterations else 0.0


@dataclass
class DetectionResult:
    best_affiliation: Affiliation
    alpha_hat: float
    best_log_likelihood: float
    restart_index: int
    chains: list[ChainResult]
    config: McmcConfig

    @property
    def trace(self) -> ChainResult:
        """The winning chain, whose per-iteration trace arrays describe the run."""
        return self.chains[self.restart_index]

    @property
    def iterations(self) -> int:
        return sum(c.iterations for c in self.chains)

    @property
    def acceptance_rate(self) -> float:
        it = self.iterations
        return sum(c.accepted for c in self.chains) / it if it else 0.0


def random_initial_assignment(g: Graph, cfg: McmcConfig,
                              seed: int | np.random.Generator | None = None) -> Affiliation:
    """Independent Bernoulli memberships; nodes left empty get one random community."""
    rng = np.random.default_rng(seed)
    n, k = g.node_count, cfg.community_count
    m = rng.random((n, k)) < cfg.membership_prob
    a = Affiliation(n, k)
    for u in range(n):
        comms = np.flatnonzero(m[u])
        if not len(comms):
            comms = [int(rng.integers(k))]
        for c in comms:
            a.add(u, int(c))
    return a


def _legal(a: Affiliation, kind: MoveKind) -> bool:
    total = a.node_count * a.community_count
    count = a.membership_count
    if kind is MoveKind.DELETE:
        return count > 0
    if kind is MoveKind.ADD:
        return count < total
    sizes = a.set_sizes
    return bool(np.any((sizes > 0) & (sizes < a.community_count)))


def propose_move(a: Affiliation, rng: np.random.Generator) -> MembershipMove:
    """Draw a move: kind uniform over the legal kinds, then a uniform target."""
    legal = [k for k in _KINDS if _legal(a, k)]
    if not legal:
        raise ProposalExhausted("no legal delete/add/switch move exists")
    # uniform over all three, redrawn until legal
    while True:
        kind = _KINDS[int(rng.integers(3))]
        if kind in legal:
            break
    m = a.matrix
    k = a.community_count
    if kind is MoveKind.DELETE:
        cell = int(rng.choice(np.flatnonzero(m)))
        return MembershipMove(kind, cell // k, remove_comm=cell % k)
    if kind is MoveKind.ADD:
        cell = int(rng.choice(np.flatnonzero(m == 0)))
        return MembershipMove(kind, cell // k, add_comm=cell % k)
    sizes = a.set_sizes
    u = int(rng.choice(np.flatnonzero((sizes > 0) & (sizes < k))))
    c1 = int(rng.choice(np.flatnonzero(m[u])))
    c2 = int(rng.choice(np.flatnonzero(m[u] == 0)))
    return MembershipMove(kind, u, remove_comm=c1, add_comm=c2)


def accept(delta: float, rng: np.random.Generator) -> bool:
    """Accept if delta > 0, else with probability exp(delta)."""
    if delta > 0:
        return True
    if math.isnan(delta) or delta == -math.inf:
        return False
    return bool(rng.random() < math.exp(delta))


class ChainState:
    """Mutable state of one chain: the assignment, alpha and current log-likelihood."""

    def __init__(self, g: Graph, a: Affiliation, cfg: McmcConfig):
        self.g = g
        self.a = a
        self.cfg = cfg
        self.alpha, self.ll = fit_alpha(g, a, cfg.grid, cfg.epsilon)
        self.accepted = 0

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.alpha, self.cfg.epsilon)

    def score(self, move: MembershipMove) -> float:
        if not self.cfg.profile_alpha:
            return log_likelihood_delta(self.g, self.a, self.params, move)
        move.apply(self.a)
        try:
            _, ll = fit_alpha(self.g, self.a, self.cfg.grid, self.cfg.epsilon)
        finally:
            move.revert(self.a)
        return ll - self.ll

    def refit(self) -> None:
        self.ll = log_likelihood(self.g, self.a, self.params)
        alpha, ll = fit_alpha(self.g, self.a, self.cfg.grid, self.cfg.epsilon)
        if ll > self.ll:
            self.alpha, self.ll = alpha, ll


def mcmc_step(state: ChainState, rng: np.random.Generator) -> tuple[bool, float, MembershipMove]:
    """One proposal/acceptance round; returns (accepted, delta, move)."""
    best_move, best_delta = None, -math.inf
    for _ in range(state.cfg.batch):
        move = propose_move(state.a, rng)
        delta = state.score(move)
        if best_move is None or delta > best_delta:
            best_move, best_delta = move, delta
    ok = accept(best_delta, rng)
    if ok:
        best_move.apply(state.a)
        state.accepted += 1
        if state.cfg.profile_alpha:
            state.refit()
        else:
            state.ll += best_delta
            if state.accepted % state.cfg.alpha_refit_interval == 0:
                state.refit()
    return ok, best_delta, best_move


def run_chain(g: Graph, cfg: McmcConfig, restart_index: int) -> ChainResult:
    rng = np.random.default_rng([cfg.seed, restart_index])
    a = random_initial_assignment(g, cfg, rng)
    state = ChainState(g, a, cfg)
    best_ll = state.ll
    best_matrix = a.matrix.copy()
    lls, bests, accs, kinds = [], [], [], []
    stale = 0
    it = 0
    for it in range(1, cfg.max_iters + 1):
        try:
            ok, _, move = mcmc_step(state, rng)
        except ProposalExhausted:
            it -= 1
            break
        lls.append(state.ll)
        accs.append(ok)
        kinds.append(KIND_CODES[move.kind])
        if state.ll > best_ll:
            best_ll = state.ll
            best_matrix = a.matrix.copy()
            stale = 0
        else:
            stale += 1
        bests.append(best_ll)
        if stale >= cfg.patience:
            break

    best = Affiliation(g.node_count, cfg.community_count, zip(*np.nonzero(best_matrix)))
    alpha, ll = fit_alpha(g, best, cfg.grid, cfg.epsilon)
    log.debug("chain %d: %d iterations, %d accepted, best log L %.4f (alpha %.3f)",
              restart_index, it, state.accepted, ll, alpha)
    return ChainResult(
        restart_index=restart_index,
        affiliation=best,
        alpha=alpha,
        log_likelihood=ll,
        iterations=it,
        accepted=state.accepted,
        trace_log_likelihood=np.asarray(lls, dtype=np.float64),
        trace_best=np.asarray(bests, dtype=np.float64),
        trace_accepted=np.asarray(accs, dtype=bool),
        trace_kind=np.asarray(kinds, dtype=np.int8),
    )


def _run_chain_args(args):
    return run_chain(*args)


def detect_communities(g: Graph, cfg: McmcConfig, workers: int = 1) -> DetectionResult:
    """Run ``cfg.restarts`` chains and return the best assignment found.

    Chains are independent (their RNG streams derive from ``(seed,
    restart_index)``), so ``workers > 1`` changes only wall time.
    """
    if g.node_count < 1:
        raise ValueError("graph has no nodes")
    jobs = [(g, cfg, r) for r in range(cfg.restarts)]
    if workers > 1 and cfg.restarts > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chains = list(pool.map(_run_chain_args, jobs))
    else:
        chains = [run_chain(*job) for job in jobs]
    winner = chains[0]
    for c in chains[1:]:
        if c.log_likelihood > winner.log_likelihood:
            winner = c
    return DetectionResult(
        best_affiliation=winner.affiliation.copy(),
        alpha_hat=winner.alpha,
        best_log_likelihood=winner.log_likelihood,
        restart_index=winner.restart_index,
        chains=chains,
        config=cfg,
    )
