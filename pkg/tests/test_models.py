import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jagmodel.generator import pairwise_overlap_affiliation, sample_jag_graph
from jagmodel.graph import Affiliation, Graph, jaccard
from jagmodel.models import (
    AgmParams,
    GridSpec,
    MembershipMove,
    ModelParams,
    MoveKind,
    agm_edge_prob,
    fit_alpha,
    fit_alpha_from_stats,
    jag_edge_prob,
    likelihood_from_stats,
    log_likelihood,
    log_likelihood_delta,
    log_likelihood_naive,
    pair_statistics,
)

from conftest import affiliations, graphs_with_affiliations, random_instance


def test_jag_edge_prob_values():
    a = Affiliation.from_communities(4, [[0, 1, 2], [2, 3], [2]])
    # isolated-community pair, J = 1
    assert jag_edge_prob(a, ModelParams(0.26, 0.0), 0, 1) == pytest.approx(0.26)
    b = Affiliation.from_communities(2, [[0], [1]])
    assert jag_edge_prob(b, ModelParams(0.9, 0.0), 0, 1) == 0.0
    # S_2 = {0,1,2}, S_3 = {1}: J = 1/3
    assert jag_edge_prob(a, ModelParams(0.5, 0.0), 2, 3) == pytest.approx(1 / 6, abs=1e-16)


def test_jag_edge_prob_epsilon_bounds():
    b = Affiliation.from_communities(2, [[0], [1]])
    assert jag_edge_prob(b, ModelParams(0.9, 1e-3), 0, 1) == pytest.approx(1e-3)


@given(affiliations(), st.floats(0, 1), st.floats(0, 1))
def test_jag_edge_prob_equals_alpha_times_jaccard(a, alpha, beta):
    for u in range(a.node_count):
        for v in range(a.node_count):
            p = jag_edge_prob(a, ModelParams(alpha, 0.0), u, v)
            assert p == pytest.approx(alpha * jaccard(a, u, v), rel=1e-15, abs=1e-300)
            q = jag_edge_prob(a, ModelParams(max(alpha, beta), 0.0), u, v)
            assert q >= p


def test_jag_edge_prob_monotone_in_jaccard():
    # node 0 vs nodes with increasing overlap
    a = Affiliation.from_communities(4, [[0, 1, 2, 3], [0, 2, 3], [0, 3], [0]])
    ps = [jag_edge_prob(a, ModelParams(0.7), 0, v) for v in (1, 2, 3)]
    assert ps == sorted(ps)


def test_agm_edge_prob_examples():
    a = Affiliation.from_communities(3, [[0, 1], [0, 1], [2]])
    assert agm_edge_prob(a, AgmParams((0.3, 0.0, 0.9)), 0, 1) == pytest.approx(0.3)
    assert agm_edge_prob(a, AgmParams((0.5, 0.5, 0.9)), 0, 1) == pytest.approx(0.75)
    assert agm_edge_prob(a, AgmParams((0.5, 0.5, 0.9)), 0, 2) == 0.0
    with pytest.raises(ValueError):
        agm_edge_prob(a, AgmParams((0.5,)), 0, 1)


def test_agm_two_communities_by_coin_enumeration():
    p = [0.5, 0.5]
    total = 0.0
    for coins in itertools.product([0, 1], repeat=2):
        weight = math.prod(pk if c else 1 - pk for c, pk in zip(coins, p))
        total += weight * any(coins)
    a = Affiliation.from_communities(2, [[0, 1], [0, 1]])
    assert agm_edge_prob(a, AgmParams(tuple(p)), 0, 1) == pytest.approx(total)


@given(st.lists(st.floats(0, 1), min_size=3, max_size=3), st.permutations([0, 1, 2]))
def test_agm_order_invariant_and_monotone(probs, perm):
    a = Affiliation.from_communities(2, [[0, 1]] * 3)
    base = agm_edge_prob(a, AgmParams(tuple(probs)), 0, 1)
    permuted = agm_edge_prob(a, AgmParams(tuple(probs[i] for i in perm)), 0, 1)
    assert base == pytest.approx(permuted)
    bumped = [min(1.0, x + 0.1) for x in probs]
    assert agm_edge_prob(a, AgmParams(tuple(bumped)), 0, 1) >= base - 1e-15


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams(1.5)
    with pytest.raises(ValueError):
        ModelParams(0.5, 1.0)
    with pytest.raises(ValueError):
        AgmParams((0.2, 1.2))
    with pytest.raises(ValueError):
        GridSpec(step=0)


def test_log_likelihood_empty_graph_no_memberships():
    n = 7
    g, a = Graph(n), Affiliation(n, 2)
    want = math.comb(n, 2) * math.log1p(-1e-8)
    assert log_likelihood(g, a, ModelParams(0.4, 1e-8)) == pytest.approx(want, rel=1e-12)


def test_log_likelihood_single_pair():
    g = Graph(2, [(0, 1)])
    a = Affiliation.from_communities(2, [[0, 1]])
    assert log_likelihood(g, a, ModelParams(0.7, 0.0)) == pytest.approx(math.log(0.7))


def test_log_likelihood_size_mismatch():
    with pytest.raises(ValueError):
        log_likelihood(Graph(3), Affiliation(4, 1), ModelParams(0.5))


def test_log_likelihood_zero_jaccard_edge_without_background():
    g = Graph(2, [(0, 1)])
    a = Affiliation.from_communities(2, [[0], [1]])
    assert log_likelihood(g, a, ModelParams(0.5, 0.0)) == -math.inf
    assert log_likelihood_naive(g, a, ModelParams(0.5, 0.0)) == -math.inf


@given(graphs_with_affiliations(), st.floats(0, 1), st.sampled_from([1e-8, 1e-3, 0.05]))
def test_log_likelihood_matches_naive(ga, alpha, eps):
    g, a = ga
    params = ModelParams(alpha, eps)
    fast = log_likelihood(g, a, params)
    slow = log_likelihood_naive(g, a, params)
    if math.isinf(slow):
        assert fast == slow
    else:
        assert fast == pytest.approx(slow, rel=1e-9, abs=1e-9)


def test_log_likelihood_matches_naive_at_scale():
    rng = np.random.default_rng(3)
    for _ in range(20):
        n = int(rng.integers(20, 61))
        g, a = random_instance(rng, n, int(rng.integers(1, 7)))
        params = ModelParams(float(rng.uniform(0.05, 0.95)), 1e-8)
        assert log_likelihood(g, a, params) == pytest.approx(
            log_likelihood_naive(g, a, params), rel=1e-9)


def _all_moves(a):
    for u in range(a.node_count):
        s = a.community_set(u)
        out = [c for c in range(a.community_count) if c not in s]
        for c in s:
            yield MembershipMove(MoveKind.DELETE, u, remove_comm=c)
            for d in out:
                yield MembershipMove(MoveKind.SWITCH, u, remove_comm=c, add_comm=d)
        for d in out:
            yield MembershipMove(MoveKind.ADD, u, add_comm=d)


@given(graphs_with_affiliations(max_nodes=9, max_communities=4), st.floats(0.01, 0.99))
def test_delta_matches_full_recompute(ga, alpha):
    g, a = ga
    params = ModelParams(alpha, 1e-6)
    base = log_likelihood(g, a, params)
    for move in _all_moves(a):
        delta = log_likelihood_delta(g, a, params, move)
        b = a.copy()
        move.apply(b)
        assert delta == pytest.approx(log_likelihood(g, b, params) - base, rel=1e-9, abs=1e-9)


def test_delta_random_moves_30_nodes():
    rng = np.random.default_rng(11)
    g, a = random_instance(rng, 30, 5)
    params = ModelParams(0.6)
    base = log_likelihood_naive(g, a, params)
    moves = list(_all_moves(a))
    for i in rng.choice(len(moves), size=40, replace=False):
        move = moves[i]
        b = a.copy()
        move.apply(b)
        want = log_likelihood_naive(g, b, params) - base
        assert log_likelihood_delta(g, a, params, move) == pytest.approx(want, rel=1e-9, abs=1e-9)


def test_delta_zero_for_unchanged_set():
    g = Graph(3, [(0, 1)])
    a = Affiliation.from_communities(3, [[0, 1], [2]])
    move = MembershipMove(MoveKind.ADD, 2, add_comm=0)
    b = a.copy()
    move.apply(b)
    back = MembershipMove(MoveKind.DELETE, 2, remove_comm=0)
    assert log_likelihood_delta(g, b, ModelParams(0.5), back) == pytest.approx(
        -log_likelihood_delta(g, a, ModelParams(0.5), move))


def test_delta_minus_infinity_when_only_membership_deleted_and_no_background():
    g = Graph(2, [(0, 1)])
    a = Affiliation.from_communities(2, [[0, 1]])
    move = MembershipMove(MoveKind.DELETE, 0, remove_comm=0)
    assert log_likelihood_delta(g, a, ModelParams(0.5, 0.0), move) == -math.inf


def test_invalid_moves_rejected():
    g = Graph(2)
    a = Affiliation.from_communities(2, [[0], [1]])
    for move in (MembershipMove(MoveKind.DELETE, 0, remove_comm=1),
                 MembershipMove(MoveKind.ADD, 0, add_comm=0),
                 MembershipMove(MoveKind.SWITCH, 0, remove_comm=0),
                 MembershipMove(MoveKind.ADD, 5, add_comm=0)):
        with pytest.raises(ValueError):
            log_likelihood_delta(g, a, ModelParams(0.5), move)


def test_grid_points():
    pts = GridSpec().points()
    assert len(pts) == 101 and pts[0] == 0.0 and pts[-1] == 1.0


def test_fit_alpha_edgeless_picks_smallest():
    a = Affiliation.from_communities(5, [range(5)])
    alpha, _ = fit_alpha(Graph(5), a, GridSpec(lo=0.1))
    assert alpha == pytest.approx(0.1)


def test_fit_alpha_complete_isolated_picks_largest():
    a = Affiliation.from_communities(6, [range(6)])
    g = Graph(6, list(itertools.combinations(range(6), 2)))
    alpha, ll = fit_alpha(g, a, GridSpec())
    assert alpha == 1.0
    assert ll == pytest.approx(log_likelihood(g, a, ModelParams(1.0)))


def test_fit_alpha_ties_to_smaller():
    # no co-member pairs: likelihood flat in alpha
    a = Affiliation.from_communities(4, [[0], [1]])
    alpha, _ = fit_alpha(Graph(4, [(2, 3)]), a)
    assert alpha == 0.0


def test_fit_alpha_empty_grid():
    a = Affiliation.from_communities(3, [range(3)])
    stats = pair_statistics(Graph(3), a)

    class EmptyGrid(GridSpec):
        def points(self, *args, **kwargs):
            return np.empty(0)

    with pytest.raises(ValueError):
        fit_alpha_from_stats(stats, EmptyGrid(), 1e-8)


def test_fit_alpha_recovers_generating_alpha():
    a = pairwise_overlap_affiliation(2, 100, 10)
    g = sample_jag_graph(a, ModelParams(0.5), seed=1)
    alpha, _ = fit_alpha(g, a)
    assert 0.45 <= alpha <= 0.55


def test_fit_alpha_refined_grid_close_to_plain():
    a = pairwise_overlap_affiliation(3, 60, 10)
    g = sample_jag_graph(a, ModelParams(0.37), seed=2)
    plain, _ = fit_alpha(g, a, GridSpec(step=0.001))
    refined, _ = fit_alpha(g, a, GridSpec(refine=True))
    assert abs(plain - refined) <= 0.005


@given(graphs_with_affiliations(max_nodes=10))
def test_likelihood_unimodal_in_alpha(ga):
    g, a = ga
    stats = pair_statistics(g, a)
    fine = np.linspace(0, 1, 1001)
    vals = likelihood_from_stats(stats, fine, 0.0)
    finite = np.isfinite(vals)
    v = vals[finite]
    if len(v) < 3:
        return
    peak = int(np.argmax(v))
    assert np.all(np.diff(v[:peak + 1]) >= -1e-9)
    assert np.all(np.diff(v[peak:]) <= 1e-9)
    coarse, _ = fit_alpha(g, a, GridSpec(), epsilon=0.0)
    assert abs(coarse - fine[finite][peak]) <= 0.01 + 1e-12
