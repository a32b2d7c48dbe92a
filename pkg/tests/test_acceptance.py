"""Acceptance criteria, each at its stated tolerance and runtime budget.

Every test records one PASS/FAIL line, collected in the terminal summary.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from jagmodel.cli import main
from jagmodel.generator import (
    PlantedConfig,
    ProcessConfig,
    disjoint_union,
    isolated_affiliation,
    pairwise_overlap_affiliation,
    planted_affiliation,
    sample_agm_graph,
    sample_jag_graph,
    simulate_event_process,
    coattendance_table_exact,
)
from jagmodel.graph import Affiliation, Cover, shared_communities
from jagmodel.inference import McmcConfig, detect_communities, propose_move
from jagmodel.io import load_dataset
from jagmodel.metrics import f1_score, omega_index, overlapping_nmi
from jagmodel.models import (
    AgmParams,
    GridSpec,
    ModelParams,
    agm_edge_prob,
    fit_alpha,
    log_likelihood_delta,
    log_likelihood_naive,
)
from jagmodel.validate import binning_experiment, isolated_density_experiment

from conftest import random_instance


def within_sigma(successes: int, trials: int, p: float, k: float = 3.0) -> bool:
    sigma = math.sqrt(p * (1 - p) / trials)
    return abs(successes / trials - p) <= k * sigma


def test_theorem_oracle_identity(acceptance):
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    bad = pairs = 0
    for _ in range(200):
        n = int(rng.integers(2, 13))
        k = int(rng.integers(1, 9))
        m = rng.random((n, k)) < rng.uniform(0.2, 0.7)
        a = Affiliation(n, k, zip(*np.nonzero(m)))
        for (u, v), prob in coattendance_table_exact(a).items():
            su, sv = a.community_set(u), a.community_set(v)
            union = len(su | sv)
            j = Fraction(len(su & sv), union) if union else Fraction(0)
            pairs += 1
            bad += prob != j
    elapsed = time.perf_counter() - start
    ok = bad == 0 and elapsed < 60
    assert acceptance(1, ok, f"{pairs} pairs, {bad} mismatches, {elapsed:.1f}s"), "oracle mismatch"


def distinct_jaccard_affiliation(count: int, max_union: int):
    """One node pair per distinct J = i/j, with S_v = first i and S_u = first j communities."""
    seen, targets = set(), []
    for j in range(1, max_union + 1):
        for i in range(1, j + 1):
            if Fraction(i, j) not in seen:
                seen.add(Fraction(i, j))
                targets.append((i, j))
    rng = np.random.default_rng(5)
    chosen = [targets[t] for t in sorted(rng.choice(len(targets), size=count, replace=False))]
    cells = []
    for p, (i, j) in enumerate(chosen):
        cells += [(2 * p, c) for c in range(j)] + [(2 * p + 1, c) for c in range(i)]
    return Affiliation(2 * count, max_union, cells), [Fraction(i, j) for i, j in chosen]


def test_event_process_frequency(acceptance):
    start = time.perf_counter()
    a, js = distinct_jaccard_affiliation(20, 8)
    rounds = 50_000
    _, counts = simulate_event_process(a, ProcessConfig(rounds, 1.0, seed=11))
    worst = 0.0
    ok = len(set(js)) == 20
    for p, j in enumerate(js):
        hits = int(counts[2 * p, 2 * p + 1])
        sigma = math.sqrt(float(j) * (1 - float(j)) / rounds)
        dev = abs(hits / rounds - float(j))
        if sigma:
            worst = max(worst, dev / sigma)
        ok &= within_sigma(hits, rounds, float(j))
    elapsed = time.perf_counter() - start
    ok &= elapsed < 60
    assert acceptance(2, ok, f"20 pairs, worst deviation {worst:.2f} sigma, {elapsed:.1f}s")


def test_linearity_recovery(acceptance):
    start = time.perf_counter()
    a = planted_affiliation(PlantedConfig(3000, 20, 1, 3, seed=21))
    g = sample_jag_graph(a, ModelParams(0.5, 1e-8), seed=21)
    rep = binning_experiment(g, a, 1_000_000, bins=10, seed=22)
    checked, worst, ok_bins = 0, 0.0, True
    for n_pairs, n_edges, jm in zip(rep.pair_count, rep.edge_count, rep.jaccard_mean):
        if n_pairs < 1000:
            continue
        p = 0.5 * jm + 1e-8 * (1 - 0.5 * jm)
        checked += 1
        worst = max(worst, abs(n_edges / n_pairs - p) / math.sqrt(p * (1 - p) / n_pairs))
        ok_bins &= within_sigma(int(n_edges), int(n_pairs), p)
    elapsed = time.perf_counter() - start
    ok = 0.45 <= rep.fitted_slope <= 0.55 and ok_bins and checked > 0 and elapsed < 120
    assert acceptance(3, ok, f"slope {rep.fitted_slope:.4f}, {checked} bins checked, "
                             f"worst {worst:.2f} sigma, {elapsed:.1f}s")


def test_isolated_density(acceptance):
    start = time.perf_counter()
    rows, ok = [], True
    for i, alpha in enumerate((0.26, 0.41, 0.71)):
        a = disjoint_union(planted_affiliation(PlantedConfig(300, 6, 1, 3, seed=i)),
                           isolated_affiliation(5, 40))
        g = sample_jag_graph(a, ModelParams(alpha), seed=40 + i)
        rep = isolated_density_experiment(g, a, min_size=5, max_count=5, seed=i, alpha=alpha)
        ok &= len(rep.communities) == 5
        ok &= abs(rep.mean - alpha) <= 0.03 and rep.std <= 0.03
        rows.append(f"{alpha}: {rep.summary()['record']}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 60
    assert acceptance(4, ok, f"{'; '.join(rows)}, {elapsed:.1f}s")


def test_likelihood_delta_matches_naive(acceptance):
    start = time.perf_counter()
    rng = np.random.default_rng(55)
    checked, worst = 0, 0.0
    for _ in range(100):
        n = int(rng.integers(5, 61))
        k = int(rng.integers(2, 7))
        g, a = random_instance(rng, n, k, p_member=rng.uniform(0.1, 0.5),
                               p_edge=rng.uniform(0.05, 0.4))
        params = ModelParams(float(rng.uniform(0.05, 0.95)), 1e-8)
        before = log_likelihood_naive(g, a, params)
        for _ in range(3):
            move = propose_move(a, rng)
            fast = log_likelihood_delta(g, a, params, move)
            move.apply(a)
            slow = log_likelihood_naive(g, a, params) - before
            move.revert(a)
            rel = abs(fast - slow) / max(abs(slow), 1e-300)
            worst = max(worst, rel)
            checked += 1
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 60
    assert acceptance(5, ok, f"{checked} moves, worst relative error {worst:.2e}, {elapsed:.1f}s")


def test_alpha_grid_fit(acceptance):
    start = time.perf_counter()
    rows, ok = [], True
    for i, alpha in enumerate((0.2, 0.5, 0.8)):
        a = planted_affiliation(PlantedConfig(600, 5, 1, 2, seed=60 + i))
        assert min(a.community_sizes()) >= 100
        g = sample_jag_graph(a, ModelParams(alpha), seed=70 + i)
        hat, _ = fit_alpha(g, a, GridSpec(step=0.01))
        ok &= abs(hat - alpha) <= 0.05
        rows.append(f"{alpha} -> {hat:.2f}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 60
    assert acceptance(6, ok, f"{', '.join(rows)}, {elapsed:.1f}s")


@pytest.mark.slow
def test_detection_recovery(acceptance):
    start = time.perf_counter()
    truth_aff = pairwise_overlap_affiliation(3, 30, 5)
    truth = truth_aff.to_cover()
    scores, monotone = [], True
    for seed in range(10):
        g = sample_jag_graph(truth_aff, ModelParams(0.8), seed=seed)
        res = detect_communities(g, McmcConfig(3, restarts=5, seed=seed))
        for chain in res.chains:
            monotone &= bool(np.all(np.diff(chain.trace_best) >= 0))
        detected = res.best_affiliation.to_cover()
        scores.append(f1_score(truth, detected) if len(detected) else 0.0)
    elapsed = time.perf_counter() - start
    mean = float(np.mean(scores))
    ok = mean >= 0.85 and monotone and elapsed < 300
    assert acceptance(7, ok, f"mean F1 {mean:.3f} (min {min(scores):.3f}), "
                             f"monotone best traces: {monotone}, {elapsed:.1f}s")


def test_metric_golden_values(acceptance):
    c = Cover.of([[0, 1, 2], [2, 3, 4], [5, 6]])
    identical = (f1_score(c, c), overlapping_nmi(c, c), float(omega_index(c, c)))
    omega = omega_index(Cover.of([[1, 2]]), Cover.of([[3, 4]]), exact=True)
    f1 = f1_score(Cover.of([[1, 2, 3, 4]]), Cover.of([[1, 2, 3, 5]]))
    ok = (all(abs(x - 1.0) <= 1e-12 for x in identical) and omega == Fraction(-1, 5)
          and abs(f1 - 0.75) <= 1e-12)
    assert acceptance(8, ok, f"identical {identical}, omega {omega}, f1 {f1!r}")


def test_cli_determinism(tmp_path, acceptance):
    data, out = tmp_path / "data", tmp_path / "out"
    gen = ["generate", "--layout", "blocks", "--communities", "3", "--size", "20",
           "--overlap", "4", "--alpha", "0.8", "--seed", "9", "--out", str(data)]
    det = ["detect", "--graph", str(data / "graph.txt"), "--num-communities", "3",
           "--restarts", "1", "--seed", "7", "--out", str(out)]
    snapshots = []
    for _ in range(2):
        assert main(gen) == 0 and main(det) == 0
        snapshots.append({p.relative_to(tmp_path): p.read_bytes()
                          for p in sorted(tmp_path.rglob("*")) if p.is_file()})
    g, cover, _ = load_dataset(data / "graph.txt", data / "communities.txt")
    ok = snapshots[0] == snapshots[1] and len(snapshots[0]) >= 5 and len(cover) == 3
    assert acceptance(9, ok, f"{len(snapshots[0])} files byte-identical: {snapshots[0] == snapshots[1]}")


def test_agm_evaluator(acceptance):
    n = 448  # 100128 node pairs, each an independent trial
    a = Affiliation.from_communities(n, [range(n), range(n)])
    params = AgmParams((0.5, 0.5))
    p = agm_edge_prob(a, params, 0, 1)
    g = sample_agm_graph(a, params, seed=3)
    trials = n * (n - 1) // 2
    ok = p == 0.75 and len(shared_communities(a, 0, 1)) == 2 and within_sigma(g.edge_count, trials, 0.75)
    assert acceptance(10, ok, f"p = {p}, frequency {g.edge_count / trials:.4f} over {trials} trials")
