"""Run the observation experiments on synthetic JAG data and print the tables.

    python scripts/run_validations.py --out runs/validations
"""

import argparse
import json
from pathlib import Path

import numpy as np

from jagmodel.generator import (
    PlantedConfig,
    ProcessConfig,
    disjoint_union,
    isolated_affiliation,
    planted_affiliation,
    process_edge_prob,
    sample_jag_graph,
    simulate_event_process,
)
from jagmodel.graph import jaccard_pairs
from jagmodel.io import write_csv, write_json
from jagmodel.models import ModelParams, fit_alpha
from jagmodel.validate import binning_experiment, isolated_density_experiment


def binning(args, out: Path) -> dict:
    a = planted_affiliation(PlantedConfig(args.nodes, args.communities, 1, 3, seed=args.seed))
    g = sample_jag_graph(a, ModelParams(args.alpha), seed=args.seed)
    rep = binning_experiment(g, a, args.pairs, bins=args.bins, seed=args.seed)
    write_csv(out / "bins.csv", rep.header, rep.rows())
    print(f"{'J bin':>12} {'pairs':>9} {'p_edge':>8}")
    for lo, hi, n, _, p, _, low in rep.rows():
        flag = " (few pairs)" if low else ""
        print(f"{lo:5.2f}-{hi:4.2f} {n:9d} {p if p == '' else f'{p:8.4f}'}{flag}")
    print(f"fitted slope {rep.fitted_slope:.4f} (true alpha {args.alpha})")
    return rep.summary()


def isolated(args, out: Path) -> dict:
    records = {}
    for i, alpha in enumerate(args.isolated_alphas):
        a = disjoint_union(planted_affiliation(PlantedConfig(400, 8, 1, 3, seed=args.seed + i)),
                           isolated_affiliation(5, 40))
        g = sample_jag_graph(a, ModelParams(alpha), seed=args.seed + i)
        rep = isolated_density_experiment(g, a, seed=args.seed, alpha=alpha)
        hat, _ = fit_alpha(g, a)
        records[str(alpha)] = {**rep.summary(), "alpha_hat": hat}
        print(f"alpha {alpha:.2f}: isolated density {rep.summary()['record']}, fitted {hat:.2f}")
    return records


def process(args, out: Path) -> dict:
    a = planted_affiliation(PlantedConfig(60, 6, 1, 3, seed=args.seed))
    cfg = ProcessConfig(args.rounds, args.meet_prob, seed=args.seed)
    g, counts = simulate_event_process(a, cfg)
    us, vs = np.triu_indices(a.node_count, k=1)
    j = jaccard_pairs(a.matrix, us, vs)
    hit = g.has_edges(us, vs)
    rows = []
    for value in np.unique(j):
        sel = j == value
        rows.append((float(value), int(sel.sum()), float(counts[us[sel], vs[sel]].mean() / args.rounds),
                     float(hit[sel].mean()), process_edge_prob(float(value), cfg)))
    write_csv(out / "process.csv", ["jaccard", "pairs", "coattendance", "edge_rate", "predicted"], rows)
    print(f"{'J':>6} {'pairs':>6} {'co-att':>7} {'edges':>7} {'model':>7}")
    for r in rows:
        print(f"{r[0]:6.3f} {r[1]:6d} {r[2]:7.4f} {r[3]:7.4f} {r[4]:7.4f}")
    return {"rounds": args.rounds, "meet_prob": args.meet_prob, "levels": len(rows)}


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", type=Path, default=Path("runs/validations"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nodes", type=int, default=3000)
    p.add_argument("--communities", type=int, default=20)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--pairs", type=int, default=1_000_000)
    p.add_argument("--bins", type=int, default=10)
    p.add_argument("--isolated-alphas", type=float, nargs="+", default=[0.26, 0.41, 0.71])
    p.add_argument("--rounds", type=int, default=2000)
    p.add_argument("--meet-prob", type=float, default=0.001)
    args = p.parse_args()

    summary = {"binning": binning(args, args.out), "isolated": isolated(args, args.out),
               "process": process(args, args.out), "args": {k: str(v) for k, v in vars(args).items()}}
    write_json(args.out / "summary.json", summary)
    print(json.dumps({"written": str(args.out)}))


if __name__ == "__main__":
    main()
