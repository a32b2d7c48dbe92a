"""Command-line entry point: ``jagmodel <subcommand> ...``.

Exit codes: 0 success, 1 domain error, 2 usage, 3 input/parse, 4 capacity.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import CapacityError, EmptyReportError, ParseError, ResolutionError
from .generator import (
    PlantedConfig,
    ProcessConfig,
    disjoint_union,
    isolated_affiliation,
    pairwise_overlap_affiliation,
    planted_affiliation,
    sample_agm_graph,
    sample_jag_graph,
    simulate_event_process,
)
from .graph import Affiliation, jaccard_pairs
from .inference import McmcConfig, detect_communities
from .io import (
    LabelMap,
    SubnetSamplerConfig,
    parse_community_file,
    parse_edge_list,
    sample_subnetworks,
    write_community_file,
    write_csv,
    write_detection_result,
    write_edge_list,
    write_json,
    write_subnetwork,
)
from .metrics import score_all
from .models import AgmParams, GridSpec, ModelParams
from .validate import binning_experiment, isolated_density_experiment, sample_constrained_pairs

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE, EXIT_INPUT, EXIT_CAPACITY = 0, 1, 2, 3, 4
THREADS_ENV = "JAGMODEL_THREADS"

log = logging.getLogger("jagmodel")


def _probability(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not 0.0 <= x <= 1.0:
        raise argparse.ArgumentTypeError(f"must be in [0, 1], got {x}")
    return x


def _epsilon(text: str) -> float:
    x = _probability(text)
    if x >= 1.0:
        raise argparse.ArgumentTypeError("epsilon must be < 1")
    return x


def _positive(text: str) -> int:
    try:
        x = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if x < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {x}")
    return x


def _provenance(args: argparse.Namespace) -> dict:
    cfg = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items()
           if k not in ("func", "verbose")}
    return {"command": args.command, "version": __version__, "seed": getattr(args, "seed", None),
            "config": cfg}


def _add_mcmc_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--restarts", type=_positive, default=5)
    p.add_argument("--max-iters", type=_positive, default=100_000)
    p.add_argument("--patience", type=_positive, default=2000)
    p.add_argument("--batch", type=_positive, default=1, help="proposals per step; best is kept")
    p.add_argument("--alpha-refit", type=_positive, default=50,
                   help="refit alpha every this many accepted moves")
    p.add_argument("--grid-step", type=float, default=0.01)
    p.add_argument("--init-prob", type=_probability, default=None)
    p.add_argument("--epsilon", type=_epsilon, default=1e-8)
    p.add_argument("--profile-alpha", action="store_true",
                   help="score each proposal at its own best alpha (slow)")
    p.add_argument("--workers", type=_positive,
                   default=int(os.environ.get(THREADS_ENV, "1") or 1))


def _mcmc_config(args, community_count: int) -> McmcConfig:
    if args.grid_step <= 0:
        raise argparse.ArgumentTypeError("--grid-step must be positive")
    return McmcConfig(
        community_count=community_count,
        max_iters=args.max_iters,
        patience=args.patience,
        restarts=args.restarts,
        batch=args.batch,
        alpha_refit_interval=args.alpha_refit,
        grid=GridSpec(step=args.grid_step),
        init_membership_prob=args.init_prob,
        epsilon=args.epsilon,
        seed=args.seed,
        profile_alpha=args.profile_alpha,
    )


def _load_graph_and_cover(args, unknown: str = "strict"):
    g, labels, _, _ = parse_edge_list(args.graph)
    cover = parse_community_file(args.communities, labels, unknown=unknown)
    if len(labels) > g.node_count:
        g = g.with_node_count(len(labels))
    return g, cover, labels


# -- subcommands ---------------------------------------------------------------

def cmd_generate(args) -> int:
    if args.layout == "blocks":
        parts = [pairwise_overlap_affiliation(args.communities, args.size, args.overlap)]
    else:
        parts = [planted_affiliation(PlantedConfig(
            args.nodes, args.communities, args.min_memberships, args.max_memberships, args.seed))]
    if args.isolated:
        parts.append(isolated_affiliation(args.isolated, args.isolated_size))
    a = parts[0] if len(parts) == 1 else disjoint_union(*parts)

    out = Path(args.out)
    if args.model == "jag":
        g = sample_jag_graph(a, ModelParams(args.alpha, args.epsilon), seed=args.seed)
    elif args.model == "agm":
        g = sample_agm_graph(a, AgmParams((args.agm_prob,) * a.community_count, args.epsilon),
                             seed=args.seed)
    else:
        g, counts = simulate_event_process(a, ProcessConfig(args.rounds, args.meet_prob, args.seed))
        us, vs = np.nonzero(counts)
        j = jaccard_pairs(a.matrix, us, vs)
        write_csv(out / "coattendance.csv", ["u", "v", "count", "frequency", "jaccard"],
                  ((int(u), int(v), int(counts[u, v]), counts[u, v] / args.rounds, float(x))
                   for u, v, x in zip(us, vs, j)))
    write_edge_list(out / "graph.txt", g)
    write_community_file(out / "communities.txt", a.to_cover())
    prov = _provenance(args)
    prov["nodes"] = g.node_count
    prov["edges"] = g.edge_count
    write_json(out / "provenance.json", prov)
    print(json.dumps({"nodes": g.node_count, "edges": g.edge_count,
                      "communities": a.community_count}))
    return EXIT_OK


def cmd_detect(args) -> int:
    g, labels, _, _ = parse_edge_list(args.graph)
    cfg = _mcmc_config(args, args.num_communities)
    result = detect_communities(g, cfg, workers=args.workers)
    write_detection_result(result, labels, args.out)
    if args.truth:
        truth = parse_community_file(args.truth, labels, unknown="lenient")
        scores = score_all(truth, result.best_affiliation.to_cover(), range(g.node_count))
        write_json(Path(args.out) / "scores.json", scores)
    write_json(Path(args.out) / "provenance.json", _provenance(args))
    print(json.dumps({"alpha_hat": result.alpha_hat,
                      "log_likelihood": result.best_log_likelihood}))
    return EXIT_OK


def cmd_validate(args) -> int:
    g, cover, labels = _load_graph_and_cover(args, unknown=args.unknown)
    a = Affiliation.from_cover(cover, g.node_count)
    out = Path(args.out)
    if args.experiment == "bins":
        if args.fixed:
            fixed = [int(x) for x in args.fixed.split(",")]
            pairs = sample_constrained_pairs(g, a, fixed, args.pairs, seed=args.seed)
        else:
            pairs = args.pairs
        rep = binning_experiment(g, a, pairs, bins=args.bins, seed=args.seed,
                                 min_count=args.min_bin_count)
        write_csv(out / "bins.csv", rep.header, rep.rows())
        summary = rep.summary()
    else:
        rep = isolated_density_experiment(g, a, args.min_size, args.max_count, args.seed, args.alpha)
        write_csv(out / "isolated.csv", rep.header, rep.rows())
        summary = rep.summary()
    summary["provenance"] = _provenance(args)
    write_json(out / "summary.json", summary)
    print(json.dumps({k: v for k, v in summary.items() if k != "provenance"}))
    return EXIT_OK


def cmd_score(args) -> int:
    labels = LabelMap()
    truth = parse_community_file(args.truth, labels)
    detected = parse_community_file(args.detected, labels)
    universe = None
    if args.graph:
        parse_edge_list(args.graph, labels)
        universe = range(len(labels))
    scores = score_all(truth, detected, universe)
    print(json.dumps(scores, sort_keys=True))
    if args.out:
        write_json(Path(args.out) / "scores.json", scores)
        write_json(Path(args.out) / "provenance.json", _provenance(args))
    return EXIT_OK


def cmd_sample_subnets(args) -> int:
    g, cover, labels = _load_graph_and_cover(args, unknown="extend")
    subs = sample_subnetworks(g, cover, SubnetSamplerConfig(
        args.k, args.count, args.seed, args.min_community_size))
    out = Path(args.out)
    width = max(4, len(str(len(subs) - 1)))
    for i, sub in enumerate(subs):
        write_subnetwork(out / f"subnet_{i:0{width}d}", sub, labels)
    write_json(out / "provenance.json", _provenance(args))
    print(json.dumps({"subnetworks": len(subs)}))
    return EXIT_OK


def cmd_replicate(args) -> int:
    g, cover, labels = _load_graph_and_cover(args, unknown="extend")
    subs = sample_subnetworks(g, cover, SubnetSamplerConfig(
        args.k, args.count, args.seed, args.min_community_size))
    rows = []
    for i, sub in enumerate(subs):
        if not len(sub.cover):
            log.warning("subnetwork %d has no ground-truth community, skipped", i)
            continue
        k = args.num_communities or len(sub.cover)
        cfg = _mcmc_config(args, k)
        cfg = dataclasses.replace(cfg, seed=args.seed + i)
        res = detect_communities(sub.graph, cfg, workers=args.workers)
        detected = res.best_affiliation.to_cover()
        if not len(detected):
            continue
        s = score_all(sub.cover, detected, range(sub.graph.node_count))
        rows.append((i, sub.graph.node_count, sub.graph.edge_count, len(sub.cover), k,
                     res.alpha_hat, s["f1"], s["nmi"], s["omega"]))
    if not rows:
        raise EmptyReportError("no subnetwork could be scored")
    out = Path(args.out)
    write_csv(out / "results.csv", ["subnet", "nodes", "edges", "truth_communities",
                                    "num_communities", "alpha_hat", "f1", "nmi", "omega"], rows)
    arr = np.array([r[5:] for r in rows], dtype=float)
    summary = {name: {"mean": float(arr[:, i].mean()), "std": float(arr[:, i].std())}
               for i, name in enumerate(["alpha_hat", "f1", "nmi", "omega"])}
    summary["subnetworks"] = len(rows)
    summary["provenance"] = _provenance(args)
    write_json(out / "summary.json", summary)
    print(json.dumps({k: v for k, v in summary.items() if k != "provenance"}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jagmodel", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="sample a planted affiliation and a graph")
    p.add_argument("--model", choices=["jag", "agm", "process"], default="jag")
    p.add_argument("--layout", choices=["random", "blocks"], default="random")
    p.add_argument("--nodes", type=_positive, default=200)
    p.add_argument("--communities", type=_positive, default=5)
    p.add_argument("--min-memberships", type=int, default=1)
    p.add_argument("--max-memberships", type=int, default=3)
    p.add_argument("--size", type=_positive, default=30, help="community size (blocks layout)")
    p.add_argument("--overlap", type=int, default=5, help="pairwise overlap (blocks layout)")
    p.add_argument("--isolated", type=int, default=0, help="extra isolated communities")
    p.add_argument("--isolated-size", type=_positive, default=40)
    p.add_argument("--alpha", type=_probability, default=0.5)
    p.add_argument("--epsilon", type=_epsilon, default=1e-8)
    p.add_argument("--agm-prob", type=_probability, default=0.3)
    p.add_argument("--rounds", type=_positive, default=100)
    p.add_argument("--meet-prob", type=_probability, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("detect", help="MCMC community detection")
    p.add_argument("--graph", type=Path, required=True)
    p.add_argument("--num-communities", type=_positive, required=True)
    p.add_argument("--truth", type=Path, help="optional ground truth to score against")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True)
    _add_mcmc_flags(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("validate", help="binning / isolated-community experiments")
    p.add_argument("experiment", choices=["bins", "isolated"])
    p.add_argument("--graph", type=Path, required=True)
    p.add_argument("--communities", type=Path, required=True)
    p.add_argument("--unknown", choices=["strict", "lenient", "extend"], default="extend",
                   help="labels in the community file but not the edge list: add as isolated "
                        "nodes (extend), fail (strict) or drop (lenient)")
    p.add_argument("--pairs", type=_positive, default=100_000)
    p.add_argument("--fixed", help="comma-separated community indices (0-based, file order)")
    p.add_argument("--bins", type=_positive, default=10)
    p.add_argument("--min-bin-count", type=int, default=30)
    p.add_argument("--min-size", type=_positive, default=5)
    p.add_argument("--max-count", type=_positive, default=5)
    p.add_argument("--alpha", type=_probability, default=None,
                   help="slope estimate to report alongside isolated densities")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("score", help="compare two community files")
    p.add_argument("--truth", type=Path, required=True)
    p.add_argument("--detected", type=Path, required=True)
    p.add_argument("--graph", type=Path, help="edge list whose nodes join the Omega universe")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_score)

    for name, func, helptext in (
        ("sample-subnets", cmd_sample_subnets, "ego-subnetwork sampling"),
        ("replicate", cmd_replicate, "sample subnets, detect, score, aggregate"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--graph", type=Path, required=True)
        p.add_argument("--communities", type=Path, required=True)
        p.add_argument("--k", type=_positive, default=2)
        p.add_argument("--count", type=_positive, default=500)
        p.add_argument("--min-community-size", type=_positive, default=2)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", type=Path, required=True)
        if name == "replicate":
            p.add_argument("--num-communities", type=_positive, default=None,
                           help="default: ground-truth community count of each subnet")
            _add_mcmc_flags(p)
        p.set_defaults(func=func)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except argparse.ArgumentTypeError as exc:
        parser.print_usage(sys.stderr)
        print(f"jagmodel: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, ResolutionError, OSError) as exc:
        print(f"jagmodel: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CapacityError as exc:
        print(f"jagmodel: capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (ValueError, EmptyReportError) as exc:
        print(f"jagmodel: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
