"""Command line interface.

Exit codes: 0 success, 1 usage error, 2 data error (unreadable or
inconsistent inputs, failed validation, infeasible tuning).
"""

from __future__ import annotations

import argparse
import csv
import struct
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from .community import MAX_DENSITY, MIN_DENSITY, detect_communities
from .config import ExperimentConfig, load_config
from .experiments import EXPERIMENTS, run_experiment
from .graph import load_edge_list
from .ledger import (SubChain, Transaction, mine_block, read_chain,
                     simulate_poisoning, validate_chain, write_chain)
from .linkage import ESTIMATORS, LinkageScenario, simulate_linkage, write_attack_reports
from .mapping import assign_epsilons, map_density_to_epsilon
from .mechanisms import COUPLED, INDEPENDENT, SensitiveRecord
from .pipeline import NODE_POLICY, PER_COMMUNITY, sanitize_pipeline


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; the CLI contract wants 1.
    def error(self, message):
        raise UsageError(message)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None, help="random seed")
    parser.add_argument("--out-dir", default=None, help="output directory")
    parser.add_argument("--config", default=None, help="dotted-key config file")


def _build_config(args) -> ExperimentConfig:
    if args.config:
        try:
            config = ExperimentConfig.from_file(args.config)
        except (OSError, KeyError, ValueError, TypeError) as exc:
            raise DataError(f"bad config file: {exc}") from exc
    else:
        config = ExperimentConfig()
    overrides = {}
    for name in ("seed", "out_dir"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    for flag, field in (("omega", "mapping_omega"), ("theta", "mapping_theta"),
                        ("alpha", "mapping_alpha"), ("floor", "epsilon_floor"),
                        ("policy", "assignment_policy"), ("budget", "budget_value"),
                        ("nbits", "ledger_nbits")):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[field] = value
    return config.override(**overrides)


def _load_graph(path: str):
    try:
        return load_edge_list(path)
    except (OSError, ValueError) as exc:
        raise DataError(str(exc)) from exc


def _mapping_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--omega", type=float, default=None)
    parser.add_argument("--theta", type=float, default=None)
    parser.add_argument("--alpha", type=float, default=None)
    parser.add_argument("--floor", type=float, default=None)


def cmd_detect(args) -> int:
    graph = _load_graph(args.graph)
    try:
        dendrogram, partition = detect_communities(graph, threshold=args.threshold,
                                                   policy=args.policy)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    partition.write_csv(args.out)
    if args.dendrogram:
        dendrogram.write_csv(args.dendrogram)
    print(f"{len(partition.communities)} communities, "
          f"partition density {partition.network_density:.6f} -> {args.out}")
    return 0


def cmd_epsilon(args) -> int:
    config = _build_config(args)
    graph = _load_graph(args.graph)
    try:
        _, partition = detect_communities(graph, policy=config.assignment_policy)
        assignment = assign_epsilons(partition, config.mapping_params(),
                                     budget=config.budget_value)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    densities = {c.id: c.density for c in partition.communities}
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["community_id", "density", "epsilon"])
        for cid in sorted(assignment.per_community_epsilon):
            writer.writerow([cid, repr(densities[cid]),
                             repr(assignment.per_community_epsilon[cid])])
    print(f"total epsilon {assignment.total_epsilon:.6f} "
          f"over {len(assignment.per_community_epsilon)} communities -> {args.out}")
    return 0


def _read_records(path: str, candidates: Optional[List[str]]):
    records = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                if not row or row[0].startswith("#"):
                    continue
                try:
                    node = int(row[0])
                except ValueError:
                    raise DataError(f"records line {lineno}: bad node id {row[0]!r}")
                if candidates:
                    records[node] = SensitiveRecord(value=row[1].strip(),
                                                    candidates=tuple(candidates))
                else:
                    try:
                        records[node] = SensitiveRecord(
                            value=[float(v) for v in row[1:]])
                    except ValueError:
                        raise DataError(f"records line {lineno}: non-numeric value")
    except OSError as exc:
        raise DataError(str(exc)) from exc
    if not records:
        raise DataError(f"no records in {path}")
    return records


def cmd_sanitize(args) -> int:
    config = _build_config(args)
    graph = _load_graph(args.graph)
    candidates = args.candidates.split(",") if args.candidates else None
    records = _read_records(args.records, candidates)
    try:
        releases = sanitize_pipeline(
            graph, records, config.mapping_params(),
            policy=config.assignment_policy, seed=config.seed,
            sensitivity=config.sensitivity,
            noise_source=INDEPENDENT if args.independent else COUPLED,
            epsilon_mode=PER_COMMUNITY if args.per_community else NODE_POLICY)
    except (KeyError, ValueError) as exc:
        raise DataError(str(exc)) from exc
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["community_id", "epsilon", "mechanism",
                         "noise_source", "releaser", "payload"])
        for rel in releases:
            if isinstance(rel.payload, np.ndarray):
                payload = ";".join(repr(float(v)) for v in rel.payload)
            else:
                payload = str(rel.payload)
            writer.writerow([rel.community_id, repr(rel.epsilon), rel.mechanism,
                             rel.noise_source, rel.releaser, payload])
    print(f"{len(releases)} releases -> {args.out}")
    return 0


def cmd_linkage(args) -> int:
    try:
        epsilons = tuple(float(v) for v in args.epsilons.split(","))
        scenario = LinkageScenario(epsilons=epsilons,
                                   coupled=not args.independent,
                                   estimator=args.estimator)
        report = simulate_linkage(scenario, trials=args.trials, seed=args.seed or 0)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    write_attack_reports([report], args.out)
    print(f"gain {report.gain:.4f} (best-single rmse {report.best_single_rmse:.4f}, "
          f"combined rmse {report.effective_rmse:.4f}) -> {args.out}")
    return 0


def _read_release_transactions(path: str, community: Optional[int]) -> List[Transaction]:
    txs = []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            for row in reader:
                cid = int(row["community_id"])
                if community is not None and cid != community:
                    continue
                value = float(row["payload"].split(";")[0])
                txs.append(Transaction.from_value(
                    releaser=int(row["releaser"]), community_id=cid,
                    epsilon=float(row["epsilon"]), value=value))
    except (OSError, KeyError, ValueError) as exc:
        raise DataError(f"bad releases file: {exc}") from exc
    if not txs:
        raise DataError("no matching transactions in releases file")
    return txs


def cmd_chain(args) -> int:
    if args.chain_command == "mine":
        txs = _read_release_transactions(args.releases, args.community)
        chain = SubChain(community_id=args.community if args.community is not None
                         else txs[0].community_id)
        per_block = max(1, args.txs_per_block)
        for start in range(0, len(txs), per_block):
            block = mine_block(chain.tip_hash(), txs[start:start + per_block],
                               nbits=args.nbits, timestamp=start)
            chain.append(block)
        write_chain(chain, args.out)
        print(f"{len(chain.blocks)} blocks mined at nbits={args.nbits} -> {args.out}")
        return 0
    if args.chain_command == "validate":
        try:
            chain = read_chain(args.file)
        except (OSError, ValueError, struct.error) as exc:
            raise DataError(f"unreadable chain file: {exc}") from exc
        report = validate_chain(chain)
        print(report)
        if not report.ok:
            raise DataError(str(report))
        return 0
    if args.chain_command == "poison":
        result = simulate_poisoning(args.size, args.adversary_fraction,
                                    args.poison_fraction, rounds=args.rounds,
                                    seed=args.seed or 0,
                                    malice_model=args.malice_model)
        print(f"acceptance_rate {result.acceptance_rate:.4f} aae {result.aae:.6f}")
        return 0
    if args.chain_command == "dump":
        try:
            chain = read_chain(args.file)
        except (OSError, ValueError, struct.error) as exc:
            raise DataError(f"unreadable chain file: {exc}") from exc
        for i, block in enumerate(chain.blocks):
            print(f"block {i} ({len(block.transactions)} txs)")
            for name, value in block.header.hex_fields():
                print(f"  {name:12s} {value}")
        return 0
    raise UsageError(f"unknown chain command {args.chain_command!r}")


def cmd_experiment(args) -> int:
    config = _build_config(args)
    try:
        paths = run_experiment(args.name, config)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    for path in paths:
        print(path)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="communitydp",
                     description="Community-density personalized DP toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", parents=[], help="detect link communities")
    p.add_argument("--graph", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dendrogram", default=None, help="merge-step CSV path")
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--policy", choices=[MIN_DENSITY, MAX_DENSITY], default=MIN_DENSITY)
    _add_common(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("epsilon", help="per-community privacy levels")
    p.add_argument("--graph", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--policy", choices=[MIN_DENSITY, MAX_DENSITY], default=None)
    p.add_argument("--budget", type=float, default=None)
    _mapping_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_epsilon)

    p = sub.add_parser("sanitize", help="run the sanitization pipeline")
    p.add_argument("--graph", required=True)
    p.add_argument("--records", required=True,
                   help="CSV of node_id,v1,v2,... (or node_id,token with --candidates)")
    p.add_argument("--out", required=True)
    p.add_argument("--candidates", default=None,
                   help="comma-separated candidate set for categorical records")
    p.add_argument("--independent", action="store_true",
                   help="fresh noise per release instead of a coupled ladder")
    p.add_argument("--per-community", action="store_true",
                   help="price each release at the receiving community density")
    p.add_argument("--policy", choices=[MIN_DENSITY, MAX_DENSITY], default=None)
    _mapping_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_sanitize)

    p = sub.add_parser("linkage", help="simulate a linkage attack")
    p.add_argument("--epsilons", required=True, help="comma-separated levels")
    p.add_argument("--estimator", choices=list(ESTIMATORS), default="average")
    p.add_argument("--independent", action="store_true")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_linkage)

    p = sub.add_parser("chain", help="sub-chain operations")
    chain_sub = p.add_subparsers(dest="chain_command", required=True)

    pm = chain_sub.add_parser("mine", help="mine releases into a chain file")
    pm.add_argument("--releases", required=True, help="CSV from `sanitize`")
    pm.add_argument("--out", required=True)
    pm.add_argument("--community", type=int, default=None)
    pm.add_argument("--nbits", type=int, default=8)
    pm.add_argument("--txs-per-block", type=int, default=4)
    _add_common(pm)
    pm.set_defaults(func=cmd_chain)

    pv = chain_sub.add_parser("validate", help="validate a chain file")
    pv.add_argument("--file", required=True)
    _add_common(pv)
    pv.set_defaults(func=cmd_chain)

    pp = chain_sub.add_parser("poison", help="simulate poisoning defense")
    pp.add_argument("--size", type=int, default=40)
    pp.add_argument("--adversary-fraction", type=float, default=0.2)
    pp.add_argument("--poison-fraction", type=float, default=0.2)
    pp.add_argument("--rounds", type=int, default=1000)
    pp.add_argument("--malice-model", choices=["fixed", "bernoulli"], default="fixed")
    _add_common(pp)
    pp.set_defaults(func=cmd_chain)

    pd = chain_sub.add_parser("dump", help="hex-dump block headers")
    pd.add_argument("--file", required=True)
    _add_common(pd)
    pd.set_defaults(func=cmd_chain)

    p = sub.add_parser("experiment", help="run a named experiment")
    p.add_argument("name", choices=list(EXPERIMENTS))
    _add_common(p)
    p.set_defaults(func=cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
