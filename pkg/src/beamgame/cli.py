"""Command-line entry point: ``beamgame <subcommand> [--config F] [--seed S] [--out P] [--format F]``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Sequence

import numpy as np

from . import classical_game as cg
from .config import ConfigError, ExperimentConfig, load_config
from .geometry import PlacementError, generate_topology
from .harness import STUDIES, make_instance, quantum_capable, streams
from .quantum_game import QuantumGame, solve, trace_csv


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config JSON (all sections and fields required)")
    common.add_argument("--seed", type=_u64, help="override harness.seed")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--replications", type=int, help="override harness.replications")

    p = argparse.ArgumentParser(prog="beamgame", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("topology", parents=[common], help="draw one topology")
    sub.add_parser("classical", parents=[common], help="classical NE and uniform baseline on one instance")
    sub.add_parser("quantum", parents=[common], help="quantum game solution on one 2-user instance")
    for name in STUDIES:
        sub.add_parser(name, parents=[common], help=f"run the {name} study")
    dump = sub.add_parser("dump-config", help="print the complete default config")
    dump.add_argument("--out")
    return p


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def _resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    harness = {}
    if args.seed is not None:
        harness["seed"] = args.seed
    if args.replications is not None:
        harness["replications"] = args.replications
    return cfg.replace(harness=harness) if harness else cfg


def _topology_output(cfg: ExperimentConfig, fmt: str) -> str:
    topo_ss, _, _ = streams(cfg.harness.seed, 0)
    topo = generate_topology(cfg.geometry, np.random.default_rng(topo_ss))
    if fmt == "json":
        return topo.to_json() + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["user", "kind", "x", "y", "radius"])
    for k, pair in enumerate(topo.pairs):
        w.writerow([k, "tx", repr(pair.tx.x), repr(pair.tx.y), ""])
        w.writerow([k, "rx", repr(pair.rx.x), repr(pair.rx.y), ""])
        w.writerow([k, "body", repr(pair.body.center.x), repr(pair.body.center.y), repr(pair.body.radius)])
    return buf.getvalue()


def _classical_output(cfg: ExperimentConfig, fmt: str) -> str:
    inst = make_instance(cfg, 0)
    g = inst.game
    rec = cg.nash_record(g, inst.classical)
    rec["uniform_profile"] = list(inst.uniform)
    rec["uniform_utilities"] = [cg.utility(g, i, inst.uniform) for i in range(g.n)]
    if fmt == "json":
        return json.dumps(rec, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["player", "ne_direction", "ne_utility", "uniform_direction", "uniform_utility",
                "iterations", "converged"])
    for i in range(g.n):
        w.writerow([i, repr(rec["profile"][i]), repr(rec["utilities"][i]),
                    repr(rec["uniform_profile"][i]), repr(rec["uniform_utilities"][i]),
                    rec["iterations"], rec["converged"]])
    return buf.getvalue()


def _quantum_output(cfg: ExperimentConfig, fmt: str) -> str:
    inst = make_instance(cfg, 0)
    if not quantum_capable(inst.game):
        raise ConfigError("the quantum game needs 2 users with 3 beam directions each")
    payoffs = cg.payoff_tables(inst.game)
    qcfg = cfg.quantum_game
    game = QuantumGame.from_config(payoffs, qcfg)
    sol, records = solve(game, qcfg, np.random.default_rng(inst.quantum_seed), keep_trace=True)
    if fmt == "json":
        doc = {
            "gamma": qcfg.gamma,
            "payoffs": payoffs.tolist(),
            "classical_utilities": cg.nash_record(inst.game, inst.classical)["utilities"],
            "solution": sol.to_dict(),
            "records": [r.to_dict() for r in records],
        }
        return json.dumps(doc, indent=2) + "\n"
    return trace_csv(records)


def run(argv: Sequence[str] | None = None) -> tuple[str, str | None]:
    """Execute a command; returns the output text and where it should go
    (``None`` for stdout)."""
    args = _parser().parse_args(argv)
    if args.command == "dump-config":
        return ExperimentConfig().to_json(), args.out
    cfg = _resolve_config(args)
    out = args.out if args.out is not None else cfg.harness.output
    if args.command == "topology":
        return _topology_output(cfg, args.format), out
    if args.command == "classical":
        return _classical_output(cfg, args.format), out
    if args.command == "quantum":
        return _quantum_output(cfg, args.format), out
    result = STUDIES[args.command](cfg)
    return (result.to_json() if args.format == "json" else result.to_csv()), out


def main(argv: Sequence[str] | None = None) -> int:
    try:
        text, out = run(argv)
    except SystemExit as exc:  # argparse usage errors
        return exc.code if isinstance(exc.code, int) else 2
    except (ConfigError, PlacementError) as exc:
        print(f"beamgame: error: {exc}", file=sys.stderr)
        return 2
    if out is None:
        sys.stdout.write(text)
        return 0
    try:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        print(f"beamgame: error: cannot write {out}: {exc.strerror}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
