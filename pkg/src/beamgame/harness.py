"""
Seeded Monte Carlo studies over random two-user (or N-user) networks.

Replication r of an experiment draws everything from
``SeedSequence(seed, spawn_key=(r,))``, split into three child streams:
topology and shadowing, classical baselines, and quantum restarts. A
replication therefore yields the same instance for every axis value, and
results never depend on how replications are spread over workers.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import classical_game as cg
from .channel import build_gain_table
from .config import ConfigError, ExperimentConfig
from .geometry import generate_topology
from .quantum_game import QGameConfig, QuantumGame, solve
from .tolerances import TOL

SCHEMES = ("uniform", "classical", "quantum")
CSV_HEADER = ["axis", "scheme", "mean_rate", "ci95", "mean_iters", "nonconv_frac", "retained_frac"]
THREADS_ENV = "BEAMGAME_THREADS"


@dataclass(frozen=True)
class SchemeStats:
    mean_rate: float | None
    ci95: float | None
    mean_iters: float | None = None
    nonconv_frac: float | None = None

    def to_dict(self) -> dict:
        return {"mean_rate": self.mean_rate, "ci95": self.ci95,
                "mean_iters": self.mean_iters, "nonconv_frac": self.nonconv_frac}


@dataclass(frozen=True)
class AxisPoint:
    axis: float
    schemes: dict[str, SchemeStats]
    retained_frac: float = 1.0


@dataclass(frozen=True)
class SweepResult:
    study: str
    axis_name: str
    points: list[AxisPoint]

    def point(self, axis: float) -> AxisPoint:
        for p in self.points:
            if math.isclose(p.axis, axis, rel_tol=1e-12, abs_tol=1e-15):
                return p
        raise KeyError(axis)

    def column(self, scheme: str, stat: str = "mean_rate") -> list[float | None]:
        return [getattr(p.schemes[scheme], stat) if scheme in p.schemes else None
                for p in self.points]

    def to_records(self) -> list[dict]:
        return [
            {
                "study": self.study,
                "axis_name": self.axis_name,
                "axis": p.axis,
                "retained_frac": p.retained_frac,
                "schemes": {name: s.to_dict() for name, s in p.schemes.items()},
            }
            for p in self.points
        ]

    def to_json(self) -> str:
        return json.dumps(self.to_records(), indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for p in self.points:
            for name, s in p.schemes.items():
                w.writerow([_fmt(p.axis), name, _fmt(s.mean_rate), _fmt(s.ci95),
                            _fmt(s.mean_iters), _fmt(s.nonconv_frac), _fmt(p.retained_frac)])
        return buf.getvalue()


def _fmt(x: float | None) -> str:
    return "" if x is None else repr(float(x))


# ---------------------------------------------------------------------------
# one replication
# ---------------------------------------------------------------------------

@dataclass
class Instance:
    game: cg.GameInstance
    uniform: tuple[float, ...]
    classical: cg.DynamicsResult
    quantum_seed: np.random.SeedSequence


def streams(seed: int, rep: int) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(seed, spawn_key=(rep,)).spawn(3)


def make_instance(cfg: ExperimentConfig, rep: int) -> Instance:
    """Topology, channel, uniform baseline and classical NE of replication ``rep``."""
    topo_ss, base_ss, quant_ss = streams(cfg.harness.seed, rep)
    topo_rng = np.random.default_rng(topo_ss)
    topo = generate_topology(cfg.geometry, topo_rng)
    table = build_gain_table(topo, cfg.channel.path_loss(), topo_rng)
    game = cg.GameInstance.build(topo, table, cfg.channel.pattern(), cfg.channel.radio())

    ccfg = cfg.classical_game
    base_rng = np.random.default_rng(base_ss)
    uniform = cg.uniform_profile(game, base_rng, ccfg.uniform_low, ccfg.uniform_high)
    init = cg.random_profile(game, base_rng)
    result = cg.br_dynamics(game, init, ccfg.timer, ccfg.tie_break, base_rng)
    return Instance(game, uniform, result, quant_ss)


def quantum_capable(game: cg.GameInstance) -> bool:
    return game.n == 2 and all(len(s) == 3 for s in game.spaces)


@dataclass
class RepOutcome:
    """Per-replication numbers for one axis value."""

    uniform: float
    classical: float
    classical_iters: int
    classical_conv: bool
    quantum: float | None = None
    quantum_iters: list[int] = field(default_factory=list)
    quantum_conv: list[bool] = field(default_factory=list)


def _evaluate(inst: Instance, game: cg.GameInstance, qcfg: QGameConfig | None) -> RepOutcome:
    out = RepOutcome(
        uniform=cg.mean_utility(game, inst.uniform),
        classical=cg.mean_utility(game, inst.classical.profile),
        classical_iters=inst.classical.iterations,
        classical_conv=inst.classical.converged,
    )
    if qcfg is not None and quantum_capable(game):
        qgame = QuantumGame.from_config(cg.payoff_tables(game), qcfg)
        sol, records = solve(qgame, qcfg, np.random.default_rng(inst.quantum_seed))
        out.quantum = sol.mean_utility
        out.quantum_iters = [r.iterations for r in records]
        out.quantum_conv = [r.converged for r in records]
    return out


def _rep_gamma(cfg: ExperimentConfig, rep: int) -> list[RepOutcome]:
    inst = make_instance(cfg, rep)
    if not quantum_capable(inst.game):
        raise ConfigError("gamma sweeps need 2 users with 3 beam directions each")
    return [_evaluate(inst, inst.game, dataclasses.replace(cfg.quantum_game, gamma=g))
            for g in cfg.harness.gammas]


def _rep_power(cfg: ExperimentConfig, rep: int) -> list[RepOutcome]:
    inst = make_instance(cfg, rep)
    qcfg = cfg.quantum_game
    return [_evaluate(inst, inst.game.with_radio(cfg.channel.radio(p)), qcfg)
            for p in cfg.harness.powers]


def _rep_timer(cfg: ExperimentConfig, rep: int) -> list[RepOutcome]:
    inst = make_instance(cfg, rep)
    return [_evaluate(inst, inst.game, dataclasses.replace(cfg.quantum_game, timer=t))
            for t in cfg.harness.timers]


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------

def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1").strip() or "1"
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 0:
        raise ConfigError(f"{THREADS_ENV} must be >= 0")
    return (os.cpu_count() or 1) if n == 0 else n


def _run_reps(fn: Callable[[ExperimentConfig, int], list[RepOutcome]],
              cfg: ExperimentConfig) -> list[list[RepOutcome]]:
    """Per-replication outcomes, always in replication order."""
    reps = range(cfg.harness.replications)
    workers = min(worker_count(), cfg.harness.replications)
    if workers <= 1:
        return [fn(cfg, r) for r in reps]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, [cfg] * len(reps), reps))


def _stats(values: Sequence[float]) -> tuple[float | None, float | None]:
    if len(values) == 0:
        return None, None
    arr = np.asarray(values, dtype=float)
    ci = 1.96 * float(arr.std(ddof=1)) / math.sqrt(arr.size) if arr.size > 1 else 0.0
    return float(arr.mean()), ci


def _aggregate(outcomes: Sequence[RepOutcome], retained_frac: float = 1.0) -> dict[str, SchemeStats]:
    m, ci = _stats([o.uniform for o in outcomes])
    schemes = {"uniform": SchemeStats(m, ci)}
    m, ci = _stats([o.classical for o in outcomes])
    iters = [o.classical_iters for o in outcomes]
    schemes["classical"] = SchemeStats(
        m, ci,
        float(np.mean(iters)) if iters else None,
        float(np.mean([not o.classical_conv for o in outcomes])) if iters else None,
    )
    q = [o for o in outcomes if o.quantum is not None]
    if q or (not outcomes and retained_frac == 0.0):
        m, ci = _stats([o.quantum for o in q])
        runs_i = [i for o in q for i in o.quantum_iters]
        runs_c = [c for o in q for c in o.quantum_conv]
        schemes["quantum"] = SchemeStats(
            m, ci,
            float(np.mean(runs_i)) if runs_i else None,
            float(np.mean([not c for c in runs_c])) if runs_c else None,
        )
    return schemes


def _sweep(study: str, axis_name: str, axis: Sequence[float],
           per_rep: list[list[RepOutcome]]) -> SweepResult:
    points = []
    for k, value in enumerate(axis):
        points.append(AxisPoint(float(value), _aggregate([rep[k] for rep in per_rep])))
    return SweepResult(study, axis_name, points)


def quantum_beats_classical(o: RepOutcome) -> bool:
    return o.quantum is not None and o.quantum > o.classical + TOL.quantum_gain * max(1.0, abs(o.classical))


# ---------------------------------------------------------------------------
# studies
# ---------------------------------------------------------------------------

def run_gamma_sweep(cfg: ExperimentConfig) -> SweepResult:
    """Mean rates of all three schemes for every entanglement level."""
    return _sweep("gamma", "gamma", cfg.harness.gammas, _run_reps(_rep_gamma, cfg))


def run_filtered_gamma_sweep(cfg: ExperimentConfig) -> SweepResult:
    """Like the gamma sweep, restricted to replications where the quantum
    solution strictly beats the classical NE at that gamma."""
    per_rep = _run_reps(_rep_gamma, cfg)
    points = []
    for k, g in enumerate(cfg.harness.gammas):
        kept = [rep[k] for rep in per_rep if quantum_beats_classical(rep[k])]
        frac = len(kept) / len(per_rep)
        if not kept:
            warnings.warn(f"no replication retained at gamma={g!r}", RuntimeWarning, stacklevel=2)
        points.append(AxisPoint(float(g), _aggregate(kept, frac), frac))
    return SweepResult("gamma-filtered", "gamma", points)


def run_power_sweep(cfg: ExperimentConfig) -> SweepResult:
    """Mean rates versus transmit power, quantum game at the configured gamma."""
    return _sweep("power", "tx_power", cfg.harness.powers, _run_reps(_rep_power, cfg))


def run_convergence_study(cfg: ExperimentConfig) -> SweepResult:
    """Iteration counts and non-convergence versus the quantum timer.

    The timer axis applies to the quantum dynamics; classical dynamics keep
    their own budget, which they never exhaust.
    """
    return _sweep("convergence", "timer", cfg.harness.timers, _run_reps(_rep_timer, cfg))


STUDIES: dict[str, Callable[[ExperimentConfig], SweepResult]] = {
    "sweep-gamma": run_gamma_sweep,
    "sweep-gamma-filtered": run_filtered_gamma_sweep,
    "sweep-power": run_power_sweep,
    "convergence": run_convergence_study,
}
