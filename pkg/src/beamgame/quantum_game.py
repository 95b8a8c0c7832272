"""
Best-response search over a discretized quantum strategy manifold.

Strategies are restricted to three arcs of the (alpha, beta, lambda) cube:
alpha varying (Delta -> Upsilon), beta varying at alpha = pi/2
(Upsilon -> Omega), and lambda varying at the origin (Delta -> Lambda). Each
arc is sampled at K evenly spaced points.

For a fixed entanglement level and payoff pair, the expected utilities of
every grid pair are precomputed into a G x G bimatrix, so best responses and
NE checks are table lookups.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .quantum_core import (
    HALF_PI,
    QuantumStrategyParams,
    basis_state,
    outcome_probability_table,
    strategy_matrix,
)
from .tolerances import TOL

RULE_UNIQUE = "unique-NE"
RULE_BEST = "best-of-NEs"
RULE_ENFORCED = "enforcement"


@dataclass(frozen=True)
class StrategyGrid:
    params: tuple[QuantumStrategyParams, ...]

    def __post_init__(self):
        for a in range(len(self.params)):
            for b in range(a):
                if self.params[a].close_to(self.params[b]):
                    raise ValueError(f"duplicate grid points {b} and {a}")

    def __len__(self) -> int:
        return len(self.params)

    def __getitem__(self, k: int) -> QuantumStrategyParams:
        return self.params[k]

    @property
    def matrices(self) -> np.ndarray:
        return _grid_matrices(self.params)

    def index_of(self, p: QuantumStrategyParams) -> int:
        for k, q in enumerate(self.params):
            if q.close_to(p):
                return k
        raise KeyError(p)


@lru_cache(maxsize=64)
def _grid_matrices(params: tuple[QuantumStrategyParams, ...]) -> np.ndarray:
    return np.array([strategy_matrix(p) for p in params])


@lru_cache(maxsize=64)
def build_grid(k: int) -> StrategyGrid:
    """K points per arc, endpoints included, shared endpoints kept once.

    Order: the alpha arc from Delta to Upsilon, the beta arc after Upsilon up
    to Omega, then the lambda arc after Delta up to Lambda. Index 0 is Delta.
    """
    if k < 2:
        raise ValueError("need at least 2 points per arc")
    ts = [HALF_PI * j / (k - 1) for j in range(k - 1)] + [HALF_PI]
    pts = [QuantumStrategyParams(t, 0.0, 0.0) for t in ts]
    pts += [QuantumStrategyParams(HALF_PI, t, 0.0) for t in ts[1:]]
    pts += [QuantumStrategyParams(0.0, 0.0, t) for t in ts[1:]]
    return StrategyGrid(tuple(pts))


@dataclass(frozen=True)
class QGameConfig:
    gamma: float = HALF_PI
    timer: int = 5
    restarts: int = 10
    grid_points: int = 16
    # classical directions (s, t) the two registers start in
    initial: tuple[int, int] = (0, 0)
    # search every grid pair, not only recorded profiles, when no NE is found
    full_grid_enforcement: bool = False

    def __post_init__(self):
        if not 0 <= self.gamma <= HALF_PI + TOL.angle:
            raise ValueError("gamma must lie in [0, pi/2]")
        if self.timer < 1:
            raise ValueError("timer must be >= 1")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.grid_points < 2:
            raise ValueError("grid_points must be >= 2")
        object.__setattr__(self, "initial", tuple(int(x) for x in self.initial))


@lru_cache(maxsize=32)
def _probability_table(k: int, gamma: float, initial: tuple[int, int]) -> np.ndarray:
    grid = build_grid(k)
    table = outcome_probability_table(grid.matrices, gamma, basis_state(*initial))
    table.setflags(write=False)
    return table


@dataclass(frozen=True)
class RunRecord:
    indices: tuple[int, int]
    strategies: tuple[QuantumStrategyParams, QuantumStrategyParams]
    utilities: tuple[float, float]
    converged: bool
    iterations: int
    # (iteration, player, chosen strategy, that player's expected rate)
    trace: tuple[tuple[int, int, QuantumStrategyParams, float], ...] = ()

    @property
    def mean_utility(self) -> float:
        return (self.utilities[0] + self.utilities[1]) / 2

    def to_dict(self) -> dict:
        return {
            "strategies": [list(s.as_tuple()) for s in self.strategies],
            "utilities": list(self.utilities),
            "converged": self.converged,
            "iterations": self.iterations,
        }


@dataclass(frozen=True)
class QSolution:
    indices: tuple[int, int]
    strategies: tuple[QuantumStrategyParams, QuantumStrategyParams]
    utilities: tuple[float, float]
    rule: str

    @property
    def mean_utility(self) -> float:
        return (self.utilities[0] + self.utilities[1]) / 2

    def to_dict(self) -> dict:
        return {
            "strategies": [list(s.as_tuple()) for s in self.strategies],
            "utilities": list(self.utilities),
            "rule": self.rule,
        }


class QuantumGame:
    """Two-player quantized game on a strategy grid.

    ``payoffs[p, s, t]`` is player p's classical rate when player 0 points at
    direction s and player 1 at direction t.
    """

    def __init__(self, payoffs: np.ndarray, gamma: float, grid_points: int = 16,
                 initial: tuple[int, int] = (0, 0)):
        self.payoffs = np.asarray(payoffs, dtype=float)
        if self.payoffs.shape != (2, 3, 3):
            raise ValueError("payoffs must have shape (2, 3, 3)")
        self.gamma = float(gamma)
        self.grid = build_grid(grid_points)
        self.initial = tuple(initial)
        self.prob = _probability_table(grid_points, self.gamma, self.initial)
        # eu[p, a, b]: expected rate of player p at grid pair (a, b)
        self.eu = np.einsum("abst,pst->pab", self.prob, self.payoffs)

    @classmethod
    def from_config(cls, payoffs: np.ndarray, cfg: QGameConfig) -> QuantumGame:
        return cls(payoffs, cfg.gamma, cfg.grid_points, cfg.initial)

    def __len__(self) -> int:
        return len(self.grid)

    def utilities(self, profile: Sequence[int]) -> tuple[float, float]:
        a, b = profile
        return float(self.eu[0, a, b]), float(self.eu[1, a, b])

    def _responses(self, player: int, opponent: int) -> np.ndarray:
        return self.eu[0, :, opponent] if player == 0 else self.eu[1, opponent, :]

    def best_response(self, player: int, opponent: int) -> int:
        """Grid index maximizing the player's expected rate; lowest index wins ties."""
        vals = self._responses(player, opponent)
        return int(np.flatnonzero(vals >= vals.max() - TOL.improvement)[0])

    def update(self, player: int, profile: Sequence[int]) -> int:
        """Strategy the player moves to: its current one if that is already a
        best response, otherwise the lowest-index best response."""
        vals = self._responses(player, profile[1 - player])
        if vals[profile[player]] >= vals.max() - TOL.improvement:
            return int(profile[player])
        return self.best_response(player, profile[1 - player])

    def is_nash(self, profile: Sequence[int]) -> bool:
        a, b = profile
        return bool(
            self.eu[0, :, b].max() <= self.eu[0, a, b] + TOL.improvement
            and self.eu[1, a, :].max() <= self.eu[1, a, b] + TOL.improvement
        )

    def nash_profiles(self) -> list[tuple[int, int]]:
        """All grid NE, by checking every pair."""
        best0 = self.eu[0].max(axis=0)[None, :]
        best1 = self.eu[1].max(axis=1)[:, None]
        mask = (self.eu[0] >= best0 - TOL.improvement) & (self.eu[1] >= best1 - TOL.improvement)
        return [(int(a), int(b)) for a, b in zip(*np.nonzero(mask))]

    def record(self, profile: Sequence[int], converged: bool, iterations: int,
               trace: tuple = ()) -> RunRecord:
        a, b = int(profile[0]), int(profile[1])
        return RunRecord((a, b), (self.grid[a], self.grid[b]), self.utilities((a, b)),
                         converged, iterations, trace)

    def dynamics(self, init: Sequence[int], timer: int, keep_trace: bool = False) -> RunRecord:
        """Sequential BR updates from ``init`` until an NE or the timer runs out.

        Expected rates are recomputed from the same initial register state on
        every update, so collapses never feed back into later rounds.
        """
        if timer < 1:
            raise ValueError("timer must be >= 1")
        profile = [int(init[0]), int(init[1])]
        trace = []
        iterations = 0
        while iterations < timer:
            player = iterations % 2
            profile[player] = self.update(player, profile)
            iterations += 1
            if keep_trace:
                trace.append((iterations, player, self.grid[profile[player]],
                              self.utilities(profile)[player]))
            if self.is_nash(profile):
                return self.record(profile, True, iterations, tuple(trace))
        return self.record(profile, False, iterations, tuple(trace))

    def max_mean_profile(self) -> tuple[int, int]:
        """Grid pair with the highest average expected rate."""
        mean = self.eu.mean(axis=0)
        a, b = np.unravel_index(int(np.argmax(mean)), mean.shape)
        return int(a), int(b)


def random_grid_profile(game: QuantumGame, rng: np.random.Generator) -> tuple[int, int]:
    a, b = rng.integers(len(game), size=2)
    return int(a), int(b)


def _same_profile(r: RunRecord, s: RunRecord) -> bool:
    return all(p.close_to(q) for p, q in zip(r.strategies, s.strategies))


def select_solution(records: Sequence[RunRecord], game: QuantumGame | None = None,
                    full_grid: bool = False) -> QSolution:
    """Pick the final profile from L recorded runs.

    One distinct converged NE is taken as is; among several the one with the
    best average rate wins; with none, the recorded profile with the best
    average rate is enforced (or the best grid pair when ``full_grid``).
    """
    if not records:
        raise ValueError("no run records to select from")
    nes: list[RunRecord] = []
    for r in records:
        if r.converged and not any(_same_profile(r, q) for q in nes):
            nes.append(r)
    if len(nes) == 1:
        r = nes[0]
        return QSolution(r.indices, r.strategies, r.utilities, RULE_UNIQUE)
    if nes:
        r = max(nes, key=lambda q: q.mean_utility)
        return QSolution(r.indices, r.strategies, r.utilities, RULE_BEST)
    if full_grid:
        if game is None:
            raise ValueError("full-grid enforcement needs the game")
        r = game.record(game.max_mean_profile(), False, 0)
    else:
        r = max(records, key=lambda q: q.mean_utility)
    return QSolution(r.indices, r.strategies, r.utilities, RULE_ENFORCED)


def solve(game: QuantumGame, cfg: QGameConfig, rng: np.random.Generator,
          keep_trace: bool = False) -> tuple[QSolution, list[RunRecord]]:
    """L restarts of the timed BR dynamics followed by solution selection."""
    records = [game.dynamics(random_grid_profile(game, rng), cfg.timer, keep_trace)
               for _ in range(cfg.restarts)]
    return select_solution(records, game, cfg.full_grid_enforcement), records


def trace_csv(records: Sequence[RunRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["run", "iteration", "player", "alpha", "beta", "lambda", "utility"])
    for run, rec in enumerate(records):
        for it, player, p, util in rec.trace:
            w.writerow([run, it, player, repr(p.alpha), repr(p.beta), repr(p.lam), repr(util)])
    return buf.getvalue()
