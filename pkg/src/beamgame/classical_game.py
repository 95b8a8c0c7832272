"""
The N-player beam-direction game.

Each transmitter picks a boresight from ``{0, phi, 2 phi, ...}`` and earns the
rate of its own link. Its choice only enters its own utility through the
desired-link antenna gain, so the direction that puts the receiver in the
mainlobe is a dominant strategy.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import channel
from .channel import AntennaPattern, LinkGainTable, RadioParams, angular_distance
from .geometry import TWO_PI, NetworkTopology
from .tolerances import TOL

TIE_BREAKS = ("lowest", "random")


@dataclass(frozen=True)
class StrategySpace:
    beamwidth: float

    def __post_init__(self):
        k = TWO_PI / self.beamwidth
        if self.beamwidth <= 0 or abs(k - round(k)) > 1e-9:
            raise ValueError("beamwidth must divide 2*pi exactly")

    @property
    def directions(self) -> tuple[float, ...]:
        k = int(round(TWO_PI / self.beamwidth))
        return tuple(s * self.beamwidth for s in range(k))

    def __len__(self) -> int:
        return len(self.directions)

    def __contains__(self, theta: float) -> bool:
        return any(abs(theta - d) <= TOL.angle for d in self.directions)


@dataclass(frozen=True)
class GameInstance:
    topology: NetworkTopology | None
    table: LinkGainTable
    patterns: tuple[AntennaPattern, ...]
    radio: RadioParams
    spaces: tuple[StrategySpace, ...] = field(default=())

    def __post_init__(self):
        n = self.table.n
        if len(self.patterns) != n:
            raise ValueError(f"need {n} antenna patterns, got {len(self.patterns)}")
        if not self.spaces:
            object.__setattr__(self, "spaces", tuple(StrategySpace(p.beamwidth) for p in self.patterns))
        if len(self.spaces) != n:
            raise ValueError("one strategy space per player required")
        if self.topology is not None and self.topology.n != n:
            raise ValueError("topology and gain table disagree on N")

    @property
    def n(self) -> int:
        return self.table.n

    @classmethod
    def build(cls, topology: NetworkTopology, table: LinkGainTable,
              pattern: AntennaPattern, radio: RadioParams) -> GameInstance:
        """Instance where every transmitter uses the same antenna pattern."""
        return cls(topology, table, (pattern,) * table.n, radio)

    def with_radio(self, radio: RadioParams) -> GameInstance:
        return GameInstance(self.topology, self.table, self.patterns, radio, self.spaces)

    def desired_bearing(self, i: int) -> float:
        return float(self.table.bearing[i, i])


@dataclass(frozen=True)
class DynamicsResult:
    profile: tuple[float, ...]
    iterations: int
    converged: bool


def utility(g: GameInstance, i: int, profile: Sequence[float]) -> float:
    """Rate of transmitter i's own link under the given boresight profile."""
    return channel.rate(channel.sinr(i, profile, g.table, g.patterns, g.radio))


def _with(profile: Sequence[float], i: int, theta: float) -> tuple[float, ...]:
    out = list(profile)
    out[i] = theta
    return tuple(out)


def best_response(g: GameInstance, i: int, profile: Sequence[float]) -> tuple[float, ...]:
    """All directions of player i that maximize its utility, ascending.

    Only ``profile[j]`` for ``j != i`` is read; the entry at i is a placeholder.
    """
    dirs = g.spaces[i].directions
    utils = [utility(g, i, _with(profile, i, d)) for d in dirs]
    best = max(utils)
    return tuple(d for d, u in zip(dirs, utils) if u >= best - TOL.improvement * max(1.0, best))


def covering_directions(g: GameInstance, i: int) -> tuple[float, ...]:
    """Directions whose mainlobe contains player i's own receiver."""
    half = g.patterns[i].beamwidth / 2
    phi = g.desired_bearing(i)
    return tuple(d for d in g.spaces[i].directions if angular_distance(phi, d) <= half + TOL.angle)


def is_nash(g: GameInstance, profile: Sequence[float]) -> bool:
    """Exhaustive unilateral-deviation check."""
    for i in range(g.n):
        current = utility(g, i, profile)
        for d in g.spaces[i].directions:
            if utility(g, i, _with(profile, i, d)) > current + TOL.improvement * max(1.0, current):
                return False
    return True


def enumerate_nash(g: GameInstance) -> list[tuple[float, ...]]:
    """Brute-force list of all pure NE profiles (exponential in N)."""
    return [p for p in itertools.product(*(s.directions for s in g.spaces)) if is_nash(g, p)]


def br_dynamics(g: GameInstance, init: Sequence[float], timer: int,
                tie_break: str = "lowest", rng: np.random.Generator | None = None) -> DynamicsResult:
    """Sequential best-response dynamics in index order.

    Every single-player update costs one timer tick. A player whose current
    direction is already a best response keeps it. The run stops as soon as
    the profile is an NE after an update, or when the timer runs out.
    """
    if timer < 1:
        raise ValueError("timer must be >= 1")
    if tie_break not in TIE_BREAKS:
        raise ValueError(f"unknown tie_break {tie_break!r}")
    if tie_break == "random" and rng is None:
        raise ValueError("random tie-breaking needs a generator")
    if len(init) != g.n:
        raise ValueError("initial profile has wrong length")

    profile = tuple(float(t) for t in init)
    iterations = 0
    while iterations < timer:
        i = iterations % g.n
        choices = best_response(g, i, profile)
        if not any(abs(profile[i] - c) <= TOL.angle for c in choices):
            # an optimal current choice is kept; ties are broken only when moving
            pick = choices[0] if tie_break == "lowest" else choices[int(rng.integers(len(choices)))]
            profile = _with(profile, i, pick)
        iterations += 1
        if is_nash(g, profile):
            return DynamicsResult(profile, iterations, True)
    return DynamicsResult(profile, iterations, False)


def random_profile(g: GameInstance, rng: np.random.Generator) -> tuple[float, ...]:
    """One direction per player, uniform over its discrete strategy space."""
    return tuple(s.directions[int(rng.integers(len(s)))] for s in g.spaces)


def uniform_profile(g: GameInstance, rng: np.random.Generator,
                    low: float = 0.0, high: float = TWO_PI) -> tuple[float, ...]:
    """Continuous boresights drawn uniformly from [low, high) for the baseline."""
    if not high > low:
        raise ValueError("empty boresight interval")
    return tuple(float(x) for x in rng.uniform(low, high, size=g.n))


def payoff_tables(g: GameInstance) -> np.ndarray:
    """Utilities of the two-player, three-direction game.

    Returns an array of shape (2, 3, 3); ``tables[p, s, t]`` is player p's
    rate when player 0 points at direction s and player 1 at direction t.
    """
    if g.n != 2 or any(len(s) != 3 for s in g.spaces):
        raise ValueError("payoff tables need exactly 2 players with 3 directions each")
    d0, d1 = g.spaces[0].directions, g.spaces[1].directions
    out = np.empty((2, 3, 3))
    for s in range(3):
        for t in range(3):
            prof = (d0[s], d1[t])
            out[0, s, t] = utility(g, 0, prof)
            out[1, s, t] = utility(g, 1, prof)
    return out


def mean_utility(g: GameInstance, profile: Sequence[float]) -> float:
    return float(np.mean([utility(g, i, profile) for i in range(g.n)]))


def nash_record(g: GameInstance, result: DynamicsResult) -> dict:
    """JSON-ready summary of a dynamics run."""
    return {
        "profile": list(result.profile),
        "utilities": [utility(g, i, result.profile) for i in range(g.n)],
        "iterations": result.iterations,
        "converged": result.converged,
    }
