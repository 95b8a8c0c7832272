"""
Attenuation, sectored antenna gain, SINR and link rate.

Conventions: index ``i`` is a transmitter, ``j`` a receiver, and receiver
``i`` belongs to transmitter ``i``. Gains in tables are linear.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import TWO_PI, LinkState, NetworkTopology, bearing, los_state
from .tolerances import TOL

THERMAL_NOISE_DBM_HZ = -174.0


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class PathLossParams:
    """Constants of the log-distance attenuation model (dB, GHz)."""

    a_los: float = 32.5
    n_los: float = 2.0
    a_nlos: float = 45.5
    n_nlos: float = 2.5
    shadow_sigma: float = 1.7
    carrier_freq: float = 60.0

    def __post_init__(self):
        if self.n_los <= 0 or self.n_nlos <= 0:
            raise ValueError("path loss exponents must be positive")
        if self.carrier_freq <= 0:
            raise ValueError("carrier frequency must be positive")
        if self.shadow_sigma < 0:
            raise ValueError("shadow_sigma must be non-negative")

    def constants(self, state: LinkState) -> tuple[float, float]:
        if state is LinkState.LOS:
            return self.a_los, self.n_los
        return self.a_nlos, self.n_nlos


@dataclass(frozen=True)
class AntennaPattern:
    """Two-level sectored pattern: gain M inside the beam, m outside."""

    beamwidth: float = TWO_PI / 3
    main_gain: float = 10.0
    side_gain: float = 0.1

    def __post_init__(self):
        if not 0 < self.beamwidth <= TWO_PI + TOL.angle:
            raise ValueError(f"beamwidth must lie in (0, 2pi], got {self.beamwidth}")
        sectors = TWO_PI / self.beamwidth
        if abs(sectors - round(sectors)) > 1e-9:
            raise ValueError("beamwidth must divide 2*pi exactly")
        if not self.main_gain > self.side_gain > 0:
            raise ValueError("need main_gain > side_gain > 0")

    @property
    def n_sectors(self) -> int:
        return int(round(TWO_PI / self.beamwidth))

    @classmethod
    def from_db(cls, beamwidth: float, main_gain_db: float, side_gain_db: float) -> AntennaPattern:
        return cls(beamwidth, db_to_linear(main_gain_db), db_to_linear(side_gain_db))


@dataclass(frozen=True)
class RadioParams:
    tx_power: float = 0.1
    noise_power: float = dbm_to_watts(THERMAL_NOISE_DBM_HZ + 10 * math.log10(2.16e9) + 6.0)

    def __post_init__(self):
        if self.tx_power <= 0 or self.noise_power <= 0:
            raise ValueError("tx_power and noise_power must be positive")

    @classmethod
    def thermal(cls, tx_power: float = 0.1, bandwidth_hz: float = 2.16e9,
                noise_figure_db: float = 6.0) -> RadioParams:
        """Noise power from the -174 dBm/Hz thermal floor over a bandwidth."""
        noise_dbm = THERMAL_NOISE_DBM_HZ + 10 * math.log10(bandwidth_hz) + noise_figure_db
        return cls(tx_power, dbm_to_watts(noise_dbm))


@dataclass(frozen=True)
class LinkGainTable:
    """Per-link channel data; ``gain[i, j]`` is tx i -> rx j in linear scale."""

    gain: np.ndarray
    nlos: np.ndarray
    bearing: np.ndarray

    def __post_init__(self):
        n = self.gain.shape[0]
        if self.gain.shape != (n, n) or self.nlos.shape != (n, n) or self.bearing.shape != (n, n):
            raise ValueError("link tables must be square and of equal size")
        if not np.all(self.gain >= 0):
            raise ValueError("link gains must be non-negative")

    @property
    def n(self) -> int:
        return self.gain.shape[0]

    def state(self, i: int, j: int) -> LinkState:
        return LinkState.NLOS if self.nlos[i, j] else LinkState.LOS

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["tx", "rx", "state", "gain", "bearing"])
        for i in range(self.n):
            for j in range(self.n):
                w.writerow([i, j, self.state(i, j).value,
                            repr(float(self.gain[i, j])), repr(float(self.bearing[i, j]))])
        return buf.getvalue()


def path_loss_db(p: PathLossParams, state: LinkState, d: float, shadow_draw: float = 0.0) -> float:
    """Attenuation a + 20 log10(f) + 10 n log10(d) + z, with (a, n) picked by link state."""
    if not d > 0:
        raise ValueError(f"distance must be positive, got {d}")
    a, n = p.constants(state)
    return a + 20.0 * math.log10(p.carrier_freq) + 10.0 * n * math.log10(d) + shadow_draw


def to_linear_gain(loss_db: float) -> float:
    return 10.0 ** (-loss_db / 10.0)


def angular_distance(a: float, b: float) -> float:
    """Shortest way around the circle between two angles, in [0, pi]."""
    d = abs(a - b) % TWO_PI
    return min(d, TWO_PI - d)


def antenna_gain(pattern: AntennaPattern, boresight: float, bearing_angle: float) -> float:
    if angular_distance(bearing_angle, boresight) <= pattern.beamwidth / 2 + TOL.angle:
        return pattern.main_gain
    return pattern.side_gain


def build_gain_table(topo: NetworkTopology, p: PathLossParams,
                     rng: np.random.Generator | None = None) -> LinkGainTable:
    """Evaluate every tx -> rx link of a topology, one shadowing draw per link.

    Draws happen in row-major (i, j) order so a seed fixes the table. With
    ``shadow_sigma == 0`` the generator is never touched.
    """
    n = topo.n
    gain = np.empty((n, n))
    nlos = np.zeros((n, n), dtype=bool)
    bear = np.empty((n, n))
    if p.shadow_sigma > 0 and rng is None:
        raise ValueError("a random generator is required when shadow_sigma > 0")
    for i, src in enumerate(topo.pairs):
        for j, dst in enumerate(topo.pairs):
            state = los_state(src.tx, dst.rx, topo.link_blockers(i, j))
            z = float(rng.normal(0.0, p.shadow_sigma)) if p.shadow_sigma > 0 else 0.0
            loss = path_loss_db(p, state, src.tx.distance(dst.rx), z)
            gain[i, j] = to_linear_gain(loss)
            nlos[i, j] = state is LinkState.NLOS
            bear[i, j] = bearing(src.tx, dst.rx)
    return LinkGainTable(gain, nlos, bear)


def _pattern_for(patterns: AntennaPattern | Sequence[AntennaPattern], k: int) -> AntennaPattern:
    return patterns if isinstance(patterns, AntennaPattern) else patterns[k]


def sinr(i: int, profile: Sequence[float], table: LinkGainTable,
         patterns: AntennaPattern | Sequence[AntennaPattern], radio: RadioParams) -> float:
    """SINR at receiver i given every transmitter's boresight.

    The interference sum runs over interfering transmitters k != i at
    receiver i, i.e. sum_k g_ki h_ki P. Writing it as a sum over receivers
    (g_kj h_kj with k != j) describes the same quantity once receiver j is
    identified with pair i.
    """
    n = table.n
    if not 0 <= i < n:
        raise IndexError(f"transmitter index {i} out of range for {n} users")
    if len(profile) != n:
        raise ValueError(f"profile has {len(profile)} entries, expected {n}")
    P = radio.tx_power
    signal = antenna_gain(_pattern_for(patterns, i), profile[i], table.bearing[i, i]) * table.gain[i, i] * P
    interference = 0.0
    for k in range(n):
        if k != i:
            g = antenna_gain(_pattern_for(patterns, k), profile[k], table.bearing[k, i])
            interference += g * table.gain[k, i] * P
    return signal / (radio.noise_power + interference)


def rate(sinr_value: float) -> float:
    """Spectral efficiency log2(1 + SINR) in bit/s/Hz."""
    if sinr_value < 0:
        raise ValueError(f"SINR must be non-negative, got {sinr_value}")
    return math.log1p(sinr_value) / math.log(2.0)
