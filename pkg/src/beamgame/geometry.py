"""
Planar wearable-network topologies with circular body blockage.

Each user is a disk (the body) with a transmitter and a receiver placed at a
fixed offset outside the disk edge. Links are LOS unless the straight segment
between the two endpoints cuts through the interior of some disk.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

TWO_PI = 2.0 * math.pi


class GeometryError(ValueError):
    """Raised for degenerate geometric input."""


class PlacementError(RuntimeError):
    """Rejection sampling could not place all users."""


class LinkState(enum.Enum):
    LOS = "LOS"
    NLOS = "NLOS"


@dataclass(frozen=True)
class Point2D:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise GeometryError(f"non-finite point ({self.x}, {self.y})")

    def distance(self, other: Point2D) -> float:
        return math.hypot(other.x - self.x, other.y - self.y)

    def shifted(self, dx: float, dy: float) -> Point2D:
        return Point2D(self.x + dx, self.y + dy)


@dataclass(frozen=True)
class BlockageDisk:
    center: Point2D
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise GeometryError(f"disk radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class UserPair:
    tx: Point2D
    rx: Point2D
    body: BlockageDisk


@dataclass(frozen=True)
class TopologyConfig:
    """Parameters of the random topology generator (lengths in meters)."""

    n_users: int = 2
    width: float = 10.0
    height: float = 10.0
    body_radius: float = 0.15
    device_offset: float = 0.05
    # whether a user's own body can block the link between its own tx and rx
    self_blockage: bool = True
    max_attempts: int = 10_000

    def __post_init__(self):
        if self.n_users < 1:
            raise ValueError("n_users must be >= 1")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("area dimensions must be positive")
        if self.body_radius <= 0:
            raise ValueError("body_radius must be positive")
        if self.device_offset <= 0:
            raise ValueError("device_offset must be positive")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")

    @property
    def footprint(self) -> float:
        """Radius of the circle on which a user's devices sit."""
        return self.body_radius + self.device_offset


@dataclass(frozen=True)
class NetworkTopology:
    pairs: tuple[UserPair, ...]
    width: float
    height: float
    self_blockage: bool = True

    def __post_init__(self):
        if len(self.pairs) < 1:
            raise GeometryError("topology needs at least one user")

    @property
    def n(self) -> int:
        return len(self.pairs)

    @property
    def disks(self) -> tuple[BlockageDisk, ...]:
        return tuple(p.body for p in self.pairs)

    def link_blockers(self, i: int, j: int) -> tuple[BlockageDisk, ...]:
        """Disks that may block the link from transmitter i to receiver j."""
        if i == j and not self.self_blockage:
            return tuple(d for k, d in enumerate(self.disks) if k != i)
        return self.disks

    def translated(self, dx: float, dy: float) -> NetworkTopology:
        pairs = tuple(
            UserPair(
                p.tx.shifted(dx, dy),
                p.rx.shifted(dx, dy),
                BlockageDisk(p.body.center.shifted(dx, dy), p.body.radius),
            )
            for p in self.pairs
        )
        return NetworkTopology(pairs, self.width, self.height, self.self_blockage)

    def to_dict(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "self_blockage": self.self_blockage,
            "pairs": [
                {
                    "tx": [p.tx.x, p.tx.y],
                    "rx": [p.rx.x, p.rx.y],
                    "body": {"center": [p.body.center.x, p.body.center.y],
                             "radius": p.body.radius},
                }
                for p in self.pairs
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> NetworkTopology:
        pairs = tuple(
            UserPair(
                Point2D(*p["tx"]),
                Point2D(*p["rx"]),
                BlockageDisk(Point2D(*p["body"]["center"]), p["body"]["radius"]),
            )
            for p in d["pairs"]
        )
        return cls(pairs, d["width"], d["height"], d.get("self_blockage", True))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def bearing(start: Point2D, end: Point2D) -> float:
    """Planar angle of the vector start -> end, in [0, 2*pi)."""
    dx, dy = end.x - start.x, end.y - start.y
    if dx == 0.0 and dy == 0.0:
        raise GeometryError("bearing undefined for coincident points")
    ang = math.atan2(dy, dx) % TWO_PI
    # atan2 of a tiny negative dy can round up to exactly 2*pi after the modulo
    return 0.0 if ang >= TWO_PI else ang


def segment_point_distance(a: Point2D, b: Point2D, c: Point2D) -> float:
    """Distance from c to the closed segment a-b."""
    ux, uy = b.x - a.x, b.y - a.y
    wx, wy = c.x - a.x, c.y - a.y
    seg2 = ux * ux + uy * uy
    t = 0.0 if seg2 == 0.0 else min(1.0, max(0.0, (wx * ux + wy * uy) / seg2))
    return math.hypot(wx - t * ux, wy - t * uy)


def los_state(a: Point2D, b: Point2D, disks: Sequence[BlockageDisk]) -> LinkState:
    """NLOS iff segment a-b enters the interior of a disk; tangency is LOS."""
    if a == b:
        raise GeometryError("link endpoints coincide")
    for disk in disks:
        if segment_point_distance(a, b, disk.center) < disk.radius:
            return LinkState.NLOS
    return LinkState.LOS


def _on_circle(center: Point2D, radius: float, angle: float) -> Point2D:
    return Point2D(center.x + radius * math.cos(angle), center.y + radius * math.sin(angle))


def generate_topology(cfg: TopologyConfig, rng: np.random.Generator) -> NetworkTopology:
    """Draw a random topology.

    Body centers are uniform over the part of the area that keeps a user's
    whole footprint (body plus device ring) inside the area, rejected when
    two footprints overlap. Each device sits at ``device_offset`` from its
    own body edge at an independent uniform angle.
    """
    foot = cfg.footprint
    if 2 * foot > cfg.width or 2 * foot > cfg.height:
        raise PlacementError("area too small for a single user footprint")

    centers: list[Point2D] = []
    attempts = 0
    while len(centers) < cfg.n_users:
        if attempts >= cfg.max_attempts:
            raise PlacementError(
                f"placed {len(centers)} of {cfg.n_users} users in {cfg.max_attempts} attempts"
            )
        attempts += 1
        x = rng.uniform(foot, cfg.width - foot)
        y = rng.uniform(foot, cfg.height - foot)
        cand = Point2D(float(x), float(y))
        if all(cand.distance(c) > 2 * foot for c in centers):
            centers.append(cand)

    pairs = []
    for c in centers:
        tx_ang, rx_ang = rng.uniform(0.0, TWO_PI, size=2)
        pairs.append(
            UserPair(
                tx=_on_circle(c, foot, float(tx_ang)),
                rx=_on_circle(c, foot, float(rx_ang)),
                body=BlockageDisk(c, cfg.body_radius),
            )
        )
    return NetworkTopology(tuple(pairs), cfg.width, cfg.height, cfg.self_blockage)
