"""Numerical tolerances shared by every module."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # angle comparisons at mainlobe edges (boundary is inclusive)
    angle: float = 1e-12
    unitarity: float = 1e-12
    normalization: float = 1e-12
    # strict-improvement threshold for best responses and NE checks
    improvement: float = 1e-12
    # parameter triples closer than this are the same quantum strategy
    same_strategy: float = 1e-9
    # relative slack when deciding the quantum solution beats the classical NE
    quantum_gain: float = 1e-9


TOL = Tolerances()
