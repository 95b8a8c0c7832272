"""
Linear algebra of the two-player, three-direction quantized game.

Basis index s in {0, 1, 2} stands for boresight 2*pi*s/3. Two-player states
are 9-vectors flattened row-major, so amplitude (s, t) lives at 3*s + t.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .tolerances import TOL

HALF_PI = math.pi / 2

# anti-diagonal involution coupling the two registers
D = np.array([[0, 0, 1], [0, 1, 0], [1, 0, 0]], dtype=complex)
DD = np.kron(D, D)


class QuantumError(ValueError):
    pass


@dataclass(frozen=True)
class QuantumStrategyParams:
    alpha: float
    beta: float
    lam: float

    def __post_init__(self):
        for name in ("alpha", "beta", "lam"):
            v = getattr(self, name)
            if not -TOL.angle <= v <= HALF_PI + TOL.angle:
                raise QuantumError(f"{name}={v} outside [0, pi/2]")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.alpha, self.beta, self.lam)

    def on_manifold(self, tol: float = TOL.same_strategy) -> bool:
        """True when the triple lies on one of the three arcs searched by the game."""
        a, b, l = self.as_tuple()
        arc1 = abs(b) <= tol and abs(l) <= tol
        arc2 = abs(a - HALF_PI) <= tol and abs(l) <= tol
        arc3 = abs(a) <= tol and abs(b) <= tol
        return arc1 or arc2 or arc3

    def close_to(self, other: QuantumStrategyParams, tol: float = TOL.same_strategy) -> bool:
        return all(abs(x - y) <= tol for x, y in zip(self.as_tuple(), other.as_tuple()))


NAMED_STRATEGIES = {
    "Delta": QuantumStrategyParams(0.0, 0.0, 0.0),
    "Upsilon": QuantumStrategyParams(HALF_PI, 0.0, 0.0),
    "Omega": QuantumStrategyParams(HALF_PI, HALF_PI, 0.0),
    "Lambda": QuantumStrategyParams(0.0, 0.0, HALF_PI),
}
_ALIASES = {"Δ": "Delta", "Υ": "Upsilon", "Ω": "Omega", "Λ": "Lambda"}


def named_strategy(name: str) -> QuantumStrategyParams:
    key = _ALIASES.get(name, name)
    key = key[:1].upper() + key[1:].lower() if key else key
    try:
        return NAMED_STRATEGIES[key]
    except KeyError:
        raise QuantumError(f"unknown strategy name {name!r}") from None


def strategy_matrix(p: QuantumStrategyParams | Sequence[float]) -> np.ndarray:
    """3x3 unitary of a quantum beam strategy with parameters (alpha, beta, lambda)."""
    if not isinstance(p, QuantumStrategyParams):
        p = QuantumStrategyParams(*p)
    ca, sa = math.cos(p.alpha), math.sin(p.alpha)
    cb, sb = math.cos(p.beta), math.sin(p.beta)
    ph = cmath.exp(1j * p.lam)
    return np.array([
        [ca, -sa, 0.0],
        [sa * cb, ca * cb, -sb * ph],
        [sa * sb, ca * sb, cb * ph],
    ], dtype=complex)


def unitarity_error(u: np.ndarray) -> float:
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def _check_unitary(u: np.ndarray, what: str) -> None:
    if u.shape != (3, 3):
        raise QuantumError(f"{what} must be 3x3, got {u.shape}")
    if unitarity_error(u) > TOL.unitarity * 10:
        raise QuantumError(f"{what} is not unitary")


def entangler(gamma: float) -> np.ndarray:
    """exp(i*gamma*(D (x) D)/2) as a 9x9 matrix.

    (D (x) D) squares to the identity, so the exponential reduces to
    cos(gamma/2) I + i sin(gamma/2) (D (x) D).
    """
    if not -TOL.angle <= gamma <= HALF_PI + TOL.angle:
        raise QuantumError(f"gamma={gamma} outside [0, pi/2]")
    return math.cos(gamma / 2) * np.eye(9, dtype=complex) + 1j * math.sin(gamma / 2) * DD


def basis_state(s: int, t: int) -> np.ndarray:
    """Product basis vector e_s (x) e_t."""
    if not (0 <= s < 3 and 0 <= t < 3):
        raise QuantumError(f"basis indices ({s}, {t}) out of range")
    v = np.zeros(9, dtype=complex)
    v[3 * s + t] = 1.0
    return v


def _check_normalized(psi: np.ndarray) -> None:
    if psi.shape != (9,):
        raise QuantumError(f"state must have 9 amplitudes, got shape {psi.shape}")
    if abs(np.vdot(psi, psi).real - 1.0) > TOL.normalization * 10:
        raise QuantumError("state is not normalized")


def final_state(theta1: np.ndarray, theta2: np.ndarray, gamma: float,
                initial: np.ndarray | None = None) -> np.ndarray:
    """Apply J, then theta1 (x) theta2, then J^dagger to the initial state."""
    _check_unitary(theta1, "player 1 strategy")
    _check_unitary(theta2, "player 2 strategy")
    psi0 = basis_state(0, 0) if initial is None else np.asarray(initial, dtype=complex)
    _check_normalized(psi0)
    J = entangler(gamma)
    return J.conj().T @ (np.kron(theta1, theta2) @ (J @ psi0))


def collapse_probabilities(psi: np.ndarray) -> np.ndarray:
    """Outcome probabilities R[s, t] of measuring psi in the product basis."""
    psi = np.asarray(psi, dtype=complex)
    _check_normalized(psi)
    return (np.abs(psi) ** 2).reshape(3, 3)


def expected_utilities(theta1: np.ndarray, theta2: np.ndarray, gamma: float,
                       payoffs: np.ndarray, initial: np.ndarray | None = None) -> tuple[float, float]:
    """Both players' payoffs averaged over the collapse distribution.

    ``payoffs`` has shape (2, 3, 3), indexed [player, s, t].
    """
    payoffs = np.asarray(payoffs, dtype=float)
    if payoffs.shape != (2, 3, 3):
        raise QuantumError(f"payoffs must have shape (2, 3, 3), got {payoffs.shape}")
    R = collapse_probabilities(final_state(theta1, theta2, gamma, initial))
    return float(np.sum(payoffs[0] * R)), float(np.sum(payoffs[1] * R))


def outcome_probability_table(matrices: np.ndarray, gamma: float,
                              initial: np.ndarray | None = None) -> np.ndarray:
    """Collapse probabilities for every pair of strategies in a list.

    ``matrices`` has shape (G, 3, 3); the result has shape (G, G, 3, 3) with
    entry [a, b, s, t] for player 1 using strategy a and player 2 using b.
    Uses (A (x) B) vec(V) = vec(A V B^T) on the row-major flattening.
    """
    psi0 = basis_state(0, 0) if initial is None else np.asarray(initial, dtype=complex)
    _check_normalized(psi0)
    J = entangler(gamma)
    V = (J @ psi0).reshape(3, 3)
    W = np.einsum("aij,jk,blk->abil", matrices, V, matrices, optimize=True)
    G = matrices.shape[0]
    out = W.reshape(G, G, 9) @ J.conj()  # row vector times J^dagger^T == J^dagger @ column
    return (np.abs(out) ** 2).reshape(G, G, 3, 3)


def state_to_json(psi: np.ndarray) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in np.ravel(psi)]


def state_from_json(pairs: Sequence[Sequence[float]]) -> np.ndarray:
    return np.array([complex(re, im) for re, im in pairs])
