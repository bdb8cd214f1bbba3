"""Qubit under random external fields: states, field unitaries and the ensemble map.

Time is the dimensionless ``tau = lambda * t`` throughout. Basis ordering is
(|1>, |2>), i.e. index 0 is |1>.
"""
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import InvariantError, ParameterError
from .linalg import as_matrix, dagger, hermitian_eigen, hermiticity_defect, kron, sandwich

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_PLUS = 0.5 * (SIGMA_X + 1j * SIGMA_Y)
SIGMA_MINUS = 0.5 * (SIGMA_X - 1j * SIGMA_Y)
PAULIS = (IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z)

FIELD_PHASES = (0.0, np.pi)

STATE_TOL = 1e-12

# (|11> + |22>)/sqrt(2), system factor first
PHI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
PHI_PLUS_PROJECTOR = np.outer(PHI_PLUS, PHI_PLUS.conj())


def check_state(rho, tol: float = STATE_TOL) -> np.ndarray:
    """Validate a qubit density matrix and return it as a complex array."""
    rho = as_matrix(rho)
    if rho.shape != (2, 2):
        raise InvariantError(f"qubit state must be 2x2, got {rho.shape}")
    defect = hermiticity_defect(rho)
    if defect > tol:
        raise InvariantError(f"state is not Hermitian: max |rho - rho^dagger| = {defect:.3e}")
    tr = np.trace(rho)
    if abs(tr - 1) > tol:
        raise InvariantError(f"state trace is {tr.real:.15g}, expected 1")
    w, _ = hermitian_eigen(rho)
    if w[-1] < -tol:
        raise InvariantError(f"state has negative eigenvalue {w[-1]:.3e}")
    return rho


def bloch_vector(rho) -> np.ndarray:
    rho = as_matrix(rho)
    return np.real([np.trace(rho @ s) for s in PAULIS[1:]])


def state_from_bloch(r) -> np.ndarray:
    x, y, z = r
    return 0.5 * (IDENTITY + x * SIGMA_X + y * SIGMA_Y + z * SIGMA_Z)


def unitary_at(branch: int, tau: float) -> np.ndarray:
    """Field unitary of branch 1 (phase 0) or branch 2 (phase pi) at time ``tau``."""
    phi = _phase(branch)
    c, s = np.cos(tau), np.sin(tau)
    return np.array(
        [[c, np.exp(-1j * phi) * s], [-np.exp(1j * phi) * s, c]], dtype=complex
    )


def unitary_derivative_at(branch: int, tau: float) -> np.ndarray:
    phi = _phase(branch)
    c, s = np.cos(tau), np.sin(tau)
    return np.array(
        [[-s, np.exp(-1j * phi) * c], [-np.exp(1j * phi) * c, -s]], dtype=complex
    )


def _phase(branch):
    if branch not in (1, 2):
        raise ParameterError(f"branch index must be 1 or 2, got {branch!r}")
    return FIELD_PHASES[branch - 1]


@dataclass(frozen=True)
class Branch:
    probability: float
    unitary: Callable[[float], np.ndarray]
    derivative: Callable[[float], np.ndarray] = None


@dataclass(frozen=True)
class EnsembleMap:
    """Random-unitary map ``X -> sum_i p_i U_i(tau) X U_i(tau)^dagger``.

    Acts linearly on arbitrary 2x2 matrices; use :func:`apply_map` for
    validated state evolution.
    """

    branches: Sequence[Branch]

    def __post_init__(self):
        probs = np.array([b.probability for b in self.branches], dtype=float)
        if probs.size == 0 or np.any(probs < 0) or np.any(probs > 1):
            raise InvariantError(f"branch probabilities must lie in [0, 1], got {probs}")
        if abs(probs.sum() - 1) > 1e-12:
            raise InvariantError(f"branch probabilities sum to {probs.sum():.15g}")

    def __call__(self, tau: float, x) -> np.ndarray:
        x = as_matrix(x)
        out = np.zeros_like(x)
        for b in self.branches:
            u = b.unitary(tau)
            out += b.probability * (u @ x @ dagger(u))
        return out

    def derivative(self, tau: float, x) -> np.ndarray:
        """d/dtau of the map applied to a fixed ``x``."""
        x = as_matrix(x)
        out = np.zeros_like(x)
        for b in self.branches:
            if b.derivative is None:
                raise ParameterError("branch has no analytic derivative")
            u, du = b.unitary(tau), b.derivative(tau)
            term = du @ x @ dagger(u)
            out += b.probability * (term + dagger(term))
        return out

    def superoperator(self, tau: float) -> np.ndarray:
        out = np.zeros((4, 4), dtype=complex)
        for b in self.branches:
            u = b.unitary(tau)
            out += b.probability * sandwich(u, dagger(u))
        return out


def random_field_map() -> EnsembleMap:
    """The two-phase ensemble (phases 0 and pi, probability 1/2 each)."""
    return EnsembleMap(
        tuple(
            Branch(
                0.5,
                lambda tau, i=i: unitary_at(i, tau),
                lambda tau, i=i: unitary_derivative_at(i, tau),
            )
            for i in (1, 2)
        )
    )


RANDOM_FIELD_MAP = random_field_map()


def apply_map(tau: float, rho, ensemble: EnsembleMap = RANDOM_FIELD_MAP) -> np.ndarray:
    rho = check_state(rho)
    return ensemble(tau, rho)


def choi_of_map(tau: float, ensemble: EnsembleMap = RANDOM_FIELD_MAP) -> np.ndarray:
    """``(Lambda(tau, 0) x id)|Phi><Phi|`` with ``|Phi> = (|11> + |22>)/sqrt(2)``."""
    return choi_of_linear_map(lambda x: ensemble(tau, x))


def choi_of_linear_map(fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    out = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            e = np.zeros((2, 2), dtype=complex)
            e[i, j] = 1.0
            out += kron(fn(e), e)
    return 0.5 * out
