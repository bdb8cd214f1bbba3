"""Time-local generators of the qubit master equation.

Three routes lead to a :class:`Generator`:

* the closed forms for pure random-field dephasing and for the same with
  added population damping (rate ``gamma``, dimensionless);
* reconstruction from an :class:`~nmwitness.dynamics.EnsembleMap` through its
  Pauli transfer matrix ``F`` and ``dF/dtau F^-1``;
* arbitrary superoperators wrapped by hand (``kind="custom"``).

:func:`canonical_decompose` brings any trace- and Hermiticity-preserving
generator to diagonal Lindblad form.
"""
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .dynamics import (
    IDENTITY,
    PAULIS,
    RANDOM_FIELD_MAP,
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    EnsembleMap,
    choi_of_linear_map,
)
from .errors import InvariantError, ParameterError, SingularityError
from .linalg import dagger, devectorize, hermitian_eigen, kron, sandwich, vectorize

DELTA = 1e-3
F_INVERTIBLE_TOL = 1e-6

# Orthonormal Hermitian operator basis sigma_k / sqrt(2), k = 0..3.
PAULI_BASIS = tuple(p / np.sqrt(2) for p in PAULIS)
TRACELESS_BASIS = PAULI_BASIS[1:]


def _ketbra(i, j):
    e = np.zeros((2, 2), dtype=complex)
    e[i, j] = 1.0
    return e


# |2><2|, |1><1|, |2><1|, |1><2|  (|1> is index 0)
KETBRA_BASIS = (_ketbra(1, 1), _ketbra(0, 0), _ketbra(1, 0), _ketbra(0, 1))


def nearest_singular_point(tau: float) -> float:
    """Closest ``pi/4 + k pi/2`` to ``tau``."""
    k = np.round((tau - np.pi / 4) / (np.pi / 2))
    return float(np.pi / 4 + k * np.pi / 2)


def check_regular(tau: float, delta: float = DELTA) -> None:
    ts = nearest_singular_point(tau)
    # points on the window edge (up to rounding of ts +- delta) are regular
    if abs(tau - ts) < delta - 4 * np.finfo(float).eps * max(1.0, abs(tau)):
        raise SingularityError(
            f"tau={tau!r} lies within {delta:g} of the singular point {ts!r}",
            tau=tau,
            tau_singular=ts,
        )


@dataclass(frozen=True, eq=False)
class Generator:
    """Superoperator ``L(tau)`` acting on column-stacked 2x2 matrices."""

    action: np.ndarray
    tau: float = float("nan")
    kind: str = "custom"
    gamma: float = 0.0

    def __call__(self, rho) -> np.ndarray:
        return devectorize(self.action @ vectorize(rho))

    def choi(self) -> np.ndarray:
        return choi_of_linear_map(self)

    def check(self, tol: float = 1e-10) -> "Generator":
        """Raise :class:`InvariantError` unless trace and Hermiticity are preserved."""
        scale = max(1.0, float(np.max(np.abs(self.action))))
        for i in range(2):
            for j in range(2):
                e = _ketbra(i, j)
                out = self(e)
                if abs(np.trace(out)) > tol * scale:
                    raise InvariantError(
                        f"generator is not trace preserving: |Tr L(E_{i}{j})| = {abs(np.trace(out)):.3e}"
                    )
                herm = np.max(np.abs(dagger(out) - self(dagger(e))))
                if herm > tol * scale:
                    raise InvariantError(
                        f"generator is not Hermiticity preserving (defect {herm:.3e})"
                    )
        return self


def dissipator(op) -> np.ndarray:
    """Superoperator of ``X -> op X op^dag - {op^dag op, X}/2``."""
    op = np.asarray(op, dtype=complex)
    n = dagger(op) @ op
    return sandwich(op, dagger(op)) - 0.5 * (sandwich(n, IDENTITY) + sandwich(IDENTITY, n))


def hamiltonian_action(h) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    return -1j * (sandwich(h, IDENTITY) - sandwich(IDENTITY, h))


def dephasing_rate(tau: float, delta: float = DELTA) -> float:
    """The time-dependent rate ``tan(2 tau)`` of the random-field master equation."""
    check_regular(tau, delta)
    return float(np.tan(2 * tau))


def generator_nondissipative(tau: float, delta: float = DELTA) -> Generator:
    """``rho -> tan(2 tau) (sigma_y rho sigma_y - rho)``."""
    rate = dephasing_rate(tau, delta)
    action = rate * (sandwich(SIGMA_Y, SIGMA_Y) - np.eye(4))
    return Generator(action, tau=tau, kind="nondissipative")


def generator_dissipative(tau: float, gamma: float, delta: float = DELTA) -> Generator:
    """Random-field dephasing plus population damping with dimensionless rate ``gamma``."""
    if not gamma >= 0:
        raise ParameterError(f"decay rate must be non-negative, got {gamma!r}")
    base = generator_nondissipative(tau, delta)
    action = base.action + gamma * dissipator(SIGMA_MINUS)
    return Generator(action, tau=tau, kind="dissipative", gamma=float(gamma))


# -- reconstruction from the map -------------------------------------------------


@dataclass(frozen=True, eq=False)
class AppendixMatrices:
    """Intermediate matrices of the map -> master equation construction.

    ``F[k, l] = Tr[G_k Lambda(G_l)]`` in the basis ``G_k = sigma_k/sqrt(2)``,
    ``R`` holds the coefficients of ``L(rho) = sum_ab R_ab t_a rho t_b^dag``
    over ``t_a`` in ``KETBRA_BASIS``.
    """

    F: np.ndarray
    Fdot: np.ndarray
    R: np.ndarray
    G: Tuple[np.ndarray, ...] = field(default=PAULI_BASIS)
    ketbras: Tuple[np.ndarray, ...] = field(default=KETBRA_BASIS)

    @property
    def rate_matrix(self) -> np.ndarray:
        """``dF/dtau F^-1``: the generator in the Pauli basis."""
        return self.Fdot @ np.linalg.inv(self.F)


def transfer_matrix(tau: float, ensemble: EnsembleMap = RANDOM_FIELD_MAP) -> np.ndarray:
    return np.array(
        [[np.trace(gk @ ensemble(tau, gl)).real for gl in PAULI_BASIS] for gk in PAULI_BASIS]
    )


def transfer_matrix_derivative(tau: float, ensemble: EnsembleMap = RANDOM_FIELD_MAP) -> np.ndarray:
    return np.array(
        [
            [np.trace(gk @ ensemble.derivative(tau, gl)).real for gl in PAULI_BASIS]
            for gk in PAULI_BASIS
        ]
    )


def ketbra_coefficients(rates: np.ndarray) -> np.ndarray:
    """Coefficient matrix ``R`` from the Pauli-basis generator ``rates``.

    ``L(X) = sum_rs rates[r, s] G_r Tr[G_s X]``. Writing each term as
    ``sum_ab c_ab t_a X t_b^dag`` gives
    ``R_ab = sum_rs rates[r, s] Tr[G_s t_a^dag G_r t_b]``.
    """
    n = len(KETBRA_BASIS)
    R = np.zeros((n, n), dtype=complex)
    for a, ta in enumerate(KETBRA_BASIS):
        for b, tb in enumerate(KETBRA_BASIS):
            R[a, b] = sum(
                rates[r, s] * np.trace(gs @ dagger(ta) @ gr @ tb)
                for r, gr in enumerate(PAULI_BASIS)
                for s, gs in enumerate(PAULI_BASIS)
            )
    return R


def action_from_ketbra_coefficients(R: np.ndarray) -> np.ndarray:
    action = np.zeros((4, 4), dtype=complex)
    for a, ta in enumerate(KETBRA_BASIS):
        for b, tb in enumerate(KETBRA_BASIS):
            if R[a, b] != 0:
                action += R[a, b] * sandwich(ta, dagger(tb))
    return action


def reconstruct_generator_from_map(
    ensemble: EnsembleMap = RANDOM_FIELD_MAP, tau: float = 0.0
) -> Tuple[AppendixMatrices, Generator]:
    """Build ``F``, ``dF/dtau`` and ``R`` from the map and assemble ``L(tau)``.

    Raises
    ------
    SingularityError
        If ``F(tau)`` is not invertible (``|cos 2 tau| <= 1e-6`` for the
        random-field map).
    """
    F = transfer_matrix(tau, ensemble)
    sv = np.linalg.svd(F, compute_uv=False)
    if sv[-1] <= F_INVERTIBLE_TOL:
        raise SingularityError(
            f"transfer matrix is not invertible at tau={tau!r} (smallest singular value {sv[-1]:.3e})",
            tau=tau,
            tau_singular=nearest_singular_point(tau),
        )
    Fdot = transfer_matrix_derivative(tau, ensemble)
    mats = AppendixMatrices(F=F, Fdot=Fdot, R=ketbra_coefficients(Fdot @ np.linalg.inv(F)))
    gen = Generator(action_from_ketbra_coefficients(mats.R), tau=tau, kind="reconstructed")
    return mats, gen


# -- canonical (diagonal Lindblad) form ------------------------------------------


@dataclass(frozen=True, eq=False)
class CanonicalForm:
    """``L(rho) = -i[H, rho] + sum_k rate_k (L_k rho L_k^dag - {L_k^dag L_k, rho}/2)``.

    ``operators`` are traceless and Hilbert-Schmidt orthonormal, rates are
    sorted in descending order. ``kossakowski`` is the coefficient matrix in
    the basis ``sigma_{x,y,z}/sqrt(2)`` before diagonalization.
    """

    rates: np.ndarray
    operators: Tuple[np.ndarray, ...]
    hamiltonian: np.ndarray
    kossakowski: np.ndarray

    @property
    def channels(self):
        return list(zip(self.rates, self.operators))

    def action(self) -> np.ndarray:
        out = hamiltonian_action(self.hamiltonian)
        for rate, op in self.channels:
            out = out + rate * dissipator(op)
        return out


def canonical_decompose(gen: Generator) -> CanonicalForm:
    """Diagonal Lindblad form of a trace- and Hermiticity-preserving generator.

    The generator is expanded as ``sum_ij c_ij F_i rho F_j^dag`` over the
    orthonormal basis ``F_0 = I/sqrt(2)``, ``F_i = sigma_i/sqrt(2)``. The
    traceless block ``c_ij (i, j >= 1)`` is the Kossakowski matrix; the
    ``c_i0`` column carries the Hamiltonian part, which is split off before
    diagonalizing.
    """
    gen.check()
    basis = PAULI_BASIS
    c = np.array(
        [
            [np.vdot(sandwich(fi, dagger(fj)), gen.action) for fj in basis]
            for fi in basis
        ]
    )
    kossakowski = c[1:, 1:]
    kossakowski = 0.5 * (kossakowski + dagger(kossakowski))

    # L(rho) = K rho + rho K^dag + dissipative part, with K = c00/4 I + sum_i c_i0 F_i / sqrt(2)
    k_op = c[0, 0] / 4 * IDENTITY + sum(c[i, 0] * basis[i] for i in range(1, 4)) / np.sqrt(2)
    hamiltonian = (dagger(k_op) - k_op) / 2j

    rates, vecs = hermitian_eigen(kossakowski)
    operators = tuple(
        sum(vecs[i, k] * TRACELESS_BASIS[i] for i in range(3)) for k in range(3)
    )
    return CanonicalForm(
        rates=rates, operators=operators, hamiltonian=hamiltonian, kossakowski=kossakowski
    )


def ach_rates_analytic(tau: float, gamma: float, delta: float = DELTA) -> Tuple[float, float]:
    """Closed-form canonical rates ``(gamma_plus, gamma_minus)`` of the damped equation."""
    t = dephasing_rate(tau, delta)
    root = np.sqrt(gamma**2 + 4 * t**2)
    return (gamma + 2 * t + root) / 2, (gamma + 2 * t - root) / 2


def ach_operators_analytic(tau: float, gamma: float, delta: float = DELTA):
    """Closed-form channel operators ``(L_plus, L_minus)``, unit Hilbert-Schmidt norm.

    Each is ``(u1 sigma_x + u2 sigma_y)/sqrt(2)`` with
    ``(u1, u2) = (i(-2t +/- s), gamma) / sqrt(gamma^2 + (2t -/+ s)^2)``,
    ``t = tan 2 tau``, ``s = sqrt(gamma^2 + 4 t^2)``. The proportional vector
    ``(i gamma, 2t +/- s)`` is used instead when it is better conditioned
    (the first form degenerates to 0/0 as ``gamma -> 0``).
    """
    t = dephasing_rate(tau, delta)
    s = np.sqrt(gamma**2 + 4 * t**2)
    ops = []
    for sign in (1.0, -1.0):
        u = np.array([1j * (-2 * t + sign * s), gamma], dtype=complex)
        alt = np.array([1j * gamma, 2 * t + sign * s], dtype=complex)
        if np.linalg.norm(alt) > np.linalg.norm(u):
            u = alt
        norm = np.linalg.norm(u)
        if norm == 0:
            # gamma == 0 and t == 0: both rates vanish, any orthonormal pair works
            u = np.array([0, 1] if sign > 0 else [1j, 0], dtype=complex)
            norm = 1.0
        u = u / norm
        ops.append((u[0] * SIGMA_X + u[1] * SIGMA_Y) / np.sqrt(2))
    return tuple(ops)
