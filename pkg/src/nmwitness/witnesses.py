"""Non-Markovianity witnesses: BLP (trace-distance growth), RHP (divisibility),
ACH (negative canonical rates).

Conventions for the non-Markovian predicate of each witness:

========  =================  ===========================
criterion  value              flagged when
========  =================  ===========================
blp       sigma(tau)         sigma > ZERO_TOL
rhp       g(tau) >= 0        g > ZERO_TOL
ach       f(tau) <= 0        f < -ZERO_TOL
========  =================  ===========================
"""
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .dynamics import PHI_PLUS_PROJECTOR, RANDOM_FIELD_MAP, EnsembleMap, check_state
from .errors import ConvergenceError, DomainError, InvariantError, ParameterError, SingularityError
from .generators import (
    DELTA,
    Generator,
    ach_rates_analytic,
    check_regular,
    dephasing_rate,
    generator_dissipative,
)
from .linalg import trace_norm

ZERO_TOL = 1e-7
BLP_STEP = 1e-6
RHP_EPSILONS = (1e-4, 1e-5, 1e-6)
RHP_SPREAD_TOL = 1e-4
CRITERIA = ("blp", "rhp", "ach")


def trace_distance(rho1, rho2) -> float:
    rho1, rho2 = check_state(rho1), check_state(rho2)
    return 0.5 * trace_norm(rho1 - rho2)


@dataclass(frozen=True, eq=False)
class StatePair:
    """Two initial qubit states.

    Each is ``[[w, c e^{i phi}], [c e^{-i phi}, 1 - w]]`` with population ``w``,
    coherence magnitude ``c`` and phase ``phi``.
    """

    rho1: np.ndarray
    rho2: np.ndarray
    params: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        check_state(self.rho1)
        check_state(self.rho2)

    @classmethod
    def from_params(cls, pop1, coh1, phase1, pop2, coh2, phase2) -> "StatePair":
        for pop, coh in ((pop1, coh1), (pop2, coh2)):
            if coh < 0 or coh**2 > pop * (1 - pop) + 1e-15:
                raise InvariantError(
                    f"coherence {coh!r} too large for population {pop!r} (needs c^2 <= w(1-w))"
                )
        return cls(
            _parametrized_state(pop1, coh1, phase1),
            _parametrized_state(pop2, coh2, phase2),
            params=(pop1, coh1, phase1, pop2, coh2, phase2),
        )

    @classmethod
    def canonical(cls) -> "StatePair":
        """The orthogonal basis pair ``|1><1|``, ``|2><2|``."""
        return cls.from_params(1.0, 0.0, 0.0, 0.0, 0.0, 0.0)

    @classmethod
    def random(cls, rng: np.random.Generator) -> "StatePair":
        vals = []
        for _ in range(2):
            pop = rng.uniform(0, 1)
            coh = rng.uniform(0, 1) * np.sqrt(pop * (1 - pop))
            vals += [pop, coh, rng.uniform(0, 2 * np.pi)]
        return cls.from_params(*vals)

    @property
    def contracting_weight(self) -> float:
        """Squared half-length of the Bloch difference in the x-z plane.

        This is the part of the difference that the random-field map shrinks
        by ``cos 2 tau``; the y part is left untouched.
        """
        d = self.rho1 - self.rho2
        return float(d[0, 0].real ** 2 + d[0, 1].real ** 2)


def _parametrized_state(pop, coh, phase):
    off = coh * np.exp(1j * phase)
    return np.array([[pop, off], [np.conj(off), 1 - pop]], dtype=complex)


def evolved_distance(pair: StatePair, tau: float, ensemble: EnsembleMap = RANDOM_FIELD_MAP) -> float:
    # the map is linear: evolve the difference once
    return 0.5 * trace_norm(ensemble(tau, pair.rho1 - pair.rho2))


def blp_sigma(
    pair: StatePair,
    tau: float,
    h: float = BLP_STEP,
    ensemble: EnsembleMap = RANDOM_FIELD_MAP,
) -> float:
    """Rate of change of the trace distance between the evolved pair (central difference)."""
    if tau < h:
        raise DomainError(f"central difference at tau={tau!r} leaves the domain tau >= 0 (h={h})")
    return (evolved_distance(pair, tau + h, ensemble) - evolved_distance(pair, tau - h, ensemble)) / (2 * h)


@dataclass
class BLPRegionReport:
    statuses: List[str]
    failures: List[List[float]]
    checked_points: int

    @property
    def passed(self) -> bool:
        return all(s != "fail" for s in self.statuses)


def blp_sign_region_check(
    pairs: Sequence[StatePair],
    grid: Sequence[float],
    margin: float = 1e-3,
    degenerate_tol: float = 1e-12,
) -> BLPRegionReport:
    """Check ``sign(sigma) == -sign(sin 4 tau)`` for every pair on the grid.

    Points within ``margin`` of a zero of ``sin 4 tau`` are not checked.
    Pairs whose difference has no x-z component keep a constant distance and
    are reported as ``"skipped"``.
    """
    grid = np.asarray(grid, dtype=float)
    zeros = np.round(grid / (np.pi / 4)) * (np.pi / 4)
    pts = grid[(np.abs(grid - zeros) > margin) & (grid >= BLP_STEP)]
    statuses, failures = [], []
    for pair in pairs:
        if pair.contracting_weight <= degenerate_tol:
            statuses.append("skipped")
            failures.append([])
            continue
        bad = [float(t) for t in pts if np.sign(blp_sigma(pair, t)) != -np.sign(np.sin(4 * t))]
        statuses.append("fail" if bad else "pass")
        failures.append(bad)
    return BLPRegionReport(statuses, failures, int(pts.size))


def blp_witness(pairs: Sequence[StatePair]) -> Callable[[float], float]:
    """Largest sigma over ``pairs``; positive iff some pair regains distinguishability."""
    pairs = list(pairs)

    def witness(tau):
        return max(blp_sigma(p, tau) for p in pairs)

    return witness


def _choi_perturbation_norm(choi: np.ndarray, eps: float) -> float:
    return trace_norm(PHI_PLUS_PROJECTOR + eps * choi)


def rhp_g_numeric(gen: Generator, epsilons: Sequence[float] = RHP_EPSILONS) -> float:
    """Divisibility witness ``g = lim (||(1 + eps L x id)|Phi><Phi|||_1 - 1)/eps``.

    The step sizes are taken relative to the generator's magnitude (the
    largest row sum of its Choi matrix, floored at 1) and the difference
    quotients are combined by first-order Richardson extrapolation. Values
    below ``ZERO_TOL`` are reported as 0; for very large generators (close
    to a singular point) both thresholds grow with the rounding floor
    ``1e-8 * magnitude``.

    Raises
    ------
    ConvergenceError
        If the two Richardson estimates disagree by more than
        ``1e-4 * max(1, |g|)`` plus the rounding floor.
    """
    choi = gen.choi()
    scale = max(1.0, float(np.max(np.sum(np.abs(choi), axis=1))))
    eps = np.asarray(epsilons, dtype=float) / scale
    q = np.array([(_choi_perturbation_norm(choi, e) - 1.0) / e for e in eps])
    rich = [(eps[i] * q[i + 1] - eps[i + 1] * q[i]) / (eps[i] - eps[i + 1]) for i in range(len(eps) - 1)]
    g = rich[-1]
    floor = 1e-8 * scale
    if max(rich) - min(rich) > RHP_SPREAD_TOL * max(1.0, abs(g)) + floor:
        raise ConvergenceError(
            f"RHP difference quotients did not converge: estimates {q.tolist()}", estimates=q
        )
    return 0.0 if abs(g) < max(ZERO_TOL, floor) else float(g)


def rhp_g_analytic(tau: float, gamma: float, delta: float = DELTA) -> float:
    """Closed-form RHP witness for random-field dephasing with damping rate ``gamma``."""
    if gamma < 0:
        raise ParameterError(f"decay rate must be non-negative, got {gamma!r}")
    t = dephasing_rate(tau, delta)
    if gamma == 0:
        return max(-2.0 * t, 0.0)
    g1 = 2 * t
    root = np.sqrt(gamma**2 + g1**2)
    # g1 -/+ root without cancellation: (g1 - root)(g1 + root) = -gamma^2
    if g1 >= 0:
        g1_plus, g1_minus = g1 + root, -(gamma**2) / (g1 + root)
    else:
        g1_plus, g1_minus = gamma**2 / (root - g1), g1 - root
    plus = np.sqrt(max(gamma**2 + (gamma + g1) * g1_plus, 0.0))
    minus = np.sqrt(max(gamma**2 + (gamma + g1) * g1_minus, 0.0))
    g = -gamma / 2 - g1 / 2 + np.sqrt(2) / 4 * (plus + minus)
    return 0.0 if g < max(ZERO_TOL, 1e-14 * abs(g1)) else float(g)


def ach_f(tau: float, gamma: float, delta: float = DELTA) -> float:
    """``min(gamma_minus, 0)`` for the smaller canonical rate."""
    _, minus = ach_rates_analytic(tau, gamma, delta)
    return min(float(minus), 0.0)


def is_flagged(criterion: str, value: float) -> bool:
    if criterion == "ach":
        return value < -ZERO_TOL
    if criterion in ("blp", "rhp"):
        return value > ZERO_TOL
    raise ParameterError(f"unknown criterion {criterion!r}")


@dataclass(eq=False)
class WitnessTrace:
    """Witness values on a grid plus the detected non-Markovian intervals.

    ``witness`` evaluates the criterion at arbitrary times (it is what the
    interval refinement bisects on); it ignores the exclusion window.
    """

    criterion: str
    grid: np.ndarray
    values: np.ndarray
    gamma: float = 0.0
    intervals: List[Tuple[float, float]] = field(default_factory=list)
    excluded: int = 0
    witness: Optional[Callable[[float], float]] = field(default=None, repr=False)
    domain: Tuple[float, float] = (0.0, np.inf)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.grid.shape != self.values.shape:
            raise ParameterError("grid and values must have the same length")
        if self.grid.size > 1 and np.any(np.diff(self.grid) <= 0):
            raise ParameterError("grid must be strictly ascending")

    @property
    def flags(self) -> np.ndarray:
        return np.array([is_flagged(self.criterion, v) for v in self.values], dtype=bool)


def witness_function(criterion: str, gamma: float = 0.0, pairs: Sequence[StatePair] = ()) -> Callable[[float], float]:
    """Criterion as a plain function of tau, without the singular exclusion."""
    if criterion == "blp":
        if gamma != 0:
            raise ParameterError("the BLP witness is only available without damping")
        return blp_witness(pairs or [StatePair.canonical()])
    if criterion == "rhp":
        return lambda tau: rhp_g_numeric(generator_dissipative(tau, gamma, delta=0.0))
    if criterion == "ach":
        return lambda tau: ach_f(tau, gamma, delta=0.0)
    raise ParameterError(f"unknown criterion {criterion!r}")


def outside_window(tau: float, delta: float = DELTA) -> bool:
    try:
        check_regular(tau, delta)
    except SingularityError:
        return False
    return True
