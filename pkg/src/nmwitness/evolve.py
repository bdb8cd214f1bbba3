"""Numerical integration of ``d rho / d tau = L(tau) rho``.

Used to cross-check the master equation against the exact map. The
integrator never steps across a singular point of ``tan 2 tau``; in
``"map-bridge"`` mode the exact map carries the state over the window
``[tau_s - delta, tau_s + delta]`` instead (dephasing-only generators).
"""
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence

import numpy as np
from scipy.integrate import RK45

from .dynamics import IDENTITY, RANDOM_FIELD_MAP, SIGMA_X, SIGMA_Y, EnsembleMap, check_state
from .errors import BudgetError, InvariantError, ParameterError, SingularityError
from .generators import DELTA, Generator, generator_nondissipative, nearest_singular_point
from .linalg import devectorize, hermitian_eigen, hermiticity_defect, vectorize

TRACE_DRIFT_TOL = 1e-9
RENORMALIZE_TOL = 1e-12
HERMITICITY_TOL = 1e-9
POSITIVITY_SLACK = 1e-8

BASIS_STATES = (
    np.array([[1, 0], [0, 0]], dtype=complex),
    np.array([[0, 0], [0, 1]], dtype=complex),
    0.5 * (IDENTITY + SIGMA_X),
    0.5 * (IDENTITY + SIGMA_Y),
)


@dataclass(frozen=True)
class IntegrationPlan:
    tau_start: float
    tau_end: float
    rtol: float = 1e-9
    atol: float = 1e-12
    delta: float = DELTA
    max_steps: int = 200_000
    crossing: str = "forbid"

    def __post_init__(self):
        if not self.tau_start < self.tau_end:
            raise ParameterError(
                f"tau_start ({self.tau_start}) must be smaller than tau_end ({self.tau_end})"
            )
        if self.crossing not in ("forbid", "map-bridge"):
            raise ParameterError(f"unknown crossing policy {self.crossing!r}")
        if self.max_steps < 1:
            raise ParameterError("max_steps must be positive")
        for end in (self.tau_start, self.tau_end):
            ts = nearest_singular_point(end)
            if abs(end - ts) < self.delta:
                raise SingularityError(
                    f"plan endpoint {end!r} lies within {self.delta:g} of {ts!r}", tau=end, tau_singular=ts
                )
        inside = self.singular_points()
        if inside and self.crossing != "map-bridge":
            raise SingularityError(
                f"interval [{self.tau_start}, {self.tau_end}] contains singular point(s) {inside}",
                tau=self.tau_start,
                tau_singular=inside[0],
            )

    def singular_points(self) -> List[float]:
        k0 = int(np.ceil((self.tau_start - np.pi / 4) / (np.pi / 2)))
        pts = []
        k = k0
        while True:
            ts = np.pi / 4 + k * np.pi / 2
            if ts >= self.tau_end:
                break
            if ts > self.tau_start:
                pts.append(float(ts))
            k += 1
        return pts


def _integrate_segment(gen, y, t0, t1, plan, budget):
    def rhs(tau, v):
        dv = gen(tau).action @ v
        # scipy's step-size control never terminates on NaN
        if not np.all(np.isfinite(dv)):
            raise SingularityError(
                f"non-finite derivative at tau={tau!r}", tau=tau, tau_singular=nearest_singular_point(tau)
            )
        return dv

    solver = RK45(rhs, t0, y, t1, rtol=plan.rtol, atol=plan.atol)
    steps = 0
    while solver.status == "running":
        if budget[0] + steps >= plan.max_steps:
            raise BudgetError(f"exceeded {plan.max_steps} steps at tau={solver.t!r}")
        solver.step()
        steps += 1
        if solver.status == "failed":
            raise SingularityError(
                f"step size underflow at tau={solver.t!r}: {solver.message}",
                tau=solver.t,
                tau_singular=nearest_singular_point(solver.t),
            )
        _monitor(devectorize(solver.y), solver.t)
    budget[0] += steps
    return solver.y


def _monitor(rho, tau):
    drift = abs(np.trace(rho) - 1)
    if drift > TRACE_DRIFT_TOL:
        raise InvariantError(f"trace drifted by {drift:.3e} at tau={tau!r}")
    herm = hermiticity_defect(rho)
    if herm > HERMITICITY_TOL:
        raise InvariantError(f"state lost Hermiticity ({herm:.3e}) at tau={tau!r}")


def integrate_me(
    gen: Callable[[float], Generator],
    rho0,
    plan: IntegrationPlan,
    bridge: EnsembleMap = RANDOM_FIELD_MAP,
) -> np.ndarray:
    """Integrate the master equation with an adaptive Dormand-Prince 5(4) pair.

    Parameters
    ----------
    gen : callable
        ``tau -> Generator``.
    rho0 : array_like
        Initial density matrix at ``plan.tau_start``.
    plan : IntegrationPlan
    bridge : EnsembleMap
        Exact map used to jump over singular windows in ``"map-bridge"`` mode.

    Returns
    -------
    ndarray
        The state at ``plan.tau_end``, renormalized to unit trace.
    """
    y = vectorize(check_state(rho0)).copy()
    budget = [0]
    t = plan.tau_start
    for ts in plan.singular_points():
        y = _integrate_segment(gen, y, t, ts - plan.delta, plan, budget)
        probe = gen(ts - plan.delta)
        if not (probe.kind == "nondissipative" or (probe.kind == "dissipative" and probe.gamma == 0)):
            raise SingularityError(
                "no exact bridge across a singular point for damped dynamics", tau=ts - plan.delta, tau_singular=ts
            )
        a, b = ts - plan.delta, ts + plan.delta
        y = bridge.superoperator(b) @ np.linalg.solve(bridge.superoperator(a), y)
        t = b
    y = _integrate_segment(gen, y, t, plan.tau_end, plan, budget)

    rho = devectorize(y)
    tr = np.trace(rho).real
    if abs(tr - 1) > RENORMALIZE_TOL:
        rho = rho / tr
    rho = 0.5 * (rho + rho.conj().T)
    w, _ = hermitian_eigen(rho)
    if w[-1] < -POSITIVITY_SLACK:
        raise InvariantError(f"integrated state has negative eigenvalue {w[-1]:.3e}")
    return rho


@dataclass
class ConsistencyReport:
    max_deviation: float
    deviations: Dict[float, float]


def consistency_map_vs_me(
    tau_targets: Sequence[float],
    rtol: float = 1e-9,
    atol: float = 1e-12,
    delta: float = DELTA,
) -> ConsistencyReport:
    """Integrate the dephasing master equation from 0 and compare with the exact map."""
    devs = {}
    for tau in tau_targets:
        if not 0 < tau <= np.pi / 4 - delta:
            raise ParameterError(f"target {tau!r} outside (0, pi/4 - delta]")
        plan = IntegrationPlan(0.0, float(tau), rtol=rtol, atol=atol, delta=delta)
        worst = 0.0
        for rho0 in BASIS_STATES:
            num = integrate_me(lambda s: generator_nondissipative(s, delta), rho0, plan)
            exact = RANDOM_FIELD_MAP(tau, rho0)
            worst = max(worst, float(np.max(np.abs(num - exact))))
        devs[float(tau)] = worst
    return ConsistencyReport(max(devs.values()) if devs else 0.0, devs)
