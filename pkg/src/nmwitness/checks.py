"""Invariant suites run by ``nmwitness check``."""
import math
import time
from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from .dynamics import RANDOM_FIELD_MAP, apply_map, choi_of_map
from .evolve import consistency_map_vs_me
from .generators import (
    ach_rates_analytic,
    canonical_decompose,
    generator_dissipative,
    generator_nondissipative,
    reconstruct_generator_from_map,
)
from .linalg import dagger, hermitian_eigen
from .report import ScanConfig, compare_scan, fig1_report, run_scan
from .witnesses import outside_window, rhp_g_analytic, rhp_g_numeric


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def _regular_taus(n, lo=0.0, hi=math.pi, delta=1e-3):
    pts = np.linspace(lo, hi, n + 2)[1:-1]
    return [t for t in pts if outside_window(t, delta)]


def check_region_agreement() -> CheckResult:
    t0 = time.perf_counter()
    config = ScanConfig("all", gamma=0.0, tau_max=math.pi, steps=800)
    result = run_scan(config)
    report = compare_scan(result, config)
    elapsed = time.perf_counter() - t0
    expected = [(math.pi / 4, math.pi / 2), (3 * math.pi / 4, math.pi)]
    ok = report.agree and elapsed < 10
    for ivs in report.intervals.values():
        ok &= len(ivs) == 2 and all(
            abs(a - ea) <= 1e-4 and abs(b - eb) <= 1e-4 for (a, b), (ea, eb) in zip(ivs, expected)
        )
    return CheckResult(
        "non-dissipative BLP/RHP/ACH intervals",
        ok,
        f"boundary error {report.max_boundary_discrepancy:.2e}, {elapsed:.1f}s",
    )


def check_rhp_oracle() -> CheckResult:
    worst = 0.0
    for gamma in (0.0, 1.0, 3.0):
        for tau in _regular_taus(100):
            num = rhp_g_numeric(generator_dissipative(tau, gamma))
            worst = max(worst, abs(num - rhp_g_analytic(tau, gamma)))
    spot0 = rhp_g_numeric(generator_nondissipative(3 * math.pi / 8))
    spot3 = rhp_g_numeric(generator_dissipative(3 * math.pi / 8, 3.0))
    ok = worst <= 1e-5 and abs(spot0 - 2) <= 1e-5 and abs(spot3 - 1.302776) <= 1e-5
    return CheckResult("RHP numeric vs closed form", ok, f"max deviation {worst:.2e}")


def check_ach_decomposition() -> CheckResult:
    worst = 0.0
    for gamma in (1.0, 3.0):
        for tau in _regular_taus(100):
            rates = canonical_decompose(generator_dissipative(tau, gamma)).rates
            plus, minus = ach_rates_analytic(tau, gamma)
            t = math.tan(2 * tau)
            worst = max(
                worst,
                float(np.max(np.abs(rates - np.sort([plus, minus, 0.0])[::-1]))),
                abs(plus + minus - gamma - 2 * t),
                abs(plus * minus - gamma * t),
            )
    return CheckResult("canonical rates vs closed form", worst <= 1e-9, f"max deviation {worst:.2e}")


def check_fig1() -> CheckResult:
    _, report = fig1_report(3.0, math.pi, 800)
    return CheckResult(
        "RHP g > 0 iff ACH f < 0 (gamma = 3)",
        report.agree,
        f"{len(report.pointwise_mismatches)} mismatching points",
    )


def check_reconstruction() -> CheckResult:
    rng = np.random.default_rng(1)
    worst_f = worst_l = 0.0
    for tau in rng.uniform(0.01, math.pi / 2 - 0.01, 50):
        if not outside_window(tau):
            continue
        mats, gen = reconstruct_generator_from_map(RANDOM_FIELD_MAP, tau)
        c = math.cos(2 * tau)
        worst_f = max(worst_f, float(np.max(np.abs(mats.F - np.diag([1, c, 1, c])))))
        worst_l = max(worst_l, float(np.max(np.abs(gen.action - generator_nondissipative(tau).action))))
    ok = worst_f <= 1e-12 and worst_l <= 1e-8
    return CheckResult("map -> master equation reconstruction", ok, f"F err {worst_f:.1e}, L err {worst_l:.1e}")


def check_consistency() -> CheckResult:
    report = consistency_map_vs_me([0.1, math.pi / 8, 0.6, math.pi / 4 - 2e-3])
    return CheckResult(
        "integrated master equation vs exact map",
        report.max_deviation <= 1e-6,
        f"max deviation {report.max_deviation:.2e}",
    )


def check_channel_physics() -> CheckResult:
    min_eig = np.inf
    worst = 0.0
    rho = np.array([[0.7, 0.2 - 0.1j], [0.2 + 0.1j, 0.3]])
    for tau in np.linspace(0, 2 * math.pi, 200):
        w, _ = hermitian_eigen(choi_of_map(tau))
        min_eig = min(min_eig, w[-1])
        worst = max(
            worst,
            float(np.max(np.abs(apply_map(tau, np.eye(2) / 2) - np.eye(2) / 2))),
            float(np.max(np.abs(apply_map(tau + math.pi, rho) - apply_map(tau, rho)))),
        )
    ortho = 0.0
    for tau in _regular_taus(20):
        ops = canonical_decompose(generator_dissipative(tau, 3.0)).operators
        gram = np.array([[np.trace(dagger(a) @ b) for b in ops] for a in ops])
        ortho = max(ortho, float(np.max(np.abs(gram - np.eye(3)))))
    ok = min_eig >= -1e-12 and worst <= 1e-12 and ortho <= 1e-10
    return CheckResult(
        "CPTP, unital, periodic map; orthonormal channels",
        ok,
        f"min Choi eigenvalue {min_eig:.1e}, unital/periodic err {worst:.1e}, gram err {ortho:.1e}",
    )


SUITES: List[Callable[[], CheckResult]] = [
    check_region_agreement,
    check_rhp_oracle,
    check_ach_decomposition,
    check_fig1,
    check_reconstruction,
    check_consistency,
    check_channel_physics,
]


def run_all() -> List[CheckResult]:
    return [suite() for suite in SUITES]
