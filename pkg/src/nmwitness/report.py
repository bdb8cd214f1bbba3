"""Witness scans over tau grids, interval detection and criterion comparison."""
import io
import logging
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError, ParameterError
from .generators import DELTA, generator_dissipative, nearest_singular_point
from .witnesses import (
    StatePair,
    WitnessTrace,
    ach_f,
    blp_witness,
    is_flagged,
    outside_window,
    rhp_g_numeric,
)

logger = logging.getLogger(__name__)

REFINE_TOL = 1e-6
N_RANDOM_PAIRS = 20
COLUMN_NAMES = {"blp": "sigma", "rhp": "g", "ach": "f"}

Interval = Tuple[float, float]


class EmptyGridError(ParameterError):
    pass


@dataclass
class ScanConfig:
    criterion: str = "all"
    gamma: float = 0.0
    tau_max: float = math.pi
    steps: int = 800
    delta: float = DELTA
    seed: int = 0
    out: Optional[str] = None
    n_pairs: int = N_RANDOM_PAIRS

    def __post_init__(self):
        if self.criterion not in ("blp", "rhp", "ach", "all"):
            raise ConfigError("criterion", f"must be one of blp, rhp, ach, all (got {self.criterion!r})")
        if not (isinstance(self.steps, (int, np.integer)) and self.steps >= 2):
            raise ConfigError("steps", f"must be an integer >= 2 (got {self.steps!r})")
        if not (math.isfinite(self.tau_max) and self.tau_max > 0):
            raise ConfigError("tau_max", f"must be positive (got {self.tau_max!r})")
        if not (math.isfinite(self.gamma) and self.gamma >= 0):
            raise ConfigError("gamma", f"must be non-negative (got {self.gamma!r})")
        if not (math.isfinite(self.delta) and self.delta >= 0):
            raise ConfigError("delta", f"must be non-negative (got {self.delta!r})")
        if self.n_pairs < 0:
            raise ConfigError("n_pairs", "must be non-negative")
        if self.criterion == "blp" and self.gamma > 0:
            raise ConfigError("gamma", "the BLP witness is only available for gamma = 0")

    @property
    def criteria(self) -> List[str]:
        if self.criterion != "all":
            return [self.criterion]
        return ["blp", "rhp", "ach"] if self.gamma == 0 else ["rhp", "ach"]


def make_grid(tau_max: float, steps: int, delta: float = DELTA):
    """``steps`` equally spaced points on ``(0, tau_max]``, minus exclusion windows.

    Returns
    -------
    grid : ndarray
        Retained points.
    excluded : int
        Number of dropped points.
    windows : list of (float, float)
        Exclusion windows that intersect ``[0, tau_max]``.
    """
    full = np.linspace(0.0, tau_max, steps + 1)[1:]
    keep = np.array([outside_window(t, delta) for t in full], dtype=bool)
    windows = []
    if delta > 0:
        k = 0
        while np.pi / 4 + k * np.pi / 2 - delta <= tau_max:
            ts = np.pi / 4 + k * np.pi / 2
            windows.append((ts - delta, ts + delta))
            k += 1
    return full[keep], int((~keep).sum()), windows


def scan_pairs(seed: int, n_pairs: int = N_RANDOM_PAIRS) -> List[StatePair]:
    rng = np.random.default_rng(seed)
    return [StatePair.canonical()] + [StatePair.random(rng) for _ in range(n_pairs)]


def _witness(criterion, gamma, pairs):
    if criterion == "blp":
        return blp_witness(pairs)
    if criterion == "rhp":
        return lambda tau: rhp_g_numeric(generator_dissipative(tau, gamma, delta=0.0))
    return lambda tau: ach_f(tau, gamma, delta=0.0)


def _bisect(witness, criterion, lo, hi, tol):
    flag_lo = is_flagged(criterion, witness(lo))
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if is_flagged(criterion, witness(mid)) == flag_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def detect_intervals(trace: WitnessTrace, tol: float = REFINE_TOL) -> List[Interval]:
    """Maximal runs of flagged grid points, with edges refined by bisection.

    An edge between a flagged and an unflagged neighbour is bisected on
    ``trace.witness`` down to ``tol``; runs touching the ends of the grid
    keep the grid end as their edge. Without a witness the midpoint between
    neighbours is used.
    """
    if trace.grid.size == 0:
        raise EmptyGridError("no grid points left to analyse (all excluded?)")
    flags = trace.flags
    grid = trace.grid
    intervals = []
    i, n = 0, grid.size
    while i < n:
        if not flags[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and flags[j + 1]:
            j += 1
        start, end = grid[i], grid[j]
        if i > 0:
            start = (
                _bisect(trace.witness, trace.criterion, grid[i - 1], grid[i], tol)
                if trace.witness
                else 0.5 * (grid[i - 1] + grid[i])
            )
        if j < n - 1:
            end = (
                _bisect(trace.witness, trace.criterion, grid[j], grid[j + 1], tol)
                if trace.witness
                else 0.5 * (grid[j] + grid[j + 1])
            )
        intervals.append((float(start), float(end)))
        i = j + 1
    trace.intervals = intervals
    return intervals


def evaluate_trace(criterion: str, grid: np.ndarray, gamma: float, pairs=(), excluded: int = 0) -> WitnessTrace:
    witness = _witness(criterion, gamma, pairs)
    values = [witness(t) for t in grid]
    trace = WitnessTrace(criterion, grid, np.array(values), gamma=gamma, excluded=excluded, witness=witness)
    detect_intervals(trace)
    return trace


# -- comparison -------------------------------------------------------------------


def _measure(intervals: Sequence[Interval]) -> float:
    return float(sum(b - a for a, b in intervals))


def _intersection(a: Sequence[Interval], b: Sequence[Interval]) -> float:
    total = 0.0
    for a0, a1 in a:
        for b0, b1 in b:
            total += max(0.0, min(a1, b1) - max(a0, b0))
    return total


def symmetric_difference(a: Sequence[Interval], b: Sequence[Interval]) -> float:
    return _measure(a) + _measure(b) - 2 * _intersection(a, b)


def boundary_discrepancy(intervals: Sequence[Interval], lo: float, hi: float) -> float:
    """Largest distance of an interval edge from its exact position.

    Starts are compared with ``pi/4 + k pi/2``, ends with ``k pi/2``. Edges
    sitting on the scan limits ``lo``/``hi`` are skipped.
    """
    worst = 0.0
    for start, end in intervals:
        if start > lo:
            worst = max(worst, abs(start - nearest_singular_point(start)))
        if end < hi:
            worst = max(worst, abs(end - round(end / (np.pi / 2)) * (np.pi / 2)))
    return worst


@dataclass
class ComparisonReport:
    intervals: Dict[str, List[Interval]]
    verdicts: Dict[Tuple[str, str], bool]
    differences: Dict[Tuple[str, str], float]
    allowed_difference: float
    max_boundary_discrepancy: float
    pointwise_mismatches: List[float] = field(default_factory=list)

    @property
    def agree(self) -> bool:
        return all(self.verdicts.values()) and not self.pointwise_mismatches

    def summary(self) -> str:
        lines = []
        for crit, ivs in self.intervals.items():
            body = ", ".join(f"({a:.9f}, {b:.9f})" for a, b in ivs) or "none"
            lines.append(f"{crit}: {body}")
        for (a, b), ok in self.verdicts.items():
            lines.append(
                f"{a} vs {b}: {'agree' if ok else 'DISAGREE'} "
                f"(symmetric difference {self.differences[(a, b)]:.3e}, allowed {self.allowed_difference:.3e})"
            )
        if self.pointwise_mismatches:
            lines.append(f"pointwise mismatches at {len(self.pointwise_mismatches)} grid points")
        lines.append(f"max boundary discrepancy: {self.max_boundary_discrepancy:.3e}")
        return "\n".join(lines)


def compare_traces(traces: Dict[str, WitnessTrace], tau_max: float, delta: float, spacing: float) -> ComparisonReport:
    periods = max(1, math.ceil(tau_max / (np.pi / 2) - 1e-12))
    allowed = (2 * spacing + 2 * delta) * periods
    intervals = {c: t.intervals for c, t in traces.items()}
    verdicts, diffs = {}, {}
    for a, b in combinations(intervals, 2):
        diffs[(a, b)] = symmetric_difference(intervals[a], intervals[b])
        verdicts[(a, b)] = diffs[(a, b)] <= allowed
    worst = 0.0
    for t in traces.values():
        worst = max(worst, boundary_discrepancy(t.intervals, t.grid[0], t.grid[-1]))
    return ComparisonReport(intervals, verdicts, diffs, allowed, worst)


# -- CSV ----------------------------------------------------------------------------


def format_csv(grid, columns: Dict[str, Sequence[float]], windows=(), excluded: int = 0) -> str:
    buf = io.StringIO()
    win = ";".join(f"[{a:.17g},{b:.17g}]" for a, b in windows)
    buf.write(f"# excluded_windows={win} excluded_points={excluded}\n")
    buf.write(",".join(["tau", *columns]) + "\n")
    cols = [np.asarray(v, dtype=float) for v in columns.values()]
    for i, t in enumerate(grid):
        buf.write(",".join(f"{x:.17g}" for x in [t, *(c[i] for c in cols)]) + "\n")
    return buf.getvalue()


def write_csv(path: str, text: str) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


# -- entry points -------------------------------------------------------------------


@dataclass
class ScanResult:
    traces: Dict[str, WitnessTrace]
    csv: str
    windows: List[Interval]
    excluded: int
    spacing: float


def run_scan(config: ScanConfig) -> ScanResult:
    """Evaluate the requested witnesses on the grid, detect intervals, emit CSV."""
    grid, excluded, windows = make_grid(config.tau_max, config.steps, config.delta)
    if grid.size == 0:
        raise EmptyGridError("every grid point falls inside an exclusion window")
    if config.criterion == "all" and config.gamma > 0:
        logger.info("BLP skipped: only defined here for gamma = 0")
    pairs = scan_pairs(config.seed, config.n_pairs) if "blp" in config.criteria else []
    traces = {
        c: evaluate_trace(c, grid, config.gamma, pairs, excluded) for c in config.criteria
    }
    text = format_csv(
        grid, {COLUMN_NAMES[c]: t.values for c, t in traces.items()}, windows, excluded
    )
    if config.out:
        write_csv(config.out, text)
    return ScanResult(traces, text, windows, excluded, config.tau_max / config.steps)


def compare_scan(result: ScanResult, config: ScanConfig) -> ComparisonReport:
    return compare_traces(result.traces, config.tau_max, config.delta, result.spacing)


def fig1_report(
    gamma: float = 3.0,
    tau_max: float = math.pi,
    steps: int = 800,
    delta: float = DELTA,
    out: Optional[str] = None,
):
    """RHP ``g`` versus ACH ``f`` for the damped model.

    Returns the CSV text (columns ``tau, g, f``) and a
    :class:`ComparisonReport` whose ``pointwise_mismatches`` lists grid points
    where ``g > 0`` and ``f < 0`` disagree.
    """
    if not gamma > 0:
        raise ConfigError("gamma", "the RHP/ACH comparison needs a positive decay rate")
    config = ScanConfig("rhp", gamma=gamma, tau_max=tau_max, steps=steps, delta=delta)
    grid, excluded, windows = make_grid(tau_max, steps, delta)
    if grid.size == 0:
        raise EmptyGridError("every grid point falls inside an exclusion window")
    traces = {c: evaluate_trace(c, grid, gamma, excluded=excluded) for c in ("rhp", "ach")}
    report = compare_traces(traces, config.tau_max, delta, tau_max / steps)
    g_flags, f_flags = traces["rhp"].flags, traces["ach"].flags
    report.pointwise_mismatches = [float(t) for t, a, b in zip(grid, g_flags, f_flags) if a != b]
    text = format_csv(grid, {"g": traces["rhp"].values, "f": traces["ach"].values}, windows, excluded)
    if out:
        write_csv(out, text)
    return text, report
