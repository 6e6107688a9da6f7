"""Optimal acquisition under a sampling-work budget.

Given endpoints m_a < m_b and a work budget W, the variance profile that
maximises the information gain while spending exactly W is

    sigma2*(m) = A sqrt(m) - m sigma_r2,
    A = (W + sigma_r2 (m_b - m_a)) / (2 (sqrt(m_b) - sqrt(m_a))),

so Theta / sqrt(m) = 2A stays constant along the optimum.  The gain it
achieves is

    DeltaI* = 1/2 log(m_b/m_a)
              - 2 sigma_r2 (sqrt(m_b) - sqrt(m_a))^2 / (W + (m_b - m_a) sigma_r2),

bounded by the capacity 1/2 log(m_b/m_a) of the acquisition interval.
The profile is feasible iff sigma2*(m_b) >= 0, i.e. A >= sigma_r2 sqrt(m_b);
otherwise the variance would cross zero on (m_c, m_b] with
sqrt(m_c) = A / sigma_r2.

An independent check ships as a discrete dynamic program over
piecewise-constant variance profiles on a geometric m grid.  Because the
variance levels are aligned with the budget quantum, step costs are exact
integer multiples of the quantum and the search is exact on its grid: no
path is admitted beyond the stated budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._quad import polyline_form_integral
from .errors import (
    InfeasibleBudgetError,
    InvalidStateError,
    NoFeasiblePathError,
    NoStationaryDirectionError,
    UndefinedRatioError,
)
from .paths import ProcessPath, information_gain
from .state import InferenceState, NoiseModel, theta

MAX_DP_UNITS = 2_000_000


@dataclass(frozen=True)
class BudgetProblem:
    """Acquisition window (m_a, m_b] with a nonnegative work budget."""

    m_a: float
    m_b: float
    work: float
    noise: NoiseModel

    def __post_init__(self):
        for name in ("m_a", "m_b", "work"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise InvalidStateError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        if not (0 < self.m_a < self.m_b):
            raise InvalidStateError("need 0 < m_a < m_b")
        if self.work < 0:
            raise InvalidStateError("work budget must be >= 0")


@dataclass(frozen=True)
class OptimalTrajectory:
    """Closed-form optimal variance profile for a budget problem."""

    problem: BudgetProblem
    coefficient: float     # A in sigma2*(m) = A sqrt(m) - m sigma_r2

    def sigma2(self, m):
        """Optimal variance at sample size m (vectorised)."""
        m = np.asarray(m, dtype=float)
        out = self.coefficient * np.sqrt(m) - m * self.problem.noise.sigma_r2
        return out if out.ndim else float(out)

    def theta(self, m):
        """Susceptibility along the optimum; Theta / sqrt(m) = 2A."""
        m = np.asarray(m, dtype=float)
        out = 2.0 * self.coefficient * np.sqrt(m)
        return out if out.ndim else float(out)

    def as_path(self, n_nodes: int = 129) -> ProcessPath:
        """Polyline sampling of the profile, uniform in sqrt(m)."""
        r = np.linspace(math.sqrt(self.problem.m_a),
                        math.sqrt(self.problem.m_b), n_nodes)
        m = r * r
        return ProcessPath(m, np.maximum(self.sigma2(m), 0.0))

    def gain_quadrature(self, atol: float = 1e-12) -> float:
        """Information gain integrated along the exact profile."""
        sr2 = self.problem.noise.sigma_r2
        a = self.coefficient
        if a == 0.0:
            return 0.0

        def integrand(m, _):
            s = a * np.sqrt(m) - m * sr2
            return s / (m * 2.0 * a * np.sqrt(m))

        return polyline_form_integral(
            np.array([self.problem.m_a, self.problem.m_b]),
            np.zeros(2), p=integrand, atol=atol)

    def work_quadrature(self, atol: float = 1e-12) -> float:
        """Sampling work integrated along the exact profile."""
        sr2 = self.problem.noise.sigma_r2
        a = self.coefficient

        def integrand(m, _):
            return (a * np.sqrt(m) - m * sr2) / m

        return polyline_form_integral(
            np.array([self.problem.m_a, self.problem.m_b]),
            np.zeros(2), p=integrand, atol=atol)


def _coefficient(problem: BudgetProblem) -> float:
    sr2 = problem.noise.sigma_r2
    return ((problem.work + sr2 * (problem.m_b - problem.m_a))
            / (2.0 * (math.sqrt(problem.m_b) - math.sqrt(problem.m_a))))


def solve_optimal(problem: BudgetProblem) -> OptimalTrajectory:
    """Closed-form optimum, or InfeasibleBudgetError when the variance
    profile would cross zero before m_b."""
    a = _coefficient(problem)
    sr2 = problem.noise.sigma_r2
    edge = sr2 * math.sqrt(problem.m_b)
    if a - edge < -1e-12 * max(a, edge):
        m_c = (a / sr2) ** 2
        raise InfeasibleBudgetError(
            f"optimal variance goes negative on ({m_c}, {problem.m_b}]; "
            "raise the budget or stop earlier",
            violation_start=m_c, violation_end=problem.m_b)
    return OptimalTrajectory(problem=problem, coefficient=a)


def optimal_info_gain(problem: BudgetProblem) -> float:
    """Best attainable information gain for the budget problem."""
    traj = solve_optimal(problem)
    if traj.coefficient == 0.0:
        # W = 0 with a noiseless readout: the profile collapses to
        # sigma2 = 0 and nothing is gained
        return 0.0
    sr2 = problem.noise.sigma_r2
    d_sqrt = math.sqrt(problem.m_b) - math.sqrt(problem.m_a)
    return (0.5 * math.log(problem.m_b / problem.m_a)
            - 2.0 * sr2 * d_sqrt * d_sqrt
            / (problem.work + (problem.m_b - problem.m_a) * sr2))


def max_info_bound(m_a: float, m_b: float) -> float:
    """Capacity of the acquisition interval, 1/2 log(m_b / m_a)."""
    if not (0 < m_a <= m_b):
        raise InvalidStateError("need 0 < m_a <= m_b")
    return 0.5 * math.log(m_b / m_a)


@dataclass(frozen=True)
class DpSolution:
    """Result of the discrete budget search.

    ``quantum`` is the budget sub-unit; with default (aligned) variance
    levels every step cost is an exact multiple of it and
    ``admission_slack`` is zero.  With caller-supplied levels the costs
    are rounded up, so paths within ``admission_slack`` of the budget may
    be rejected but none is over-admitted.
    """

    gain: float
    path: ProcessPath
    work_used: float
    quantum: float
    admission_slack: float
    levels: np.ndarray = field(repr=False)


def dp_oracle(problem: BudgetProblem, m_grid_size: int = 64,
              sigma_grid_size: int = 64, budget_grid_size: int = 64,
              sigma2_max: float | None = None,
              sigma2_levels: np.ndarray | None = None) -> DpSolution:
    """Exhaustive search over piecewise-constant variance profiles.

    The m axis is split into ``m_grid_size`` geometric steps, so each step
    spans the same log increment and a constant-variance step has the
    exact cost sigma2 * log(m_{i+1}/m_i) and the exact gain
    1/2 log(r (sigma2 + m_i sr2) / (sigma2 + m_{i+1} sr2)).  The budget is
    tracked in integer sub-units of ``budget_grid_size`` uniform bins.
    Independent of the closed form; converges to it from below as the
    grids refine.
    """
    K, S, B = int(m_grid_size), int(sigma_grid_size), int(budget_grid_size)
    if min(K, S, B) < 8:
        raise InvalidStateError("grid sizes must be at least 8")
    sr2 = problem.noise.sigma_r2
    W = problem.work
    L = math.log(problem.m_b / problem.m_a)
    r = math.exp(L / K)
    m = problem.m_a * np.exp(np.arange(K + 1) * (L / K))
    m[-1] = problem.m_b

    w_bin = W / B
    if sigma2_levels is not None:
        levels = np.unique(np.asarray(sigma2_levels, dtype=float))
        if levels.size < 1 or np.any(levels < 0) or not np.all(np.isfinite(levels)):
            raise InvalidStateError("variance levels must be finite and >= 0")
        pos = levels[levels > 0]
        if w_bin > 0 and pos.size:
            q = max(1, math.ceil(8.0 * w_bin / (float(pos.min()) * L / K)))
        else:
            q = 1
        q = min(q, max(1, MAX_DP_UNITS // B))
        quantum = w_bin / q if q else 0.0
        if quantum > 0:
            costs = np.ceil(levels * (L / K) / quantum - 1e-12).astype(np.int64)
        else:
            costs = np.where(levels > 0, np.int64(1 << 40), np.int64(0))
        slack = K * quantum
    else:
        if sigma2_max is None:
            a = _coefficient(problem)
            cand = [a * math.sqrt(problem.m_a) - problem.m_a * sr2,
                    a * math.sqrt(problem.m_b) - problem.m_b * sr2]
            if sr2 > 0:
                peak = (a / (2.0 * sr2)) ** 2
                if problem.m_a < peak < problem.m_b:
                    cand.append(a * math.sqrt(peak) - peak * sr2)
            curve_max = max(0.0, max(cand))
            base = curve_max if curve_max > 0 else W * K / L
            sigma2_max = 1.25 * base if base > 0 else 1.0
        if sigma2_max <= 0:
            raise InvalidStateError("sigma2_max must be > 0")
        u_req = (sigma2_max / (S - 1)) * L / K
        if w_bin > 0:
            q = max(1, round(w_bin / u_req))
            q = min(q, max(1, MAX_DP_UNITS // B))
            quantum = w_bin / q
            spacing = quantum * K / L
        else:
            q = 1
            quantum = 0.0
            spacing = sigma2_max / (S - 1)
        levels = np.arange(S) * spacing
        costs = np.arange(S, dtype=np.int64) if quantum > 0 else \
            np.where(np.arange(S) > 0, np.int64(1 << 40), np.int64(0))
        slack = 0.0

    capacity = B * q if W > 0 else 0
    if capacity > MAX_DP_UNITS:
        raise InvalidStateError("budget grid too fine; reduce grid sizes")

    n_lv = levels.size
    value = np.full(capacity + 1, -np.inf)
    value[0] = 0.0
    choice = np.zeros((K, capacity + 1), dtype=np.int32)
    log_r = L / K
    for i in range(K):
        with np.errstate(divide="ignore", invalid="ignore"):
            g = 0.5 * np.log(r * (levels + m[i] * sr2) / (levels + m[i + 1] * sr2))
        g = np.where(levels > 0, g, 0.0)     # zero variance yields nothing
        g = np.nan_to_num(g, nan=0.0, posinf=0.0, neginf=0.0)
        new = np.full(capacity + 1, -np.inf)
        pick = np.zeros(capacity + 1, dtype=np.int32)
        for j in range(n_lv):
            c = int(costs[j])
            if c > capacity:
                continue
            cand = np.full(capacity + 1, -np.inf)
            if c == 0:
                cand = value + g[j]
            else:
                cand[c:] = value[:-c] + g[j]
            better = cand > new
            new[better] = cand[better]
            pick[better] = j
        value = new
        choice[i] = pick

    if not np.any(np.isfinite(value)):
        raise NoFeasiblePathError("no variance profile fits the budget grid")
    spent = int(np.argmax(value))
    gain = float(value[spent])

    picks = np.empty(K, dtype=np.int64)
    b = spent
    for i in range(K - 1, -1, -1):
        picks[i] = choice[i, b]
        b -= int(costs[picks[i]])
    work_used = float(np.sum(costs[picks])) * quantum

    ms = [m[0]]
    ss = [float(levels[picks[0]])]
    for i in range(K):
        ms.append(m[i + 1])
        ss.append(float(levels[picks[i]]))
        if i + 1 < K and picks[i + 1] != picks[i]:
            ms.append(m[i + 1])
            ss.append(float(levels[picks[i + 1]]))
    path = ProcessPath(np.array(ms), np.array(ss))
    return DpSolution(gain=gain, path=path, work_used=work_used,
                      quantum=quantum, admission_slack=slack, levels=levels)


@dataclass(frozen=True)
class BoundReport:
    """Gain-to-work ratio of a cycle against the susceptibility-floor bound."""

    ratio: float
    bound: float
    holds: bool
    m_star: float
    sign_definite: bool


def _segment_works(cycle: ProcessPath) -> np.ndarray:
    """Exact per-segment sampling work from the closed form."""
    m0, m1 = cycle.m[:-1], cycle.m[1:]
    s0, s1 = cycle.sigma2[:-1], cycle.sigma2[1:]
    dm = m1 - m0
    ds = s1 - s0
    out = np.zeros_like(dm)
    moving = dm != 0
    slope = np.where(moving, ds / np.where(moving, dm, 1.0), 0.0)
    out[moving] = ((s0 - slope * m0) * np.log(m1 / m0) + slope * dm)[moving]
    return out


def global_efficiency_bound(cycle: ProcessPath, noise: NoiseModel) -> BoundReport:
    """Check gain/work <= 1 / Theta_C(m_star) over a closed cycle.

    m_star is the smallest sample size visited.  The mean-value bound is
    guaranteed when the work measure keeps one sign along the cycle; the
    report carries that flag alongside the verdict.
    """
    if not cycle.is_closed():
        raise UndefinedRatioError("efficiency ratio needs a closed cycle")
    seg = _segment_works(cycle)
    gross = float(np.sum(np.abs(seg)))
    net = math.fsum(seg.tolist())
    if abs(net) <= 1e-11 * max(1.0, gross):
        raise UndefinedRatioError("cycle has zero net sampling work")
    info = information_gain(cycle, noise)
    ratio = info / net
    m_star = float(np.min(cycle.m))
    if noise.sigma_r2 == 0.0:
        bound = math.inf
    else:
        bound = 1.0 / (2.0 * m_star * noise.sigma_r2)
    tol = 1e-11 * max(1.0, gross)
    sign_definite = bool(np.all(seg >= -tol) or np.all(seg <= tol))
    holds = ratio <= bound * (1 + 1e-12) + 1e-12
    return BoundReport(ratio=ratio, bound=bound, holds=holds,
                       m_star=m_star, sign_definite=sign_definite)


@dataclass(frozen=True)
class StationarityResult:
    """Stationary sampling direction for a prescribed variance step."""

    dm: float
    production: float
    deviation: float
    probes: tuple[tuple[float, float], ...]
    holds: bool


def entropy_production_stationarity(
        state: InferenceState, noise: NoiseModel, dsigma2: float,
        probe_fractions: tuple[float, ...] = (-0.5, -0.25, 0.25, 0.5),
) -> StationarityResult:
    """Direction dm that keeps the entropy production at first order.

    The step production d sigma2 / Theta(end) is compared with the frozen
    coefficient value d sigma2 / Theta(start); the direction
    dm = -d sigma2 / sigma_r2 keeps Theta unchanged and zeroes the
    second-order deviation exactly, while any other direction leaves a
    strictly positive deviation (sampled at ``probe_fractions`` offsets).
    Undefined for a noiseless readout, where Theta ignores m entirely.
    """
    if noise.sigma_r2 == 0.0:
        raise NoStationaryDirectionError(
            "with sigma_r2 = 0 every sampling direction is equivalent")
    dsigma2 = float(dsigma2)
    if state.sigma2 + dsigma2 < 0:
        raise InvalidStateError("variance step exits the physical region")
    t0 = theta(state, noise)
    dm_star = -dsigma2 / noise.sigma_r2

    def deviation(dm: float) -> float:
        t1 = 2.0 * ((state.sigma2 + dsigma2)
                    + (state.m + dm) * noise.sigma_r2)
        return abs(dsigma2 / t1 - dsigma2 / t0)

    scale = max(abs(dm_star), 0.05 * state.m)
    probes = []
    for frac in probe_fractions:
        dm = dm_star + frac * scale
        if state.m + dm <= 0:
            continue
        probes.append((dm, deviation(dm)))
    dev0 = deviation(dm_star)
    if dsigma2 == 0.0:
        holds = all(d == 0.0 for _, d in probes)
    else:
        holds = bool(probes) and all(d > dev0 for _, d in probes)
    return StationarityResult(dm=dm_star, production=dsigma2 / t0,
                              deviation=dev0, probes=tuple(probes),
                              holds=holds)
