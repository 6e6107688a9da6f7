"""Quasi-static processes and line integrals over the inference state space.

A process is a piecewise-linear curve in the (m, sigma2) plane.  Along a
curve the first law

    d sigma2 = Theta dH + (sigma2 / m) dm

splits the variance change into a relaxation term and the sampling work.
This module evaluates the path functionals

    W      = integral of (sigma2 / m) dm          sampling work
    DeltaI = integral of sigma2 / (m Theta) dm    information gain
    Phi    = integral of d sigma2 / Theta         reversible entropy flux

together with loop-closure checks for the exact differentials dH, dsigma2
and dTheta, a discretisation residual for the first law, and constructors
for the named quasi-static processes (isochoric, adiabatic, isothermal).

All integrals run on the adaptive Gauss-Kronrod kernel with absolute
tolerance 1e-10 unless stated otherwise.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ._geom import convex_hull, shoelace_area
from ._quad import polyline_form_integral
from .errors import (
    InfeasibleProcessError,
    InvalidStateError,
    NotACycleError,
)
from .state import InferenceState, NoiseModel

QUAD_ATOL = 1e-10
CLOSURE_RTOL = 1e-12


def _same(a: float, b: float) -> bool:
    return abs(a - b) <= CLOSURE_RTOL * max(abs(a), abs(b))


@dataclass(frozen=True, eq=False)
class ProcessPath:
    """A piecewise-linear curve of states, at least two nodes.

    Nodes keep m > 0 and sigma2 >= 0; consecutive nodes must differ, with
    one exception: a path whose nodes are all identical is a legal
    zero-length point path (every integral over it vanishes).  Instances
    are immutable; the coordinate arrays are read-only views.
    """

    m: np.ndarray
    sigma2: np.ndarray

    def __post_init__(self):
        m = np.array(self.m, dtype=float)
        s = np.array(self.sigma2, dtype=float)
        if m.ndim != 1 or m.shape != s.shape:
            raise InvalidStateError("m and sigma2 must be matching 1-d arrays")
        if m.size < 2:
            raise InvalidStateError("a path needs at least two nodes")
        if not (np.all(np.isfinite(m)) and np.all(np.isfinite(s))):
            raise InvalidStateError("path nodes must be finite")
        if np.any(m <= 0):
            raise InvalidStateError("all node sample sizes must be > 0")
        if np.any(s < 0):
            raise InvalidStateError("all node variances must be >= 0")
        degenerate = (np.diff(m) == 0) & (np.diff(s) == 0)
        if np.any(degenerate) and not np.all(degenerate):
            raise InvalidStateError("consecutive path nodes must be distinct")
        m.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "sigma2", s)

    @classmethod
    def from_nodes(cls, nodes: Iterable[Sequence[float] | InferenceState]):
        ms, ss = [], []
        for node in nodes:
            if isinstance(node, InferenceState):
                ms.append(node.m)
                ss.append(node.sigma2)
            else:
                ms.append(float(node[0]))
                ss.append(float(node[1]))
        return cls(np.array(ms), np.array(ss))

    @property
    def n_nodes(self) -> int:
        return self.m.size

    @property
    def start(self) -> InferenceState:
        return InferenceState(float(self.m[0]), float(self.sigma2[0]))

    @property
    def end(self) -> InferenceState:
        return InferenceState(float(self.m[-1]), float(self.sigma2[-1]))

    def is_closed(self) -> bool:
        return (_same(float(self.m[0]), float(self.m[-1]))
                and _same(float(self.sigma2[0]), float(self.sigma2[-1])))

    def reversed(self):
        return type(self)(self.m[::-1], self.sigma2[::-1])

    def to_json(self) -> str:
        """Serialise as a JSON array of {"m": ..., "sigma2": ...} nodes."""
        return json.dumps([{"m": float(a), "sigma2": float(b)}
                           for a, b in zip(self.m, self.sigma2)])

    @classmethod
    def from_json(cls, text: str):
        try:
            nodes = json.loads(text)
            return cls(np.array([n["m"] for n in nodes]),
                       np.array([n["sigma2"] for n in nodes]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidStateError(f"malformed path JSON: {exc}") from exc


@dataclass(frozen=True, eq=False)
class CyclePath(ProcessPath):
    """A process whose last node returns to its first (relative 1e-12)."""

    def __post_init__(self):
        super().__post_init__()
        if not self.is_closed():
            raise NotACycleError(
                "cycle endpoints differ: "
                f"({self.m[0]}, {self.sigma2[0]}) vs ({self.m[-1]}, {self.sigma2[-1]})")

    def signed_area(self) -> float:
        return shoelace_area(self.m, self.sigma2)


@dataclass(frozen=True)
class LoopClosure:
    """Loop integrals of the three exact differentials; all should vanish."""

    dh: float
    dsigma2: float
    dtheta: float


def _theta_arr(m: np.ndarray, s: np.ndarray, sigma_r2: float) -> np.ndarray:
    return 2.0 * (s + m * sigma_r2)


def _info_integrand(m: np.ndarray, s: np.ndarray, sigma_r2: float) -> np.ndarray:
    # sigma2 / (m Theta), extended by 0 where sigma2 = 0 so the noiseless
    # readout limit stays integrable
    den = m * _theta_arr(m, s, sigma_r2)
    return np.where(s > 0, s / np.where(den > 0, den, 1.0), 0.0)


def sampling_work(path: ProcessPath) -> float:
    """Accumulated sampling work, integral of (sigma2 / m) dm.

    Noise never enters: the work form depends on the curve alone.
    """
    return polyline_form_integral(path.m, path.sigma2,
                                  p=lambda m, s: s / m, atol=QUAD_ATOL)


def information_gain(path: ProcessPath, noise: NoiseModel) -> float:
    """Information gained along the path, integral of sigma2 / (m Theta) dm."""
    sr2 = noise.sigma_r2
    return polyline_form_integral(
        path.m, path.sigma2,
        p=lambda m, s: _info_integrand(m, s, sr2), atol=QUAD_ATOL)


def reversible_entropy_flux(path: ProcessPath, noise: NoiseModel) -> float:
    """Reversible flux, integral of d sigma2 / Theta.

    Flux minus information gain equals the entropy change between the
    endpoints; the path must keep Theta > 0 throughout.
    """
    sr2 = noise.sigma_r2
    return polyline_form_integral(
        path.m, path.sigma2,
        q=lambda m, s: 1.0 / _theta_arr(m, s, sr2), atol=QUAD_ATOL)


def susceptibility_flux(path: ProcessPath) -> float:
    """Relaxation term of the first law, integral of Theta dH.

    Theta dH expands to d sigma2 - (sigma2 / m) dm, a form with no noise
    dependence, so around any cycle this integral balances the sampling
    work exactly.
    """
    return polyline_form_integral(
        path.m, path.sigma2,
        p=lambda m, s: -s / m,
        q=lambda m, s: np.ones_like(m), atol=QUAD_ATOL)


def cycle_closure_check(cycle: ProcessPath, noise: NoiseModel) -> LoopClosure:
    """Loop integrals of dH, dsigma2 and dTheta around a closed path.

    All three are exact differentials, so each integral should vanish to
    quadrature tolerance; a nonzero value signals a broken state function.
    """
    if not cycle.is_closed():
        raise NotACycleError("cycle_closure_check needs a closed path")
    sr2 = noise.sigma_r2
    dh = polyline_form_integral(
        cycle.m, cycle.sigma2,
        p=lambda m, s: -_info_integrand(m, s, sr2),
        q=lambda m, s: 1.0 / _theta_arr(m, s, sr2), atol=QUAD_ATOL)
    ds = polyline_form_integral(
        cycle.m, cycle.sigma2,
        q=lambda m, s: np.ones_like(m), atol=QUAD_ATOL)
    dt = polyline_form_integral(
        cycle.m, cycle.sigma2,
        p=lambda m, s: np.full_like(m, 2.0 * sr2),
        q=lambda m, s: np.full_like(m, 2.0), atol=QUAD_ATOL)
    return LoopClosure(dh=dh, dsigma2=ds, dtheta=dt)


def resample(path: ProcessPath, n_steps: int) -> ProcessPath:
    """Resample the path at n_steps + 1 points, uniform in segment parameter."""
    if n_steps < 1:
        raise InvalidStateError("n_steps must be >= 1")
    u = np.linspace(0.0, path.n_nodes - 1.0, n_steps + 1)
    grid = np.arange(path.n_nodes, dtype=float)
    return ProcessPath(np.interp(u, grid, path.m),
                       np.interp(u, grid, path.sigma2))


def first_law_residual(path: ProcessPath, noise: NoiseModel, n_steps: int) -> float:
    """Discretisation defect of the first law at a given resolution.

    The path is resampled into n_steps straight steps; for each step the
    defect | delta sigma2 - Theta_mid delta H - (sigma2/m)_mid delta m | is
    evaluated with midpoint coefficients and the absolute defects are
    summed.  The sum shrinks as O(1/n^2): halving the step size divides it
    by four on any smooth path, and it vanishes identically on adiabats.
    """
    fine = resample(path, n_steps)
    m, s = fine.m, fine.sigma2
    sr2 = noise.sigma_r2
    v = s / m + sr2
    if np.any(v <= 0):
        raise InvalidStateError(
            "first-law residual needs Theta > 0 along the path")
    dh = 0.5 * np.log(v[1:] / v[:-1])
    mm = 0.5 * (m[1:] + m[:-1])
    sm = 0.5 * (s[1:] + s[:-1])
    res = np.diff(s) - _theta_arr(mm, sm, sr2) * dh - (sm / mm) * np.diff(m)
    return float(np.sum(np.abs(res)))


ISOCHORIC = "isochoric"
ADIABATIC = "adiabatic"
ISOTHERMAL = "isothermal"


def make_process(kind: str, start: InferenceState, end: float,
                 noise: NoiseModel | None = None, n_nodes: int = 2) -> ProcessPath:
    """Construct a named quasi-static process from a starting state.

    ``end`` is the target sample size for adiabatic and isothermal
    processes and the target variance for the isochoric one (an isochoric
    step holds m fixed).  Isothermal processes trade variance against
    sampling at fixed Theta, d sigma2 = -sigma_r2 dm, and fail when the
    variance would cross zero before reaching the target.
    """
    if n_nodes < 2:
        raise InvalidStateError("n_nodes must be >= 2")
    end = float(end)
    if kind == ISOCHORIC:
        if end < 0:
            raise InvalidStateError("target variance must be >= 0")
        if end == start.sigma2:
            raise InvalidStateError("isochoric target equals the start variance")
        m = np.full(n_nodes, start.m)
        s = np.linspace(start.sigma2, end, n_nodes)
        return ProcessPath(m, s)
    if end <= 0:
        raise InvalidStateError("target sample size must be > 0")
    if end == start.m:
        raise InvalidStateError("process target equals the start sample size")
    m = np.linspace(start.m, end, n_nodes)
    if kind == ADIABATIC:
        # sigma2 proportional to m keeps sigma2/m, hence H, exactly constant
        s = (start.sigma2 / start.m) * m
        return ProcessPath(m, s)
    if kind == ISOTHERMAL:
        if noise is None:
            raise InvalidStateError("isothermal process needs a noise model")
        s = start.sigma2 - noise.sigma_r2 * (m - start.m)
        if s[-1] < 0:
            reach = start.m + start.sigma2 / noise.sigma_r2
            raise InfeasibleProcessError(
                f"isothermal variance crosses zero at m = {reach}; "
                f"target m = {end} is out of reach")
        return ProcessPath(m, s)
    raise InvalidStateError(f"unknown process kind {kind!r}")


def make_rectangle_cycle(m_lo: float, m_hi: float, s_lo: float, s_hi: float,
                         clockwise: bool = False) -> CyclePath:
    """Axis-aligned rectangular cycle through four corner states.

    Counterclockwise keeps the low-variance leg on the outbound (growing m)
    side; the clockwise orientation reverses the traversal.
    """
    m = np.array([m_lo, m_hi, m_hi, m_lo, m_lo])
    s = np.array([s_lo, s_lo, s_hi, s_hi, s_lo])
    if clockwise:
        m, s = m[::-1], s[::-1]
    return CyclePath(m, s)


def random_cycle(rng: np.random.Generator, kind: str | None = None,
                 m_range: tuple[float, float] = (0.5, 1e3),
                 sigma2_range: tuple[float, float] = (0.0, 100.0)) -> CyclePath:
    """Draw a random closed cycle: rectangle, convex polygon or ellipse.

    Every node satisfies the positivity constraints by construction, and
    the traversal orientation is random.  Deterministic for a seeded
    generator.
    """
    kinds = ("rectangle", "polygon", "ellipse")
    if kind is None:
        kind = kinds[rng.integers(len(kinds))]
    m_lo, m_hi = m_range
    s_lo, s_hi = sigma2_range

    if kind == "rectangle":
        ma, mb = np.sort(rng.uniform(m_lo, m_hi, 2))
        sa, sb = np.sort(rng.uniform(s_lo, s_hi, 2))
        while mb - ma < 1e-6 * m_hi or sb - sa < 1e-6 * max(s_hi, 1.0):
            ma, mb = np.sort(rng.uniform(m_lo, m_hi, 2))
            sa, sb = np.sort(rng.uniform(s_lo, s_hi, 2))
        return make_rectangle_cycle(ma, mb, sa, sb,
                                    clockwise=bool(rng.integers(2)))

    if kind == "polygon":
        while True:
            npts = int(rng.integers(5, 10))
            pts = np.column_stack([rng.uniform(m_lo, m_hi, npts),
                                   rng.uniform(s_lo, s_hi, npts)])
            try:
                hull = convex_hull(pts)
            except InvalidStateError:
                continue
            if hull.shape[0] >= 3:
                break
        if rng.integers(2):
            hull = hull[::-1]
        m = np.append(hull[:, 0], hull[0, 0])
        s = np.append(hull[:, 1], hull[0, 1])
        return CyclePath(m, s)

    if kind == "ellipse":
        mc = rng.uniform(m_lo, m_hi)
        sc = rng.uniform(s_lo, s_hi)
        rm = rng.uniform(0.05, 1.0) * min(mc - m_lo, m_hi - mc)
        rs = rng.uniform(0.05, 1.0) * min(sc - s_lo, s_hi - sc)
        rm = max(rm, 1e-4 * m_hi)
        rs = max(rs, 1e-4 * max(s_hi, 1.0))
        if mc - rm < m_lo:
            rm = 0.9 * (mc - m_lo) + 1e-12
        if sc - rs < s_lo:
            rs = 0.9 * (sc - s_lo)
        if rs <= 0 or rm <= 0:
            return random_cycle(rng, "ellipse", m_range, sigma2_range)
        t = np.linspace(0.0, 2.0 * np.pi, 33)[:-1]
        if rng.integers(2):
            t = t[::-1]
        m = mc + rm * np.cos(t)
        s = sc + rs * np.sin(t)
        m = np.append(m, m[0])
        s = np.append(s, s[0])
        return CyclePath(m, s)

    raise InvalidStateError(f"unknown cycle kind {kind!r}")


def random_monotone_path(rng: np.random.Generator, m_a: float, m_b: float,
                         n_seg: int = 8,
                         sigma2_range: tuple[float, float] = (0.0, 10.0)) -> ProcessPath:
    """Random piecewise-linear path with strictly increasing sample size."""
    if not (0 < m_a < m_b):
        raise InvalidStateError("need 0 < m_a < m_b")
    inner = np.sort(rng.uniform(m_a, m_b, n_seg - 1))
    m = np.concatenate([[m_a], inner, [m_b]])
    m = np.unique(m)
    if m.size < 2 or m[0] != m_a or m[-1] != m_b:
        m = np.linspace(m_a, m_b, n_seg + 1)
    s = rng.uniform(*sigma2_range, m.size)
    return ProcessPath(m, s)
