"""Cyclic information gain under a driven stimulus.

When the intrinsic variance follows the stimulus through a constitutive
power law sigma2(mu) = c mu^p, the entropy surface H(mu, m) has the mixed
derivative

    d2H / dm dmu = - sigma_r2 / (2 m^2 (sigma_r2 + sigma2/m)^2) * dsigma2/dmu

which is nonpositive whenever the law is nondecreasing.  By Green's
theorem the information gained around a simple loop in the (mu, m) plane,

    oint dI = - oint (dH/dm) dm = - integral over the interior of
              (d2H / dm dmu) dmu dm,

is therefore nonnegative for every counterclockwise traversal: a driven
sampling system can only dissipate.  This module carries the constitutive
law, the relaxation dynamics dm/dt = -a (m - m_eq(mu)), a fixed-step
driver that settles onto the periodic loop, and both sides of the Green's
identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from ._geom import convex_hull, ear_clip, is_simple_loop, shoelace_area
from ._quad import polyline_form_integral, triangles_integral
from .errors import (
    InvalidStateError,
    NonMonotoneScalingError,
    NotClosedError,
    NotSimpleLoopError,
)
from .state import NoiseModel

QUAD_ATOL = 1e-10


@dataclass(frozen=True)
class ConstitutiveScaling:
    """Power-law link sigma2(mu) = c mu^p between stimulus and variance.

    Covers the classical mean-variance families: p = 1 resembles counting
    noise, p = 2 multiplicative noise, p = 0 an insensitive floor.
    """

    c: float
    p: float

    def __post_init__(self):
        c, p = float(self.c), float(self.p)
        if not (math.isfinite(c) and math.isfinite(p)):
            raise InvalidStateError("scaling parameters must be finite")
        if c <= 0:
            raise InvalidStateError("scale c must be > 0")
        if p < 0:
            raise NonMonotoneScalingError("exponent p must be >= 0")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "p", p)

    def sigma2(self, mu):
        mu = np.asarray(mu, dtype=float)
        out = self.c * np.power(mu, self.p)
        return out if out.ndim else float(out)

    def dsigma2_dmu(self, mu):
        mu = np.asarray(mu, dtype=float)
        if self.p == 0:
            out = np.zeros_like(mu)
        else:
            with np.errstate(divide="ignore"):
                out = self.c * self.p * np.power(mu, self.p - 1.0)
        return out if out.ndim else float(out)


def mixed_derivative(mu, m, scaling: ConstitutiveScaling, noise: NoiseModel):
    """Cross-derivative d2H / dm dmu of the entropy surface (vectorised).

    Nonpositive for any nondecreasing constitutive law; this is the local
    form of the second-law statement for stimulus loops.
    """
    mu = np.asarray(mu, dtype=float)
    m = np.asarray(m, dtype=float)
    s2 = scaling.sigma2(mu)
    v = noise.sigma_r2 + s2 / m
    out = -noise.sigma_r2 / (2.0 * m * m * v * v) * scaling.dsigma2_dmu(mu)
    return out if out.ndim else float(out)


def supermodularity_defect(mu1: float, mu2: float, m1: float, m2: float,
                           scaling: ConstitutiveScaling,
                           noise: NoiseModel) -> float:
    """Rectangle increment H(mu2,m2) - H(mu2,m1) - H(mu1,m2) + H(mu1,m1).

    Nonpositive whenever mu2 >= mu1 and m2 >= m1; the discrete counterpart
    of the mixed derivative's sign.
    """
    def h(mu, m):
        v = noise.sigma_r2 + scaling.sigma2(mu) / m
        return 0.5 * math.log(v)

    return h(mu2, m2) - h(mu2, m1) - h(mu1, m2) + h(mu1, m1)


@dataclass(frozen=True)
class PiecewiseLinearStimulus:
    """Periodic stimulus mu(t) interpolated through (t, mu) breakpoints.

    Breakpoints must start at t = 0, end at t = period with the starting
    value, increase strictly in t, and stay nonnegative in mu.
    """

    times: tuple
    values: tuple

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or t.size < 2:
            raise InvalidStateError("need matching breakpoint arrays")
        if t[0] != 0.0 or np.any(np.diff(t) <= 0):
            raise InvalidStateError("breakpoint times must rise from 0")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise InvalidStateError("stimulus values must be finite and >= 0")
        if v[0] != v[-1]:
            raise InvalidStateError("periodic stimulus must end at its start value")
        object.__setattr__(self, "times", tuple(float(x) for x in t))
        object.__setattr__(self, "values", tuple(float(x) for x in v))

    @classmethod
    def from_breakpoints(cls, breakpoints: Sequence[Sequence[float]]):
        pts = [(float(a), float(b)) for a, b in breakpoints]
        return cls(tuple(a for a, _ in pts), tuple(b for _, b in pts))

    @property
    def period(self) -> float:
        return self.times[-1]

    def __call__(self, t):
        tt = np.asarray(t, dtype=float) % self.period
        out = np.interp(tt, self.times, self.values)
        return out if out.ndim else float(out)

    def flat_on(self, t0: float, t1: float) -> Optional[float]:
        """Constant stimulus value on [t0, t1], or None if it varies."""
        a = t0 % self.period
        b = a + (t1 - t0)
        if b > self.period + 1e-15:
            return None
        i = int(np.searchsorted(self.times, a, side="right")) - 1
        i = max(0, min(i, len(self.times) - 2))
        if self.times[i] <= a and b <= self.times[i + 1] + 1e-15:
            if self.values[i] == self.values[i + 1]:
                return self.values[i]
        return None


@dataclass(frozen=True)
class SamplingDynamics:
    """First-order relaxation of the acquisition size toward equilibrium.

    The default rate is linear, dm/dt = -a (m - m_eq(mu)); a custom rate
    hook rate(m, m_eq) may replace it.  When m_eq is omitted it follows
    the constitutive exponent as m_eq(mu) = mu^(p/2).
    """

    a: float
    m_eq: Optional[Callable[[float], float]] = None
    rate: Optional[Callable[[float, float], float]] = None

    def __post_init__(self):
        a = float(self.a)
        if not math.isfinite(a) or a <= 0:
            raise InvalidStateError("relaxation rate a must be > 0")
        object.__setattr__(self, "a", a)


@dataclass(frozen=True, eq=False)
class StimulusLoop:
    """Closed trajectory in the (mu, m) plane; may degenerate to a point."""

    mu: np.ndarray
    m: np.ndarray

    def __post_init__(self):
        mu = np.array(self.mu, dtype=float)
        m = np.array(self.m, dtype=float)
        if mu.ndim != 1 or mu.shape != m.shape or mu.size < 2:
            raise InvalidStateError("loop needs matching 1-d coordinate arrays")
        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(m))):
            raise InvalidStateError("loop nodes must be finite")
        if np.any(mu < 0):
            raise InvalidStateError("stimulus must be >= 0 on the loop")
        if np.any(m <= 0):
            raise InvalidStateError("sample size must be > 0 on the loop")
        rt = 1e-12

        def same(a, b):
            return abs(a - b) <= rt * max(abs(a), abs(b))

        if not (same(mu[0], mu[-1]) and same(m[0], m[-1])):
            raise NotClosedError("loop endpoints differ")
        mu.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "m", m)

    def signed_area(self) -> float:
        return shoelace_area(self.mu, self.m)

    def orientation(self) -> int:
        """+1 counterclockwise, -1 clockwise, 0 for a degenerate loop."""
        area = self.signed_area()
        scale = max(np.ptp(self.mu), np.ptp(self.m), 0.0)
        if scale == 0.0 or abs(area) <= 1e-14 * scale * scale:
            return 0
        return 1 if area > 0 else -1

    def is_degenerate(self) -> bool:
        return max(np.ptp(self.mu), np.ptp(self.m)) == 0.0

    def is_simple(self) -> bool:
        return is_simple_loop(self.mu, self.m)


def simulate_driven_cycle(stimulus: PiecewiseLinearStimulus,
                          dynamics: SamplingDynamics,
                          scaling: ConstitutiveScaling,
                          t_end: float, dt: float) -> StimulusLoop:
    """Integrate the driven dynamics and return the final-period loop.

    A classical fourth-order step is used with dt capped at 1/(50 a); on
    spans where the stimulus is flat and the rate is the default linear
    one, the exact exponential update replaces it.  Starts from
    equilibrium at mu(0), runs to the last complete period, and demands
    the final period to close within a relative gap of 1e-6.
    """
    period = stimulus.period
    if t_end < period:
        raise InvalidStateError("t_end must cover at least one stimulus period")
    a = dynamics.a
    dt = min(float(dt), 1.0 / (50.0 * a))
    if dt <= 0:
        raise InvalidStateError("dt must be > 0")
    n_per = max(1, math.ceil(period / dt))
    dt = period / n_per
    n_periods = int(t_end / period + 1e-9)

    m_eq = dynamics.m_eq
    if m_eq is None:
        half_p = 0.5 * scaling.p
        m_eq = lambda mu: mu ** half_p
    rate = dynamics.rate
    linear = rate is None
    if linear:
        rate = lambda m, me: -a * (m - me)
    decay = math.exp(-a * dt)

    m = float(m_eq(stimulus(0.0)))
    if m <= 0:
        raise InvalidStateError("equilibrium sample size must be > 0 at t = 0")
    mus = [stimulus(0.0)]
    ms = [m]
    keep_from = (n_periods - 1) * n_per
    total = n_periods * n_per
    for i in range(total):
        t0 = i * dt
        flat = stimulus.flat_on(t0, t0 + dt) if linear else None
        if flat is not None:
            me = float(m_eq(flat))
            m = me + (m - me) * decay
        else:
            mu0 = stimulus(t0)
            mu_h = stimulus(t0 + 0.5 * dt)
            mu1 = stimulus(t0 + dt)
            k1 = rate(m, float(m_eq(mu0)))
            k2 = rate(m + 0.5 * dt * k1, float(m_eq(mu_h)))
            k3 = rate(m + 0.5 * dt * k2, float(m_eq(mu_h)))
            k4 = rate(m + dt * k3, float(m_eq(mu1)))
            m = m + dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        if m <= 0 or not math.isfinite(m):
            raise InvalidStateError(f"sample size left (0, inf) at t = {t0 + dt}")
        if i + 1 >= keep_from:
            mus.append(stimulus(t0 + dt))
            ms.append(m)

    mu_arr = np.array(mus[-(n_per + 1):])
    m_arr = np.array(ms[-(n_per + 1):])
    scale = max(np.ptp(mu_arr), np.ptp(m_arr))
    if scale == 0.0:
        return StimulusLoop(np.array([mu_arr[0], mu_arr[0]]),
                            np.array([m_arr[0], m_arr[0]]))
    gap = math.hypot(mu_arr[-1] - mu_arr[0], m_arr[-1] - m_arr[0]) / scale
    if gap >= 1e-6:
        raise NotClosedError(
            f"trajectory has not settled: relative closure gap {gap:.3e}; "
            "extend t_end", gap=gap)
    mu_arr[-1] = mu_arr[0]
    m_arr[-1] = m_arr[0]
    # drop zero-length nodes produced by long flat spans at equilibrium
    keep = np.ones(mu_arr.size, dtype=bool)
    keep[1:] = (np.diff(mu_arr) != 0) | (np.diff(m_arr) != 0)
    keep[-1] = True
    mu_arr, m_arr = mu_arr[keep], m_arr[keep]
    if mu_arr.size < 2:
        mu_arr = np.array([mu_arr[0], mu_arr[0]])
        m_arr = np.array([m_arr[0], m_arr[0]])
    return StimulusLoop(mu_arr, m_arr)


def _monotone_or_raise(loop: StimulusLoop, scaling) -> None:
    grid = np.linspace(float(np.min(loop.mu)), float(np.max(loop.mu)), 65)
    grid = grid[grid > 0] if grid[0] == 0 else grid
    if grid.size == 0:
        return
    d = np.asarray(scaling.dsigma2_dmu(grid), dtype=float)
    finite = d[np.isfinite(d)]
    tol = 1e-12 * max(1.0, float(np.max(np.abs(finite))) if finite.size else 1.0)
    if np.any(d < -tol):
        raise NonMonotoneScalingError(
            "cycle analysis needs a nondecreasing variance law")


def cyclic_information(loop: StimulusLoop, scaling: ConstitutiveScaling,
                       noise: NoiseModel) -> float:
    """Information gained around the loop, - oint (dH/dm) dm."""
    sr2 = noise.sigma_r2

    def q(mu, m):
        s2 = scaling.sigma2(mu)
        den = m * 2.0 * (s2 + m * sr2)
        return np.where(s2 > 0, s2 / np.where(den > 0, den, 1.0), 0.0)

    if loop.is_degenerate():
        return 0.0
    return polyline_form_integral(loop.mu, loop.m, q=q, atol=QUAD_ATOL)


def greens_information(loop: StimulusLoop, scaling: ConstitutiveScaling,
                       noise: NoiseModel, rel_tol: float = 1e-8) -> float:
    """The same cyclic information from the area side of Green's theorem.

    Triangulates the loop interior by ear clipping and integrates the
    negated mixed derivative; the loop must be simple.
    """
    if loop.is_degenerate():
        return 0.0
    if not loop.is_simple():
        raise NotSimpleLoopError("Green's cross-check needs a simple loop")
    orient = loop.orientation()
    if orient == 0:
        return 0.0
    tris = ear_clip(loop.mu, loop.m)

    def f(mu, m):
        return -mixed_derivative(mu, m, scaling, noise)

    return orient * triangles_integral(tris, f, rel_tol=rel_tol)


@dataclass(frozen=True)
class SecondLawVerdict:
    """Dissipation verdict for one loop.

    ``holds`` asserts that the orientation-corrected cyclic information is
    nonnegative; for clockwise loops the traversal reversal flips the sign
    and the check is applied to the reversed value.  The Green's fields
    stay None unless the cross-check ran; it is skipped (with
    ``greens_skipped`` set) for self-intersecting loops.
    """

    cyclic_info: float
    orientation: int
    holds: bool
    simple: bool
    greens_value: Optional[float] = None
    greens_rel_gap: Optional[float] = None
    greens_skipped: bool = False


def second_law_check(loop: StimulusLoop, scaling: ConstitutiveScaling,
                     noise: NoiseModel, greens: bool = False,
                     tol: float = 1e-9) -> SecondLawVerdict:
    """Verify that the loop cannot produce information.

    Raises NonMonotoneScalingError when the variance law decreases
    somewhere on the loop's stimulus range; the sign argument needs
    monotonicity.
    """
    _monotone_or_raise(loop, scaling)
    value = cyclic_information(loop, scaling, noise)
    orient = loop.orientation()
    oriented = value if orient >= 0 else -value
    holds = oriented >= -tol
    simple = loop.is_simple()
    g_val = None
    g_gap = None
    skipped = False
    if greens:
        if simple:
            g_val = greens_information(loop, scaling, noise)
            scale = max(abs(value), abs(g_val), 1e-30)
            g_gap = abs(value - g_val) / scale
        else:
            skipped = True
    return SecondLawVerdict(cyclic_info=value, orientation=orient,
                            holds=holds, simple=simple, greens_value=g_val,
                            greens_rel_gap=g_gap, greens_skipped=skipped)


def random_stimulus_loop(rng: np.random.Generator, kind: str | None = None,
                         mu_range: tuple[float, float] = (0.05, 8.0),
                         m_range: tuple[float, float] = (0.5, 1e3)) -> StimulusLoop:
    """Random counterclockwise simple loop in the (mu, m) plane."""
    kinds = ("rectangle", "polygon", "ellipse")
    if kind is None:
        kind = kinds[rng.integers(len(kinds))]
    mu_lo, mu_hi = mu_range
    m_lo, m_hi = m_range

    if kind == "rectangle":
        u1, u2 = np.sort(rng.uniform(mu_lo, mu_hi, 2))
        v1, v2 = np.sort(rng.uniform(m_lo, m_hi, 2))
        while u2 - u1 < 1e-6 * max(mu_hi, 1.0) or v2 - v1 < 1e-6 * m_hi:
            u1, u2 = np.sort(rng.uniform(mu_lo, mu_hi, 2))
            v1, v2 = np.sort(rng.uniform(m_lo, m_hi, 2))
        mu = np.array([u1, u2, u2, u1, u1])
        m = np.array([v1, v1, v2, v2, v1])
        return StimulusLoop(mu, m)

    if kind == "polygon":
        while True:
            npts = int(rng.integers(5, 10))
            pts = np.column_stack([rng.uniform(mu_lo, mu_hi, npts),
                                   rng.uniform(m_lo, m_hi, npts)])
            try:
                hull = convex_hull(pts)
                break
            except InvalidStateError:
                continue
        mu = np.append(hull[:, 0], hull[0, 0])
        m = np.append(hull[:, 1], hull[0, 1])
        return StimulusLoop(mu, m)

    if kind == "ellipse":
        muc = rng.uniform(mu_lo, mu_hi)
        mc = rng.uniform(m_lo, m_hi)
        rmu = rng.uniform(0.05, 0.95) * min(muc - mu_lo, mu_hi - muc)
        rm = rng.uniform(0.05, 0.95) * min(mc - m_lo, m_hi - mc)
        if rmu <= 0 or rm <= 0:
            return random_stimulus_loop(rng, "ellipse", mu_range, m_range)
        t = np.linspace(0.0, 2.0 * np.pi, 33)[:-1]
        mu = muc + rmu * np.cos(t)
        m = mc + rm * np.sin(t)
        mu = np.append(mu, mu[0])
        m = np.append(m, m[0])
        return StimulusLoop(mu, m)

    raise InvalidStateError(f"unknown loop kind {kind!r}")
