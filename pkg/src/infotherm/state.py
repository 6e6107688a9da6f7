"""State functions of asymptotic inference.

A point in the state space is a pair (m, sigma2): the acquisition size m > 0
and the intrinsic variance sigma2 >= 0 of a single observation.  Estimation
runs through an additive readout channel with noise floor sigma_r2, so the
posterior variance of an efficient estimator is sigma2/m + sigma_r2.

The scalar functions of state implemented here:

    H      = 1/2 log(sigma2/m + sigma_r2) + const        entropy
    Theta  = 2 (sigma2 + m sigma_r2)                      uncertainty susceptibility
    Theta_C = 2 m sigma_r2                                susceptibility floor
    eta    = Theta_C / Theta                              estimation efficiency
    MMSE   = 2 sigma2 sigma_r2 / Theta                    channel mean-square error

Two entropy conventions are supported.  ``mutual_info`` subtracts the
readout baseline, H = 1/2 log(1 + sigma2/(m sigma_r2)), which is
nonnegative and vanishes at sigma2 = 0 but requires sigma_r2 > 0.  ``raw``
keeps H = 1/2 log(sigma2/m + sigma_r2) + c with a caller-chosen additive
constant c, valid for any sigma_r2 >= 0.

Exact differential identities tie the functions together:

    dH/dsigma2 |_m  = 1 / Theta
    dH/dm |_sigma2  = -sigma2 / (Theta m)
    dsigma2/dm |_H  = sigma2 / m
    dTheta/dm |_H   = Theta / m

H is intensive and Theta extensive under the joint scaling
(m, sigma2) -> (k m, k sigma2); the quasi-potentials A = sigma2 - Theta H
and G = -Theta H scale like Theta.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import (
    AdmissibilityError,
    DegenerateStateError,
    EfficiencyUndefinedError,
    InvalidConventionError,
    InvalidStateError,
)

MUTUAL_INFO = "mutual_info"
RAW = "raw"


class DegenerateStateWarning(UserWarning):
    """Raw entropy evaluated at the fully collapsed state (variance zero)."""


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise InvalidStateError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class NoiseModel:
    """Readout noise floor plus the entropy convention in force.

    ``constant`` is the additive entropy offset in nats and is only
    consulted by the ``raw`` convention.
    """

    sigma_r2: float
    convention: str = MUTUAL_INFO
    constant: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "sigma_r2", _require_finite("sigma_r2", self.sigma_r2))
        object.__setattr__(self, "constant", _require_finite("constant", self.constant))
        if self.sigma_r2 < 0:
            raise InvalidStateError(f"sigma_r2 must be >= 0, got {self.sigma_r2}")
        if self.convention not in (MUTUAL_INFO, RAW):
            raise InvalidConventionError(
                f"unknown entropy convention {self.convention!r}")
        if self.convention == MUTUAL_INFO and self.sigma_r2 == 0.0:
            raise InvalidConventionError(
                "mutual_info convention needs sigma_r2 > 0; use the raw "
                "convention for a noiseless readout")


@dataclass(frozen=True)
class InferenceState:
    """A point (m, sigma2) of the inference state space."""

    m: float
    sigma2: float

    def __post_init__(self):
        object.__setattr__(self, "m", _require_finite("m", self.m))
        object.__setattr__(self, "sigma2", _require_finite("sigma2", self.sigma2))
        if self.m <= 0:
            raise InvalidStateError(f"m must be > 0, got {self.m}")
        if self.sigma2 < 0:
            raise InvalidStateError(f"sigma2 must be >= 0, got {self.sigma2}")


@dataclass(frozen=True)
class Partials:
    """First partial derivatives of the state functions at a point."""

    dh_dsigma2: float      # (dH/dsigma2)_m = 1/Theta
    dh_dm: float           # (dH/dm)_sigma2 = -sigma2/(Theta m)
    dsigma2_dm: float      # (dsigma2/dm)_H = sigma2/m
    dtheta_dm: float       # (dTheta/dm)_H = Theta/m
    dsigma2_dtheta: float  # (dsigma2/dTheta)_m = 1/2, a constant specific heat


@dataclass(frozen=True)
class QuasiPotentials:
    """Legendre-style combinations A = sigma2 - Theta H and G = -Theta H."""

    a: float
    g: float


def entropy(state: InferenceState, noise: NoiseModel) -> float:
    """Entropy of the state under the noise model's convention, in nats.

    The mutual_info form is evaluated through log1p, so it loses no
    precision deep in the asymptotic regime sigma2/(m sigma_r2) << 1.
    """
    if noise.convention == MUTUAL_INFO:
        return 0.5 * math.log1p(state.sigma2 / (state.m * noise.sigma_r2))
    v = state.sigma2 / state.m + noise.sigma_r2
    if v == 0.0:
        warnings.warn("entropy of a collapsed state is -inf",
                      DegenerateStateWarning, stacklevel=2)
        return -math.inf
    return 0.5 * math.log(v) + noise.constant


def theta(state: InferenceState, noise: NoiseModel) -> float:
    """Uncertainty susceptibility Theta = 2 (sigma2 + m sigma_r2)."""
    return 2.0 * (state.sigma2 + state.m * noise.sigma_r2)


def theta_floor(m: float, noise: NoiseModel) -> float:
    """Susceptibility floor Theta_C = 2 m sigma_r2, reached at sigma2 = 0."""
    m = _require_finite("m", m)
    if m <= 0:
        raise InvalidStateError(f"m must be > 0, got {m}")
    return 2.0 * m * noise.sigma_r2


def efficiency(state: InferenceState, noise: NoiseModel) -> float:
    """Estimation efficiency eta = Theta_C / Theta, in (0, 1].

    Equals MMSE / (sigma2 / m) and hits 1 exactly when sigma2 = 0.
    Undefined for a noiseless readout.
    """
    if noise.sigma_r2 == 0.0:
        raise EfficiencyUndefinedError(
            "efficiency is undefined at sigma_r2 = 0")
    return state.m * noise.sigma_r2 / (state.sigma2 + state.m * noise.sigma_r2)


def mmse(state: InferenceState, noise: NoiseModel) -> float:
    """Mean-square error of the conditional-mean readout, 2 sigma2 sigma_r2 / Theta."""
    t = theta(state, noise)
    if t == 0.0:
        raise DegenerateStateError("MMSE undefined at Theta = 0")
    return 2.0 * state.sigma2 * noise.sigma_r2 / t


def partials(state: InferenceState, noise: NoiseModel) -> Partials:
    """All four analytic partial derivatives at the given point."""
    t = theta(state, noise)
    if t == 0.0:
        raise DegenerateStateError("partials undefined at Theta = 0")
    return Partials(
        dh_dsigma2=1.0 / t,
        dh_dm=-state.sigma2 / (t * state.m),
        dsigma2_dm=state.sigma2 / state.m,
        dtheta_dm=t / state.m,
        dsigma2_dtheta=0.5,
    )


def quasi_potentials(state: InferenceState, noise: NoiseModel) -> QuasiPotentials:
    """Quasi-potentials A = sigma2 - Theta H and G = -Theta H.

    At the degenerate point Theta = 0 the product Theta H tends to zero
    even though H diverges, so the limits A = sigma2 and G = 0 are used.
    """
    t = theta(state, noise)
    if t == 0.0:
        return QuasiPotentials(a=state.sigma2, g=0.0)
    th = t * entropy(state, noise)
    return QuasiPotentials(a=state.sigma2 - th, g=-th)


def theta_suboptimal(state: InferenceState, v: float, noise: NoiseModel) -> float:
    """Susceptibility of a suboptimal estimator with variance v at size m.

    The estimator must be admissible, v >= sigma2 / m; the information
    bound forbids anything smaller.  Returns 2 m (v + sigma_r2), which
    collapses to Theta when v sits exactly on the bound.
    """
    v = _require_finite("v", v)
    bound = state.sigma2 / state.m
    if v < bound:
        raise AdmissibilityError(
            f"estimator variance {v} beats the information bound {bound}")
    return 2.0 * state.m * (v + noise.sigma_r2)
