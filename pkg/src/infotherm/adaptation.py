"""Firing-rate adaptation as relaxation of an internal acquisition size.

A sensory unit holding stimulus estimates responds to a step from
background delta_i to delta_i + i with the rate

    F(i, t) = (k/2) log(1 + beta (i + delta_i)^p / m(t)),

where the internal acquisition size relaxes as

    dm/dt = -a (m - m_eq),   m(0) = delta_i^(p/2),   m_eq = (i + delta_i)^(p/2).

Four operating points follow: the spontaneous rate SR before the step,
the peak rate PR read at step onset (t = 0), the steady state SS after
relaxation, and the transient rate TR at the offset back to background:

    SR = (k/2) log(1 + beta delta_i^(p/2))
    PR = (k/2) log(1 + beta (i + delta_i)^p / delta_i^(p/2))
    SS = (k/2) log(1 + beta (i + delta_i)^(p/2))
    TR = (k/2) log(1 + beta delta_i^p / (i + delta_i)^(p/2))

Two parameter-free consequences hold for every positive parameter set:

    sqrt(PR * SR) <= SS <= (PR + SR) / 2        (universal inequality)
    (PR - SS) + (TR - SR) >= 0                  (cycle balance)

and the lower bound gives the log-log prediction SS ~ PR^(1/2) at fixed
background.  This module evaluates the model, checks measured
(SR, PR, SS) triples against the bounds, and fits the log-log slope.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    EmptyInputError,
    InsufficientDataError,
    InsufficientVariationError,
    InvalidStateError,
)


@dataclass(frozen=True)
class AdaptationParams:
    """Gain k, coupling beta, constitutive exponent p, background delta_i,
    relaxation rate a; all strictly positive."""

    k: float
    beta: float
    p: float
    delta_i: float
    a: float

    def __post_init__(self):
        for name in ("k", "beta", "p", "delta_i", "a"):
            v = float(getattr(self, name))
            if not math.isfinite(v) or v <= 0:
                raise InvalidStateError(f"{name} must be finite and > 0")
            object.__setattr__(self, name, v)


def m_of_t(t, i: float, params: AdaptationParams):
    """Acquisition size at time t >= 0 after a step of height i >= 0."""
    i = float(i)
    if i < 0:
        raise InvalidStateError("step height i must be >= 0")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise InvalidStateError("time must be >= 0")
    m0 = params.delta_i ** (params.p / 2.0)
    meq = (i + params.delta_i) ** (params.p / 2.0)
    decay = np.exp(-params.a * t)
    out = m0 * decay + meq * (1.0 - decay)
    return out if out.ndim else float(out)


def firing_rate(i: float, t, params: AdaptationParams):
    """Rate F(i, t) = (k/2) log(1 + beta (i + delta_i)^p / m(t)).

    At t = 0 this is the peak rate PR; as t grows it relaxes
    monotonically to the steady state SS.
    """
    i = float(i)
    if i < 0:
        raise InvalidStateError("step height i must be >= 0")
    num = params.beta * (i + params.delta_i) ** params.p
    m = m_of_t(t, i, params)
    out = 0.5 * params.k * np.log1p(num / m)
    return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class FixedPoints:
    """The four operating points of one step response."""

    sr: float
    pr: float
    ss: float
    tr: float


def fixed_points(i: float, params: AdaptationParams) -> FixedPoints:
    """Spontaneous, peak, steady-state, and transient rates for step i."""
    i = float(i)
    if i < 0:
        raise InvalidStateError("step height i must be >= 0")
    k2 = 0.5 * params.k
    b = params.beta
    di = params.delta_i
    tot = i + di
    hp = params.p / 2.0
    return FixedPoints(
        sr=k2 * math.log1p(b * di ** hp),
        pr=k2 * math.log1p(b * tot ** params.p / di ** hp),
        ss=k2 * math.log1p(b * tot ** hp),
        tr=k2 * math.log1p(b * di ** params.p / tot ** hp),
    )


def cycle_balance(i: float, params: AdaptationParams) -> float:
    """Net rate excess (PR - SS) + (TR - SR) over one on-off stimulus cycle.

    Nonnegative for every positive parameter set; the adaptation analogue
    of the loop dissipation statement.
    """
    fp = fixed_points(i, params)
    return (fp.pr - fp.ss) + (fp.tr - fp.sr)


@dataclass(frozen=True)
class AdaptationTriple:
    """One measured unit: spontaneous, peak and steady-state rates."""

    unit_id: str
    sr: float
    pr: float
    ss: float

    def __post_init__(self):
        for name in ("sr", "pr", "ss"):
            v = float(getattr(self, name))
            if not math.isfinite(v) or v < 0:
                raise InvalidStateError(f"{name} must be finite and >= 0")
            object.__setattr__(self, name, v)
        if self.pr < self.sr:
            raise InvalidStateError("peak rate below spontaneous rate")


@dataclass(frozen=True)
class InequalityVerdict:
    """Margins of one triple against the universal bounds.

    ``margin_lower`` is SS - sqrt(PR * SR) and ``margin_upper`` is
    (PR + SR)/2 - SS; both should be nonnegative.
    """

    lower_ok: bool
    upper_ok: bool
    margin_lower: float
    margin_upper: float


def universal_inequality_check(triple: AdaptationTriple,
                               tol: float = 1e-9) -> InequalityVerdict:
    """Check sqrt(PR * SR) <= SS <= (PR + SR) / 2 with a small tolerance."""
    lo = triple.ss - math.sqrt(triple.pr * triple.sr)
    hi = 0.5 * (triple.pr + triple.sr) - triple.ss
    return InequalityVerdict(lower_ok=lo >= -tol, upper_ok=hi >= -tol,
                             margin_lower=lo, margin_upper=hi)


@dataclass(frozen=True)
class SlopeFit:
    """Least-squares line through (log PR, log SS)."""

    slope: float
    intercept: float
    r: float


def loglog_slope(triples: Sequence[AdaptationTriple]) -> SlopeFit:
    """Fit log SS against log PR across units.

    Needs at least three triples with strictly positive PR and SS; a
    corpus whose peak rates are all equal has no usable variation.
    """
    pts = [(t.pr, t.ss) for t in triples if t.pr > 0 and t.ss > 0]
    if len(pts) < 3:
        raise InsufficientDataError(
            "log-log fit needs at least 3 triples with positive PR and SS")
    x = np.log([p for p, _ in pts])
    y = np.log([s for _, s in pts])
    if np.ptp(x) == 0.0:
        raise InsufficientVariationError("all peak rates are equal")
    slope, intercept = np.polyfit(x, y, 1)
    r = float(np.corrcoef(x, y)[0, 1])
    return SlopeFit(slope=float(slope), intercept=float(intercept), r=r)


@dataclass(frozen=True)
class IngestReport:
    """Outcome of one CSV ingest: counts, bound verdicts, slope fit."""

    n_rows: int
    n_malformed: int
    n_pass_lower: int
    n_pass_upper: int
    worst_margin_lower: float
    worst_margin_upper: float
    slope_fit: Optional[SlopeFit]
    errors: tuple[tuple[int, str], ...]

    def to_dict(self) -> dict:
        fit = None
        if self.slope_fit is not None:
            fit = {"slope": self.slope_fit.slope,
                   "intercept": self.slope_fit.intercept,
                   "r": self.slope_fit.r}
        return {
            "n_rows": self.n_rows,
            "n_malformed": self.n_malformed,
            "n_pass_lower": self.n_pass_lower,
            "n_pass_upper": self.n_pass_upper,
            "worst_margins": {"lower": self.worst_margin_lower,
                              "upper": self.worst_margin_upper},
            "slope_fit": fit,
        }


def ingest_triples(source) -> tuple[list[AdaptationTriple], IngestReport]:
    """Read unit triples from CSV with header unit_id,sr,pr,ss.

    ``source`` may be a path, an open text stream, an iterable of lines,
    or the CSV text itself (recognised by embedded newlines).  Malformed
    rows are skipped and recorded with their line numbers; a source with
    no data rows at all raises EmptyInputError.
    """
    if isinstance(source, str) and "\n" in source:
        source = io.StringIO(source)
    elif isinstance(source, (str, Path)):
        with open(source, "r", newline="") as fh:
            return ingest_triples(fh)

    reader = csv.reader(source)
    rows = list(reader)
    if rows and [c.strip().lower() for c in rows[0]] == ["unit_id", "sr", "pr", "ss"]:
        rows = rows[1:]
        offset = 2
    else:
        offset = 1
    rows = [(idx + offset, row) for idx, row in enumerate(rows)
            if any(c.strip() for c in row)]
    if not rows:
        raise EmptyInputError("no data rows in triple source")

    triples: list[AdaptationTriple] = []
    errors: list[tuple[int, str]] = []
    for line_no, row in rows:
        if len(row) != 4:
            errors.append((line_no, f"expected 4 fields, got {len(row)}"))
            continue
        try:
            triples.append(AdaptationTriple(
                unit_id=row[0].strip(), sr=float(row[1]),
                pr=float(row[2]), ss=float(row[3])))
        except (ValueError, InvalidStateError) as exc:
            errors.append((line_no, str(exc)))
    report = corpus_report(triples, n_malformed=len(errors),
                           errors=tuple(errors))
    return triples, report


def corpus_report(triples: Sequence[AdaptationTriple], n_malformed: int = 0,
                  errors: tuple[tuple[int, str], ...] = (),
                  tol: float = 1e-9) -> IngestReport:
    """Summarise bound verdicts and the log-log fit over a corpus."""
    n_lo = n_hi = 0
    worst_lo = math.inf
    worst_hi = math.inf
    for t in triples:
        v = universal_inequality_check(t, tol=tol)
        n_lo += v.lower_ok
        n_hi += v.upper_ok
        worst_lo = min(worst_lo, v.margin_lower)
        worst_hi = min(worst_hi, v.margin_upper)
    try:
        fit = loglog_slope(triples)
    except InsufficientDataError:
        fit = None
    if not triples:
        worst_lo = worst_hi = math.nan
    return IngestReport(
        n_rows=len(triples), n_malformed=n_malformed,
        n_pass_lower=n_lo, n_pass_upper=n_hi,
        worst_margin_lower=worst_lo, worst_margin_upper=worst_hi,
        slope_fit=fit, errors=errors)


def model_triples(params: AdaptationParams, i_values: Iterable[float],
                  prefix: str = "unit") -> list[AdaptationTriple]:
    """Generate a synthetic corpus from the model's fixed points."""
    out = []
    for idx, i in enumerate(i_values):
        fp = fixed_points(float(i), params)
        out.append(AdaptationTriple(unit_id=f"{prefix}{idx:03d}",
                                    sr=fp.sr, pr=fp.pr, ss=fp.ss))
    return out


def sqrt_law_triples(sr0: float, pr_values: Iterable[float],
                     prefix: str = "sq") -> list[AdaptationTriple]:
    """Corpus sitting exactly on the lower bound SS = sqrt(PR * SR)."""
    if sr0 <= 0:
        raise InvalidStateError("sr0 must be > 0")
    out = []
    for idx, pr in enumerate(pr_values):
        pr = float(pr)
        if pr < sr0:
            raise InvalidStateError("peak rate below spontaneous rate")
        out.append(AdaptationTriple(unit_id=f"{prefix}{idx:03d}", sr=sr0,
                                    pr=pr, ss=math.sqrt(pr * sr0)))
    return out
