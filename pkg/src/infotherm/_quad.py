"""Quadrature kernels shared by the path and cycle modules.

Two engines live here:

* an adaptive 15-point Gauss-Kronrod rule for line integrals of smooth
  1-forms ``P dx + Q dy`` along piecewise-linear curves, vectorised over
  all segments and bisected only where the embedded 7-point Gauss estimate
  disagrees, and
* a degree-5 symmetric triangle rule with uniform quartering, used for
  area integrals over triangulated polygon interiors.

Both engines work on plain ndarrays and know nothing about the physical
meaning of the integrands.
"""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

# 15-point Kronrod abscissae on [-1, 1] and the matching weights; the odd
# indices form the embedded 7-point Gauss rule.
_XGK = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0, 0.207784955007898, 0.405845151377397,
    0.586087235467691, 0.741531185599394, 0.864864423359769,
    0.949107912342759, 0.991455371120813,
])
_WGK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529,
])
_WG = np.zeros(15)
_WG[1::2] = [0.129484966168870, 0.279705391489277, 0.381830050505119,
             0.417959183673469, 0.381830050505119, 0.279705391489277,
             0.129484966168870]

# The same rules mapped onto the unit interval.
_T01 = 0.5 * (_XGK + 1.0)
_WK01 = 0.5 * _WGK
_WG01 = 0.5 * _WG

Form = Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]]

# Hard ceiling on simultaneously active subintervals during bisection.
_MAX_ACTIVE = 1 << 18


def polyline_form_integral(x: np.ndarray, y: np.ndarray,
                           p: Form = None, q: Form = None,
                           atol: float = 1e-10,
                           max_depth: int = 48) -> float:
    """Integrate ``p(x, y) dx + q(x, y) dy`` along the polyline (x, y).

    ``p`` and ``q`` must accept broadcastable ndarrays and may be None when
    the corresponding component vanishes identically.  The absolute
    tolerance is split evenly across segments and allocated by subinterval
    width during bisection, so the accumulated quadrature error stays below
    ``atol`` for integrands the 15-point rule resolves.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape or x.size < 2:
        raise ValueError("polyline needs matching 1-d coordinate arrays")
    nseg = x.size - 1
    x0, dx = x[:-1], np.diff(x)
    y0, dy = y[:-1], np.diff(y)
    seg_tol = atol / nseg

    seg = np.arange(nseg)
    a = np.zeros(nseg)
    b = np.ones(nseg)
    total = 0.0
    depth = 0
    while seg.size:
        width = b - a
        t = a[:, None] + width[:, None] * _T01[None, :]
        xx = x0[seg, None] + t * dx[seg, None]
        yy = y0[seg, None] + t * dy[seg, None]
        f = np.zeros_like(t)
        if p is not None:
            f += p(xx, yy) * dx[seg, None]
        if q is not None:
            f += q(xx, yy) * dy[seg, None]
        k15 = (f @ _WK01) * width
        g7 = (f @ _WG01) * width
        err = np.abs(k15 - g7)
        # The two rules share their samples, so their disagreement cannot
        # drop below roundoff on the scale of the absolute integral.  Treat
        # that floor as converged: without it a segment whose |f| is large
        # never satisfies the width-proportional tolerance and the active
        # set doubles every round until memory runs out.
        floor = 64.0 * np.finfo(float).eps * ((np.abs(f) @ _WK01) * width)
        done = err <= np.maximum(seg_tol * width, floor)
        depth += 1
        n_open = int(np.count_nonzero(~done))
        if n_open == 0 or depth >= max_depth or 2 * n_open > _MAX_ACTIVE:
            # converged, or refinement budget spent: accept what we have
            total += float(np.sum(k15))
            break
        total += float(np.sum(k15[done]))
        keep = ~done
        seg, a, b = seg[keep], a[keep], b[keep]
        mid = 0.5 * (a + b)
        seg = np.concatenate([seg, seg])
        a, b = np.concatenate([a, mid]), np.concatenate([mid, b])
    return total


# Degree-5 rule on the reference triangle, barycentric points and weights.
_A1 = 0.059715871789770
_B1 = 0.470142064105115
_A2 = 0.797426985353087
_B2 = 0.101286507323456
_TRI_BARY = np.array([
    [1 / 3, 1 / 3, 1 / 3],
    [_A1, _B1, _B1], [_B1, _A1, _B1], [_B1, _B1, _A1],
    [_A2, _B2, _B2], [_B2, _A2, _B2], [_B2, _B2, _A2],
])
_TRI_W = np.array([0.225,
                   0.132394152788506, 0.132394152788506, 0.132394152788506,
                   0.125939180544827, 0.125939180544827, 0.125939180544827])


def _rule_on(tris: np.ndarray,
             f: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> float:
    """Apply the degree-5 rule to a stack of triangles, shape (n, 3, 2)."""
    px = tris[:, :, 0] @ _TRI_BARY.T            # (n, 7)
    py = tris[:, :, 1] @ _TRI_BARY.T
    v1 = tris[:, 1] - tris[:, 0]
    v2 = tris[:, 2] - tris[:, 0]
    area = 0.5 * np.abs(v1[:, 0] * v2[:, 1] - v1[:, 1] * v2[:, 0])
    return float(np.sum(area * (f(px, py) @ _TRI_W)))


def _quarter(tris: np.ndarray) -> np.ndarray:
    """Split every triangle into four congruent children."""
    a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
    ab, bc, ca = 0.5 * (a + b), 0.5 * (b + c), 0.5 * (c + a)
    return np.concatenate([
        np.stack([a, ab, ca], axis=1),
        np.stack([ab, b, bc], axis=1),
        np.stack([ca, bc, c], axis=1),
        np.stack([ab, bc, ca], axis=1),
    ])


def triangles_integral(tris: np.ndarray,
                       f: Callable[[np.ndarray, np.ndarray], np.ndarray],
                       rel_tol: float = 1e-8,
                       abs_tol: float = 1e-12,
                       max_rounds: int = 8) -> float:
    """Integrate ``f(x, y)`` over a union of triangles.

    The triangulation is refined uniformly until two successive estimates
    agree to ``rel_tol`` (or ``abs_tol`` near zero).  The degree-5 rule
    converges fast on smooth integrands, so a handful of rounds suffices.
    """
    tris = np.asarray(tris, dtype=float)
    if tris.ndim != 3 or tris.shape[1:] != (3, 2):
        raise ValueError("expected triangle stack of shape (n, 3, 2)")
    prev = _rule_on(tris, f)
    for _ in range(max_rounds):
        tris = _quarter(tris)
        cur = _rule_on(tris, f)
        if abs(cur - prev) <= rel_tol * abs(cur) + abs_tol:
            return cur
        prev = cur
    return prev
