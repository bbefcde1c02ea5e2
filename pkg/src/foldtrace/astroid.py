"""Astroid verification harness.

The astroid |x|^(2/3) + |y|^(2/3) = 1 has four cusps, which makes it the
standard stress test for turning-point navigation. This module provides
the field, the radial percent-error measure against the exact
parametrization (cos^3 t, sin^3 t), and a sweep over scan parameters that
reports accuracy and whether every cusp was passed.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Sequence

import numpy as np

from .errors import TraceError
from .geometry import PLUS_X, Point2, cbrt
from .tracer import SolutionPath, Termination, TraceConfig, trace
from .turnpoint import ResidualField, ScanConfig

log = logging.getLogger(__name__)

CUSPS = (Point2(1.0, 0.0), Point2(0.0, 1.0), Point2(-1.0, 0.0), Point2(0.0, -1.0))

# A cusp counts as navigated when the path comes within this many steps of
# it; wide scan radii legitimately hop over the tip by a few step lengths.
NAVIGATED_RADIUS_STEPS = 10.0

_DENSE_T = np.linspace(0.0, 0.5 * math.pi, 1025)
_DENSE_XY = np.stack([np.cos(_DENSE_T) ** 3, np.sin(_DENSE_T) ** 3], axis=1)


def astroid_field() -> ResidualField:
    """f(x, y) = cbrt(x)^2 + cbrt(y)^2 - 1, real-valued on all quadrants."""

    def f(x: float, y: float) -> float:
        return cbrt(x) ** 2 + cbrt(y) ** 2 - 1.0

    return f


def _approach_rate(a: float, b: float, t: float) -> float:
    """(p - c(t)) . c'(t): positive while moving along the curve toward p.

    The squared distance to (a, b) is decreasing exactly where this is
    positive, so its +/- crossing is the nearest-point parameter.
    """
    ct, st = math.cos(t), math.sin(t)
    return (a - ct ** 3) * (-3.0 * ct * ct * st) + (b - st ** 3) * (3.0 * st * st * ct)


def _nearest_parameter(a: float, b: float) -> float:
    """Parameter t in [0, pi/2] of the exact curve point nearest (a, b).

    Dense sampling brackets the minimum, then bisection on the approach
    rate pins it to machine precision. Comparison-based minimization
    alone cannot resolve t finely enough for the sub-1e-10-percent error
    checks, and Newton on the orthogonality condition degenerates at the
    cusp parameters where c'(t) = 0.
    """
    d2 = (_DENSE_XY[:, 0] - a) ** 2 + (_DENSE_XY[:, 1] - b) ** 2
    idx = int(np.argmin(d2))
    t_best = float(_DENSE_T[idx])
    tiny = 1e-18  # keeps the bracket off the exactly-degenerate cusp parameters
    lo = max(float(_DENSE_T[max(idx - 1, 0)]), tiny)
    hi = min(float(_DENSE_T[min(idx + 1, len(_DENSE_T) - 1)]), 0.5 * math.pi - tiny)

    g_lo = _approach_rate(a, b, lo)
    g_hi = _approach_rate(a, b, hi)
    if g_lo >= 0.0 >= g_hi and (g_lo > 0.0 or g_hi < 0.0):
        for _ in range(90):
            mid = 0.5 * (lo + hi)
            if mid == lo or mid == hi:
                break
            if _approach_rate(a, b, mid) > 0.0:
                lo = mid
            else:
                hi = mid
        t_best = 0.5 * (lo + hi)

    candidates = [t_best, 0.0, 0.5 * math.pi]
    return min(candidates, key=lambda tt: (a - math.cos(tt) ** 3) ** 2 + (b - math.sin(tt) ** 3) ** 2)


def percent_error(path_point: Point2) -> float:
    """Signed radial error (percent) against the nearest exact astroid point.

    Positive means the traced point sits radially outside the curve.
    """
    a, b = abs(path_point.x), abs(path_point.y)
    if a == 0.0 and b == 0.0:
        raise ValueError("percent error is undefined at the origin")
    t = _nearest_parameter(a, b)
    qx, qy = math.cos(t) ** 3, math.sin(t) ** 3
    rho_exact = math.hypot(qx, qy)
    rho_point = math.hypot(a, b)
    return (rho_point - rho_exact) / rho_exact * 100.0


def max_abs_percent_error(path: Iterable[Point2]) -> float:
    worst = 0.0
    for p in path:
        worst = max(worst, abs(percent_error(p)))
    return worst


def navigated_all_cusps(path: Iterable[Point2], delta: float) -> bool:
    radius = NAVIGATED_RADIUS_STEPS * delta
    remaining = set(range(len(CUSPS)))
    for p in path:
        for i in tuple(remaining):
            if p.distance_to(CUSPS[i]) <= radius:
                remaining.discard(i)
        if not remaining:
            return True
    return False


@dataclass(frozen=True)
class SweepResult:
    r_factor: float
    k: int
    n: int
    max_pe: float
    navigated_all_cusps: bool


def trace_astroid(
    delta: float,
    r_factor: float = 1.0,
    k: int = 5,
    n: int = 8,
    residual_tol: float = 1e-10,
    max_points: int = 0,
) -> SolutionPath:
    """Trace the full astroid from (0, 1) marching +x."""
    if max_points <= 0:
        max_points = int(6.0 / delta) + 500
    cfg = TraceConfig(
        step=delta,
        scan=ScanConfig(radius=r_factor * delta, mesh_count=n, reference_lag=k,
                        residual_tol=residual_tol),
        max_points=max_points,
    )
    return trace(astroid_field(), Point2(0.0, 1.0), PLUS_X, cfg)


def run_sweep(
    r_factors: Sequence[float],
    k_values: Sequence[int],
    n_values: Sequence[int],
    delta: float,
) -> List[SweepResult]:
    """Trace the astroid for every (r, k, n) combination.

    Individual trace failures are recorded in the result (partial-path
    error, cusps not navigated), never raised.
    """
    if not r_factors or not k_values or not n_values:
        raise ValueError("sweep grids must be nonempty")
    results: List[SweepResult] = []
    for rf in r_factors:
        for k in k_values:
            for n in n_values:
                try:
                    path = trace_astroid(delta, r_factor=rf, k=k, n=n)
                    points = list(path.points)
                    closed = path.termination is Termination.CLOSED
                except TraceError as exc:
                    log.warning("sweep combination r=%g k=%d n=%d failed: %s", rf, k, n, exc)
                    points = list(exc.path.points) if exc.path is not None else []
                    closed = False
                navigated = closed and navigated_all_cusps(points, delta)
                max_pe = max_abs_percent_error(points) if points else math.nan
                results.append(SweepResult(r_factor=rf, k=k, n=n, max_pe=max_pe,
                                           navigated_all_cusps=navigated))
    return results
