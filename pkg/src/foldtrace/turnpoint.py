"""Half-disk boundary scan used to continue a trace past a turning point.

Given a turning point whose blocked half-plane is known, the steps are:
sample the opposite half-circle uniformly, collect every root of the
residual field on that arc, pick the candidate farthest from a reference
point a few steps back along the path, and derive the new marching
direction from the vector to that candidate.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

from .errors import CurveTerminated, FieldEvaluationError, InsufficientHistory, ZeroVector
from .geometry import Axis, Point2, StepDirection, TurningPointKind

log = logging.getLogger(__name__)

ResidualField = Callable[[float, float], float]


@dataclass
class ScanConfig:
    """Geometry and tolerances of the boundary scan."""

    radius: float
    mesh_count: int = 8
    reference_lag: int = 5
    residual_tol: float = 1e-10

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.mesh_count < 1:
            raise ValueError("mesh_count must be >= 1")
        if self.reference_lag < 1:
            raise ValueError("reference_lag must be >= 1")
        if self.residual_tol <= 0:
            raise ValueError("residual_tol must be positive")


@dataclass(frozen=True)
class Candidate:
    point: Point2
    mesh_index: int


@dataclass
class CandidateSet:
    """Roots found on the scanned arc, in mesh order."""

    candidates: List[Candidate] = field(default_factory=list)
    skipped_mesh_indices: List[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.candidates)

    def __iter__(self):
        return iter(self.candidates)


# Unit vector at arc parameter phi for each kind, written so that the
# coordinate bounding the open half-plane is computed from sin(phi) and is
# therefore exactly zero at phi = 0 (the arc endpoint touching the
# boundary) and strictly signed elsewhere. Equivalent to rotating the
# east-blocked arc theta in [pi/2, 3*pi/2) by quarter turns.
def _arc_unit(kind: TurningPointKind, phi: float) -> Tuple[float, float]:
    s, c = math.sin(phi), math.cos(phi)
    if kind is TurningPointKind.TYPE1:  # east blocked, scan west
        return -s, c
    if kind is TurningPointKind.TYPE2:  # north blocked, scan south
        return -c, -s
    if kind is TurningPointKind.TYPE3:  # west blocked, scan east
        return s, -c
    return c, s  # TYPE4: south blocked, scan north


def arc_point(center: Point2, radius: float, kind: TurningPointKind, phi: float) -> Point2:
    ux, uy = _arc_unit(kind, phi)
    return Point2(center.x + radius * ux, center.y + radius * uy)


def mesh_half_circle(center: Point2, radius: float, n: int, kind: TurningPointKind) -> List[Point2]:
    """Uniform n-point mesh of the half-circle opposite the blocked direction.

    The east-blocked mesh angles are theta_i = (pi/(2n)) * (n + 2i) for
    i = 0..n-1, i.e. pi/2 + pi*i/n; other kinds use the same arc rotated by
    quarter turns. Spacing between consecutive angles is exactly pi/n.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    if n < 1:
        raise ValueError("n must be >= 1")
    return [arc_point(center, radius, kind, math.pi * i / n) for i in range(n)]


def _bisect_arc(
    residual: ResidualField,
    center: Point2,
    radius: float,
    lo: float,
    f_lo: float,
    hi: float,
    f_hi: float,
    tol: float,
) -> Optional[Point2]:
    """Refine a sign change of the residual along the arc angle."""
    best = (lo, f_lo) if abs(f_lo) <= abs(f_hi) else (hi, f_hi)
    for _ in range(200):
        if abs(best[1]) <= tol:
            theta = best[0]
            return Point2(center.x + radius * math.cos(theta), center.y + radius * math.sin(theta))
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        fm = residual(center.x + radius * math.cos(mid), center.y + radius * math.sin(mid))
        if abs(fm) < abs(best[1]):
            best = (mid, fm)
        if (fm < 0.0) == (f_lo < 0.0):
            lo, f_lo = mid, fm
        else:
            hi, f_hi = mid, fm
    if abs(best[1]) <= tol:
        theta = best[0]
        return Point2(center.x + radius * math.cos(theta), center.y + radius * math.sin(theta))
    log.debug("arc bisection stopped at machine width with |f|=%.3e > tol", abs(best[1]))
    return None


def scan_boundary(
    residual: ResidualField,
    mesh: Sequence[Point2],
    center: Point2,
    radius: float,
    cfg: ScanConfig,
) -> CandidateSet:
    """Collect residual roots on the sampled arc.

    A mesh point with |f| <= residual_tol is accepted outright; a sign
    change between consecutive mesh points is refined by bisection in arc
    angle. Mesh points where the field cannot be evaluated are skipped and
    recorded.
    """
    if not mesh:
        raise ValueError("mesh must be nonempty")
    tol = cfg.residual_tol

    values: List[Optional[float]] = []
    result = CandidateSet()
    for i, p in enumerate(mesh):
        try:
            v = residual(p.x, p.y)
            if not math.isfinite(v):
                raise FieldEvaluationError(f"non-finite residual at ({p.x}, {p.y})")
        except FieldEvaluationError as exc:
            log.debug("mesh point %d skipped: %s", i, exc)
            result.skipped_mesh_indices.append(i)
            values.append(None)
            continue
        values.append(v)

    angles = [math.atan2(p.y - center.y, p.x - center.x) for p in mesh]
    # The mesh spans [phi_0, phi_0 + pi*(n-1)/n]; probe the far end of the
    # half-circle too, otherwise a root in the terminal pi/n gap (common
    # when the curve crosses close to the half-plane boundary) is missed.
    spacing = math.pi / len(mesh)
    end_angle = angles[-1] + spacing
    end_point = Point2(center.x + radius * math.cos(end_angle),
                       center.y + radius * math.sin(end_angle))
    try:
        end_value: Optional[float] = residual(end_point.x, end_point.y)
        if not math.isfinite(end_value):
            raise FieldEvaluationError("non-finite residual at arc end")
    except FieldEvaluationError as exc:
        log.debug("arc end probe skipped: %s", exc)
        end_value = None

    accepted_direct = set()
    for i, v in enumerate(values):
        if v is not None and abs(v) <= tol:
            accepted_direct.add(i)
    if end_value is not None and abs(end_value) <= tol:
        accepted_direct.add(len(mesh))  # suppresses refining the last segment

    seg_angles = angles + [end_angle]
    seg_values = values + [end_value]
    for i in range(len(mesh)):
        if i in accepted_direct:
            result.candidates.append(Candidate(mesh[i], i))
        f_lo, f_hi = seg_values[i], seg_values[i + 1]
        if f_lo is None or f_hi is None:
            continue
        if i in accepted_direct or (i + 1) in accepted_direct:
            continue  # a direct candidate already covers this crossing
        if (f_lo < 0.0) == (f_hi < 0.0):
            continue
        lo = seg_angles[i]
        # walk the short way around the circle
        span = math.remainder(seg_angles[i + 1] - lo, 2.0 * math.pi)
        try:
            refined = _bisect_arc(residual, center, radius, lo, f_lo, lo + span, f_hi, tol)
        except FieldEvaluationError as exc:
            log.debug("bisection between mesh %d and %d failed: %s", i, i + 1, exc)
            result.skipped_mesh_indices.append(i)
            continue
        if refined is not None:
            result.candidates.append(Candidate(refined, i))
    if len(mesh) in accepted_direct and (len(mesh) - 1) not in accepted_direct:
        result.candidates.append(Candidate(end_point, len(mesh)))
    return result


def choose_reference_point(path, turning_index: int, cfg: ScanConfig) -> Point2:
    """Pick the path point the cost function measures distances from.

    Preferred is the point reference_lag steps back; if that lies outside
    the scan disk, indices are walked toward the turning point and the
    first point strictly inside the disk wins, the immediate predecessor
    serving as the fallback when none is.
    """
    points = getattr(path, "points", path)
    j = turning_index
    if len(points) < 2 or j < 1:
        raise InsufficientHistory("need at least one path point before the turning point")
    tp = points[j]
    start = max(j - cfg.reference_lag, 0)
    for i in range(start, j):
        if points[i].distance_to(tp) < cfg.radius:
            return points[i]
    return points[j - 1]


def select_exit_point(candidates: CandidateSet, reference: Point2) -> Point2:
    """Candidate minimizing 1/distance-to-reference, i.e. the farthest one.

    Ties break toward the smallest mesh index. Candidates coinciding with
    the reference (cost undefined) are discarded. An empty set raises
    CurveTerminated: the scan proved there is nothing to continue to.
    """
    best: Optional[Candidate] = None
    best_dist = -1.0
    for cand in candidates:
        d = cand.point.distance_to(reference)
        if d == 0.0:
            log.warning("candidate at mesh index %d coincides with the reference; discarded",
                        cand.mesh_index)
            continue
        if d > best_dist:
            best, best_dist = cand, d
    if best is None:
        raise CurveTerminated("boundary scan found no continuation candidates")
    return best.point


def new_direction(
    turning_point: Point2,
    exit_point: Point2,
    incoming: Optional[StepDirection] = None,
) -> Tuple[StepDirection, Point2]:
    """Derive the next marching direction from the turning-point-to-exit vector.

    The axis with the larger component wins, signed accordingly; on an
    exact tie the axis perpendicular to the blocked (incoming) one is
    chosen. The restart point is the exit point itself.
    """
    vx = exit_point.x - turning_point.x
    vy = exit_point.y - turning_point.y
    if vx == 0.0 and vy == 0.0:
        raise ZeroVector("exit point equals turning point")
    if abs(vx) > abs(vy):
        axis = Axis.X
    elif abs(vy) > abs(vx):
        axis = Axis.Y
    elif incoming is not None:
        axis = incoming.axis.other
    else:
        axis = Axis.Y
    sign = 1 if (vx if axis is Axis.X else vy) > 0 else -1
    return StepDirection(axis, sign), exit_point
