"""Circular annulus regions and the quantities behind their area lemmas.

Every operation here computes one side of a machine-checkable inequality
for a planar annulus of outer radius r and width w: areas of intersections
with disks and angular cones, sine-sector areas, the tangent-chord angle,
and two-sided chord-length bounds.  Areas use exact circle-circle overlap
formulas or per-ray exact radial integration; nothing here is stochastic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Annulus",
    "AngleSet",
    "BallIntersection",
    "ConeIntersection",
    "SineSector",
    "TangentAngle",
    "ChordBounds",
    "annulus_area",
    "uniform_points",
    "disk_overlap_area",
    "ray_mass",
    "ball_intersection_area",
    "cone_intersection_area",
    "sine_sector_area",
    "tangent_angle_sine",
    "chord_bounds",
    "direction_measure_scan",
]


@dataclass(frozen=True)
class Annulus:
    """Planar circular annulus: center, outer radius r, width w.

    0 < w <= r; the disk is the degenerate case w = r.
    """

    center: tuple[float, float] = (0.0, 0.0)
    r: float = 1.0
    w: float = 1.0

    def __post_init__(self):
        if not self.r > 0.0:
            raise ValueError("outer radius must be positive")
        if not 0.0 < self.w <= self.r:
            raise ValueError("width must satisfy 0 < w <= r")
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))

    @property
    def inner(self) -> float:
        return self.r - self.w

    def contains(self, points, tol: float = 1e-12):
        """Boundary-inclusive membership test, elementwise on (..., 2) arrays."""
        p = np.asarray(points, dtype=float) - self.center
        d = np.hypot(p[..., 0], p[..., 1])
        return (d >= self.inner - tol) & (d <= self.r + tol)


@dataclass(frozen=True)
class AngleSet:
    """Measurable union of direction intervals (radians).

    Intervals are (lo, hi) with hi > lo; they may cross 2*pi (directions
    are taken modulo a full turn).  Total measure must not exceed 2*pi.
    """

    intervals: tuple[tuple[float, float], ...] = field(default_factory=tuple)

    def __post_init__(self):
        ivs = tuple((float(lo), float(hi)) for lo, hi in self.intervals)
        object.__setattr__(self, "intervals", ivs)
        for lo, hi in ivs:
            if hi < lo:
                raise ValueError(f"interval ({lo}, {hi}) has negative length")
        if self.measure > 2.0 * np.pi + 1e-12:
            raise ValueError("total angular measure exceeds 2*pi")

    @property
    def measure(self) -> float:
        return float(sum(hi - lo for lo, hi in self.intervals))

    @classmethod
    def full_circle(cls) -> "AngleSet":
        return cls(intervals=((0.0, 2.0 * np.pi),))


@dataclass(frozen=True)
class BallIntersection:
    area: float
    bound: float  # 2*pi*L*w


@dataclass(frozen=True)
class ConeIntersection:
    area: float
    bound: float  # 4*w*r*|K|


@dataclass(frozen=True)
class SineSector:
    area: float
    bound: float  # 8*pi*z*w*r


@dataclass(frozen=True)
class TangentAngle:
    sine: float
    bound: float  # max(2w/|AB|, 2|AB|/r)


@dataclass(frozen=True)
class ChordBounds:
    lower: float
    upper: float
    actual: float


def annulus_area(ann: Annulus) -> float:
    """pi*w*(2r - w), exactly."""
    return math.pi * ann.w * (2.0 * ann.r - ann.w)


def uniform_points(ann: Annulus, n: int, rng: np.random.Generator) -> np.ndarray:
    """n points uniform w.r.t. area, by radial inversion sampling."""
    u = rng.random(n)
    theta = rng.random(n) * (2.0 * np.pi)
    rho = np.sqrt(u * (ann.r**2 - ann.inner**2) + ann.inner**2)
    return np.column_stack([
        ann.center[0] + rho * np.cos(theta),
        ann.center[1] + rho * np.sin(theta),
    ])


def disk_overlap_area(R1, R2, d):
    """Area of the intersection of two disks with radii R1, R2 at center distance d.

    Standard lens formula; elementwise on arrays.
    """
    scalar = np.ndim(R1) == 0 and np.ndim(R2) == 0 and np.ndim(d) == 0
    shape = np.broadcast(np.asarray(R1), np.asarray(R2), np.asarray(d)).shape
    R1 = np.broadcast_to(np.asarray(R1, dtype=float), shape).ravel()
    R2 = np.broadcast_to(np.asarray(R2, dtype=float), shape).ravel()
    d = np.broadcast_to(np.asarray(d, dtype=float), shape).ravel()
    rmin = np.minimum(R1, R2)
    out = np.where(d <= np.abs(R1 - R2), np.pi * rmin**2, 0.0)
    partial = (d > np.abs(R1 - R2)) & (d < R1 + R2)
    if np.any(partial):
        r1, r2, dd = R1[partial], R2[partial], d[partial]
        c1 = np.clip((dd**2 + r1**2 - r2**2) / (2.0 * dd * r1), -1.0, 1.0)
        c2 = np.clip((dd**2 + r2**2 - r1**2) / (2.0 * dd * r2), -1.0, 1.0)
        s = (dd + r1 + r2) * (-dd + r1 + r2) * (dd - r1 + r2) * (dd + r1 - r2)
        out[partial] = (r1**2 * np.arccos(c1) + r2**2 * np.arccos(c2)
                        - 0.5 * np.sqrt(np.maximum(s, 0.0)))
    if scalar:
        return float(out[0])
    return out.reshape(shape)


def _ray_intervals(ann: Annulus, A, theta):
    """Entry/exit parameters of the ray A + l*(cos t, sin t) against both circles.

    Returns (t1o, t2o, t1i, t2i); empty intersections are encoded as
    (0, 0) intervals.  Broadcasts A (..., 2) against theta (...,).
    """
    A = np.asarray(A, dtype=float)
    theta = np.asarray(theta, dtype=float)
    ax = A[..., 0] - ann.center[0]
    ay = A[..., 1] - ann.center[1]
    ct = np.cos(theta)
    st = np.sin(theta)
    beta = ax * ct + ay * st
    d2 = ax * ax + ay * ay

    def roots(radius):
        disc = beta * beta - d2 + radius * radius
        ok = disc > 0.0
        sq = np.sqrt(np.where(ok, disc, 0.0))
        t1 = np.where(ok, -beta - sq, 0.0)
        t2 = np.where(ok, -beta + sq, 0.0)
        return t1, t2

    t1o, t2o = roots(ann.r)
    t1i, t2i = roots(ann.inner) if ann.inner > 0.0 else (np.zeros_like(beta), np.zeros_like(beta))
    return t1o, t2o, t1i, t2i


def ray_mass(ann: Annulus, A, theta, l_max=None):
    """Per-ray radial mass: integral of l dl over {l > 0: A + l*Theta in annulus}.

    This is the exact area density of the annulus in polar coordinates
    about A, so integrating it over a direction set yields the cone
    intersection area.  Optionally truncated at ``l_max``.  Broadcasts
    over A and theta.
    """
    t1o, t2o, t1i, t2i = _ray_intervals(ann, A, theta)
    if l_max is not None:
        l_max = np.asarray(l_max, dtype=float)
        t1o, t2o = np.minimum(t1o, l_max), np.minimum(t2o, l_max)
        t1i, t2i = np.minimum(t1i, l_max), np.minimum(t2i, l_max)

    def mass(t1, t2):
        lo = np.maximum(t1, 0.0)
        hi = np.maximum(t2, 0.0)
        return 0.5 * (hi * hi - lo * lo)

    out = mass(t1o, t2o) - mass(t1i, t2i)
    if out.ndim == 0:
        return float(out)
    return out


def _require_member(ann: Annulus, point, name: str):
    if not bool(ann.contains(point)):
        raise ValueError(f"{name} must lie in the annulus")


def ball_intersection_area(ann: Annulus, A, L: float, method: str = "exact",
                           tol: float = 1e-9) -> BallIntersection:
    """Area of the annulus intersected with the disk B(A, L).

    ``method="exact"`` evaluates the circle-circle overlap lens formula
    (outer disk overlap minus inner disk overlap).  ``method="polar"``
    integrates the truncated per-ray radial mass over all directions with
    an adaptive Simpson rule to relative tolerance ``tol``; the two agree
    to the integration tolerance and the polar route serves as the
    deterministic cross-check.  Returned with the bound 2*pi*L*w.
    """
    _require_member(ann, A, "A")
    if L <= 0.0:
        raise ValueError("radius L must be positive")
    d = math.hypot(A[0] - ann.center[0], A[1] - ann.center[1])
    if method == "exact":
        area = disk_overlap_area(ann.r, L, d) - disk_overlap_area(ann.inner, L, d)
    elif method == "polar":
        area = _adaptive_angle_integral(
            lambda th: ray_mass(ann, np.asarray(A, dtype=float), th, l_max=L),
            0.0, 2.0 * np.pi, tol)
    else:
        raise ValueError(f"unknown method {method!r}")
    return BallIntersection(area=float(area), bound=2.0 * np.pi * L * ann.w)


def _adaptive_angle_integral(fun, lo, hi, rel_tol):
    """Adaptive composite Simpson integration of a vectorized integrand."""
    n = 64
    prev = None
    for _ in range(14):
        theta = np.linspace(lo, hi, 2 * n + 1)
        vals = fun(theta)
        h = (hi - lo) / (2 * n)
        total = (h / 3.0) * (vals[0] + vals[-1]
                             + 4.0 * vals[1:-1:2].sum() + 2.0 * vals[2:-1:2].sum())
        if prev is not None and abs(total - prev) <= rel_tol * max(abs(total), 1e-300):
            return total
        prev = total
        n *= 2
    return prev


def cone_intersection_area(ann: Annulus, A, K: AngleSet, n_theta: int = 4096) -> ConeIntersection:
    """Area of the annulus cut by the cone of directions K based at A.

    Per direction the radial integration is exact (``ray_mass``); the
    angular integral over K uses a composite midpoint rule with about
    ``n_theta`` nodes distributed over the intervals of K.  Since the
    radial mass never exceeds 4*w*r for any single direction, the
    discretized area also respects the bound 4*w*r*|K| it is paired with.
    """
    _require_member(ann, A, "A")
    A = np.asarray(A, dtype=float)
    total_measure = K.measure
    if total_measure == 0.0:
        return ConeIntersection(area=0.0, bound=0.0)
    area = 0.0
    for lo, hi in K.intervals:
        if hi <= lo:
            continue
        n = max(16, int(round(n_theta * (hi - lo) / total_measure)))
        theta = lo + (np.arange(n) + 0.5) * (hi - lo) / n
        area += float(ray_mass(ann, A, theta).sum()) * (hi - lo) / n
    return ConeIntersection(area=area, bound=4.0 * ann.w * ann.r * total_measure)


def sine_sector_area(ann: Annulus, A, B, z: float, n_theta: int = 4096) -> SineSector:
    """Area of {C in annulus : sin(angle BAC) <= z}, with the bound 8*pi*z*w*r.

    The sine condition carves two symmetric direction intervals around
    the line AB; the area is delegated to ``cone_intersection_area``.
    """
    _require_member(ann, A, "A")
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if np.allclose(A, B):
        raise ValueError("B must differ from A")
    if z < 0.0:
        raise ValueError("z must be nonnegative")
    bound = 8.0 * np.pi * z * ann.w * ann.r
    if z == 0.0:
        return SineSector(area=0.0, bound=bound)  # two rays carry no area
    if z >= 1.0:
        K = AngleSet.full_circle()
    else:
        phi = math.atan2(B[1] - A[1], B[0] - A[0])
        half = math.asin(z)
        K = AngleSet(intervals=((phi - half, phi + half),
                                (phi + np.pi - half, phi + np.pi + half)))
    cone = cone_intersection_area(ann, A, K, n_theta=n_theta)
    return SineSector(area=cone.area, bound=bound)


def tangent_angle_sine(ann: Annulus, A, B) -> TangentAngle:
    """Sine of the angle at A between AB and the tangent direction at A.

    The tangent line at A is perpendicular to the ray from the annulus
    center through A; the sine of the angle it makes with AB equals the
    magnitude of the radial component of the unit chord direction.
    Paired with the bound max(2w/|AB|, 2|AB|/r).
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    _require_member(ann, A, "A")
    _require_member(ann, B, "B")
    chord = B - A
    ab = math.hypot(chord[0], chord[1])
    if ab == 0.0:
        raise ValueError("A and B must be distinct")
    radial = A - np.asarray(ann.center)
    dr = math.hypot(radial[0], radial[1])
    if dr == 0.0:
        raise ValueError("A coincides with the annulus center; tangent undefined")
    sine = abs(chord[0] * radial[0] + chord[1] * radial[1]) / (ab * dr)
    bound = max(2.0 * ann.w / ab, 2.0 * ab / ann.r)
    return TangentAngle(sine=float(sine), bound=float(bound))


def tangent_angle_sine_many(ann: Annulus, A, B):
    """Vectorized (sine, bound) arrays for batches of chord endpoints."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    chord = B - A
    ab = np.hypot(chord[..., 0], chord[..., 1])
    radial = A - np.asarray(ann.center)
    dr = np.hypot(radial[..., 0], radial[..., 1])
    sine = np.abs(chord[..., 0] * radial[..., 0] + chord[..., 1] * radial[..., 1]) / (ab * dr)
    bound = np.maximum(2.0 * ann.w / ab, 2.0 * ab / ann.r)
    return sine, bound


def _angle_sine_at(A, B, C):
    """sin of the angle at vertex A of triangle ABC (arrays broadcast)."""
    u = B - A
    v = C - A
    cross = u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]
    nu = np.hypot(u[..., 0], u[..., 1])
    nv = np.hypot(v[..., 0], v[..., 1])
    return np.abs(cross) / (nu * nv)


def chord_bounds(ann: Annulus, A, B, C) -> ChordBounds:
    """Two-sided estimate of |BC| from the angle at A.

    Requires A, B, C in the annulus with |AB|, |AC| >= 3*sqrt(w*r); under
    that premise 2r*sin(angle BAC) - 2*sqrt(wr) - 2w < |BC| <
    2r*sin(angle BAC) + 2*sqrt(wr).  The caller asserts the ordering.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    C = np.asarray(C, dtype=float)
    for p, name in ((A, "A"), (B, "B"), (C, "C")):
        _require_member(ann, p, name)
    swr = math.sqrt(ann.w * ann.r)
    ab = math.hypot(*(B - A))
    ac = math.hypot(*(C - A))
    if ab < 3.0 * swr or ac < 3.0 * swr:
        raise ValueError("chord bounds require |AB|, |AC| >= 3*sqrt(w*r)")
    sine = _angle_sine_at(A, B, C)
    return ChordBounds(
        lower=float(2.0 * ann.r * sine - 2.0 * swr - 2.0 * ann.w),
        upper=float(2.0 * ann.r * sine + 2.0 * swr),
        actual=float(math.hypot(*(C - B))),
    )


def chord_bounds_many(ann: Annulus, A, B, C):
    """Vectorized (lower, upper, actual) for admissible sampled triples."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    C = np.asarray(C, dtype=float)
    swr = math.sqrt(ann.w * ann.r)
    sine = _angle_sine_at(A, B, C)
    lower = 2.0 * ann.r * sine - 2.0 * swr - 2.0 * ann.w
    upper = 2.0 * ann.r * sine + 2.0 * swr
    actual = np.hypot(C[..., 0] - B[..., 0], C[..., 1] - B[..., 1])
    return lower, upper, actual


def direction_measure_scan(ann: Annulus, A, L, n_scan: int = 4096):
    """Scanned measure of directions reaching the annulus at range [L/2, 2L].

    Estimates |{Theta : A + l*Theta in annulus for some l in [L/2, 2L]}|
    by testing ``n_scan`` equispaced directions; the result overestimates
    the true measure by at most one scan step per boundary arc.  Accepts
    a single point A with scalar L or batches A (m, 2), L (m,).
    """
    A = np.asarray(A, dtype=float)
    L = np.asarray(L, dtype=float)
    theta = 2.0 * np.pi * (np.arange(n_scan) + 0.5) / n_scan
    if A.ndim == 1:
        t1o, t2o, t1i, t2i = _ray_intervals(ann, A, theta)
        lmin, lmax = 0.5 * float(L), 2.0 * float(L)
    else:
        t1o, t2o, t1i, t2i = _ray_intervals(ann, A[:, None, :], theta[None, :])
        lmin = (0.5 * L)[:, None]
        lmax = (2.0 * L)[:, None]
    lo = np.maximum(t1o, lmin)
    hi = np.minimum(t2o, lmax)
    outer_hit = lo < hi
    # the window survives unless the inner-disk interval swallows it whole
    covered = (t2i > t1i) & (t1i <= lo) & (hi <= t2i)
    hit = outer_hit & ~covered
    step = 2.0 * np.pi / n_scan
    return hit.sum(axis=-1) * step
