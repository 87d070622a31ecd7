"""Vector and triangle primitives on the unit sphere and the plane.

Scalar triple products, planar triangle areas, the central projection of the
upper hemisphere onto the tangent plane, the reciprocal-triple test over all
ten partitions of six points, dyadic size/angle classification of triangles,
and quadrature rules on the sphere and the circle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ReciprocalSlack",
    "ReciprocalResult",
    "STRICT_SPHERE",
    "WEAK_PLANAR",
    "PAIR_1D",
    "SizeAngleClass",
    "SphereQuadrature",
    "TRIPLE_PARTITIONS",
    "scalar_triple",
    "triangle_area",
    "central_project",
    "partition_products",
    "reciprocal_check",
    "dyadic_size",
    "angle_bin",
    "classify_size_angle",
    "build_sphere_quadrature",
    "build_circle_quadrature",
]

UNIT_TOL = 1e-12

# All unordered partitions of indices {0..5} into two triples.  The first
# entry is the "as given" grouping ({0,1,2} vs {3,4,5}); the other nine are
# enumerated as the triples containing index 0, in lexicographic order.
TRIPLE_PARTITIONS: tuple[tuple[tuple[int, int, int], tuple[int, int, int]], ...] = (
    ((0, 1, 2), (3, 4, 5)),
    ((0, 1, 3), (2, 4, 5)),
    ((0, 1, 4), (2, 3, 5)),
    ((0, 1, 5), (2, 3, 4)),
    ((0, 2, 3), (1, 4, 5)),
    ((0, 2, 4), (1, 3, 5)),
    ((0, 2, 5), (1, 3, 4)),
    ((0, 3, 4), (1, 2, 5)),
    ((0, 3, 5), (1, 2, 4)),
    ((0, 4, 5), (1, 2, 3)),
)


@dataclass(frozen=True)
class ReciprocalSlack:
    """Multiplicative slack constant in the reciprocity test.

    ``c = 1`` demands the given grouping attain the exact maximum (strict
    triples on the sphere), ``c = 1/65`` is the weak planar value that
    absorbs the distortion of the central projection, and ``c = 1/17`` is
    the one-dimensional pair value.
    """

    c: float

    def __post_init__(self):
        if not 0.0 < self.c <= 1.0:
            raise ValueError(f"slack must lie in (0, 1], got {self.c}")


STRICT_SPHERE = ReciprocalSlack(1.0)
WEAK_PLANAR = ReciprocalSlack(1.0 / 65.0)
PAIR_1D = ReciprocalSlack(1.0 / 17.0)


@dataclass(frozen=True)
class ReciprocalResult:
    is_reciprocal_as_given: bool
    best_partition: tuple[tuple[int, int, int], tuple[int, int, int]]
    max_product: float
    given_product: float


@dataclass(frozen=True)
class SizeAngleClass:
    """Dyadic triangle class: largest-edge scale L and angle bin n."""

    L: float
    n: int


def scalar_triple(w1, w2, w3) -> float:
    """|(w1 x w2) . w3| for three vectors in R^3.

    Permutation invariant; degenerate (coplanar) inputs give 0.
    """
    m = np.array([w1, w2, w3], dtype=float)
    return abs(float(np.linalg.det(m)))


def triangle_area(p1, p2, p3) -> float:
    """Area of the planar triangle p1 p2 p3 (half the cross product)."""
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    p3 = np.asarray(p3, dtype=float)
    u = p2 - p1
    v = p3 - p1
    return 0.5 * abs(u[0] * v[1] - u[1] * v[0])


def central_project(w) -> np.ndarray:
    """Project a direction in the open upper hemisphere to the plane z=1.

    (x, y, z) with z > 0 maps to (x/z, y/z).  Directions with z <= 0 are
    outside the domain of the projection and raise ``ValueError``.
    """
    w = np.asarray(w, dtype=float)
    if w[2] <= 0.0:
        raise ValueError("central projection requires a direction with positive third component")
    return np.array([w[0] / w[2], w[1] / w[2]])


def _triple_measure(points: np.ndarray, idx: tuple[int, int, int]) -> float:
    i, j, k = idx
    if points.shape[1] == 2:
        return triangle_area(points[i], points[j], points[k])
    return scalar_triple(points[i], points[j], points[k])


def partition_products(points) -> np.ndarray:
    """Products of the two group measures for all ten triple partitions.

    ``points`` is a (6, 2) array of plane points (triangle areas) or a
    (6, 3) array of sphere directions (scalar triple products).  The entry
    order matches ``TRIPLE_PARTITIONS``.
    """
    points = np.asarray(points, dtype=float)
    if points.shape != (6, 2) and points.shape != (6, 3):
        raise ValueError(f"expected six points in R^2 or R^3, got shape {points.shape}")
    out = np.empty(len(TRIPLE_PARTITIONS))
    for p, (t1, t2) in enumerate(TRIPLE_PARTITIONS):
        out[p] = _triple_measure(points, t1) * _triple_measure(points, t2)
    return out


def reciprocal_check(points, slack: ReciprocalSlack) -> ReciprocalResult:
    """Test whether the given grouping of six points is reciprocal.

    The grouping ({points[0..2]}, {points[3..5]}) is reciprocal when the
    product of its two group measures attains at least ``slack.c`` times
    the maximum product over all ten unordered partitions into triples.
    Fully degenerate configurations (maximum product 0) count as
    reciprocal, since 0 >= c*0.

    Returns the verdict together with the argmax partition and the
    maximum product.
    """
    products = partition_products(points)
    best = int(np.argmax(products))
    max_product = float(products[best])
    given = float(products[0])
    return ReciprocalResult(
        is_reciprocal_as_given=given >= slack.c * max_product,
        best_partition=TRIPLE_PARTITIONS[best],
        max_product=max_product,
        given_product=given,
    )


def dyadic_size(longest, r):
    """Largest L in {r, r/2, r/4, ...} with L <= longest edge.

    Works elementwise on arrays.  The bracketing L <= longest < 2L is
    repaired against floating-point rounding of the quotient; edges of at
    least 2r (only the diametral limit) clamp to L = r.
    """
    longest = np.asarray(longest, dtype=float)
    if np.any(longest <= 0.0):
        raise ValueError("degenerate triangle: nonpositive edge length")
    _, e = np.frexp(longest / r)
    L = np.ldexp(np.full_like(longest, r), e - 1)
    L = np.where(L > longest, 0.5 * L, L)
    L = np.where(2.0 * L <= longest, 2.0 * L, L)
    L = np.minimum(L, r)
    if L.ndim == 0:
        return float(L)
    return L


def angle_bin(sin_min, phi_hat):
    """Dyadic bin n >= 0 with 2^(-n-1)*phi_hat < sin_min <= 2^(-n)*phi_hat.

    Sines exceeding ``phi_hat`` clamp to n = 0.  Elementwise on arrays.
    """
    sin_min = np.asarray(sin_min, dtype=float)
    phi_hat = np.asarray(phi_hat, dtype=float)
    if np.any(sin_min <= 0.0):
        raise ValueError("degenerate triangle: vanishing smallest angle")
    q = sin_min / phi_hat
    n = np.floor(-np.log2(q, out=np.zeros_like(q), where=q > 0)).astype(np.int64)
    n = np.where(q > np.ldexp(1.0, -n), n - 1, n)
    n = np.where(q <= np.ldexp(1.0, -n - 1), n + 1, n)
    n = np.maximum(n, 0)
    if n.ndim == 0:
        return int(n)
    return n


def _edge_lengths(X, Y, Z):
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    Z = np.asarray(Z, dtype=float)
    return (
        float(np.hypot(*(Y - X))),
        float(np.hypot(*(Z - X))),
        float(np.hypot(*(Z - Y))),
    )


def phi_cap(L, annulus_r, annulus_w):
    """Upper bound for the sine of the smallest angle at size L.

    min(1, 8*max(w/L, L/r)): the provable cap on sin of the angle between
    two chords of comparable length L drawn inside an annulus of outer
    radius r and width w.
    """
    return np.minimum(1.0, 8.0 * np.maximum(annulus_w / L, L / annulus_r))


def classify_size_angle(X, Y, Z, annulus_r: float, annulus_w: float) -> SizeAngleClass:
    """Classify a plane triangle by dyadic size and angle bin.

    L is the largest dyadic fraction of ``annulus_r`` not exceeding the
    longest edge; n is the dyadic bin of sin(smallest angle) below the cap
    ``phi_cap(L)``, clamped to 0 when the sine exceeds the cap.

    Raises ``ValueError`` for degenerate (collinear or repeated-vertex)
    triangles.
    """
    d12, d13, d23 = _edge_lengths(X, Y, Z)
    longest = max(d12, d13, d23)
    if longest <= 0.0:
        raise ValueError("degenerate triangle: coincident vertices")
    area = triangle_area(X, Y, Z)
    if area <= 0.0:
        raise ValueError("degenerate triangle: collinear vertices")
    L = dyadic_size(longest, annulus_r)
    # smallest angle is opposite the shortest edge; its sine follows from
    # the area formula with the two longer edges
    edges = sorted((d12, d13, d23))
    sin_min = 2.0 * area / (edges[1] * edges[2])
    n = angle_bin(min(sin_min, 1.0), phi_cap(L, annulus_r, annulus_w))
    return SizeAngleClass(L=L, n=n)


@dataclass(frozen=True)
class SphereQuadrature:
    """Quadrature nodes and weights on the unit sphere or circle.

    ``nodes`` has shape (M, 3) for the sphere S^2 or (M, 2) for the circle
    S^1; weights are positive and sum to the full surface measure (4*pi
    resp. 2*pi).
    """

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        if nodes.ndim != 2 or nodes.shape[1] not in (2, 3):
            raise ValueError("nodes must be (M, 2) or (M, 3)")
        if weights.shape != (nodes.shape[0],):
            raise ValueError("weights must match the node count")
        if np.any(weights <= 0.0):
            raise ValueError("weights must be positive")
        full = 4.0 * np.pi if nodes.shape[1] == 3 else 2.0 * np.pi
        if abs(weights.sum() - full) > 1e-10:
            raise ValueError(f"weights sum to {weights.sum():.12g}, expected {full:.12g}")

    @property
    def dim(self) -> int:
        return self.nodes.shape[1]

    def __len__(self) -> int:
        return self.nodes.shape[0]

    def integrate(self, values) -> float:
        return float(np.asarray(values, dtype=float) @ self.weights)


def _gauss_segments(breaks, n_per_segment):
    """Gauss-Legendre nodes/weights on consecutive segments of ``breaks``."""
    xs = []
    ws = []
    for lo, hi, n in zip(breaks[:-1], breaks[1:], n_per_segment):
        if hi <= lo:
            continue
        x, w = np.polynomial.legendre.leggauss(n)
        xs.append(0.5 * (hi - lo) * x + 0.5 * (hi + lo))
        ws.append(0.5 * (hi - lo) * w)
    return np.concatenate(xs), np.concatenate(ws)


def build_sphere_quadrature(resolution: int, kind: str = "product-grid",
                            z_breaks=(), segments: int = 1,
                            n_azimuth: int | None = None) -> SphereQuadrature:
    """Quadrature rule on S^2 with total weight 4*pi.

    Parameters
    ----------
    resolution : int
        Polar node count per z-segment (product grid), or the total node
        count for the near-uniform rule.  Must be >= 2.
    kind : str
        "product-grid": Gauss-Legendre in z = cos(theta) times a uniform
        (trapezoidal, hence trigonometrically exact) azimuthal grid.
        With one segment it integrates polynomials up to degree
        2*resolution - 1 exactly.
        "near-uniform": Fibonacci lattice with equal weights 4*pi/N;
        exact only for constants, quasi-uniform coverage.
    z_breaks : sequence of float, optional
        Interior break points in (-1, 1); the polar rule is applied per
        interval, so integrands with latitudinal kinks at the breaks keep
        full accuracy (zonal band profiles).
    segments : int, optional
        Uniform subdivision count of every break interval.  Composite
        panels resolve integrands concentrated on thin latitude bands
        whose location is not known in advance (compactly supported
        profiles evaluated off-axis).
    n_azimuth : int, optional
        Azimuthal node count; defaults to 2*resolution*segments.
    """
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    if kind == "product-grid":
        if segments < 1:
            raise ValueError("segments must be >= 1")
        coarse = np.concatenate([[-1.0], np.sort(np.asarray(z_breaks, dtype=float)), [1.0]])
        if np.any(coarse[1:-1] <= -1.0) or np.any(coarse[1:-1] >= 1.0):
            raise ValueError("z_breaks must lie strictly inside (-1, 1)")
        breaks = np.unique(np.concatenate(
            [np.linspace(lo, hi, segments + 1) for lo, hi in zip(coarse[:-1], coarse[1:])]))
        z, wz = _gauss_segments(breaks, [resolution] * (len(breaks) - 1))
        n_az = n_azimuth if n_azimuth is not None else 2 * resolution * segments
        phi = 2.0 * np.pi * np.arange(n_az) / n_az
        rho = np.sqrt(1.0 - z**2)
        nodes = np.empty((z.size * n_az, 3))
        nodes[:, 0] = np.outer(rho, np.cos(phi)).ravel()
        nodes[:, 1] = np.outer(rho, np.sin(phi)).ravel()
        nodes[:, 2] = np.repeat(z, n_az)
        weights = np.repeat(wz * (2.0 * np.pi / n_az), n_az)
        return SphereQuadrature(nodes=nodes, weights=weights)
    if kind == "near-uniform":
        n = resolution
        idx = np.arange(n) + 0.5
        z = 1.0 - 2.0 * idx / n
        phi = 2.0 * np.pi * idx / ((1.0 + math.sqrt(5.0)) / 2.0)
        rho = np.sqrt(1.0 - z**2)
        nodes = np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])
        weights = np.full(n, 4.0 * np.pi / n)
        return SphereQuadrature(nodes=nodes, weights=weights)
    raise ValueError(f"unsupported quadrature kind: {kind!r}")


def build_circle_quadrature(resolution: int) -> SphereQuadrature:
    """Uniform-angle rule on S^1: exact for trig polynomials of degree < resolution."""
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    theta = 2.0 * np.pi * np.arange(resolution) / resolution
    nodes = np.column_stack([np.cos(theta), np.sin(theta)])
    weights = np.full(resolution, 2.0 * np.pi / resolution)
    return SphereQuadrature(nodes=nodes, weights=weights)
