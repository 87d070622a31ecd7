import itertools
import math

import numpy as np
import pytest

from radonwave.geometry import (
    PAIR_1D,
    STRICT_SPHERE,
    WEAK_PLANAR,
    ReciprocalSlack,
    SizeAngleClass,
    TRIPLE_PARTITIONS,
    angle_bin,
    build_circle_quadrature,
    build_sphere_quadrature,
    central_project,
    classify_size_angle,
    dyadic_size,
    partition_products,
    reciprocal_check,
    scalar_triple,
    triangle_area,
)

from conftest import random_upper_directions


E1, E2, E3 = np.eye(3)


def brute_force_products(points):
    """Independent enumeration of the ten partitions via itertools."""
    points = np.asarray(points, dtype=float)
    if points.shape[1] == 2:
        def measure(i, j, k):
            return triangle_area(points[i], points[j], points[k])
    else:
        def measure(i, j, k):
            return scalar_triple(points[i], points[j], points[k])

    seen = set()
    out = {}
    for triple in itertools.combinations(range(6), 3):
        other = tuple(sorted(set(range(6)) - set(triple)))
        key = frozenset((triple, other))
        if key in seen:
            continue
        seen.add(key)
        out[(triple, other)] = measure(*triple) * measure(*other)
    return out


class TestScalarTriple:
    def test_orthonormal_frame(self):
        assert scalar_triple(E1, E2, E3) == pytest.approx(1.0, abs=1e-15)

    def test_repeated_vector(self):
        assert scalar_triple(E1, E2, E1) == 0.0

    def test_direct_expansion(self):
        w = np.array([0.0, 1.0, 1.0]) / math.sqrt(2.0)
        assert scalar_triple(E1, E2, w) == pytest.approx(1.0 / math.sqrt(2.0), rel=1e-12)

    def test_permutation_invariance(self, rng):
        w = random_upper_directions(rng, 3)
        vals = {scalar_triple(*w[list(p)]) for p in itertools.permutations(range(3))}
        assert max(vals) - min(vals) < 1e-14


class TestTriangleArea:
    def test_unit_right_triangle(self):
        assert triangle_area([0, 0], [1, 0], [0, 1]) == 0.5

    def test_collinear(self):
        assert triangle_area([0, 0], [1, 1], [2, 2]) == 0.0

    def test_base_height(self):
        assert triangle_area([0, 0], [2, 0], [0, 3]) == 3.0

    def test_rigid_motion_invariance(self, rng):
        pts = rng.normal(size=(3, 2))
        th = 0.7
        rot = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
        moved = pts @ rot.T + np.array([3.0, -1.0])
        assert triangle_area(*moved) == pytest.approx(triangle_area(*pts), rel=1e-12)


class TestCentralProject:
    def test_north_pole(self):
        assert np.allclose(central_project([0, 0, 1]), [0, 0])

    def test_diagonal(self):
        p = central_project([1 / math.sqrt(2), 0, 1 / math.sqrt(2)])
        assert np.allclose(p, [1.0, 0.0])

    def test_generic(self):
        assert np.allclose(central_project([0, 0.6, 0.8]), [0, 0.75])

    def test_rejects_lower_hemisphere(self):
        with pytest.raises(ValueError):
            central_project([0, 0.6, -0.8])
        with pytest.raises(ValueError):
            central_project([1, 0, 0])


class TestReciprocalCheck:
    def hexagon(self):
        ang = np.deg2rad([0, 120, 240, 60, 180, 300])
        return np.column_stack([np.cos(ang), np.sin(ang)])

    def test_symmetric_hexagon(self):
        res = reciprocal_check(self.hexagon(), WEAK_PLANAR)
        assert res.is_reciprocal_as_given
        assert res.given_product == pytest.approx(res.max_product, rel=1e-12)

    def test_collinear_first_triple_rejected(self):
        # first triple collinear, second spanning area; a mixed partition wins
        pts = np.array([[0.0, 0.0], [0.5, 0.0], [1.0, 0.0],
                        [0.0, 1.0], [1.0, 1.2], [-1.0, 0.8]])
        res = reciprocal_check(pts, WEAK_PLANAR)
        oracle = brute_force_products(pts)
        assert res.given_product == 0.0
        assert max(oracle.values()) > 0.0
        assert not res.is_reciprocal_as_given

    def test_matches_brute_force(self, rng):
        for kind in ("plane", "sphere"):
            for _ in range(300):
                if kind == "plane":
                    pts = rng.normal(size=(6, 2))
                else:
                    pts = random_upper_directions(rng, 6)
                res = reciprocal_check(pts, WEAK_PLANAR)
                oracle = brute_force_products(pts)
                assert res.max_product == max(oracle.values())

    def test_relabel_and_swap_invariance(self, rng):
        pts = rng.normal(size=(6, 2))
        base = reciprocal_check(pts, WEAK_PLANAR)
        for p1 in itertools.permutations(range(3)):
            relabeled = pts[list(p1) + [3, 4, 5]]
            res = reciprocal_check(relabeled, WEAK_PLANAR)
            assert res.is_reciprocal_as_given == base.is_reciprocal_as_given
            assert res.max_product == pytest.approx(base.max_product, rel=1e-14)
        swapped = pts[[3, 4, 5, 0, 1, 2]]
        res = reciprocal_check(swapped, WEAK_PLANAR)
        assert res.is_reciprocal_as_given == base.is_reciprocal_as_given

    def test_degenerate_counts_as_reciprocal(self):
        pts = np.zeros((6, 2))
        assert reciprocal_check(pts, STRICT_SPHERE if False else WEAK_PLANAR).is_reciprocal_as_given
        assert reciprocal_check(pts, ReciprocalSlack(1.0)).is_reciprocal_as_given

    def test_partition_table(self):
        # the given grouping leads, all ten partitions distinct
        assert TRIPLE_PARTITIONS[0] == ((0, 1, 2), (3, 4, 5))
        assert len({frozenset((a, b)) for a, b in TRIPLE_PARTITIONS}) == 10

    def test_slack_validation(self):
        with pytest.raises(ValueError):
            ReciprocalSlack(0.0)
        with pytest.raises(ValueError):
            ReciprocalSlack(1.5)
        assert PAIR_1D.c == pytest.approx(1 / 17)


class TestClassifySizeAngle:
    def test_dyadic_bracketing(self):
        X, Y, Z = np.array([[0.0, 0.0], [0.6, 0.0], [0.3, 0.2]])
        cls = classify_size_angle(X, Y, Z, 1.0, 0.1)
        assert cls.L == 0.5

    def test_bin_boundary_equilateral(self):
        # equilateral triangle whose smallest-angle sine reaches the cap -> n = 0
        L = 0.25
        side = L  # longest edge equals L exactly
        X = np.array([0.0, 0.0])
        Y = np.array([side, 0.0])
        Z = np.array([side / 2, side * math.sqrt(3) / 2])
        cls = classify_size_angle(X, Y, Z, 1.0, 0.2)
        assert cls.n == 0

    def test_worked_binning_example(self):
        # edges ~(0.25, 0.25, small), smallest-angle sine 0.01, w = 1/64:
        # cap clamps to 1 and 2^-7 < 0.01 <= 2^-6 puts the triangle in bin 6
        th = math.asin(0.01)
        X = np.array([0.0, 0.0])
        Y = np.array([0.25, 0.0])
        Z = 0.25 * np.array([math.cos(th), math.sin(th)])
        cls = classify_size_angle(X, Y, Z, 1.0, 1.0 / 64.0)
        assert cls == SizeAngleClass(L=0.25, n=6)

    def test_degenerate_rejected(self):
        with pytest.raises(ValueError):
            classify_size_angle([0, 0], [1, 0], [2, 0], 1.0, 0.1)

    def test_reconstructed_bounds(self, rng):
        for _ in range(500):
            pts = rng.normal(size=(3, 2))
            if triangle_area(*pts) < 1e-9:
                continue
            r, w = 2.0, 0.3
            cls = classify_size_angle(*pts, r, w)
            edges = sorted([np.linalg.norm(pts[1] - pts[0]),
                            np.linalg.norm(pts[2] - pts[0]),
                            np.linalg.norm(pts[2] - pts[1])])
            longest = edges[2]
            if longest < 2.0 * r:  # diametral clamp aside, bracketing is exact
                assert cls.L <= longest < 2 * cls.L
            phi = min(1.0, 8.0 * max(w / cls.L, cls.L / r))
            sin_min = 2.0 * triangle_area(*pts) / (edges[1] * edges[2])
            if cls.n >= 1:
                assert 2.0 ** (-cls.n - 1) * phi < sin_min

    def test_dyadic_size_exact_powers(self):
        assert dyadic_size(0.5, 1.0) == 0.5
        assert dyadic_size(1.0, 1.0) == 1.0
        assert dyadic_size(0.49999999, 1.0) == 0.25

    def test_angle_bin_boundaries(self):
        assert angle_bin(1.0, 1.0) == 0
        assert angle_bin(0.5, 1.0) == 1
        assert angle_bin(2.0 ** -6, 1.0) == 6


class TestSphereQuadrature:
    def test_total_measure(self):
        q = build_sphere_quadrature(16)
        assert q.weights.sum() == pytest.approx(4 * np.pi, abs=1e-10)

    def test_odd_moment_vanishes(self):
        q = build_sphere_quadrature(16)
        assert q.integrate(q.nodes[:, 2]) == pytest.approx(0.0, abs=1e-12)

    def test_z_squared_moment(self):
        q = build_sphere_quadrature(16)
        assert q.integrate(q.nodes[:, 2] ** 2) == pytest.approx(4 * np.pi / 3, rel=1e-12)

    def test_polynomial_exactness(self, rng):
        # x^2 y^2 z^2 has known moment 4*pi/105
        q = build_sphere_quadrature(8)
        val = q.integrate(q.nodes[:, 0] ** 2 * q.nodes[:, 1] ** 2 * q.nodes[:, 2] ** 2)
        assert val == pytest.approx(4 * np.pi / 105, rel=1e-12)

    def test_near_uniform(self):
        q = build_sphere_quadrature(500, kind="near-uniform")
        assert q.weights.sum() == pytest.approx(4 * np.pi, abs=1e-10)
        assert abs(q.integrate(q.nodes[:, 2] ** 2) - 4 * np.pi / 3) < 0.05

    def test_unsupported_kind(self):
        with pytest.raises(ValueError):
            build_sphere_quadrature(8, kind="icosahedral")

    def test_circle_rule(self):
        q = build_circle_quadrature(32)
        assert q.weights.sum() == pytest.approx(2 * np.pi, abs=1e-12)
        assert q.integrate(q.nodes[:, 0] ** 2) == pytest.approx(np.pi, rel=1e-12)

    def test_banded_breaks(self):
        q = build_sphere_quadrature(8, z_breaks=(0.0, 0.25))
        # indicator of the zonal band integrates exactly to its measure
        inside = (q.nodes[:, 2] > 0) & (q.nodes[:, 2] < 0.25)
        assert q.integrate(inside.astype(float)) == pytest.approx(2 * np.pi * 0.25, rel=1e-12)


class TestProjectionIdentities:
    def test_area_ratio_identity(self, rng):
        # plane area x 2 z1 z2 z3 = spherical scalar triple, everywhere upstairs
        w = random_upper_directions(rng, 3 * 2000).reshape(2000, 3, 3)
        for tri in w[:200]:
            lhs = triangle_area(*[central_project(v) for v in tri])
            rhs = scalar_triple(*tri)
            assert lhs * 2.0 * tri[0, 2] * tri[1, 2] * tri[2, 2] == pytest.approx(
                rhs, rel=1e-10, abs=1e-14)

    def test_jacobian_cap_identity(self):
        # integral of z^-3 over the cap {z > c} equals the projected disk area
        c = 0.6
        q = build_sphere_quadrature(24, z_breaks=(c,))
        inside = q.nodes[:, 2] > c
        lhs = q.integrate(np.where(inside, q.nodes[:, 2] ** -3.0, 0.0))
        # plane area of the projected cap by 2D polar midpoint integration
        rho_max = math.sqrt(1 - c * c) / c
        n = 4000
        rho = (np.arange(n) + 0.5) * rho_max / n
        disk_area = float((2 * np.pi * rho * (rho_max / n)).sum())
        assert lhs == pytest.approx(disk_area, rel=1e-6)
        assert disk_area == pytest.approx(np.pi * (1 - c * c) / c**2, rel=1e-6)
