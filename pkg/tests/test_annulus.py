import math

import numpy as np
import pytest

from radonwave.annulus import (
    AngleSet,
    Annulus,
    annulus_area,
    ball_intersection_area,
    chord_bounds,
    cone_intersection_area,
    direction_measure_scan,
    disk_overlap_area,
    ray_mass,
    sine_sector_area,
    tangent_angle_sine,
    uniform_points,
)
from radonwave.lemmas import DEFAULT_GEOMETRIES, run_lemma_suite
from radonwave.rng import stream


class TestAnnulusType:
    def test_validation(self):
        with pytest.raises(ValueError):
            Annulus(r=1.0, w=1.5)
        with pytest.raises(ValueError):
            Annulus(r=1.0, w=0.0)
        with pytest.raises(ValueError):
            Annulus(r=-1.0, w=0.5)
        assert Annulus(r=1.0, w=1.0).inner == 0.0  # the disk case

    def test_contains(self):
        ann = Annulus(r=1.0, w=0.2)
        assert ann.contains((0.9, 0.0))
        assert ann.contains((1.0, 0.0))  # boundary inclusive
        assert not ann.contains((0.5, 0.0))

    def test_uniform_sampling_is_area_correct(self):
        ann = Annulus(r=1.0, w=0.5)
        pts = uniform_points(ann, 200_000, stream(7, 0))
        assert ann.contains(pts).all()
        # fraction inside |x| < 0.75 matches the area ratio
        d = np.hypot(pts[:, 0], pts[:, 1])
        frac = float((d < 0.75).mean())
        expect = (0.75**2 - 0.5**2) / (1.0 - 0.5**2)
        assert frac == pytest.approx(expect, abs=5e-3)


class TestAnnulusArea:
    def test_disk(self):
        assert annulus_area(Annulus(r=1.0, w=1.0)) == pytest.approx(math.pi, rel=1e-15)

    def test_vanishing_width(self):
        assert annulus_area(Annulus(r=1.0, w=1e-12)) < 1e-11

    def test_closed_form(self):
        assert annulus_area(Annulus(r=2.0, w=0.5)) == pytest.approx(math.pi * 0.5 * 3.5, rel=1e-15)


class TestBallIntersection:
    def test_ball_covers_annulus(self):
        ann = Annulus(r=1.0, w=0.3)
        res = ball_intersection_area(ann, (0.9, 0.0), 2.5)
        assert res.area == pytest.approx(annulus_area(ann), rel=1e-14)

    def test_small_ball_vanishes(self):
        ann = Annulus(r=1.0, w=0.3)
        assert ball_intersection_area(ann, (0.9, 0.0), 1e-8).area < 1e-15

    def test_polar_oracle_value(self):
        # disk of radius 0.1 around the mid-annulus point fits exactly inside
        ann = Annulus(r=1.0, w=0.2)
        res = ball_intersection_area(ann, (0.9, 0.0), 0.1)
        assert res.area == pytest.approx(0.03141592653589794, rel=1e-12)
        assert res.area <= res.bound == pytest.approx(2 * math.pi * 0.1 * 0.2)

    def test_exact_matches_polar(self, rng):
        ann = Annulus(r=1.3, w=0.4)
        for _ in range(25):
            A = uniform_points(ann, 1, stream(int(rng.integers(1 << 30)), 0))[0]
            L = float(10 ** rng.uniform(-1.5, 0.5))
            exact = ball_intersection_area(ann, A, L, method="exact").area
            polar = ball_intersection_area(ann, A, L, method="polar", tol=1e-10).area
            assert exact == pytest.approx(polar, rel=1e-6, abs=1e-12)

    def test_outside_point_rejected(self):
        with pytest.raises(ValueError):
            ball_intersection_area(Annulus(r=1.0, w=0.1), (0.3, 0.0), 0.5)

    def test_lens_formula_cases(self):
        assert disk_overlap_area(1.0, 2.0, 0.5) == pytest.approx(math.pi, rel=1e-14)
        assert disk_overlap_area(1.0, 1.0, 3.0) == 0.0
        # half-overlap symmetry
        a = disk_overlap_area(1.0, 1.0, 1.0)
        assert a == pytest.approx(2 * math.pi / 3 - math.sqrt(3) / 2, rel=1e-12)


class TestConeIntersection:
    def test_full_circle_gives_annulus_area(self):
        ann = Annulus(r=1.0, w=0.1)
        res = cone_intersection_area(ann, (1.0, 0.0), AngleSet.full_circle())
        assert res.area == pytest.approx(annulus_area(ann), rel=1e-4)

    def test_empty_angle_set(self):
        ann = Annulus(r=1.0, w=0.1)
        assert cone_intersection_area(ann, (1.0, 0.0), AngleSet()).area == 0.0

    def test_boundary_point_inward_cone(self):
        # cone of measure 0.2 aiming back through the annulus
        ann = Annulus(r=1.0, w=0.1)
        K = AngleSet(intervals=((2.9414, 3.1414),))
        res = cone_intersection_area(ann, (1.0, 0.0), K, n_theta=8192)
        assert res.area == pytest.approx(0.04003028471651073, rel=1e-6)
        assert res.area <= res.bound + 1e-12
        assert res.bound == pytest.approx(4 * 0.1 * 1.0 * 0.2, rel=1e-12)

    def test_ray_mass_matches_geometry(self):
        # ray through the full annulus from the outer rim: mass = half the
        # square-length difference of the two admissible segments
        ann = Annulus(r=1.0, w=0.25)
        mass = ray_mass(ann, np.array([1.0, 0.0]), np.array(math.pi))
        # chord toward the center: enters annulus [0, 0.25] and [1.75, 2.0]
        expect = 0.5 * (0.25**2 - 0.0) + 0.5 * (2.0**2 - 1.75**2)
        assert mass == pytest.approx(expect, rel=1e-12)


class TestSineSector:
    def test_z_above_one_gives_annulus(self):
        ann = Annulus(r=1.0, w=0.1)
        res = sine_sector_area(ann, (0.95, 0.0), (0.0, 0.0), 2.0)
        assert res.area == pytest.approx(annulus_area(ann), rel=1e-4)
        assert res.area <= res.bound

    def test_z_zero_rays_have_no_area(self):
        ann = Annulus(r=1.0, w=0.1)
        res = sine_sector_area(ann, (0.95, 0.0), (0.0, 0.0), 0.0)
        assert res.area == 0.0

    def test_oracle_value(self):
        ann = Annulus(r=1.0, w=0.1)
        res = sine_sector_area(ann, (0.95, 0.0), (0.0, 0.0), 0.05, n_theta=8192)
        assert res.area == pytest.approx(0.019258250292179976, rel=1e-6)
        assert res.area <= res.bound == pytest.approx(8 * math.pi * 0.05 * 0.1)


class TestTangentAngle:
    def test_inscribed_angle_limit(self):
        # B on the same circle as A, short chord: sine ~ |AB| / (2 |OA|)
        ann = Annulus(r=1.0, w=0.05)
        rho = 0.975
        A = np.array([rho, 0.0])
        B = rho * np.array([math.cos(0.01), math.sin(0.01)])
        res = tangent_angle_sine(ann, A, B)
        ab = np.linalg.norm(B - A)
        assert res.sine == pytest.approx(ab / (2 * rho), rel=1e-3)
        assert res.sine <= res.bound

    def test_radial_chord(self):
        ann = Annulus(r=1.0, w=0.05)
        res = tangent_angle_sine(ann, (0.95, 0.0), (1.0, 0.0))
        assert res.sine == pytest.approx(1.0, rel=1e-12)
        assert res.bound == pytest.approx(max(2 * 0.05 / 0.05, 2 * 0.05 / 1.0))
        assert res.sine <= res.bound

    def test_direct_vector_example(self):
        ann = Annulus(r=1.0, w=0.05)
        A = np.array([1.0, 0.0])
        B = 0.97 * np.array([math.cos(0.5), math.sin(0.5)])
        res = tangent_angle_sine(ann, A, B)
        chord = B - A
        ab = np.linalg.norm(chord)
        assert res.sine == pytest.approx(abs(chord[0]) / ab, rel=1e-12)
        assert res.sine <= max(0.1 / ab, 2 * ab) + 1e-12

    def test_coincident_points_rejected(self):
        with pytest.raises(ValueError):
            tangent_angle_sine(Annulus(r=1.0, w=0.1), (0.95, 0.0), (0.95, 0.0))


class TestChordBounds:
    def test_thin_annulus_circle_chord_law(self):
        # in the w -> 0 limit all points sit on one circle: |BC| = 2 r' sin A
        ann = Annulus(r=1.0, w=1e-6)
        pts = [np.array([math.cos(t), math.sin(t)]) * (1 - 2.5e-7) for t in (0.0, 1.0, -1.2)]
        res = chord_bounds(ann, *pts)
        assert res.lower < res.actual < res.upper
        u, v = pts[1] - pts[0], pts[2] - pts[0]
        sine = abs(u[0] * v[1] - u[1] * v[0]) / (np.linalg.norm(u) * np.linalg.norm(v))
        assert res.actual == pytest.approx(2 * 1.0 * sine, rel=1e-5)

    def test_near_collinear_bound_arithmetic(self):
        # sine <= sqrt(w/r) forces the upper bound below 4 sqrt(wr)
        w, r = 0.01, 1.0
        sine = math.sqrt(w / r)
        upper = 2 * r * sine + 2 * math.sqrt(w * r)
        assert upper <= 4 * math.sqrt(w * r) + 1e-12

    def test_random_admissible_ordering(self):
        ann = Annulus(r=1.0, w=0.01)
        gen = stream(20240817, 5)
        found = 0
        while found < 50:
            pts = uniform_points(ann, 3, gen)
            ab = np.linalg.norm(pts[1] - pts[0])
            ac = np.linalg.norm(pts[2] - pts[0])
            if min(ab, ac) < 3 * math.sqrt(ann.w * ann.r):
                continue
            res = chord_bounds(ann, *pts)
            assert res.lower - 1e-9 < res.actual < res.upper + 1e-9
            found += 1

    def test_precondition_enforced(self):
        ann = Annulus(r=1.0, w=0.01)
        with pytest.raises(ValueError):
            chord_bounds(ann, (1.0, 0.0), (0.995, 0.01), (0.0, 1.0))


class TestDirectionScan:
    def test_measure_bounded_by_full_circle(self):
        ann = Annulus(r=1.0, w=0.25)
        m = direction_measure_scan(ann, np.array([0.9, 0.0]), 0.1)
        assert 0.0 <= m <= 2 * math.pi + 1e-12

    def test_small_range_inside_annulus_sees_everything(self):
        # with L tiny and A mid-annulus every direction reaches the annulus
        ann = Annulus(r=1.0, w=0.5)
        m = direction_measure_scan(ann, np.array([0.75, 0.0]), 0.01)
        assert m == pytest.approx(2 * math.pi, rel=1e-3)


class TestLemmaSuite:
    def test_zero_violations_at_module_scale(self):
        rep = run_lemma_suite(n=5000, seed=11)
        assert rep.verdict == "bounded"
        for row in rep.rows:
            assert row["violations"] == 0

    def test_fitted_semi_big_constant_reported(self):
        rep = run_lemma_suite(n=2000, seed=12)
        fitted = rep.extra["semi_big_fitted_constant_max"]
        assert fitted is not None and 0.0 < fitted <= 0.5 + 1e-9

    def test_geometry_catalog(self):
        assert any(a.w == a.r for a in DEFAULT_GEOMETRIES)  # the disk case is exercised
