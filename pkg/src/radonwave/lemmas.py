"""Seeded bulk verification of the annulus lemmas.

Each check draws admissible configurations by rejection from the uniform
annulus measure (counter-based streams, so every run is reproducible) and
evaluates its inequality in vectorized batches.  Strict inequalities get
an absolute slack of 1e-9 against floating-point ties at the lemma
boundaries.  The suite returns one row per check: sample count,
violations (expected zero), and the worst margin seen.
"""

from __future__ import annotations

import math

import numpy as np

from .annulus import (
    Annulus,
    annulus_area,
    disk_overlap_area,
    direction_measure_scan,
    ray_mass,
    uniform_points,
)
from .report import ExperimentReport
from .rng import stream

__all__ = ["run_lemma_suite", "DEFAULT_GEOMETRIES", "SLACK_ABS"]

SLACK_ABS = 1e-9

DEFAULT_GEOMETRIES = (
    Annulus(r=1.0, w=1.0 / 64.0),
    Annulus(r=1.0, w=1.0 / 16.0),
    Annulus(r=1.0, w=0.25),
    Annulus(r=2.0, w=0.3),
    Annulus(r=1.0, w=1.0),
)


def _angle_sine(A, B, C):
    u = B - A
    v = C - A
    cross = np.abs(u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0])
    return cross / (np.hypot(u[:, 0], u[:, 1]) * np.hypot(v[:, 0], v[:, 1]))


def _sample_k_points(ann, n, k, rng):
    pts = uniform_points(ann, n * k, rng)
    return pts.reshape(k, n, 2)


def _rejection(ann, n, k, predicate, seed, max_rounds=400):
    """n admissible k-tuples of annulus points, rejecting on ``predicate``."""
    out = np.empty((k, n, 2))
    have = 0
    for round_idx in range(max_rounds):
        rng = stream(seed, round_idx)
        cand = _sample_k_points(ann, max(n, 4096), k, rng)
        keep = predicate(*cand)
        m = int(keep.sum())
        if m == 0:
            continue
        take = min(m, n - have)
        sel = np.nonzero(keep)[0][:take]
        out[:, have:have + take] = cand[:, sel]
        have += take
        if have == n:
            return out
    return out[:, :have]


def _check_tangent_chord(ann, n, seed):
    """sin of the tangent-chord angle at A against max(2w/|AB|, 2|AB|/r)."""
    A, B = _rejection(ann, n, 2, lambda a, b: np.hypot(*(b - a).T) > 0, seed)
    chord = B - A
    ab = np.hypot(chord[:, 0], chord[:, 1])
    radial = A - np.asarray(ann.center)
    dr = np.hypot(radial[:, 0], radial[:, 1])
    ok = dr > 0
    sine = np.abs((chord * radial).sum(axis=1))[ok] / (ab * dr)[ok]
    bound = np.maximum(2.0 * ann.w / ab, 2.0 * ab / ann.r)[ok]
    return sine, bound


def _check_chord_bounds(ann, n, seed):
    swr = 3.0 * math.sqrt(ann.w * ann.r)
    if swr >= 1.99 * ann.r:
        return None  # no admissible chords in (near-)disk geometry

    def admissible(a, b, c):
        return (np.hypot(*(b - a).T) >= swr) & (np.hypot(*(c - a).T) >= swr)

    A, B, C = _rejection(ann, n, 3, admissible, seed)
    if A.shape[0] == 0:
        return None
    sine = _angle_sine(A, B, C)
    s = math.sqrt(ann.w * ann.r)
    lower = 2.0 * ann.r * sine - 2.0 * s - 2.0 * ann.w
    upper = 2.0 * ann.r * sine + 2.0 * s
    actual = np.hypot(*(C - B).T)
    # violations when the actual chord escapes (lower, upper)
    margin = np.minimum(actual - lower, upper - actual)
    return -margin, np.zeros_like(margin)  # pass iff -margin <= 0 + slack


def _check_ray_mass(ann, n, seed):
    """Per-direction radial mass against 4*w*r (pointwise core of the cone lemma)."""
    rng = stream(seed, 0)
    A = uniform_points(ann, n, rng)
    theta = rng.random(n) * 2.0 * np.pi
    mass = ray_mass(ann, A, theta)
    return mass, np.full(n, 4.0 * ann.w * ann.r)


def _check_cone_area(ann, n, seed, n_theta=256, chunk=4096):
    """Cone intersection area against 4*w*r*|K| for random anchor and interval."""
    rng = stream(seed, 1)
    A = uniform_points(ann, n, rng)
    theta0 = rng.random(n) * 2.0 * np.pi
    length = rng.random(n) * 2.0 * np.pi
    areas = np.empty(n)
    offsets = (np.arange(n_theta) + 0.5) / n_theta
    for start in range(0, n, chunk):
        sl = slice(start, min(start + chunk, n))
        th = theta0[sl, None] + length[sl, None] * offsets[None, :]
        mass = ray_mass(ann, A[sl][:, None, :], th)
        areas[sl] = mass.mean(axis=1) * length[sl]
    return areas, 4.0 * ann.w * ann.r * length


def _check_sine_sector(ann, n, seed, n_theta=256, chunk=4096):
    """Area of {C: sin(angle BAC) <= z} against 8*pi*z*w*r."""
    rng = stream(seed, 2)
    A = uniform_points(ann, n, rng)
    B = uniform_points(ann, n, rng)
    sep = np.hypot(*(B - A).T) > 0
    A, B = A[sep], B[sep]
    z = 10.0 ** (rng.random(A.shape[0]) * 3.0 - 3.0)  # log-uniform in [1e-3, 1]
    phi = np.arctan2(B[:, 1] - A[:, 1], B[:, 0] - A[:, 0])
    half = np.arcsin(np.minimum(z, 1.0))
    areas = np.empty(A.shape[0])
    offsets = (np.arange(n_theta) + 0.5) / n_theta * 2.0 - 1.0
    for start in range(0, A.shape[0], chunk):
        sl = slice(start, min(start + chunk, A.shape[0]))
        acc = np.zeros(sl.stop - sl.start)
        for base in (phi[sl], phi[sl] + np.pi):
            th = base[:, None] + half[sl, None] * offsets[None, :]
            mass = ray_mass(ann, A[sl][:, None, :], th)
            acc += mass.mean(axis=1) * 2.0 * half[sl]
        areas[sl] = acc
    return areas, 8.0 * np.pi * z * ann.w * ann.r


def _check_ball_area(ann, n, seed):
    rng = stream(seed, 3)
    A = uniform_points(ann, n, rng)
    L = 10.0 ** (rng.random(n) * 2.5 - 2.0) * math.sqrt(ann.w * ann.r)
    d = np.hypot(A[:, 0] - ann.center[0], A[:, 1] - ann.center[1])
    areas = disk_overlap_area(ann.r, L, d) - disk_overlap_area(ann.inner, L, d)
    return areas, 2.0 * np.pi * L * ann.w


def _check_direction_measure(ann, n, seed, n_scan=2048, chunk=2048):
    """Reachable-direction measure at range [L/2, 2L] against 8*pi*max(w/L, L/r).

    The scan overestimates by at most one step per boundary arc (at most
    four arcs), so that many steps of tolerance are added to the bound.
    """
    rng = stream(seed, 4)
    A = uniform_points(ann, n, rng)
    j = rng.integers(0, 8, size=n)
    L = ann.r * 2.0 ** (-j.astype(float))
    measures = np.empty(n)
    for start in range(0, n, chunk):
        sl = slice(start, min(start + chunk, n))
        measures[sl] = direction_measure_scan(ann, A[sl], L[sl], n_scan=n_scan)
    bound = 8.0 * np.pi * np.maximum(ann.w / L, L / ann.r)
    return measures - 4.0 * (2.0 * np.pi / n_scan), bound


def _scale_for_pair(ann, a, b, c):
    """Comparable-length scale L = min(max(|AB|, |AC|), r) for a sampled triple."""
    ab = np.hypot(*(b - a).T)
    ac = np.hypot(*(c - a).T)
    return ab, ac, np.minimum(np.maximum(ab, ac), ann.r)


def _check_angle_range_pair(ann, n, seed):
    """sin(angle BAC) for L/2 <= |AB|, |AC| <= 2L against 8*max(w/L, L/r)."""

    def admissible(a, b, c):
        ab, ac, L = _scale_for_pair(ann, a, b, c)
        return ((ab > 0) & (ac > 0)
                & (ab >= L / 2) & (ab <= 2 * L)
                & (ac >= L / 2) & (ac <= 2 * L))

    A, B, C = _rejection(ann, n, 3, admissible, seed)
    if A.shape[0] == 0:
        return None
    ab, ac, L = _scale_for_pair(ann, A, B, C)
    sine = _angle_sine(A, B, C)
    bound = 8.0 * np.maximum(ann.w / L, L / ann.r)
    return sine, bound


def _check_big_triangle(ann, n, seed):
    """r*sin(angle BAC) < |BC| < 4*r*sin(angle BAC) at pairwise >= 4*sqrt(wr)."""
    gate = 4.0 * math.sqrt(ann.w * ann.r)
    if gate >= 1.99 * ann.r:
        return None

    def admissible(a, b, c):
        return ((np.hypot(*(b - a).T) >= gate)
                & (np.hypot(*(c - a).T) >= gate)
                & (np.hypot(*(c - b).T) >= gate))

    A, B, C = _rejection(ann, n, 3, admissible, seed)
    if A.shape[0] == 0:
        return None
    sine = _angle_sine(A, B, C)
    bc = np.hypot(*(C - B).T)
    margin = np.minimum(bc - ann.r * sine, 4.0 * ann.r * sine - bc)
    return -margin, np.zeros_like(margin)


def _check_semi_big_hard(ann, n, seed):
    """Area <= 2 |AB||AC| sqrt(wr)/r on the short-third-edge branch."""
    gate = 4.0 * math.sqrt(ann.w * ann.r)
    if gate >= 1.99 * ann.r:
        return None

    def admissible(a, b, c):
        return ((np.hypot(*(b - a).T) >= gate)
                & (np.hypot(*(c - a).T) >= gate)
                & (np.hypot(*(c - b).T) < gate))

    A, B, C = _rejection(ann, n, 3, admissible, seed)
    if A.shape[0] == 0:
        return None
    ab = np.hypot(*(B - A).T)
    ac = np.hypot(*(C - A).T)
    area = 0.5 * ab * ac * _angle_sine(A, B, C)
    bound = 2.0 * ab * ac * math.sqrt(ann.w * ann.r) / ann.r
    return area, bound


def _semi_big_fitted(ann, n, seed):
    """Fitted constant area * r / (|AB||AC||BC|) on the long-third-edge branch."""
    gate = 4.0 * math.sqrt(ann.w * ann.r)
    if gate >= 1.99 * ann.r:
        return None

    def admissible(a, b, c):
        return ((np.hypot(*(b - a).T) >= gate)
                & (np.hypot(*(c - a).T) >= gate)
                & (np.hypot(*(c - b).T) >= gate))

    A, B, C = _rejection(ann, n, 3, admissible, seed)
    if A.shape[0] == 0:
        return None
    ab = np.hypot(*(B - A).T)
    ac = np.hypot(*(C - A).T)
    bc = np.hypot(*(C - B).T)
    area = 0.5 * ab * ac * _angle_sine(A, B, C)
    return area * ann.r / (ab * ac * bc)


def _mix(seed, salt):
    return (seed ^ (0x9E3779B97F4A7C15 * (salt + 1))) & ((1 << 62) - 1)


CHECKS = (
    ("tangent-chord-angle", _check_tangent_chord),
    ("chord-length-bounds", _check_chord_bounds),
    ("per-ray-mass", _check_ray_mass),
    ("area-by-angle", _check_cone_area),
    ("area-by-sine", _check_sine_sector),
    ("area-by-distance", _check_ball_area),
    ("direction-measure", _check_direction_measure),
    ("angle-range-pair", _check_angle_range_pair),
    ("big-triangle-chord", _check_big_triangle),
    ("semi-big-area", _check_semi_big_hard),
)


def run_lemma_suite(n: int = 100_000, seed: int = 20240817,
                    geometries=DEFAULT_GEOMETRIES,
                    slack: float = SLACK_ABS) -> ExperimentReport:
    """Run all annulus-lemma checks over the given geometries.

    ``n`` samples are split evenly across geometries per check.  The
    verdict is "bounded" exactly when no check produced a violation.
    """
    per_geom = max(1, n // len(geometries))
    rows = []
    total_violations = 0
    for name, check in CHECKS:
        samples = 0
        violations = 0
        worst = -math.inf
        for gi, ann in enumerate(geometries):
            got = check(ann, per_geom, _mix(seed, 1000 * gi + hash(name) % 997))
            if got is None:
                continue
            value, bound = got
            samples += value.size
            excess = value - bound
            violations += int((excess > slack).sum())
            if excess.size:
                worst = max(worst, float(excess.max()))
        total_violations += violations
        rows.append({
            "check": name,
            "n_samples": samples,
            "violations": violations,
            "worst_excess": worst if samples else None,
        })
    fitted = []
    for ann in geometries:
        got = _semi_big_fitted(ann, per_geom // 4, _mix(seed, 777))
        if got is not None and got.size:
            fitted.append(float(got.max()))
    return ExperimentReport(
        name="lemma-tests",
        parameters={"n": n, "seed": seed,
                    "geometries": [(a.r, a.w) for a in geometries],
                    "slack": slack},
        rows=rows,
        fitted_exponent=None,
        verdict="bounded" if total_violations == 0 else "violation",
        extra={"semi_big_fitted_constant_max": max(fitted) if fitted else None},
    )
