"""Estimators for the singular reciprocal-triangle integrals.

The central object is the integral of 1/area(XYZ) over all triples
(X, Y, Z) in an annulus that are reciprocal to a fixed triple (D, E, F),
which scales like w^3*r in the annulus width w and outer radius r.  A
capped Monte Carlo estimator with counter-based streams handles the 3D
(planar-triple) case; the one-dimensional analogue over a pair of
symmetric intervals is a deterministic midpoint-grid double integral that
scales like w.  A structured sup-search over base triples and a scaling
sweep wrap the estimators into experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .annulus import Annulus, annulus_area, uniform_points
from .geometry import (
    ReciprocalSlack,
    SizeAngleClass,
    WEAK_PLANAR,
    PAIR_1D,
    angle_bin,
    dyadic_size,
    phi_cap,
    reciprocal_check,
    triangle_area,
)
from .report import ExperimentReport, fit_loglog
from .rng import batch_sizes, stream

__all__ = [
    "GeomIntegralEstimate",
    "ArcConfig",
    "arc_config_points",
    "default_cap",
    "estimate_reciprocal_integral_3d",
    "sup_search_3d",
    "scaling_sweep",
    "estimate_reciprocal_integral_2d",
    "sup_reciprocal_integral_2d",
    "classification_diagnostic",
]


@dataclass(frozen=True)
class GeomIntegralEstimate:
    """Monte Carlo estimate of a singular geometric integral.

    ``truncation_mass`` is the fraction of the sampled integrand mass
    removed by the cap; estimates are only trusted when it stays below
    one percent.  ``bins`` optionally breaks the value down by dyadic
    (size, angle) classes of the sampled triangles.
    """

    value: float
    stderr: float
    n_samples: int
    seed: int
    truncation_mass: float
    accepted_fraction: float
    bins: tuple | None = None

    def __post_init__(self):
        if self.value < 0 or self.stderr < 0:
            raise ValueError("value and stderr must be nonnegative")
        if not 0.0 <= self.truncation_mass <= 1.0:
            raise ValueError("truncation_mass must lie in [0, 1]")


@dataclass(frozen=True)
class ArcConfig:
    """Three thin arcs at 120-degree spacing along the outer rim.

    Each arc spans angles theta_k +/- eps1 at radii within
    min(w, eps1*r) of the outer boundary.  One point per arc in each
    triple makes the two triples reciprocal once eps1 is small; this is
    validated at construction by checking all corner-point cross triples.
    """

    r: float = 1.0
    w: float = 1.0 / 16.0
    eps1: float = 0.05
    slack: ReciprocalSlack = WEAK_PLANAR

    @property
    def angles(self) -> tuple[float, float, float]:
        return (0.0, 2.0 * np.pi / 3.0, 4.0 * np.pi / 3.0)

    @property
    def depth(self) -> float:
        return min(self.w, self.eps1 * self.r)

    def __post_init__(self):
        if not 0.0 < self.w <= self.r:
            raise ValueError("need 0 < w <= r")
        if not 0.0 < self.eps1 < np.pi / 3.0:
            raise ValueError("eps1 must be a small positive angle")
        corners = []
        for th in self.angles:
            pts = []
            for rho in (self.r - self.depth, self.r):
                for phi in (th - self.eps1, th + self.eps1):
                    pts.append((rho * math.cos(phi), rho * math.sin(phi)))
            corners.append(pts)
        base = arc_config_points(self)
        for p1 in corners[0]:
            for p2 in corners[1]:
                for p3 in corners[2]:
                    six = np.array([*base, p1, p2, p3])
                    if not reciprocal_check(six, self.slack).is_reciprocal_as_given:
                        raise ValueError(
                            "eps1 too large: corner cross-triples fail the reciprocity test")


def arc_config_points(cfg: ArcConfig) -> np.ndarray:
    """Representative triple (one mid-arc point per arc), shape (3, 2)."""
    rho = cfg.r - 0.5 * cfg.depth
    return np.array([[rho * math.cos(th), rho * math.sin(th)] for th in cfg.angles])


def sample_arc_points(cfg: ArcConfig, rng: np.random.Generator, n: int) -> np.ndarray:
    """n triples with one uniform point per arc, shape (n, 3, 2)."""
    rho_in = cfg.r - cfg.depth
    out = np.empty((n, 3, 2))
    for k, th in enumerate(cfg.angles):
        u = rng.random(n)
        rho = np.sqrt(u * (cfg.r**2 - rho_in**2) + rho_in**2)
        phi = th + (rng.random(n) * 2.0 - 1.0) * cfg.eps1
        out[:, k, 0] = rho * np.cos(phi)
        out[:, k, 1] = rho * np.sin(phi)
    return out


def default_cap(w: float, r: float, n: int) -> float:
    """Integrand cap for 1/area sampling: 1e6/(w^3 r) at n = 1e7, growing like sqrt(n).

    The reciprocity restriction makes 1/area integrable but not bounded;
    clipping at a cap that grows with the sample count keeps the variance
    finite while the clipped mass (audited as ``truncation_mass``)
    vanishes in the limit.
    """
    return 1e6 / (w**3 * r) * math.sqrt(n / 1e7)


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


def _partition_stack(D, E, F, Px, Py, Qx, Qy, Rx, Ry):
    """All ten partition products for fixed (D,E,F) against batched (X,Y,Z).

    Returns (products (10, m), area_xyz (m,)).  Partition 0 is the given
    grouping (DEF)(XYZ).
    """
    a_def = triangle_area(D, E, F)

    def fixed_pair(V1, V2, px, py):
        ax, ay = V2[0] - V1[0], V2[1] - V1[1]
        c0 = ax * (-V1[1]) - ay * (-V1[0])
        return 0.5 * np.abs(ax * py - ay * px + c0)

    def fixed_vertex(V, px, py, qx, qy):
        return 0.5 * np.abs(_cross(px - V[0], py - V[1], qx - V[0], qy - V[1]))

    a_xyz = 0.5 * np.abs(_cross(Qx - Px, Qy - Py, Rx - Px, Ry - Py))

    de = {"X": fixed_pair(D, E, Px, Py), "Y": fixed_pair(D, E, Qx, Qy), "Z": fixed_pair(D, E, Rx, Ry)}
    df = {"X": fixed_pair(D, F, Px, Py), "Y": fixed_pair(D, F, Qx, Qy), "Z": fixed_pair(D, F, Rx, Ry)}
    ef = {"X": fixed_pair(E, F, Px, Py), "Y": fixed_pair(E, F, Qx, Qy), "Z": fixed_pair(E, F, Rx, Ry)}
    d_ = {"XY": fixed_vertex(D, Px, Py, Qx, Qy), "XZ": fixed_vertex(D, Px, Py, Rx, Ry), "YZ": fixed_vertex(D, Qx, Qy, Rx, Ry)}
    e_ = {"XY": fixed_vertex(E, Px, Py, Qx, Qy), "XZ": fixed_vertex(E, Px, Py, Rx, Ry), "YZ": fixed_vertex(E, Qx, Qy, Rx, Ry)}
    f_ = {"XY": fixed_vertex(F, Px, Py, Qx, Qy), "XZ": fixed_vertex(F, Px, Py, Rx, Ry), "YZ": fixed_vertex(F, Qx, Qy, Rx, Ry)}

    products = np.empty((10, a_xyz.size))
    products[0] = a_def * a_xyz
    products[1] = de["X"] * f_["YZ"]
    products[2] = de["Y"] * f_["XZ"]
    products[3] = de["Z"] * f_["XY"]
    products[4] = df["X"] * e_["YZ"]
    products[5] = df["Y"] * e_["XZ"]
    products[6] = df["Z"] * e_["XY"]
    products[7] = d_["XY"] * ef["Z"]
    products[8] = d_["XZ"] * ef["Y"]
    products[9] = d_["YZ"] * ef["X"]
    return products, a_xyz


def _triangle_stats(Px, Py, Qx, Qy, Rx, Ry, a_xyz):
    """(longest edge, sin of smallest angle) for batched triangles."""
    d1 = np.hypot(Qx - Px, Qy - Py)
    d2 = np.hypot(Rx - Px, Ry - Py)
    d3 = np.hypot(Rx - Qx, Ry - Qy)
    edges = np.sort(np.stack([d1, d2, d3]), axis=0)
    longest = edges[2]
    sin_min = 2.0 * a_xyz / (edges[1] * edges[2])
    return longest, sin_min


def estimate_reciprocal_integral_3d(ann: Annulus, D, E, F, slack: ReciprocalSlack,
                                    n: int, seed: int, *, bins: bool = False,
                                    integrand: str = "inv_area",
                                    cap: float | None = None) -> GeomIntegralEstimate:
    """Monte Carlo estimate of the reciprocal-triple integral over the annulus.

    Draws n uniform triples (X, Y, Z) from the annulus, keeps those for
    which ((D,E,F), (X,Y,Z)) is reciprocal at the given slack, and
    averages 1/area(XYZ) clipped at ``cap`` (``default_cap`` unless
    given); the mean is scaled by |annulus|^3.  ``integrand="indicator"``
    replaces 1/area by 1, which estimates the plain measure of the
    reciprocal set and is used to audit unbiasedness.

    With ``bins=True`` the estimate is additionally decomposed by the
    dyadic (size, angle) class of the accepted triangles; the bin
    contributions sum to the total by construction.

    Streams are keyed by (seed, batch); the result is a pure function of
    the arguments.
    """
    D = np.asarray(D, dtype=float)
    E = np.asarray(E, dtype=float)
    F = np.asarray(F, dtype=float)
    if triangle_area(D, E, F) <= 0.0:
        raise ValueError("degenerate base triple (D, E, F)")
    if n < 1:
        raise ValueError("need at least one sample")
    if integrand not in ("inv_area", "indicator"):
        raise ValueError(f"unknown integrand {integrand!r}")
    cap_value = default_cap(ann.w, ann.r, n) if cap is None else float(cap)
    volume = annulus_area(ann) ** 3

    sum_g = 0.0
    sum_g2 = 0.0
    sum_raw = 0.0
    sum_clip = 0.0
    n_accept = 0
    bin_sums: dict[tuple[int, int], float] = {}

    for k, m in enumerate(batch_sizes(n)):
        rng = stream(seed, k)
        pts = uniform_points(ann, 3 * m, rng).reshape(3, m, 2)
        Px, Py = pts[0, :, 0], pts[0, :, 1]
        Qx, Qy = pts[1, :, 0], pts[1, :, 1]
        Rx, Ry = pts[2, :, 0], pts[2, :, 1]
        products, a_xyz = _partition_stack(D, E, F, Px, Py, Qx, Qy, Rx, Ry)
        accept = products[0] >= slack.c * products.max(axis=0)
        if integrand == "inv_area":
            with np.errstate(divide="ignore"):
                raw = np.where(accept & (a_xyz > 0.0), 1.0 / a_xyz, 0.0)
        else:
            raw = accept.astype(float)
        g = np.minimum(raw, cap_value)
        sum_g += float(g.sum())
        sum_g2 += float((g * g).sum())
        sum_raw += float(raw.sum())
        sum_clip += float((raw - g).sum())
        n_accept += int(accept.sum())
        if bins and np.any(accept):
            longest, sin_min = _triangle_stats(Px[accept], Py[accept], Qx[accept],
                                               Qy[accept], Rx[accept], Ry[accept],
                                               a_xyz[accept])
            ok = (longest > 0) & (sin_min > 0)
            L = dyadic_size(longest[ok], ann.r)
            nbin = angle_bin(np.minimum(sin_min[ok], 1.0), phi_cap(L, ann.r, ann.w))
            j = np.rint(np.log2(ann.r / L)).astype(np.int64)
            gk = g[accept][ok]
            for key, val in zip(zip(j.tolist(), nbin.tolist()), gk.tolist()):
                bin_sums[key] = bin_sums.get(key, 0.0) + val

    mean = sum_g / n
    var = max(sum_g2 - n * mean * mean, 0.0) / max(n - 1, 1)
    bins_out = None
    if bins:
        bins_out = tuple(
            (SizeAngleClass(L=ann.r * 2.0 ** (-j), n=nb), volume * s / n)
            for (j, nb), s in sorted(bin_sums.items())
        )
    return GeomIntegralEstimate(
        value=volume * mean,
        stderr=volume * math.sqrt(var / n),
        n_samples=n,
        seed=seed,
        truncation_mass=(sum_clip / sum_raw) if sum_raw > 0.0 else 0.0,
        accepted_fraction=n_accept / n,
        bins=bins_out,
    )


def _mix_seed(seed: int, idx: int) -> int:
    return (seed ^ (0x9E3779B97F4A7C15 * (idx + 1))) & ((1 << 63) - 1)


def _stratified_candidates(ann: Annulus, n_configs: int, seed: int) -> list[np.ndarray]:
    """Random base triples stratified by dyadic size class.

    Stratum s draws vertex angles spread about 2pi/(3*2^s), so candidate
    triangles cover sizes from rim-spanning down to small, with radii in
    the outer half of the annulus where the largest products live.
    """
    rng = stream(seed, 0xA5C)
    out = []
    for i in range(n_configs):
        s = i % 5
        spread = (2.0 * np.pi / 3.0) * 2.0 ** (-s)
        th0 = rng.random() * 2.0 * np.pi
        th = th0 + spread * np.array([0.0, 1.0, 2.0]) * (0.8 + 0.4 * rng.random(3))
        rho = ann.r - ann.w * 0.5 * rng.random(3)
        out.append(np.column_stack([rho * np.cos(th), rho * np.sin(th)]))
    return out


def sup_search_3d(ann: Annulus, slack: ReciprocalSlack, n_per_config: int,
                  n_configs: int, seed: int, *, return_all: bool = False):
    """Approximate the supremum of the integral over base triples (D, E, F).

    Candidate 0 is the three-arc configuration (the near-extremal layout);
    the rest are seeded random triples stratified by size class.  Each
    candidate is estimated with ``n_per_config`` samples and the argmax is
    returned as (best_triple, estimate).  With ``return_all`` the full
    candidate list [(triple, estimate), ...] is appended.
    """
    if n_configs < 1:
        raise ValueError("need at least one candidate configuration")
    eps1 = min(0.05, 0.45 * np.pi / 3.0)
    cfg = ArcConfig(r=ann.r, w=ann.w, eps1=eps1, slack=slack if slack.c <= WEAK_PLANAR.c else WEAK_PLANAR)
    candidates = [arc_config_points(cfg) + np.asarray(ann.center)]
    candidates.extend(_stratified_candidates(ann, n_configs - 1, seed))
    results = []
    for i, tri in enumerate(candidates):
        est = estimate_reciprocal_integral_3d(
            ann, tri[0], tri[1], tri[2], slack, n_per_config, _mix_seed(seed, i))
        results.append((tri, est))
    best_tri, best_est = max(results, key=lambda te: te[1].value)
    if return_all:
        return best_tri, best_est, results
    return best_tri, best_est


def scaling_sweep(r: float, w_list, slack: ReciprocalSlack, n: int, seed: int,
                  *, n_configs: int = 4) -> ExperimentReport:
    """Sweep the annulus width and fit the scaling of the sup integral.

    For each width the sup-search estimate E(w) is recorded together with
    E(w)/(w^3 r); the fitted log-log exponent of E against w should sit
    near 3.  The arc-configuration estimate (the lower-bound candidate)
    is kept in the report extras.
    """
    rows = []
    arc_values = {}
    for i, w in enumerate(w_list):
        ann = Annulus(r=r, w=float(w))
        best_tri, best, results = sup_search_3d(
            ann, slack, n, n_configs, _mix_seed(seed, 1000 + i), return_all=True)
        arc_est = results[0][1]
        arc_values[float(w)] = {
            "value": arc_est.value,
            "stderr": arc_est.stderr,
            "value_over_w3r": arc_est.value / (float(w) ** 3 * r),
        }
        rows.append({
            "r": r,
            "w": float(w),
            "slack": slack.c,
            "n_samples": best.n_samples,
            "seed": best.seed,
            "value": best.value,
            "stderr": best.stderr,
            "truncation_mass": best.truncation_mass,
            "value_over_w3r": best.value / (float(w) ** 3 * r),
        })
    exponent = fit_loglog([row["w"] for row in rows], [row["value"] for row in rows])
    ratios = [row["value_over_w3r"] for row in rows if row["value"] > 0]
    verdict = "bounded"
    if any(row["truncation_mass"] > 0.01 for row in rows) or any(
            row["stderr"] > 0.1 * row["value"] for row in rows if row["value"] > 0):
        verdict = "unconverged"
    elif ratios and max(ratios) / min(ratios) > 10.0:
        verdict = "violation"
    return ExperimentReport(
        name="geom-sweep",
        parameters={"r": r, "w_list": [float(w) for w in w_list], "slack": slack.c,
                    "n": n, "seed": seed, "n_configs": n_configs},
        rows=rows,
        fitted_exponent=exponent,
        verdict=verdict,
        extra={"arc_configuration": arc_values},
    )


def _interval_grid(r: float, w: float, grid_n: int) -> np.ndarray:
    """Midpoint grid over (-r, -r+w) union (r-w, r), 2*grid_n cells."""
    h = w / grid_n
    left = -r + (np.arange(grid_n) + 0.5) * h
    right = (r - w) + (np.arange(grid_n) + 0.5) * h
    return np.concatenate([left, right])


def estimate_reciprocal_integral_2d(r: float, w: float, x1: float, x2: float,
                                    grid_n: int, slack: ReciprocalSlack = PAIR_1D) -> float:
    """Deterministic double integral of 1/|x3 - x4| over reciprocal pairs.

    The domain is the symmetric interval pair (-r, -r+w) u (r-w, r);
    (x3, x4) is admitted when |x1-x2|*|x3-x4| is at least ``slack.c``
    times the maximum over the three pairings of the four points.  A
    midpoint rule with ``grid_n`` cells per interval is used and the
    diagonal band |x3 - x4| < h is excluded; the integrand is integrable
    over the reciprocal set, so the value converges under refinement.
    """
    if grid_n < 100:
        raise ValueError("grid_n must be at least 100 per interval")
    for x, name in ((x1, "x1"), (x2, "x2")):
        if not (-r <= x <= -r + w or r - w <= x <= r):
            raise ValueError(f"{name} outside the interval pair")
    xs = _interval_grid(r, w, grid_n)
    h = w / grid_n
    d34 = np.abs(xs[:, None] - xs[None, :])
    a3 = np.abs(x1 - xs)
    a4 = np.abs(x2 - xs)
    b3 = np.abs(x2 - xs)
    b4 = np.abs(x1 - xs)
    given = abs(x1 - x2) * d34
    maxp = np.maximum(given, np.maximum(a3[:, None] * a4[None, :], b3[:, None] * b4[None, :]))
    mask = (given >= slack.c * maxp) & (d34 >= h)
    with np.errstate(divide="ignore"):
        vals = np.where(mask, 1.0 / d34, 0.0)
    return float(vals.sum() * h * h)


def sup_reciprocal_integral_2d(r: float, w: float, grid_n: int, n_pairs: int,
                               seed: int, slack: ReciprocalSlack = PAIR_1D):
    """Sup of the 1D reciprocal integral over seeded base pairs (x1, x2).

    Candidates are the two structured extremes (opposite outer edges,
    same-interval midpoints) plus ``n_pairs`` seeded uniform pairs.
    Returns ((x1, x2), value).
    """
    rng = stream(seed, 0x2D)
    h = w / grid_n
    cands = [(-r + 0.5 * h, r - 0.5 * h), (r - w + 0.5 * h, r - 0.5 * h)]
    for _ in range(n_pairs):
        pair = []
        for _ in range(2):
            u = rng.random() * 2.0 * w
            pair.append(-r + u if u < w else r - w + (u - w))
        cands.append(tuple(pair))
    best_pair, best_val = None, -1.0
    for pair in cands:
        val = estimate_reciprocal_integral_2d(r, w, pair[0], pair[1], grid_n, slack)
        if val > best_val:
            best_pair, best_val = pair, val
    return best_pair, best_val


def classification_diagnostic(ann: Annulus, slack: ReciprocalSlack, n: int,
                              seed: int) -> ExperimentReport:
    """Sampled geometry of reciprocal pairs with very different sizes.

    Proposes pairs of a rim-spanning triangle (D, E, F) and a small
    triangle (A, B, C) seeded near one of its vertices, keeps proposals
    that are reciprocal as given with size ratio at most 1/8, and records
    two diagnostics per accepted pair: the vertex-proximity ratio
    min_V max(|AV|, |BV|, |CV|) / L over far-triangle vertices V, and the
    triangle distance ratio d(ABC, DEF) / min(L, M) (vertex-to-vertex
    distance).  Only empirical quantiles are reported; the structural
    statements come with unspecified constants, so nothing is asserted.
    """
    if n < 1:
        raise ValueError("need a positive sample budget")
    vprox = []
    dratio = []
    tested = 0
    for k, m in enumerate(batch_sizes(n, batch=1 << 14)):
        rng = stream(seed, 0xC1A55 + k)
        big = _stratified_candidates_batch(ann, m, rng)
        small, ok_small = _small_triangle_near_vertex(ann, big, rng)
        tested += m
        for i in range(m):
            if not ok_small[i]:
                continue
            six = np.vstack([small[i], big[i]])
            if not reciprocal_check(six, slack).is_reciprocal_as_given:
                continue
            L = _longest_edge(small[i])
            M = _longest_edge(big[i])
            if L <= 0.0 or M <= 0.0 or L / M > 0.125:
                continue
            dists = np.linalg.norm(small[i][:, None, :] - big[i][None, :, :], axis=2)
            vprox.append(float(dists.max(axis=0).min() / L))
            dratio.append(float(dists.min() / min(L, M)))
    qs = (0.5, 0.9, 0.99)
    rows = []
    for q in qs:
        rows.append({
            "quantile": q,
            "vertex_proximity_ratio": float(np.quantile(vprox, q)) if vprox else None,
            "distance_ratio": float(np.quantile(dratio, q)) if dratio else None,
        })
    return ExperimentReport(
        name="classification-diagnostic",
        parameters={"r": ann.r, "w": ann.w, "slack": slack.c, "n": n, "seed": seed},
        rows=rows,
        fitted_exponent=None,
        verdict="bounded",
        extra={"n_tested": tested, "n_accepted": len(vprox)},
    )


def _longest_edge(tri: np.ndarray) -> float:
    d = np.linalg.norm(tri - np.roll(tri, 1, axis=0), axis=1)
    return float(d.max())


def _stratified_candidates_batch(ann: Annulus, m: int, rng: np.random.Generator) -> np.ndarray:
    """m rim-spanning triangles, shape (m, 3, 2)."""
    th0 = rng.random(m) * 2.0 * np.pi
    spread = (2.0 * np.pi / 3.0) * (0.8 + 0.4 * rng.random((m, 3)))
    th = th0[:, None] + spread * np.array([0.0, 1.0, 2.0])
    rho = ann.r - ann.w * 0.5 * rng.random((m, 3))
    out = np.empty((m, 3, 2))
    out[..., 0] = rho * np.cos(th)
    out[..., 1] = rho * np.sin(th)
    return out


def _small_triangle_near_vertex(ann: Annulus, big: np.ndarray, rng: np.random.Generator):
    """Small triangles placed near a random vertex of each big triangle.

    Returns (triangles (m, 3, 2), ok (m,)); ok marks proposals whose
    three vertices all landed inside the annulus.
    """
    m = big.shape[0]
    which = rng.integers(0, 3, size=m)
    anchor = big[np.arange(m), which]
    scale = np.array([_longest_edge(t) for t in big]) * 2.0 ** (-rng.integers(3, 6, size=m))
    tri = np.empty((m, 3, 2))
    for j in range(3):
        ang = rng.random(m) * 2.0 * np.pi
        rad = scale * rng.random(m)
        tri[:, j, 0] = anchor[:, 0] + rad * np.cos(ang)
        tri[:, j, 1] = anchor[:, 1] + rad * np.sin(ang)
    ok = ann.contains(tri).all(axis=1)
    return tri, ok
