"""End-to-end decay experiments: measured norms against their scaling bounds.

Each experiment sweeps one parameter, measures an exterior norm of a
backprojection or free wave, tabulates the claimed bound, and reports
per-row ratios plus a fitted log-log exponent.  Ratio columns are kept on
the norm scale (p-th root of the power integrals), so the "bounded
constant" criterion compares like with like across experiments; exponent
fits are taken on the quantity named in each experiment (the power
integral for the decay sweeps, the norm quotient for the optimality
family).  Verdicts: "bounded" needs every converged row, a ratio
envelope max/min <= 10, and the fitted exponent inside the declared
band; truncation failures give "unconverged", the rest "violation".
"""

from __future__ import annotations

import math

import numpy as np

from .geometry import build_sphere_quadrature
from .norms import exterior_lp_norm, radial_rule
from .zonal import _gl
from .radiation import ProfileSpec, RadiationField, l2_norm, make_profile, energy as field_energy
from .report import ExperimentReport, fit_loglog, ratio_envelope
from .transform import adjoint_radon_2d, adjoint_radon_3d, free_wave_eval

__all__ = [
    "decay3d",
    "optimality3d",
    "wave_decay",
    "decay2d",
    "radon_support_2d",
    "optimality_band_value",
    "assemble_verdict",
    "ENVELOPE_LIMIT",
]

ENVELOPE_LIMIT = 10.0


def assemble_verdict(rows, ratio_key, exponent, exponent_band,
                     envelope_limit=ENVELOPE_LIMIT):
    """Shared verdict logic: convergence flags, ratio envelope, exponent band."""
    if any(not row.get("converged", True) for row in rows):
        return "unconverged"
    env = ratio_envelope([row.get(ratio_key) for row in rows
                          if row.get(ratio_key, 0) and row.get(ratio_key) > 0])
    if env is not None and env > envelope_limit:
        return "violation"
    if exponent is not None and exponent_band is not None:
        lo, hi = exponent_band
        if not (lo <= exponent <= hi):
            return "violation"
    return "bounded"


def decay3d(field: RadiationField, a: float, b: float, R_list,
            shells: int = 48, exponent_max: float = -1.7) -> ExperimentReport:
    """Exterior sixth-power decay of the backprojection of a band profile.

    For each R the integral of |T G|^6 over {|x| > R} is measured and set
    against the applicable bounds times ||G||^6: the one-sided band bound
    (a/R)^2 (1-a/b)^3 / (1-a/R) when b <= 2a, the symmetric-band bound
    (c/R)^2 with c = max(|a|, |b|), and the width bound ((b-a)/R)^2.  The
    ratio column is the L^6 norm over the sixth root of the width bound;
    the fitted exponent is that of the power integral itself.
    """
    norm6 = l2_norm(field) ** 6
    rows = []
    for R in R_list:
        R = float(R)
        res = exterior_lp_norm(lambda pts: adjoint_radon_3d(field, pts), R=R, p=6.0,
                               shells=shells, dim=3, b=max(b, 1e-12),
                               breaks=[x for x in (a, b) if x > R])
        width_bound = ((b - a) / R) ** 2 * norm6
        sym_bound = (max(abs(a), abs(b)) / R) ** 2 * norm6
        row = {
            "R": R,
            "integral": res.value,
            "norm": res.norm(),
            "bound_width": width_bound,
            "bound_symmetric": sym_bound,
            "ratio": res.norm() / width_bound ** (1.0 / 6.0),
            "converged": res.converged,
        }
        if 0 < a < b <= 2 * a and R > a:
            row["bound_band"] = (a / R) ** 2 * (1 - a / b) ** 3 / (1 - a / R) * norm6
            row["ratio_band"] = res.norm() / row["bound_band"] ** (1.0 / 6.0)
        rows.append(row)
    exponent = fit_loglog([r["R"] for r in rows], [r["integral"] for r in rows])
    verdict = assemble_verdict(rows, "ratio", exponent, (-math.inf, exponent_max))
    return ExperimentReport(
        name="decay-3d",
        parameters={"a": a, "b": b, "R_list": [float(R) for R in R_list],
                    "shells": shells, "exponent_max": exponent_max},
        rows=rows, fitted_exponent=exponent, verdict=verdict)


# ---------------------------------------------------------------------------
# the thin-band family that attains the exterior decay rate


def optimality_band_value(R: float, points, n_z: int = 24):
    """Backprojection of the thin-band profile by exact arc measures.

    The profile is the indicator of s in [-1, 1] times the zonal band
    0 < omega_z < 1/(6R).  At a point with cylindrical coordinates
    (rho_perp, x3) the direction integral reduces to the z-integral of
    the azimuthal arc measure {phi : |rho_perp sqrt(1-z^2) cos phi
    + x3 z| <= 1}, done here with Gauss-Legendre panels in z.  This
    route is independent of the sphere-rule sampling and stays accurate
    for arbitrarily large |x|.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    rho_perp = np.hypot(pts[:, 0], pts[:, 1])
    x3 = pts[:, 2]
    top = 1.0 / (6.0 * R)
    x, w = _gl(n_z)
    total = np.zeros(pts.shape[0])
    # four panels resolve the clipping kinks of the arc measure
    edges = np.linspace(0.0, top, 5)
    for lo, hi in zip(edges[:-1], edges[1:]):
        z = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        wz = 0.5 * (hi - lo) * w
        A = rho_perp[:, None] * np.sqrt(1.0 - z**2)[None, :]
        B = x3[:, None] * z[None, :]
        c_lo = np.clip((-1.0 - B) / np.maximum(A, 1e-300), -1.0, 1.0)
        c_hi = np.clip((1.0 - B) / np.maximum(A, 1e-300), -1.0, 1.0)
        arc = 2.0 * (np.arccos(c_lo) - np.arccos(c_hi))
        axis = A < 1e-14
        if np.any(axis):
            arc = np.where(axis, 2.0 * np.pi * (np.abs(B) <= 1.0), arc)
        total += arc @ wz
    return total if total.size > 1 else float(total[0])


def _optimality_exterior_l6(R: float, n_theta: int = 20, shells: int = 40) -> float:
    """Integral of |T G_R|^6 over {|x| > R}, adapted to the cylinder geometry.

    Spherical shells with polar panels split at the cylinder silhouette
    (sin theta = 1/(3 rho)) and at the moderate-angle transition; the
    integrand is azimuthally symmetric and even in x3.
    """
    r_max = 2.0**10 * R
    rho, w_rho = radial_rule(R, r_max, n_linear=shells, per_decade=shells,
                             linear_until=3.0 * R, breaks=(2.0 * R, 2.5 * R))
    x, wq = _gl(n_theta)
    total = 0.0
    for rr, ww in zip(rho, w_rho):
        s1 = min(1.0, (1.0 / 3.0) / rr)
        s2 = min(1.0, 8.0 / rr)
        edges = sorted({0.0, math.asin(s1), math.asin(s2), 0.5 * math.pi})
        acc = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            if hi <= lo:
                continue
            theta = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
            wt = 0.5 * (hi - lo) * wq
            pts = np.column_stack([rr * np.sin(theta), np.zeros_like(theta),
                                   rr * np.cos(theta)])
            tg = optimality_band_value(R, pts)
            acc += float((np.abs(tg) ** 6 * np.sin(theta)) @ wt)
        # azimuthal symmetry and evenness in x3
        total += ww * rr**2 * acc * 2.0 * (2.0 * np.pi)
    return total


def optimality3d(R_list, resolution: int = 64, exponent_tol: float = 0.05,
                 n_theta: int = 20, shells: int = 40) -> ExperimentReport:
    """Decay rate of the thin-band family: ||T G_R||_{L^6(|x|>R)} / ||G_R||.

    Per R the profile has its own zonal band of height 1/(6R); the
    direction rule must resolve that band (z-breaks are placed on its
    edges, and the construction fails if no node falls inside).  The
    quotient is fitted against R and compared with the -1/3 slope this
    family is designed to attain.
    """
    rows = []
    for R in R_list:
        R = float(R)
        spec = ProfileSpec(kind="optimality", R=R)
        field = make_profile(spec, resolution=resolution)
        norm = l2_norm(field)
        integral = _optimality_exterior_l6(R, n_theta=n_theta, shells=shells)
        measured = integral ** (1.0 / 6.0) / norm
        reference = R ** (-1.0 / 3.0)
        rows.append({
            "R": R,
            "profile_norm": norm,
            "integral": integral,
            "norm_quotient": measured,
            "reference": reference,
            "ratio": measured / reference,
            "converged": True,
        })
    exponent = fit_loglog([r["R"] for r in rows], [r["norm_quotient"] for r in rows])
    band = (-1.0 / 3.0 - exponent_tol, -1.0 / 3.0 + exponent_tol)
    verdict = assemble_verdict(rows, "ratio", exponent, band)
    return ExperimentReport(
        name="optimality-3d",
        parameters={"R_list": [float(R) for R in R_list], "resolution": resolution,
                    "exponent_tol": exponent_tol},
        rows=rows, fitted_exponent=exponent, verdict=verdict)


def wave_decay(field: RadiationField, r_support: float, R_list, t_list,
               shells: int = 40, exponent_tol: float = 0.1) -> ExperimentReport:
    """Free-wave L^6 decay families for a profile supported in [-r, r].

    Family one: for each R, the sup over the time list of
    ||u(., t)||_{L^6(|x|>R)} against (r/R)^(1/3) E^(1/2).  Family two:
    for each |t| > 3r, the full-space L^6 norm against
    (r/|t|)^(1/3) E^(1/2).  Both ratio families are reported; exponents
    are fitted on the measured norms of each family.
    """
    E = field_energy(field)
    sqrtE = math.sqrt(E)
    rows = []
    for R in R_list:
        R = float(R)
        best = None
        best_t = None
        conv = True
        for t in t_list:
            t = float(t)
            scale = max(R, abs(t) + r_support)
            res = exterior_lp_norm(
                lambda pts: free_wave_eval(field, pts, t), R=R, p=6.0,
                shells=shells, dim=3, b=scale,
                breaks=[abs(abs(t) - r_support), abs(t) + r_support])
            conv = conv and res.converged
            if best is None or res.norm() > best:
                best, best_t = res.norm(), t
        bound = (r_support / R) ** (1.0 / 3.0) * sqrtE
        rows.append({
            "family": "exterior_sup_t", "R": R, "t": best_t,
            "measured": best, "bound": bound, "ratio": best / bound,
            "converged": conv,
        })
    for t in t_list:
        t = float(t)
        if abs(t) <= 3.0 * r_support:
            continue
        scale = abs(t) + r_support
        res = exterior_lp_norm(
            lambda pts: free_wave_eval(field, pts, t), R=0.0, p=6.0,
            shells=shells, dim=3, b=scale,
            breaks=[abs(t) - r_support, abs(t) + r_support])
        bound = (r_support / abs(t)) ** (1.0 / 3.0) * sqrtE
        rows.append({
            "family": "full_space_t", "R": 0.0, "t": t,
            "measured": res.norm(), "bound": bound, "ratio": res.norm() / bound,
            "converged": res.converged,
        })
    fam1 = [r for r in rows if r["family"] == "exterior_sup_t"]
    fam2 = [r for r in rows if r["family"] == "full_space_t"]
    exp1 = fit_loglog([r["R"] for r in fam1], [r["measured"] for r in fam1])
    exp2 = fit_loglog([abs(r["t"]) for r in fam2], [r["measured"] for r in fam2])
    band = (-1.0 / 3.0 - exponent_tol, -1.0 / 3.0 + exponent_tol)
    verdict1 = assemble_verdict(fam1, "ratio", exp1, band)
    verdict2 = assemble_verdict(fam2, "ratio", exp2, band)
    order = {"bounded": 0, "violation": 1, "unconverged": 2}
    verdict = max((verdict1, verdict2), key=lambda v: order[v])
    return ExperimentReport(
        name="wave-decay",
        parameters={"r": r_support, "R_list": [float(R) for R in R_list],
                    "t_list": [float(t) for t in t_list], "shells": shells,
                    "exponent_tol": exponent_tol},
        rows=rows, fitted_exponent=exp1, verdict=verdict,
        extra={"exponent_full_space": exp2, "energy": E,
               "verdict_exterior": verdict1, "verdict_full_space": verdict2})


def decay2d(field: RadiationField, a: float, b: float, R_list,
            shells: int = 48, exponent_max: float = -0.85) -> ExperimentReport:
    """Fourth-power exterior decay of the circle backprojection (2D).

    Bounds per R: the one-sided band bound (a/R)(1-a/b)/(1-a/R)^(1/2)
    when b <= 2a, and the symmetric bound c/R with c = max(|a|, |b|),
    both times ||G||^4.  Ratio column on the norm scale against the
    symmetric bound; exponent fitted on the power integral.
    """
    if field.dim != 2:
        raise ValueError("decay2d needs a profile over the circle")
    norm4 = l2_norm(field) ** 4
    rows = []
    for R in R_list:
        R = float(R)
        res = exterior_lp_norm(lambda pts: adjoint_radon_2d(field, pts), R=R, p=4.0,
                               shells=shells, dim=2, b=max(b, 1e-12),
                               breaks=[x for x in (a, b) if x > R])
        sym_bound = (max(abs(a), abs(b)) / R) * norm4
        row = {
            "R": R,
            "integral": res.value,
            "norm": res.norm(),
            "bound_symmetric": sym_bound,
            "ratio": res.norm() / sym_bound ** 0.25,
            "converged": res.converged,
        }
        if 0 < a < b <= 2 * a and R > a:
            row["bound_band"] = (a / R) * (1 - a / b) / math.sqrt(1 - a / R) * norm4
            row["ratio_band"] = res.norm() / row["bound_band"] ** 0.25
        rows.append(row)
    exponent = fit_loglog([r["R"] for r in rows], [r["integral"] for r in rows])
    verdict = assemble_verdict(rows, "ratio", exponent, (-math.inf, exponent_max))
    return ExperimentReport(
        name="decay-2d",
        parameters={"a": a, "b": b, "R_list": [float(R) for R in R_list],
                    "shells": shells, "exponent_max": exponent_max},
        rows=rows, fitted_exponent=exponent, verdict=verdict)


def radon_support_2d(R: float, b_list, inner: float | None = None,
                     outer: float | None = None, amplitude: float = 1.0,
                     n_s: int = 64, n_u: int = 4000,
                     exponent_band=(0.15, 0.35)) -> ExperimentReport:
    """Line-transform mass of an annular source against the (b/R)^(1/4) bound.

    The source is the indicator of the annulus inner < |x| < outer
    (defaults R < |x| < R + 1), supported away from the origin.  For each
    b the L^2 norm of the line transform over offsets [-b, b] (times the
    full circle of directions) is compared with (b/R)^(1/4) ||f||_{4/3};
    the 4/3-norm of the indicator is the annulus area to the power 3/4.
    Since the transform of a radial source is direction-independent, only
    one direction is integrated and the circle factor 2*pi applied.  The
    fitted exponent is that of the measured-to-bound ratio in b: the
    claim's b^(1/4) is saturated exactly when that ratio grows like
    b^(1/4), the transform mass itself growing like b^(1/2).
    """

    inner = R if inner is None else inner
    outer = R + 1.0 if outer is None else outer
    if inner < R:
        raise ValueError("source must be supported in {|x| > R}")
    f = lambda pts: np.where(  # noqa: E731
        (np.hypot(pts[..., 0], pts[..., 1]) > inner)
        & (np.hypot(pts[..., 0], pts[..., 1]) < outer), amplitude, 0.0)
    f_norm_43 = amplitude * (math.pi * (outer**2 - inner**2)) ** 0.75
    x, w = _gl(n_s)
    xu, wu = _gl(n_u)
    extent = outer * 1.05
    rows = []
    for b in b_list:
        b = float(b)
        s_nodes = b * x
        s_w = b * w
        # line through offset s with normal e1: points (s, u); f is radial
        pts = np.empty((n_s, n_u, 2))
        pts[..., 0] = s_nodes[:, None]
        pts[..., 1] = extent * xu[None, :]
        rf = (f(pts) * (extent * wu)[None, :]).sum(axis=1)
        norm_sq = 2.0 * math.pi * float((rf**2) @ s_w)
        measured = math.sqrt(norm_sq)
        bound = (b / R) ** 0.25 * f_norm_43
        rows.append({
            "b": b,
            "measured": measured,
            "bound": bound,
            "ratio": measured / bound,
            "converged": True,
        })
    exponent = fit_loglog([r["b"] for r in rows], [r["ratio"] for r in rows])
    verdict = assemble_verdict(rows, "ratio", exponent, exponent_band)
    return ExperimentReport(
        name="radon-support-2d",
        parameters={"R": R, "b_list": [float(b) for b in b_list],
                    "inner": inner, "outer": outer, "n_s": n_s, "n_u": n_u},
        rows=rows, fitted_exponent=exponent, verdict=verdict,
        extra={"f_norm_4_3": f_norm_43})
