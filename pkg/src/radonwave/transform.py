"""The backprojection operator, Radon transforms, and free-wave evaluation.

``adjoint_radon_3d`` integrates a profile G(x.omega, omega) over all
directions; dividing by 2*pi and shifting the offset by t evaluates the
free wave whose radiation profile is G.  Plane (3D) and line (2D) Radon
transforms and an adjointness pairing check complete the operator pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .radiation import RadiationField
from .zonal import _gl

__all__ = [
    "Plane",
    "RadonResult",
    "adjoint_radon_3d",
    "adjoint_radon_2d",
    "free_wave_eval",
    "initial_data",
    "wave_gradient",
    "radon_3d",
    "radon_2d",
    "pairing_check",
]


@dataclass(frozen=True)
class Plane:
    """Hyperplane {x : omega . x = s} with unit normal omega."""

    omega: tuple
    s: float

    def __post_init__(self):
        w = np.asarray(self.omega, dtype=float)
        if w.ndim != 1 or w.size not in (2, 3):
            raise ValueError("omega must be a 2- or 3-vector")
        norm = float(np.linalg.norm(w))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError("omega must be a unit vector")
        object.__setattr__(self, "omega", tuple(w.tolist()))


@dataclass(frozen=True)
class RadonResult:
    """Plane/line integral value plus a support-clipping flag.

    ``clipped`` is set when the integrand is still non-negligible on the
    boundary of the quadrature patch, i.e. the chosen extent truncated
    the support.
    """

    value: float
    clipped: bool


def _resolve_mode(field: RadiationField, mode: str, derivative: bool) -> str:
    if mode != "auto":
        return mode
    if field.h_poly is not None and field.g is not None and (
            not derivative or field.g_ds is not None):
        return "reduction"
    return "quad" if field.has_exact else "grid"


def _backproject(field: RadiationField, x, t: float = 0.0, mode: str = "auto",
                 derivative: bool = False):
    """Direction integral of G (or dG/ds) at offsets x.omega + t.

    Modes: "reduction" collapses separable profiles to band-aligned 1D
    panels (machine accurate at any radius); "quad" sums the field's
    direction rule with closed-form profile values; "grid" does the same
    with linear interpolation of the samples.  "auto" picks the best
    available.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    xs = np.atleast_2d(x)
    if xs.shape[1] != field.dim:
        raise ValueError(f"points must be {field.dim}-dimensional")
    mode = _resolve_mode(field, mode, derivative)
    if mode == "reduction":
        from . import zonal

        if field.dim == 3:
            out = (zonal.separable_dt(field, xs, t) if derivative
                   else zonal.separable_value(field, xs, t))
        else:
            out = (zonal.circle_dt(field, xs, t) if derivative
                   else zonal.circle_value(field, xs, t))
        return (float(out[0]) if single else out)
    s_mat = xs @ field.quad.nodes.T + t
    vals = field.eval(s_mat, mode="exact" if mode == "quad" else "grid",
                      derivative=derivative)
    out = vals @ field.quad.weights
    return float(out[0]) if single else out


def adjoint_radon_3d(field: RadiationField, x, mode: str = "auto"):
    """(T G)(x) = integral over the sphere of G(x.omega, omega).

    ``x`` may be a single 3-vector or an (P, 3) batch.  Offsets outside
    the support contribute zero.
    """
    return _backproject(field, x, 0.0, mode)


def adjoint_radon_2d(field: RadiationField, x, mode: str = "auto"):
    """Circle version of the backprojection for profiles on R x S^1."""
    return _backproject(field, x, 0.0, mode)


def free_wave_eval(field: RadiationField, x, t: float, mode: str = "auto"):
    """u(x, t) = (1/2 pi) integral of G(x.omega + t, omega) over directions.

    At t = 0 this equals the backprojection divided by 2*pi.
    """
    out = _backproject(field, x, t, mode)
    return out / (2.0 * np.pi)


def initial_data(field: RadiationField, points, mode: str = "auto"):
    """Initial data (u0, u1) of the free wave with profile G.

    u0 = (1/2 pi) T G and u1 = (1/2 pi) times the backprojection of the
    s-derivative.  Profiles without a derivative (indicators) raise.
    """
    if not field.differentiable:
        raise ValueError("profile provides no s-derivative; initial data undefined (norms-only)")
    u0 = _backproject(field, points, 0.0, mode)
    u1 = _backproject(field, points, 0.0, mode, derivative=True)
    return u0 / (2.0 * np.pi), u1 / (2.0 * np.pi)


def wave_gradient(field: RadiationField, x, t: float, mode: str = "auto"):
    """(du/dt, grad u) at (x, t) by differentiating under the integral.

    du/dt = (1/2 pi) integral of dG/ds, grad u = (1/2 pi) integral of
    omega * dG/ds.  Requires a differentiable profile.
    """
    if not field.differentiable:
        raise ValueError("profile provides no s-derivative (norms-only)")
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    xs = np.atleast_2d(x)
    mode = _resolve_mode(field, mode, derivative=True)
    if mode == "reduction":
        from . import zonal

        if field.dim != 3:
            raise ValueError("wave gradients are implemented for 3D profiles")
        raw_dt, raw_grad = zonal.separable_gradient(field, xs, t)
        dt_u = raw_dt / (2.0 * np.pi)
        grad = raw_grad / (2.0 * np.pi)
    else:
        s_mat = xs @ field.quad.nodes.T + t
        dvals = field.eval(s_mat, mode="exact" if mode == "quad" else "grid",
                           derivative=True)
        weighted = dvals * field.quad.weights
        dt_u = weighted.sum(axis=1) / (2.0 * np.pi)
        grad = (weighted @ field.quad.nodes) / (2.0 * np.pi)
    if single:
        return float(dt_u[0]), grad[0]
    return dt_u, grad


def _orthonormal_frame(omega: np.ndarray):
    """Two unit vectors spanning the plane orthogonal to omega."""
    a = np.array([1.0, 0.0, 0.0]) if abs(omega[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(omega, a)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(omega, e1)
    return e1, e2


def radon_3d(f, plane: Plane, extent: float, resolution: int = 64) -> RadonResult:
    """Integral of f over the plane patch of half-width ``extent``.

    Tensor Gauss-Legendre quadrature in an orthonormal frame of the
    plane; f is a callable on (P, 3) arrays.  The result is flagged
    ``clipped`` when f has not died out on the patch boundary.
    """
    omega = np.asarray(plane.omega, dtype=float)
    e1, e2 = _orthonormal_frame(omega)
    u, wu = _gl(resolution)
    u = u * extent
    wu = wu * extent
    U, V = np.meshgrid(u, u, indexing="ij")
    pts = plane.s * omega + U.ravel()[:, None] * e1 + V.ravel()[:, None] * e2
    vals = np.asarray(f(pts), dtype=float).reshape(resolution, resolution)
    value = float(wu @ vals @ wu)
    edge = np.concatenate([vals[0], vals[-1], vals[:, 0], vals[:, -1]])
    scale = max(float(np.abs(vals).max()), 1e-300)
    clipped = bool(np.abs(edge).max() > 1e-9 * scale)
    return RadonResult(value=value, clipped=clipped)


def radon_2d(f, omega, s: float, extent: float, resolution: int = 256) -> RadonResult:
    """Integral of f over the line {x : omega . x = s} (2D Radon transform)."""
    omega = np.asarray(omega, dtype=float)
    if abs(np.linalg.norm(omega) - 1.0) > 1e-9:
        raise ValueError("omega must be a unit vector")
    perp = np.array([-omega[1], omega[0]])
    u, wu = _gl(resolution)
    u = u * extent
    wu = wu * extent
    pts = s * omega + u[:, None] * perp
    vals = np.asarray(f(pts), dtype=float)
    value = float(wu @ vals)
    scale = max(float(np.abs(vals).max()), 1e-300)
    clipped = bool(max(abs(vals[0]), abs(vals[-1])) > 1e-9 * scale)
    return RadonResult(value=value, clipped=clipped)


def pairing_check(f, field: RadiationField, support_radius: float,
                  resolution: int = 32, mode: str = "auto"):
    """Both sides of the adjointness pairing <f, T G> = <R f, G>.

    The left side integrates f * (T G) over the ball containing the
    support of f (radial Gauss-Legendre times the field's sphere rule);
    the right side sums (R f)(s, omega) G(s, omega) over the field's
    grid cells and direction nodes, with each plane integral done by
    ``radon_3d`` at the same resolution.  Returns (lhs, rhs); the two are
    independent quadratures of the same pairing and should agree to the
    discretization error.
    """
    from .geometry import build_sphere_quadrature

    sph = build_sphere_quadrature(resolution)
    rho, wr = _gl(2 * resolution)
    rho = 0.5 * support_radius * (rho + 1.0)
    wr = 0.5 * support_radius * wr
    pts = rho[:, None, None] * sph.nodes[None, :, :]
    pts = pts.reshape(-1, 3)
    tg = adjoint_radon_3d(field, pts, mode=mode).reshape(len(rho), len(sph))
    fv = np.asarray(f(pts), dtype=float).reshape(len(rho), len(sph))
    lhs = float(((fv * tg) @ sph.weights) @ (wr * rho**2))

    rhs = _pairing_rhs(f, field, support_radius, resolution)
    return lhs, rhs


def _pairing_rhs(f, field: RadiationField, support_radius: float, resolution: int) -> float:
    """Grid sum of (R f)(s, omega) G(s, omega): one batched plane rule per s-cell."""
    nodes = field.quad.nodes
    m = len(field.quad)
    # orthonormal frames for every node at once
    a = np.where(np.abs(nodes[:, :1]) < 0.9, [[1.0, 0.0, 0.0]], [[0.0, 1.0, 0.0]])
    e1 = np.cross(nodes, a)
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(nodes, e1)

    extent = support_radius * 1.05
    u, wu = _gl(resolution)
    u = u * extent
    wu = wu * extent
    U, V = np.meshgrid(u, u, indexing="ij")
    w2 = np.outer(wu, wu).ravel()

    patch = (U.ravel()[:, None, None] * e1[None, :, :]
             + V.ravel()[:, None, None] * e2[None, :, :])  # (res^2, M, 3)

    s_grid = field.s_grid
    rows = [i for i in np.nonzero(field._support_mask(s_grid))[0]
            if abs(s_grid[i]) < support_radius and np.any(field.values[i] != 0.0)]
    rhs = 0.0
    for i in rows:
        pts = s_grid[i] * nodes[None, :, :] + patch  # (res^2, M, 3)
        vals = np.asarray(f(pts.reshape(-1, 3)), dtype=float).reshape(-1, m)
        rf = w2 @ vals  # (M,) plane integrals at offset s_i
        rhs += field.ds * float((rf * field.values[i]) @ field.quad.weights)
    return rhs
