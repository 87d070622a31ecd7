"""Backprojection of direction-profiles, free waves, and annulus geometry.

The package computes the direction-integral (adjoint Radon / backprojection)
operator of profiles G(s, omega), the free waves they generate, exterior
L^p decay experiments with fitted scaling exponents, and the planar
annulus geometry (reciprocal triples, area lemmas, singular geometric
integrals) that controls those decay rates.
"""

__version__ = "0.1.0"

from .annulus import Annulus, AngleSet, annulus_area
from .geometry import (
    ReciprocalSlack,
    SphereQuadrature,
    STRICT_SPHERE,
    WEAK_PLANAR,
    PAIR_1D,
    build_circle_quadrature,
    build_sphere_quadrature,
    central_project,
    classify_size_angle,
    reciprocal_check,
    scalar_triple,
    triangle_area,
)
from .radiation import ProfileSpec, RadiationField, energy, l2_norm, make_profile
from .report import ExperimentReport
from .transform import (
    Plane,
    adjoint_radon_2d,
    adjoint_radon_3d,
    free_wave_eval,
    initial_data,
    pairing_check,
    radon_2d,
    radon_3d,
    wave_gradient,
)

__all__ = [
    "__version__",
    "Annulus",
    "AngleSet",
    "annulus_area",
    "ReciprocalSlack",
    "SphereQuadrature",
    "STRICT_SPHERE",
    "WEAK_PLANAR",
    "PAIR_1D",
    "build_circle_quadrature",
    "build_sphere_quadrature",
    "central_project",
    "classify_size_angle",
    "reciprocal_check",
    "scalar_triple",
    "triangle_area",
    "ProfileSpec",
    "RadiationField",
    "energy",
    "l2_norm",
    "make_profile",
    "ExperimentReport",
    "Plane",
    "adjoint_radon_2d",
    "adjoint_radon_3d",
    "free_wave_eval",
    "initial_data",
    "pairing_check",
    "radon_2d",
    "radon_3d",
    "wave_gradient",
]
