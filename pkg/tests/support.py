"""Shared example families and samplers for the test suite."""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from hopfsurf.ambient import SpaceFormSpec, quadric_normalize, standard_point, tangent_split
from hopfsurf.hypersurface import HypersurfacePatch
from hopfsurf.tube import CoreSpec, geodesic_sphere_patch, j_adapted_basis, orthogonal_complement, tube_over_linear_core

CP2 = SpaceFormSpec.projective(2)
CP2_1 = SpaceFormSpec.projective(2, p=1)
CH2 = SpaceFormSpec.hyperbolic(2)
CH2_P2 = SpaceFormSpec(n=2, eps=1, c=-1, p=2)
DP2 = SpaceFormSpec.para(2)

SPACES = {"CP2": CP2, "CP2_p1": CP2_1, "CH2": CH2, "CH2_p2": CH2_P2, "DP2": DP2}

# name -> (space, theta, core slots or None for a point core)
FAMILY_TABLE = {
    "sphere-CP2": (CP2, math.pi / 6, None),
    "sphere-CH2": (CH2, 0.5, None),
    "sphere-CH2-p2": (CH2_P2, 0.5, None),
    "sphere-DP2": (DP2, 0.6, None),
    "sphere-CP2-p1": (CP2_1, math.pi / 6, None),
    "tube-CP1": (CP2, math.pi / 6, (0, 1)),
    "tube-DP1": (DP2, 0.6, (0, 1)),
    "tube-CH1": (CH2, 0.5, (0, 1)),
}
FAMILIES = list(FAMILY_TABLE)

# off-centre chart points; the centre has extra symmetry that can hide errors
SAMPLE_POINTS = np.array(
    [
        [0.10, -0.05, 0.12],
        [-0.13, 0.08, 0.03],
        [0.05, 0.15, -0.10],
    ]
)


@lru_cache(maxsize=None)
def family(name: str, fd_step: float = 1e-3) -> HypersurfacePatch:
    spec, theta, slots = FAMILY_TABLE[name]
    if slots is None:
        return geodesic_sphere_patch(spec, standard_point(spec), theta, fd_step=fd_step)
    return tube_over_linear_core(spec, CoreSpec.coordinate(spec, slots), theta, fd_step=fd_step)


def hopf_law_value(name: str) -> float:
    spec, theta, _ = FAMILY_TABLE[name]
    if spec.eps_prime == 1:
        return 2.0 / math.tan(2 * theta)
    return 2.0 / math.tanh(2 * theta)


def scan_grid(patch: HypersurfacePatch, per_axis: int = 5) -> np.ndarray:
    return patch.grid([per_axis], margin=patch.residual_reach() * 1.001)


def random_quadric_point(spec: SpaceFormSpec, rng) -> np.ndarray:
    while True:
        z = rng.standard_normal(spec.dim)
        q = spec.inner(z, z)
        if q * spec.level > 0.2 * np.dot(z, z):
            return quadric_normalize(spec, z)


def random_horizontal(spec: SpaceFormSpec, z, rng, min_causal: float = 1e-3) -> np.ndarray:
    """Random horizontal vector at ``z`` with ``|<X,X>|`` bounded away from zero."""
    while True:
        X = tangent_split(spec, z, rng.standard_normal(spec.dim))[0]
        if abs(spec.inner(X, X)) > min_causal * np.dot(X, X):
            return X


def null_slice_patch() -> HypersurfacePatch:
    """Patch in DP2 whose tangent space at the origin contains a null direction orthogonal to it."""
    spec = DP2
    z0 = standard_point(spec)
    H = j_adapted_basis(spec, orthogonal_complement(spec, [z0, spec.J(z0)]))
    signs = spec.inner(H, H)
    pos, neg = H[signs > 0][0], H[signs < 0][0]
    ell = pos + neg  # null and horizontal
    rest = orthogonal_complement(spec, np.vstack([z0, spec.J(z0), ell]))
    # ell^perp inside the horizontal space, a 3-space that contains ell itself
    span = np.vstack([ell, rest])
    basis = np.linalg.svd(span, full_matrices=False)[2][:3]

    def lift(U):
        U = np.atleast_2d(U)
        Z = z0 + U @ basis
        q = spec.inner(Z, Z)
        return Z / np.sqrt(np.abs(q))[:, None]

    return HypersurfacePatch(spec=spec, lift=lift, lower=(-0.3,) * 3, upper=(0.3,) * 3, name="null-slice")


def non_hopf_patch() -> HypersurfacePatch:
    """A generic graph hypersurface in CP2 through the standard point."""
    spec = CP2
    e = np.eye(spec.dim)

    def lift(U):
        U = np.atleast_2d(U)
        u0, u1, u2 = U.T
        Z = (
            e[0]
            + np.outer(u0, e[2])
            + np.outer(u1, e[3])
            + np.outer(u2 + 0.8 * u0**2 + 0.5 * u0 * u1, e[4])
            + np.outer(0.6 * u1**2 - 0.4 * u0 * u2, e[5])
        )
        return Z / np.sqrt(spec.inner(Z, Z))[:, None]

    return HypersurfacePatch(spec=spec, lift=lift, lower=(-0.3,) * 3, upper=(0.3,) * 3, name="graph")


def user_lift_factory(spec: SpaceFormSpec) -> HypersurfacePatch:
    """Entry point used by the CLI ``user-lift`` family in tests."""
    return geodesic_sphere_patch(spec, standard_point(spec), 0.7)
