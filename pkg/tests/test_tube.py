import math

import numpy as np
import pytest

from hopfsurf.ambient import SpaceFormSpec, fiber_equivalent, standard_point
from hopfsurf.errors import CoreNotInvariant, DegenerateChart, InKernel, InvalidRadius, TubeRadiusUndefined
from hopfsurf.hopf import constancy_scan, hopf_data, horizontal_eigenpairs
from hopfsurf.hypersurface import frame_at
from hopfsurf.tube import (
    CoreSpec,
    focal_lift,
    focal_map,
    focal_radius,
    geodesic_sphere_patch,
    hopf_law,
    j_adapted_basis,
    j_invariance_check,
    kernel_dim,
    rank_report,
    tube_over_linear_core,
)

from support import CP2, CH2, DP2, FAMILIES, FAMILY_TABLE, SAMPLE_POINTS, family, scan_grid

U0 = SAMPLE_POINTS[0]


def test_focal_radius_examples():
    assert focal_radius(2 / math.sqrt(3), 1) == pytest.approx(math.pi / 6, abs=1e-12)
    assert focal_radius(2 / math.tanh(1.0), -1) == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(TubeRadiusUndefined):
        focal_radius(2.0, -1)


def test_hopf_law_values():
    assert hopf_law(0.6, -1) == pytest.approx(2.3990750883, abs=1e-9)
    assert hopf_law(0.5, -1) == pytest.approx(2.6260705710, abs=1e-9)
    for th in (0.05, 0.5, 2.0):
        assert hopf_law(th, -1) > 2


@pytest.mark.parametrize("name", FAMILIES)
def test_round_trip(name):
    patch = family(name)
    spec, theta, slots = FAMILY_TABLE[name]
    a, _ = hopf_data(frame_at(patch, U0))
    assert a == pytest.approx(hopf_law(theta, spec.eps_prime), abs=1e-5)
    th = focal_radius(a, spec.eps_prime)
    assert th == pytest.approx(theta, abs=1e-6)
    core_rank = 0 if slots is None else 2 * (len(slots) - 1)
    for u in SAMPLE_POINTS:
        fm = focal_map(patch, u, th)
        assert fm.numeric_rank == core_rank
        assert fm.numeric_rank % 2 == 0
        assert fm.quadric_residual < 1e-8
        assert np.linalg.norm(fm.xi_image) < 1e-6
        assert fiber_equivalent(spec, fm.point, patch.core_lift(u[None])[0], 1e-7)


def test_sphere_focal_map_collapses():
    fm = focal_map(family("sphere-CP2"), U0, math.pi / 6)
    assert np.max(np.abs(fm.differential)) < 1e-6
    assert fm.kernel_dim == 2 and fm.rank_formula == 4 - 2
    assert fm.rank_warning


def test_tube_rank_report():
    patch = family("tube-CP1")
    assert rank_report(patch, U0, math.pi / 6) == (2, 0)
    fm = focal_map(patch, U0, math.pi / 6)
    assert fm.rank_formula == 4 and fm.rank_warning


def test_focal_map_at_zero_radius():
    patch = family("tube-DP1")
    fm = focal_map(patch, U0, 0.0)
    assert np.array_equal(fm.point, patch.evaluate(U0[None])[0])
    lift = focal_lift(patch, 0.0)
    assert np.allclose(lift(U0[None]), fm.point)


def test_generic_radius_has_trivial_kernel():
    f = frame_at(family("sphere-CP2"), U0)
    assert kernel_dim(f, 0.3) == 0


def test_j_invariance_on_tube_core_directions():
    patch = family("tube-CP1")
    f = frame_at(patch, U0)
    for kappa, X in horizontal_eigenpairs(f):
        assert kappa == pytest.approx(-math.tan(math.pi / 6), abs=1e-7)
        assert j_invariance_check(patch, U0, math.pi / 6, X) < 1e-5


def test_j_invariance_off_focal_radius():
    patch = family("sphere-CH2")
    f = frame_at(patch, U0)
    for _, X in horizontal_eigenpairs(f):
        assert j_invariance_check(patch, U0, 0.3, X) < 1e-5


def test_j_invariance_kernel_probe():
    patch = family("sphere-CP2")
    _, X = horizontal_eigenpairs(frame_at(patch, U0))[0]
    with pytest.raises(InKernel):
        j_invariance_check(patch, U0, math.pi / 6, X)
    with pytest.raises(ValueError):
        j_invariance_check(patch, U0, 0.3, frame_at(patch, U0).xi)


@pytest.mark.parametrize("name", ["tube-CP1", "tube-DP1"])
def test_tube_constancy(name):
    patch = family(name)
    assert constancy_scan(patch, scan_grid(patch)).max_deviation < 1e-5


def test_tube_spectrum_closed_form():
    f = frame_at(family("tube-DP1"), U0)
    ev = np.sort(np.linalg.eigvals(f.shape).real)
    assert ev == pytest.approx([math.tanh(0.6)] * 2 + [2 / math.tanh(1.2)], abs=1e-8)


# --- construction errors -------------------------------------------------


def test_invalid_radius():
    with pytest.raises(InvalidRadius):
        geodesic_sphere_patch(CP2, standard_point(CP2), 2.0)
    with pytest.raises(InvalidRadius):
        geodesic_sphere_patch(DP2, standard_point(DP2), -0.1)
    patch = geodesic_sphere_patch(CH2, standard_point(CH2), 0.05)
    a, _ = hopf_data(frame_at(patch, U0))
    assert a == pytest.approx(2 / math.tanh(0.1), rel=1e-8)


def test_core_validation():
    with pytest.raises(CoreNotInvariant):
        CoreSpec(CP2, np.eye(6)[[0, 2]])
    with pytest.raises(CoreNotInvariant):
        CoreSpec(CP2, np.eye(6)[:3])
    para = SpaceFormSpec.para(2)
    # span of a null slot and its J image carries the zero form
    null = np.array([[1.0, 1, 0, 0, 0, 0], [0, 0, 1, 1, 0, 0]])
    with pytest.raises(CoreNotInvariant):
        CoreSpec(para, np.vstack([null, para.J(null)]))
    core = CoreSpec.coordinate(CP2, [0, 1])
    assert core.kind == "linear-subspace" and core.complex_dim == 1
    assert CoreSpec.point(CP2, standard_point(CP2)).kind == "point"


def test_j_adapted_basis_is_pseudo_orthonormal():
    core = CoreSpec.coordinate(DP2, [0, 1])
    B = j_adapted_basis(DP2, core.span, first_sign=-1)
    G = DP2.inner(B[:, None], B[None])
    assert np.allclose(np.abs(G), np.eye(4), atol=1e-12)
    assert G[0, 0] == pytest.approx(-1)
    assert np.allclose(B[1], DP2.J(B[0]))


def test_normal_seed_validation():
    z = standard_point(CP2)
    with pytest.raises(ValueError):
        geodesic_sphere_patch(CP2, z, 0.5, normal_seed=np.eye(6)[:4])
    seed = np.eye(6)[2:]
    patch = geodesic_sphere_patch(CP2, z, 0.5, normal_seed=seed)
    assert hopf_data(frame_at(patch, U0))[0] == pytest.approx(2 / math.tan(1.0), abs=1e-8)
    with pytest.raises(ValueError):
        geodesic_sphere_patch(CP2, 2 * z, 0.5)


def test_chart_radius_too_large():
    with pytest.raises(DegenerateChart):
        geodesic_sphere_patch(CP2, standard_point(CP2), 0.5, radius=0.7)


def test_core_from_other_space_rejected():
    with pytest.raises(CoreNotInvariant):
        tube_over_linear_core(DP2, CoreSpec.coordinate(CP2, [0, 1]), 0.5)
