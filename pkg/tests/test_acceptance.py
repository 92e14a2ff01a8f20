"""Acceptance suite: one marked group of tests per criterion.

A PASS/FAIL line per criterion is printed in the terminal summary; run
``python3 tests/test_acceptance.py`` or ``pytest tests/test_acceptance.py``.
"""
import json
import math
import sys

import numpy as np
import pytest

from hopfsurf.ambient import holomorphic_sectional
from hopfsurf.cli import main
from hopfsurf.errors import CompanionUndefined, DegenerateMetric, TubeRadiusUndefined
from hopfsurf.hopf import (
    companion_curvature,
    constancy_scan,
    eigenspace_residuals,
    hopf_data,
    hopf_identity_residuals,
    horizontal_eigenpairs,
    phi_invariance_defect,
)
from hopfsurf.hypersurface import (
    codazzi_obstruction,
    connection_residuals,
    contact_residuals,
    frame_at,
    frames_at,
    gauss_codazzi_residuals,
    horizontal_basis,
    umbilic_deviation,
    umbilic_obstruction,
)
from hopfsurf.tube import focal_map, focal_radius, hopf_law, j_invariance_check

from support import (
    FAMILIES,
    FAMILY_TABLE,
    SAMPLE_POINTS,
    SPACES,
    family,
    null_slice_patch,
    random_horizontal,
    random_quadric_point,
    scan_grid,
)

STRUCTURE_FAMILIES = ["sphere-CP2", "sphere-CH2", "sphere-CH2-p2", "sphere-DP2", "tube-CP1"]
CURVATURE_SPACES = ["CP2", "CP2_p1", "CH2", "CH2_p2", "DP2"]
SPHERE_OF = {"CP2": "sphere-CP2", "CP2_p1": "sphere-CP2-p1", "CH2": "sphere-CH2", "CH2_p2": "sphere-CH2-p2", "DP2": "sphere-DP2"}


def c1(f):
    return pytest.mark.criterion(1, "holomorphic curvature 4c and Gauss cross-check")(f)


def c2(f):
    return pytest.mark.criterion(2, "structure equations with O(h^2) convergence")(f)


def c3(f):
    return pytest.mark.criterion(3, "constancy of a and gradient identities")(f)


def c4(f):
    return pytest.mark.criterion(4, "Hopf law, focal round trip, rank, J-invariance")(f)


def c5(f):
    return pytest.mark.criterion(5, "phi-invariant eigenspaces and companion algebra")(f)


def c6(f):
    return pytest.mark.criterion(6, "umbilic and parallel-shape obstructions")(f)


def c7(f):
    return pytest.mark.criterion(7, "error paths and CLI exit codes")(f)


def c8(f):
    return pytest.mark.criterion(8, "byte-identical reports")(f)


# --- 1 -------------------------------------------------------------------


@c1
@pytest.mark.parametrize("name", CURVATURE_SPACES)
def test_holomorphic_curvature(name):
    spec = SPACES[name]
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(1000):
        z = random_quadric_point(spec, rng)
        X = random_horizontal(spec, z, rng)
        worst = max(worst, abs(holomorphic_sectional(spec, X) - 4 * spec.c))
    # closed formula: only roundoff from near-null indefinite samples remains
    assert worst < 1e-11 * abs(4 * spec.c)


@c1
@pytest.mark.parametrize("name", CURVATURE_SPACES)
def test_gauss_cross_check(name):
    rep = gauss_codazzi_residuals(family(SPHERE_OF[name]), SAMPLE_POINTS)
    assert rep.max("gauss") < 1e-3


# --- 2 -------------------------------------------------------------------

FD_LABELS = ("nabla_xi", "nabla_phi", "gauss", "codazzi", "codazzi_xi", "codazzi_xi_xi")


def _fd_residuals(patch):
    rep = gauss_codazzi_residuals(patch, SAMPLE_POINTS, check_stencil=False)
    return rep.merge(connection_residuals(patch, SAMPLE_POINTS))


@c2
@pytest.mark.parametrize("name", STRUCTURE_FAMILIES)
def test_contact_structure(name):
    rep = contact_residuals(frames_at(family(name), SAMPLE_POINTS), n_random=16, seed=11)
    for label in ("eta_xi", "phi_xi", "phi_squared", "metric_compat"):
        assert rep.max(label) < 1e-8, label


@c2
@pytest.mark.parametrize("name", STRUCTURE_FAMILIES)
def test_structure_equations_converge(name):
    patch = family(name)
    full = _fd_residuals(patch)
    half = _fd_residuals(patch.with_step(patch.fd_step / 2))
    for label in FD_LABELS:
        assert full.max(label) < 1e-3, label
        ratio = full.max(label) / half.max(label)
        assert 3 <= ratio <= 5, (label, ratio)


# --- 3 -------------------------------------------------------------------


@c3
@pytest.mark.parametrize("name", FAMILIES)
def test_constancy_scan(name):
    patch = family(name)
    grid = scan_grid(patch)
    assert grid.shape[0] >= 100
    scan = constancy_scan(patch, grid)
    assert scan.n_excluded == 0 and scan.max_deviation < 1e-5


@c3
@pytest.mark.parametrize("name", FAMILIES)
def test_gradient_identities(name):
    rep = hopf_identity_residuals(family(name), SAMPLE_POINTS)
    for label in ("grad_a", "a_phi_quadratic", "xi_a_anticommutator"):
        assert rep.max(label) < 1e-5, label


# --- 4 -------------------------------------------------------------------


@c4
def test_hopf_values_against_law():
    a, _ = hopf_data(frame_at(family("sphere-CP2"), SAMPLE_POINTS[0]))
    assert abs(a - 1.1547005383792515) < 1e-5
    a, _ = hopf_data(frame_at(family("sphere-CH2"), SAMPLE_POINTS[0]))
    assert abs(a - 2.0 / math.tanh(1.0)) < 1e-5


@c4
@pytest.mark.parametrize("name", FAMILIES)
def test_focal_round_trip(name):
    patch = family(name)
    spec, theta, slots = FAMILY_TABLE[name]
    core_rank = 0 if slots is None else 2 * (len(slots) - 1)
    for u in SAMPLE_POINTS:
        a, _ = hopf_data(frame_at(patch, u))
        assert abs(a - hopf_law(theta, spec.eps_prime)) < 1e-5
        th = focal_radius(a, spec.eps_prime)
        assert abs(th - theta) < 1e-6
        fm = focal_map(patch, u, th)
        assert fm.numeric_rank == core_rank and fm.numeric_rank % 2 == 0
        f = frame_at(patch, u)
        for _, X in horizontal_eigenpairs(f):
            if core_rank:
                assert j_invariance_check(patch, u, th, X) < 1e-4


@c4
def test_cp1_tube_rank():
    fm = focal_map(family("tube-CP1"), SAMPLE_POINTS[1], math.pi / 6)
    assert fm.numeric_rank == 2


# --- 5 -------------------------------------------------------------------


@c5
@pytest.mark.parametrize("name", FAMILIES)
def test_eigenpairs(name):
    patch = family(name)
    for u in SAMPLE_POINTS:
        rep = eigenspace_residuals(frame_at(patch, u))
        assert rep.max("phi_invariance") < 1e-5
        assert rep.max("companion") < 1e-4


def _triples(rng, count):
    out = []
    while len(out) < count:
        k, a = rng.uniform(-5, 5, 2)
        ce = rng.choice([1, -1])
        if abs(2 * k - a) > 0.1 and abs(a * a + 4 * ce) > 0.1:
            out.append((k, a, int(ce)))
    return out


@c5
def test_companion_involution():
    for k, a, ce in _triples(np.random.default_rng(7), 1000):
        back = companion_curvature(companion_curvature(k, a, ce), a, ce)
        assert abs(back - k) <= 1e-12 * max(1.0, abs(k))


@c5
def test_fixed_point_iff_zero_defect():
    rng = np.random.default_rng(8)
    for k, a, ce in _triples(rng, 1000):
        gap = companion_curvature(k, a, ce) - k
        defect = phi_invariance_defect(k, a, ce)
        assert abs(gap * (2 * k - a) + 2 * defect) <= 1e-12 * (1 + k * k + abs(a * k))
    for _ in range(1000):
        a = rng.uniform(-5, 5)
        ce = int(rng.choice([1, -1]))
        disc = a * a + 4 * ce
        if disc <= 0.1:
            continue
        k = 0.5 * (a + rng.choice([1, -1]) * math.sqrt(disc))
        assert abs(phi_invariance_defect(k, a, ce)) <= 1e-12 * (1 + k * k)
        assert abs(companion_curvature(k, a, ce) - k) <= 1e-12 * max(1.0, abs(k))


# --- 6 -------------------------------------------------------------------


@c6
def test_sphere_not_umbilic():
    patch = family("sphere-CP2")
    F = frames_at(patch, scan_grid(patch))
    for k in range(len(F)):
        assert umbilic_deviation(F.at(k)) > 0.28


@c6
@pytest.mark.parametrize("name", FAMILIES)
def test_umbilic_obstruction(name):
    patch = family(name)
    for u in SAMPLE_POINTS:
        f = frame_at(patch, u)
        H = horizontal_basis(f)
        for j in range(H.shape[1]):
            X = H[:, j]
            xx = X @ f.gram @ X
            assert abs(abs(xx) - 1) < 1e-12
            assert abs(umbilic_obstruction(f, X) - patch.spec.level * xx) < 1e-8


@c6
@pytest.mark.parametrize("name", FAMILIES)
def test_shape_operator_not_parallel(name):
    patch = family(name)
    for u in SAMPLE_POINTS:
        H = horizontal_basis(frame_at(patch, u))
        for j in range(H.shape[1]):
            lhs, _, xx = codazzi_obstruction(patch, u, H[:, j])
            assert lhs >= 0.5 * math.sqrt(abs(xx))


# --- 7 -------------------------------------------------------------------


@c7
def test_library_error_paths():
    with pytest.raises(TubeRadiusUndefined):
        focal_radius(2.0, -1)
    with pytest.raises(DegenerateMetric):
        frame_at(null_slice_patch(), np.zeros(3))
    with pytest.raises(CompanionUndefined):
        companion_curvature(1.0, 2.0, 1)


@c7
def test_cli_exit_codes(tmp_path):
    base = {"n": 2, "eps": 1, "c": 1, "family": "geodesic-sphere", "theta": math.pi / 6, "grid": [3]}
    cases = [
        (base, 0),
        ({**base, "grid": [5], "fd_step": 0.05}, 1),
        ({**base, "eps": -1, "theta": 0.6, "focal_a": 2.0}, 2),
        ({**base, "grid": []}, 2),
    ]
    for k, (cfg, code) in enumerate(cases):
        path = tmp_path / f"c{k}.json"
        path.write_text(json.dumps(cfg))
        cmd = "tube" if "focal_a" in cfg else "verify"
        assert main([cmd, "--config", str(path), "--out", str(tmp_path / f"r{k}.json")]) == code


# --- 8 -------------------------------------------------------------------


@c8
def test_verify_is_byte_identical(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 2, "eps": -1, "c": 1, "family": "tube-linear-core", "theta": 0.6, "grid": [3]}))
    outs = [tmp_path / "a.json", tmp_path / "b.json"]
    for out in outs:
        assert main(["verify", "--config", str(cfg), "--out", str(out), "--seed", "3"]) == 0
    assert outs[0].read_bytes() == outs[1].read_bytes()


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
