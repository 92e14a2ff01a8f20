"""Hopf curvature, constancy scans, principal spectra and the identities they obey."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CompanionUndefined, NotHopf
from .hypersurface import (
    FrameData,
    HypersurfacePatch,
    ResidualReport,
    _as_points,
    _field_derivs,
    frames_at,
    hopf_value,
    horizontal_basis,
)

CLUSTER_TOL = 1e-6
COMPANION_GUARD = 1e-10


def defect_threshold(a) -> np.ndarray:
    return 1e-6 * (1.0 + np.abs(a))


def modulus_norm(G, v) -> np.ndarray:
    """``sqrt(v^T |G| v)`` with ``|G|`` the positive modulus of the Gram matrix.

    Agrees with the metric norm when G is definite and stays a genuine norm
    when it is not.
    """
    lam, Q = np.linalg.eigh(G)
    w = np.einsum("...ji,...j->...i", Q, v)
    return np.sqrt(np.einsum("...i,...i->...", np.abs(lam), w * w))


def hopf_data(fdata: FrameData):
    """``(a, defect)`` with ``a = eps <A xi, xi>`` and ``defect = |A xi - a xi|``."""
    a = hopf_value(fdata)
    Axi = np.einsum("...ij,...j->...i", fdata.shape, fdata.xi)
    r = Axi - np.asarray(a)[..., None] * fdata.xi
    defect = modulus_norm(fdata.gram, r)
    if np.ndim(a) == 0:
        return float(a), float(defect)
    return a, defect


@dataclass
class ConstancyScan:
    mean_a: float
    max_deviation: float
    n_points: int
    n_excluded: int
    values: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "mean_a": self.mean_a,
            "max_deviation": self.max_deviation,
            "n_points": self.n_points,
            "n_excluded": self.n_excluded,
        }


def constancy_scan(patch: HypersurfacePatch, grid) -> ConstancyScan:
    """Mean and spread of the Hopf curvature over chart points where the patch is Hopf."""
    U = np.atleast_2d(np.asarray(grid, dtype=float))
    if U.size == 0:
        raise ValueError("constancy scan needs at least one grid point")
    a, defect = hopf_data(frames_at(patch, U))
    a, defect = np.atleast_1d(a), np.atleast_1d(defect)
    keep = defect <= defect_threshold(a)
    excluded = int(np.sum(~keep))
    if excluded > 0.1 * U.shape[0]:
        raise NotHopf(f"{excluded} of {U.shape[0]} grid points exceed the Hopf defect threshold")
    good = a[keep]
    mean = float(np.mean(good))
    return ConstancyScan(mean, float(np.max(np.abs(good - mean))), U.shape[0], excluded, a)


# --------------------------------------------------------------------------
# spectrum


@dataclass(frozen=True)
class EigenCluster:
    value: complex
    multiplicity: int
    classification: str  # "real", "complex-pair" or "defective-flag"
    geometric_multiplicity: int

    def to_dict(self) -> dict:
        return {
            "value": [float(self.value.real), float(self.value.imag)],
            "multiplicity": self.multiplicity,
            "classification": self.classification,
        }


@dataclass
class SpectrumReport:
    eigenvalues: list
    hopf_value: float
    hopf_defect: float

    @property
    def total_multiplicity(self) -> int:
        return sum(e.multiplicity for e in self.eigenvalues)

    def real_values(self) -> list:
        return [e.value.real for e in self.eigenvalues if e.classification != "complex-pair"]

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [e.to_dict() for e in self.eigenvalues],
            "hopf_value": self.hopf_value,
            "hopf_defect": self.hopf_defect,
        }


def _cluster(values, tol: float = CLUSTER_TOL):
    groups = []
    for v in sorted(values, key=lambda z: (z.real, z.imag)):
        for g in groups:
            if abs(v - g[0]) <= tol * max(1.0, abs(g[0])):
                g.append(v)
                break
        else:
            groups.append([v])
    return groups


def principal_spectrum(fdata: FrameData) -> SpectrumReport:
    """Eigenvalues of the shape operator, clustered and classified."""
    A = fdata.shape
    d = A.shape[0]
    scale = max(1.0, np.linalg.norm(A, 2))
    clusters = []
    for g in _cluster(np.linalg.eigvals(A)):
        k = len(g)
        mean = complex(np.mean(g))
        if abs(mean.imag) > CLUSTER_TOL * max(1.0, abs(mean)):
            clusters.append(EigenCluster(mean, k, "complex-pair", k))
            continue
        kappa = mean.real
        s = np.linalg.svd(A - kappa * np.eye(d), compute_uv=False)
        geo = int(np.sum(s < 1e-5 * scale))
        kind = "real" if geo >= k else "defective-flag"
        clusters.append(EigenCluster(complex(kappa, 0.0), k, kind, geo))
    a, defect = hopf_data(fdata)
    return SpectrumReport(clusters, a, defect)


def horizontal_eigenpairs(fdata: FrameData):
    """Real eigenpairs ``(kappa, X)`` of A restricted to ``ker eta``.

    X are coordinate columns with unit Euclidean length.
    """
    H = horizontal_basis(fdata)
    Ah = np.linalg.lstsq(H, fdata.shape @ H, rcond=None)[0]
    lam, V = np.linalg.eig(Ah)
    out = []
    for k in range(lam.size):
        if abs(lam[k].imag) > CLUSTER_TOL * max(1.0, abs(lam[k])):
            continue
        X = H @ V[:, k].real
        out.append((float(lam[k].real), X / np.linalg.norm(X)))
    return out


# --------------------------------------------------------------------------
# algebraic identities


def companion_curvature(kappa: float, a: float, c_eps: int) -> float:
    """``(kappa a + 2 c eps) / (2 kappa - a)``: the principal curvature of ``phi X``."""
    den = 2.0 * kappa - a
    if abs(den) <= COMPANION_GUARD:
        raise CompanionUndefined(f"2*kappa - a = {den!r} vanishes")
    return (kappa * a + 2.0 * c_eps) / den


def phi_invariance_defect(kappa: float, a: float, c_eps: int) -> float:
    """``kappa^2 - a kappa - c eps``; zero exactly when the eigenspace is phi-invariant."""
    return kappa * kappa - a * kappa - c_eps


def eigenspace_residuals(fdata: FrameData) -> ResidualReport:
    """Per real horizontal eigenpair: the quadratic defect and ``|A phi X - kappa_bar phi X|``."""
    a, _ = hopf_data(fdata)
    ce = fdata.spec.level
    rep = ResidualReport()
    for kappa, X in horizontal_eigenpairs(fdata):
        rep.add("phi_invariance", phi_invariance_defect(kappa, a, ce))
        pX = fdata.phi @ X
        rep.add("companion", fdata.shape @ pX - companion_curvature(kappa, a, ce) * pX)
    return rep


def hopf_identity_residuals(patch: HypersurfacePatch, u) -> ResidualReport:
    """Gradient of the Hopf curvature, the quadratic A-phi identity, and ``(xi.a)(phi A + A phi)``."""
    h = patch.fd_step
    U = _as_points(patch, u, patch.residual_reach())
    a, defect = hopf_data(frames_at(patch, U))
    if np.any(np.atleast_1d(defect) > defect_threshold(a)):
        raise NotHopf("patch is not Hopf at the requested point")
    center, _, _, _, da = _field_derivs(patch, U, h)
    return _hopf_identities_from(center, da)


def _hopf_identities_from(center: FrameData, da) -> ResidualReport:
    eps, ce = int(center.spec.eps), center.spec.level
    A, phi, xi, G = center.shape, center.phi, center.xi, center.gram
    a = hopf_value(center)
    rep = ResidualReport()
    grad = np.linalg.solve(G, da[..., None])[..., 0]
    xa = np.einsum("...i,...i->...", da, xi)
    rep.add("grad_a", grad - eps * xa[..., None] * xi)
    anti = phi @ A + A @ phi
    a_ = np.asarray(a)[..., None, None]
    rep.add("a_phi_quadratic", A @ phi @ A - 0.5 * a_ * anti - ce * phi)
    rep.add("xi_a_anticommutator", np.abs(xa) * np.linalg.norm(anti, axis=(-2, -1)))
    return rep

