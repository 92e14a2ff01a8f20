"""Tubes over J-invariant cores and the focal map of a Hopf hypersurface.

Forward direction: a point or a totally geodesic linear core, a radius
``theta`` and a chart give a hypersurface patch
``u -> co'(theta) g(s) + si'(theta) w(t)`` where ``g`` runs over the core
and ``w`` over the unit normals of the core.

Backward direction: from a Hopf patch with Hopf curvature ``a`` the focal
radius solves ``a = 2 co'(2 theta) / si'(2 theta)`` and the focal lift
``co'(theta) F~ + si'(theta) N~`` collapses the hypersurface onto its core.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .algebra import coe_prime_inverse, eps_trig
from .ambient import SpaceFormSpec, tangent_split
from .errors import CoreNotInvariant, DegenerateChart, InKernel, InvalidRadius
from .hypersurface import FrameData, HypersurfacePatch, frame_at, frames_at, horizontal_basis

RANK_TOL = 1e-5
KERNEL_TOL = 1e-5


# --------------------------------------------------------------------------
# linear algebra on J-invariant subspaces


def _euclid_rows(span: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    span = np.atleast_2d(np.asarray(span, dtype=float))
    _, s, vt = np.linalg.svd(span, full_matrices=False)
    return vt[s > tol * max(1.0, s.max(initial=0.0))]


def j_adapted_basis(spec: SpaceFormSpec, span, first_sign: Optional[int] = None) -> np.ndarray:
    """Rows ``b0, J b0, b1, J b1, ...`` with ``<b_k, b_l> = +-delta_kl`` spanning ``span``.

    ``first_sign`` requests the sign of ``<b0, b0>``.
    """
    rest = _euclid_rows(span)
    out = []
    want = first_sign
    while rest.shape[0]:
        r = rest.shape[0]
        cands = [rest[i] for i in range(r)]
        cands += [rest[i] + rest[j] for i in range(r) for j in range(i + 1, r)]
        cands += [rest[i] - rest[j] for i in range(r) for j in range(i + 1, r)]
        cands = np.array(cands)
        q = spec.inner(cands, cands) / np.sum(cands**2, axis=-1)
        if want is not None:
            q = np.where(np.sign(q) == want, q, 0.0)
        k = int(np.argmax(np.abs(q)))
        if abs(q[k]) < 1e-8:
            raise DegenerateChart(
                "subspace has no vector of the required causal type"
                if want is not None
                else "restricted form is degenerate"
            )
        b = cands[k] / math.sqrt(abs(float(spec.inner(cands[k], cands[k]))))
        jb = spec.J(b)
        out += [b, jb]
        pair = np.array([b, jb])
        nrm = spec.inner(pair, pair)
        coef = spec.inner(rest[:, None, :], pair[None]) / nrm
        rest = _euclid_rows(rest - coef @ pair) if r > 2 else rest[:0]
        want = None
    return np.array(out)


def orthogonal_complement(spec: SpaceFormSpec, rows) -> np.ndarray:
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    _, s, vt = np.linalg.svd(rows * spec.form.signs)
    rank = int(np.sum(s > 1e-10 * s.max()))
    return vt[rank:]


@dataclass(frozen=True)
class CoreSpec:
    """J-invariant non-degenerate subspace V of real dimension 2k+2 (k=0 is a point core)."""

    spec: SpaceFormSpec
    span: np.ndarray

    def __post_init__(self):
        rows = _euclid_rows(self.span)
        if rows.shape[0] % 2 or rows.shape[0] < 2 or rows.shape[0] >= self.spec.dim:
            raise CoreNotInvariant("core must have even real dimension between 2 and 2n")
        J = self.spec.J(rows)
        leak = J - (J @ rows.T) @ rows
        if np.max(np.abs(leak)) > 1e-9:
            raise CoreNotInvariant("core subspace is not J-invariant")
        gram = self.spec.inner(rows[:, None, :], rows[None, :, :])
        if abs(np.linalg.det(gram)) < 1e-10:
            raise CoreNotInvariant("form restricted to the core is degenerate")
        object.__setattr__(self, "span", rows)

    @property
    def kind(self) -> str:
        return "point" if self.span.shape[0] == 2 else "linear-subspace"

    @property
    def complex_dim(self) -> int:
        return self.span.shape[0] // 2 - 1

    @classmethod
    def coordinate(cls, spec: SpaceFormSpec, slots) -> "CoreSpec":
        """Core spanned by the given complex coordinate slots (0-based)."""
        rows = []
        for j in slots:
            for part in (0, 1):
                e = np.zeros(spec.dim)
                e[2 * j + part] = 1.0
                rows.append(e)
        return cls(spec, np.array(rows))

    @classmethod
    def point(cls, spec: SpaceFormSpec, center) -> "CoreSpec":
        center = np.asarray(center, dtype=float)
        return cls(spec, np.array([center, spec.J(center)]))


@dataclass(frozen=True)
class TubePatch(HypersurfacePatch):
    """Tube patch with the construction data kept for round-trip checks."""

    theta: float = 0.0
    core_dim: int = 0
    core_lift: Optional[Callable] = None
    normal_lift: Optional[Callable] = None


def _check_radius(spec: SpaceFormSpec, theta: float) -> None:
    if spec.eps_prime == 1 and not 0 < theta < math.pi / 2:
        raise InvalidRadius(f"circular tubes need 0 < theta < pi/2, got {theta!r}")
    if spec.eps_prime == -1 and not theta > 0:
        raise InvalidRadius(f"hyperbolic tubes need theta > 0, got {theta!r}")


def _build_tube(spec, b0, core_dirs, f0, normal_dirs, theta, radius, fd_step, point_step, name, core_dim):
    _check_radius(spec, theta)
    co, si = eps_trig(spec.eps_prime, theta)
    ks = core_dirs.shape[0]
    sig_c = spec.inner(core_dirs, core_dirs) if ks else np.zeros(0)
    sig_n = spec.inner(normal_dirs, normal_dirs)
    d = ks + normal_dirs.shape[0]
    if d != 2 * spec.n - 1:
        raise DegenerateChart(f"chart dimension {d} != {2 * spec.n - 1}")
    # the box must stay inside both graph charts
    if radius**2 * np.sum(sig_n > 0) >= 1 or radius**2 * np.sum(sig_c == -spec.level) >= 1:
        raise DegenerateChart(f"chart radius {radius} reaches the boundary of the unit locus")

    def core_lift(S):
        S = np.atleast_2d(S)
        zc = b0 + S @ core_dirs if ks else np.broadcast_to(b0, (S.shape[0], b0.size))
        q = spec.inner(zc, zc)
        return zc / np.sqrt(np.abs(q))[:, None]

    def unit_normal(T):
        r = np.sqrt(1.0 - np.sum(sig_n * T**2, axis=-1))
        return T @ normal_dirs + r[:, None] * f0

    def lift(U):
        U = np.atleast_2d(U)
        return co * core_lift(U[:, :ks]) + si * unit_normal(U[:, ks:])

    def jacobian(U):
        U = np.atleast_2d(U)
        m = U.shape[0]
        out = np.empty((m, d, spec.dim))
        if ks:
            S = U[:, :ks]
            zc = b0 + S @ core_dirs
            q = spec.inner(zc, zc)
            aq = np.abs(q)
            dots = spec.inner(zc[:, None, :], core_dirs[None])  # (m, ks)
            dg = core_dirs[None] / np.sqrt(aq)[:, None, None] - (
                np.sign(q)[:, None, None] * dots[..., None] * zc[:, None, :] / aq[:, None, None] ** 1.5
            )
            out[:, :ks] = co * dg
        T = U[:, ks:]
        r = np.sqrt(1.0 - np.sum(sig_n * T**2, axis=-1))
        dw = normal_dirs[None] - (sig_n * T / r[:, None])[..., None] * f0
        out[:, ks:] = si * dw
        return out

    def normal_lift(U):
        U = np.atleast_2d(U)
        return spec.eps_prime * si * core_lift(U[:, :ks]) - co * unit_normal(U[:, ks:])

    patch = TubePatch(
        spec=spec,
        lift=lift,
        lower=(-radius,) * d,
        upper=(radius,) * d,
        fd_step=fd_step,
        jacobian=jacobian,
        point_step=point_step,
        name=name,
        theta=float(theta),
        core_dim=core_dim,
        core_lift=lambda U: core_lift(np.atleast_2d(U)[:, :ks]),
        normal_lift=normal_lift,
    )
    # orient the normal towards the core so that the focal lift at +theta lands on it
    u0 = np.zeros((1, d))
    n0 = frames_at(patch, u0, with_shape=False).normal[0]
    sign = 1 if spec.inner(n0, normal_lift(u0)[0]) > 0 else -1
    return TubePatch(**{**patch.__dict__, "normal_sign": sign})


def tube_over_linear_core(
    spec: SpaceFormSpec,
    core: CoreSpec,
    theta: float,
    *,
    radius: float = 0.4,
    fd_step: float = 1e-3,
    point_step: float = 1e-2,
) -> TubePatch:
    """Tube of radius ``theta`` over the totally geodesic core ``P(V)``.

    Chart: ``s`` (2k coordinates) is a graph chart of the core through its
    first basis vector, ``t`` (2(n-k)-1 coordinates) a graph chart of the
    unit locus in the orthogonal complement of V.
    """
    if core.spec != spec:
        raise CoreNotInvariant("core was built for a different space form")
    vb = j_adapted_basis(spec, core.span, first_sign=spec.level)
    wb = j_adapted_basis(spec, orthogonal_complement(spec, core.span), first_sign=1)
    return _build_tube(
        spec, vb[0], vb[2:], wb[0], wb[1:], theta, radius, fd_step, point_step,
        f"tube(k={core.complex_dim}, theta={theta:g}) in {spec.label()}", core.complex_dim,
    )


def geodesic_sphere_patch(
    spec: SpaceFormSpec,
    center,
    theta: float,
    normal_seed=None,
    *,
    radius: float = 0.4,
    fd_step: float = 1e-3,
    point_step: float = 1e-2,
) -> TubePatch:
    """Geodesic sphere of radius ``theta`` about ``center`` (a tube over a point).

    ``normal_seed`` is a pseudo-orthonormal basis (rows) of the horizontal
    space at ``center``; one of its vectors must be spacelike.
    """
    center = np.asarray(center, dtype=float)
    if abs(spec.inner(center, center) - spec.level) > 1e-9:
        raise ValueError("center must lie on the quadric")
    if normal_seed is None:
        seed = j_adapted_basis(spec, orthogonal_complement(spec, [center, spec.J(center)]), first_sign=1)
    else:
        seed = np.atleast_2d(np.asarray(normal_seed, dtype=float))
        if seed.shape != (2 * spec.n, spec.dim):
            raise ValueError(f"normal_seed must hold {2 * spec.n} vectors")
        gram = spec.inner(seed[:, None], seed[None])
        if np.max(np.abs(gram - np.diag(np.sign(np.diag(gram))))) > 1e-9 or np.any(np.abs(np.diag(gram)) < 0.5):
            raise ValueError("normal_seed is not pseudo-orthonormal")
        hor = np.abs(spec.inner(seed, center)) + np.abs(spec.inner(seed, spec.J(center)))
        if np.max(hor) > 1e-9:
            raise ValueError("normal_seed is not horizontal at center")
        order = np.argsort(-np.diag(gram), kind="stable")
        seed = seed[order]
        if gram[order[0], order[0]] < 0:
            raise DegenerateChart("horizontal space has no spacelike direction")
    return _build_tube(
        spec, center, np.zeros((0, spec.dim)), seed[0], seed[1:], theta, radius,
        fd_step, point_step, f"sphere(theta={theta:g}) in {spec.label()}", 0,
    )


# --------------------------------------------------------------------------
# focal map


def focal_radius(a: float, eps_prime: int) -> float:
    """Radius ``theta`` with ``2 co'(2 theta)/si'(2 theta) = a``."""
    return coe_prime_inverse(eps_prime, a)


def hopf_law(theta: float, eps_prime: int) -> float:
    """Hopf curvature ``2 co'(2 theta)/si'(2 theta)`` of a tube of radius ``theta``."""
    co, si = eps_trig(eps_prime, 2 * theta)
    return 2 * co / si


@dataclass
class FocalData:
    theta: float
    u: np.ndarray
    point: np.ndarray
    differential: np.ndarray
    xi_image: np.ndarray
    numeric_rank: int
    kernel_dim: int
    rank_formula: int
    singular_values: np.ndarray
    quadric_residual: float

    @property
    def rank_warning(self) -> bool:
        """True when ``2n - dim ker`` disagrees with the measured rank."""
        return self.rank_formula != self.numeric_rank


def focal_lift(patch: HypersurfacePatch, theta: float) -> Callable:
    """Batched map ``u -> co'(theta) F~(u) + si'(theta) N~(u)``."""
    co, si = eps_trig(patch.spec.eps_prime, theta)

    def f(U):
        fr = frames_at(patch, U, with_shape=False)
        return co * fr.point + si * fr.normal

    return f


def _focal_parts(patch: HypersurfacePatch, fdata: FrameData, theta: float):
    spec = patch.spec
    co, si = eps_trig(spec.eps_prime, theta)
    f = co * fdata.point + si * fdata.normal
    df = co * fdata.partials + si * fdata.normal_derivs
    return f, df, tangent_split(spec, f, df)[0]


def kernel_dim(fdata: FrameData, theta: float) -> int:
    """Dimension of ``ker(co' Id - si' A)`` on the horizontal subspace ``ker eta``."""
    co, si = eps_trig(fdata.spec.eps_prime, theta)
    B = co * np.eye(fdata.shape.shape[0]) - si * fdata.shape
    H = horizontal_basis(fdata)
    s = np.linalg.svd(B @ H, compute_uv=False)
    scale = max(np.linalg.norm(B, 2), 1e-300)
    return int(np.sum(s < KERNEL_TOL * scale))


def focal_map(patch: HypersurfacePatch, u, theta: float) -> FocalData:
    fdata = frame_at(patch, u)
    f, _, hor = _focal_parts(patch, fdata, theta)
    s = np.linalg.svd(hor, compute_uv=False)
    ref = np.linalg.svd(fdata.frame, compute_uv=False).max()
    rank = int(np.sum(s > RANK_TOL * ref))
    kdim = kernel_dim(fdata, theta)
    return FocalData(
        theta=float(theta),
        u=np.asarray(u, dtype=float),
        point=f,
        differential=hor,
        xi_image=fdata.xi @ hor,
        numeric_rank=rank,
        kernel_dim=kdim,
        rank_formula=2 * patch.spec.n - kdim,
        singular_values=s,
        quadric_residual=float(abs(patch.spec.inner(f, f) - patch.spec.level)),
    )


def rank_report(patch: HypersurfacePatch, u, theta: float):
    """``(numeric_rank, kernel_dim)`` of the focal map at ``u``."""
    fm = focal_map(patch, u, theta)
    return fm.numeric_rank, fm.kernel_dim


def j_invariance_check(patch: HypersurfacePatch, u, theta: float, v) -> float:
    """``|J df(v) - df(w)|`` with ``w = B^{-1} phi B v`` and ``B = co' Id - si' A``."""
    spec = patch.spec
    fdata = frame_at(patch, u)
    v = np.asarray(v, dtype=float)
    if abs(float(fdata.eta @ v)) > 1e-6 * (1.0 + np.linalg.norm(v)):
        raise ValueError("probe must be horizontal (eta(v) = 0)")
    co, si = eps_trig(spec.eps_prime, theta)
    B = co * np.eye(v.size) - si * fdata.shape
    Bv = B @ v
    if np.linalg.norm(Bv) < KERNEL_TOL * np.linalg.norm(B, 2) * np.linalg.norm(v):
        raise InKernel("probe lies in the kernel of the focal differential")
    w = np.linalg.solve(B, fdata.phi @ Bv)
    f, _, hor = _focal_parts(patch, fdata, theta)
    dfv = v @ hor
    dfw = w @ hor
    jdfv = tangent_split(spec, f, spec.J(dfv))[0]
    return float(np.linalg.norm(jdfv - dfw))
