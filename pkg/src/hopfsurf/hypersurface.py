"""Real hypersurfaces given by lifted immersions into the hyperquadric.

A patch is a chart box ``U`` in R^{2n-1} with a map ``u -> F~(u)`` onto the
quadric. Tangent vectors of the hypersurface are the horizontal parts of
the chart partials; everything else (normal, structure vector, phi, eta,
shape operator) is expressed in the coordinate frame ``d/du_i``.

Pointwise quantities use a high-order central stencil with step
``patch.point_step``. Derivatives of those fields that enter the structure
equation checks use plain second-order central differences with step
``patch.fd_step`` so that the reported residuals carry a clean O(h^2)
truncation signature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from . import fd
from .ambient import SpaceFormSpec
from .errors import (
    DegenerateChart,
    DegenerateMetric,
    GaugeDiscontinuity,
    NormalNotSpacelike,
    NullProbe,
    StencilTooCoarse,
)

POINT_ORDER = 8
DEGENERACY_TOL = 1e-8


@dataclass(frozen=True)
class HypersurfacePatch:
    """Chart box ``[lower, upper]`` and a batched lift ``(m, 2n-1) -> (m, 2n+2)``.

    ``jacobian``, when given, maps ``(m, 2n-1) -> (m, 2n-1, 2n+2)`` and
    replaces finite-difference partials of the lift.
    """

    spec: SpaceFormSpec
    lift: Callable[[np.ndarray], np.ndarray]
    lower: tuple
    upper: tuple
    normal_sign: int = 1
    fd_step: float = 1e-3
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    point_step: float = 1e-2
    name: str = "patch"

    def __post_init__(self):
        lo = tuple(float(x) for x in self.lower)
        hi = tuple(float(x) for x in self.upper)
        if len(lo) != self.dim or len(hi) != self.dim:
            raise ValueError(f"chart box must have dimension {self.dim}")
        if any(a >= b for a, b in zip(lo, hi)):
            raise ValueError("chart box must have lower < upper")
        if self.normal_sign not in (1, -1):
            raise ValueError("normal_sign must be +1 or -1")
        if not 0 < self.fd_step:
            raise ValueError("fd_step must be positive")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return 2 * self.spec.n - 1

    @property
    def base_point(self) -> np.ndarray:
        return 0.5 * (np.asarray(self.lower) + np.asarray(self.upper))

    def with_step(self, fd_step: float) -> "HypersurfacePatch":
        return replace(self, fd_step=fd_step)

    def evaluate(self, U) -> np.ndarray:
        U = np.atleast_2d(np.asarray(U, dtype=float))
        out = np.asarray(self.lift(U), dtype=float)
        if out.shape != (U.shape[0], self.spec.dim):
            # scalar lift: evaluate pointwise
            out = np.array([np.asarray(self.lift(u), dtype=float) for u in U])
        return out

    def partials(self, U) -> np.ndarray:
        U = np.atleast_2d(np.asarray(U, dtype=float))
        if self.jacobian is not None:
            return np.asarray(self.jacobian(U), dtype=float)
        return fd.partials(self.evaluate, U, self.point_step, POINT_ORDER)

    def inside(self, U, margin: float = 0.0) -> bool:
        U = np.atleast_2d(U)
        lo = np.asarray(self.lower) + margin
        hi = np.asarray(self.upper) - margin
        return bool(np.all(U >= lo) and np.all(U <= hi))

    def grid(self, counts, margin: float) -> np.ndarray:
        """Tensor grid with ``counts[i]`` samples per axis, kept ``margin`` away from the box."""
        counts = list(counts)
        if len(counts) == 1:
            counts = counts * self.dim
        if len(counts) != self.dim or any(int(k) < 1 for k in counts):
            raise ValueError(f"grid needs {self.dim} positive counts, got {counts}")
        axes = []
        for k, a, b in zip(counts, self.lower, self.upper):
            a, b = a + margin, b - margin
            if a > b:
                raise ValueError("grid margin exceeds the chart box")
            axes.append(np.array([0.5 * (a + b)]) if k == 1 else np.linspace(a, b, int(k)))
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=-1)

    def residual_reach(self) -> float:
        """Chart distance touched by the residual stencils around a point."""
        return 2.0 * self.fd_step + 4.0 * self.point_step * (1 + (self.jacobian is None))


@dataclass
class FrameData:
    """Per-point frame bundle; arrays may carry a leading batch axis.

    Matrices act on coordinate columns: ``shape[:, i]`` are the coordinates
    of ``A d/du_i``; ``shape_bilinear = G @ shape``.
    """

    spec: SpaceFormSpec
    u: np.ndarray
    point: np.ndarray
    partials: np.ndarray
    frame: np.ndarray
    vertical: np.ndarray
    gram: np.ndarray
    normal: np.ndarray
    xi: np.ndarray
    eta: np.ndarray
    phi: np.ndarray
    shape: Optional[np.ndarray] = None
    shape_bilinear: Optional[np.ndarray] = None
    normal_derivs: Optional[np.ndarray] = None

    @property
    def batched(self) -> bool:
        return self.u.ndim == 2

    def __len__(self):
        return self.u.shape[0] if self.batched else 1

    def at(self, k) -> "FrameData":
        """Slice of a batched FrameData (an int drops the batch axis)."""
        if not self.batched:
            return self
        vals = {}
        for name in self.__dataclass_fields__:
            v = getattr(self, name)
            vals[name] = v[k] if isinstance(v, np.ndarray) else v
        return FrameData(**vals)

    def with_shape(self, A) -> "FrameData":
        """Copy with the shape operator replaced (for synthetic checks)."""
        A = np.asarray(A, dtype=float)
        return replace(self, shape=A, shape_bilinear=self.gram @ A)


def _solve(G, B):
    return np.linalg.solve(G, B)


def _frames(patch: HypersurfacePatch, U: np.ndarray, with_shape: bool) -> FrameData:
    spec = patch.spec
    S = spec.form.signs
    U = np.atleast_2d(np.asarray(U, dtype=float))
    m, d = U.shape
    Z = patch.evaluate(U)
    off = np.abs(spec.inner(Z, Z) - spec.level)
    if np.any(off > 1e-9):
        raise ValueError(f"lift leaves the quadric by {off.max():.3g}")
    P = patch.partials(U)
    JZ = spec.J(Z)
    vert = spec.c * np.einsum("mid,d,md->mi", P, S, JZ)
    rad = spec.level * np.einsum("mid,d,md->mi", P, S, Z)
    X = P - vert[..., None] * JZ[:, None, :] - rad[..., None] * Z[:, None, :]

    xnorm = np.linalg.norm(X, axis=-1)
    if np.any(np.min(np.linalg.svd(X, compute_uv=False), axis=-1) < 1e-10 * xnorm.max(axis=-1)):
        raise DegenerateChart("horizontal chart partials are linearly dependent")
    G = np.einsum("mid,d,mjd->mij", X, S, X)
    detG = np.linalg.det(G)
    bad = np.abs(detG) < DEGENERACY_TOL * np.prod(xnorm**2, axis=-1)
    if np.any(bad):
        k = int(np.argmax(bad))
        raise DegenerateMetric(
            f"induced metric is degenerate at u={U[k].tolist()} (det G = {detG[k]:.3g})"
        )

    # unit normal: the horizontal direction orthogonal to every chart partial
    rows = np.concatenate([P, Z[:, None, :], JZ[:, None, :]], axis=1) * S
    N = np.linalg.svd(rows)[2][:, -1, :]
    orient = np.sign(np.linalg.det(np.concatenate([P, N[:, None], Z[:, None], JZ[:, None]], axis=1)))
    N = N * (orient * patch.normal_sign)[:, None]
    nn = spec.inner(N, N)
    if np.any(np.abs(nn) < 1e-12):
        raise DegenerateMetric("normal direction is null")
    if np.any(nn < 0):
        flipped = SpaceFormSpec(n=spec.n, eps=spec.eps, c=-spec.c, p=spec.p)
        raise NormalNotSpacelike(
            "unit normal is timelike; reversing the metric (suggested spec "
            f"{flipped.to_dict()}) would make it spacelike",
            suggested_spec=flipped,
        )
    N = N / np.sqrt(nn)[:, None]

    eps = int(spec.eps)
    JN = spec.J(N)
    JX = spec.J(X)
    xi = _solve(G, np.einsum("mid,d,md->mi", X, S, -eps * JN)[..., None])[..., 0]
    eta = eps * np.einsum("mij,mj->mi", G, xi)
    phi = _solve(G, np.einsum("mid,d,mjd->mij", X, S, JX))

    fdata = FrameData(spec, U, Z, P, X, vert, G, N, xi, eta, phi)
    if with_shape:
        _attach_shape(patch, fdata)
    return fdata


def _attach_shape(patch: HypersurfacePatch, fdata: FrameData) -> None:
    """Weingarten: lift of A X_i is ``-hor(dN/du_i) + v_i J N``.

    ``v_i`` is the vertical component of ``dF~/du_i``; the normal field is
    the horizontal lift along a non-horizontal curve, so its derivative picks
    up ``v_i`` times the fiber derivative ``J N`` which must be removed.
    """
    spec = patch.spec
    S = spec.form.signs
    U = fdata.u
    m, d = U.shape
    h = patch.point_step
    pts = fd.stencil_points(U, h, POINT_ORDER)
    Nst = _frames(patch, pts.reshape(-1, d), with_shape=False).normal
    Nst = Nst.reshape(pts.shape[:3] + (spec.dim,))
    align = np.einsum("mikd,d,md->mik", Nst, S, fdata.normal)
    if np.any(align < 0.5):
        raise GaugeDiscontinuity("unit normal flips or jumps across the stencil")
    dN = fd.combine(Nst, h, POINT_ORDER)  # (m, d, D)

    Z = fdata.point
    JZ = spec.J(Z)
    JN = spec.J(fdata.normal)
    hor = (
        dN
        - (spec.level * np.einsum("mid,d,md->mi", dN, S, Z))[..., None] * Z[:, None]
        - (spec.c * np.einsum("mid,d,md->mi", dN, S, JZ))[..., None] * JZ[:, None]
    )
    AX = -hor + fdata.vertical[..., None] * JN[:, None, :]
    B = np.einsum("mkd,d,mid->mki", fdata.frame, S, AX)
    fdata.shape = _solve(fdata.gram, B)
    fdata.shape_bilinear = fdata.gram @ fdata.shape
    fdata.normal_derivs = dN


def frames_at(patch: HypersurfacePatch, U, with_shape: bool = True) -> FrameData:
    """Batched ``frame_at`` over chart points ``U`` of shape ``(m, 2n-1)``."""
    U = np.atleast_2d(np.asarray(U, dtype=float))
    reach = 4.0 * patch.point_step * ((patch.jacobian is None) + with_shape)
    if not patch.inside(U, reach):
        raise ValueError("chart point too close to the boundary of the chart box")
    return _frames(patch, U, with_shape)


def frame_at(patch: HypersurfacePatch, u) -> FrameData:
    """Frame, metric, normal, contact structure and shape operator at ``u``."""
    return frames_at(patch, np.asarray(u, dtype=float)[None, :]).at(0)


def shape_operator(patch: HypersurfacePatch, u) -> np.ndarray:
    return frame_at(patch, u).shape


def shape_operator_hessian(patch: HypersurfacePatch, u) -> np.ndarray:
    """Second-fundamental-form route: ``<A X_i, X_j> = <N, F~_ij> + v_i<JN, X_j> + v_j<JN, X_i>``.

    Independent of the Weingarten route; uses second partials of the lift.
    """
    fdata = frames_at(patch, np.asarray(u, dtype=float)[None, :], with_shape=False)
    spec = patch.spec
    S = spec.form.signs
    hess = fd.partials(patch.partials, fdata.u, patch.point_step, POINT_ORDER)[0]
    N = fdata.normal[0]
    JN = spec.J(N)
    v = fdata.vertical[0]
    jnx = np.einsum("id,d,d->i", fdata.frame[0], S, JN)
    B = np.einsum("ijd,d,d->ij", hess, S, N) + np.outer(v, jnx) + np.outer(jnx, v)
    B = 0.5 * (B + B.T)
    return np.linalg.solve(fdata.gram[0], B)


# --------------------------------------------------------------------------
# residual bookkeeping


@dataclass
class ResidualStat:
    max_abs: float = 0.0
    sum_abs: float = 0.0
    sample_count: int = 0

    @property
    def mean_abs(self) -> float:
        return self.sum_abs / self.sample_count if self.sample_count else 0.0

    def merged(self, other: "ResidualStat") -> "ResidualStat":
        return ResidualStat(
            max(self.max_abs, other.max_abs),
            self.sum_abs + other.sum_abs,
            self.sample_count + other.sample_count,
        )


@dataclass
class ResidualReport:
    entries: dict = field(default_factory=dict)

    def add(self, label: str, values) -> None:
        a = np.abs(np.asarray(values, dtype=float)).ravel()
        if a.size == 0:
            return
        stat = ResidualStat(float(a.max()), float(a.sum()), int(a.size))
        old = self.entries.get(label)
        self.entries[label] = stat if old is None else old.merged(stat)

    def merge(self, other: "ResidualReport") -> "ResidualReport":
        out = ResidualReport(dict(self.entries))
        for label, stat in other.entries.items():
            old = out.entries.get(label)
            out.entries[label] = stat if old is None else old.merged(stat)
        return out

    def __getitem__(self, label) -> ResidualStat:
        return self.entries[label]

    def __contains__(self, label) -> bool:
        return label in self.entries

    def max(self, label) -> float:
        return self.entries[label].max_abs

    def labels(self):
        return list(self.entries)

    def to_dict(self) -> dict:
        return {
            k: {"max_abs": s.max_abs, "mean_abs": s.mean_abs, "sample_count": s.sample_count}
            for k, s in self.entries.items()
        }


# --------------------------------------------------------------------------
# pointwise identities


def contact_residuals(fdata: FrameData, n_random: int = 4, seed: int = 0) -> ResidualReport:
    """Residuals of eta(xi)=1, phi xi=0, phi^2 = -eps Id + eps eta xi, and the metric compatibility."""
    eps = int(fdata.spec.eps)
    G, xi, eta, phi = fdata.gram, fdata.xi, fdata.eta, fdata.phi
    d = G.shape[-1]
    I = np.eye(d)
    rep = ResidualReport()
    rep.add("eta_xi", np.einsum("...i,...i->...", eta, xi) - 1.0)
    rep.add("phi_xi", np.einsum("...ij,...j->...i", phi, xi))
    rep.add("phi_squared", phi @ phi - (-eps * I + eps * xi[..., :, None] * eta[..., None, :]))
    lhs = np.swapaxes(phi, -1, -2) @ G @ phi
    rep.add("metric_compat", lhs - (eps * G - eta[..., :, None] * eta[..., None, :]))
    if n_random:
        rng = np.random.default_rng(seed)
        V = rng.standard_normal((n_random, d))
        phiV = np.einsum("...ij,rj->...ri", phi, V)
        etaV = np.einsum("...i,ri->...r", eta, V)
        rep.add("phi_squared", np.einsum("...ij,...rj->...ri", phi, phiV) + eps * V - eps * etaV[..., None] * xi[..., None, :])
        gV = np.einsum("...ri,...ij,...rj->...r", phiV, G, phiV)
        rep.add("metric_compat", gV - (eps * np.einsum("ri,...ij,rj->...r", V, G, V) - etaV**2))
    return rep


def hopf_value(fdata: FrameData):
    """``a = eps <A xi, xi>``."""
    eps = int(fdata.spec.eps)
    Axi = np.einsum("...ij,...j->...i", fdata.shape, fdata.xi)
    return eps * np.einsum("...i,...ij,...j->...", Axi, fdata.gram, fdata.xi)


def horizontal_basis(fdata: FrameData) -> np.ndarray:
    """Columns spanning ``ker eta`` with ``<e_k, e_l> = +-delta_kl``."""
    f = fdata.at(0) if fdata.batched else fdata
    eta = f.eta / np.linalg.norm(f.eta)
    H = np.linalg.svd(eta[None, :])[2][1:].T
    lam, Q = np.linalg.eigh(H.T @ f.gram @ H)
    return H @ Q / np.sqrt(np.abs(lam))


def umbilic_deviation(fdata: FrameData) -> float:
    """``min_l |A - l Id|`` with the operator norm taken in a pseudo-orthonormal frame."""
    G = fdata.gram
    lam, Q = np.linalg.eigh(G)
    E = Q / np.sqrt(np.abs(lam))
    Ahat = np.linalg.solve(E, fdata.shape @ E)
    ev = np.linalg.eigvals(Ahat).real
    lo, hi = ev.min() - 1.0, ev.max() + 1.0
    I = np.eye(G.shape[0])

    def norm(l):
        return np.linalg.norm(Ahat - l * I, 2)

    res = minimize_scalar(norm, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    return float(min(res.fun, norm(np.trace(Ahat) / G.shape[0])))


def umbilic_obstruction(fdata: FrameData, X) -> float:
    """``c <phi X, phi X>`` for a horizontal probe; nonzero rules out an umbilic point."""
    X = np.asarray(X, dtype=float)
    G = fdata.gram
    xx = float(X @ G @ X)
    if abs(xx) < 1e-10:
        raise NullProbe("probe is null; the umbilic obstruction is inconclusive")
    if abs(float(fdata.eta @ X)) > 1e-6 * (1.0 + np.linalg.norm(X)):
        raise ValueError("probe must be horizontal (eta(X) = 0)")
    phiX = fdata.phi @ X
    return fdata.spec.c * float(phiX @ G @ phiX)


# --------------------------------------------------------------------------
# derivative-based identities


def _christoffel(patch: HypersurfacePatch, U: np.ndarray, h: float):
    """Christoffel symbols ``Gam[m, l, i, j]`` from central differences of G."""
    m, d = U.shape
    E = h * np.eye(d)
    pts = np.concatenate([U[:, None, :], U[:, None, :] + E, U[:, None, :] - E], axis=1)
    G = _frames(patch, pts.reshape(-1, d), with_shape=False).gram.reshape(m, 2 * d + 1, d, d)
    G0 = G[:, 0]
    dG = (G[:, 1 : d + 1] - G[:, d + 1 :]) / (2 * h)  # dG[m, k, i, j] = d_k G_ij
    T = dG + np.swapaxes(dG, 1, 2) - np.transpose(dG, (0, 2, 3, 1))
    # T[m, i, j, l] = d_i G_jl + d_j G_il - d_l G_ij
    return 0.5 * np.einsum("mlk,mijk->mlij", np.linalg.inv(G0), T), G0


def _riemann(patch: HypersurfacePatch, U: np.ndarray, h: float):
    """``R[m, i, j, k, l]``: component ``l`` of ``R(d_i, d_j) d_k`` by nested central differences."""
    m, d = U.shape
    E = h * np.eye(d)
    pts = np.concatenate([U[:, None, :], U[:, None, :] + E, U[:, None, :] - E], axis=1)
    Gam = _christoffel(patch, pts.reshape(-1, d), h)[0].reshape(m, 2 * d + 1, d, d, d)
    G0 = Gam[:, 0]
    dGam = (Gam[:, 1 : d + 1] - Gam[:, d + 1 :]) / (2 * h)  # dGam[m, i, l, j, k]
    R = (
        np.einsum("miljk->mijkl", dGam)
        - np.einsum("mjlik->mijkl", dGam)
        + np.einsum("mlia,majk->mijkl", G0, G0)
        - np.einsum("mlja,maik->mijkl", G0, G0)
    )
    return R


def _field_derivs(patch: HypersurfacePatch, U: np.ndarray, h: float):
    """Frame data at ``U`` and central differences (step h) of xi, phi, A, a."""
    m, d = U.shape
    E = h * np.eye(d)
    pts = np.concatenate([U[:, None, :], U[:, None, :] + E, U[:, None, :] - E], axis=1)
    F = _frames(patch, pts.reshape(-1, d), with_shape=True)

    def split(arr):
        arr = arr.reshape((m, 2 * d + 1) + arr.shape[1:])
        return arr[:, 0], (arr[:, 1 : d + 1] - arr[:, d + 1 :]) / (2 * h)

    center = F.at(np.arange(m) * (2 * d + 1))
    _, dxi = split(F.xi)
    _, dphi = split(F.phi)
    _, dA = split(F.shape)
    _, da = split(hopf_value(F))
    return center, dxi, dphi, dA, da


def _codazzi_parts(center: FrameData, Gam, dA):
    """``nablaA[m, i, l, j] = (nabla_i A)^l_j`` and the Codazzi left side ``L[m, i, j, l]``."""
    A = center.shape
    nablaA = dA + np.einsum("mlia,maj->milj", Gam, A) - np.einsum("mla,maij->milj", A, Gam)
    L = np.transpose(nablaA, (0, 1, 3, 2)) - np.transpose(nablaA, (0, 3, 1, 2))
    return nablaA, L


def _codazzi_rhs(center: FrameData):
    c, eps = center.spec.c, int(center.spec.eps)
    phi, eta, xi, G = center.phi, center.eta, center.xi, center.gram
    Fm = np.swapaxes(phi, -1, -2) @ G  # Fm[j, k] = <phi d_j, d_k>
    return c * (
        np.einsum("mi,mlj->mijl", eta, phi)
        - np.einsum("mj,mli->mijl", eta, phi)
        + 2 * eps * np.einsum("mji,ml->mijl", Fm, xi)
    )


def _gauss_rhs(center: FrameData):
    c, eps = center.spec.c, int(center.spec.eps)
    A, phi, G = center.shape, center.phi, center.gram
    K = np.swapaxes(A, -1, -2) @ G
    Fm = np.swapaxes(phi, -1, -2) @ G
    d = G.shape[-1]
    I = np.eye(d)
    out = np.einsum("mjk,mli->mijkl", K, A) - np.einsum("mik,mlj->mijkl", K, A)
    amb = eps * (np.einsum("mjk,li->mijkl", G, I) - np.einsum("mik,lj->mijkl", G, I))
    amb = amb + np.einsum("mjk,mli->mijkl", Fm, phi) - np.einsum("mik,mlj->mijkl", Fm, phi)
    amb = amb + 2 * np.einsum("mji,mlk->mijkl", Fm, phi)
    return out + c * amb


def _as_points(patch, u, reach):
    U = np.atleast_2d(np.asarray(u, dtype=float))
    if U.shape[-1] != patch.dim:
        raise ValueError(f"chart points must have dimension {patch.dim}")
    if not patch.inside(U, reach):
        raise ValueError("chart point too close to the boundary for the residual stencil")
    return U


def _gauss_codazzi_at_step(patch, U, h):
    R = _riemann(patch, U, h)
    Gam = _christoffel(patch, U, h)[0]
    center, _, _, dA, _ = _field_derivs(patch, U, h)
    nablaA, L = _codazzi_parts(center, Gam, dA)
    return R, center, nablaA, L


def gauss_codazzi_residuals(
    patch: HypersurfacePatch,
    u,
    *,
    tol: float = 1e-3,
    check_stencil: bool = True,
    strict: bool = True,
) -> ResidualReport:
    """Gauss equation, Codazzi equation and its xi-contractions from intrinsic data.

    With ``check_stencil`` the curvature and Codazzi tensors are recomputed at
    half the step; the disagreement is reported under ``stencil:gauss`` and
    ``stencil:codazzi`` and, when ``strict``, raises StencilTooCoarse if it
    exceeds ``10 * tol``.
    """
    h = patch.fd_step
    U = _as_points(patch, u, patch.residual_reach())
    R, center, nablaA, L = _gauss_codazzi_at_step(patch, U, h)
    eps, c = int(patch.spec.eps), patch.spec.c
    G, xi = center.gram, center.xi
    rep = ResidualReport()
    rep.add("gauss", R - _gauss_rhs(center))
    rep.add("codazzi", L - _codazzi_rhs(center))

    Gxi = np.einsum("mij,mj->mi", G, xi)
    Fm = np.swapaxes(center.phi, -1, -2) @ G
    rep.add("codazzi_xi", np.einsum("mijl,ml->mij", L, Gxi) - 2 * c * np.swapaxes(Fm, -1, -2))
    t1 = np.einsum("milj,mj,ml->mi", nablaA, xi, Gxi)
    nabla_xi = np.einsum("mk,mklj->mlj", xi, nablaA)
    t2 = np.einsum("mli,ml->mi", nabla_xi, Gxi)
    t3 = np.einsum("mlj,mj,mli->mi", nabla_xi, xi, G)
    rep.add("codazzi_xi_xi", np.concatenate([t1 - t2, t2 - t3], axis=-1))

    if check_stencil:
        R2, _, _, L2 = _gauss_codazzi_at_step(patch, U, h / 2)
        rep.add("stencil:gauss", R - R2)
        rep.add("stencil:codazzi", L - L2)
        worst = max(rep.max("stencil:gauss"), rep.max("stencil:codazzi"))
        if strict and worst > 10 * tol:
            raise StencilTooCoarse(
                f"half-step disagreement {worst:.3g} exceeds 10x tolerance {tol:g} at h={h:g}"
            )
    return rep


def codazzi_obstruction(patch: HypersurfacePatch, u, X=None):
    """Norm of ``(nabla_X A) xi - (nabla_xi A) X`` and of ``-c phi X`` for a unit horizontal probe.

    Returns ``(lhs_norm, rhs_norm, <X, X>)`` with norms ``sqrt|<v, v>|``.
    """
    h = patch.fd_step
    U = _as_points(patch, u, patch.residual_reach())[:1]
    Gam = _christoffel(patch, U, h)[0]
    center, _, _, dA, _ = _field_derivs(patch, U, h)
    _, L = _codazzi_parts(center, Gam, dA)
    f = center.at(0)
    if X is None:
        X = horizontal_basis(f)[:, 0]
    X = np.asarray(X, dtype=float)
    G = f.gram
    v = np.einsum("i,j,ijl->l", X, f.xi, L[0])
    rhs = -f.spec.c * (f.phi @ X)
    return (
        math.sqrt(abs(float(v @ G @ v))),
        math.sqrt(abs(float(rhs @ G @ rhs))),
        float(X @ G @ X),
    )


def connection_residuals(patch: HypersurfacePatch, u) -> ResidualReport:
    """Covariant derivatives of xi and phi against ``eps phi A X`` and ``eta(Y)AX - eps<AX,Y>xi``."""
    h = patch.fd_step
    U = _as_points(patch, u, patch.residual_reach())
    Gam = _christoffel(patch, U, h)[0]
    center, dxi, dphi, _, _ = _field_derivs(patch, U, h)
    eps = int(patch.spec.eps)
    A, phi, xi, eta, G = center.shape, center.phi, center.xi, center.eta, center.gram
    rep = ResidualReport()
    # (nabla_i xi)^l = d_i xi^l + Gam^l_{ia} xi^a
    nxi = dxi + np.einsum("mlia,ma->mil", Gam, xi)
    rep.add("nabla_xi", nxi - eps * np.swapaxes(phi @ A, -1, -2))
    nphi = dphi + np.einsum("mlia,maj->milj", Gam, phi) - np.einsum("mla,maij->milj", phi, Gam)
    K = np.swapaxes(A, -1, -2) @ G  # K[i, j] = <A d_i, d_j>
    rhs = np.einsum("mj,mli->milj", eta, A) - eps * np.einsum("mij,ml->milj", K, xi)
    rep.add("nabla_phi", nphi - rhs)
    return rep
