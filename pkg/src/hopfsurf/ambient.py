"""Hyperquadric models of the space forms CP^n_{p,c} and DP^n.

Points of the space form are handled through quadric representatives
(lifts) ``z`` with ``<z, z> = c eps``; tangent vectors of the quotient are
identified with their horizontal lifts, i.e. vectors orthogonal to both
``z`` and the fiber direction ``J z``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .algebra import EpsilonKind, IndefiniteForm, as_eps, inner, j_apply
from .errors import NearNullInput, NotApplicable, NullVector, WrongCausalType

DEFAULT_TOL = 1e-9


class NearNullFiberWarning(UserWarning):
    """Fiber comparison could not be decided because all slots are near-null."""


@dataclass(frozen=True)
class SpaceFormSpec:
    """Choice of ambient space form: dimension, algebra, curvature sign, index."""

    n: int
    eps: int
    c: int
    p: int = 0

    def __post_init__(self):
        object.__setattr__(self, "eps", as_eps(self.eps))
        if int(self.c) not in (1, -1):
            raise ValueError(f"c must be +1 or -1, got {self.c!r}")
        object.__setattr__(self, "c", int(self.c))
        if self.eps == EpsilonKind.PARA:
            # the neutral form has no index
            object.__setattr__(self, "p", 0)
        self.form  # validates n and p

    @classmethod
    def projective(cls, n: int, p: int = 0) -> "SpaceFormSpec":
        return cls(n=n, eps=1, c=1, p=p)

    @classmethod
    def hyperbolic(cls, n: int) -> "SpaceFormSpec":
        """Riemannian complex hyperbolic space: one negative slot, level -1."""
        return cls(n=n, eps=1, c=-1, p=1)

    @classmethod
    def para(cls, n: int, c: int = 1) -> "SpaceFormSpec":
        return cls(n=n, eps=-1, c=c)

    @cached_property
    def form(self) -> IndefiniteForm:
        return IndefiniteForm(self.eps, self.n, self.p)

    @property
    def dim(self) -> int:
        """Length of ambient coordinate vectors."""
        return 2 * (self.n + 1)

    @property
    def level(self) -> int:
        """Quadric level ``c * eps``."""
        return self.c * int(self.eps)

    @property
    def eps_prime(self) -> int:
        return self.c * int(self.eps)

    def label(self) -> str:
        if self.eps == EpsilonKind.PARA:
            return f"DP^{self.n}(c={self.c})"
        return f"CP^{self.n}_{{{self.p},{self.c}}}"

    def to_dict(self) -> dict:
        return {"n": self.n, "eps": int(self.eps), "c": self.c, "p": self.p}

    def inner(self, u, v):
        return inner(self.form, u, v)

    def J(self, v):
        return j_apply(self.eps, v)


def quadric_residual(spec: SpaceFormSpec, z) -> np.ndarray:
    return spec.inner(z, z) - spec.level


def standard_point(spec: SpaceFormSpec) -> np.ndarray:
    """First coordinate vector whose square equals the quadric level."""
    k = int(np.flatnonzero(spec.form.signs == spec.level)[0])
    z = np.zeros(spec.dim)
    z[k] = 1.0
    return z


def quadric_normalize(spec: SpaceFormSpec, z) -> np.ndarray:
    """Rescale ``z`` onto the quadric ``<z, z> = c eps``."""
    z = np.asarray(z, dtype=float)
    q = float(spec.inner(z, z))
    if abs(q) <= 1e-10:
        raise NearNullInput(f"<z,z> = {q!r} is too close to zero to normalize")
    if math.copysign(1.0, q) != spec.level:
        raise WrongCausalType(
            f"<z,z> = {q!r} has the wrong sign for quadric level {spec.level}"
        )
    return z / math.sqrt(abs(q))


def tangent_split(spec: SpaceFormSpec, at, v):
    """Split ``v`` at the lifted point ``at`` into horizontal, vertical, radial parts.

    Uses ``<z, z> = c eps`` and ``<Jz, Jz> = c``. Broadcasts over leading axes.
    """
    z = np.asarray(at, dtype=float)
    v = np.asarray(v, dtype=float)
    jz = spec.J(z)
    radial = (spec.level * spec.inner(v, z))[..., None] * z
    vertical = (spec.c * spec.inner(v, jz))[..., None] * jz
    return v - radial - vertical, vertical, radial


def horizontal_part(spec: SpaceFormSpec, at, v) -> np.ndarray:
    return tangent_split(spec, at, v)[0]


def curvature_operator(spec: SpaceFormSpec, X, Y, Z) -> np.ndarray:
    """``R(X,Y)Z = c(eps X^Y + JX^JY + 2<X,JY>J)Z`` with ``(X^Y)Z = <Y,Z>X - <X,Z>Y``."""
    X, Y, Z = (np.asarray(a, dtype=float) for a in (X, Y, Z))
    ip = spec.inner
    jx, jy, jz = spec.J(X), spec.J(Y), spec.J(Z)

    def s(a):
        return np.asarray(a)[..., None]

    out = int(spec.eps) * (s(ip(Y, Z)) * X - s(ip(X, Z)) * Y)
    out = out + s(ip(jy, Z)) * jx - s(ip(jx, Z)) * jy
    out = out + 2.0 * s(ip(X, jy)) * jz
    return spec.c * out


def holomorphic_sectional(spec: SpaceFormSpec, X) -> float:
    """``<R(X,JX)JX, X> / <X,X>^2``; equal to ``4c`` on every non-null X."""
    X = np.asarray(X, dtype=float)
    xx = float(spec.inner(X, X))
    if abs(xx) < 1e-10:
        raise NullVector(f"<X,X> = {xx!r} is null; holomorphic curvature undefined")
    jx = spec.J(X)
    return float(spec.inner(curvature_operator(spec, X, jx, jx), X)) / (xx * xx)


def _slot_view(z):
    return np.asarray(z, dtype=float).reshape(-1, 2)


def fiber_angle(spec: SpaceFormSpec, z, w, tol: float = DEFAULT_TOL):
    """Fiber parameter ``t`` with ``w = (co(t), si(t)) . z``, or None.

    The fiber group is the unit circle in C or the branch ``(cosh, sinh)``
    of the unit hyperbola in D. The candidate scalar is solved from the
    slot of ``z`` with the largest norm and then checked on every slot.
    """
    eps = int(spec.eps)
    zs, ws = _slot_view(z), _slot_view(w)
    norms = zs[:, 0] ** 2 + eps * zs[:, 1] ** 2
    k = int(np.argmax(np.abs(norms)))
    scale = max(1.0, float(np.max(np.abs(zs))) ** 2)
    if abs(norms[k]) < 1e-10 * scale:
        warnings.warn(
            "every slot of z is near-null; fiber comparison undecidable",
            NearNullFiberWarning,
            stacklevel=2,
        )
        return None
    x, y = zs[k]
    u, v = ws[k]
    # lam = w_k * conj(z_k) / N(z_k)
    lam_re = (u * x - eps * v * (-y)) / norms[k]
    lam_im = (u * (-y) + x * v) / norms[k]
    lam_norm = lam_re**2 + eps * lam_im**2
    if abs(lam_norm - 1.0) > max(tol, 1e-12) * 10:
        return None
    if eps == 1:
        t = math.atan2(lam_im, lam_re)
    else:
        if lam_re <= 0:
            return None
        t = math.atanh(max(-1.0, min(1.0, lam_im / lam_re)))
    lam_z = np.empty_like(zs)
    lam_z[:, 0] = lam_re * zs[:, 0] - eps * lam_im * zs[:, 1]
    lam_z[:, 1] = lam_re * zs[:, 1] + lam_im * zs[:, 0]
    if np.max(np.abs(lam_z - ws)) > tol:
        return None
    return t


def fiber_equivalent(spec: SpaceFormSpec, z, w, tol: float = DEFAULT_TOL) -> bool:
    return fiber_angle(spec, z, w, tol) is not None


def fiber_act(spec: SpaceFormSpec, t: float, z) -> np.ndarray:
    """Multiply every slot of ``z`` by the fiber element with parameter ``t``."""
    if spec.eps == EpsilonKind.COMPLEX:
        co, si = math.cos(t), math.sin(t)
    else:
        co, si = math.cosh(t), math.sinh(t)
    return co * np.asarray(z, dtype=float) + si * spec.J(z)


def anti_isometry(spec: SpaceFormSpec, z):
    """Block swap ``(z_1..z_{n+1}) -> (z_{p+1}..z_{n+1}, z_1..z_p)``.

    Maps the quadric of ``CP^n_{p,c}`` onto that of ``CP^n_{n+1-p,-c}`` and
    reverses the sign of the flat form.
    """
    if spec.eps != EpsilonKind.COMPLEX:
        raise NotApplicable(
            "block swap is only defined for the complex family; use para_polar"
        )
    z = np.asarray(z, dtype=float)
    slots = z.reshape(z.shape[:-1] + (-1, 2))
    swapped = np.roll(slots, -spec.p, axis=-2).reshape(z.shape)
    new = SpaceFormSpec(n=spec.n, eps=1, c=-spec.c, p=spec.n + 1 - spec.p)
    return new, swapped


def para_polar(spec: SpaceFormSpec, z):
    """The para-complex analogue: ``z -> J z`` into the polar space (c -> -c)."""
    if spec.eps != EpsilonKind.PARA:
        raise NotApplicable("para_polar is only defined for the para-complex family")
    return SpaceFormSpec(n=spec.n, eps=-1, c=-spec.c), spec.J(z)
