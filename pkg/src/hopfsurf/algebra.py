"""Complex / para-complex scalar algebra and the flat ambient structures.

Ambient vectors are real arrays of length ``2(n+1)`` laid out as ``n+1``
consecutive ``(re, im)`` pairs. With that layout the structure operator is a
slotwise swap with a sign, so ``J^2 = -eps Id`` holds exactly in floating
point.

``eps = +1`` selects the complex numbers C (``i^2 = -1``), ``eps = -1`` the
para-complex numbers D (``j^2 = +1``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from functools import cached_property

import numpy as np

from .errors import DimensionMismatch, TubeRadiusUndefined


class EpsilonKind(IntEnum):
    COMPLEX = 1
    PARA = -1


def as_eps(eps) -> EpsilonKind:
    try:
        return EpsilonKind(int(eps))
    except ValueError:
        raise ValueError(f"eps must be +1 or -1, got {eps!r}") from None


def as_sign(value, name="eps_prime") -> int:
    value = int(value)
    if value not in (1, -1):
        raise ValueError(f"{name} must be +1 or -1, got {value!r}")
    return value


@dataclass(frozen=True)
class EpsScalar:
    """An element ``re + im * u`` of C (u = i) or D (u = j)."""

    re: float
    im: float

    def __iter__(self):
        yield self.re
        yield self.im


def eps_product(kind, a: EpsScalar, b: EpsScalar) -> EpsScalar:
    """Ring product in C (kind=+1) or D (kind=-1).

    The unit ``u`` squares to ``-kind``; for D this gives
    ``(x, y)(x', y') = (xx' + yy', xy' + x'y)``.
    """
    eps = as_eps(kind)
    x, y = a
    xp, yp = b
    return EpsScalar(x * xp - eps * y * yp, x * yp + xp * y)


def eps_norm(kind, a: EpsScalar) -> float:
    """Multiplicative quadratic norm ``x^2 + eps y^2``."""
    return a.re * a.re + as_eps(kind) * a.im * a.im


@dataclass(frozen=True)
class IndefiniteForm:
    """Flat symmetric form on R^{2n+2}.

    For eps=+1 this is the real part of the pseudo-Hermitian form whose first
    ``p`` complex slots are negated; for eps=-1 it is the neutral form
    ``sum dx_j^2 - dy_j^2`` and ``p`` is ignored.
    """

    kind: EpsilonKind
    n: int
    p: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", as_eps(self.kind))
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.kind == EpsilonKind.COMPLEX and not 0 <= self.p <= self.n + 1:
            raise ValueError(f"p must lie in [0, n+1], got {self.p}")

    @property
    def dim(self) -> int:
        return 2 * (self.n + 1)

    @cached_property
    def signs(self) -> np.ndarray:
        if self.kind == EpsilonKind.PARA:
            s = np.tile([1.0, -1.0], self.n + 1)
        else:
            s = np.ones(self.dim)
            s[: 2 * self.p] = -1.0
        s.flags.writeable = False
        return s

    def gram(self) -> np.ndarray:
        return np.diag(self.signs)


def _check_dim(form: IndefiniteForm, *vectors):
    for v in vectors:
        if np.shape(v)[-1] != form.dim:
            raise DimensionMismatch(
                f"expected trailing dimension {form.dim}, got {np.shape(v)[-1]}"
            )


def inner(form: IndefiniteForm, u, v):
    """Indefinite inner product along the last axis (broadcasts)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    _check_dim(form, u, v)
    return np.sum(u * form.signs * v, axis=-1)


def j_apply(kind, v) -> np.ndarray:
    """Slotwise multiplication by i (complex) or j (para-complex).

    ``(x, y) -> (-eps y, x)``; exact in floating point.
    """
    eps = as_eps(kind)
    v = np.asarray(v, dtype=float)
    if v.shape[-1] % 2:
        raise DimensionMismatch("ambient vectors must have even length")
    pairs = v.reshape(v.shape[:-1] + (-1, 2))
    out = np.empty_like(pairs)
    out[..., 0] = -eps * pairs[..., 1]
    out[..., 1] = pairs[..., 0]
    return out.reshape(v.shape)


def omega_form(form: IndefiniteForm, u, v):
    """Fundamental 2-form ``omega(u, v) = <J u, v>``."""
    return inner(form, j_apply(form.kind, u), v)


def eps_trig(eps_prime, t):
    """``(cos t, sin t)`` for eps'=+1, ``(cosh t, sinh t)`` for eps'=-1."""
    if as_sign(eps_prime) == 1:
        return np.cos(t), np.sin(t)
    return np.cosh(t), np.sinh(t)


def eps_cot(eps_prime, t):
    """``co'(t) / si'(t)``."""
    co, si = eps_trig(eps_prime, t)
    return co / si


def coe_prime_inverse(eps_prime, a: float) -> float:
    """Solve ``2 co'(2t)/si'(2t) = a`` for ``t``.

    Circular branch returns ``t`` in (0, pi/2). Hyperbolic branch needs
    ``|a| > 2`` and returns the solution with the sign of ``a``.
    """
    a = float(a)
    if as_sign(eps_prime) == 1:
        return 0.5 * math.atan2(1.0, 0.5 * a)
    if not abs(a) > 2.0:
        raise TubeRadiusUndefined(
            f"hyperbolic focal radius needs |a| > 2, got a={a!r}"
        )
    return 0.5 * math.atanh(2.0 / a)
