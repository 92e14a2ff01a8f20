"""Central finite-difference stencils over batched chart points."""
from __future__ import annotations

import numpy as np

# first-derivative central weights for offsets k = 1..r: f' ~ sum w_k (f(x+kh) - f(x-kh)) / h
CENTRAL_WEIGHTS = {
    2: (0.5,),
    4: (2.0 / 3.0, -1.0 / 12.0),
    6: (3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0),
    8: (4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0),
}


def stencil_points(U: np.ndarray, step: float, order: int) -> np.ndarray:
    """Points ``U +- k*step*e_i``; shape ``(m, d, 2r, d)`` ordered ``+1, -1, +2, -2, ...``."""
    U = np.asarray(U, dtype=float)
    m, d = U.shape
    r = len(CENTRAL_WEIGHTS[order])
    ks = np.array([s * k for k in range(1, r + 1) for s in (1, -1)], dtype=float)
    offsets = ks[None, :, None] * step * np.eye(d)[:, None, :]  # (d, 2r, d)
    return U[:, None, None, :] + offsets[None]


def combine(values: np.ndarray, step: float, order: int) -> np.ndarray:
    """Reduce stencil samples ``(m, d, 2r, ...)`` to derivatives ``(m, d, ...)``."""
    w = CENTRAL_WEIGHTS[order]
    out = 0.0
    for k, wk in enumerate(w):
        out = out + wk * (values[:, :, 2 * k] - values[:, :, 2 * k + 1])
    return out / step


def partials(func, U: np.ndarray, step: float, order: int = 8) -> np.ndarray:
    """Partial derivatives of a batched ``func: (m, d) -> (m, ...)``; shape ``(m, d, ...)``."""
    U = np.asarray(U, dtype=float)
    m, d = U.shape
    pts = stencil_points(U, step, order)
    vals = np.asarray(func(pts.reshape(-1, d)))
    vals = vals.reshape(pts.shape[:3] + vals.shape[1:])
    return combine(vals, step, order)
