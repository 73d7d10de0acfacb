"""Closed-form Gaussian kernels f, g, h1, h2 for pairs of ReLU neurons.

For neurons w, v and x ~ N(0, I):

    f(w, v)  = E[[w.x]_+ [v.x]_+] = |w||v| (sin t + (pi - t) cos t) / (2 pi)
    g(w, v)  = d f / d w
    h1(w, v) = d g / d w          (diagonal Hessian contribution)
    h2(w, v) = d g / d v          (off-diagonal Hessian contribution)

with t the angle between w and v.  The batched helpers operate on whole
neuron matrices and back both the scalar API here and the model assembly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ZeroVector

TWO_PI = 2.0 * np.pi

#: sin(theta) below this counts as parallel or antiparallel
PARALLEL_TOL = 1e-8


@dataclass(frozen=True)
class PairGeometry:
    norm_w: float
    norm_v: float
    cos_theta: float
    sin_theta: float
    theta: float
    alignment: str  # "general", "parallel" or "antiparallel"


def _unit_rows(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    norms = np.linalg.norm(A, axis=-1)
    return A / norms[..., None], norms


def pair_stats(A: np.ndarray, B: np.ndarray) -> dict:
    """Angle data between every row of ``A`` (n, d) and every row of ``B`` (p, d).

    Rows must be nonzero.  The angle uses the half-angle form
    ``theta = 2 atan2(|a - b|, |a + b|)`` on unit vectors, which stays
    accurate near 0 and pi where ``arccos`` of the dot product does not.
    ``cos`` is the clamped dot product.
    """
    Au, na = _unit_rows(A)
    Bu, nb = _unit_rows(B)
    cos = np.clip(Au @ Bu.T, -1.0, 1.0)
    diff = np.linalg.norm(Au[:, None, :] - Bu[None, :, :], axis=-1)
    summ = np.linalg.norm(Au[:, None, :] + Bu[None, :, :], axis=-1)
    theta = 2.0 * np.arctan2(diff, summ)
    sin = np.sin(theta)
    degenerate = sin < PARALLEL_TOL
    return dict(Au=Au, Bu=Bu, na=na, nb=nb, cos=cos, sin=sin, theta=theta,
                parallel=degenerate & (cos > 0), antiparallel=degenerate & (cos <= 0))


def f_matrix(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Matrix of f(a_i, b_j); zero rows contribute 0 (continuous extension)."""
    out = np.zeros((A.shape[0], B.shape[0]))
    ia = np.linalg.norm(A, axis=1) > 0
    ib = np.linalg.norm(B, axis=1) > 0
    if ia.any() and ib.any():
        s = pair_stats(A[ia], B[ib])
        val = s["na"][:, None] * s["nb"][None, :] * (
            s["sin"] + (np.pi - s["theta"]) * s["cos"]) / TWO_PI
        out[np.ix_(ia, ib)] = val
    return out


def g_sum(A: np.ndarray, B: np.ndarray, weights: np.ndarray | None = None) -> np.ndarray:
    """Rows ``sum_j c_ij g(a_i, b_j)`` for every i.

    ``weights`` is None (all ones), a length-p vector or an (n, p) matrix;
    use it to mask or sign-flip terms.
    """
    s = pair_stats(A, B)
    c = np.ones(B.shape[0]) if weights is None else np.asarray(weights, dtype=float)
    c = np.broadcast_to(c, s["cos"].shape)
    # |b_j| sin(t_ij) a_i/|a_i| + (pi - t_ij) b_j
    radial = np.sum(c * s["sin"] * s["nb"][None, :], axis=1)
    return (radial[:, None] * s["Au"] + (c * (np.pi - s["theta"])) @ B) / TWO_PI


def h1_sum(a: np.ndarray, B: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """``sum_j weights_j h1(a, b_j)`` as a d x d matrix."""
    d = a.shape[0]
    s = pair_stats(a[None, :], B)
    sin = s["sin"][0]
    ok = ~(s["parallel"][0] | s["antiparallel"][0])
    if not ok.any():
        return np.zeros((d, d))
    au = s["Au"][0]
    coef = weights[ok] * sin[ok] * s["nb"][ok] / (TWO_PI * s["na"][0])
    nbar = (s["Bu"][ok] - s["cos"][0][ok][:, None] * au) / sin[ok][:, None]
    proj = np.eye(d) - np.outer(au, au)
    return coef.sum() * proj + (nbar * coef[:, None]).T @ nbar


def h2_row(a: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Stack of h2(a, b_j) with shape (p, d, d)."""
    d = a.shape[0]
    s = pair_stats(a[None, :], B)
    cos, sin, theta = s["cos"][0], s["sin"][0], s["theta"][0]
    par, anti = s["parallel"][0], s["antiparallel"][0]
    au, Bu = s["Au"][0], s["Bu"]
    safe = np.where(par | anti, 1.0, sin)
    n_ab = (au[None, :] - cos[:, None] * Bu) / safe[:, None]
    n_ba = (Bu - cos[:, None] * au[None, :]) / safe[:, None]
    out = ((np.pi - theta)[:, None, None] * np.eye(d)[None]
           + n_ab[:, :, None] * Bu[:, None, :]
           + n_ba[:, :, None] * au[None, None, :]) / TWO_PI
    out[par] = 0.5 * np.eye(d)
    out[anti] = 0.0
    return out


def _check_pair(w, v) -> tuple[np.ndarray, np.ndarray]:
    w = np.asarray(w, dtype=float)
    v = np.asarray(v, dtype=float)
    if w.shape != v.shape or w.ndim != 1:
        raise ValueError(f"expected two d-vectors, got shapes {w.shape} and {v.shape}")
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(v))):
        raise ValueError("non-finite coordinates")
    if np.linalg.norm(w) == 0 or np.linalg.norm(v) == 0:
        raise ZeroVector("kernel arguments must be nonzero")
    return w, v


def pair_geometry(w, v) -> PairGeometry:
    w, v = _check_pair(w, v)
    s = pair_stats(w[None, :], v[None, :])
    if s["parallel"][0, 0]:
        align = "parallel"
    elif s["antiparallel"][0, 0]:
        align = "antiparallel"
    else:
        align = "general"
    return PairGeometry(float(s["na"][0]), float(s["nb"][0]), float(s["cos"][0, 0]),
                        float(s["sin"][0, 0]), float(s["theta"][0, 0]), align)


def pair_f(w, v) -> float:
    w, v = _check_pair(w, v)
    return float(f_matrix(w[None, :], v[None, :])[0, 0])


def pair_g(w, v) -> np.ndarray:
    w, v = _check_pair(w, v)
    return g_sum(w[None, :], v[None, :])[0]


def pair_h1(w, v) -> np.ndarray:
    w, v = _check_pair(w, v)
    return h1_sum(w, v[None, :], np.ones(1))


def pair_h2(w, v) -> np.ndarray:
    w, v = _check_pair(w, v)
    return h2_row(w, v[None, :])[0]
