"""Neuron splitting and saddle certificates.

Splitting neuron i as (alpha w_i, (1 - alpha) w_i) keeps the network
function, so critical points stay critical.  At the split point the twin
diagonal blocks become I/2 + H'_ii / alpha and I/2 + H'_ii / (1 - alpha), the
twin off-diagonal block is I/2, and along (u, -u) the curvature is
u^T H'_ii u (1/alpha + 1/(1 - alpha)).  Any direction with u^T H'_ii u < 0
therefore certifies a saddle.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import model
from .errors import AlphaOutOfRange, IndexOutOfRange, NotACriticalPoint
from .spectral import eig_symmetric

CRITICAL_TOL = 1e-10
NEGATIVE_TOL = 1e-8


@dataclass(frozen=True)
class SplitSpec:
    neuron_index: int
    alpha: float


@dataclass
class SplitHessian:
    matrix: np.ndarray
    diverging: bool  # alpha or 1 - alpha tiny while H'_ii != 0


@dataclass
class SaddleCertificate:
    split: SplitSpec
    lam: float
    direction_u: np.ndarray
    embedded_direction: np.ndarray
    quadratic_value: float
    predicted_value: float
    grad_norm_at_split: float

    @property
    def relative_error(self) -> float:
        return abs(self.quadratic_value - self.predicted_value) / abs(self.predicted_value)


@dataclass(frozen=True)
class NoNegativeBlock:
    neuron_index: int
    min_eigenvalue: float


def _check(W: np.ndarray, spec: SplitSpec, open_interval: bool) -> None:
    n = W.shape[0]
    if not 0 <= spec.neuron_index < n:
        raise IndexOutOfRange(f"neuron index {spec.neuron_index} outside [0, {n})")
    a = spec.alpha
    if open_interval and not 0 < a < 1:
        raise AlphaOutOfRange(f"alpha must lie in (0, 1), got {a}")
    if not 0 <= a <= 1:
        raise AlphaOutOfRange(f"alpha must lie in [0, 1], got {a}")


def split(W, spec: SplitSpec) -> np.ndarray:
    """(w_1, ..., alpha w_i, (1 - alpha) w_i, ..., w_n); twins at rows i, i+1."""
    W = np.atleast_2d(np.asarray(W, dtype=float))
    _check(W, spec, open_interval=False)
    i, a = spec.neuron_index, spec.alpha
    return np.vstack([W[:i], a * W[i], (1.0 - a) * W[i], W[i + 1:]])


def split_hessian_formula(W, V, spec: SplitSpec, diverge_tol: float = 1e-8) -> SplitHessian:
    """Hessian at split(W, spec) assembled from the blocks of H(W)."""
    W, V = model._pair(W, V)
    _check(W, spec, open_interval=True)
    n, d = W.shape
    i, a = spec.neuron_index, spec.alpha
    H = model.hessian(W, V)
    Hp = model.block(H, i, i, d) - 0.5 * np.eye(d)
    # new index -> old index (twins both map to i)
    old = np.concatenate([np.arange(i + 1), np.arange(i, n)])
    S = H[np.ix_(np.repeat(old * d, d) + np.tile(np.arange(d), n + 1),
                 np.repeat(old * d, d) + np.tile(np.arange(d), n + 1))]
    half = 0.5 * np.eye(d)
    for t, scale in ((i, 1.0 / a), (i + 1, 1.0 / (1.0 - a))):
        S[t * d:(t + 1) * d, t * d:(t + 1) * d] = half + scale * Hp
    S[i * d:(i + 1) * d, (i + 1) * d:(i + 2) * d] = half
    S[(i + 1) * d:(i + 2) * d, i * d:(i + 1) * d] = half
    diverging = min(a, 1.0 - a) < diverge_tol and np.linalg.norm(Hp) > 0
    return SplitHessian(S, bool(diverging))


def embed_twin_direction(u: np.ndarray, n: int, i: int) -> np.ndarray:
    """Vector of length (n+1) d that is u at twin i, -u at twin i+1, zero elsewhere."""
    d = u.size
    out = np.zeros((n + 1) * d)
    out[i * d:(i + 1) * d] = u
    out[(i + 1) * d:(i + 2) * d] = -u
    return out


def certify_saddle(W, V, i: int, alpha: float, tol: float = NEGATIVE_TOL,
                   u: np.ndarray | None = None) -> SaddleCertificate | NoNegativeBlock:
    """Certify that splitting neuron ``i`` of the critical point W gives a saddle.

    ``u`` defaults to the minimal eigenvector of H'_ii; pass a unit vector to
    use another negative direction (e.g. one at the mean-curvature level).
    """
    W, V = model._pair(W, V)
    spec = SplitSpec(i, alpha)
    _check(W, spec, open_interval=True)
    gn = float(np.linalg.norm(model.gradient(W, V)))
    if gn > CRITICAL_TOL:
        raise NotACriticalPoint(f"gradient norm {gn:.3e} exceeds {CRITICAL_TOL:.0e}")
    Hp = model.h_prime_block(W, V, i)
    rep = eig_symmetric(Hp)
    if u is None:
        if rep.min_eigenvalue >= -tol:
            return NoNegativeBlock(i, rep.min_eigenvalue)
        u = rep.min_eigvec
    u = np.asarray(u, dtype=float) / np.linalg.norm(u)
    lam = float(u @ Hp @ u)
    if lam >= -tol:
        return NoNegativeBlock(i, lam)
    Ws = split(W, spec)
    direction = embed_twin_direction(u, W.shape[0], i)
    q = float(direction @ model.hessian(Ws, V) @ direction)
    pred = lam * (1.0 / alpha + 1.0 / (1.0 - alpha))
    g_split = float(np.linalg.norm(model.gradient(Ws, V)))
    return SaddleCertificate(spec, lam, u, direction, q, pred, g_split)


def select_split_candidate(W, V) -> int:
    """Index with the most negative mean curvature of H'_ii."""
    return int(np.argmin(model.mean_curvatures(W, V)))
