"""Population loss of the teacher-student ReLU network and its derivatives.

Students ``W`` (n x d) fit teachers ``V`` (k x d, orthonormal rows) under

    F(W) = 1/2 E_x[(sum_i [w_i.x]_+ - sum_j [v_j.x]_+)^2],

which expands to 1/2 sum f(w_i, w_j) - sum f(w_i, v_j) + 1/2 sum f(v_i, v_j).
"""
from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, IndexOutOfRange, NonDifferentiablePoint
from .kernels import TWO_PI, f_matrix, g_sum, h1_sum, h2_row, pair_stats

#: neurons with norm below this are treated as zero
ZERO_NEURON_TOL = 1e-14


def standard_teacher(k: int, d: int | None = None) -> np.ndarray:
    """First ``k`` standard basis vectors of R^d as rows."""
    d = k if d is None else d
    if d < k:
        raise DimensionMismatch(f"need d >= k, got d={d}, k={k}")
    return np.eye(k, d)


def check_teacher(V: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    V = np.atleast_2d(np.asarray(V, dtype=float))
    k, d = V.shape
    if d < k:
        raise DimensionMismatch(f"teacher needs d >= k, got {V.shape}")
    if np.linalg.norm(V @ V.T - np.eye(k)) > tol:
        raise ValueError("teacher rows must be orthonormal")
    return V


def _pair(W, V) -> tuple[np.ndarray, np.ndarray]:
    W = np.atleast_2d(np.asarray(W, dtype=float))
    V = np.atleast_2d(np.asarray(V, dtype=float))
    if W.shape[1] != V.shape[1]:
        raise DimensionMismatch(f"student d={W.shape[1]} but teacher d={V.shape[1]}")
    if not np.all(np.isfinite(W)):
        raise ValueError("non-finite student parameters")
    return W, V


def _require_differentiable(W: np.ndarray) -> None:
    norms = np.linalg.norm(W, axis=1)
    if np.any(norms < ZERO_NEURON_TOL):
        bad = np.flatnonzero(norms < ZERO_NEURON_TOL).tolist()
        raise NonDifferentiablePoint(f"zero student neurons at rows {bad}")


def _self_f(A: np.ndarray) -> np.ndarray:
    M = f_matrix(A, A)
    np.fill_diagonal(M, 0.5 * np.sum(A * A, axis=1))
    return M


def objective(W, V) -> float:
    """Closed-form F(W). Zero neurons are allowed and contribute nothing."""
    W, V = _pair(W, V)
    return float(0.5 * _self_f(W).sum() - f_matrix(W, V).sum() + 0.5 * _self_f(V).sum())


def gradient(W, V) -> np.ndarray:
    """Gradient of F as an n x d matrix (row i is dF/dw_i)."""
    W, V = _pair(W, V)
    _require_differentiable(W)
    n = W.shape[0]
    G = 0.5 * W - g_sum(W, V)
    if n > 1:
        G += g_sum(W, W, 1.0 - np.eye(n))
    return G


def hessian(W, V) -> np.ndarray:
    """Dense (n d) x (n d) Hessian in n x n blocks of d x d."""
    W, V = _pair(W, V)
    _require_differentiable(W)
    n, d = W.shape
    H = np.zeros((n * d, n * d))
    ones_v = np.ones(V.shape[0])
    for i in range(n):
        others = np.delete(np.arange(n), i)
        block = 0.5 * np.eye(d) - h1_sum(W[i], V, ones_v)
        if others.size:
            block += h1_sum(W[i], W[others], np.ones(others.size))
            row = h2_row(W[i], W)
            for j in others:
                H[i * d:(i + 1) * d, j * d:(j + 1) * d] = row[j]
        H[i * d:(i + 1) * d, i * d:(i + 1) * d] = block
    return H


def block(H: np.ndarray, i: int, j: int, d: int) -> np.ndarray:
    """The (i, j) block of a block-layout Hessian."""
    return H[i * d:(i + 1) * d, j * d:(j + 1) * d]


def h_prime_block(W, V, i: int) -> np.ndarray:
    """H'_ii = H_ii - I/2, the part of a diagonal block that splitting rescales."""
    W, V = _pair(W, V)
    n, d = W.shape
    if not 0 <= i < n:
        raise IndexOutOfRange(f"neuron index {i} outside [0, {n})")
    if np.linalg.norm(W[i]) < ZERO_NEURON_TOL:
        raise NonDifferentiablePoint(f"neuron {i} is zero")
    others = np.delete(W, i, axis=0)
    M = -h1_sum(W[i], V, np.ones(V.shape[0]))
    if others.shape[0]:
        M += h1_sum(W[i], others, np.ones(others.shape[0]))
    return M


def mean_curvatures(W, V) -> np.ndarray:
    """Average of u^T H'_ii u over the unit sphere, for every neuron i.

    Closed form: (sum_{j!=i} |w_j| sin t(w_i,w_j) - sum_j sin t(w_i,v_j)) / (2 pi |w_i|),
    which is trace(H'_ii)/d since each h1 block has trace sin t |v| d / (2 pi |w|).
    """
    W, V = _pair(W, V)
    _require_differentiable(W)
    n, d = W.shape
    sww = pair_stats(W, W)
    swv = pair_stats(W, V)
    sin_ww = np.where(sww["parallel"] | sww["antiparallel"], 0.0, sww["sin"])
    np.fill_diagonal(sin_ww, 0.0)
    sin_wv = np.where(swv["parallel"] | swv["antiparallel"], 0.0, swv["sin"])
    norms = np.linalg.norm(W, axis=1)
    num = sin_ww @ norms - sin_wv @ np.linalg.norm(V, axis=1)
    return num / (TWO_PI * norms)
