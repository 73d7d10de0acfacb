"""Independent checks of the closed forms: Monte-Carlo loss and finite differences."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import model
from .errors import NonDifferentiablePoint


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    stderr: float
    n_samples: int
    seed: int


def _philox(seed: int) -> np.random.Generator:
    # counter-based stream: same seed gives the same draws on every platform
    return np.random.Generator(np.random.Philox(key=int(seed)))


def mc_objective(W, V, n_samples: int, seed: int, batch: int = 100_000) -> MCEstimate:
    """Sample-mean estimate of 1/2 E[(sum [w_i.x]_+ - sum [v_j.x]_+)^2] over x ~ N(0, I)."""
    W, V = model._pair(W, V)
    if n_samples < 100:
        raise ValueError("n_samples must be at least 100")
    rng = _philox(seed)
    d = W.shape[1]
    count, mean, m2 = 0, 0.0, 0.0
    remaining = n_samples
    while remaining:
        b = min(batch, remaining)
        X = rng.standard_normal((b, d))
        r = np.maximum(X @ W.T, 0).sum(1) - np.maximum(X @ V.T, 0).sum(1)
        vals = 0.5 * r * r
        # Chan et al. parallel update of mean and sum of squared deviations
        bm = vals.mean()
        bm2 = np.sum((vals - bm) ** 2)
        delta = bm - mean
        tot = count + b
        mean += delta * b / tot
        m2 += bm2 + delta * delta * count * b / tot
        count = tot
        remaining -= b
    stderr = np.sqrt(m2 / (count - 1) / count)
    return MCEstimate(float(mean), float(stderr), n_samples, int(seed))


def _check_step(W: np.ndarray, step: float) -> None:
    if np.any(np.linalg.norm(W, axis=1) <= 2 * step):
        raise NonDifferentiablePoint("a neuron is within the finite-difference step of zero")


def fd_gradient(W, V, step: float = 1e-5) -> np.ndarray:
    """Central differences of the objective, one coordinate at a time."""
    W, V = model._pair(W, V)
    _check_step(W, step)
    G = np.zeros_like(W)
    for idx in np.ndindex(*W.shape):
        Wp, Wm = W.copy(), W.copy()
        Wp[idx] += step
        Wm[idx] -= step
        G[idx] = (model.objective(Wp, V) - model.objective(Wm, V)) / (2 * step)
    return G


def fd_hessian(W, V, step: float = 1e-4) -> np.ndarray:
    """Central differences of the analytic gradient, symmetrized."""
    W, V = model._pair(W, V)
    _check_step(W, step)
    n, d = W.shape
    H = np.zeros((n * d, n * d))
    for col, idx in enumerate(np.ndindex(n, d)):
        Wp, Wm = W.copy(), W.copy()
        Wp[idx] += step
        Wm[idx] -= step
        H[:, col] = ((model.gradient(Wp, V) - model.gradient(Wm, V)) / (2 * step)).ravel()
    return 0.5 * (H + H.T)


def relative_error(a, b) -> float:
    """|a - b| / max(|b|, tiny) in Frobenius norm."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))
