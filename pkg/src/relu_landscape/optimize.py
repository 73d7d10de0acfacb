"""Gradient descent and perturbed gradient descent on the population loss."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import model
from .errors import NonDifferentiablePoint

DIVERGENCE_LIMIT = 1e6


@dataclass
class GDConfig:
    step_size: float
    max_iters: int = 1_000_000
    grad_norm_stop: float = 1e-12
    seed: int = 0
    log_stride: int = 100

    def __post_init__(self):
        if self.step_size <= 0 or self.grad_norm_stop <= 0:
            raise ValueError("step_size and grad_norm_stop must be positive")


@dataclass
class PGDConfig:
    step_size: float
    noise_level: float
    iters: int
    seed: int = 0
    log_stride: int = 100

    def __post_init__(self):
        if self.step_size <= 0 or self.noise_level < 0 or self.iters < 0:
            raise ValueError("need step_size > 0, noise_level >= 0, iters >= 0")


@dataclass
class RunRecord:
    params: np.ndarray
    iterations: int
    termination: str  # converged | max_iters | completed | non_differentiable | diverged
    final_F: float
    final_grad_norm: float
    seed: int
    trajectory: list[tuple[int, float, float, float]] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.termination == "converged"


def xavier_init(n: int, k: int, d: int, seed: int) -> np.ndarray:
    """n x d matrix of i.i.d. N(0, 1/d) entries. ``k`` is accepted for symmetry with the CLI."""
    rng = np.random.default_rng(seed)
    return rng.normal(0.0, 1.0 / np.sqrt(d), size=(n, d))


def large_norm_init(n: int, k: int, d: int, seed: int, target: float | None = None) -> np.ndarray:
    """Xavier draw rescaled so the neuron norms sum to ``target`` (default 2 k^2)."""
    W = xavier_init(n, k, d, seed)
    target = 2.0 * k * k if target is None else target
    return W * (target / np.linalg.norm(W, axis=1).sum())


def _dist(W: np.ndarray, target: np.ndarray | None) -> float:
    return float("nan") if target is None else float(np.sum((W - target) ** 2))


def gradient_descent(W0, V, cfg: GDConfig, target=None) -> RunRecord:
    """Plain GD, W <- W - eta grad F(W), until |grad| <= cfg.grad_norm_stop."""
    W = np.array(W0, dtype=float)
    V = np.atleast_2d(np.asarray(V, dtype=float))
    traj: list[tuple[int, float, float, float]] = []
    gn = float("nan")
    t = 0
    reason = "max_iters"
    while True:
        try:
            G = model.gradient(W, V)
        except NonDifferentiablePoint:
            reason = "non_differentiable"
            break
        gn = float(np.linalg.norm(G))
        if t % cfg.log_stride == 0:
            F = model.objective(W, V)
            traj.append((t, F, gn, _dist(W, target)))
            if not np.isfinite(F) or F > DIVERGENCE_LIMIT:
                reason = "diverged"
                break
        if gn <= cfg.grad_norm_stop:
            reason = "converged"
            break
        if t >= cfg.max_iters:
            break
        W = W - cfg.step_size * G
        t += 1
    F = model.objective(W, V)
    if not traj or traj[-1][0] != t:
        traj.append((t, F, gn, _dist(W, target)))
    return RunRecord(W, t, reason, F, gn, cfg.seed, traj)


def perturbed_gradient_descent(W0, V, cfg: PGDConfig, target=None, grad_fn=None,
                               objective_fn=None) -> RunRecord:
    """Perturbed GD: each step shifts every neuron by the same alpha * xi, xi ~ N(0, I/d),
    then takes a gradient step from the shifted point.

    ``grad_fn``/``objective_fn`` replace the teacher-student loss for
    abstract objectives; ``V`` is then ignored.
    """
    W = np.array(W0, dtype=float)
    grad = grad_fn or (lambda X: model.gradient(X, V))
    obj = objective_fn or (lambda X: model.objective(X, V))
    rng = np.random.default_rng(cfg.seed)
    d = W.shape[1]
    traj: list[tuple[int, float, float, float]] = []
    reason = "completed"
    gn = float("nan")
    t = 0
    for t in range(cfg.iters):
        if cfg.noise_level > 0:
            W = W + cfg.noise_level * rng.normal(0.0, 1.0 / np.sqrt(d), size=d)
        try:
            G = grad(W)
        except NonDifferentiablePoint:
            reason = "non_differentiable"
            break
        gn = float(np.linalg.norm(G))
        if t % cfg.log_stride == 0:
            F = obj(W)
            traj.append((t, F, gn, _dist(W, target)))
            if not np.isfinite(F) or F > DIVERGENCE_LIMIT:
                reason = "diverged"
                break
        W = W - cfg.step_size * G
    else:
        t = cfg.iters
    F = obj(W)
    traj.append((t, F, gn, _dist(W, target)))
    return RunRecord(W, t, reason, F, gn, cfg.seed, traj)


@dataclass(frozen=True)
class PGDRecipe:
    step_size: float
    noise_level: float
    iters: int
    lam: float
    L: float
    delta: float


def pgd_recipe(lam: float, L: float, delta: float, n: int, safety: float = 0.5) -> PGDRecipe:
    """eta = safety * lam delta^2 / (64 L^2), alpha = delta / (4 n),
    T = first integer above log(delta) / log(1 - eta lam delta^2 / 64)."""
    if lam <= 0 or L <= 0:
        raise ValueError("recipe needs lam > 0 and L > 0")
    if not 0 < safety < 1:
        raise ValueError("safety must lie in (0, 1) so the step bound is strict")
    eta = safety * lam * delta ** 2 / (64.0 * L ** 2)
    rate = np.log1p(-eta * lam * delta ** 2 / 64.0)
    T = int(np.floor(np.log(delta) / rate)) + 1
    return PGDRecipe(eta, delta / (4.0 * n), T, lam, L, delta)
