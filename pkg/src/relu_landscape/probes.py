"""Constructive landscape probes around global minima.

* non-convexity: two students sharing v_1, tilted off it, give a negative
  Hessian direction arbitrarily close to a global minimum;
* non-OPSC / non-PL: students tilted in opposite directions (+eps v_2, -eps v_2);
* the curvature quantity lhs = (w - w~)^T H(w) (w - w~) at perturbed balanced
  splits, compared against 1/4 (|g|^2 + (1 - 2/pi) sum_i |g_i|^2).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import model
from .errors import InvalidParams, NonDifferentiablePoint
from .kernels import pair_h1
from .minima import balanced_split_spec, build_global_min
from .spectral import eig_symmetric


@dataclass
class NonconvexityWitness:
    point: np.ndarray
    base: np.ndarray
    direction: np.ndarray
    value: float
    formula_value: float
    exact_value: float


@dataclass
class OPSCWitness:
    point: np.ndarray
    base: np.ndarray
    normalized_form: float
    in_neighborhood: bool


@dataclass
class PLWitness:
    point: np.ndarray
    F: float
    grad_norm_sq: float

    @property
    def pl_ratio(self) -> float:
        """|grad F|^2 / (2 F); tends to 0 where PL fails."""
        return self.grad_norm_sq / (2.0 * self.F) if self.F > 0 else float("nan")


@dataclass
class OrthogonalPerturbation:
    base: np.ndarray
    deltas: np.ndarray
    epsilon: float
    orthogonal: bool = False

    @property
    def point(self) -> np.ndarray:
        return self.base + self.deltas


@dataclass
class CurvatureBreakdown:
    lhs: float
    g_norm_sq: float
    group_norms: np.ndarray
    rhs: float
    margin: float
    delta_norm_sq: float

    @property
    def normalized_lhs(self) -> float:
        """lhs / |w - w~|^2."""
        return self.lhs / self.delta_norm_sq


def _orthogonal_unit(v: np.ndarray, V: np.ndarray) -> np.ndarray:
    """A unit vector orthogonal to v: the next teacher if there is one."""
    if V.shape[0] >= 2:
        return V[1].copy()
    q, _ = np.linalg.qr(np.column_stack([v, np.eye(v.size)]))
    return q[:, 1] * np.sign(q[0, 0])


def _check_alphas(alpha1: float, alpha2: float, eps: float, allow_zero_eps: bool = False):
    if alpha1 <= 0 or alpha2 <= 0:
        raise InvalidParams("alpha1 and alpha2 must be positive")
    if eps < 0 or (eps == 0 and not allow_zero_eps):
        raise InvalidParams("eps must be positive")


def _two_student_base(V: np.ndarray, alpha1: float, alpha2: float) -> np.ndarray:
    """(alpha1 v_1, alpha2 v_1, v_2, ..., v_k)."""
    return np.vstack([alpha1 * V[0], alpha2 * V[0], V[1:]])


def nonconvexity_formula(alpha1: float, alpha2: float, eps: float) -> float:
    """Stated closed form -(1+eps)(sin t/pi)(a1+a2)^2/(a1 a2), t = atan(eps)."""
    s = eps / np.hypot(1.0, eps)
    return -(1.0 + eps) * s / np.pi * (alpha1 + alpha2) ** 2 / (alpha1 * alpha2)


def nonconvexity_exact(alpha1: float, alpha2: float, eps: float) -> float:
    """Hessian value along (z, -z, 0, ...): -eps (a1+a2) / (pi (1+eps^2) a1 a2).

    Siblings are parallel so h1 between them vanishes, leaving
    z^T H_11 z = 1/2 - sin t/(pi |w~_1|) with |w~_1| = a1 sqrt(1+eps^2).
    """
    return -eps * (alpha1 + alpha2) / (np.pi * (1.0 + eps * eps) * alpha1 * alpha2)


def nonconvexity_witness(V, alpha1: float, alpha2: float, eps: float) -> NonconvexityWitness:
    """Point near a global minimum with an explicit negative Hessian direction."""
    V = model.check_teacher(V)
    _check_alphas(alpha1, alpha2, eps)
    k, d = V.shape
    if d < 2:
        raise InvalidParams("need d >= 2 to tilt off v_1")
    u = _orthogonal_unit(V[0], V)
    base = _two_student_base(V, alpha1, alpha2)
    W = base.copy()
    W[0] = alpha1 * (V[0] + eps * u)
    W[1] = alpha2 * (V[0] + eps * u)
    z = eig_symmetric(pair_h1(W[0], V[0])).eigenvectors[:, -1]
    direction = np.zeros(W.size)
    direction[:d] = z
    direction[d:2 * d] = -z
    value = float(direction @ model.hessian(W, V) @ direction)
    return NonconvexityWitness(W, base, direction, value,
                               nonconvexity_formula(alpha1, alpha2, eps),
                               nonconvexity_exact(alpha1, alpha2, eps))


def _opposite_tilt(V: np.ndarray, alpha1: float, alpha2: float, eps: float):
    if V.shape[0] < 2:
        raise InvalidParams("need k >= 2 for the opposite-tilt witness")
    base = _two_student_base(V, alpha1, alpha2)
    W = base.copy()
    W[0] = alpha1 * V[0] + eps * V[1]
    W[1] = alpha2 * V[0] - eps * V[1]
    return W, base


def in_orthogonal_neighborhood(W, base, eps: float, tol: float = 1e-12) -> bool:
    """Every delta has norm <= eps and is orthogonal to its base neuron."""
    D = np.asarray(W) - np.asarray(base)
    norms = np.linalg.norm(D, axis=1)
    inner = np.abs(np.sum(D * base, axis=1))
    return bool(np.all(norms <= eps * (1 + tol) + tol)
                and np.all(inner <= tol * np.maximum(1.0, np.linalg.norm(base, axis=1))))


def opsc_witness(V, alpha1: float, alpha2: float, eps: float) -> OPSCWitness:
    """Normalized curvature toward the base minimum at the opposite-tilt point."""
    V = model.check_teacher(V)
    _check_alphas(alpha1, alpha2, eps)
    W, base = _opposite_tilt(V, alpha1, alpha2, eps)
    D = (W - base).ravel()
    form = float(D @ model.hessian(W, V) @ D / (D @ D))
    return OPSCWitness(W, base, form, in_orthogonal_neighborhood(W, base, eps))


def pl_witness(V, alpha1: float, alpha2: float, eps: float) -> PLWitness:
    """Loss and squared gradient norm at the opposite-tilt point."""
    V = model.check_teacher(V)
    _check_alphas(alpha1, alpha2, eps, allow_zero_eps=True)
    W, _ = _opposite_tilt(V, alpha1, alpha2, eps)
    G = model.gradient(W, V)
    return PLWitness(W, model.objective(W, V), float(np.sum(G * G)))


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of log|y| against log x."""
    return float(np.polyfit(np.log(np.asarray(xs, float)), np.log(np.abs(np.asarray(ys, float))), 1)[0])


def balanced_base(V, m: int) -> np.ndarray:
    """Balanced m-split global minimum: w_{i,j} = v_i / m at row i*m + j."""
    V = np.atleast_2d(V)
    return build_global_min(V, balanced_split_spec(V.shape[0], m))


def sample_orthogonal_neighborhood(base, eps: float, mode: str = "gaussian", seed: int = 0,
                                   variance: float = 1e-5, orthogonal: bool = False,
                                   m: int | None = None) -> OrthogonalPerturbation:
    """Random perturbation of ``base``.

    ``gaussian``: i.i.d. N(0, variance) entries, optionally projected
    orthogonal to each base neuron.  ``adversarial``: the same, then the
    first delta of each group of ``m`` consecutive students is replaced by
    minus the sum of the others so each group sums to zero.  Deltas longer
    than ``eps`` are shrunk (per neuron, or per group in adversarial mode)
    to keep every |g_ij| <= eps.
    """
    if eps <= 0:
        raise InvalidParams("eps must be positive")
    base = np.atleast_2d(np.asarray(base, dtype=float))
    rng = np.random.default_rng(seed)
    D = rng.normal(0.0, np.sqrt(variance), size=base.shape)
    if orthogonal:
        unit = base / np.linalg.norm(base, axis=1, keepdims=True)
        D -= np.sum(D * unit, axis=1, keepdims=True) * unit
    if mode == "adversarial":
        if m is None or base.shape[0] % m:
            raise InvalidParams("adversarial mode needs the group size m dividing n")
        G = D.reshape(-1, m, base.shape[1])
        G[:, 0] = -G[:, 1:].sum(axis=1)
        worst = np.linalg.norm(G, axis=2).max(axis=1)
        G *= np.minimum(1.0, eps / np.maximum(worst, 1e-300))[:, None, None]
        D = G.reshape(base.shape)
    elif mode == "gaussian":
        norms = np.linalg.norm(D, axis=1, keepdims=True)
        D *= np.minimum(1.0, eps / np.maximum(norms, 1e-300))
    else:
        raise InvalidParams(f"unknown mode {mode!r}")
    return OrthogonalPerturbation(base, D, float(eps), orthogonal)


def curvature_breakdown(V, m: int, perturbation: OrthogonalPerturbation) -> CurvatureBreakdown:
    """lhs = D^T H(w~ + D) D against 1/4 (|g|^2 + (1 - 2/pi) sum_i |g_i|^2)."""
    V = np.atleast_2d(np.asarray(V, dtype=float))
    k, d = V.shape
    W = perturbation.point
    if W.shape != (k * m, d):
        raise InvalidParams(f"expected {k * m} students for k={k}, m={m}")
    if not np.allclose(perturbation.base, balanced_base(V, m), rtol=0, atol=1e-12):
        raise InvalidParams("base must be the balanced m-split of V")
    if np.any(np.linalg.norm(W, axis=1) < model.ZERO_NEURON_TOL):
        raise NonDifferentiablePoint("a perturbed neuron vanished")
    D = perturbation.deltas
    lhs = float(D.ravel() @ model.hessian(W, V) @ D.ravel())
    groups = D.reshape(k, m, d).sum(axis=1)
    group_norms = np.sum(groups * groups, axis=1)
    g = D.sum(axis=0)
    g_norm_sq = float(g @ g)
    rhs = 0.25 * (g_norm_sq + (1.0 - 2.0 / np.pi) * group_norms.sum())
    return CurvatureBreakdown(lhs, g_norm_sq, group_norms, float(rhs), lhs - float(rhs),
                              float(np.sum(D * D)))
