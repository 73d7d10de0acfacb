"""Global minima: construction, recognition, canonical distances and catalogs."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from . import model
from .errors import DimensionMismatch, InvalidSpec


@dataclass
class GlobalMinSpec:
    """Teacher i is shared by the students in ``partition[i]`` with weights ``weights[j]``."""
    partition: dict[int, list[int]]
    weights: np.ndarray

    @property
    def n(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class NotGlobal:
    reason: str


def identity_spec(k: int) -> GlobalMinSpec:
    return GlobalMinSpec({i: [i] for i in range(k)}, np.ones(k))


def balanced_split_spec(k: int, m: int) -> GlobalMinSpec:
    """Each teacher copied into ``m`` students of weight 1/m; student index i*m + j."""
    return GlobalMinSpec({i: list(range(i * m, (i + 1) * m)) for i in range(k)},
                         np.full(k * m, 1.0 / m))


def two_way_split_spec(k: int, alpha: float, teacher: int = 0) -> GlobalMinSpec:
    """n = k+1: students 0, 1 share ``teacher`` as (alpha, 1-alpha); the rest are exact."""
    others = [i for i in range(k) if i != teacher]
    part = {teacher: [0, 1]}
    part.update({t: [2 + r] for r, t in enumerate(others)})
    return GlobalMinSpec(part, np.concatenate([[alpha, 1.0 - alpha], np.ones(k - 1)]))


def validate_spec(spec: GlobalMinSpec, k: int, tol: float = 1e-12) -> None:
    w = np.asarray(spec.weights, dtype=float)
    members = sorted(j for group in spec.partition.values() for j in group)
    if members != list(range(w.size)):
        raise InvalidSpec("partition must be a disjoint cover of the student indices")
    if set(spec.partition) != set(range(k)):
        raise InvalidSpec(f"partition must have one group per teacher 0..{k - 1}")
    if np.any(w < 0):
        raise InvalidSpec("weights must be nonnegative")
    for i, group in spec.partition.items():
        if not group:
            raise InvalidSpec(f"teacher {i} has an empty group")
        if abs(w[group].sum() - 1.0) > tol:
            raise InvalidSpec(f"weights of teacher {i} sum to {w[group].sum()}, not 1")


def build_global_min(V, spec: GlobalMinSpec) -> np.ndarray:
    """Student matrix with w_j = alpha_j v_i for every j in group i."""
    V = np.atleast_2d(np.asarray(V, dtype=float))
    validate_spec(spec, V.shape[0])
    W = np.zeros((spec.n, V.shape[1]))
    for i, group in spec.partition.items():
        for j in group:
            W[j] = spec.weights[j] * V[i]
    return W


def verify_global_structure(W, V, tol: float = 1e-8) -> GlobalMinSpec | NotGlobal:
    """Recover (partition, weights) if W has the global-minimum form, else NotGlobal."""
    W, V = model._pair(W, V)
    k = V.shape[0]
    part: dict[int, list[int]] = {i: [] for i in range(k)}
    weights = np.zeros(W.shape[0])
    for j, w in enumerate(W):
        if np.linalg.norm(w) <= tol:
            # a zero neuron fits any group with weight 0
            part[0].append(j)
            continue
        proj = V @ w
        i = int(np.argmax(proj))
        alpha = proj[i]
        if alpha <= 0 or np.linalg.norm(w - alpha * V[i]) > tol * max(1.0, alpha):
            return NotGlobal(f"student {j} is not a positive multiple of a teacher")
        part[i].append(j)
        weights[j] = alpha
    for i, group in part.items():
        s = weights[group].sum()
        if abs(s - 1.0) > tol:
            return NotGlobal(f"weights on teacher {i} sum to {s:.12g}")
    return GlobalMinSpec(part, weights)


def norm_sum(W) -> float:
    return float(np.linalg.norm(np.atleast_2d(W), axis=1).sum())


def _greedy_match(cost: np.ndarray) -> np.ndarray:
    """Greedy assignment: repeatedly take the cheapest remaining (row, col) pair."""
    m = cost.shape[0]
    perm = np.empty(m, dtype=int)
    c = cost.astype(float).copy()
    for _ in range(m):
        r, col = np.unravel_index(np.argmin(c), c.shape)
        perm[r] = col
        c[r, :] = np.inf
        c[:, col] = np.inf
    return perm


def _row_matched(A: np.ndarray, B: np.ndarray) -> tuple[float, np.ndarray]:
    rows, cols = linear_sum_assignment(cdist(A, B, "sqeuclidean"))
    return float(np.linalg.norm(A[rows] - B[cols])), cols


def _one_sided(A: np.ndarray, B: np.ndarray, n_coords: int, refine: int) -> float:
    d = A.shape[1]

    def with_coords(p: np.ndarray) -> np.ndarray:
        full = np.arange(d)
        full[:n_coords] = p
        return B[:, full]

    sig_a = np.sort(A[:, :n_coords], axis=0)
    sig_b = np.sort(B[:, :n_coords], axis=0)
    candidates = [np.arange(n_coords), _greedy_match(cdist(sig_a.T, sig_b.T, "sqeuclidean"))]
    best = np.inf
    for perm in candidates:
        for _ in range(refine + 1):
            dist, cols = _row_matched(A, with_coords(perm))
            best = min(best, dist)
            # re-match coordinates given the current row pairing
            Bm = B[cols]
            new = _greedy_match(cdist(A[:, :n_coords].T, Bm[:, :n_coords].T, "sqeuclidean"))
            if np.array_equal(new, perm):
                break
            perm = new
    return best


def canonical_distance(W1, W2, n_coords: int | None = None, refine: int = 3) -> float:
    """Frobenius distance minimized over neuron and coordinate permutations.

    Rows are matched optimally (Hungarian method); the first ``n_coords``
    coordinates (default: all) are matched greedily, starting from the
    identity and from sorted-column signatures, with a few alternating
    refinements.  The result is symmetrized by taking both directions.
    """
    A = np.atleast_2d(np.asarray(W1, dtype=float))
    B = np.atleast_2d(np.asarray(W2, dtype=float))
    if A.shape != B.shape:
        raise DimensionMismatch(f"shapes {A.shape} and {B.shape} differ")
    nc = A.shape[1] if n_coords is None else int(n_coords)
    return min(_one_sided(A, B, nc, refine), _one_sided(B, A, nc, refine))


@dataclass
class MinimaCatalog:
    """Distinct minima up to permutation, with how often each was hit."""
    dedup_tolerance: float = 5e-9
    n_coords: int | None = None
    representatives: list[np.ndarray] = field(default_factory=list)
    multiplicities: list[int] = field(default_factory=list)

    def insert(self, W) -> int:
        """Add ``W``; returns the index of its (possibly pre-existing) class."""
        W = np.atleast_2d(np.asarray(W, dtype=float))
        for idx, rep in enumerate(self.representatives):
            if canonical_distance(W, rep, self.n_coords) <= self.dedup_tolerance:
                self.multiplicities[idx] += 1
                return idx
        self.representatives.append(W.copy())
        self.multiplicities.append(1)
        return len(self.representatives) - 1

    def __len__(self) -> int:
        return len(self.representatives)
