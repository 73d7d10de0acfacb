"""Symmetric eigendecomposition helpers, PSD tests and quadratic forms."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import DimensionMismatch, NotSymmetric, TargetOutOfRange


@dataclass
class SpectralReport:
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # columns, matching eigenvalues
    min_eigvec: np.ndarray
    psd: bool
    tolerance_used: float

    @property
    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def max_eigenvalue(self) -> float:
        return float(self.eigenvalues[-1])


def _fix_sign(vecs: np.ndarray) -> np.ndarray:
    """Flip each column so its first nonzero coordinate is positive."""
    vecs = vecs.copy()
    for c in range(vecs.shape[1]):
        nz = np.flatnonzero(np.abs(vecs[:, c]) > 1e-12)
        if nz.size and vecs[nz[0], c] < 0:
            vecs[:, c] *= -1
    return vecs


def check_symmetric(M, rtol: float = 1e-8) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {M.shape}")
    scale = max(np.linalg.norm(M), 1.0)
    if np.linalg.norm(M - M.T) > rtol * scale:
        raise NotSymmetric("matrix is not symmetric within tolerance")
    return M


def psd_tolerance(M: np.ndarray, eigenvalues: np.ndarray | None = None) -> float:
    """Default PSD slack 1e-9 * max(1, |M|_2)."""
    if eigenvalues is None:
        spec_norm = np.linalg.norm(M, 2)
    else:
        spec_norm = np.max(np.abs(eigenvalues))
    return 1e-9 * max(1.0, float(spec_norm))


def eig_symmetric(M, tol: float | None = None) -> SpectralReport:
    """Full spectrum of a symmetric matrix with a PSD verdict."""
    M = check_symmetric(M)
    sym = 0.5 * (M + M.T)
    vals, vecs = np.linalg.eigh(sym)
    vecs = _fix_sign(vecs)
    tol = psd_tolerance(sym, vals) if tol is None else tol
    return SpectralReport(vals, vecs, vecs[:, 0], bool(vals[0] >= -tol), tol)


def min_eigenvalue(M) -> float:
    M = check_symmetric(M)
    return float(np.linalg.eigvalsh(0.5 * (M + M.T))[0])


def quadratic_form(M, x) -> float:
    M = np.asarray(M, dtype=float)
    x = np.asarray(x, dtype=float).ravel()
    if M.shape != (x.size, x.size):
        raise DimensionMismatch(f"matrix {M.shape} vs vector of length {x.size}")
    return float(x @ M @ x)


def find_level_direction(M, target: float, tol: float = 1e-10) -> np.ndarray:
    """Unit u with u^T M u = target.

    Bisects along gamma(t) = normalize((1 - t) u_min + t u_max), which sweeps
    the Rayleigh quotient continuously from lambda_min to lambda_max.
    """
    rep = eig_symmetric(M)
    M = 0.5 * (np.asarray(M, dtype=float) + np.asarray(M, dtype=float).T)
    lo, hi = rep.eigenvalues[0], rep.eigenvalues[-1]
    if target < lo - tol or target > hi + tol:
        raise TargetOutOfRange(f"target {target} outside [{lo}, {hi}]")
    u0, u1 = rep.eigenvectors[:, 0], rep.eigenvectors[:, -1]

    def gamma(t: float) -> np.ndarray:
        u = (1.0 - t) * u0 + t * u1
        return u / np.linalg.norm(u)

    def level(t: float) -> float:
        u = gamma(t)
        return float(u @ M @ u) - target

    if abs(level(0.0)) <= tol:
        return u0
    if abs(level(1.0)) <= tol:
        return u1
    t = brentq(level, 0.0, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    u = gamma(t)
    if abs(u @ M @ u - target) > tol:
        raise TargetOutOfRange("bisection did not reach the requested level")
    return u
