"""Dominant eigenpair of the non-negative transition weight matrix.

Power iteration with a statistically normalized start; the second
eigenvalue magnitude comes from iterating the matrix deflated with the
left dominant eigenvector, which is enough to decide simplicity of the
leading eigenvalue at the tolerances used here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class PfResult:
    lambda_max: float
    w: np.ndarray
    simple: bool
    gap: float


def _power(mat, tol, maxit):
    n = mat.shape[0]
    v = np.full(n, 1.0 / n)
    lam = 0.0
    for _ in range(maxit):
        u = mat @ v
        s = u.sum()
        if s <= 0:
            raise RuntimeError("power iteration collapsed to the zero vector")
        lam = s
        u = u / s
        if np.max(np.abs(mat @ u - lam * u)) <= tol * max(1.0, lam):
            return lam, u
        v = u
    resid = np.max(np.abs(mat @ v - lam * v))
    raise RuntimeError(f"power iteration did not converge after {maxit} "
                       f"iterations (residual {resid:.3e}); the dominant "
                       "eigenvalue may not be isolated in modulus")


def _second_magnitude(mat, lam, w, left):
    denom = left @ w
    if abs(denom) < 1e-14:
        return None
    deflated = mat - lam * np.outer(w, left) / denom

    def project(y):
        return y - w * (left @ y) / denom

    n = mat.shape[0]
    starts = [np.ones(n)] + [np.eye(n)[k] for k in range(n)]
    y = None
    for s in starts:
        cand = project(s)
        if np.linalg.norm(cand) > 1e-9:
            y = cand / np.linalg.norm(cand)
            break
    if y is None:
        return 0.0
    logs = []
    for it in range(300):
        z = deflated @ y
        norm = np.linalg.norm(z)
        if norm < 1e-300:
            return 0.0
        if it >= 280:
            logs.append(np.log(norm))
        y = z / norm
    return float(np.exp(np.mean(logs)))


def pf_eigen(nu, tol=1e-12, maxit=100000):
    """Dominant eigenvalue and statistically normalized eigenvector.

    Raises on negative entries and when the iteration cannot converge
    (e.g. two dominant eigenvalues of equal modulus).  Entries of w that
    fall below the snapping threshold are set to exact zero before the
    final normalization, so structurally vanishing components print as 0.
    """
    nu = np.asarray(nu, dtype=float)
    if nu.ndim != 2 or nu.shape[0] != nu.shape[1]:
        raise ValueError("nu must be a square matrix")
    if np.any(nu < 0):
        raise ValueError("nu must be entrywise non-negative")
    if not np.any(nu > 0):
        raise ValueError("nu must be non-zero")
    lam, w = _power(nu, tol, maxit)
    w = w.copy()
    w[w < 10 * tol] = 0.0
    w = w / w.sum()
    _, left = _power(nu.T, tol, maxit)
    second = _second_magnitude(nu, lam, w, left)
    if second is None:
        return PfResult(lambda_max=float(lam), w=w, simple=False, gap=0.0)
    gap = float(lam - second)
    return PfResult(lambda_max=float(lam), w=w, simple=gap > tol, gap=gap)


def check_pf1(result, tol=1e-10):
    """Spectral radius equal to one, within tol."""
    return abs(result.lambda_max - 1.0) <= tol
