"""Dense linear-algebra kernels.

Matrices are plain 2-D ``numpy.ndarray`` objects.  Every routine here is a
pure function of its inputs.
"""
from dataclasses import dataclass
import warnings

import numpy as np
import scipy.linalg as sla

from .errors import InvalidInput, InvalidRank, SingularMatrix


@dataclass(frozen=True)
class NumericsConfig:
    rank_tol: float = 1e-12       # relative to sigma_max
    drop_tol: float = 1e-12       # Gram-Schmidt column drop, relative to max column norm
    pivot_tol: float = 1e-14      # LU pivot floor, relative to max |a_ij|


DEFAULT = NumericsConfig()


@dataclass(frozen=True)
class SvdResult:
    u: np.ndarray
    sigma: np.ndarray
    vt: np.ndarray

    def rank(self, rank_tol=DEFAULT.rank_tol):
        if self.sigma.size == 0 or self.sigma[0] == 0.0:
            return 0
        return int(np.count_nonzero(self.sigma > rank_tol * self.sigma[0]))

    def reconstruct(self):
        return (self.u * self.sigma) @ self.vt


def _as_matrix(a):
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise InvalidInput(f"expected a non-empty 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInput("matrix has non-finite entries")
    return a


def svd(a):
    """Thin SVD ``a = u @ diag(sigma) @ vt`` with sigma descending."""
    a = _as_matrix(a)
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError:
        # gesdd occasionally fails to converge; gesvd is slower but robust
        u, s, vt = sla.svd(a, full_matrices=False, lapack_driver="gesvd")
    return SvdResult(u, s, vt)


def truncated_svd(a, k):
    """Leading ``k`` singular triplets of ``a``."""
    a = _as_matrix(a)
    if not 1 <= k <= min(a.shape):
        raise InvalidRank(f"k={k} outside [1, {min(a.shape)}]")
    full = svd(a)
    return SvdResult(full.u[:, :k].copy(), full.sigma[:k].copy(), full.vt[:k].copy())


def tail_energy(sigma, k):
    """sqrt(sum_{i>k} sigma_i^2): Frobenius error of the rank-k truncation."""
    sigma = np.asarray(sigma, dtype=float)
    return float(np.sqrt(np.sum(sigma[k:] ** 2)))


def orthonormalize(a, cfg=DEFAULT):
    """Orthonormal frame for the column space of ``a``.

    Modified Gram-Schmidt with one re-orthogonalization pass.  Columns whose
    norm after projection falls below ``drop_tol`` times the largest input
    column norm are dropped, so the result may have fewer columns than ``a``.
    """
    a = np.array(a, dtype=float, copy=True)
    if a.ndim == 1:
        a = a[:, None]
    n = a.shape[0]
    scale = np.max(np.linalg.norm(a, axis=0)) if a.size else 0.0
    if scale == 0.0:
        return np.zeros((n, 0))
    q = []
    for j in range(a.shape[1]):
        v = a[:, j]
        for _ in range(2):
            for qi in q:
                v = v - (qi @ v) * qi
        nv = np.linalg.norm(v)
        if nv > cfg.drop_tol * scale:
            q.append(v / nv)
    if not q:
        return np.zeros((n, 0))
    return np.column_stack(q)


def complete_frame(q, k):
    """Pad an orthonormal ``q`` (n x r) to width ``k`` with coordinate directions.

    Candidates e_0, e_1, ... are orthogonalized against the running frame and
    the first ones that survive are kept.
    """
    n, r = q.shape
    if k > n:
        raise InvalidRank(f"cannot build {k} orthonormal vectors in R^{n}")
    cols = [q[:, j] for j in range(r)]
    i = 0
    while len(cols) < k:
        v = np.zeros(n)
        v[i] = 1.0
        for _ in range(2):
            for c in cols:
                v = v - (c @ v) * c
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            cols.append(v / nv)
        i += 1
    return np.column_stack(cols) if cols else np.zeros((n, 0))


def lu_factor(a, cfg=DEFAULT):
    """Partial-pivoting LU factors, rejecting (numerically) singular input."""
    a = _as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise InvalidInput(f"matrix must be square, got {a.shape}")
    amax = np.max(np.abs(a))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)   # singularity is reported below
        lu, piv = sla.lu_factor(a, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if amax == 0.0 or np.min(pivots) < cfg.pivot_tol * amax:
        raise SingularMatrix(f"pivot {np.min(pivots):.3e} below {cfg.pivot_tol:g} * {amax:.3e}")
    return lu, piv


def lu_solve(a, b, cfg=DEFAULT):
    """Solve ``a x = b`` by LU with partial pivoting."""
    a = _as_matrix(a)
    b = np.asarray(b, dtype=float)
    if b.shape[0] != a.shape[0]:
        raise InvalidInput(f"rhs length {b.shape[0]} does not match {a.shape}")
    factors = lu_factor(a, cfg)
    return sla.lu_solve(factors, b, check_finite=False)


def principal_angles(a, b):
    """Principal angles (radians) between the column spaces of two orthonormal frames."""
    s = np.linalg.svd(a.T @ b, compute_uv=False)
    return np.arccos(np.clip(s, -1.0, 1.0))


def subspace_distance(a, b):
    """Sine of the largest principal angle between two equal-width frames."""
    if a.shape[1] != b.shape[1]:
        return 1.0
    return float(np.linalg.norm(b - a @ (a.T @ b), 2))
