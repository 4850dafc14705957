"""Discrete empirical interpolation (greedy index selection and projected evaluation)."""
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import DegenerateBasis, InvalidInput


@dataclass(frozen=True)
class DeimOperator:
    psi: np.ndarray         # n x m collateral basis
    indices: np.ndarray     # m interpolation rows
    projector: np.ndarray   # k x m, phi^T psi (P^T psi)^{-1}

    @property
    def m(self):
        return self.indices.size

    def apply(self, sampled):
        """Reduced nonlinear term from its values at ``indices``."""
        sampled = np.asarray(sampled, dtype=float)
        if sampled.shape[0] != self.indices.size:
            raise InvalidInput(f"expected {self.indices.size} samples, got {sampled.shape[0]}")
        return self.projector @ sampled

    def reconstruct(self, sampled):
        """Full-length interpolant psi (P^T psi)^{-1} sampled."""
        coeffs = np.linalg.solve(self.psi[self.indices], sampled)
        return self.psi @ coeffs


def select_indices(psi, cond_limit=1e14):
    """Greedy DEIM point selection.

    The first index maximizes |psi_1|; each later one maximizes the residual of
    interpolating the next basis vector at the points chosen so far.  Ties go
    to the lowest index (``argmax`` semantics).
    """
    psi = np.asarray(psi, dtype=float)
    if psi.ndim == 1:
        psi = psi[:, None]
    n, m = psi.shape
    if m > n:
        raise DegenerateBasis(f"cannot pick {m} distinct points from {n} rows")
    idx = [int(np.argmax(np.abs(psi[:, 0])))]
    if psi[idx[0], 0] == 0.0:
        raise DegenerateBasis("first collateral vector is zero")
    for l in range(1, m):
        sub = psi[idx, :l]
        if np.linalg.cond(sub) > cond_limit:
            raise DegenerateBasis(f"interpolation matrix singular at step {l}")
        c = np.linalg.solve(sub, psi[idx, l])
        r = psi[:, l] - psi[:, :l] @ c
        p = int(np.argmax(np.abs(r)))
        if np.abs(r[p]) <= 1e-14 * max(1.0, np.max(np.abs(psi[:, l]))):
            raise DegenerateBasis(f"collateral vector {l} is dependent on its predecessors")
        idx.append(p)
    return np.array(idx, dtype=int)


def make_operator(phi, psi, indices):
    """Precompute phi^T psi (P^T psi)^{-1} once."""
    phi = getattr(phi, "phi", phi)
    psi = np.asarray(psi, dtype=float)
    indices = np.asarray(indices, dtype=int)
    if phi.shape[0] != psi.shape[0] or indices.size != psi.shape[1]:
        raise InvalidInput("phi, psi and indices are not conformable")
    if len(set(indices.tolist())) != indices.size:
        raise InvalidInput("interpolation indices must be distinct")
    pt_psi = psi[indices]
    if np.linalg.cond(pt_psi) > 1e14:
        raise DegenerateBasis("P^T psi is singular")
    # projector = (phi^T psi) (P^T psi)^{-1}, computed through a transposed solve
    projector = sla.solve(pt_psi.T, (phi.T @ psi).T).T
    return DeimOperator(psi, indices, projector)


def error_bound(op, g):
    """||(P^T psi)^{-1}||_2 * ||(I - psi psi^T) g||: the DEIM amplification bound."""
    amp = np.linalg.norm(np.linalg.inv(op.psi[op.indices]), 2)
    return float(amp * np.linalg.norm(g - op.psi @ (op.psi.T @ g)))
