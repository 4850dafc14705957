"""Global, local and adaptive POD bases, projection errors, information matrices."""
from dataclasses import dataclass, field

import numpy as np

from . import numerics
from .errors import EmptySegment, InvalidInput, InvalidRank
from .sampling import distances, neighbors, weight


@dataclass
class SnapshotEnsemble:
    """Parameter samples with their solution snapshots.

    ``states`` holds one snapshot per column.  ``nonlinear`` (same shape) holds
    the nonlinear-term snapshots; ``jacobians`` is problem-specific (the
    elliptic problem stores the diagonal of its nonlinear Jacobian part).
    """

    params: np.ndarray
    states: np.ndarray
    nonlinear: np.ndarray = None
    jacobians: object = None

    def __post_init__(self):
        self.params = np.atleast_2d(np.asarray(self.params, dtype=float))
        self.states = np.asarray(self.states, dtype=float)
        if self.states.ndim != 2 or self.states.shape[1] != len(self.params):
            raise InvalidInput("states must have one column per parameter")
        if not np.all(np.isfinite(self.states)):
            raise InvalidInput("states contain non-finite values")
        if self.nonlinear is not None:
            self.nonlinear = np.asarray(self.nonlinear, dtype=float)
            if self.nonlinear.shape != self.states.shape:
                raise InvalidInput("nonlinear snapshots must match states in shape")

    @property
    def size(self):
        return self.states.shape[1]

    @property
    def dim(self):
        return self.states.shape[0]


@dataclass
class ReducedBasis:
    phi: np.ndarray
    provenance: str                 # "GRM", "LRM" or "ARM"
    singular_values: np.ndarray
    subdomain: int = None
    neighbors: np.ndarray = None    # LRM only
    kernel: object = None           # ARM only

    @property
    def k(self):
        return self.phi.shape[1]

    @property
    def n(self):
        return self.phi.shape[0]

    def project(self, u):
        return self.phi.T @ u

    def lift(self, v):
        return self.phi @ v


def _pod(matrix, k, pad, cache=None, key=None):
    """Leading-k POD frame of ``matrix`` and all its singular values.

    With ``pad`` set, a rank-deficient matrix yields its r-dimensional range
    completed with coordinate directions; otherwise rank < k is an error.
    ``cache`` (a dict) memoizes the SVD under ``key`` for repeated truncations.
    """
    if not np.any(matrix):
        sigma = np.zeros(min(matrix.shape))
        if not pad:
            raise InvalidRank("snapshot matrix is zero")
        return numerics.complete_frame(np.zeros((matrix.shape[0], 0)), k), sigma
    if cache is not None and key in cache:
        res = cache[key]
    else:
        res = numerics.svd(matrix)
        if cache is not None:
            cache[key] = res
    r = res.rank()
    if r >= k:
        return res.u[:, :k].copy(), res.sigma
    if not pad:
        raise InvalidRank(f"k={k} exceeds numerical rank {r}")
    return numerics.complete_frame(res.u[:, :r], k), res.sigma


def build_grm(ens, k, cache=None):
    """Global POD basis from every snapshot in the ensemble."""
    phi, sigma = _pod(ens.states, k, pad=False, cache=cache, key=("grm", id(ens.states)))
    return ReducedBasis(phi, "GRM", sigma)


def build_lrm(ens, center, neighbor_count, k, domain):
    """POD basis of the ``neighbor_count`` snapshots nearest to ``params[center]``.

    The center itself is one of the selected snapshots.
    """
    if not 1 <= neighbor_count <= ens.size:
        raise InvalidInput(f"neighbor_count must lie in [1, {ens.size}]")
    if k > neighbor_count:
        raise InvalidRank("k cannot exceed the neighborhood size")
    idx = neighbors(center, ens.params, neighbor_count, domain)
    phi, sigma = _pod(ens.states[:, idx], k, pad=False)
    return ReducedBasis(phi, "LRM", sigma, subdomain=center, neighbors=np.sort(idx))


def weighted_snapshots(data, params, center, kernel, domain):
    a = weight(kernel, distances(params[center], params, domain))
    return data * a, a


def build_arm(ens, center, kernel, k, domain, data=None, cache=None):
    """Adaptive basis: POD of the kernel-weighted snapshot matrix about ``center``.

    ``data`` overrides the matrix being weighted (used for the collateral
    basis of nonlinear snapshots).  When the weighted matrix has rank r <= k
    its range is completed with coordinate directions, so the basis always has
    width k.
    """
    if k > ens.dim:
        raise InvalidRank(f"k={k} exceeds state dimension {ens.dim}")
    source = ens.states if data is None else data
    xa, _ = weighted_snapshots(source, ens.params, center, kernel, domain)
    phi, sigma = _pod(xa, k, pad=True, cache=cache, key=("arm", id(source), center, kernel))
    return ReducedBasis(phi, "ARM", sigma, subdomain=center, kernel=kernel)


def projection_error(basis, data):
    """Frobenius norm of ``data - phi phi^T data``."""
    phi = basis.phi if isinstance(basis, ReducedBasis) else np.asarray(basis)
    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    if data.shape[0] != phi.shape[0]:
        raise InvalidInput(f"data has {data.shape[0]} rows, basis has {phi.shape[0]}")
    return float(np.linalg.norm(data - phi @ (phi.T @ data)))


def relative_projection_error(basis, u):
    return projection_error(basis, u) / float(np.linalg.norm(u))


def normalized_singular_values(sigma):
    sigma = np.asarray(sigma, dtype=float)
    return sigma / sigma[0] if sigma.size and sigma[0] > 0 else sigma


# -- parabolic problems --------------------------------------------------------

@dataclass
class TrajectoryBasis:
    phi: np.ndarray       # n x k_i
    sigma: np.ndarray     # leading k_i singular values
    tail: float           # E_i, Frobenius truncation error of the trajectory


@dataclass
class TrajectoryEnsemble:
    params: np.ndarray
    trajectories: list
    bases: list = field(default_factory=list)

    def __post_init__(self):
        self.params = np.atleast_2d(np.asarray(self.params, dtype=float))
        if len(self.trajectories) != len(self.params):
            raise InvalidInput("need one trajectory per parameter")

    def compress(self, tol=1e-6, max_modes=80, relative=True):
        """Per-trajectory POD with adaptive truncation (fills ``bases``)."""
        self.bases = [trajectory_basis(x, tol, max_modes, relative) for x in self.trajectories]
        return self


def trajectory_basis(x, tol=1e-6, max_modes=80, relative=True):
    """Smallest k with tail error <= tol (times ||x||_F if relative), capped."""
    res = numerics.svd(x)
    s = res.sigma
    eps = tol * float(np.linalg.norm(s)) if relative else tol
    tails = np.sqrt(np.maximum(np.cumsum((s**2)[::-1])[::-1], 0.0))   # tails[j] = E for k=j
    tails = np.append(tails, 0.0)
    k = int(np.argmax(tails <= eps))
    k = max(1, min(k, max_modes, res.rank() or 1))
    return TrajectoryBasis(res.u[:, :k].copy(), s[:k].copy(), float(tails[k]))


def information_matrix(traj, center, kernel, domain, floor=0.0):
    """Concatenation of a_j * Phi_j * diag(sigma_j) over trajectories.

    With ``floor`` > 0, blocks whose weight is at most ``floor * max(a)`` are
    left out; at floor ~ 1e-16 they sit below the SVD rank tolerance anyway.
    """
    if not traj.bases:
        raise InvalidInput("trajectory ensemble has no per-trajectory bases; call compress()")
    a = weight(kernel, distances(traj.params[center], traj.params, domain))
    cut = floor * a.max()
    blocks = [aj * (b.phi * b.sigma) for aj, b in zip(a, traj.bases) if floor == 0 or aj > cut]
    return np.hstack(blocks)


def information_bound(traj, center, kernel, domain, phi):
    """Both sides of the information-matrix bound for a candidate frame ``phi``.

    Returns (lhs, rhs) where lhs is the projection error of the full weighted
    snapshot matrix and rhs = E_0 + sqrt(sum a_j^2 E_j^2).
    """
    a = weight(kernel, distances(traj.params[center], traj.params, domain))
    xa = np.hstack([aj * x for aj, x in zip(a, traj.trajectories)])
    info = information_matrix(traj, center, kernel, domain)
    e0 = projection_error(phi, info)
    tails = np.array([b.tail for b in traj.bases])
    return projection_error(phi, xa), e0 + float(np.sqrt(np.sum(a**2 * tails**2)))


def segment_windows(t_end, count, overlap=1.0, t_start=0.0):
    """Nominal windows splitting [t_start, t_end] into ``count`` equal pieces.

    Returns (nominal, extended) lists of (lo, hi); each extended window reaches
    ``overlap`` time units into its neighbours, clipped to the full interval.
    With t_end=50, count=10, overlap=1 this gives [0,6], [4,11], ...
    """
    edges = np.linspace(t_start, t_end, count + 1)
    nominal = [(float(edges[i]), float(edges[i + 1])) for i in range(count)]
    extended = [(max(t_start, lo - overlap), min(t_end, hi + overlap)) for lo, hi in nominal]
    return nominal, extended


def segment_trajectories(full, times, segments, atol=1e-9):
    """Columns of ``full`` whose time stamps fall in each closed window."""
    times = np.asarray(times, dtype=float)
    if full.shape[1] != times.size:
        raise InvalidInput("one time stamp per snapshot column required")
    out = []
    for lo, hi in segments:
        mask = (times >= lo - atol) & (times <= hi + atol)
        if not np.any(mask):
            raise EmptySegment(f"no snapshots in [{lo}, {hi}]")
        out.append(full[:, mask])
    return out
