"""Parameter domains, sampling grids, distances and weighting kernels."""
from dataclasses import dataclass, field
import itertools

import numpy as np

from .errors import InvalidInput, NoValidSubdomain


@dataclass(frozen=True)
class ParameterDomain:
    """Axis-aligned box with per-coordinate distance divisors."""

    lower: tuple
    upper: tuple
    scale: tuple = None

    def __post_init__(self):
        lower = tuple(float(x) for x in self.lower)
        upper = tuple(float(x) for x in self.upper)
        scale = tuple(float(x) for x in (self.scale if self.scale is not None else [1.0] * len(lower)))
        if not (len(lower) == len(upper) == len(scale)) or not lower:
            raise InvalidInput("lower, upper and scale must share a positive length")
        if any(lo >= hi for lo, hi in zip(lower, upper)):
            raise InvalidInput("lower bounds must be strictly below upper bounds")
        if any(s <= 0 for s in scale):
            raise InvalidInput("scale entries must be positive")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "scale", scale)

    @property
    def dim(self):
        return len(self.lower)

    def sample(self, count, rng):
        """``count`` points drawn uniformly from the box with a numpy Generator."""
        lo, hi = np.array(self.lower), np.array(self.upper)
        return lo + (hi - lo) * rng.random((count, self.dim))


# Domains used by the two model problems.  The cavity divides Re by 2000 so
# that Reynolds number and aspect ratio contribute on a comparable scale.
ELLIPTIC_DOMAIN = ParameterDomain((0.01, 0.01), (10.0, 10.0))
CAVITY_DOMAIN = ParameterDomain((500.0, 0.75), (1700.0, 1.25), (2000.0, 1.0))


@dataclass(frozen=True)
class WeightingKernel:
    """Maps a parameter distance to a snapshot weight in [0, 1].

    kind is ``"gaussian"`` (uses ``width`` as sigma), ``"compact"`` (uses
    ``width`` as the cut-off radius epsilon) or ``"uniform"``.
    """

    kind: str = "gaussian"
    width: float = field(default=1.0)

    def __post_init__(self):
        if self.kind not in ("gaussian", "compact", "uniform"):
            raise InvalidInput(f"unknown kernel kind {self.kind!r}")
        if self.kind != "uniform" and not self.width > 0:
            raise InvalidInput("kernel width must be positive")

    @classmethod
    def gaussian(cls, sigma):
        return cls("gaussian", sigma)

    @classmethod
    def compact(cls, epsilon):
        return cls("compact", epsilon)

    @classmethod
    def uniform(cls):
        return cls("uniform", float("inf"))


def uniform_grid(domain, counts):
    """Cartesian grid of equispaced points, last coordinate varying fastest.

    An axis with a single point uses the interval midpoint; otherwise both
    endpoints are included.  Returns an array of shape (prod(counts), d).
    """
    if len(counts) != domain.dim:
        raise InvalidInput("need one count per parameter axis")
    axes = []
    for lo, hi, c in zip(domain.lower, domain.upper, counts):
        if c < 1:
            raise InvalidInput("grid counts must be >= 1")
        axes.append(np.array([0.5 * (lo + hi)]) if c == 1 else np.linspace(lo, hi, c))
    return np.array(list(itertools.product(*axes)), dtype=float)


def distance(a, b, domain):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.shape[-1] != domain.dim:
        raise InvalidInput(f"dimension mismatch: {a.shape} vs {b.shape} in a {domain.dim}-d domain")
    return float(np.sqrt(np.sum(((a - b) / np.asarray(domain.scale)) ** 2)))


def distances(target, points, domain):
    """Vectorized ``distance`` from one target to each row of ``points``."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    target = np.asarray(target, dtype=float)
    if target.shape != (domain.dim,) or points.shape[1] != domain.dim:
        raise InvalidInput("dimension mismatch")
    return np.sqrt(np.sum(((points - target) / np.asarray(domain.scale)) ** 2, axis=1))


def weight(kernel, dist):
    """Kernel weight for a distance (scalar or array)."""
    d = np.asarray(dist, dtype=float)
    if np.any(d < 0) or not np.all(np.isfinite(d)):
        raise InvalidInput("distances must be finite and non-negative")
    if kernel.kind == "gaussian":
        w = np.exp(-d**2 / (2.0 * kernel.width**2))
    elif kernel.kind == "compact":
        w = (d < kernel.width).astype(float)
    else:
        w = np.ones_like(d)
    return float(w) if w.ndim == 0 else w


def weights_about(center, points, kernel, domain):
    return weight(kernel, distances(points[center], points, domain))


def nearest_reference(target, refs, domain, excluded=()):
    """Index of the closest non-excluded reference; ties go to the lowest index."""
    d = distances(target, refs, domain)
    excluded = set(int(i) for i in excluded)
    best = None
    for i in range(len(d)):
        if i in excluded:
            continue
        if best is None or d[i] < d[best]:
            best = i
    if best is None:
        raise NoValidSubdomain("every reference point is excluded")
    return best


def neighbors(center, points, count, domain):
    """Indices of the ``count`` points closest to ``points[center]`` (center first).

    Sorting is stable, so equidistant points are taken in index order.
    """
    d = distances(points[center], points, domain)
    d[center] = -1.0
    return np.argsort(d, kind="stable")[:count]
