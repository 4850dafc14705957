"""Nonlinear elliptic test problem with full and reduced (chord / Newton) solvers.

The model problem on the unit square with homogeneous Dirichlet data is

    -lap(u) + (mu1/mu2) (exp(mu2 u) - 1) = 100 cos(2 pi x) cos(2 pi y)

discretized with the 5-point Laplacian on the interior nodes
x_i = i/(grid_n+1), i = 1..grid_n.  Unknowns are ordered with y fastest.
"""
from dataclasses import dataclass, field
import time

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import numerics
from .basis import ReducedBasis, build_arm, build_grm, build_lrm, SnapshotEnsemble
from .deim import make_operator, select_indices
from .errors import (DegenerateBasis, InvalidInput, InvalidRank, NoValidSubdomain,
                     NonFiniteResidual, NotConverged, SingularJacobian)
from .sampling import WeightingKernel, distances, nearest_reference, neighbors


def laplacian_1d(n, h):
    return sp.diags([-np.ones(n - 1), 2 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1]) / h**2


def neg_laplacian(grid_n, h):
    """-Delta_h on the interior grid with zero Dirichlet values, CSC."""
    t = laplacian_1d(grid_n, h)
    eye = sp.identity(grid_n)
    return (sp.kron(t, eye) + sp.kron(eye, t)).tocsc()


@dataclass
class EllipticProblem:
    grid_n: int
    mu: tuple
    h: float = field(init=False)
    forcing: np.ndarray = field(init=False, repr=False)
    lap: object = field(init=False, repr=False)

    def __post_init__(self):
        if self.grid_n < 1:
            raise InvalidInput("grid_n must be positive")
        self.mu = tuple(float(x) for x in self.mu)
        if len(self.mu) != 2 or self.mu[1] == 0.0:
            raise InvalidInput("mu must be (mu1, mu2) with mu2 != 0")
        self.h = 1.0 / (self.grid_n + 1)
        x = self.h * np.arange(1, self.grid_n + 1)
        gx, gy = np.meshgrid(x, x, indexing="ij")
        self.forcing = (100.0 * np.cos(2 * np.pi * gx) * np.cos(2 * np.pi * gy)).ravel()
        self.lap = neg_laplacian(self.grid_n, self.h)

    @property
    def n(self):
        return self.grid_n**2

    def with_mu(self, mu):
        """Same grid, new parameter; reuses the assembled operator."""
        other = object.__new__(EllipticProblem)
        other.grid_n, other.h, other.forcing, other.lap = self.grid_n, self.h, self.forcing, self.lap
        other.mu = tuple(float(x) for x in mu)
        return other

    def nonlinear(self, u):
        mu1, mu2 = self.mu
        return nonlinear_term(u, mu1, mu2)

    def nonlinear_derivative(self, u):
        mu1, mu2 = self.mu
        return mu1 * np.exp(mu2 * u)


def nonlinear_term(u, mu1, mu2):
    return (mu1 / mu2) * np.expm1(mu2 * u)


def residual(p, u):
    """F(u) = -Delta_h u + (mu1/mu2)(exp(mu2 u) - 1) - forcing."""
    u = np.asarray(u, dtype=float)
    if u.shape != (p.n,):
        raise InvalidInput(f"state must have length {p.n}")
    with np.errstate(over="ignore", invalid="ignore"):
        f = p.lap @ u + p.nonlinear(u) - p.forcing
    if not np.all(np.isfinite(f)):
        raise NonFiniteResidual("residual overflowed")
    return f


def jacobian(p, u):
    """Sparse Jacobian -Delta_h + diag(mu1 exp(mu2 u)); SPD for mu1 > 0."""
    with np.errstate(over="ignore"):
        d = p.nonlinear_derivative(np.asarray(u, dtype=float))
    if not np.all(np.isfinite(d)):
        raise NonFiniteResidual("Jacobian overflowed")
    return (p.lap + sp.diags(d)).tocsc()


@dataclass
class SolveReport:
    solution: np.ndarray
    iterations: int
    residual_history: list
    wall_time: float
    converged: bool
    subdomain: int = None
    flops: int = 0
    stagnated: bool = False
    restarts: int = 0         # subdomains abandoned before this result


def _full_iteration(p, u0, tol, max_iter, chord):
    t0 = time.perf_counter()
    u = np.array(u0, dtype=float, copy=True)
    target = tol * (1.0 + np.linalg.norm(p.forcing))
    history = []
    lu = None
    for it in range(max_iter + 1):
        f = residual(p, u)
        rn = float(np.linalg.norm(f))
        history.append(rn)
        if rn <= target:
            return SolveReport(u, it, history, time.perf_counter() - t0, True)
        if it == max_iter:
            break
        if lu is None or not chord:
            try:
                lu = spla.splu(jacobian(p, u))
            except RuntimeError as exc:
                raise SingularJacobian(str(exc)) from exc
        u += lu.solve(-f)
    rep = SolveReport(u, max_iter, history, time.perf_counter() - t0, False)
    raise NotConverged(f"no convergence in {max_iter} iterations (|F|={history[-1]:.3e})", rep)


def newton_solve_full(p, u0=None, tol=1e-10, max_iter=100):
    """Full-order Newton iteration with a sparse LU per step."""
    return _full_iteration(p, np.zeros(p.n) if u0 is None else u0, tol, max_iter, chord=False)


def chord_solve_full(p, u0=None, tol=1e-10, max_iter=100):
    """Full-order chord iteration: the Jacobian at u0 is factored once."""
    return _full_iteration(p, np.zeros(p.n) if u0 is None else u0, tol, max_iter, chord=True)


def solve_full(p, u0=None, tol=1e-10, max_iter=100):
    """Newton solve returning only the state (raises if it does not converge)."""
    return newton_solve_full(p, u0, tol, max_iter).solution


# -- offline stage -------------------------------------------------------------

def make_ensemble(grid_n, params, tol=1e-10):
    """Full solves at each parameter: states, nonlinear snapshots, Jacobian diagonals."""
    params = np.atleast_2d(np.asarray(params, dtype=float))
    base = EllipticProblem(grid_n, params[0])
    states, nonlin, jdiag = [], [], []
    for mu in params:
        p = base.with_mu(mu)
        u = solve_full(p, tol=tol)
        states.append(u)
        nonlin.append(p.nonlinear(u))
        jdiag.append(p.nonlinear_derivative(u))
    return SnapshotEnsemble(params, np.column_stack(states), np.column_stack(nonlin),
                            np.column_stack(jdiag))


@dataclass
class ReducedEllipticModel:
    basis: ReducedBasis
    l_hat: np.ndarray          # Phi^T L Phi
    f_hat: np.ndarray          # Phi^T forcing
    deim: object               # DeimOperator
    phi_at: np.ndarray         # rows of Phi at the DEIM indices (m x k)
    j_hat: np.ndarray          # reduced Jacobian at the reference point
    j_lu: tuple                # its LU factors
    v0: np.ndarray             # reduced reference solution
    constant_flag: bool = False
    jacobian_source: int = None

    @property
    def k(self):
        return self.basis.k


def _reduced_jacobian(lap_phi, phi, l_hat, diag):
    return l_hat + phi.T @ (diag[:, None] * phi)


def build_subdomain_model(ens, center, kernel, k, m, domain, lap, forcing,
                          method="arm", neighbor_count=9, cond_limit=1e12, cache=None):
    """Offline steps 1-4 for one subdomain."""
    if method == "arm":
        basis = build_arm(ens, center, kernel, k, domain, cache=cache)
        coll = build_arm(ens, center, kernel, m, domain, data=ens.nonlinear, cache=cache)
    elif method == "grm":
        basis = build_grm(ens, k, cache=cache)
        basis.subdomain = center
        coll = build_grm(SnapshotEnsemble(ens.params, ens.nonlinear), m, cache=cache)
    elif method == "lrm":
        local = neighbors(center, ens.params, neighbor_count, domain)
        sub = SnapshotEnsemble(ens.params[local], ens.states[:, local], ens.nonlinear[:, local])
        kk, mm = min(k, _rank(sub.states)), min(m, _rank(sub.nonlinear))
        basis = build_lrm(sub, 0, neighbor_count, kk, domain)
        basis.subdomain = center
        basis.neighbors = np.sort(local)
        coll = build_lrm(SnapshotEnsemble(sub.params, sub.nonlinear), 0, neighbor_count, mm, domain)
    else:
        raise InvalidInput(f"unknown basis method {method!r}")
    phi = basis.phi
    idx = select_indices(coll.phi)
    op = make_operator(phi, coll.phi, idx)
    lap_phi = lap @ phi
    l_hat = phi.T @ lap_phi
    # step 3: reduced Jacobian, retrying once with the next-nearest point
    order = [center, int(neighbors(center, ens.params, 2, domain)[-1])] if ens.size > 1 else [center]
    j_hat, j_lu, source, flag = None, None, None, True
    for j in order:
        cand = _reduced_jacobian(lap_phi, phi, l_hat, ens.jacobians[:, j])
        if np.linalg.cond(cand) < cond_limit:
            j_hat, source, flag = cand, j, False
            j_lu = sla.lu_factor(cand, check_finite=False)
            break
    return ReducedEllipticModel(basis, l_hat, phi.T @ forcing, op, phi[idx].copy(), j_hat, j_lu,
                                phi.T @ ens.states[:, center], flag, source)


def _rank(x):
    return numerics.svd(x).rank()


def offline_build(ens, kernel, k, m, domain, grid_n=None, method="arm", neighbor_count=9,
                  centers=None, cache=None):
    """One reduced model per training parameter (Algorithm steps 1-4).

    ``centers`` restricts construction to a subset of subdomains; the other
    entries of the returned list are ``None``.  Passing the same ``cache`` dict
    to several calls reuses the weighted SVDs across k and m.
    """
    if ens.nonlinear is None or ens.jacobians is None:
        raise InvalidInput("ensemble needs nonlinear snapshots and Jacobians")
    grid_n = grid_n or int(round(np.sqrt(ens.dim)))
    if grid_n**2 != ens.dim:
        raise InvalidInput("state dimension is not a square grid")
    p = EllipticProblem(grid_n, ens.params[0])
    todo = range(ens.size) if centers is None else sorted(set(int(c) for c in centers))
    models = [None] * ens.size
    for i in todo:
        models[i] = build_subdomain_model(ens, i, kernel, k, m, domain, p.lap, p.forcing,
                                          method, neighbor_count, cache=cache)
    return models


# -- online stage --------------------------------------------------------------

def choose_subdomain(models, params, mu_star, domain):
    excluded = [i for i, mdl in enumerate(models) if mdl is None or mdl.constant_flag]
    return nearest_reference(np.asarray(mu_star, dtype=float), params, domain, excluded)


def chord_flops(k, m):
    # lift at DEIM rows, pointwise exp term, DEIM projection, L_hat v, rhs assembly,
    # triangular solves, update and step norm
    return 2 * m * k + 4 * m + 2 * k * m + 2 * k * k + 2 * k + 2 * k * k + k + 2 * k


def newton_extra_flops(k, m):
    # derivative samples, row scaling, projected Jacobian, sum, dense LU
    return m + m * k + 2 * k * m * k + k * k + (2 * k**3) // 3


def online_solve(models, params, mu_star, domain, method="reduced_chord", tol=1e-10,
                 max_iter=200, hyper="deim", full_problem=None, stagnation=5, retries=2,
                 floor=1e-6):
    """Reduced chord / reduced Newton solve in subspace coordinates.

    ``hyper="exact"`` evaluates the nonlinear term on the lifted state instead of
    through DEIM (needs ``full_problem``); it exists to isolate DEIM error.

    The iteration stops when the step satisfies ||xi|| <= tol (1 + ||v||) or
    stops shrinking for ``stagnation`` consecutive steps.  Stagnation with a
    best step still above ``floor`` (1 + ||v||) means the iteration left its
    basin (the frozen reference Jacobian is too far from the target); the
    solve is then restarted from the next-nearest subdomain, at most
    ``retries`` times.
    """
    if not models:
        raise InvalidInput("no reduced models")
    if method not in ("reduced_chord", "reduced_newton"):
        raise InvalidInput(f"unknown method {method!r}")
    if hyper == "exact" and full_problem is None:
        raise InvalidInput("hyper='exact' needs the full problem")
    t0 = time.perf_counter()
    fp = full_problem.with_mu(mu_star) if hyper == "exact" else None
    tried = [i for i, mdl in enumerate(models) if mdl is None or mdl.constant_flag]
    flops = 0
    for attempt in range(retries + 1):
        try:
            i = nearest_reference(np.asarray(mu_star, dtype=float), params, domain, tried)
        except NoValidSubdomain:
            if attempt == 0:
                raise
            break
        v, history, it, converged, stagnated, best = _iterate(
            models[i], mu_star, method, tol, max_iter, fp, stagnation)
        flops += it * (chord_flops(models[i].k, models[i].deim.m)
                       + (newton_extra_flops(models[i].k, models[i].deim.m)
                          if method == "reduced_newton" else 0))
        if converged or (stagnated and best <= floor * (1.0 + np.linalg.norm(v))):
            break
        tried.append(i)
    rep = SolveReport(models[i].basis.phi @ v, it, history, time.perf_counter() - t0, converged,
                      i, flops, stagnated, attempt)
    if not converged and not stagnated:
        raise NotConverged(f"reduced iteration did not converge in {it} steps", rep)
    return rep


def _iterate(mdl, mu_star, method, tol, max_iter, fp, stagnation):
    mu1, mu2 = float(mu_star[0]), float(mu_star[1])
    phi = mdl.basis.phi
    proj, phi_at, l_hat, f_hat = mdl.deim.projector, mdl.phi_at, mdl.l_hat, mdl.f_hat
    v = mdl.v0.copy()
    history, best, stalls = [], np.inf, 0
    converged = stagnated = False
    it = 0
    for it in range(1, max_iter + 1):
        if fp is not None:
            u = phi @ v
            r = l_hat @ v + phi.T @ fp.nonlinear(u) - f_hat
            dvals = fp.nonlinear_derivative(u)
        else:
            with np.errstate(over="ignore", invalid="ignore"):
                ex = np.exp(mu2 * (phi_at @ v))
            r = l_hat @ v + proj @ ((mu1 / mu2) * (ex - 1.0)) - f_hat
        if method == "reduced_chord":
            step = -sla.lu_solve(mdl.j_lu, r, check_finite=False)
        elif fp is not None:
            step = -np.linalg.solve(l_hat + phi.T @ (dvals[:, None] * phi), r)
        else:
            step = -np.linalg.solve(l_hat + proj @ ((mu1 * ex)[:, None] * phi_at), r)
        v += step
        sn = float(np.linalg.norm(step))
        history.append(sn)
        if not np.isfinite(sn):
            stagnated = True
            break
        if sn <= tol * (1.0 + np.linalg.norm(v)):
            converged = True
            break
        if sn < best:
            best, stalls = sn, 0
        else:
            stalls += 1
            if stalls >= stagnation:
                stagnated = True
                break
    return v, history, it, converged, stagnated, best


def time_per_iteration(models, params, mu_star, domain, method="reduced_chord", iters=200,
                       repeats=5):
    """Best-of-repeats wall time of one online iteration, measured over ``iters`` iterations.

    Runs the same kernel as :func:`online_solve` without the convergence test so
    that the loop length is fixed.
    """
    i = choose_subdomain(models, params, mu_star, domain)
    mdl = models[i]
    mu1, mu2 = float(mu_star[0]), float(mu_star[1])
    proj, phi_at, l_hat, f_hat, j_lu = mdl.deim.projector, mdl.phi_at, mdl.l_hat, mdl.f_hat, mdl.j_lu
    newton = method == "reduced_newton"
    samples = []
    for _ in range(repeats + 1):        # first pass is the warm-up
        v = mdl.v0.copy()
        t0 = time.perf_counter()
        for _ in range(iters):
            ex = np.exp(mu2 * (phi_at @ v))
            r = l_hat @ v + proj @ ((mu1 / mu2) * (ex - 1.0)) - f_hat
            if newton:
                step = -np.linalg.solve(l_hat + proj @ ((mu1 * ex)[:, None] * phi_at), r)
            else:
                step = -sla.lu_solve(j_lu, r, check_finite=False)
            v += step
            np.linalg.norm(step)
        samples.append((time.perf_counter() - t0) / iters)
    return float(np.min(samples[1:]))


def time_full_newton_iteration(p, u, repeats=5):
    """Best-of-repeats wall time of one full Newton iteration (residual, Jacobian, LU, solve)."""
    samples = []
    for _ in range(repeats + 1):
        t0 = time.perf_counter()
        f = residual(p, u)
        lu = spla.splu(jacobian(p, u))
        step = lu.solve(-f)
        np.linalg.norm(step)
        samples.append(time.perf_counter() - t0)
    return float(np.min(samples[1:]))


def relative_error(u, u_hat):
    return float(np.linalg.norm(u - u_hat) / np.linalg.norm(u))
