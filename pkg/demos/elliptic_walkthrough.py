"""
Reduced chord iteration for a nonlinear elliptic problem
========================================================

-Laplace(u) + mu1/mu2 (exp(mu2 u) - 1) = 100 sin(2 pi x) sin(2 pi y) on the
unit square.  The offline stage solves the full model on a training grid and
builds one adaptive reduced model per training parameter.  The online stage
picks the nearest subdomain and runs a chord iteration whose Jacobian is
frozen at the training point, so each iteration costs one k x k solve with a
pre-factored matrix.
"""
import time

import numpy as np

from armrom import elliptic
from armrom.sampling import ParameterDomain, WeightingKernel, uniform_grid

domain = ParameterDomain((0.01, 0.01), (10.0, 10.0))
params = uniform_grid(domain, (11, 11))

t0 = time.perf_counter()
ens = elliptic.make_ensemble(50, params)
print(f"offline: {ens.size} full solves of size {ens.dim} in {time.perf_counter() - t0:.1f}s")

# Build the models around a few training points only, to keep the demo short.
k, m = 10, 20
kernel = WeightingKernel.gaussian(2.0)
centers = [27, 38, 49, 60, 93]
models = elliptic.offline_build(ens, kernel, k, m, domain, centers=centers)

rng = np.random.default_rng(7)
for _ in range(5):
    i = rng.choice(centers)
    mu = params[i] + rng.uniform(-0.4, 0.4, 2)
    full = elliptic.solve_full(elliptic.EllipticProblem(50, mu))
    chord = elliptic.online_solve(models, params, mu, domain, "reduced_chord")
    newton = elliptic.online_solve(models, params, mu, domain, "reduced_newton")
    print(f"mu=({mu[0]:5.2f},{mu[1]:5.2f})  chord "
          f"{elliptic.relative_error(full, chord.solution):.2e} in {chord.iterations:3d} its   "
          f"newton {elliptic.relative_error(full, newton.solution):.2e} "
          f"in {newton.iterations} its")

# Per-iteration cost: chord avoids re-forming the reduced Jacobian.
mu = params[49] + 0.2
tc = elliptic.time_per_iteration(models, params, mu, domain, "reduced_chord")
tn = elliptic.time_per_iteration(models, params, mu, domain, "reduced_newton")
p = elliptic.EllipticProblem(50, mu)
tf = elliptic.time_full_newton_iteration(p, elliptic.solve_full(p))
print(f"per iteration: chord {tc:.1e}s  newton {tn:.1e}s  full newton {tf:.1e}s")
