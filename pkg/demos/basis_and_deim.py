"""
Global, local and adaptive bases, and DEIM
==========================================

Builds the three kinds of reduced basis from a small elliptic snapshot
ensemble and compares how well each captures a solution it was not trained
on.  Then shows DEIM reproducing a Galerkin projection from a handful of
sampled entries.
"""
import numpy as np

from armrom import basis, deim, elliptic
from armrom.sampling import ParameterDomain, WeightingKernel, nearest_reference, uniform_grid

# A 20x20 grid and 6x6 training parameters over [0.01, 10]^2.
domain = ParameterDomain((0.01, 0.01), (10.0, 10.0))
params = uniform_grid(domain, (6, 6))
ens = elliptic.make_ensemble(20, params)
print(f"{ens.size} snapshots of dimension {ens.dim}")

# An unseen parameter and its full solution.
mu = np.array([3.3, 7.1])
u = elliptic.solve_full(elliptic.EllipticProblem(20, mu))
center = nearest_reference(mu, params, domain)
print(f"nearest training point: {params[center]}")

# Projection errors for k = 2..8 with each basis type.
for k in range(2, 9, 2):
    grm = basis.build_grm(ens, k)
    lrm = basis.build_lrm(ens, center, 9, k, domain)
    arm = basis.build_arm(ens, center, WeightingKernel.gaussian(2.0), k, domain)
    errs = [basis.relative_projection_error(b, u) for b in (grm, lrm, arm)]
    print(f"k={k}:  GRM {errs[0]:.2e}   LRM {errs[1]:.2e}   ARM {errs[2]:.2e}")

# Weighting concentrates the spectrum: compare normalized singular values.
grm = basis.build_grm(ens, 1)
arm = basis.build_arm(ens, center, WeightingKernel.gaussian(0.5), 1, domain)
print("normalized sigma_10  GRM %.1e  ARM(sigma=0.5) %.1e" % (
    basis.normalized_singular_values(grm.singular_values)[9],
    basis.normalized_singular_values(arm.singular_values)[9]))

# DEIM: pick m interpolation rows of a collateral basis psi and reproduce
# phi^T g for any g in span(psi) from g at those rows only.
rng = np.random.default_rng(0)
phi = basis.build_arm(ens, center, WeightingKernel.gaussian(2.0), 6, domain).phi
psi = basis.build_arm(ens, center, WeightingKernel.gaussian(2.0), 12, domain,
                      data=ens.nonlinear).phi
op = deim.make_operator(phi, psi, deim.select_indices(psi))
g = psi @ rng.standard_normal(psi.shape[1])
print(f"DEIM rows: {np.sort(op.indices)}")
print(f"in-span error  {np.linalg.norm(op.apply(g[op.indices]) - phi.T @ g):.1e}")

# Outside the span the error is controlled by the best approximation error.
g_true = elliptic.nonlinear_term(u, *mu)
approx = op.apply(g_true[op.indices])
print(f"nonlinear term at mu: relative DEIM error "
      f"{np.linalg.norm(approx - phi.T @ g_true) / np.linalg.norm(phi.T @ g_true):.1e}")
