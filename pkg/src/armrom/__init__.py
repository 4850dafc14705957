"""Adaptive reduced-order models for parametrized nonlinear problems.

Subpackages and modules
-----------------------
numerics   SVD, orthonormalization, LU helpers
sampling   parameter domains, grids, weighting kernels
basis      global / local / adaptive POD bases and information matrices
deim       discrete empirical interpolation
elliptic   nonlinear elliptic model problem, full and reduced solvers
cavity     lid-driven cavity (stream function / vorticity) and its Galerkin ROM
pipeline   configuration, snapshot store, offline/online/bench/report stages
"""
from . import basis, cavity, deim, elliptic, numerics, sampling
from .errors import ArmError

__version__ = "0.1.0"
__all__ = ["basis", "cavity", "deim", "elliptic", "numerics", "sampling", "ArmError"]
