"""Lid-driven cavity flow in stream-function / vorticity form and its Galerkin ROM.

Grid fields have shape (nx, ny) with x = i*hx, y = j*hy; the lid is the row
j = ny-1 and moves in +x.  The dynamic unknown is the interior vorticity,
flattened in C order (y fastest).  Stream function and wall vorticity are
linear (affine for the lid) functions of it:

    -lap(psi) = omega            (zero Dirichlet psi on the walls)
    omega_wall = -2 psi_adjacent / h^2 - 2 U / h   (Thom; U = 0 off the lid)

The vorticity equation is advanced with Crank-Nicolson for interior
diffusion, the wall-vorticity contribution to the Laplacian taken at the old
time level, and two-step Adams-Bashforth for advection.
"""
from dataclasses import dataclass, field
import time

import numpy as np
import scipy.fft as sfft
import scipy.linalg as sla

from .basis import information_matrix, segment_trajectories, TrajectoryEnsemble
from . import numerics
from .errors import DivergedSimulation, InvalidInput, InvalidRank, SegmentGap


@dataclass
class CavityProblem:
    nx: int = 129
    ny: int = 129
    lx: float = 1.0
    ly: float = 1.0
    re: float = 1000.0
    dt: float = 2e-3
    lid_speed: float = 1.0
    scheme: str = "upwind"          # or "central" for the omega gradients

    def __post_init__(self):
        if self.nx < 3 or self.ny < 3:
            raise InvalidInput("need at least 3 grid points per side")
        if not (self.dt > 0 and self.re > 0 and self.lx > 0 and self.ly > 0):
            raise InvalidInput("dt, re, lx and ly must be positive")
        if self.scheme not in ("upwind", "central"):
            raise InvalidInput(f"unknown advection scheme {self.scheme!r}")

    @property
    def hx(self):
        return self.lx / (self.nx - 1)

    @property
    def hy(self):
        return self.ly / (self.ny - 1)

    @property
    def interior_shape(self):
        return (self.nx - 2, self.ny - 2)

    @property
    def n(self):
        return (self.nx - 2) * (self.ny - 2)

    def grid(self):
        x = np.linspace(0.0, self.lx, self.nx)
        y = np.linspace(0.0, self.ly, self.ny)
        return np.meshgrid(x, y, indexing="ij")

    def eigenvalues(self):
        """Eigenvalues of -Delta_h on the interior, shape interior_shape."""
        mx, my = self.interior_shape
        lam_x = 4.0 * np.sin(np.arange(1, mx + 1) * np.pi / (2 * (mx + 1)))**2 / self.hx**2
        lam_y = 4.0 * np.sin(np.arange(1, my + 1) * np.pi / (2 * (my + 1)))**2 / self.hy**2
        return lam_x[:, None] + lam_y[None, :]


@dataclass
class CavityState:
    psi: np.ndarray
    omega: np.ndarray
    t: float = 0.0

    @property
    def interior(self):
        return self.omega[1:-1, 1:-1].ravel()


# -- grid helpers (all accept an optional trailing batch axis) ------------------

def embed(p, w):
    """Interior vector(s) -> full grid field(s) with zero walls."""
    w = np.asarray(w, dtype=float)
    mx, my = p.interior_shape
    tail = w.shape[1:]
    f = np.zeros((p.nx, p.ny) + tail)
    f[1:-1, 1:-1] = w.reshape((mx, my) + tail)
    return f


def interior(p, f):
    mx, my = p.interior_shape
    return f[1:-1, 1:-1].reshape((mx * my,) + f.shape[2:])


def _dst(a):
    return sfft.dstn(a, type=1, axes=(0, 1), norm="ortho")


def _eig_batch(p, f):
    lam = p.eigenvalues()
    return lam.reshape(lam.shape + (1,) * (f.ndim - 2))


def poisson_solve(p, omega):
    """Stream function with zero walls solving -Delta_h psi = omega in the interior.

    ``omega`` may be a full grid field or an interior vector; the result has
    the same layout.
    """
    omega = np.asarray(omega, dtype=float)
    full = omega.ndim >= 2 and omega.shape[:2] == (p.nx, p.ny)
    mx, my = p.interior_shape
    w = omega[1:-1, 1:-1] if full else omega.reshape((mx, my) + omega.shape[1:])
    psi_i = _dst(_dst(w) / _eig_batch(p, w))
    if full:
        out = np.zeros_like(omega)
        out[1:-1, 1:-1] = psi_i
        return out
    return psi_i.reshape(omega.shape)


def laplacian(p, f):
    """Delta_h of a full field evaluated at interior nodes, shape interior_shape (+batch)."""
    return ((f[2:, 1:-1] - 2 * f[1:-1, 1:-1] + f[:-2, 1:-1]) / p.hx**2
            + (f[1:-1, 2:] - 2 * f[1:-1, 1:-1] + f[1:-1, :-2]) / p.hy**2)


def thom_boundary(p, psi, lid=True):
    """Full field holding only the wall vorticity implied by ``psi`` (interior zero).

    With ``lid=False`` the moving-wall term is omitted, which gives the linear
    part of the closure.  Wall-parallel rows are written last so the lid
    value also sits in the two top corners; corners never enter a stencil.
    """
    w = np.zeros_like(psi)
    w[0, :] = -2.0 * psi[1, :] / p.hx**2
    w[-1, :] = -2.0 * psi[-2, :] / p.hx**2
    w[:, 0] = -2.0 * psi[:, 1] / p.hy**2
    w[:, -1] = -2.0 * psi[:, -2] / p.hy**2
    if lid:
        w[:, -1] -= 2.0 * p.lid_speed / p.hy
    return w


def lid_field(p):
    """Constant part of the wall closure: the lid term on the top row."""
    f = np.zeros((p.nx, p.ny))
    f[:, -1] = -2.0 * p.lid_speed / p.hy
    return f


def velocities(p, psi):
    """u = psi_y, v = -psi_x by central differences at interior nodes."""
    u = (psi[1:-1, 2:] - psi[1:-1, :-2]) / (2 * p.hy)
    v = -(psi[2:, 1:-1] - psi[:-2, 1:-1]) / (2 * p.hx)
    return u, v


def advection(p, psi, omega, scheme=None):
    """-u omega_x - v omega_y at interior nodes."""
    scheme = scheme or p.scheme
    u, v = velocities(p, psi)
    if scheme == "central":
        wx = (omega[2:, 1:-1] - omega[:-2, 1:-1]) / (2 * p.hx)
        wy = (omega[1:-1, 2:] - omega[1:-1, :-2]) / (2 * p.hy)
        return -(u * wx + v * wy)
    bx = (omega[1:-1, 1:-1] - omega[:-2, 1:-1]) / p.hx
    fx = (omega[2:, 1:-1] - omega[1:-1, 1:-1]) / p.hx
    by = (omega[1:-1, 1:-1] - omega[1:-1, :-2]) / p.hy
    fy = (omega[1:-1, 2:] - omega[1:-1, 1:-1]) / p.hy
    return -(np.maximum(u, 0) * bx + np.minimum(u, 0) * fx
             + np.maximum(v, 0) * by + np.minimum(v, 0) * fy)


def upwind_dissipation(p, psi, omega):
    """Upwind minus central advection: (|u| hx/2) omega_xx + (|v| hy/2) omega_yy."""
    u, v = velocities(p, psi)
    wxx = (omega[2:, 1:-1] - 2 * omega[1:-1, 1:-1] + omega[:-2, 1:-1]) / p.hx
    wyy = (omega[1:-1, 2:] - 2 * omega[1:-1, 1:-1] + omega[1:-1, :-2]) / p.hy
    return 0.5 * (np.abs(u) * wxx + np.abs(v) * wyy)


def full_fields(p, w):
    """(psi, omega) full fields for interior vorticity w (walls by Thom)."""
    psi = embed(p, poisson_solve(p, w))
    omega = embed(p, w) + thom_boundary(p, psi)
    return psi, omega


def vector_field(p, w):
    """Semi-discrete right side d(omega_interior)/dt as a flat interior vector."""
    psi, omega = full_fields(p, w)
    rhs = advection(p, psi, omega) + laplacian(p, omega) / p.re
    return rhs.ravel()


# -- full-order time stepping -------------------------------------------------

def initial_state(p):
    psi = np.zeros((p.nx, p.ny))
    return CavityState(psi, thom_boundary(p, psi), 0.0)


class FullStepper:
    """Crank-Nicolson / Adams-Bashforth-2 integrator for one problem instance."""

    def __init__(self, p):
        self.p = p
        a = p.dt / (2.0 * p.re)
        lam = p.eigenvalues()
        self._implicit = 1.0 + a * lam      # spectrum of I - a Delta_int
        self._a = a

    def step(self, state, prev_adv=None):
        p = self.p
        adv = advection(p, state.psi, state.omega)
        if prev_adv is None:
            prev_adv = adv
        w = state.omega[1:-1, 1:-1]
        wall = state.omega.copy()
        wall[1:-1, 1:-1] = 0.0
        # Delta_h(omega) = Delta_int(w) + Delta_h(wall part)
        rhs = (w + self._a * laplacian(p, embed(p, w.ravel()))
               + 2.0 * self._a * laplacian(p, wall)
               + p.dt * (1.5 * adv - 0.5 * prev_adv))
        w_new = _dst(_dst(rhs) / self._implicit)
        psi = np.zeros_like(state.psi)
        psi[1:-1, 1:-1] = _dst(_dst(w_new) / p.eigenvalues())
        omega = thom_boundary(p, psi)
        omega[1:-1, 1:-1] = w_new
        return CavityState(psi, omega, state.t + p.dt), adv


def step_full(p, state, prev_advection=None):
    """One time step; returns (new_state, advection_at_old_state)."""
    new, adv = FullStepper(p).step(state, prev_advection)
    if not np.all(np.isfinite(new.omega)):
        raise DivergedSimulation(f"non-finite vorticity at t={new.t:.4f}")
    return new, adv


def simulate(p, t_end, record_every=25, state=None, check_every=100):
    """Integrate from rest (or ``state``) to ``t_end``.

    Returns (times, snapshots, final_state) with interior-vorticity snapshots
    recorded every ``record_every`` steps, including t=0 and the final step.
    """
    stepper = FullStepper(p)
    state = state or initial_state(p)
    steps = int(round((t_end - state.t) / p.dt))
    times, snaps = [state.t], [state.interior.copy()]
    prev = None
    for s in range(1, steps + 1):
        state, prev = stepper.step(state, prev)
        if s % check_every == 0 and not np.all(np.isfinite(state.omega)):
            raise DivergedSimulation(f"non-finite vorticity at t={state.t:.4f}")
        if s % record_every == 0 or s == steps:
            times.append(state.t)
            snaps.append(state.interior.copy())
    if not np.all(np.isfinite(state.omega)):
        raise DivergedSimulation("non-finite vorticity at end of run")
    return np.array(times), np.column_stack(snaps), state


# -- reduced model ------------------------------------------------------------

@dataclass
class CavityRom:
    basis: np.ndarray          # n x k, interior vorticity modes
    lift: np.ndarray           # n x k, stream-function modes (interior)
    affine: np.ndarray         # k
    linear: np.ndarray         # k x k, total linear part
    quadratic: np.ndarray      # k x k x k, Q[a, b, c] v_b v_c
    segment: tuple
    diffusion: np.ndarray = None          # implicit part: Phi^T Delta_int Phi / Re
    wall_linear: np.ndarray = None        # wall-closure part of the diffusion
    advection_linear: np.ndarray = None   # lid-driven part of the advection
    problem: CavityProblem = None
    upwind: bool = False
    singular_values: np.ndarray = None

    @property
    def k(self):
        return self.basis.shape[1]

    def advection(self, v):
        """Advective part of the reduced field (AB2-treated)."""
        out = self.advection_linear @ v + np.einsum("abc,b,c->a", self.quadratic, v, v)
        if self.upwind:
            out = out + self.upwind_correction(v)
        return out

    def upwind_correction(self, v):
        p = self.problem
        psi = embed(p, self.lift @ v)
        omega = embed(p, self.basis @ v) + thom_boundary(p, psi)
        return self.basis.T @ upwind_dissipation(p, psi, omega).ravel()

    def rhs(self, v):
        """Full reduced vector field g_hat(v)."""
        out = self.affine + self.linear @ v + np.einsum("abc,b,c->a", self.quadratic, v, v)
        if self.upwind:
            out = out + self.upwind_correction(v)
        return out


def assemble_rom(p, phi, segment=(0.0, np.inf), singular_values=None):
    """Galerkin tensors of the cavity vector field for an orthonormal frame ``phi``."""
    phi = np.asarray(phi, dtype=float)
    n, k = phi.shape
    if n != p.n:
        raise InvalidInput(f"basis has {n} rows, grid has {p.n} interior nodes")
    lift = poisson_solve(p, phi)
    psi_modes = embed(p, lift)                                    # nx, ny, k
    wall_modes = thom_boundary(p, psi_modes, lid=False)
    omega_modes = embed(p, phi) + wall_modes
    lid = lid_field(p)

    diffusion = phi.T @ laplacian(p, embed(p, phi)).reshape(n, k) / p.re
    wall_linear = phi.T @ laplacian(p, wall_modes).reshape(n, k) / p.re
    affine = phi.T @ laplacian(p, lid).ravel() / p.re

    adv_lin = np.empty((k, k))
    quad = np.empty((k, k, k))
    for b in range(k):
        psi_b = psi_modes[:, :, b]
        adv_lin[:, b] = phi.T @ advection(p, psi_b, lid, "central").ravel()
        # one stream-function mode against every vorticity mode at once
        block = advection(p, psi_b[:, :, None], omega_modes, "central").reshape(n, k)
        quad[:, b, :] = phi.T @ block
    return CavityRom(phi, lift, affine, diffusion + wall_linear + adv_lin, quad, tuple(segment),
                     diffusion, wall_linear, adv_lin, p, p.scheme == "upwind", singular_values)


def rom_frame(traj, center, kernel, domain):
    """SVD of the information matrix about ``center`` (negligible blocks dropped)."""
    return numerics.svd(information_matrix(traj, center, kernel, domain, floor=1e-16))


def build_rom(traj, segment, center, kernel, k, p, domain, times=None, segments=None, cap=False,
              frame=None):
    """Adaptive (information-matrix) ROM for one time segment.

    ``traj`` holds trajectories already restricted to this segment and
    compressed (see :func:`segment_ensemble`).  The ``segment`` tuple records
    the nominal time window the ROM is responsible for.  k above the numerical
    rank of the information matrix is an error unless ``cap`` is set, in which
    case the ROM uses every numerically nonzero mode instead.  ``frame`` is a
    precomputed :func:`rom_frame` result.
    """
    res = rom_frame(traj, center, kernel, domain) if frame is None else frame
    if k > res.rank():
        if not cap or res.rank() == 0:
            raise InvalidRank(f"k={k} exceeds information-matrix rank {res.rank()}")
        k = res.rank()
    return assemble_rom(p, res.u[:, :k].copy(), segment, res.sigma)


def segment_ensemble(params, times, trajectories, window, tol=1e-6, max_modes=80):
    """Restrict every trajectory to a closed time window and compress it."""
    parts = [segment_trajectories(x, times, [window])[0] for x in trajectories]
    return TrajectoryEnsemble(params, parts).compress(tol, max_modes)


def integrate_rom(roms, v0, t_span, dt, record_every=None):
    """CN/AB2 integration in reduced coordinates, switching ROMs between segments.

    Each ROM is used while t lies in its ``segment``; at a switch the state and
    the stored advection term are re-expressed in the new basis.  Returns
    (times, coefficients, final_rom) where coefficients are in the basis of the
    ROM active at each recorded time; the final full-space vorticity is
    ``final_rom.basis @ coefficients[-1]``.
    """
    roms = sorted(roms, key=lambda r: r.segment[0])
    t0, t1 = t_span
    steps = int(round((t1 - t0) / dt))
    _check_coverage(roms, t0, t1)

    def pick(t):
        for r in roms:
            if r.segment[0] - 1e-9 <= t < r.segment[1] - 1e-9:
                return r
        return roms[-1]

    def factor(rom):
        half = 0.5 * dt * rom.diffusion
        eye = np.eye(rom.k)
        return sla.lu_factor(eye - half, check_finite=False), eye + half

    rom = pick(t0)
    lu, expl = factor(rom)
    v = np.asarray(v0, dtype=float).copy()
    prev = None
    times, coeffs = [t0], [v.copy()]
    for s in range(steps):
        t = t0 + s * dt
        nxt = pick(t)
        if nxt is not rom:
            v = hand_off(rom, nxt, v)
            prev = None if prev is None else hand_off(rom, nxt, prev)
            rom = nxt
            lu, expl = factor(rom)
        adv = rom.advection(v)
        if prev is None:
            prev = adv
        rhs = expl @ v + dt * (rom.affine + rom.wall_linear @ v) + dt * (1.5 * adv - 0.5 * prev)
        v = sla.lu_solve(lu, rhs, check_finite=False)
        prev = adv
        if not np.all(np.isfinite(v)):
            raise DivergedSimulation(f"reduced state blew up at t={t + dt:.4f}")
        if record_every and (s + 1) % record_every == 0 or s + 1 == steps:
            times.append(t0 + (s + 1) * dt)
            coeffs.append(v.copy())
    return np.array(times), coeffs, rom


def hand_off(old, new, v):
    """Re-express reduced coordinates of ``old`` in the basis of ``new``."""
    return new.basis.T @ (old.basis @ v)


def _check_coverage(roms, t0, t1, tol=1e-9):
    edge = t0
    for r in roms:
        lo, hi = r.segment
        if lo > edge + tol:
            raise SegmentGap(f"no ROM covers [{edge}, {lo}]")
        edge = max(edge, hi)
    if edge < t1 - tol:
        raise SegmentGap(f"no ROM covers [{edge}, {t1}]")


def kinetic_proxy(w):
    """Sum of squared interior vorticity, used to monitor approach to steady state."""
    return float(np.sum(np.asarray(w) ** 2))
