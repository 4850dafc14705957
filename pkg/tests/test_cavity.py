import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from armrom import basis as B
from armrom import cavity as C
from armrom.errors import InvalidRank, SegmentGap
from armrom.numerics import orthonormalize
from armrom.sampling import ParameterDomain, WeightingKernel


def _manufactured(n, ly=1.0):
    p = C.CavityProblem(n, n, 1.0, ly, 100.0, 1e-3)
    x, y = p.grid()
    psi = np.sin(np.pi * x) * np.sin(np.pi * y / ly)
    omega = (np.pi**2 + (np.pi / ly) ** 2) * psi
    return p, psi, omega


def test_poisson_zero():
    p = C.CavityProblem(9, 9)
    assert not np.any(C.poisson_solve(p, np.zeros((9, 9))))


def test_poisson_discrete_residual(rng):
    p = C.CavityProblem(17, 13, ly=1.2)
    w = C.embed(p, rng.standard_normal(p.n))
    psi = C.poisson_solve(p, w)
    assert not np.any(psi[0]) and not np.any(psi[:, -1])
    assert np.linalg.norm(-C.laplacian(p, psi) - w[1:-1, 1:-1]) <= 1e-10 * np.linalg.norm(w)
    # interior-vector layout gives the same answer
    assert np.allclose(C.poisson_solve(p, w[1:-1, 1:-1].ravel()), psi[1:-1, 1:-1].ravel())


def test_poisson_second_order():
    errs = []
    for n in (17, 33, 65):
        p, psi, omega = _manufactured(n, ly=1.1)
        errs.append(np.max(np.abs(C.poisson_solve(p, omega) - psi)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(orders - 2.0) <= 0.2)


def test_thom_lid_only():
    p = C.CavityProblem(9, 9)
    w = C.thom_boundary(p, np.zeros((9, 9)))
    assert np.allclose(w[1:-1, -1], -2.0 / p.hy)
    assert not np.any(w[:, :-1])


def test_thom_plug_in():
    p = C.CavityProblem(9, 9, lid_speed=0.0)
    psi = np.zeros((9, 9))
    psi[4, 1] = p.hy**2 / 2
    assert C.thom_boundary(p, psi)[4, 0] == pytest.approx(-1.0)


@pytest.mark.parametrize("lid", [0.0, 1.0, 2.5])
def test_thom_matches_taylor_expansion(lid):
    """psi = U (y - ly) + c (y - ly)^2 has psi = 0, psi_y = U on the lid and omega = -2c."""
    c = 0.7
    p = C.CavityProblem(11, 9, ly=1.3, lid_speed=lid)
    _, y = p.grid()
    psi = lid * (y - p.ly) + c * (y - p.ly) ** 2
    w = C.thom_boundary(p, psi)
    assert np.allclose(w[1:-1, -1], -2 * c)
    # resting bottom wall: psi = c y^2
    psi = c * y**2
    assert np.allclose(C.thom_boundary(p, psi, lid=False)[1:-1, 0], -2 * c)


def test_zero_lid_is_fixed_point():
    p = C.CavityProblem(9, 9, lid_speed=0.0, dt=1e-2)
    state = C.initial_state(p)
    prev = None
    for _ in range(5):
        state, prev = C.step_full(p, state, prev)
    assert not np.any(state.omega) and not np.any(state.psi)


def test_step_keeps_walls_consistent():
    p = C.CavityProblem(13, 11, re=400, dt=5e-3)
    _, _, st_ = C.simulate(p, 0.2, record_every=10)
    assert not np.any(st_.psi[0]) and not np.any(st_.psi[-1])
    wall = C.thom_boundary(p, st_.psi)
    assert np.allclose(st_.omega[0, 1:-1], wall[0, 1:-1])
    assert np.allclose(st_.omega[1:-1, -1], wall[1:-1, -1])


def test_time_step_self_convergence():
    finals = []
    for dt in (4e-3, 2e-3, 1e-3):
        p = C.CavityProblem(17, 17, re=400, dt=dt)
        finals.append(C.simulate(p, 0.4, record_every=10**6)[2].interior)
    d1 = np.linalg.norm(finals[0] - finals[1])
    d2 = np.linalg.norm(finals[1] - finals[2])
    assert d1 / d2 > 1.8         # at least first order in dt


# -- reduced model --------------------------------------------------------------

def test_single_mode_hand_assembly():
    p = C.CavityProblem(5, 5, re=50.0)
    phi = np.zeros((p.n, 1))
    phi[4, 0] = 1.0                                   # interior centre node
    rom = C.assemble_rom(p, phi)
    assert rom.affine[0] == pytest.approx(0.0, abs=1e-12)
    assert rom.linear[0, 0] == pytest.approx(-(2 / p.hx**2 + 2 / p.hy**2) / p.re)
    assert rom.quadratic[0, 0, 0] == pytest.approx(0.0, abs=1e-12)
    assert rom.rhs(np.array([0.3]))[0] == pytest.approx(0.3 * rom.linear[0, 0])


@pytest.mark.parametrize("scheme", ["upwind", "central"])
def test_galerkin_exactness(scheme, rng):
    p = C.CavityProblem(9, 11, ly=1.2, re=300, scheme=scheme)
    phi = orthonormalize(rng.standard_normal((p.n, 6)))
    rom = C.assemble_rom(p, phi)
    for _ in range(20):
        v = rng.standard_normal(6) * 3
        direct = phi.T @ C.vector_field(p, phi @ v)
        assert np.linalg.norm(rom.rhs(v) - direct) <= 1e-10 * (1 + v @ v)


@settings(max_examples=15, deadline=None)
@given(st.integers(5, 12), st.integers(5, 12), st.floats(0.8, 1.2), st.integers(0, 2**32 - 1))
def test_central_rom_is_polynomial(nx, ny, ly, seed):
    r = np.random.default_rng(seed)
    p = C.CavityProblem(nx, ny, ly=ly, re=500, scheme="central")
    k = min(4, p.n)
    phi = orthonormalize(r.standard_normal((p.n, k)))
    rom = C.assemble_rom(p, phi)
    v = r.standard_normal(k)
    # central advection is exactly affine + linear + quadratic
    assert not rom.upwind
    assert np.linalg.norm(rom.rhs(v) - phi.T @ C.vector_field(p, phi @ v)) <= 1e-10 * (1 + v @ v)


def test_rom_reproduces_trajectory_in_its_span():
    p = C.CavityProblem(9, 11, re=100, dt=1e-2)
    times, snaps, final = C.simulate(p, 2.0, record_every=1)
    res = np.linalg.svd(snaps, full_matrices=False)
    k = int(np.sum(res[1] > 1e-12 * res[1][0]))
    rom = C.assemble_rom(p, res[0][:, :k], (0.0, 2.0))
    _, coeffs, last = C.integrate_rom([rom], np.zeros(k), (0.0, 2.0), p.dt)
    exact = final.interior
    assert np.linalg.norm(last.basis @ coeffs[-1] - exact) <= 1e-6 * np.linalg.norm(exact)


def test_rom_zero_lid_stays_zero(rng):
    p = C.CavityProblem(9, 9, lid_speed=0.0, dt=1e-2)
    rom = C.assemble_rom(p, orthonormalize(rng.standard_normal((p.n, 4))), (0.0, 1.0))
    _, coeffs, _ = C.integrate_rom([rom], np.zeros(4), (0.0, 1.0), p.dt)
    assert not np.any(coeffs[-1])


def test_segment_hand_off_conserves_representable_part(rng):
    p = C.CavityProblem(9, 9)
    old = C.assemble_rom(p, orthonormalize(rng.standard_normal((p.n, 5))), (0.0, 1.0))
    new = C.assemble_rom(p, orthonormalize(rng.standard_normal((p.n, 4))), (1.0, 2.0))
    v_old = rng.standard_normal(5)
    v_new = C.hand_off(old, new, v_old)
    target = new.basis @ (new.basis.T @ (old.basis @ v_old))
    assert np.linalg.norm(new.basis @ v_new - target) <= 1e-12


def test_two_segments_match_single_segment_with_shared_basis(rng):
    p = C.CavityProblem(9, 9, re=200, dt=1e-2)
    phi = orthonormalize(rng.standard_normal((p.n, 6)))
    one = C.assemble_rom(p, phi, (0.0, 1.0))
    a, b = C.assemble_rom(p, phi, (0.0, 0.5)), C.assemble_rom(p, phi, (0.5, 1.0))
    _, c1, _ = C.integrate_rom([one], np.zeros(6), (0.0, 1.0), p.dt)
    _, c2, _ = C.integrate_rom([b, a], np.zeros(6), (0.0, 1.0), p.dt)
    assert np.allclose(c1[-1], c2[-1], atol=1e-12)


def test_uncovered_window_raises(rng):
    p = C.CavityProblem(9, 9)
    rom = C.assemble_rom(p, orthonormalize(rng.standard_normal((p.n, 3))), (0.0, 0.5))
    with pytest.raises(SegmentGap):
        C.integrate_rom([rom], np.zeros(3), (0.0, 1.0), 0.1)


@pytest.fixture(scope="module")
def tiny_training():
    dom = ParameterDomain((600.0, 0.8), (1600.0, 1.2), (2000.0, 1.0))
    params = np.array([[re, 1.0] for re in (600, 800, 1000, 1200)])
    trajs = []
    for re, ly in params:
        p = C.CavityProblem(17, 17, ly=ly, re=re, dt=1e-2)
        times, snaps, _ = C.simulate(p, 3.0, record_every=5)
        trajs.append(snaps)
    return dom, params, times, trajs


def test_build_rom_rank_check(tiny_training):
    dom, params, times, trajs = tiny_training
    ens = C.segment_ensemble(params, times, trajs, (0.0, 3.0), tol=1e-3, max_modes=3)
    p = C.CavityProblem(17, 17, re=900, dt=1e-2)
    with pytest.raises(InvalidRank):
        C.build_rom(ens, (0.0, 3.0), 1, WeightingKernel.gaussian(0.1), 13, p, dom)
    rom = C.build_rom(ens, (0.0, 3.0), 1, WeightingKernel.gaussian(0.1), 13, p, dom, cap=True)
    assert rom.k == 12                      # 4 trajectories x 3 retained modes


def test_arm_information_spectrum_decays_faster(tiny_training):
    dom, params, times, trajs = tiny_training
    ens = C.segment_ensemble(params, times, trajs, (0.0, 3.0))

    def modes_to(info, level=1e-6):
        s = B.normalized_singular_values(np.linalg.svd(info, compute_uv=False))
        return int(np.argmax(s <= level)) if np.any(s <= level) else s.size

    grm = modes_to(B.information_matrix(ens, 0, WeightingKernel.uniform(), dom))
    for center in range(len(params)):
        arm = modes_to(B.information_matrix(ens, center, WeightingKernel.gaussian(0.05), dom))
        assert arm < grm


def test_segmented_arm_rom_tracks_full_model(tiny_training):
    dom, params, times, trajs = tiny_training
    nominal, extended = B.segment_windows(3.0, 2, overlap=0.5)
    ens = [C.segment_ensemble(params, times, trajs, w) for w in extended]
    p = C.CavityProblem(17, 17, re=900, dt=1e-2)
    kernel = WeightingKernel.gaussian(0.1)
    roms = [C.build_rom(e, seg, 1, kernel, 10, p, dom) for e, seg in zip(ens, nominal)]
    _, coeffs, last = C.integrate_rom(roms, np.zeros(10), (0.0, 3.0), p.dt)
    exact = C.simulate(p, 3.0, record_every=10**6)[2].interior
    assert np.linalg.norm(last.basis @ coeffs[-1] - exact) < 1e-2 * np.linalg.norm(exact)
    assert last is roms[1]


@pytest.fixture(scope="module")
def full_scale_run():
    """129x129, Re = 1050, L_y = 1.05 to t = 50 (about a minute); records one per time unit."""
    p = C.CavityProblem(129, 129, ly=1.05, re=1050, dt=2e-3)
    _, snaps, final = C.simulate(p, 50.0, record_every=500)
    return snaps, final


def test_primary_vortex_strength_full_scale(full_scale_run):
    _, final = full_scale_run
    assert final.psi.min() < -0.1


def test_enstrophy_proxy_settles_by_t50(full_scale_run):
    snaps, _ = full_scale_run
    k = np.array([C.kinetic_proxy(snaps[:, j]) for j in range(snaps.shape[1])])
    assert abs(k[-1] - k[-2]) / k[-1] < 1e-5
