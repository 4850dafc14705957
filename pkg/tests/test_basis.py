import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from armrom import basis as B
from armrom.errors import EmptySegment, InvalidInput, InvalidRank
from armrom.numerics import principal_angles, subspace_distance, tail_energy
from armrom.sampling import ParameterDomain, WeightingKernel

LINE = ParameterDomain((0.0,), (1.0,))


def _ensemble(rng, n, N, rank=None):
    params = rng.random((N, 1))
    if rank is None:
        x = rng.standard_normal((n, N))
    else:
        x = rng.standard_normal((n, rank)) @ rng.standard_normal((rank, N))
    return B.SnapshotEnsemble(params, x)


def test_grm_orthogonal_columns():
    ens = B.SnapshotEnsemble([[0.0], [1.0]], np.eye(3)[:, :2])
    b = B.build_grm(ens, 2)
    assert B.projection_error(b, ens.states) == pytest.approx(0, abs=1e-14)


def test_grm_tail_formula():
    ens = B.SnapshotEnsemble([[0.0], [0.5], [1.0]], np.diag([3.0, 2.0, 1.0]))
    assert B.projection_error(B.build_grm(ens, 2), ens.states) == pytest.approx(1.0)
    assert B.projection_error(B.build_grm(ens, 1), ens.states) == pytest.approx(np.sqrt(5))


def test_grm_rank_check(rng):
    ens = _ensemble(rng, 10, 6, rank=2)
    with pytest.raises(InvalidRank):
        B.build_grm(ens, 3)


def test_grm_singular_values_and_tail(rng):
    ens = _ensemble(rng, 40, 12)
    b = B.build_grm(ens, 5)
    assert np.allclose(b.phi.T @ b.phi, np.eye(5), atol=1e-10)
    assert b.singular_values.size == 12
    assert B.projection_error(b, ens.states) == pytest.approx(tail_energy(b.singular_values, 5), rel=1e-8)


def test_elliptic_singular_values_decay(small_elliptic):
    ens, _ = small_elliptic
    s = B.normalized_singular_values(B.build_grm(ens, 5).singular_values)
    assert s[0] == 1.0
    assert np.all(np.diff(s) <= 1e-15)
    assert s[10] < 1e-3


def test_lrm_all_points_equals_grm(rng):
    ens = _ensemble(rng, 30, 8)
    g = B.build_grm(ens, 4)
    l = B.build_lrm(ens, 3, 8, 4, LINE)
    assert subspace_distance(g.phi, l.phi) < 1e-10


def test_lrm_single_neighbor(rng):
    ens = _ensemble(rng, 20, 5)
    l = B.build_lrm(ens, 2, 1, 1, LINE)
    u = ens.states[:, 2]
    assert np.allclose(np.abs(l.phi[:, 0]), np.abs(u / np.linalg.norm(u)))


def test_lrm_nine_neighbors_is_exact(small_elliptic):
    ens, dom = small_elliptic
    center = 12                                   # interior node of the 5x5 training grid
    l = B.build_lrm(ens, center, 9, 9, dom)
    assert center in l.neighbors and l.neighbors.size == 9
    assert B.projection_error(l, ens.states[:, l.neighbors]) < 1e-10 * np.linalg.norm(ens.states)


def test_lrm_k_exceeds_neighborhood(rng):
    ens = _ensemble(rng, 20, 5)
    with pytest.raises(InvalidRank):
        B.build_lrm(ens, 0, 3, 4, LINE)


def test_arm_uniform_equals_grm(rng):
    ens = _ensemble(rng, 30, 10)
    g = B.build_grm(ens, 4)
    a = B.build_arm(ens, 0, WeightingKernel.uniform(), 4, LINE)
    assert np.max(principal_angles(g.phi, a.phi)) < 1e-7
    assert B.projection_error(g, ens.states) == pytest.approx(B.projection_error(a, ens.states))


def test_arm_compact_equals_lrm(small_elliptic):
    ens, dom = small_elliptic
    center = 12
    a = B.build_arm(ens, center, WeightingKernel.compact(4.0), 5, dom)
    l = B.build_lrm(ens, center, 9, 5, dom)
    assert subspace_distance(a.phi, l.phi) < 1e-8


def test_arm_pads_rank_deficient(rng):
    ens = _ensemble(rng, 12, 6, rank=2)
    a = B.build_arm(ens, 0, WeightingKernel.gaussian(0.5), 4, LINE)
    assert a.phi.shape == (12, 4)
    assert np.allclose(a.phi.T @ a.phi, np.eye(4), atol=1e-10)
    assert B.projection_error(a, ens.states) < 1e-10 * np.linalg.norm(ens.states)


def test_projection_error_span_and_mismatch(rng):
    ens = _ensemble(rng, 15, 6)
    b = B.build_grm(ens, 3)
    assert B.projection_error(b, b.phi @ rng.standard_normal((3, 4))) < 1e-10
    with pytest.raises(InvalidInput):
        B.projection_error(b, np.ones((14, 2)))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 60), st.integers(2, 15), st.integers(1, 10))
def test_weighted_error_never_exceeds_global(seed, n, N, k):
    r = np.random.default_rng(seed)
    k = min(k, n, N)
    x = r.standard_normal((n, N))
    a = r.random(N)
    e_g = B.projection_error(B._pod(x, k, pad=True)[0], x)
    e_a = B.projection_error(B._pod(x * a, k, pad=True)[0], x * a)
    assert e_g >= e_a - 1e-10


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 60), st.integers(2, 15), st.integers(1, 10))
def test_local_error_never_exceeds_global(seed, n, N, k):
    r = np.random.default_rng(seed)
    params = r.random((N, 1))
    x = r.standard_normal((n, N))
    ens = B.SnapshotEnsemble(params, x)
    count = int(r.integers(1, N + 1))
    k = min(k, n, count, N)
    local = B.build_lrm(ens, int(r.integers(N)), count, k, LINE)
    e_g = B.projection_error(B.build_grm(ens, k), x)
    e_l = B.projection_error(local, x[:, local.neighbors])
    assert e_g >= e_l - 1e-10


# -- trajectories -------------------------------------------------------------

def _trajectories(rng, count=3, n=40, t=25):
    params = rng.random((count, 1))
    trajs = [rng.standard_normal((n, 4)) @ rng.standard_normal((4, t))
             + 1e-3 * rng.standard_normal((n, t)) for _ in range(count)]
    return B.TrajectoryEnsemble(params, trajs)


def test_trajectory_basis_truncation(rng):
    x = rng.standard_normal((30, 5)) @ rng.standard_normal((5, 20))
    tb = B.trajectory_basis(x, tol=1e-6)
    assert tb.phi.shape[1] == 5
    assert tb.tail <= 1e-6 * np.linalg.norm(x)
    assert B.trajectory_basis(x, tol=1e-6, max_modes=3).phi.shape[1] == 3


def test_information_matrix_single_trajectory(rng):
    traj = _trajectories(rng, count=1).compress(tol=1e-12)
    info = B.information_matrix(traj, 0, WeightingKernel.uniform(), LINE)
    b = traj.bases[0]
    assert np.allclose(info, b.phi * b.sigma)
    res = np.linalg.svd(info, full_matrices=False)
    assert np.allclose(res[1], b.sigma)


def test_information_matrix_isolated_center(rng):
    traj = _trajectories(rng).compress()
    traj.params = np.array([[0.0], [5.0], [9.0]])
    info = B.information_matrix(traj, 0, WeightingKernel.compact(1.0), ParameterDomain((0,), (10,)))
    k0 = traj.bases[0].phi.shape[1]
    assert np.allclose(info[:, :k0], traj.bases[0].phi * traj.bases[0].sigma)
    assert not np.any(info[:, k0:])


def test_information_matrix_requires_bases(rng):
    with pytest.raises(InvalidInput):
        B.information_matrix(_trajectories(rng), 0, WeightingKernel.uniform(), LINE)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.floats(1e-8, 1e-1))
def test_information_bound_holds(seed, k, tol):
    r = np.random.default_rng(seed)
    traj = _trajectories(r).compress(tol=tol)
    kern = WeightingKernel.gaussian(0.3)
    info = B.information_matrix(traj, 1, kern, LINE)
    phi = np.linalg.svd(info, full_matrices=False)[0][:, :k]
    lhs, rhs = B.information_bound(traj, 1, kern, LINE, phi)
    assert lhs <= rhs + 1e-10


def test_segment_windows_and_selection():
    nominal, extended = B.segment_windows(50.0, 10, overlap=1.0)
    assert extended[0] == (0.0, 6.0)
    assert extended[1] == (4.0, 11.0)
    assert extended[-1] == (44.0, 50.0)
    times = np.arange(10.0)
    full = np.tile(times, (3, 1))
    assert np.array_equal(B.segment_trajectories(full, times, [(0, 9)])[0], full)
    a, b = B.segment_trajectories(full, times, [(0, 4), (5, 9)])
    assert a.shape[1] == 5 and b.shape[1] == 5
    # closed windows: a time stamp on the edge belongs to both neighbours
    a, b = B.segment_trajectories(full, times, [(0, 6), (4, 9)])
    assert a.shape[1] == 7 and b.shape[1] == 6
    with pytest.raises(EmptySegment):
        B.segment_trajectories(full, times, [(20, 30)])


def test_information_matrix_floor_drops_negligible_blocks(rng):
    params = np.array([[0.0, 0.0], [0.5, 0.0], [1.0, 0.0]])
    traj = B.TrajectoryEnsemble(params, [rng.standard_normal((20, 6)) for _ in params]).compress(0.0, 3)
    dom = ParameterDomain((0, 0), (1, 1))
    kern = WeightingKernel.gaussian(0.02)          # neighbours weigh exp(-312) or less
    full = B.information_matrix(traj, 0, kern, dom)
    pruned = B.information_matrix(traj, 0, kern, dom, floor=1e-16)
    assert full.shape == (20, 9) and pruned.shape == (20, 3)
    assert np.array_equal(full[:, :3], pruned)
    assert B.information_matrix(traj, 1, WeightingKernel.gaussian(1.0), dom, floor=1e-16).shape == (20, 9)
