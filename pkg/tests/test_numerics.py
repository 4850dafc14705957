import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from armrom import numerics as nx
from armrom.errors import InvalidInput, InvalidRank, SingularMatrix


def test_svd_identity():
    res = nx.svd(np.eye(2))
    assert np.allclose(res.sigma, [1, 1])
    assert np.allclose(np.abs(res.u), np.eye(2))


def test_svd_rank_one():
    c = np.array([3.0, 4.0]) / 5.0
    res = nx.svd(np.column_stack([c, 2 * c]))
    assert res.sigma[0] == pytest.approx(np.sqrt(5))
    assert res.sigma[1] == pytest.approx(0, abs=1e-14)
    assert res.rank() == 1


def test_svd_random_against_normal_equations(rng):
    a = rng.standard_normal((20, 8))
    res = nx.svd(a)
    assert np.linalg.norm(res.reconstruct() - a) < 1e-10
    assert np.allclose(res.u.T @ res.u, np.eye(8), atol=1e-10)
    # oracle: eigenvalues of A^T A are sigma^2
    lam = np.sort(np.linalg.eigvalsh(a.T @ a))[::-1]
    assert np.allclose(res.sigma, np.sqrt(lam), rtol=1e-10)


def test_svd_rejects_nonfinite():
    with pytest.raises(InvalidInput):
        nx.svd(np.array([[1.0, np.nan]]))


def test_truncated_full_rank_exact(rng):
    a = rng.standard_normal((6, 4))
    t = nx.truncated_svd(a, 4)
    assert np.linalg.norm(a - t.reconstruct()) < 1e-12


def test_truncated_diagonal_tail():
    t = nx.truncated_svd(np.diag([3.0, 2.0, 1.0]), 2)
    assert np.linalg.norm(np.diag([3.0, 2.0, 1.0]) - t.reconstruct()) == pytest.approx(1.0)


def test_truncated_matches_tail_energy(rng):
    a = rng.standard_normal((50, 10))
    full = nx.svd(a)
    t = nx.truncated_svd(a, 4)
    err = np.linalg.norm(a - t.reconstruct())
    assert err == pytest.approx(nx.tail_energy(full.sigma, 4), rel=1e-8)


@pytest.mark.parametrize("k", [0, 5])
def test_truncated_rank_out_of_range(k):
    with pytest.raises(InvalidRank):
        nx.truncated_svd(np.ones((4, 4)), k)


def test_truncation_error_monotone_in_k(rng):
    a = rng.standard_normal((15, 9))
    errs = [np.linalg.norm(a - nx.truncated_svd(a, k).reconstruct()) for k in range(1, 10)]
    assert all(e1 >= e2 - 1e-12 for e1, e2 in zip(errs, errs[1:]))


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (7, 5), elements=st.floats(-10, 10)), st.integers(0, 2**32 - 1))
def test_singular_values_orthogonally_invariant(a, seed):
    r = np.random.default_rng(seed)
    q1, _ = np.linalg.qr(r.standard_normal((7, 7)))
    q2, _ = np.linalg.qr(r.standard_normal((5, 5)))
    s1 = nx.svd(a).sigma
    s2 = nx.svd(q1 @ a @ q2).sigma
    assert np.allclose(s1, s2, atol=1e-10 * max(1.0, s1[0]))


def test_orthonormalize_keeps_orthonormal_input(rng):
    q, _ = np.linalg.qr(rng.standard_normal((8, 3)))
    out = nx.orthonormalize(q)
    assert np.allclose(np.abs(np.sum(out * q, axis=0)), 1.0)


def test_orthonormalize_drops_duplicate():
    e = np.eye(4)
    out = nx.orthonormalize(np.column_stack([e[:, 0], e[:, 0], e[:, 1]]))
    assert out.shape == (4, 2)
    assert nx.subspace_distance(out, e[:, :2]) < 1e-12


def test_orthonormalize_random_and_zero(rng):
    out = nx.orthonormalize(rng.standard_normal((30, 5)))
    assert np.allclose(out.T @ out, np.eye(5), atol=1e-12)
    assert nx.orthonormalize(np.zeros((6, 3))).shape == (6, 0)


def test_complete_frame_pads_to_width(rng):
    q = nx.orthonormalize(rng.standard_normal((6, 2)))
    f = nx.complete_frame(q, 5)
    assert f.shape == (6, 5)
    assert np.allclose(f.T @ f, np.eye(5), atol=1e-12)
    assert np.allclose(f[:, :2], q)


def test_lu_solve_examples(rng):
    b = rng.standard_normal(3)
    assert np.allclose(nx.lu_solve(np.eye(3), b), b)
    assert np.allclose(nx.lu_solve(np.diag([2.0, 4.0]), [2.0, 8.0]), [1.0, 2.0])
    a = rng.standard_normal((50, 50)) + 50 * np.eye(50)
    b = rng.standard_normal(50)
    x = nx.lu_solve(a, b)
    assert np.linalg.norm(a @ x - b) <= 1e-8 * (1 + np.linalg.norm(b))


def test_lu_singular():
    with pytest.raises(SingularMatrix):
        nx.lu_solve(np.array([[1.0, 2.0], [2.0, 4.0]]), [1.0, 1.0])


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 12), st.floats(0, 7), st.integers(0, 2**32 - 1))
def test_lu_residual_bound(n, log_cond, seed):
    r = np.random.default_rng(seed)
    u, _ = np.linalg.qr(r.standard_normal((n, n)))
    v, _ = np.linalg.qr(r.standard_normal((n, n)))
    a = u @ np.diag(np.logspace(0, -log_cond, n)) @ v.T
    b = r.standard_normal(n)
    x = nx.lu_solve(a, b)
    assert np.linalg.norm(a @ x - b) <= 1e-8 * (1 + np.linalg.norm(b))
