import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from widemap import BlockMap, CrsMatrix, MultiVector, SerialComm, cg_solve, generate_crs_problem, run_ranks
from widemap.errors import ContractError, WidthMixError
from _helpers import LL_OFFSET, build_matrix, dense_laplace2d, symmetric_entries

S = SerialComm()


def _solve(comm, nx, ny, width, offset, tol=1e-8, max_iters=500, pre=None):
    p = generate_crs_problem("laplace2d", nx, ny, width, offset, comm)
    rep = cg_solve(p.matrix, p.b, p.x, tol, max_iters, pre)
    return rep, p.x.gather_global()[:, 0], p.b.gather_global()[:, 0]


def test_identity_one_iteration():
    m = BlockMap.uniform(5, 0, S)
    A = CrsMatrix(m)
    for g in range(5):
        A.insert_global_values(g, [g], [1.0])
    A.fill_complete()
    b = MultiVector(m)
    b.set_random(3)
    x = MultiVector(m)
    rep = cg_solve(A, b, x)
    assert rep.converged and rep.iterations == 1 and np.allclose(x.values, b.values, rtol=0, atol=1e-15)


def test_laplace2d_4x4_against_dense():
    rep, x, b = _solve(S, 4, 4, 32, 0)
    assert rep.converged and rep.iterations <= 16
    assert rep.final_relative_residual <= 1e-8 * (1 + 1e-12)
    dense = np.linalg.solve(dense_laplace2d(4, 4), b)
    assert np.abs(x - dense).max() < 1e-6 and np.abs(x - 1.0).max() < 1e-6


def test_max_iters_one_reports_not_converged():
    rep, _, _ = _solve(S, 4, 4, 32, 0, max_iters=1)
    assert not rep.converged and rep.iterations == 1 and rep.final_relative_residual > 1e-8


def test_jacobi_and_bad_args():
    rep, x, _ = _solve(S, 4, 4, 32, 0, pre="jacobi")
    assert rep.converged and np.abs(x - 1.0).max() < 1e-6
    p = generate_crs_problem("laplace2d", 2, 2, 32, 0, S)
    with pytest.raises(ContractError):
        cg_solve(p.matrix, p.b, p.x, tol=0.0)
    with pytest.raises(ContractError):
        cg_solve(p.matrix, p.b, p.x, preconditioner="ilu")


def test_zero_rhs():
    p = generate_crs_problem("laplace2d", 3, 3, 32, 0, S)
    p.b.put_scalar(0.0)
    rep = cg_solve(p.matrix, p.b, p.x)
    assert rep.converged and rep.iterations == 0 and rep.final_relative_residual == 0.0


@pytest.mark.parametrize("nx,ny", [(10, 7), (16, 9), (16, 16), (20, 20)])
def test_rank_counts_agree(nx, ny):
    reps = [run_ranks(r, _solve, nx, ny, 32, 0)[0][0] for r in (1, 2, 4)]
    base = reps[0].final_relative_residual
    for rep in reps:
        assert rep.converged and rep.iterations == reps[0].iterations
        assert abs(rep.final_relative_residual - base) <= 1e-6 * base


@pytest.mark.parametrize("nx,ny", [(8, 8), (12, 12)])
def test_rank_counts_at_roundoff_floor(nx, ny):
    # these right-hand sides excite few eigenvectors, so CG finishes with a
    # residual of pure rounding noise; only the floor itself is comparable
    reps = [run_ranks(r, _solve, nx, ny, 32, 0)[0][0] for r in (1, 2, 4)]
    assert len({rep.iterations for rep in reps}) == 1
    assert all(rep.final_relative_residual < 1e-14 for rep in reps)


def test_laplace2d_LL():
    rep, x, _ = run_ranks(2, _solve, 4, 4, 64, LL_OFFSET)[0]
    assert rep.converged and np.abs(x - 1.0).max() < 1e-6


@pytest.mark.dual
def test_mixed_widths_rejected():
    a = generate_crs_problem("laplace2d", 2, 2, 32, 0, S)
    b = generate_crs_problem("laplace2d", 2, 2, 64, 0, S)
    with pytest.raises(WidthMixError):
        cg_solve(a.matrix, b.b, a.x)


@pytest.mark.dual
@pytest.mark.parametrize("nranks", [1, 2, 4])
def test_width_invariant_reports(nranks):
    a = run_ranks(nranks, _solve, 6, 5, 32, 0)[0]
    b = run_ranks(nranks, _solve, 6, 5, 64, 0)[0]
    c = run_ranks(nranks, _solve, 6, 5, 64, LL_OFFSET)[0]
    assert a[0] == b[0] == c[0]
    assert a[1].tobytes() == b[1].tobytes() == c[1].tobytes()


@settings(max_examples=10, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**31))
def test_random_spd_against_dense(nranks, seed):
    n = 5 + seed % 40
    i, j, v = symmetric_entries(seed, n, 0.1)
    dense = np.zeros((n, n))
    dense[i, j] = v
    rhs = np.random.default_rng(seed).standard_normal(n)

    def prog(comm):
        A = build_matrix(comm, n, (i, j, v), 32, 0)
        b = MultiVector(A.range_map)
        b.values[:, 0] = rhs[A.range_map.my_gids_array()]
        x = MultiVector(A.domain_map)
        return cg_solve(A, b, x, 1e-10, 10 * n), x.gather_global()[:, 0]
    rep, x = run_ranks(nranks, prog)[0]
    assert rep.converged
    assert np.allclose(x, np.linalg.solve(dense, rhs), rtol=0, atol=1e-7)
