import pytest

from widemap import MultiVector, SerialComm, generate_crs_problem, run_ranks
from widemap.errors import ContractError, WidthRangeError
from _helpers import LL_OFFSET

S = SerialComm()


def _check_problem(comm, nx, ny, width, offset):
    p = generate_crs_problem("laplace2d", nx, ny, width, offset, comm)
    y = MultiVector(p.map)
    p.matrix.multiply(False, p.xexact, y)
    ok = y.values.tobytes() == p.b.values.tobytes() and not p.x.values.any()
    for g in p.map.my_gids_array().tolist():
        cols, vals = p.matrix.global_row(g)
        k = g - offset
        i, j = k % nx, k // nx
        want = sorted(offset + jj * nx + ii for ii, jj in ((i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1), (i, j))
                      if 0 <= ii < nx and 0 <= jj < ny)
        ok &= cols.tolist() == want
        ok &= vals.tolist() == [4.0 if c == g else -1.0 for c in want]
    return ok, p.matrix.num_global_nonzeros64(), p.map.max_all_gid64()


def test_laplace2d_3x3():
    assert _check_problem(S, 3, 3, 32, 0) == (True, 33, 8)
    assert all(r[0] for r in run_ranks(4, _check_problem, 5, 3, 32, 0))


def test_laplace2d_1x1():
    p = generate_crs_problem("laplace2d", 1, 1, 32, 0, S)
    assert p.matrix.num_global_nonzeros64() == 1 and p.b.values.ravel().tolist() == [4.0]


def test_bad_arguments():
    with pytest.raises(ContractError):
        generate_crs_problem("poisson3d", 2, 2, 32, 0, S)
    with pytest.raises(ContractError):
        generate_crs_problem("laplace2d", 0, 2, 32, 0, S)
    with pytest.raises(WidthRangeError):
        generate_crs_problem("laplace2d", 2, 2, 32, LL_OFFSET, S)


def test_laplace2d_4x4_LL():
    out = run_ranks(3, _check_problem, 4, 4, 64, LL_OFFSET)
    assert all(r == (True, 64, 3000000015) for r in out)
    p = generate_crs_problem("laplace2d", 2, 2, None, LL_OFFSET, S, use_long_long=True)
    assert p.map.global_indices_long_long()
