import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from widemap import (
    BlockMap, CrsMatrix, SerialComm, count_entries, generate_crs_problem, read_coordinate_file,
    run_ranks, write_coordinate_file,
)
from widemap.errors import ParseError, WidthRangeError
from widemap.matrix_io import MM_HEADER, TRIPLES
from _helpers import LL_OFFSET, build_matrix, random_entries, spmv_global

S = SerialComm()
SMALL = MM_HEADER + "\n% a comment\n2 2 4\n1 1 2\n1 2 -1\n2 1 -1\n2 2 2\n"


@pytest.fixture
def small(tmp_path):
    p = tmp_path / "small.mtx"
    p.write_text(SMALL)
    return str(p)


def test_count_entries(small, tmp_path):
    rows, cols, nnz, per_row = count_entries(small, S)
    assert (rows, cols, nnz, per_row.tolist()) == (2, 2, 4, [2, 2])
    bad = tmp_path / "bad.mtx"
    bad.write_text(SMALL.replace("general", "symmetric"))
    with pytest.raises(ParseError) as info:
        count_entries(str(bad), S)
    assert info.value.line == 1


def test_parse_errors_carry_line(tmp_path):
    cases = {
        "size": MM_HEADER + "\n2 x 4\n",
        "bounds": MM_HEADER + "\n2 2 1\n3 1 1.0\n",
        "short": MM_HEADER + "\n2 2 2\n1 1 1.0\n",
    }
    lines = {"size": 2, "bounds": 3, "short": 3}
    for name, text in cases.items():
        p = tmp_path / f"{name}.mtx"
        p.write_text(text)

        def prog(comm):
            with pytest.raises(ParseError) as info:
                read_coordinate_file(str(p), comm)
            return info.value.line
        assert run_ranks(2, prog) == [lines[name]] * 2


def test_read_small(small):
    row_map, A = read_coordinate_file(small, S, 32, 0)
    assert A.num_global_nonzeros64() == 4 and row_map.num_global_elements() == 2
    assert spmv_global(A).tolist() == [1.0, 1.0]


def test_read_i32_offset_out_of_range(small):
    with pytest.raises(WidthRangeError):
        read_coordinate_file(small, S, 32, LL_OFFSET)


def test_triples(tmp_path):
    p = tmp_path / "t.txt"
    p.write_text("1 1 3.5\n3 2 -1\n")
    _, A = read_coordinate_file(str(p), S)
    assert A.num_global_rows64() == 3 and A.num_global_cols64() == 2
    out = tmp_path / "o.txt"
    write_coordinate_file(A, str(out), TRIPLES)
    assert out.read_text() == "1 1 3.5\n3 2 -1.0\n"


def test_laplace_file_lines(tmp_path):
    p = tmp_path / "lap.mtx"
    write_coordinate_file(generate_crs_problem("laplace2d", 3, 3, 32, 0, S).matrix, str(p))
    lines = p.read_text().splitlines()
    assert lines[0] == MM_HEADER and lines[1] == "9 9 33" and len(lines) - 2 == 33


def test_empty_matrix_file(tmp_path):
    A = CrsMatrix(BlockMap.uniform(0, 0, S))
    A.fill_complete()
    p = tmp_path / "e.mtx"
    write_coordinate_file(A, str(p))
    assert p.read_text() == MM_HEADER + "\n0 0 0\n"


def test_read_small_LL(small):
    def prog(comm):
        row_map, A = read_coordinate_file(small, comm, 64, LL_OFFSET)
        return row_map.max_all_gid64(), spmv_global(A).tolist()
    assert run_ranks(2, prog)[0] == (3000000001, [1.0, 1.0])


def test_offset_erased_in_file_LL(tmp_path):
    a, b = tmp_path / "a.mtx", tmp_path / "b.mtx"

    def prog(comm):
        write_coordinate_file(generate_crs_problem("laplace2d", 4, 3, 64, 0, comm).matrix, str(a))
        write_coordinate_file(generate_crs_problem("laplace2d", 4, 3, 64, LL_OFFSET, comm).matrix, str(b))
    run_ranks(3, prog)
    assert a.read_bytes() == b.read_bytes()


def _roundtrip(width, offset, nranks, seed, tmp):
    n = 1 + seed % 30
    i, j, v = random_entries(seed, n, 0.2)
    first, second = f"{tmp}/rt{seed}_a.mtx", f"{tmp}/rt{seed}_b.mtx"

    def prog(comm):
        A = build_matrix(comm, n, (i, j, v), width, offset)
        write_coordinate_file(A, first)
        _, B = read_coordinate_file(first, comm, width, offset)
        write_coordinate_file(B, second)
        rows, cols, nnz, _ = count_entries(first, comm)
        same = all(np.array_equal(A.global_row(g)[0], B.global_row(g)[0])
                   and A.global_row(g)[1].tobytes() == B.global_row(g)[1].tobytes()
                   for g in A.row_map.my_gids_array().tolist())
        return same, nnz == B.num_global_nonzeros64() == i.size, (rows, cols) == (n, n)
    assert all(all(r) for r in run_ranks(nranks, prog))
    with open(first) as fa, open(second) as fb:
        assert fa.read() == fb.read()


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**31))
def test_write_read_roundtrip(tmp_path_factory, nranks, seed):
    _roundtrip(32, 0, nranks, seed, tmp_path_factory.mktemp("rt"))


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**31))
def test_write_read_roundtrip_LL(tmp_path_factory, nranks, seed):
    _roundtrip(64, LL_OFFSET, nranks, seed, tmp_path_factory.mktemp("rt"))
