"""Synthetic test problems."""
from dataclasses import dataclass


from .block_map import BlockMap
from .crs_matrix import CrsMatrix
from .errors import ContractError
from .multivector import MultiVector
from .width import GlobalIndexWidth, require_built

KINDS = ("laplace2d",)


@dataclass
class GalleryProblem:
    kind: str
    nx: int
    ny: int
    width: GlobalIndexWidth
    gid_offset: int
    map: BlockMap
    matrix: CrsMatrix
    x: MultiVector
    b: MultiVector
    xexact: MultiVector


def laplace2d_row(gid, nx, ny, offset):
    """``(cols, vals)`` of one 5-point-stencil row, columns ascending."""
    k = gid - offset
    i, j = k % nx, k // nx
    cols, vals = [], []
    if j > 0:
        cols.append(gid - nx)
        vals.append(-1.0)
    if i > 0:
        cols.append(gid - 1)
        vals.append(-1.0)
    cols.append(gid)
    vals.append(4.0)
    if i < nx - 1:
        cols.append(gid + 1)
        vals.append(-1.0)
    if j < ny - 1:
        cols.append(gid + nx)
        vals.append(-1.0)
    return cols, vals


def generate_crs_problem(kind, nx, ny, width, gid_offset, comm, use_long_long=None):
    """Collective.  Build matrix, initial guess, right-hand side and exact solution.

    ``laplace2d`` is the 5-point stencil on an ``nx`` by ``ny`` grid: 4 on the
    diagonal and -1 to each grid neighbour, with grid point ``(i, j)`` at GID
    ``gid_offset + j * nx + i``.  ``xexact`` is all ones, ``b = A xexact`` and
    ``x`` starts at zero.  ``use_long_long=True`` is shorthand for 64-bit
    width.
    """
    if use_long_long is not None:
        width = 64 if use_long_long else 32
    width = require_built(GlobalIndexWidth.coerce(width), "generate_crs_problem")
    kind = kind.lower()
    if kind not in KINDS:
        raise ContractError(f"unknown problem kind {kind!r}; choose from {KINDS}")
    nx, ny, gid_offset = int(nx), int(ny), int(gid_offset)
    if nx < 1 or ny < 1:
        raise ContractError(f"grid must be at least 1 x 1, got {nx} x {ny}")

    row_map = BlockMap.uniform(nx * ny, gid_offset, comm, width=width)
    matrix = CrsMatrix(row_map)
    for gid in row_map.my_gids_array().tolist():
        cols, vals = laplace2d_row(gid, nx, ny, gid_offset)
        matrix.insert_global_values(gid, cols, vals)
    matrix.fill_complete()

    xexact = MultiVector(row_map)
    xexact.put_scalar(1.0)
    b = MultiVector(row_map)
    matrix.multiply(False, xexact, b)
    x = MultiVector(row_map)
    return GalleryProblem(kind, nx, ny, width, gid_offset, row_map, matrix, x, b, xexact)
