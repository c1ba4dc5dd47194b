"""Row-matrix interface and the distributed CRS matrix."""
import abc

import numpy as np

from . import config
from .crs_graph import CrsGraph, _check_index_buffer
from .distribution import create_from_recvs
from .errors import CapacityError, ContractError, LifecycleError, NotOwnedError
from .multivector import CombineMode, MultiVector, check_maps_match
from .width import index_array, index_scalar


class RowMatrix(abc.ABC):
    """Read-and-apply surface of a real, row-oriented sparse matrix.

    Implementations provide the ``...64`` global counts, which must work for
    both index widths.  The narrow counts are derived here and raise on any
    matrix whose row map has 64-bit global indices.
    """

    @abc.abstractmethod
    def num_global_nonzeros64(self): ...

    @abc.abstractmethod
    def num_global_rows64(self): ...

    @abc.abstractmethod
    def num_global_cols64(self): ...

    @abc.abstractmethod
    def num_global_diagonals64(self): ...

    @abc.abstractmethod
    def row_matrix_row_map(self): ...

    @abc.abstractmethod
    def operator_domain_map(self): ...

    @abc.abstractmethod
    def operator_range_map(self): ...

    @abc.abstractmethod
    def num_my_rows(self): ...

    @abc.abstractmethod
    def extract_my_row_copy(self, local_row):
        """``(values, local column indices)`` of a local row."""

    @abc.abstractmethod
    def extract_diagonal_copy(self, diagonal):
        """Fill a vector on the row map with the matrix diagonal."""

    @abc.abstractmethod
    def multiply(self, transpose, x, y):
        """``y <- A x`` (collective)."""

    def apply(self, x, y):
        self.multiply(False, x, y)

    if config.HAVE_32BIT:
        def num_global_nonzeros(self):
            return self.row_matrix_row_map()._narrow(self.num_global_nonzeros64(), "num_global_nonzeros")

        def num_global_rows(self):
            return self.row_matrix_row_map()._narrow(self.num_global_rows64(), "num_global_rows")

        def num_global_cols(self):
            return self.row_matrix_row_map()._narrow(self.num_global_cols64(), "num_global_cols")

        def num_global_diagonals(self):
            return self.row_matrix_row_map()._narrow(self.num_global_diagonals64(), "num_global_diagonals")


class CrsMatrix(RowMatrix):
    """Float64 CRS matrix over a :class:`CrsGraph` it owns.

    Before fill, values accumulate per row; repeated insertions into the same
    (row, column) are summed.  After fill the pattern is frozen but values can
    still be replaced or summed into.
    """

    def __init__(self, row_map):
        self.graph = CrsGraph(row_map)
        self._pending = [dict() for _ in range(row_map.num_my_elements)]
        self.values = None
        self._import_plan = None
        self._export_lids = None

    def __repr__(self):
        return f"CrsMatrix({self.graph!r})"

    @property
    def row_map(self):
        return self.graph.row_map

    @property
    def col_map(self):
        return self.graph.col_map

    @property
    def domain_map(self):
        return self.graph.domain_map

    @property
    def range_map(self):
        return self.graph.range_map

    @property
    def filled(self):
        return self.graph.filled

    @property
    def comm(self):
        return self.graph.comm

    @property
    def width(self):
        return self.graph.width

    @property
    def import_plan(self):
        return self._import_plan

    # -- RowMatrix surface ------------------------------------------------------

    def num_global_nonzeros64(self):
        return self.graph.num_global_entries64()

    def num_global_rows64(self):
        return self.graph.num_global_rows64()

    def num_global_cols64(self):
        return self.graph.num_global_cols64()

    def num_global_diagonals64(self):
        return self.graph.num_global_diagonals64()

    def num_global_entries64(self):
        return self.graph.num_global_entries64()

    def row_matrix_row_map(self):
        return self.graph.row_map

    def operator_domain_map(self):
        return self.graph.domain_map

    def operator_range_map(self):
        return self.graph.range_map

    def num_my_rows(self):
        return self.graph.num_my_rows

    def num_my_nonzeros(self):
        return self.graph.num_my_entries

    def row_matrix_counts(self):
        return {
            "num_global_nonzeros64": self.num_global_nonzeros64(),
            "num_global_rows64": self.num_global_rows64(),
            "num_global_cols64": self.num_global_cols64(),
            "num_global_diagonals64": self.num_global_diagonals64(),
        }

    # -- assembly ---------------------------------------------------------------

    def insert_global_values(self, global_row, cols, vals):
        """Add entries to an owned row; duplicates are summed at fill."""
        c = index_array(cols, self.width, "insert_global_values columns")
        v = np.asarray(vals, dtype=np.float64).reshape(-1)
        if c.size != v.size:
            raise ContractError(f"{c.size} column indices but {v.size} values")
        self.graph.insert_global_indices(global_row, c)
        row = self._pending[self.graph.row_map.lid(global_row)]
        for col, val in zip(c.tolist(), v.tolist()):
            if col in row:
                row[col] += val
            else:
                row[col] = val

    def modify_global_values(self, global_row, cols, vals, mode):
        """Replace or sum into existing entries of an owned row.

        Entries absent from the pattern are skipped; returns how many.
        """
        mode = CombineMode(mode)
        row = index_scalar(global_row, self.width, "modify_global_values row")
        lrow = self.row_map.lid(row)
        if lrow < 0:
            raise NotOwnedError(f"row {row} is not owned by rank {self.comm.rank}")
        c = index_array(cols, self.width, "modify_global_values columns")
        v = np.asarray(vals, dtype=np.float64).reshape(-1)
        if c.size != v.size:
            raise ContractError(f"{c.size} column indices but {v.size} values")
        missing = 0
        if not self.filled:
            pending = self._pending[lrow]
            for col, val in zip(c.tolist(), v.tolist()):
                if col not in pending:
                    missing += 1
                elif mode is CombineMode.REPLACE:
                    pending[col] = val
                else:
                    pending[col] += val
            return missing
        d = self.graph._data32
        lo, hi = d.rowptr[lrow], d.rowptr[lrow + 1]
        row_gids = self.col_map.my_gids_array()[d.indices[lo:hi]].astype(np.int64)
        for col, val in zip(c.astype(np.int64), v):
            k = np.searchsorted(row_gids, col)
            if k >= row_gids.size or row_gids[k] != col:
                missing += 1
            elif mode is CombineMode.REPLACE:
                self.values[lo + k] = val
            else:
                self.values[lo + k] += val
        return missing

    def replace_global_values(self, global_row, cols, vals):
        return self.modify_global_values(global_row, cols, vals, CombineMode.REPLACE)

    def sum_into_global_values(self, global_row, cols, vals):
        return self.modify_global_values(global_row, cols, vals, CombineMode.SUM_INTO)

    def fill_complete(self, domain_map=None, range_map=None):
        """Collective.  Freeze the pattern, pack values, build the import plan.

        The range map must have the row map's layout (no export step).
        """
        if self.filled:
            raise LifecycleError("fill_complete called twice")
        rmap = self.row_map if range_map is None else range_map
        check_maps_match(self.row_map, rmap, "fill_complete range map")
        if domain_map is not None:
            check_maps_match(self.row_map, domain_map, "fill_complete domain map")
        if not rmap.same_as(self.row_map):
            raise ContractError("range map must have the same layout as the row map")

        store = self.graph._global_store()
        packed = []
        for lrow, cols in enumerate(store.rows):
            pending = self._pending[lrow]
            packed.append(np.array([pending[int(c)] for c in cols], dtype=np.float64))
        self.graph.fill_complete(domain_map, rmap)
        self.values = np.concatenate(packed) if packed else np.empty(0)
        self._pending = None

        graph = self.graph
        n_remote = graph.col_map.num_my_elements - graph._owned_domain_lids.size
        if self.comm.max_all(np.array([n_remote], dtype=np.int64))[0] > 0:
            remote_gids = graph.col_map.my_gids_array()[graph._owned_domain_lids.size:]
            plan, export_gids, _ = create_from_recvs(self.comm, remote_gids, graph._remote_owners)
            self._import_plan = plan
            self._export_lids = graph.domain_map.lids(export_gids)

    # -- extraction ----------------------------------------------------------

    def global_row(self, global_row):
        """``(cols, vals)`` of an owned row, columns ascending."""
        lrow = self.graph._row_lid(global_row, "global_row")
        cols = self.graph._global_row(lrow).copy()
        if self.filled:
            d = self.graph._data32
            vals = self.values[d.rowptr[lrow]:d.rowptr[lrow + 1]].copy()
        else:
            pending = self._pending[lrow]
            vals = np.array([pending[int(c)] for c in cols], dtype=np.float64)
        return cols, vals

    def extract_global_row_copy(self, global_row, values, indices):
        """Copy an owned row into ``values`` / ``indices``; return the count."""
        _check_index_buffer(indices, self.width)
        cols, vals = self.global_row(global_row)
        capacity = min(indices.size, np.asarray(values).size)
        if capacity < cols.size:
            raise CapacityError(cols.size, capacity)
        indices[:cols.size] = cols
        values[:cols.size] = vals
        return int(cols.size)

    def extract_my_row_copy(self, local_row):
        self._require_filled("extract_my_row_copy")
        d = self.graph._data32
        lo, hi = d.rowptr[local_row], d.rowptr[local_row + 1]
        return self.values[lo:hi].copy(), d.indices[lo:hi].copy()

    def extract_diagonal_copy(self, diagonal):
        self._require_filled("extract_diagonal_copy")
        check_maps_match(self.row_map, diagonal.map, "extract_diagonal_copy")
        d = self.graph._data32
        row_gids = self.row_map.my_gids_array()
        diag_lcids = self.col_map.lids(row_gids.astype(np.int64))
        out = np.zeros(self.num_my_rows())
        for i in range(self.num_my_rows()):
            lo, hi = d.rowptr[i], d.rowptr[i + 1]
            hit = np.flatnonzero(d.indices[lo:hi] == diag_lcids[i])
            if hit.size:
                out[i] = self.values[lo + hit[0]]
        diagonal.values[:, 0] = out

    # -- apply -----------------------------------------------------------------

    def _require_filled(self, what):
        if not self.filled:
            raise LifecycleError(f"{what} needs a fill-completed matrix")

    def multiply(self, transpose, x, y):
        """Collective.  ``y <- A x``; off-rank entries of ``x`` come through the import plan."""
        if transpose:
            raise ContractError("transpose multiply is not supported")
        self._require_filled("multiply")
        check_maps_match(self.domain_map, x.map, "multiply x")
        check_maps_match(self.range_map, y.map, "multiply y")
        if x.num_vectors != y.num_vectors:
            raise ContractError(f"x has {x.num_vectors} vectors, y has {y.num_vectors}")
        if not x.map.same_as(self.domain_map):
            raise ContractError("x does not have the domain map's layout")
        if not y.map.same_as(self.range_map):
            raise ContractError("y does not have the range map's layout")

        graph = self.graph
        xv = x.values
        x_col = np.empty((graph.col_map.num_my_elements, x.num_vectors))
        n_owned = graph._owned_domain_lids.size
        x_col[:n_owned] = xv[graph._owned_domain_lids]
        if self._import_plan is not None:
            x_col[n_owned:] = self._import_plan.do(xv[self._export_lids])

        d = graph._data32
        nrows = self.num_my_rows()
        row_ids = np.repeat(np.arange(nrows), np.diff(d.rowptr))
        products = self.values[:, None] * x_col[d.indices]
        out = np.empty((nrows, x.num_vectors))
        # bincount adds in entry order: each row sums left to right
        for j in range(x.num_vectors):
            out[:, j] = np.bincount(row_ids, weights=products[:, j], minlength=nrows)
        y.values[:] = out

    def __matmul__(self, x):
        y = MultiVector(self.range_map, x.num_vectors)
        self.multiply(False, x, y)
        return y

    # -- diagnostics ------------------------------------------------------------

    def storage_stats(self):
        """Byte widths of the index and value stores currently held."""
        d32 = self.graph._data32
        packed = d32.indices.dtype.itemsize if d32.indices is not None else 0
        pre = 0 if self.graph.indices_are_local else self.width.dtype.itemsize
        return {
            "bytes_per_packed_column_index": packed,
            "bytes_per_value": np.dtype(np.float64).itemsize,
            "bytes_per_global_index_pre_fill": pre,
        }
