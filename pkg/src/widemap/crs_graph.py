"""Row-distributed sparsity pattern.

Lifecycle: insert global column indices into locally owned rows, then call
:meth:`CrsGraph.fill_complete`, which builds the column map, converts every
column to a 32-bit local index and packs the rows into CRS arrays.

Within each packed row, entries stay in ascending *global* column order.
That order is the same for every rank count and both index widths, so
anything summed along a row (the matrix-vector product) is bitwise
reproducible across them.
"""
import numpy as np

from . import config
from .block_map import BlockMap
from .errors import (
    CapacityError, ContractError, InvalidColumnError, LifecycleError, NotOwnedError,
    WidthError,
)
from .multivector import check_maps_match
from .width import (
    I32, I64, INT32_MAX, GlobalIndexWidth, check_object_width, index_array,
    index_scalar, require_built, typed_width,
)


class IndexData:
    """Index storage for one index type.

    Before fill the store of the row map's width holds one sorted, unique
    global-index array per local row (``rows``).  After fill the 32-bit store
    holds the packed local structure (``rowptr`` / ``indices``).
    """

    def __init__(self, dtype, num_rows=0):
        self.dtype = np.dtype(dtype)
        self.rows = [np.empty(0, dtype=self.dtype) for _ in range(num_rows)]
        self.rowptr = None
        self.indices = None

    @property
    def populated(self):
        return bool(self.rows) or self.indices is not None

    def release_rows(self):
        self.rows = []


class CrsGraph:
    def __init__(self, row_map):
        check_object_width(row_map.width)
        if row_map.element_size != 1:
            raise ContractError("CrsGraph rows need a map with element size 1")
        self.row_map = row_map
        self.col_map = None
        self.domain_map = None
        self.range_map = None
        self.filled = False
        self.indices_are_local = False
        n = row_map.num_my_elements
        self._data32 = IndexData(np.int32, n if row_map.width is I32 else 0)
        self._data64 = IndexData(np.int64, n if row_map.width is I64 else 0)
        self._counts = None
        self._owned_domain_lids = None
        self._remote_owners = None

    @property
    def comm(self):
        return self.row_map.comm

    @property
    def width(self):
        return self.row_map.width

    @property
    def indices_are_global(self):
        return not self.indices_are_local

    def __repr__(self):
        state = "filled" if self.filled else "open"
        return f"CrsGraph(rows={self.row_map.num_my_elements}, width={self.width.bits}, {state})"

    # -- raw index data -------------------------------------------------------

    def _global_store(self):
        return self._data32 if self.width is I32 else self._data64

    def index_data(self, int_type):
        """Index store for ``int_type`` (np.int32 or np.int64).

        The 64-bit store is reachable only for a 64-bit row map whose indices
        are still global.  The 32-bit store is reachable for a 32-bit row map,
        or for any map once indices are local (it then holds the packed local
        structure).
        """
        width = GlobalIndexWidth.coerce(int_type)
        if width is I32 and self.indices_are_local:
            return self._data32  # packed local indices are 32-bit in every build
        require_built(width, "index_data")
        if width is I64:
            if self.width is not I64:
                raise WidthError("64-bit index data requested from a graph with 32-bit global indices")
            if self.indices_are_local:
                raise LifecycleError("64-bit index data is gone once indices have been made local")
            return self._data64
        if self.width is I32 or self.indices_are_local:
            return self._data32
        raise WidthError("32-bit index data requested from a 64-bit graph whose indices are still global")

    # -- insertion ----------------------------------------------------------

    def _open_row(self, global_row, what):
        if self.filled:
            raise LifecycleError(f"{what}: graph is already fill-completed")
        row = index_scalar(global_row, self.width, f"{what} row")
        lrow = self.row_map.lid(row)
        if lrow < 0:
            raise NotOwnedError(f"{what}: row {row} is not owned by rank {self.comm.rank}")
        return lrow

    def insert_global_indices(self, global_row, cols):
        """Union ``cols`` into the row's column set (duplicates are ignored)."""
        lrow = self._open_row(global_row, "insert_global_indices")
        c = index_array(cols, self.width, "insert_global_indices columns")
        store = self._global_store()
        store.rows[lrow] = np.union1d(store.rows[lrow], c).astype(store.dtype, copy=False)

    def remove_global_indices(self, global_row):
        """Empty the row's column set."""
        lrow = self._open_row(global_row, "remove_global_indices")
        store = self._global_store()
        store.rows[lrow] = np.empty(0, dtype=store.dtype)

    # -- fill ---------------------------------------------------------------

    def fill_complete(self, domain_map=None, range_map=None):
        """Collective.  Build the column map and convert to packed local indices.

        Column map order: referenced columns owned by this rank in the domain
        map come first, in domain-map local order; then remote columns grouped
        by owning rank (ascending), ascending GID within a rank.
        """
        if self.filled:
            raise LifecycleError("fill_complete called twice")
        domain_map = self.row_map if domain_map is None else domain_map
        range_map = self.row_map if range_map is None else range_map
        check_maps_match(self.row_map, domain_map, "fill_complete domain map")
        check_maps_match(self.row_map, range_map, "fill_complete range map")
        comm = self.comm
        width = self.width
        store = self._global_store()

        if store.rows:
            referenced = np.unique(np.concatenate(store.rows)).astype(np.int64)
        else:
            referenced = np.empty(0, dtype=np.int64)
        dlids = domain_map.lids(referenced)
        owned_mask = dlids >= 0
        owned_order = np.argsort(dlids[owned_mask], kind="stable")
        owned = referenced[owned_mask][owned_order]
        owned_domain_lids = dlids[owned_mask][owned_order]
        remote = referenced[~owned_mask]

        owners, _ = domain_map.remote_id_list(remote)
        bad = remote[owners < 0]
        n_bad = int(comm.max_all(np.array([bad.size], dtype=np.int64))[0])
        if n_bad:
            detail = f"rank {comm.rank}: columns {bad[:5].tolist()}" if bad.size else "another rank"
            raise InvalidColumnError(f"column indices absent from the domain map ({detail})")
        order = np.lexsort((remote, owners))
        remote = remote[order]
        owners = owners[order]

        col_gids = np.concatenate([owned, remote]).astype(width.dtype)
        self.col_map = BlockMap.from_gids(-1, col_gids, domain_map.index_base64(), comm,
                                          width=width)
        self.domain_map = domain_map
        self.range_map = range_map
        self._owned_domain_lids = owned_domain_lids.astype(np.int32)
        self._remote_owners = owners.astype(np.int32)

        nrows = self.row_map.num_my_elements
        lengths = np.array([r.size for r in store.rows], dtype=np.int64)
        if lengths.sum() > INT32_MAX:
            raise ContractError("local entry count exceeds the 32-bit local index range")
        rowptr = np.zeros(nrows + 1, dtype=np.int32)
        np.cumsum(lengths, out=rowptr[1:])
        flat = np.concatenate(store.rows).astype(np.int64) if nrows else np.empty(0, np.int64)
        indices = self.col_map.lids(flat).astype(np.int32)

        local = self._data32
        if width is I64:
            self._data64.release_rows()
        local.release_rows()
        local.rowptr = rowptr
        local.indices = indices
        self.filled = True
        self.indices_are_local = True

        row_gids = self.row_map.my_gids_array().astype(np.int64)
        diag = 0
        for i in range(nrows):
            seg = flat[rowptr[i]:rowptr[i + 1]]
            k = np.searchsorted(seg, row_gids[i])
            diag += int(k < seg.size and seg[k] == row_gids[i])
        self._my_diagonals = diag
        entries, diagonals = comm.sum_all(np.array([indices.size, diag], dtype=np.int64))
        self._counts = {
            "num_global_entries64": int(entries),
            "num_global_diagonals64": int(diagonals),
            "num_global_rows64": range_map.num_global_points64(),
            "num_global_cols64": domain_map.num_global_points64(),
            "num_global_block_rows64": range_map.num_global_elements64(),
            "num_global_block_cols64": domain_map.num_global_elements64(),
            "num_global_block_diagonals64": int(diagonals),
        }

    # -- row extraction -------------------------------------------------------

    def _row_lid(self, global_row, what):
        row = index_scalar(global_row, self.width, f"{what} row", wide_ok=True)
        lrow = self.row_map.lid(row)
        if lrow < 0:
            raise NotOwnedError(f"{what}: row {row} is not owned by rank {self.comm.rank}")
        return lrow

    def _global_row(self, lrow):
        if self.indices_are_local:
            d = self._data32
            lids = d.indices[d.rowptr[lrow]:d.rowptr[lrow + 1]]
            return self.col_map.my_gids_array()[lids]
        return self._global_store().rows[lrow]

    def global_row(self, global_row):
        """Column GIDs of a local row, ascending, at the graph's width (a copy)."""
        return self._global_row(self._row_lid(global_row, "global_row")).copy()

    def extract_global_row_copy(self, global_row, indices):
        """Copy the row's column GIDs into ``indices``; return the count.

        A 64-bit buffer works for either width; a 32-bit buffer only for a
        32-bit graph.  Raises :class:`CapacityError` if the buffer is short.
        """
        lrow = self._row_lid(global_row, "extract_global_row_copy")
        _check_index_buffer(indices, self.width)
        cols = self._global_row(lrow)
        if indices.size < cols.size:
            raise CapacityError(cols.size, indices.size)
        indices[:cols.size] = cols
        return int(cols.size)

    def extract_global_row_view(self, global_row):
        """Read-only view of the row's global indices; only before fill."""
        if self.indices_are_local:
            raise LifecycleError("no global-index view once indices are local; use a copy")
        if typed_width(global_row) is not None and typed_width(global_row) is not self.width:
            raise WidthError("extract_global_row_view: index type does not match the graph")
        view = self._global_row(self._row_lid(global_row, "extract_global_row_view")).view()
        view.setflags(write=False)
        return view

    def extract_my_row_view(self, local_row):
        """Packed local column indices of ``local_row`` (after fill)."""
        self._require_filled("extract_my_row_view")
        d = self._data32
        view = d.indices[d.rowptr[local_row]:d.rowptr[local_row + 1]].view()
        view.setflags(write=False)
        return view

    def num_global_indices(self, global_row):
        """Number of entries in a locally owned row."""
        return int(self._global_row(self._row_lid(global_row, "num_global_indices")).size)

    def num_my_indices(self, local_row):
        return int(self._global_row(local_row).size)

    # -- counts -------------------------------------------------------------

    def _require_filled(self, what):
        if not self.filled:
            raise LifecycleError(f"{what} needs a fill-completed graph")

    def _count(self, name):
        self._require_filled(name)
        return self._counts[name]

    @property
    def num_my_rows(self):
        return self.row_map.num_my_elements

    @property
    def num_my_cols(self):
        self._require_filled("num_my_cols")
        return self.col_map.num_my_elements

    @property
    def num_my_entries(self):
        if self.indices_are_local:
            return int(self._data32.indices.size)
        return int(sum(r.size for r in self._global_store().rows))

    @property
    def num_my_diagonals(self):
        self._require_filled("num_my_diagonals")
        return self._my_diagonals

    def num_global_rows64(self):
        return self._count("num_global_rows64")

    def num_global_cols64(self):
        return self._count("num_global_cols64")

    def num_global_entries64(self):
        return self._count("num_global_entries64")

    def num_global_nonzeros64(self):
        return self._count("num_global_entries64")

    def num_global_diagonals64(self):
        return self._count("num_global_diagonals64")

    def num_global_block_rows64(self):
        return self._count("num_global_block_rows64")

    def num_global_block_cols64(self):
        return self._count("num_global_block_cols64")

    def num_global_block_diagonals64(self):
        return self._count("num_global_block_diagonals64")

    def index_base64(self):
        return self.row_map.index_base64()

    def graph_counts(self):
        """All wide global counts plus the local entry count, as a dict."""
        self._require_filled("graph_counts")
        out = dict(self._counts)
        out["num_my_entries"] = self.num_my_entries
        return out

    if config.HAVE_32BIT:
        def _narrow_count(self, name):
            return self.row_map._narrow(self._count(name + "64"), name)

        def num_global_rows(self):
            return self._narrow_count("num_global_rows")

        def num_global_cols(self):
            return self._narrow_count("num_global_cols")

        def num_global_entries(self):
            return self._narrow_count("num_global_entries")

        def num_global_nonzeros(self):
            return self._narrow_count("num_global_entries")

        def num_global_diagonals(self):
            return self._narrow_count("num_global_diagonals")

        def num_global_block_rows(self):
            return self._narrow_count("num_global_block_rows")

        def num_global_block_cols(self):
            return self._narrow_count("num_global_block_cols")

        def num_global_block_diagonals(self):
            return self._narrow_count("num_global_block_diagonals")

        def index_base(self):
            return self.row_map.index_base()

        def grid(self, local_row):
            return self.row_map.gid(local_row)

        def gcid(self, local_col):
            self._require_filled("gcid")
            return self.col_map.gid(local_col)

    # -- row/column index translation ----------------------------------------

    def grid64(self, local_row):
        return self.row_map.gid64(local_row)

    def gcid64(self, local_col):
        self._require_filled("gcid64")
        return self.col_map.gid64(local_col)

    def lrid(self, global_row):
        return self.row_map.lid(global_row)

    def lcid(self, global_col):
        self._require_filled("lcid")
        return self.col_map.lid(global_col)

    def my_grid(self, global_row):
        return self.row_map.my_gid(global_row)

    def my_gcid(self, global_col):
        return self.filled and self.col_map.my_gid(global_col)

    my_global_row = my_grid


def _check_index_buffer(buf, width):
    if not isinstance(buf, np.ndarray):
        raise ContractError("index buffer must be a NumPy array")
    bw = typed_width(buf)
    require_built(bw, "index buffer")
    if bw is I32 and width is I64:
        raise WidthError("32-bit index buffer for an object with 64-bit global indices")
