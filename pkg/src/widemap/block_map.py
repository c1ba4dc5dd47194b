"""The distribution descriptor.

A :class:`BlockMap` assigns global indices (GIDs) to ranks.  It is built at
one of two global index widths and remembers which; local indices (LIDs) and
local counts are always 32-bit.

Accessor naming follows one convention.  Accessors returning a GID or a
global count come in pairs: the ``...64`` form returns a Python int, works for
maps of either width and exists in every build mode; the unsuffixed form is
the narrow one, exists only when 32-bit indices are built, and raises
:class:`~widemap.errors.WidthError` on every call against a 64-bit map, even
when the value would fit.
"""
import numpy as np

from . import config
from .errors import CapacityError, ConsistencyError, ContractError, WidthError, WidthStateError
from .partition import uniform_starts
from .width import (
    INVALID, I32, I64, INT32_MAX, GlobalIndexWidth, check_fits, check_object_width,
    index_array, index_scalar, require_built, typed_width,
)


def _resolve_width(width, *typed_args):
    """Explicit width, else the width carried by NumPy arguments, else 32-bit."""
    carried = {w for w in (typed_width(a) for a in typed_args) if w is not None}
    if width is not None:
        width = GlobalIndexWidth.coerce(width)
        if width is INVALID:
            raise WidthStateError("cannot construct a map with an invalid width")
        return require_built(width, "map construction")
    if len(carried) > 1:
        raise WidthError("constructor arguments mix 32-bit and 64-bit global index types")
    return require_built(carried.pop() if carried else I32, "map construction")


def _as_int(value, what):
    if isinstance(value, (np.integer, int)) and not isinstance(value, bool):
        return int(value)
    raise ContractError(f"{what} must be an integer, got {value!r}")


class BlockMap:
    """Layout of GIDs (each a block of ``element_size`` points) over ranks.

    ``BlockMap()`` gives a default-constructed map with an invalid width
    state; real maps come from :meth:`uniform` and :meth:`from_gids`.
    """

    def __init__(self):
        self.comm = None
        self.width = INVALID
        self.element_size = 1
        self.num_my_elements = 0
        self.linear = False
        self.distributed_global = False
        self._num_global = 0
        self._index_base = 0
        self._min_my = self._max_my = self._min_all = self._max_all = -1
        self._gids = None
        self._rank_starts = None
        self._sorted = None
        self._directory = None

    # -- construction ---------------------------------------------------

    @classmethod
    def uniform(cls, num_global, index_base, comm, width=None, element_size=1):
        """Divide ``num_global`` GIDs as evenly as possible, in rank order.

        Rank ``p`` owns ``n // P`` GIDs, plus one if ``p < n % P``.  Not
        collective.
        """
        width = _resolve_width(width, num_global)
        n = _as_int(num_global, "num_global")
        base = _as_int(index_base, "index_base")
        if n < 0:
            raise ContractError(f"number of global elements must be >= 0, got {n}")
        check_fits(width, [base, base + max(n, 1) - 1], "uniform map extent")
        self = cls._blank(comm, width, base, element_size)
        starts = uniform_starts(n, comm.size, base)
        self._num_global = n
        self._rank_starts = starts
        self.num_my_elements = int(starts[comm.rank + 1] - starts[comm.rank])
        self.linear = True
        self.distributed_global = comm.size > 1 and n > 0
        self._set_local_extent(int(starts[comm.rank]))
        if n:
            self._min_all, self._max_all = base, base + n - 1
        else:
            self._min_all = self._max_all = base - 1
        return self

    @classmethod
    def from_gids(cls, num_global, my_gids, index_base, comm, width=None, element_size=1):
        """Collective.  Map owning exactly ``my_gids`` on the calling rank.

        Pass ``num_global = -1`` to have the global count computed; any other
        value is checked against the sum of local counts.  GIDs must be unique
        on each rank and not below ``index_base``; they may repeat across
        ranks (column maps).
        """
        width = _resolve_width(width, num_global, my_gids)
        stated = _as_int(num_global, "num_global")
        base = _as_int(index_base, "index_base")
        error = None
        try:
            gids = index_array(my_gids, width, "map GIDs")
            if np.unique(gids).size != gids.size:
                raise ContractError(f"rank {comm.rank}: duplicate GIDs in the local list")
            if gids.size and gids.min() < base:
                raise ContractError(f"rank {comm.rank}: GID {gids.min()} below index base {base}")
            check_fits(width, [base], "index base")
            if gids.size > INT32_MAX:
                raise ContractError("local element count exceeds the 32-bit local index range")
        except Exception as exc:  # reported collectively below
            error = exc
            gids = np.empty(0, dtype=width.dtype)

        n_local = gids.size
        wide = gids.astype(np.int64)
        consecutive = bool(n_local < 2 or np.all(np.diff(wide) == 1))
        first = int(gids[0]) if n_local else 0
        lo = int(gids.min()) if n_local else 0
        hi = int(gids.max()) if n_local else 0
        report = None if error is None else (type(error), str(error))
        rows = comm.all_gather_object((n_local, first, lo, hi, consecutive, report))
        if error is not None:
            raise error
        for row in rows:
            if row[5] is not None:
                exc_type, message = row[5]
                raise exc_type(message)

        total = sum(row[0] for row in rows)
        if stated != -1 and stated != total:
            raise ConsistencyError(
                f"stated global element count {stated} != sum of local counts {total}")

        self = cls._blank(comm, width, base, element_size)
        self._gids = gids.copy()
        self._gids.setflags(write=False)
        self._num_global = total
        self.num_my_elements = int(n_local)
        self.distributed_global = comm.size > 1 and any(row[0] != total for row in rows)
        nonempty = [row for row in rows if row[0]]
        if nonempty:
            self._min_all = min(row[2] for row in nonempty)
            self._max_all = max(row[3] for row in nonempty)
        else:
            self._min_all = self._max_all = base - 1
        self._set_local_extent(lo if n_local else None, hi)

        # linear: every rank consecutive and ranks abut in rank order
        starts = []
        running = nonempty[0][1] if nonempty else base
        linear = True
        for n_r, first_r, _, _, consec, _ in rows:
            if n_r and (not consec or first_r != running):
                linear = False
                break
            starts.append(running)
            running += n_r
        if linear:
            starts.append(running)
            self._rank_starts = np.array(starts, dtype=np.int64)
        self.linear = linear
        return self

    @classmethod
    def _blank(cls, comm, width, base, element_size):
        element_size = _as_int(element_size, "element_size")
        if element_size < 1:
            raise ContractError(f"element size must be >= 1, got {element_size}")
        self = cls()
        self.comm = comm
        self.width = width
        self._index_base = base
        self.element_size = element_size
        return self

    def _set_local_extent(self, lo, hi=None):
        if self.num_my_elements == 0 or lo is None:
            self._min_my = self._max_my = self._index_base - 1
        elif hi is None:
            self._min_my, self._max_my = lo, lo + self.num_my_elements - 1
        else:
            self._min_my, self._max_my = lo, hi

    # -- width state ----------------------------------------------------

    def global_indices_int(self):
        return self.width is I32

    def global_indices_long_long(self):
        return self.width is I64

    def global_indices_is_type(self, int_type):
        """True if the map's GIDs are of ``int_type`` (np.int32 or np.int64)."""
        return self.width is not INVALID and self.width is GlobalIndexWidth.coerce(int_type)

    def global_indices_type_valid(self):
        return self.width is not INVALID

    def global_indices_type_match(self, other):
        return self.width is not INVALID and self.width is other.width

    def _check_valid(self):
        check_object_width(self.width)

    def _narrow(self, value, name):
        # narrow accessors refuse 64-bit maps unconditionally
        self._check_valid()
        if self.width is not I32:
            raise WidthError(f"{name}() called on a map with 64-bit global indices; use {name}64()")
        check_fits(I32, [value], name)
        return value

    # -- local facts ------------------------------------------------------

    @property
    def num_my_points(self):
        return self.num_my_elements * self.element_size

    @property
    def contiguous(self):
        return self.linear

    def __repr__(self):
        if self.width is INVALID:
            return "BlockMap(<invalid>)"
        return (f"BlockMap(width={self.width.bits}, rank={self.comm.rank}/{self.comm.size}, "
                f"num_global={self._num_global}, num_my={self.num_my_elements})")

    def my_gids_array(self):
        """Local GIDs at the map's own width (read-only)."""
        self._check_valid()
        if self._gids is None:
            start = self._rank_starts[self.comm.rank]
            gids = np.arange(start, start + self.num_my_elements, dtype=self.width.dtype)
            gids.setflags(write=False)
            self._gids = gids
        return self._gids

    # -- GID / LID translation ------------------------------------------

    def gid64(self, lid):
        """GID of local index ``lid``, or ``index_base - 1`` if ``lid`` is invalid."""
        self._check_valid()
        lid = int(lid)
        if not 0 <= lid < self.num_my_elements:
            return self._index_base - 1
        if self._gids is None:
            return int(self._rank_starts[self.comm.rank]) + lid
        return int(self._gids[lid])

    if config.HAVE_32BIT:
        def gid(self, lid):
            """Narrow GID of ``lid``.  Raises on 64-bit maps."""
            self._narrow(0, "gid")
            return self.gid64(lid)

    def lid(self, gid):
        """Local index of ``gid`` on this rank, or -1 if not owned here."""
        self._check_valid()
        g = index_scalar(gid, self.width, "lid", wide_ok=True)
        return int(self.lids([g])[0])

    def lids(self, gids):
        """Vectorized :meth:`lid`; returns an int32 array."""
        self._check_valid()
        q = index_array(gids, self.width, "lids", wide_ok=True)
        out = np.full(q.size, -1, dtype=np.int32)
        if self.num_my_elements == 0 or q.size == 0:
            return out
        if self._rank_starts is not None:
            start = int(self._rank_starts[self.comm.rank])
            off = q - start
            hit = (off >= 0) & (off < self.num_my_elements)
            out[hit] = off[hit]
            return out
        if self._sorted is None:
            order = np.argsort(self._gids, kind="stable")
            self._sorted = (self._gids[order].astype(np.int64), order.astype(np.int32))
        keys, order = self._sorted
        pos = np.searchsorted(keys, q)
        pos_c = np.minimum(pos, keys.size - 1)
        hit = keys[pos_c] == q
        out[hit] = order[pos_c[hit]]
        return out

    def my_gid(self, gid):
        """True iff ``gid`` is owned by the calling rank."""
        return self.lid(gid) >= 0

    def my_lid(self, lid):
        return 0 <= int(lid) < self.num_my_elements

    # -- element lists ----------------------------------------------------

    if config.HAVE_32BIT:
        def my_global_elements(self):
            """Local GIDs as an int32 array.  Raises on 64-bit maps."""
            self._narrow(0, "my_global_elements")
            return self.my_gids_array()

    if config.HAVE_64BIT:
        def my_global_elements64(self):
            """Local GIDs as an int64 array.  Raises on 32-bit maps."""
            self._check_valid()
            if self.width is not I64:
                raise WidthError("my_global_elements64() called on a map with 32-bit global indices")
            return self.my_gids_array()

    def my_global_elements_views(self):
        """``(narrow, wide)``: exactly one is the local GID array, the other None."""
        self._check_valid()
        gids = self.my_gids_array()
        return (gids, None) if self.width is I32 else (None, gids)

    def copy_my_global_elements(self, out):
        """Copy local GIDs into ``out`` (int32 or int64 array); returns the count.

        A 64-bit buffer accepts either map width; a 32-bit buffer only a
        32-bit map.
        """
        self._check_valid()
        if not isinstance(out, np.ndarray):
            raise ContractError("copy_my_global_elements needs a NumPy output buffer")
        bw = typed_width(out)
        require_built(bw, "copy_my_global_elements")
        if bw is I32 and self.width is I64:
            raise WidthError("32-bit buffer for a map with 64-bit global indices")
        n = self.num_my_elements
        if out.size < n:
            raise CapacityError(n, out.size)
        out[:n] = self.my_gids_array()
        return n

    # -- global aggregates ------------------------------------------------

    def min_all_gid64(self):
        self._check_valid()
        return self._min_all

    def max_all_gid64(self):
        self._check_valid()
        return self._max_all

    def min_my_gid64(self):
        self._check_valid()
        return self._min_my

    def max_my_gid64(self):
        self._check_valid()
        return self._max_my

    def num_global_elements64(self):
        self._check_valid()
        return self._num_global

    def index_base64(self):
        self._check_valid()
        return self._index_base

    def num_global_points64(self):
        self._check_valid()
        return self._num_global * self.element_size

    if config.HAVE_32BIT:
        def min_all_gid(self):
            return self._narrow(self._min_all, "min_all_gid")

        def max_all_gid(self):
            return self._narrow(self._max_all, "max_all_gid")

        def min_my_gid(self):
            return self._narrow(self._min_my, "min_my_gid")

        def max_my_gid(self):
            return self._narrow(self._max_my, "max_my_gid")

        def num_global_elements(self):
            return self._narrow(self._num_global, "num_global_elements")

        def index_base(self):
            return self._narrow(self._index_base, "index_base")

        def num_global_points(self):
            return self._narrow(self.num_global_points64(), "num_global_points")

    def global_aggregates(self):
        """All wide aggregates as a dict."""
        return {
            "min_all_gid64": self.min_all_gid64(),
            "max_all_gid64": self.max_all_gid64(),
            "min_my_gid64": self.min_my_gid64(),
            "max_my_gid64": self.max_my_gid64(),
            "num_global_elements64": self.num_global_elements64(),
            "index_base64": self.index_base64(),
            "num_global_points64": self.num_global_points64(),
        }

    # -- comparison and directory ------------------------------------------

    def same_as(self, other):
        """Collective.  Same width, element size and GID layout on every rank."""
        if self is other:
            return True
        local = (
            self.width is other.width and self.width is not INVALID
            and self.element_size == other.element_size
            and self._num_global == other._num_global
            and self.num_my_elements == other.num_my_elements
            and self._index_base == other._index_base
            and np.array_equal(self.my_gids_array(), other.my_gids_array())
        )
        comm = self.comm if self.comm is not None else other.comm
        if comm is None:
            return local
        return bool(comm.min_all([int(local)])[0])

    def directory(self):
        """The owner directory for this map, built on first use (collective unless linear)."""
        self._check_valid()
        if self._directory is None:
            from .distribution import Directory
            self._directory = Directory(self)
        return self._directory

    def remote_id_list(self, gids, high_rank_sharing=False):
        """``(procs, lids)`` for arbitrary GIDs; -1 where unowned."""
        procs, lids, _ = self.directory().get_directory_entries(
            gids, True, False, high_rank_sharing)
        return procs, lids


# Point maps: element size fixed at 1.
Map = BlockMap
