"""Map-distributed dense float64 vectors and multivectors."""
import enum

import numpy as np

from . import config
from .errors import ContractError, WidthMixError, WidthStateError
from .width import check_object_width, index_array


class CombineMode(enum.Enum):
    REPLACE = "replace"
    SUM_INTO = "sum_into"


class Status(enum.IntEnum):
    OK = 0
    NOT_OWNED = 1


def check_maps_match(a, b, what):
    """Raise unless two maps have the same valid global index width."""
    if not a.global_indices_type_valid() or not b.global_indices_type_valid():
        raise WidthStateError(f"{what}: map with invalid global index width")
    if not a.global_indices_type_match(b):
        raise WidthMixError(
            f"{what}: cannot combine {a.width.bits}-bit and {b.width.bits}-bit global indices")


class MultiVector:
    """``num_vectors`` columns of float64 over the local points of a map.

    Local storage is ``values[point, column]``.
    """

    def __init__(self, block_map, num_vectors=1, zero_out=True):
        check_object_width(block_map.width)
        if num_vectors < 1:
            raise ContractError(f"need at least one vector, got {num_vectors}")
        self.map = block_map
        self.num_vectors = int(num_vectors)
        shape = (block_map.num_my_points, self.num_vectors)
        self.values = np.zeros(shape) if zero_out else np.empty(shape)

    @classmethod
    def from_local(cls, block_map, local_values):
        arr = np.asarray(local_values, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr[:, None]
        mv = cls(block_map, arr.shape[1], zero_out=False)
        if arr.shape[0] != mv.values.shape[0]:
            raise ContractError(f"{arr.shape[0]} local rows for a map with {mv.values.shape[0]} points")
        mv.values[:] = arr
        return mv

    def __repr__(self):
        return f"{type(self).__name__}(local={self.my_length}, num_vectors={self.num_vectors})"

    @property
    def my_length(self):
        return self.values.shape[0]

    @property
    def comm(self):
        return self.map.comm

    def global_length64(self):
        return self.map.num_global_points64()

    if config.HAVE_32BIT:
        def global_length(self):
            return self.map._narrow(self.map.num_global_points64(), "global_length")

    def column(self, j):
        return self.values[:, j]

    def copy(self):
        out = type(self).__new__(type(self))
        out.map = self.map
        out.num_vectors = self.num_vectors
        out.values = self.values.copy()
        return out

    # -- global-index modification ------------------------------------------

    def modify_global_value(self, gid, block_offset, vector_index, value, mode):
        """Replace or accumulate one entry addressed by GID.

        Returns :attr:`Status.NOT_OWNED` (and changes nothing) if ``gid`` is
        not owned by this rank.
        """
        mode = CombineMode(mode)
        if not 0 <= vector_index < self.num_vectors:
            raise ContractError(f"vector index {vector_index} outside [0, {self.num_vectors})")
        if not 0 <= block_offset < self.map.element_size:
            raise ContractError(f"block offset {block_offset} outside [0, {self.map.element_size})")
        lid = self.map.lid(gid)
        if lid < 0:
            return Status.NOT_OWNED
        row = lid * self.map.element_size + block_offset
        if mode is CombineMode.REPLACE:
            self.values[row, vector_index] = value
        else:
            self.values[row, vector_index] += value
        return Status.OK

    def replace_global_value(self, gid, vector_index, value, block_offset=0):
        return self.modify_global_value(gid, block_offset, vector_index, value, CombineMode.REPLACE)

    def sum_into_global_value(self, gid, vector_index, value, block_offset=0):
        return self.modify_global_value(gid, block_offset, vector_index, value, CombineMode.SUM_INTO)

    def replace_local_value(self, lid, vector_index, value, block_offset=0):
        self.values[lid * self.map.element_size + block_offset, vector_index] = value

    # -- dense operations ----------------------------------------------------

    def _check_partner(self, other, what):
        check_maps_match(self.map, other.map, what)
        if other.values.shape != self.values.shape:
            raise ContractError(
                f"{what}: local shapes differ ({self.values.shape} vs {other.values.shape})")

    def put_scalar(self, s):
        self.values[:] = s

    def set_random(self, seed=0):
        """Uniform values in [-1, 1); stream depends on ``seed`` and the rank."""
        rng = np.random.default_rng([int(seed), self.map.comm.rank])
        self.values[:] = rng.uniform(-1.0, 1.0, size=self.values.shape)

    def scale(self, alpha):
        self.values *= alpha

    def update(self, alpha, x, beta):
        """``self <- alpha * x + beta * self``."""
        self._check_partner(x, "update")
        if beta == 0.0:
            self.values[:] = alpha * x.values
        else:
            self.values[:] = alpha * x.values + beta * self.values

    def dot(self, other):
        """Collective.  Per-column dot products, identical on every rank."""
        self._check_partner(other, "dot")
        local = np.sum(self.values * other.values, axis=0)
        return self.map.comm.sum_all(local)

    def norm2(self):
        """Collective.  Per-column 2-norms."""
        local = np.sum(self.values * self.values, axis=0)
        return np.sqrt(self.map.comm.sum_all(local))

    def norm_inf(self):
        local = np.max(np.abs(self.values), axis=0) if self.my_length else np.zeros(self.num_vectors)
        return self.map.comm.max_all(local)

    def gather_global(self):
        """Collective.  Full ``(global_points, num_vectors)`` array ordered by GID.

        Test/debug helper; only valid for one-to-one maps.
        """
        es = self.map.element_size
        gids = self.map.my_gids_array().astype(np.int64)
        parts = self.map.comm.all_gather_object((gids, self.values))
        all_gids = np.concatenate([p[0] for p in parts])
        all_vals = np.concatenate([p[1] for p in parts]).reshape(-1, es, self.num_vectors)
        order = np.argsort(all_gids, kind="stable")
        return all_vals[order].reshape(-1, self.num_vectors)


class Vector(MultiVector):
    """Single-column :class:`MultiVector`; indexing is by local point."""

    def __init__(self, block_map, zero_out=True):
        super().__init__(block_map, 1, zero_out)

    @classmethod
    def from_local(cls, block_map, local_values):
        v = cls(block_map, zero_out=False)
        arr = np.asarray(local_values, dtype=np.float64).reshape(-1)
        if arr.size != v.my_length:
            raise ContractError(f"{arr.size} local values for a map with {v.my_length} points")
        v.values[:, 0] = arr
        return v

    def __getitem__(self, i):
        return self.values[i, 0]

    def __setitem__(self, i, value):
        self.values[i, 0] = value

    def local(self):
        return self.values[:, 0]

    def modify_global_values(self, gids, values, mode, block_offsets=None):
        """Batch replace/accumulate by GID; returns the number of unowned GIDs skipped."""
        mode = CombineMode(mode)
        g = index_array(gids, self.map.width, "modify_global_values", wide_ok=True)
        vals = np.asarray(values, dtype=np.float64).reshape(-1)
        if vals.size != g.size:
            raise ContractError(f"{g.size} GIDs but {vals.size} values")
        offs = np.zeros(g.size, dtype=np.int64) if block_offsets is None else np.asarray(block_offsets)
        lids = self.map.lids(g)
        missing = 0
        for lid, off, v in zip(lids, offs, vals):
            if lid < 0:
                missing += 1
                continue
            row = lid * self.map.element_size + off
            if mode is CombineMode.REPLACE:
                self.values[row, 0] = v
            else:
                self.values[row, 0] += v
        return missing

    def replace_global_values(self, gids, values, block_offsets=None):
        return self.modify_global_values(gids, values, CombineMode.REPLACE, block_offsets)

    def sum_into_global_values(self, gids, values, block_offsets=None):
        return self.modify_global_values(gids, values, CombineMode.SUM_INTO, block_offsets)

    # batch replace/sum-into share one entry point
    change_values = modify_global_values
