"""Sorting with companion arrays, and mode-independent GID access."""
import numpy as np

from . import config
from .errors import ContractError, WidthStateError

_KEY_TYPES = (np.dtype(np.int32), np.dtype(np.int64))


def _check_companions(arrays, dtype, label, n):
    arrays = list(arrays or ())
    for k, arr in enumerate(arrays):
        if not isinstance(arr, np.ndarray) or arr.dtype != dtype:
            got = getattr(arr, "dtype", type(arr).__name__)
            raise ContractError(f"{label} companion {k} must be a {dtype} array, got {got}")
        if arr.shape != (n,):
            raise ContractError(f"{label} companion {k} has shape {arr.shape}, keys have {n}")
    return arrays


def sort_with_companions(ascending, keys, double_companions=(), int_companions=(),
                         long_long_companions=()):
    """Sort ``keys`` in place and apply the same permutation to every companion.

    ``keys`` is an int32 or int64 array.  Companions are float64, int32 and
    int64 arrays of the same length.  The order of equal keys (and so of
    their companions) is unspecified.
    """
    if not isinstance(keys, np.ndarray) or keys.dtype not in _KEY_TYPES or keys.ndim != 1:
        raise ContractError("keys must be a 1-D int32 or int64 array")
    n = keys.size
    groups = (
        _check_companions(double_companions, np.dtype(np.float64), "double", n),
        _check_companions(int_companions, np.dtype(np.int32), "int", n),
        _check_companions(long_long_companions, np.dtype(np.int64), "long long", n),
    )
    perm = np.argsort(keys, kind="quicksort")
    if not ascending:
        perm = perm[::-1]
    keys[:] = keys[perm]
    for group in groups:
        for arr in group:
            arr[:] = arr[perm]


def my_gids_any_mode(block_map):
    """Local GIDs as a list of Python ints, for a map of either width.

    Written the way mode-independent client code should be: each width's
    accessor is touched only when that width is built, so this runs
    unchanged in the dual, 32-only and 64-only builds.
    """
    if config.HAVE_32BIT and block_map.global_indices_int():
        gids = block_map.my_global_elements()
    elif config.HAVE_64BIT and block_map.global_indices_long_long():
        gids = block_map.my_global_elements64()
    else:
        raise WidthStateError("my_gids_any_mode: global index type unknown")
    return [int(g) for g in gids]
