"""Global index width state and the dtype rules for index arguments.

Index arguments follow one rule throughout the library.  Plain Python ints and
lists are *untyped* and are converted to the width of the object they are
applied to (with a range check).  NumPy arrays and scalars are *typed*: an
``int32`` argument is a narrow call and an ``int64`` argument is a wide call,
and each must be legal for the object's width.  Any other integer dtype is
rejected as ambiguous rather than silently converted.
"""
import enum
import numbers

import numpy as np

from . import config
from .errors import BuildModeError, WidthError, WidthRangeError, WidthStateError

INT32_MIN = -(2**31)
INT32_MAX = 2**31 - 1
INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1


class GlobalIndexWidth(enum.Enum):
    INVALID = 0
    I32 = 32
    I64 = 64

    @property
    def dtype(self):
        if self is GlobalIndexWidth.INVALID:
            raise WidthStateError("invalid global index width has no dtype")
        return np.dtype(np.int32) if self is GlobalIndexWidth.I32 else np.dtype(np.int64)

    @property
    def bits(self):
        return self.value

    @classmethod
    def coerce(cls, value):
        """Accept a width, 32/64, "32"/"64", or an int32/int64 dtype."""
        if isinstance(value, cls):
            return value
        if isinstance(value, str) and value.strip().lower() in ("32", "i32", "int"):
            return cls.I32
        if isinstance(value, str) and value.strip().lower() in ("64", "i64", "long long", "ll"):
            return cls.I64
        if isinstance(value, numbers.Integral) and not isinstance(value, bool):
            if value == 32:
                return cls.I32
            if value == 64:
                return cls.I64
        else:
            try:
                dt = np.dtype(value)
            except TypeError:
                dt = None
            if dt == np.int32:
                return cls.I32
            if dt == np.int64:
                return cls.I64
        raise ValueError(f"not a global index width: {value!r}")


I32 = GlobalIndexWidth.I32
I64 = GlobalIndexWidth.I64
INVALID = GlobalIndexWidth.INVALID


def is_built(width):
    width = GlobalIndexWidth.coerce(width)
    return (width is I32 and config.HAVE_32BIT) or (width is I64 and config.HAVE_64BIT)


def require_built(width, what="this operation"):
    width = GlobalIndexWidth.coerce(width)
    if not is_built(width):
        raise BuildModeError(
            f"{what}: {width.bits}-bit global indices are excluded from this "
            f"build (mode {config.build_mode()})"
        )
    return width


def fits(width, values):
    arr = np.asarray(values)
    if arr.size == 0 or width is I64:
        return True
    return bool(arr.min() >= INT32_MIN and arr.max() <= INT32_MAX)


def check_fits(width, values, what="value"):
    if not fits(width, values):
        raise WidthRangeError(f"{what} outside the signed 32-bit range of a 32-bit object")


def typed_width(value):
    """Width carried by a NumPy argument, or None for untyped Python values."""
    if isinstance(value, (np.ndarray, np.generic)):
        dt = value.dtype
        if dt == np.int32:
            return I32
        if dt == np.int64:
            return I64
        if dt.kind in "iub":
            raise WidthError(f"ambiguous global index type {dt}; pass int32 or int64")
        raise WidthError(f"global indices must be integers, got {dt}")
    return None


def check_object_width(width):
    if width is INVALID:
        raise WidthStateError("object has no valid global index width (default constructed?)")


def index_array(values, width, what="global indices", wide_ok=False):
    """Convert ``values`` to an index array for an object of ``width``.

    A narrow (int32) argument against a 64-bit object is always an error.  A
    wide (int64) argument against a 32-bit object is an error unless
    ``wide_ok`` (used by query entry points such as ``lid`` that accept wide
    indices for either width).  Untyped values are range-checked against the
    object's width; with ``wide_ok`` they are returned as int64 instead.
    """
    check_object_width(width)
    tw = typed_width(values)
    if tw is not None:
        # a matching typed argument implies its width is built; a wide query
        # against a narrow object only uses int64 as a carrier
        if tw is I32 and width is I64:
            raise WidthError(f"{what}: 32-bit indices passed to a 64-bit object")
        if tw is I64 and width is I32 and not wide_ok:
            raise WidthError(f"{what}: 64-bit indices passed to a 32-bit object")
    arr = _untyped_array(values, what)
    if wide_ok:
        return arr.astype(np.int64, copy=False)
    check_fits(width, arr, what)
    return arr.astype(width.dtype, copy=False)


def _untyped_array(values, what):
    try:
        arr = np.asarray(values).reshape(-1)
    except OverflowError as exc:
        raise WidthRangeError(f"{what}: {exc}") from None
    if arr.size == 0:
        return np.empty(0, dtype=np.int64)
    if arr.dtype.kind not in "iu":
        raise WidthError(f"{what}: global indices must be integers, got {arr.dtype}")
    if arr.dtype == np.uint64 and arr.max() > INT64_MAX:
        raise WidthRangeError(f"{what}: value exceeds the signed 64-bit range")
    return arr


def index_scalar(value, width, what="global index", wide_ok=False):
    return index_array(value, width, what, wide_ok)[0].item()
