"""Width-specific dense integer containers.

``IntVector``/``LongLongVector`` hold one integer per local element of a map;
``IntSerialDenseVector``/``LongLongSerialDenseVector`` are rank-local,
resizable arrays.  ``GIDTypeVector[int_type]`` and
``GIDTypeSerialDenseVector[int_type]`` pick the family member for a width so
width-generic code can be written once::

    vec_cls = GIDTypeVector[np.int64]      # LongLongVector
"""
import numpy as np

from . import config
from .errors import ContractError
from .width import I32, I64, GlobalIndexWidth, check_fits, check_object_width, require_built


def _checked(values, width):
    arr = np.asarray(values)
    if arr.size and arr.dtype.kind not in "iu":
        raise ContractError(f"integer container got {arr.dtype} data")
    check_fits(width, arr, f"{width.bits}-bit container value")
    return arr.astype(width.dtype, copy=False)


class _MapIndexVector:
    width = None

    def __init__(self, block_map, values=None):
        check_object_width(block_map.width)
        self.map = block_map
        n = block_map.num_my_elements
        if values is None:
            self._values = np.zeros(n, dtype=self.width.dtype)
        else:
            arr = _checked(values, self.width).reshape(-1)
            if arr.size != n:
                raise ContractError(f"{arr.size} values for a map with {n} local elements")
            self._values = arr.copy()

    def __len__(self):
        return self._values.size

    @property
    def my_length(self):
        return self._values.size

    def global_length64(self):
        return self.map.num_global_elements64()

    def __getitem__(self, lid):
        return self._values[lid]

    def __setitem__(self, lid, value):
        self._values[lid] = _checked(value, self.width)

    def put_value(self, value):
        self._values[:] = _checked(value, self.width)

    def extract_copy(self):
        return self._values.copy()

    def values(self):
        """Read-only view of the local values."""
        view = self._values.view()
        view.setflags(write=False)
        return view

    def __repr__(self):
        return f"{type(self).__name__}({self._values.tolist()})"


class _SerialDenseIndexVector:
    width = None

    def __init__(self, length=0, values=None):
        if values is not None:
            self._values = _checked(values, self.width).reshape(-1).copy()
        else:
            if length < 0:
                raise ContractError(f"negative length {length}")
            self._values = np.zeros(length, dtype=self.width.dtype)

    def __len__(self):
        return self._values.size

    def length(self):
        return self._values.size

    def size(self, length):
        """Set the length, zero-filling (does not keep old values)."""
        self._values = np.zeros(length, dtype=self.width.dtype)

    def resize(self, length):
        """Set the length, keeping the existing prefix and zero-filling the rest."""
        if length < 0:
            raise ContractError(f"negative length {length}")
        new = np.zeros(length, dtype=self.width.dtype)
        keep = min(length, self._values.size)
        new[:keep] = self._values[:keep]
        self._values = new

    def __getitem__(self, i):
        return self._values[i]

    def __setitem__(self, i, value):
        self._values[i] = _checked(value, self.width)

    def values(self):
        return self._values

    def __repr__(self):
        return f"{type(self).__name__}({self._values.tolist()})"


class IntVector(_MapIndexVector):
    width = I32


class IntSerialDenseVector(_SerialDenseIndexVector):
    width = I32


if config.HAVE_64BIT:
    class LongLongVector(_MapIndexVector):
        width = I64

    class LongLongSerialDenseVector(_SerialDenseIndexVector):
        width = I64


class _WidthSelector:
    _names = {}

    def __class_getitem__(cls, int_type):
        width = require_built(GlobalIndexWidth.coerce(int_type), cls.__name__)
        return globals()[cls._names[width]]


class GIDTypeVector(_WidthSelector):
    _names = {I32: "IntVector", I64: "LongLongVector"}


class GIDTypeSerialDenseVector(_WidthSelector):
    _names = {I32: "IntSerialDenseVector", I64: "LongLongSerialDenseVector"}
