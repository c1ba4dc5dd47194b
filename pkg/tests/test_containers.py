import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from widemap import BlockMap, GIDTypeSerialDenseVector, GIDTypeVector, SerialComm, config
from widemap.containers import IntSerialDenseVector, IntVector
from widemap.errors import ContractError, WidthRangeError
from widemap.util import sort_with_companions
from _helpers import LL_OFFSET, check_against_pair_oracle


@pytest.mark.width_agnostic
def test_sort_examples():
    keys, comp = np.array([3, 1, 2], dtype=np.int32), np.array([30, 10, 20], dtype=np.int32)
    sort_with_companions(True, keys, int_companions=[comp])
    assert keys.tolist() == [1, 2, 3] and comp.tolist() == [10, 20, 30]

    keys = np.array([2**32 + 1, 5], dtype=np.int64)
    sort_with_companions(True, keys)
    assert keys.tolist() == [5, 2**32 + 1]

    keys, comp = np.array([1, 2, 3], dtype=np.int32), np.array([1.0, 2.0, 3.0])
    sort_with_companions(False, keys, double_companions=[comp])
    assert keys.tolist() == [3, 2, 1] and comp.tolist() == [3.0, 2.0, 1.0]


@pytest.mark.width_agnostic
def test_sort_rejects_mismatched_companions():
    with pytest.raises(ContractError):
        sort_with_companions(True, np.arange(3, dtype=np.int32), double_companions=[np.zeros(2)])
    with pytest.raises(ContractError):
        sort_with_companions(True, np.arange(3, dtype=np.int32), int_companions=[np.zeros(3)])
    with pytest.raises(ContractError):
        sort_with_companions(True, np.arange(3, dtype=np.int16))


@pytest.mark.width_agnostic
@settings(max_examples=100, deadline=None)
@given(st.booleans(), st.sampled_from([np.int32, np.int64]), st.integers(0, 512), st.integers(0, 2**32))
def test_sort_matches_pair_oracle(ascending, dtype, n, seed):
    rng = np.random.default_rng(seed)
    info = np.iinfo(dtype)
    hi = int(rng.choice([4, 1000, info.max]))
    keys = rng.integers(max(info.min, -hi), hi, size=n, dtype=dtype)
    check_against_pair_oracle(ascending, keys, seed)


def test_int_vector_roundtrip():
    m = BlockMap.uniform(5, 0, SerialComm())
    v = GIDTypeVector[np.int32](m)
    assert v is not None and isinstance(v, IntVector)
    v.put_value(7)
    v[2] = 2**31 - 1
    assert v.extract_copy().tolist() == [7, 7, 2**31 - 1, 7, 7]
    assert len(v) == m.num_my_elements and v.global_length64() == 5
    with pytest.raises(WidthRangeError):
        v[0] = 2**31


def test_serial_dense_resize_preserves_prefix():
    v = GIDTypeSerialDenseVector[32](3)
    assert type(v) is IntSerialDenseVector
    v[:] = [1, 2, 3]
    v.resize(5)
    assert v.values()[:3].tolist() == [1, 2, 3] and len(v) == 5
    v.resize(2)
    assert v.values().tolist() == [1, 2]


def test_int_vector_roundtrip_LL():
    m = BlockMap.uniform(np.int64(4), LL_OFFSET, SerialComm())
    v = GIDTypeVector[np.int64](m)
    v.put_value(LL_OFFSET)
    v[3] = 2**62
    assert v.extract_copy().tolist() == [LL_OFFSET] * 3 + [2**62]
    assert v.extract_copy().dtype == np.int64


def test_serial_dense_resize_preserves_prefix_LL():
    v = GIDTypeSerialDenseVector["ll"](2)
    v[:] = [2**40, -2**40]
    v.resize(4)
    assert v.values()[:2].tolist() == [2**40, -2**40] and v.values().dtype == np.int64


@pytest.mark.width_agnostic
def test_selector_respects_build_mode():
    from widemap.errors import BuildModeError
    for bits, have in ((32, config.HAVE_32BIT), (64, config.HAVE_64BIT)):
        if have:
            assert GIDTypeVector[bits].width.bits == bits
        else:
            with pytest.raises(BuildModeError):
                GIDTypeVector[bits]
