"""Communicators: a serial one and an in-process simulated multi-rank one.

Every rank of a :class:`SimulatedComm` runs in its own thread and talks to the
others only through point-to-point messages carried by a shared
:class:`_Fabric`.  Collectives are built on top of those messages: each rank
sends its contribution to every other rank and then combines the
contributions locally in rank order, so every rank computes a bitwise
identical result.

Use :func:`run_ranks` to execute the same program on ``R`` ranks::

    def program(comm):
        return comm.reduce_all([comm.rank], Op.SUM)

    run_ranks(4, program)   # -> [array([6]), array([6]), array([6]), array([6])]
"""
import collections
import enum
import queue
import threading
import time

import numpy as np

from .errors import ContractError, RankAborted, UsageError, WidthRangeError
from .width import INT32_MAX, INT32_MIN

_ALLOWED = (np.dtype(np.int32), np.dtype(np.int64), np.dtype(np.float64))


class Op(enum.Enum):
    SUM = "sum"
    MAX = "max"
    MIN = "min"


class CommKind(enum.Enum):
    SERIAL = "serial"
    SIMULATED = "simulated"


def _as_payload(values):
    arr = np.array(values, copy=True).reshape(-1)
    if arr.size == 0 and arr.dtype == np.float64 and not isinstance(values, np.ndarray):
        arr = arr.astype(np.int64)
    if arr.dtype not in _ALLOWED:
        if arr.dtype.kind in "iu":
            arr = arr.astype(np.int64)
        else:
            raise ContractError(f"collectives take int32, int64 or float64 data, got {arr.dtype}")
    return arr


class Comm:
    """Base communicator.

    Subclasses provide ``_post(dest, message)`` and ``_take(source)``; all
    collectives are written once here in terms of those two.
    """

    kind = None

    def __init__(self, rank, size):
        if size < 1 or not 0 <= rank < size:
            raise ContractError(f"invalid rank {rank} for communicator of size {size}")
        self.rank = rank
        self.size = size
        self.messages_sent = 0
        self._seq = 0

    def __repr__(self):
        return f"{type(self).__name__}(rank={self.rank}, size={self.size})"

    # -- point to point -------------------------------------------------

    def _next_tag(self, name):
        self._seq += 1
        return (name, self._seq)

    def send(self, dest, obj, tag):
        self._check_rank(dest, "destination")
        self.messages_sent += 1
        self._post(dest, (tag, obj))

    def recv(self, source, tag):
        self._check_rank(source, "source")
        got_tag, obj = self._take(source)
        if got_tag != tag:
            raise ContractError(
                f"rank {self.rank} expected message {tag} from rank {source} but got "
                f"{got_tag}; ranks are not calling collectives in the same order"
            )
        return obj

    def _check_rank(self, r, what):
        if not (isinstance(r, (int, np.integer)) and 0 <= r < self.size):
            raise UsageError(f"{what} rank {r!r} outside [0, {self.size})")

    # -- object collectives (plumbing) ----------------------------------

    def all_gather_object(self, obj):
        """Every rank receives the list of all ranks' objects, in rank order."""
        tag = self._next_tag("allgather")
        for dest in range(self.size):
            if dest != self.rank:
                self.send(dest, _copy(obj), tag)
        out = []
        for src in range(self.size):
            out.append(obj if src == self.rank else self.recv(src, tag))
        return out

    def broadcast_object(self, obj, root=0):
        self._check_rank(root, "root")
        tag = self._next_tag("bcast")
        if self.rank == root:
            for dest in range(self.size):
                if dest != root:
                    self.send(dest, _copy(obj), tag)
            return obj
        return self.recv(root, tag)

    def barrier(self):
        self.all_gather_object(None)

    # -- array collectives ----------------------------------------------

    def broadcast(self, values, root=0):
        """Return root's array on every rank."""
        self._check_rank(root, "root")
        arr = _as_payload(values)
        return self.broadcast_object(arr if self.rank == root else None, root)

    def _gather_equal(self, values, what):
        arr = _as_payload(values)
        parts = self.all_gather_object(arr)
        shapes = {(p.size, p.dtype.str) for p in parts}
        if len(shapes) != 1:
            detail = ", ".join(f"rank {r}: {p.size} x {p.dtype}" for r, p in enumerate(parts))
            raise ContractError(f"{what} needs equal counts and types on all ranks ({detail})")
        return parts

    def gather_all(self, local):
        """Concatenation of every rank's (equal-length) array, in rank order."""
        parts = self._gather_equal(local, "gather_all")
        return np.concatenate(parts)

    def reduce_all(self, values, op=Op.SUM):
        parts = self._gather_equal(values, "reduce_all")
        return _combine(parts, Op(op))

    def sum_all(self, values):
        return self.reduce_all(values, Op.SUM)

    def max_all(self, values):
        return self.reduce_all(values, Op.MAX)

    def min_all(self, values):
        return self.reduce_all(values, Op.MIN)

    def scan_sum(self, values):
        """Inclusive prefix sum over ranks ``0..rank``."""
        parts = self._gather_equal(values, "scan_sum")
        return _combine(parts[: self.rank + 1], Op.SUM)


def _copy(obj):
    # ranks never share mutable arrays
    if isinstance(obj, np.ndarray):
        return obj.copy()
    if isinstance(obj, (list, tuple)):
        return type(obj)(_copy(o) for o in obj)
    if isinstance(obj, (bytes, bytearray)):
        return bytes(obj)
    return obj


def _combine(parts, op):
    dtype = parts[0].dtype
    if dtype == np.int32:
        acc = parts[0].astype(np.int64)
    else:
        acc = parts[0].copy()
    for p in parts[1:]:
        p = p.astype(acc.dtype, copy=False)
        if op is Op.SUM:
            acc = acc + p
        elif op is Op.MAX:
            acc = np.maximum(acc, p)
        else:
            acc = np.minimum(acc, p)
    if dtype == np.int32:
        if acc.size and (acc.min() < INT32_MIN or acc.max() > INT32_MAX):
            raise WidthRangeError("32-bit reduction result overflows; use int64 data")
        acc = acc.astype(np.int32)
    return acc


class SerialComm(Comm):
    kind = CommKind.SERIAL

    def __init__(self):
        super().__init__(0, 1)
        self._inbox = collections.deque()

    def _post(self, dest, message):
        self._inbox.append(message)

    def _take(self, source):
        if not self._inbox:
            raise ContractError("serial receive with no pending message")
        return self._inbox.popleft()


class _Fabric:
    """Message queues for one group of simulated ranks."""

    def __init__(self, size, timeout):
        self.size = size
        self.timeout = timeout
        self.queues = {(s, d): queue.SimpleQueue() for s in range(size) for d in range(size)}
        self.aborted = threading.Event()


class SimulatedComm(Comm):
    kind = CommKind.SIMULATED

    def __init__(self, rank, fabric):
        super().__init__(rank, fabric.size)
        self._fabric = fabric

    def _post(self, dest, message):
        self._fabric.queues[(self.rank, dest)].put(message)

    def _take(self, source):
        q = self._fabric.queues[(source, self.rank)]
        deadline = time.monotonic() + self._fabric.timeout
        while True:
            if self._fabric.aborted.is_set():
                raise RankAborted(f"rank {self.rank}: another rank failed")
            try:
                return q.get(timeout=0.02)
            except queue.Empty:
                if time.monotonic() > deadline:
                    self._fabric.aborted.set()
                    raise RankAborted(
                        f"rank {self.rank}: no message from rank {source} within "
                        f"{self._fabric.timeout} s (deadlock?)"
                    ) from None


def run_ranks(nranks, program, *args, kind=None, timeout=120.0, **kwargs):
    """Run ``program(comm, *args, **kwargs)`` once per rank and join.

    Returns the list of per-rank return values.  With ``nranks == 1`` and no
    explicit ``kind`` the program runs inline on a :class:`SerialComm`.  If
    any rank raises, the remaining ranks are aborted and the exception from
    the lowest failing rank is re-raised.
    """
    if nranks < 1:
        raise UsageError(f"need at least one rank, got {nranks}")
    kind = CommKind(kind) if kind is not None else None
    if kind is CommKind.SERIAL and nranks != 1:
        raise UsageError("a serial communicator has exactly one rank")
    if nranks == 1 and kind is not CommKind.SIMULATED:
        return [program(SerialComm(), *args, **kwargs)]

    fabric = _Fabric(nranks, timeout)
    results = [None] * nranks
    errors = [None] * nranks

    def body(r):
        try:
            results[r] = program(SimulatedComm(r, fabric), *args, **kwargs)
        except BaseException as exc:  # noqa: BLE001 - re-raised in the caller
            errors[r] = exc
            fabric.aborted.set()

    threads = [
        threading.Thread(target=body, args=(r,), name=f"rank-{r}", daemon=True)
        for r in range(nranks)
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()

    primary = [e for e in errors if e is not None and not isinstance(e, RankAborted)]
    if primary:
        raise primary[0]
    aborted = [e for e in errors if e is not None]
    if aborted:
        raise aborted[0]
    return results
