"""Communication plans (gather/scatter schedules) and the owner directory.

A :class:`CommPlan` is built collectively from either side of an exchange:

* :func:`create_from_sends` -- each rank knows where its items go;
* :func:`create_from_recvs` -- each rank knows which global indices it wants
  and who owns them; owners learn what was asked of them.

Plans route opaque fixed-size byte items, forward or in reverse.  Within a
message items keep the order they had in the sender's buffer, and a receiver
always lays out incoming items by ascending source rank, so results do not
depend on message timing.
"""
import enum

import numpy as np

from .errors import ContractError
from .partition import uniform_owner
from .width import check_object_width, index_array


class Direction(enum.Enum):
    FORWARD = "forward"
    REVERSE = "reverse"


class CommPlan:
    """Reusable routing schedule between the ranks of one communicator.

    ``export_procs`` lists the destination of every export item in plan
    (send) order; ``import_procs`` the source of every import item in
    receive-buffer order.
    """

    def __init__(self, comm, send_groups, recv_groups, export_procs, import_procs,
                 deterministic):
        self.comm = comm
        self.deterministic = deterministic
        self.export_procs = np.asarray(export_procs, dtype=np.int32)
        self.import_procs = np.asarray(import_procs, dtype=np.int32)
        # [(rank, item indices into the local buffer)], one entry per peer
        self._send_groups = send_groups
        self._recv_groups = recv_groups

    @property
    def export_count(self):
        return int(self.export_procs.size)

    @property
    def import_count(self):
        return int(self.import_procs.size)

    def __repr__(self):
        return (f"CommPlan(rank={self.comm.rank}, exports={self.export_count}, "
                f"imports={self.import_count})")

    def reversed(self):
        """Plan whose forward direction is this plan's reverse."""
        return CommPlan(self.comm, self._recv_groups, self._send_groups,
                        _procs_in_order(self._recv_groups, self.import_count),
                        _procs_in_order(self._send_groups, self.export_count),
                        self.deterministic)

    def execute(self, direction, item_bytes, send_buffer):
        """Route ``send_buffer`` (``count * item_bytes`` bytes) and return the received bytes."""
        direction = Direction(direction)
        if direction is Direction.FORWARD:
            out_groups, in_groups = self._send_groups, self._recv_groups
            n_out, n_in = self.export_count, self.import_count
        else:
            out_groups, in_groups = self._recv_groups, self._send_groups
            n_out, n_in = self.import_count, self.export_count
        if item_bytes < 0:
            raise ContractError(f"negative item size {item_bytes}")
        buf = bytes(send_buffer)
        if len(buf) != n_out * item_bytes:
            raise ContractError(
                f"send buffer has {len(buf)} bytes, plan expects {n_out} items x "
                f"{item_bytes} bytes = {n_out * item_bytes}"
            )
        items = np.frombuffer(buf, dtype=np.uint8).reshape(n_out, item_bytes)
        result = np.empty((n_in, item_bytes), dtype=np.uint8)

        comm = self.comm
        tag = comm._next_tag("plan")
        local = None
        for dest, idx in out_groups:
            chunk = items[idx]
            if dest == comm.rank:
                local = chunk
            else:
                comm.send(dest, chunk.tobytes(), tag)
        for src, idx in in_groups:
            if src == comm.rank:
                chunk = local
            else:
                chunk = np.frombuffer(comm.recv(src, tag), dtype=np.uint8)
                chunk = chunk.reshape(len(idx), item_bytes)
            result[idx] = chunk
        return result.tobytes()

    def do(self, array, reverse=False):
        """Route a NumPy array whose first axis indexes items."""
        arr = np.ascontiguousarray(array)
        if arr.ndim == 0:
            raise ContractError("plan payload must have an item axis")
        tail = arr.shape[1:]
        item_bytes = arr.dtype.itemsize * int(np.prod(tail, dtype=np.int64))
        direction = Direction.REVERSE if reverse else Direction.FORWARD
        out = self.execute(direction, item_bytes, arr.tobytes())
        n = self.export_count if reverse else self.import_count
        return np.frombuffer(out, dtype=arr.dtype).reshape((n,) + tail).copy()


def _procs_in_order(groups, count):
    procs = np.empty(count, dtype=np.int32)
    for rank, idx in groups:
        procs[idx] = rank
    return procs


def _exchange_counts(comm, counts, error):
    """All-gather per-destination counts; every rank raises if any rank failed."""
    rows = comm.all_gather_object(None if error else counts)
    if error:
        raise ContractError(error)
    bad = [r for r, row in enumerate(rows) if row is None]
    if bad:
        raise ContractError(f"plan construction failed on rank(s) {bad}")
    return np.array([row[comm.rank] for row in rows], dtype=np.int64)


def create_from_sends(comm, export_procs, deterministic=True):
    """Collective.  Build a plan from each item's destination rank.

    Returns ``(plan, import_count)``.  With ``deterministic`` the plan's send
    order groups items by ascending destination (stable within a group);
    otherwise groups follow each destination's first appearance.
    """
    procs = np.asarray(export_procs).reshape(-1)
    error = None
    if procs.size and (procs.dtype.kind not in "iu" or procs.min() < 0 or procs.max() >= comm.size):
        error = f"rank {comm.rank}: export destination outside [0, {comm.size})"
        counts = None
    else:
        procs = procs.astype(np.int64)
        counts = np.bincount(procs, minlength=comm.size)
    recv_counts = _exchange_counts(comm, counts, error)

    if deterministic:
        dests = np.flatnonzero(counts)
    else:
        _, first = np.unique(procs, return_index=True)
        dests = procs[np.sort(first)]
    send_groups = [(int(d), np.flatnonzero(procs == d)) for d in dests]
    plan_order = np.concatenate([idx for _, idx in send_groups]) if send_groups else np.empty(0, np.int64)

    recv_groups = []
    offset = 0
    for src in range(comm.size):
        n = int(recv_counts[src])
        if n:
            recv_groups.append((src, np.arange(offset, offset + n)))
            offset += n
    import_procs = np.repeat(np.arange(comm.size), recv_counts)
    plan = CommPlan(comm, send_groups, recv_groups, procs[plan_order], import_procs,
                    deterministic)
    return plan, plan.import_count


def create_from_recvs(comm, remote_gids, remote_procs, deterministic=True):
    """Collective.  Build a plan from the requester side.

    ``remote_procs[i]`` owns ``remote_gids[i]``.  Returns
    ``(plan, export_gids, export_procs)``: the GIDs other ranks requested from
    this rank and who asked for each.  The plan's forward direction sends one
    item per ``export_gids`` entry from owner to requester, arriving in the
    requester's original ``remote_gids`` order.
    """
    gids = np.asarray(remote_gids).reshape(-1)
    procs = np.asarray(remote_procs).reshape(-1)
    if gids.size != procs.size:
        # still take part in the collective so other ranks do not hang
        _exchange_counts(comm, None, f"rank {comm.rank}: {gids.size} remote GIDs "
                                      f"but {procs.size} remote ranks")
    gids = gids.astype(np.int64, copy=False)
    request, _ = create_from_sends(comm, procs, deterministic)
    export_gids = request.do(gids)
    plan = request.reversed()
    return plan, export_gids, plan.export_procs.copy()


def execute_plan(plan, direction, item_bytes, send_buffer):
    return plan.execute(direction, item_bytes, send_buffer)


class Directory:
    """Answers "which rank owns GID g, at which local index" for one map.

    Linear maps answer arithmetically without communication.  Other maps
    register every ``(gid, rank, lid)`` with the owner of that GID's slot in
    an even division of ``[min_all_gid, max_all_gid]`` over the ranks; lookups
    then take one request/reply round trip.
    """

    def __init__(self, block_map):
        check_object_width(block_map.width)
        self.map = block_map
        self.comm = block_map.comm
        self._lo = block_map.min_all_gid64()
        self._span = block_map.max_all_gid64() - self._lo + 1 if block_map.num_global_elements64() else 0
        if block_map.linear:
            return
        comm = self.comm
        gids = block_map.my_gids_array().astype(np.int64)
        owners = self._slot_owner(gids)
        plan, _ = create_from_sends(comm, owners)
        records = np.column_stack([gids, np.arange(gids.size, dtype=np.int64)])
        got = plan.do(records)
        procs = plan.import_procs.astype(np.int64)
        order = np.lexsort((procs, got[:, 0]))
        self._reg_gids = got[order, 0]
        self._reg_procs = procs[order]
        self._reg_lids = got[order, 1]

    def _slot_owner(self, gids):
        return uniform_owner(gids - self._lo, self._span, self.comm.size).astype(np.int64)

    def get_directory_entries(self, gids, want_lids=True, want_sizes=False,
                              high_rank_sharing=False):
        """Owner rank, owner-local index and element size for each GID.

        Unowned GIDs get ``-1`` in every output.  For a GID owned by several
        ranks the lowest rank wins, or the highest with ``high_rank_sharing``.
        Collective unless the map is linear.  Unrequested outputs are None.
        """
        bm = self.map
        q = index_array(gids, bm.width, "directory query", wide_ok=True)
        procs = np.full(q.size, -1, dtype=np.int32)
        lids = np.full(q.size, -1, dtype=np.int32)
        in_range = (q >= self._lo) & (q < self._lo + self._span)

        if bm.linear:
            starts = bm._rank_starts
            sel = np.flatnonzero(in_range)
            owner = np.searchsorted(starts, q[sel], side="right") - 1
            procs[sel] = owner
            lids[sel] = q[sel] - starts[owner]
        else:
            sel = np.flatnonzero(in_range)
            owners = self._slot_owner(q[sel])
            plan, asked, _ = create_from_recvs(self.comm, q[sel], owners)
            answers = np.array([self._lookup(g, high_rank_sharing) for g in asked],
                               dtype=np.int64).reshape(-1, 2)
            reply = plan.do(answers)
            procs[sel] = reply[:, 0]
            lids[sel] = reply[:, 1]

        sizes = None
        if want_sizes:
            sizes = np.where(procs >= 0, bm.element_size, -1).astype(np.int32)
        return procs, (lids if want_lids else None), sizes

    def _lookup(self, gid, high_rank_sharing):
        lo = np.searchsorted(self._reg_gids, gid, side="left")
        hi = np.searchsorted(self._reg_gids, gid, side="right")
        if lo == hi:
            return (-1, -1)
        k = hi - 1 if high_rank_sharing else lo
        return (self._reg_procs[k], self._reg_lids[k])


def get_directory_entries(block_map, gids, want_lids=True, want_sizes=False,
                          high_rank_sharing=False):
    """Module-level form of :meth:`Directory.get_directory_entries` using the map's cached directory."""
    return block_map.directory().get_directory_entries(
        gids, want_lids, want_sizes, high_rank_sharing)
