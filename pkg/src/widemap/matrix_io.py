"""Coordinate-format matrix files: Matrix Market and raw triples.

Only ``%%MatrixMarket matrix coordinate real general`` is accepted for Matrix
Market input.  Raw-triples files are whitespace-separated ``i j v`` lines with
no header; their dimensions are the largest row and column indices seen.
Indices in files are 1-based in both formats.

Rank 0 does all file access; everything else reaches the other ranks through
the communicator.  A GID offset is a property of the maps built when reading,
never of the file, so one file serves both index widths.
"""
import numpy as np

from .block_map import BlockMap
from .crs_matrix import CrsMatrix
from .distribution import create_from_sends
from .errors import ContractError, LifecycleError, ParseError
from .width import GlobalIndexWidth, check_fits, require_built

MM_HEADER = "%%MatrixMarket matrix coordinate real general"
MATRIX_MARKET = "matrix_market"
TRIPLES = "triples"

_ENTRY = np.dtype([("i", "<i8"), ("j", "<i8"), ("v", "<f8")])


def _sniff(path):
    with open(path) as fh:
        for line in fh:
            if line.strip():
                return MATRIX_MARKET if line.lstrip().startswith("%") else TRIPLES
    return TRIPLES


def _entries(path, fmt):
    """Yield the header dict first, then ``(lineno, i, j, v)`` with 0-based indices."""
    fmt = fmt or _sniff(path)
    if fmt not in (MATRIX_MARKET, TRIPLES):
        raise ContractError(f"unknown coordinate format {fmt!r}")
    with open(path) as fh:
        lines = enumerate(fh, start=1)
        rows = cols = nnz = None
        if fmt == MATRIX_MARKET:
            lineno, first = next(lines, (1, ""))
            if first.rstrip("\r\n").rstrip() != MM_HEADER:
                raise ParseError(f"expected header {MM_HEADER!r}, got {first.strip()!r}", 1, path)
            for lineno, line in lines:
                text = line.strip()
                if not text or text.startswith("%"):
                    continue
                parts = text.split()
                try:
                    rows, cols, nnz = (int(p) for p in parts)
                except ValueError:
                    raise ParseError(f"bad size line {text!r}", lineno, path) from None
                if rows < 0 or cols < 0 or nnz < 0:
                    raise ParseError(f"negative size in {text!r}", lineno, path)
                break
            else:
                raise ParseError("missing size line", lineno, path)
        yield {"format": fmt, "rows": rows, "cols": cols, "nnz": nnz}

        count = 0
        lineno = 0
        for lineno, line in lines:
            text = line.strip()
            if not text:
                continue
            if text.startswith("%") and fmt == MATRIX_MARKET:
                continue
            parts = text.split()
            if len(parts) != 3:
                raise ParseError(f"expected 'i j value', got {text!r}", lineno, path)
            try:
                i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError:
                raise ParseError(f"bad entry {text!r}", lineno, path) from None
            if i < 1 or j < 1 or (rows is not None and (i > rows or j > cols)):
                bounds = f" (matrix is {rows} x {cols})" if rows is not None else ""
                raise ParseError(f"index ({i}, {j}) out of bounds{bounds}", lineno, path)
            count += 1
            if nnz is not None and count > nnz:
                raise ParseError(f"more than the declared {nnz} entries", lineno, path)
            yield lineno, i - 1, j - 1, v
        if nnz is not None and count != nnz:
            raise ParseError(f"declared {nnz} entries, found {count}", lineno, path)


def _on_root(comm, func, *args):
    """Run ``func`` on rank 0 and broadcast its result or its exception."""
    if comm.rank == 0:
        try:
            outcome = (True, func(*args))
        except (OSError, ParseError, ContractError) as exc:
            outcome = (False, exc)
    else:
        outcome = None
    ok, value = comm.broadcast_object(outcome, 0)
    if not ok:
        raise value
    return value


def _count(path, fmt):
    it = _entries(path, fmt)
    head = next(it)
    per_row = {}
    rows = cols = nnz = 0
    for _, i, j, _ in it:
        per_row[i] = per_row.get(i, 0) + 1
        rows, cols, nnz = max(rows, i + 1), max(cols, j + 1), nnz + 1
    if head["rows"] is not None:
        rows, cols = head["rows"], head["cols"]
    counts = np.zeros(rows, dtype=np.int64)
    for i, n in per_row.items():
        counts[i] = n
    return rows, cols, nnz, counts


def count_entries(path, comm, fmt=None):
    """Collective.  ``(rows, cols, nnz, nonzeros_per_row)`` from a counting pass."""
    return _on_root(comm, _count, path, fmt)


def _read_all(path, fmt):
    it = _entries(path, fmt)
    head = next(it)
    data = [(i, j, v) for _, i, j, v in it]
    entries = np.array(data, dtype=_ENTRY) if data else np.empty(0, dtype=_ENTRY)
    rows, cols = head["rows"], head["cols"]
    if rows is None:
        rows = int(entries["i"].max()) + 1 if data else 0
        cols = int(entries["j"].max()) + 1 if data else 0
    return rows, cols, entries


def read_coordinate_file(path, comm, width=None, gid_offset=0, fmt=None):
    """Collective.  Read a coordinate file into a fill-completed :class:`CrsMatrix`.

    Rows are distributed by a uniform map over ``[gid_offset, gid_offset +
    rows)`` at the requested width; the domain map is the uniform map over
    the columns.  Returns ``(row_map, matrix)``.
    """
    width = require_built(GlobalIndexWidth.coerce(32 if width is None else width), "read_coordinate_file")
    gid_offset = int(gid_offset)
    rows, cols, entries = _on_root(comm, _read_all, path, fmt)
    check_fits(width, [gid_offset, gid_offset + max(rows, cols, 1) - 1], "matrix extent with GID offset")

    row_map = BlockMap.uniform(rows, gid_offset, comm, width=width)
    domain_map = row_map if cols == rows else BlockMap.uniform(cols, gid_offset, comm, width=width)
    if comm.rank != 0:
        entries = np.empty(0, dtype=_ENTRY)
    owners, _ = row_map.remote_id_list(entries["i"] + gid_offset)
    plan, _ = create_from_sends(comm, owners)
    mine = plan.do(entries)

    matrix = CrsMatrix(row_map)
    order = np.argsort(mine["i"], kind="stable")
    mine = mine[order]
    bounds = np.flatnonzero(np.diff(mine["i"])) + 1
    for chunk in np.split(mine, bounds) if mine.size else []:
        grow = width.dtype.type(chunk["i"][0] + gid_offset)
        gcols = (chunk["j"] + gid_offset).astype(width.dtype)
        matrix.insert_global_values(grow, gcols, chunk["v"])
    matrix.fill_complete(domain_map, row_map)
    return row_map, matrix


def _format_value(v):
    return repr(float(v))


def _write(path, fmt, rows, cols, entries):
    order = np.lexsort((entries["j"], entries["i"]))
    entries = entries[order]
    with open(path, "w") as fh:
        if fmt == MATRIX_MARKET:
            fh.write(MM_HEADER + "\n")
            fh.write(f"{rows} {cols} {entries.size}\n")
        for i, j, v in entries.tolist():
            fh.write(f"{i + 1} {j + 1} {_format_value(v)}\n")


def write_coordinate_file(matrix, path, fmt=MATRIX_MARKET):
    """Collective.  Write a fill-completed matrix; rank 0 writes the file.

    File indices are ``gid - index_base + 1`` for rows (range map) and
    columns (domain map), so a matrix read with a GID offset writes the same
    file as its unshifted twin.
    """
    if fmt not in (MATRIX_MARKET, TRIPLES):
        raise ContractError(f"unknown coordinate format {fmt!r}")
    if not matrix.filled:
        raise LifecycleError("write_coordinate_file needs a fill-completed matrix")
    comm = matrix.comm
    rbase = matrix.range_map.index_base64()
    cbase = matrix.domain_map.index_base64()
    local = []
    row_gids = matrix.row_map.my_gids_array()
    for lrow in range(matrix.num_my_rows()):
        cols, vals = matrix.global_row(row_gids[lrow])
        for c, v in zip(cols.tolist(), vals.tolist()):
            local.append((int(row_gids[lrow]) - rbase, c - cbase, v))
    entries = np.array(local, dtype=_ENTRY) if local else np.empty(0, dtype=_ENTRY)
    plan, _ = create_from_sends(comm, np.zeros(entries.size, dtype=np.int64))
    gathered = plan.do(entries)
    rows = matrix.range_map.num_global_elements64()
    cols = matrix.domain_map.num_global_elements64()
    _on_root(comm, _write, path, fmt, rows, cols, gathered)
