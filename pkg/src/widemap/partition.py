"""Even-division layout shared by uniform maps and the directory."""
import numpy as np


def uniform_counts(n, nparts):
    """Rank ``p`` gets ``n // P`` items plus one if ``p < n % P``."""
    base, rem = divmod(n, nparts)
    return np.array([base + (1 if p < rem else 0) for p in range(nparts)], dtype=np.int64)


def uniform_starts(n, nparts, first=0):
    """Offsets of each part's first item; length ``nparts + 1``."""
    starts = np.empty(nparts + 1, dtype=np.int64)
    starts[0] = first
    np.cumsum(uniform_counts(n, nparts), out=starts[1:])
    starts[1:] += first
    return starts


def uniform_owner(k, n, nparts):
    """Part owning zero-based item ``k`` (vectorized); ``k`` must lie in ``[0, n)``."""
    k = np.asarray(k, dtype=np.int64)
    base, rem = divmod(n, nparts)
    cut = rem * (base + 1)
    big = k // (base + 1)
    if base == 0:
        return big
    small = rem + (k - cut) // base
    return np.where(k < cut, big, small)
