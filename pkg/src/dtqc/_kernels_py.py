"""Reference implementations of the bit-level kernels (numpy only).

These are the fallback used when the compiled ``_kernels`` extension is not
available; the compiled module exposes the same four functions with the same
outputs, element for element.
"""
import numpy as np

MAX_SITES = 32


def enumerate_constrained(n_sites):
    """All N-bit masks with no two adjacent bits set, ascending.

    Builds the list by the Fibonacci recurrence: legal strings of length n are
    the legal strings of length n-1, followed by the legal strings of length
    n-2 with the top bit (n-1) switched on. Both halves are already sorted.
    """
    if n_sites == 0:
        return np.zeros(1, dtype=np.int64)
    shorter = np.zeros(1, dtype=np.int64)
    current = np.array([0, 1], dtype=np.int64)
    for n in range(2, n_sites + 1):
        shorter, current = current, np.concatenate(
            [current, shorter | np.int64(1 << (n - 1))]
        )
    return current


def pxp_coo(states, n_sites, n_left, omega_left, omega_right):
    """COO triplets of the PXP matrix on the full sorted basis ``states``,
    sorted by row then column."""
    states = np.asarray(states, dtype=np.int64)
    rows, cols, vals = [], [], []
    for site in range(n_sites):
        free = np.ones(states.shape, dtype=bool)
        if site > 0:
            free &= ((states >> (site - 1)) & 1) == 0
        if site < n_sites - 1:
            free &= ((states >> (site + 1)) & 1) == 0
        src = np.nonzero(free)[0]
        dst = np.searchsorted(states, states[src] ^ np.int64(1 << site))
        rows.append(src)
        cols.append(dst)
        value = 0.5 * (omega_left if site < n_left else omega_right)
        vals.append(np.full(src.size, value))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    order = np.lexsort((cols, rows))
    return rows[order], cols[order], vals[order]


def occupations(states, n_sites):
    states = np.asarray(states, dtype=np.int64)
    shifts = np.arange(n_sites, dtype=np.int64)
    return ((states[:, None] >> shifts) & 1).astype(np.uint8)


def region_counts(states, lo, hi):
    states = np.asarray(states, dtype=np.int64)
    width = hi - lo
    if width <= 0:
        return np.zeros(states.shape, dtype=np.int64)
    masked = (states >> lo) & np.int64((1 << width) - 1)
    counts = np.zeros(states.shape, dtype=np.int64)
    while np.any(masked):
        counts += masked & 1
        masked >>= 1
    return counts
