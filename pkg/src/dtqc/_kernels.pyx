# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled bit-level kernels. Same contract as ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, uint8_t

cnp.import_array()

MAX_SITES = 32


def enumerate_constrained(int n_sites):
    cdef Py_ssize_t count, a, b, t, i, k, pos
    cdef int n
    if n_sites == 0:
        return np.zeros(1, dtype=np.int64)
    # Fib(n_sites + 2)
    a, b = 1, 2
    for n in range(1, n_sites):
        t = a + b
        a = b
        b = t
    count = b
    out = np.empty(count, dtype=np.int64)
    cdef int64_t[::1] s = out
    # fill by the same recurrence, in place: [len(n-1) block][len(n-2) block | top]
    s[0] = 0
    s[1] = 1
    cdef Py_ssize_t n_short = 1, n_cur = 2
    cdef int64_t top
    with nogil:
        for n in range(2, n_sites + 1):
            top = (<int64_t>1) << (n - 1)
            for i in range(n_short):
                s[n_cur + i] = s[i] | top
            k = n_cur
            n_cur = n_cur + n_short
            n_short = k
    return out


def pxp_coo(states, int n_sites, int n_left, double omega_left, double omega_right):
    """``states`` must be the full sorted basis from ``enumerate_constrained``.

    The index of a legal string is the sum of ``c[i]`` over its set bits, with
    ``c[i]`` the number of legal strings on ``i`` sites, so flipping site ``i``
    moves the index by exactly ``c[i]`` and no search is needed.
    """
    cdef const int64_t[::1] s = np.ascontiguousarray(states, dtype=np.int64)
    cdef Py_ssize_t d = s.shape[0], r, nnz = 0, j
    cdef int site
    cdef int64_t x
    if n_sites > MAX_SITES:
        raise ValueError(f"n_sites must be <= {MAX_SITES}")
    cdef int64_t[64] c
    c[0] = 1
    c[1] = 2
    for site in range(2, n_sites + 1):
        c[site] = c[site - 1] + c[site - 2]
    if d != c[n_sites]:
        raise ValueError("states is not the full constrained basis")
    # count first so the output arrays are exact-size
    with nogil:
        for r in range(d):
            x = s[r]
            for site in range(n_sites):
                if site > 0 and (x >> (site - 1)) & 1:
                    continue
                if site < n_sites - 1 and (x >> (site + 1)) & 1:
                    continue
                nnz += 1
    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz, dtype=np.float64)
    cdef int64_t[::1] rr = rows
    cdef int64_t[::1] cc = cols
    cdef double[::1] vv = vals
    cdef Py_ssize_t[64] tmp_col
    cdef double[64] tmp_val
    cdef int m, p, q
    cdef Py_ssize_t ct
    cdef double cv
    j = 0
    with nogil:
        for r in range(d):
            x = s[r]
            m = 0
            for site in range(n_sites):
                if site > 0 and (x >> (site - 1)) & 1:
                    continue
                if site < n_sites - 1 and (x >> (site + 1)) & 1:
                    continue
                if (x >> site) & 1:
                    tmp_col[m] = r - c[site]
                else:
                    tmp_col[m] = r + c[site]
                tmp_val[m] = 0.5 * (omega_left if site < n_left else omega_right)
                m += 1
            # insertion sort by column (m <= n_sites)
            for p in range(1, m):
                ct = tmp_col[p]
                cv = tmp_val[p]
                q = p - 1
                while q >= 0 and tmp_col[q] > ct:
                    tmp_col[q + 1] = tmp_col[q]
                    tmp_val[q + 1] = tmp_val[q]
                    q -= 1
                tmp_col[q + 1] = ct
                tmp_val[q + 1] = cv
            for p in range(m):
                rr[j] = r
                cc[j] = tmp_col[p]
                vv[j] = tmp_val[p]
                j += 1
    return rows, cols, vals


def occupations(states, int n_sites):
    cdef const int64_t[::1] s = np.ascontiguousarray(states, dtype=np.int64)
    cdef Py_ssize_t d = s.shape[0], r
    cdef int site
    out = np.empty((d, n_sites), dtype=np.uint8)
    cdef uint8_t[:, ::1] o = out
    with nogil:
        for r in range(d):
            for site in range(n_sites):
                o[r, site] = (s[r] >> site) & 1
    return out


def region_counts(states, int lo, int hi):
    cdef const int64_t[::1] s = np.ascontiguousarray(states, dtype=np.int64)
    cdef Py_ssize_t d = s.shape[0], r
    cdef int site, c
    out = np.zeros(d, dtype=np.int64)
    cdef int64_t[::1] o = out
    with nogil:
        for r in range(d):
            c = 0
            for site in range(lo, hi):
                c += (s[r] >> site) & 1
            o[r] = c
    return out
