# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled exhaustive support search.

Enumerates every size-k subset of atoms in lexicographic order and scores
it by the energy of the orthogonal projection of y onto its span, computed
from the Gram matrix with a Cholesky factorization that is updated
incrementally along the enumeration prefix. Must stay arithmetically in
step with ``_kernels_py.exhaustive_search``.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

cdef enum:
    KMAX = 64


cdef inline void _row(const double[:, ::1] gram, const double[::1] corr,
                      long *comb, int p, double *L, char *dropped,
                      double *w, double *energy, double rank_tol) noexcept nogil:
    cdef long j = comb[p]
    cdef int q, r
    cdef double s, piv
    for q in range(p):
        if dropped[q]:
            L[p * KMAX + q] = 0.0
            continue
        s = gram[j, comb[q]]
        for r in range(q):
            s = s - L[p * KMAX + r] * L[q * KMAX + r]
        L[p * KMAX + q] = s / L[q * KMAX + q]
    piv = gram[j, j]
    for r in range(p):
        piv = piv - L[p * KMAX + r] * L[p * KMAX + r]
    if gram[j, j] <= 0.0 or piv <= rank_tol * gram[j, j]:
        dropped[p] = 1
        L[p * KMAX + p] = 0.0
        w[p] = 0.0
    else:
        dropped[p] = 0
        L[p * KMAX + p] = sqrt(piv)
        s = corr[j]
        for r in range(p):
            s = s - L[p * KMAX + r] * w[r]
        w[p] = s / L[p * KMAX + p]
    if p == 0:
        energy[p] = w[p] * w[p]
    else:
        energy[p] = energy[p - 1] + w[p] * w[p]


cdef double _scan(const double[:, ::1] gram, const double[::1] corr, int k,
                  double rank_tol, bint collect, double threshold,
                  long[:, ::1] out, long *count) noexcept nogil:
    """Walk all supports. Without ``collect`` return the max energy. With it,
    copy supports whose energy reaches threshold into the rows of out, in
    lexicographic order, until out is full; return the first one's energy."""
    cdef long M = gram.shape[0]
    cdef long limit = out.shape[0]
    cdef long comb[KMAX]
    cdef double L[KMAX * KMAX]
    cdef double w[KMAX]
    cdef double energy[KMAX]
    cdef char dropped[KMAX]
    cdef int p, i
    cdef double best = -1.0
    count[0] = 0
    for i in range(k):
        comb[i] = i
    p = 0
    while True:
        while p < k:
            _row(gram, corr, comb, p, L, dropped, w, energy, rank_tol)
            p += 1
        if not collect:
            if energy[k - 1] > best:
                best = energy[k - 1]
        elif energy[k - 1] >= threshold:
            for i in range(k):
                out[count[0], i] = comb[i]
            if count[0] == 0:
                best = energy[k - 1]
            count[0] += 1
            if count[0] == limit:
                break
        # advance to the next combination in lexicographic order
        i = k - 1
        while i >= 0 and comb[i] == M - k + i:
            i -= 1
        if i < 0:
            break
        comb[i] += 1
        for p in range(i + 1, k):
            comb[p] = comb[p - 1] + 1
        p = i
    return best


def _check_k(gram, int k):
    if k < 1 or k > KMAX or k > gram.shape[0]:
        raise ValueError("k out of range")


def exhaustive_search(const double[:, ::1] gram, const double[::1] corr, int k,
                      double rank_tol, double tie_tol):
    """Best support of size k: lexicographically first whose projection energy
    is within tie_tol of the maximum. Returns (support, energy)."""
    _check_k(gram, k)
    out = np.zeros((1, k), dtype=np.int_)
    cdef long[:, ::1] ov = out
    cdef double best, hit
    cdef long count
    with nogil:
        best = _scan(gram, corr, k, rank_tol, False, 0.0, ov, &count)
        hit = _scan(gram, corr, k, rank_tol, True, best - tie_tol, ov, &count)
    return out[0], hit


def near_max_supports(const double[:, ::1] gram, const double[::1] corr, int k,
                      double rank_tol, double window, long limit):
    """Up to ``limit`` supports, in lexicographic order, whose projection
    energy is within ``window`` of the maximum. Returns (supports, max)."""
    _check_k(gram, k)
    if limit < 1:
        raise ValueError("limit must be positive")
    out = np.zeros((limit, k), dtype=np.int_)
    cdef long[:, ::1] ov = out
    cdef double best
    cdef long count
    with nogil:
        best = _scan(gram, corr, k, rank_tol, False, 0.0, ov, &count)
        _scan(gram, corr, k, rank_tol, True, best - window, ov, &count)
    return out[:count].copy(), best
