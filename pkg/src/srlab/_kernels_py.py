"""Pure numpy fallback for the compiled kernels in ``_kernels.pyx``.

Vectorized over chunks of supports, performing the same floating point
operations in the same order as the compiled scan.
"""
import itertools

import numpy as np

CHUNK = 1 << 15


def _chunks(M, k):
    it = itertools.combinations(range(M), k)
    while True:
        flat = np.fromiter(itertools.chain.from_iterable(itertools.islice(it, CHUNK)), dtype=np.int_)
        if flat.size == 0:
            return
        yield flat.reshape(-1, k)


def support_energies(gram, corr, combs, rank_tol):
    """Projection energy of ``y`` onto the span of each row of ``combs``."""
    S, k = combs.shape
    L = np.zeros((S, k, k))
    w = np.zeros((S, k))
    dropped = np.zeros((S, k), dtype=bool)
    energy = np.zeros(S)
    for p in range(k):
        j = combs[:, p]
        for q in range(p):
            s = gram[j, combs[:, q]]
            for r in range(q):
                s = s - L[:, p, r] * L[:, q, r]
            safe = np.where(dropped[:, q], 1.0, L[:, q, q])
            L[:, p, q] = np.where(dropped[:, q], 0.0, s / safe)
        gjj = gram[j, j]
        piv = gjj.copy()
        for r in range(p):
            piv = piv - L[:, p, r] * L[:, p, r]
        drop = (gjj <= 0.0) | (piv <= rank_tol * gjj)
        dropped[:, p] = drop
        lpp = np.where(drop, 0.0, np.sqrt(np.where(drop, 1.0, piv)))
        L[:, p, p] = lpp
        s = corr[j].copy()
        for r in range(p):
            s = s - L[:, p, r] * w[:, r]
        w[:, p] = np.where(drop, 0.0, s / np.where(drop, 1.0, lpp))
        energy = w[:, p] * w[:, p] if p == 0 else energy + w[:, p] * w[:, p]
    return energy


def _prepare(gram, corr, k):
    gram = np.ascontiguousarray(gram, dtype=np.float64)
    corr = np.ascontiguousarray(corr, dtype=np.float64)
    if k < 1 or k > 64 or k > gram.shape[0]:
        raise ValueError("k out of range")
    return gram, corr


def _max_energy(gram, corr, k, rank_tol):
    best = -1.0
    for combs in _chunks(gram.shape[0], k):
        best = max(best, float(support_energies(gram, corr, combs, rank_tol).max()))
    return best


def exhaustive_search(gram, corr, k, rank_tol, tie_tol):
    gram, corr = _prepare(gram, corr, k)
    threshold = _max_energy(gram, corr, k, rank_tol) - tie_tol
    for combs in _chunks(gram.shape[0], k):
        e = support_energies(gram, corr, combs, rank_tol)
        hits = np.flatnonzero(e >= threshold)
        if hits.size:
            i = hits[0]
            return combs[i].copy(), float(e[i])
    raise AssertionError("unreachable: the maximum is always reached")


def near_max_supports(gram, corr, k, rank_tol, window, limit):
    gram, corr = _prepare(gram, corr, k)
    if limit < 1:
        raise ValueError("limit must be positive")
    best = _max_energy(gram, corr, k, rank_tol)
    found = []
    left = int(limit)
    for combs in _chunks(gram.shape[0], k):
        e = support_energies(gram, corr, combs, rank_tol)
        hits = combs[e >= best - window][:left]
        found.append(hits)
        left -= len(hits)
        if left == 0:
            break
    return np.concatenate(found).astype(np.int_), best
