"""Independent reference computations used only by the tests."""
import itertools

import numpy as np

TIE = 1e-12


def enumerate_best_k(y, atoms, k):
    """Best k-term fit by brute force: least squares on every support.

    Returns (value, support). Ties within TIE * |y|^2 go to the
    lexicographically smallest support.
    """
    y = np.asarray(y, dtype=float)
    values = []
    for support in itertools.combinations(range(len(atoms)), k):
        A = atoms[list(support)].T
        x, *_ = np.linalg.lstsq(A, y, rcond=None)
        r = y - A @ x
        values.append((float(r @ r), support))
    best = min(v for v, _ in values)
    tol = TIE * float(y @ y)
    for v, s in values:
        if v <= best + tol:
            return v, s


def scan_singleton(y, atoms):
    """Closed-form projection onto every atom; first index attaining the minimum."""
    best = None
    for m, a in enumerate(atoms):
        x = (a @ y) / (a @ a)
        r = y - x * a
        v = float(r @ r)
        if best is None or v < best[0]:
            best = (v, m, x)
    return best
