import numpy as np
import pytest

from srlab import kernels
from srlab._kernels_py import exhaustive_search as py_search

BACKENDS = kernels.backends()


def _case(rng, n, M):
    A = rng.standard_normal((M, n))
    A /= np.linalg.norm(A, axis=1, keepdims=True)
    if M > 3:
        A[2] = A[0]  # a duplicated atom
        A[3] = -A[1]  # and a negated one
    y = rng.standard_normal(n)
    return A, y


def test_backend_selected():
    assert kernels.BACKEND in ("cython", "python")
    assert "python" in BACKENDS


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_backend_matches_brute_force(name):
    from oracles import enumerate_best_k
    search = BACKENDS[name].exhaustive_search
    rng = np.random.default_rng(0)
    for _ in range(50):
        n, M, k = rng.integers(2, 7), rng.integers(4, 14), rng.integers(2, 4)
        A, y = _case(rng, n, M)
        support, energy = search(A @ A.T, A @ y, int(k), 1e-10, 1e-12 * float(y @ y))
        val, ref = enumerate_best_k(y, A, int(k))
        assert tuple(support) == ref
        assert abs((float(y @ y) - energy) - val) <= 1e-9 * float(y @ y)


def test_backends_bit_identical():
    if "cython" not in BACKENDS:
        pytest.skip("compiled kernel not built")
    rng = np.random.default_rng(1)
    for _ in range(100):
        n, M, k = rng.integers(2, 9), rng.integers(4, 20), rng.integers(2, 4)
        A, y = _case(rng, n, M)
        args = (A @ A.T, A @ y, int(k), 1e-10, 1e-12 * float(y @ y))
        s1, e1 = BACKENDS["cython"].exhaustive_search(*args)
        s2, e2 = BACKENDS["python"].exhaustive_search(*args)
        assert tuple(s1) == tuple(s2) and e1 == e2


def test_zero_signal_picks_first_support():
    A = np.eye(3)
    support, energy = py_search(A, np.zeros(3), 2, 1e-10, 0.0)
    assert tuple(support) == (0, 1) and energy == 0.0


def test_near_max_supports_backends_agree():
    rng = np.random.default_rng(2)
    for _ in range(60):
        n, M, k = rng.integers(2, 7), rng.integers(4, 16), rng.integers(2, 4)
        A, y = _case(rng, n, M)
        args = (A @ A.T, A @ y, int(k), 1e-10, 0.3 * float(y @ y), 7)
        results = [BACKENDS[b].near_max_supports(*args) for b in sorted(BACKENDS)]
        for s, e in results[1:]:
            np.testing.assert_array_equal(s, results[0][0])
            assert e == results[0][1]
        s, _ = results[0]
        assert 1 <= len(s) <= 7
        assert [tuple(r) for r in s] == sorted(tuple(r) for r in s)


def test_near_max_supports_window_contents():
    A = np.eye(4)
    y = np.array([3.0, 2.0, 1.0, 0.5])
    for name in BACKENDS:
        s, best = BACKENDS[name].near_max_supports(A, y, 2, 1e-10, 4.5, 100)
        # energies: (0,1)=13 (0,2)=10 (0,3)=9.25 (1,2)=5 ...
        assert best == 13.0
        assert [tuple(r) for r in s] == [(0, 1), (0, 2), (0, 3)]
