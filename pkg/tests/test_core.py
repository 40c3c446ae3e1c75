import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from srlab import core
from srlab.errors import DimensionMismatch, InvalidParams


def test_norm_sq_examples():
    assert core.norm_sq([3.0, 4.0]) == 25.0
    assert core.norm_sq(np.zeros(7)) == 0.0
    assert core.norm_sq([1, 1, 1, 1]) == 4.0


def test_inner_examples():
    assert core.inner([1, 0], [0, 1]) == 0.0
    assert core.inner([1, 2], [3, 4]) == 11.0
    a = np.array([0.3, -1.2, 2.5])
    assert core.inner(a, a) == core.norm_sq(a)


def test_inner_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        core.inner([1, 2], [1, 2, 3])


def test_signal_validation():
    with pytest.raises(InvalidParams):
        core.norm_sq([1.0, np.nan])
    with pytest.raises(DimensionMismatch):
        core.norm_sq([])


finite = st.floats(-1e3, 1e3, allow_nan=False)


@settings(max_examples=200)
@given(st.integers(1, 12).flatmap(lambda n: st.tuples(*[st.lists(finite, min_size=n, max_size=n)] * 3)),
       finite, finite)
def test_inner_symmetric_bilinear(vecs, s, t):
    a, b, c = (np.array(v) for v in vecs)
    assert core.inner(a, b) == core.inner(b, a)
    lhs = core.inner(s * a + t * c, b)
    rhs = s * core.inner(a, b) + t * core.inner(c, b)
    # L1 norms bound the L2 ones and cannot underflow the way squares do
    l1 = lambda v: float(np.sum(np.abs(v)))
    scale = (abs(s) * l1(a) + abs(t) * l1(c)) * l1(b) + 1e-300
    assert abs(lhs - rhs) <= 1e-12 * scale


def test_ball_samples_inside_and_deterministic():
    for seed in range(20):
        y = core.sample_ball(3, seed)
        assert np.linalg.norm(y) <= 1 + 1e-12
    np.testing.assert_array_equal(core.sample_ball(5, 42), core.sample_ball(5, 42))
    assert not np.array_equal(core.sample_ball(5, 42), core.sample_ball(5, 43))


def test_ball_second_moment():
    # E|Y|^2 = n / (n + 2) for the uniform unit ball
    Y = core.ball_batch(4, 100_000, seed=11)
    assert np.max(np.linalg.norm(Y, axis=1)) <= 1 + 1e-12
    assert abs(np.mean(np.sum(Y**2, axis=1)) - 4 / 6) <= 0.01


def test_sphere_samples():
    y = core.sample_sphere_surface(2, 3)
    assert abs(np.hypot(*y) - 1) <= 1e-12
    np.testing.assert_array_equal(core.sample_sphere_surface(6, 9), core.sample_sphere_surface(6, 9))
    Y = core.sphere_batch(5, 100_000, seed=4)
    assert np.max(np.abs(np.linalg.norm(Y, axis=1) - 1)) <= 1e-12
    assert np.max(np.abs(Y.mean(axis=0))) <= 0.02


def test_gaussian_samples():
    U = core.gaussian_batch(100, 10_000, seed=5)
    assert abs(np.mean(np.sum(U**2, axis=1) / 100) - 1.0) <= 0.02
    u1 = core.gaussian_batch(1, 100_000, seed=6)[:, 0]
    assert abs(np.var(u1, ddof=1) - 1.0) <= 0.02
    np.testing.assert_array_equal(core.sample_gaussian(10, 1), core.sample_gaussian(10, 1))


@pytest.mark.parametrize("kind", ["ball", "sphere", "gaussian"])
def test_batches_independent_of_threads_and_prefix_stable(kind):
    a = core.batch(kind, 6, 1000, seed=123, threads=1)
    b = core.batch(kind, 6, 1000, seed=123, threads=4)
    np.testing.assert_array_equal(a, b)
    np.testing.assert_array_equal(core.batch(kind, 6, 300, seed=123), a[:300])


def test_seed_range():
    core.check_seed(2**64 - 1)
    with pytest.raises(InvalidParams):
        core.check_seed(2**64)
    with pytest.raises(InvalidParams):
        core.check_seed(-1)
