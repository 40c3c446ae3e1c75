"""Numeric substrate: signals, inner products and seeded sampling.

Signals are plain 1-D ``float64`` numpy arrays. Every random quantity is a
pure function of its parameters and a 64-bit seed.

Batched sampling splits a run of ``count`` draws into fixed blocks of
``BLOCK`` rows. Block ``b`` draws from its own stream keyed by
``(seed, b)``, so a batch never depends on how many workers produced it,
and a shorter batch is always a prefix of a longer one with the same seed.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

from .errors import DimensionMismatch, InvalidParams

BLOCK = 256
SEED_MASK = (1 << 64) - 1


def as_signal(y, name="y") -> np.ndarray:
    """Validate ``y`` as a finite, nonempty 1-D float64 vector."""
    arr = np.asarray(y, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionMismatch(f"{name} must be a nonempty 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidParams(f"{name} has non-finite entries")
    return arr


def check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed <= SEED_MASK:
        raise InvalidParams(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def rng(seed, *keys) -> np.random.Generator:
    """Generator for the stream identified by ``(seed, *keys)``."""
    entropy = [check_seed(seed), *(int(k) for k in keys)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def derive_seed(seed, *keys) -> int:
    """A child 64-bit seed, independent of the parent stream."""
    entropy = [check_seed(seed), *(int(k) for k in keys)]
    state = np.random.SeedSequence(entropy).generate_state(2, np.uint32)
    return int(state[0]) | (int(state[1]) << 32)


def norm_sq(y) -> float:
    y = as_signal(y)
    return float(np.dot(y, y))


def inner(a, b) -> float:
    a = as_signal(a, "a")
    b = as_signal(b, "b")
    if a.shape != b.shape:
        raise DimensionMismatch(f"dimension mismatch: {a.size} != {b.size}")
    return float(np.dot(a, b))


def _check_dim(n):
    if int(n) != n or n < 1:
        raise InvalidParams(f"dimension must be a positive integer, got {n}")
    return int(n)


def block_ranges(count):
    """Fixed ``(block_index, start, stop)`` partition of ``range(count)``."""
    return [(b, s, min(s + BLOCK, count)) for b, s in enumerate(range(0, count, BLOCK))]


def map_blocks(fn: Callable[[int, int, int], np.ndarray], count, threads=1) -> list:
    """Apply ``fn(block, start, stop)`` over the fixed partition, in block order."""
    ranges = block_ranges(count)
    if threads is None or threads <= 1 or len(ranges) <= 1:
        return [fn(*r) for r in ranges]
    with ThreadPoolExecutor(max_workers=int(threads)) as pool:
        return list(pool.map(lambda r: fn(*r), ranges))


def _sphere_rows(gen, rows, n):
    g = gen.standard_normal((rows, n))
    norms = np.sqrt(np.einsum("ij,ij->i", g, g))
    # a zero Gaussian row has probability 0 but would divide by zero
    bad = norms == 0.0
    if np.any(bad):
        g[bad] = 0.0
        g[bad, 0] = 1.0
        norms[bad] = 1.0
    return g / norms[:, None]


def draw_block(kind, n, seed, block, rows) -> np.ndarray:
    """Rows ``block*BLOCK ...`` of the batch stream ``kind`` for ``seed``.

    ``kind`` is ``"ball"`` (uniform in the closed unit ball: isotropic
    direction times U^(1/n)), ``"sphere"`` (uniform on the unit sphere) or
    ``"gaussian"`` (i.i.d. standard normal entries).
    """
    if kind == "gaussian":
        return rng(seed, block, 0).standard_normal((rows, n))
    if kind == "sphere":
        return _sphere_rows(rng(seed, block, 0), rows, n)
    if kind == "ball":
        directions = _sphere_rows(rng(seed, block, 0), rows, n)
        radii = rng(seed, block, 1).random(rows) ** (1.0 / n)
        return directions * radii[:, None]
    raise InvalidParams(f"unknown distribution {kind!r}")


def batch(kind, n, count, seed, threads=1) -> np.ndarray:
    n = _check_dim(n)
    seed = check_seed(seed)
    return _stack(map_blocks(lambda b, s, e: draw_block(kind, n, seed, b, e - s), count, threads), n)


def gaussian_batch(n, count, seed, threads=1) -> np.ndarray:
    return batch("gaussian", n, count, seed, threads)


def sphere_batch(n, count, seed, threads=1) -> np.ndarray:
    return batch("sphere", n, count, seed, threads)


def ball_batch(n, count, seed, threads=1) -> np.ndarray:
    return batch("ball", n, count, seed, threads)


def _stack(blocks, n):
    if not blocks:
        return np.empty((0, n))
    return np.concatenate(blocks, axis=0)


def sample_ball(n, seed) -> np.ndarray:
    return ball_batch(n, 1, seed)[0]


def sample_sphere_surface(n, seed) -> np.ndarray:
    return sphere_batch(n, 1, seed)[0]


def sample_gaussian(n, seed) -> np.ndarray:
    return gaussian_batch(n, 1, seed)[0]
