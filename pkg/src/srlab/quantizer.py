"""Quantized descriptions of a sparse representation.

A k-term representation ``yhat`` is rewritten in an orthonormal basis of the
span of its atoms (Gram-Schmidt, in selection order) as
``yhat = sum_i lambda_i psi_i``. The coefficients are then described either
by a uniform scalar grid of step ``1/l`` on [-1, 1] (2l+1 levels each), or
by a random covering codebook of ``2**bits`` points in the unit ball of R^k.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .approx import SparseRep, best_singleton
from .core import as_signal, check_seed, draw_block
from .dictionary import Dictionary, check_budget
from .errors import DimensionMismatch, InvalidParams, RankDeficient

RANK_TOL = 1e-10


@dataclass
class OrthoRep:
    basis: np.ndarray  # k x n, orthonormal rows
    lambdas: np.ndarray
    atom_indices: np.ndarray

    @property
    def k(self) -> int:
        return len(self.lambdas)

    @property
    def projection(self) -> np.ndarray:
        return self.lambdas @ self.basis


@dataclass
class QuantizedRep:
    lambdas_q: np.ndarray
    recon_q: np.ndarray
    step: float | None = None  # scalar grid only
    levels: np.ndarray | None = None  # integer grid positions, scalar grid only
    codeword: int | None = None  # covering codebook only
    gain: float | None = None  # covering codebook only

    def error_sq(self, o: OrthoRep) -> float:
        """|yhat - yhat'|^2, computed in coefficient space (the basis is orthonormal)."""
        d = o.lambdas - self.lambdas_q
        return float(d @ d)


def gram_schmidt(atoms) -> np.ndarray:
    """Orthonormalize ``atoms`` (rows) in order, with one reorthogonalization pass.

    Raises RankDeficient naming the first atom whose component orthogonal to
    its predecessors is at most 1e-10 of its norm.
    """
    A = np.atleast_2d(np.asarray(atoms, dtype=np.float64))
    if A.ndim != 2:
        raise DimensionMismatch("atoms must be a sequence of vectors")
    Q = np.zeros_like(A)
    for i, a in enumerate(A):
        norm = math.sqrt(float(a @ a))
        v = a.copy()
        for _ in range(2):
            v -= Q[:i].T @ (Q[:i] @ v)
        r = math.sqrt(float(v @ v))
        if norm == 0.0 or r <= RANK_TOL * norm:
            raise RankDeficient(f"atom {i} is linearly dependent on atoms 0..{i - 1}", index=i)
        Q[i] = v / r
    return Q


def ortho_decompose(y, rep: SparseRep, C: Dictionary) -> OrthoRep:
    """Coefficients of the projection of ``y`` onto the span of the atoms in ``rep``.

    Repeated indices (possible for greedy representations) are merged,
    keeping the first occurrence. Padding stages, which carry an exactly zero
    coefficient, are ignored.
    """
    y = as_signal(y)
    if y.size != C.n:
        raise DimensionMismatch(f"signal has dimension {y.size}, atoms have {C.n}")
    order = list(dict.fromkeys(int(i) for i, c in zip(rep.indices, rep.coeffs) if c != 0.0))
    basis = gram_schmidt(C.atoms[order])
    return OrthoRep(basis, basis @ y, np.array(order, dtype=np.int_))


def quantize_levels(lambdas, l) -> np.ndarray:
    """Nearest multiple of 1/l, ties toward zero, clipped to [-l, l]."""
    if int(l) != l or l < 1:
        raise InvalidParams(f"l must be a positive integer, got {l}")
    lam = np.asarray(lambdas, dtype=np.float64)
    mag = np.ceil(np.abs(lam) * l - 0.5)
    return (np.sign(lam) * np.minimum(mag, l)).astype(np.int64)


def scalar_quantize(o: OrthoRep, l) -> QuantizedRep:
    levels = quantize_levels(o.lambdas, l)
    lq = levels / float(l)
    return QuantizedRep(lq, lq @ o.basis, step=1.0 / l, levels=levels)


def check_orthogonality(y, o: OrthoRep, q: QuantizedRep) -> float:
    """|<y - yhat, yhat - yhat'>|, which vanishes because yhat - yhat' lies in the span."""
    y = as_signal(y)
    yhat = o.projection
    return abs(float((y - yhat) @ (yhat - q.recon_q)))


def covering_codebook(k, bits, seed) -> np.ndarray:
    """``2**bits`` points drawn uniformly from the unit ball of R^k."""
    if k < 1 or bits < 1:
        raise InvalidParams(f"need k >= 1 and bits >= 1, got k={k}, bits={bits}")
    size = 1 << int(bits)
    check_budget(size, k)
    return draw_block("ball", int(k), check_seed(seed), 0, size)


def subspace_covering_quantize(o: OrthoRep, bits, seed, codebook=None, scaled=True) -> QuantizedRep:
    """Describe the coefficient vector with one codeword of a random codebook.

    With ``scaled`` (the default) the codeword is used with its optimal real
    gain, the best single scaled codeword. Otherwise the nearest codeword
    is taken as is.
    """
    cb = covering_codebook(o.k, bits, seed) if codebook is None else np.asarray(codebook, dtype=np.float64)
    if cb.ndim != 2 or cb.shape[1] != o.k:
        raise DimensionMismatch(f"codebook rows must have dimension {o.k}")
    if scaled:
        rep = best_singleton(o.lambdas, Dictionary(cb, unit_norm=False))
        m, gain = int(rep.indices[0]), float(rep.coeffs[0])
    else:
        d = np.einsum("ij,ij->i", cb - o.lambdas, cb - o.lambdas)
        m, gain = int(np.argmin(d)), 1.0
    lq = gain * cb[m]
    return QuantizedRep(lq, lq @ o.basis, codeword=m, gain=gain)


def description_count(M, k, l) -> int:
    """Number of (support, quantized coefficients) descriptions: C(M,k) (2l+1)^k."""
    return math.comb(int(M), int(k)) * (2 * int(l) + 1) ** int(k)


def enumerate_descriptions(M, k, l):
    """Every description slot, as (support, levels) tuples."""
    grid = range(-int(l), int(l) + 1)
    for support in itertools.combinations(range(int(M)), int(k)):
        for levels in itertools.product(grid, repeat=int(k)):
            yield support, levels


def step_schedule(n, d_bar, k=1) -> tuple[int, float]:
    """Grid resolution l = ceil(f_n / sqrt(d_bar)) with f_n = sqrt(n), and the
    resulting quantization error bound k / l**2."""
    if n < 1 or not 0 < d_bar <= 1:
        raise InvalidParams(f"need n >= 1 and 0 < d_bar <= 1, got n={n}, d_bar={d_bar}")
    l = math.ceil(math.sqrt(n) / math.sqrt(d_bar))
    return l, k / l**2
