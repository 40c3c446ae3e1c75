"""Sparse k-term representations and the distortion functionals built on them.

Three methods produce a k-term representation of a signal ``y``:

* ``greedy`` (successive representation): represent ``y`` by its best single
  scaled atom, then the error, then the error of the error, and so on. An
  atom may be selected more than once.
* ``omp``: the same greedy selection, but all selected coefficients are
  refit by least squares after every stage.
* ``exhaustive``: the global optimum over all size-k supports.

Indices are 0-based. Ties go to the smallest index (singletons) and to the
lexicographically smallest support (exhaustive).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import as_signal, check_seed, draw_block, map_blocks
from .dictionary import Dictionary
from .errors import BudgetExceeded, DimensionMismatch, IndexOutOfRange, InvalidParams

# residual energy, relative to |y|^2, below which later stages are padding
ZERO_RESIDUAL = 1e-28
RANK_TOL = 1e-10
TIE_TOL = 1e-12
# Gram-domain rank test on squared singular values, so SVD solves use its root
SV_RANK_TOL = math.sqrt(RANK_TOL)
# kernel energies of supports near the rank limit can be off by ~eps/RANK_TOL;
# supports this close to the kernel maximum are rescored by an SVD solve
RESCORE_WINDOW = 1e-5
RESCORE_LIMIT = 4096
DEFAULT_WORK_BUDGET = 10**8
METHODS = ("greedy", "omp", "exhaustive")
# bound on rows * atoms per correlation matrix in batched greedy passes
GREEDY_CHUNK = 1 << 22


@dataclass
class SparseRep:
    indices: np.ndarray
    coeffs: np.ndarray
    recon: np.ndarray
    residual_sq: float

    @property
    def k(self) -> int:
        return len(self.indices)


@dataclass
class ResidualTrace:
    """Residual energies ``|z_0|^2, ..., |z_k|^2`` with ``z_0 = y``."""

    energies: np.ndarray

    def is_nonincreasing(self, slack=1e-12) -> bool:
        e = self.energies
        return bool(np.all(e[1:] <= e[:-1] + slack))


@dataclass
class LinearSystemView:
    """``y = Phi @ x + z`` with ``Phi`` the n x M atom matrix and ``x`` k-sparse."""

    Phi: np.ndarray
    x: np.ndarray
    z: np.ndarray


def _check(y, C: Dictionary):
    y = as_signal(y)
    if y.size != C.n:
        raise DimensionMismatch(f"signal has dimension {y.size}, dictionary atoms have {C.n}")
    return y


def _check_k(k, allow_zero=False):
    if int(k) != k or k < (0 if allow_zero else 1):
        raise InvalidParams(f"k must be a {'non-negative' if allow_zero else 'positive'} integer, got {k}")
    return int(k)


def _greedy_rows(Y, C: Dictionary, k):
    """Successive representation of every row of ``Y``.

    Returns stage indices (T, k), coefficients (T, k), residual energies
    (T, k+1) and the final residuals (T, n).
    """
    Z = np.array(Y, dtype=np.float64)
    T = Z.shape[0]
    norms = C.norms_sq
    live = norms > 0
    safe = np.where(live, norms, 1.0)
    idx = np.zeros((T, k), dtype=np.int_)
    coef = np.zeros((T, k))
    energies = np.empty((T, k + 1))
    energies[:, 0] = np.einsum("ij,ij->i", Z, Z)
    rows = np.arange(T)
    for j in range(k):
        corr = Z @ C.atoms.T
        score = np.where(live, corr * corr / safe, 0.0)
        m = np.argmax(score, axis=1)
        x = np.where(live[m], corr[rows, m] / safe[m], 0.0)
        done = energies[:, j] <= ZERO_RESIDUAL * energies[:, 0]
        m[done] = 0
        x[done] = 0.0
        idx[:, j] = m
        coef[:, j] = x
        Z -= x[:, None] * C.atoms[m]
        energies[:, j + 1] = np.einsum("ij,ij->i", Z, Z)
    return idx, coef, energies, Z


def best_singleton(y, C: Dictionary) -> SparseRep:
    """Best single scaled atom: maximize <y, phi>^2 / |phi|^2, x = <y, phi> / |phi|^2."""
    rep, _ = successive_represent(y, C, 1)
    return rep


def successive_represent(y, C: Dictionary, k) -> tuple[SparseRep, ResidualTrace]:
    y = _check(y, C)
    k = _check_k(k)
    idx, coef, energies, Z = _greedy_rows(y[None, :], C, k)
    rep = SparseRep(idx[0], coef[0], y - Z[0], float(energies[0, -1]))
    return rep, ResidualTrace(energies[0])


def _independent(A) -> bool:
    s = np.linalg.svd(A, compute_uv=False)
    return s[0] > 0 and s[-1] > RANK_TOL * s[0]


def omp_represent(y, C: Dictionary, k) -> tuple[SparseRep, ResidualTrace]:
    """Orthogonal matching pursuit.

    A candidate that would make the selected atoms numerically dependent
    (smallest singular value <= 1e-10 times the largest) is skipped in
    favor of the next best. If no admissible candidate is left, or the
    residual vanishes, the remaining stages are padded with index 0 and
    coefficient 0.
    """
    y = _check(y, C)
    k = _check_k(k)
    atoms = C.atoms
    norms = C.norms_sq
    safe = np.where(norms > 0, norms, 1.0)
    support: list[int] = []
    x = np.zeros(0)
    z = y.copy()
    energies = [float(y @ y)]
    for _ in range(k):
        chosen = None
        if energies[-1] > ZERO_RESIDUAL * energies[0]:
            corr = atoms @ z
            score = np.where(norms > 0, corr * corr / safe, 0.0)
            for m in np.argsort(-score, kind="stable"):
                m = int(m)
                if m in support or norms[m] == 0:
                    continue
                if _independent(atoms[support + [m]].T):
                    chosen = m
                    break
        if chosen is None:
            energies.append(energies[-1])
            continue
        support.append(chosen)
        A = atoms[support].T
        x = np.linalg.lstsq(A, y, rcond=None)[0]
        z = y - A @ x
        energies.append(float(z @ z))
    pad = k - len(support)
    indices = np.array(support + [0] * pad, dtype=np.int_)
    coeffs = np.concatenate([x, np.zeros(pad)])
    return SparseRep(indices, coeffs, y - z, energies[-1]), ResidualTrace(np.array(energies))


def _svd_energies(A, y) -> np.ndarray:
    """Projection energy of y onto the span of each stacked n x k matrix A[s]."""
    U, sv, _ = np.linalg.svd(A, full_matrices=False)
    keep = sv > SV_RANK_TOL * sv[:, :1]
    proj = np.einsum("snk,n->sk", U, y)
    return np.einsum("sk,sk->s", np.where(keep, proj, 0.0), proj)


def exhaustive_best_k(y, C: Dictionary, k, work_budget=DEFAULT_WORK_BUDGET) -> SparseRep:
    """Globally optimal k-term representation over distinct supports.

    The backend kernel scores every support; the few whose score is within
    a small window of the best are rescored with an SVD solve and the tie
    rule is applied to those scores. The winner is refit by least squares
    (minimum-norm coefficients if the support is rank deficient).
    """
    y = _check(y, C)
    k = _check_k(k)
    if k > C.M:
        raise InvalidParams(f"k={k} exceeds dictionary size {C.M}")
    supports = math.comb(C.M, k)
    if supports > work_budget:
        raise BudgetExceeded(f"C({C.M},{k}) = {supports} supports exceeds work budget {work_budget:g}")
    if k == 1:
        return best_singleton(y, C)
    yy = float(y @ y)
    cands, _ = kernels.near_max_supports(C.gram, C.atoms @ y, k, RANK_TOL,
                                         (RESCORE_WINDOW + TIE_TOL) * yy, RESCORE_LIMIT)
    energies = _svd_energies(np.transpose(C.atoms[cands], (0, 2, 1)), y)
    support = cands[np.flatnonzero(energies >= energies.max() - TIE_TOL * yy)[0]]
    A = C.atoms[support].T
    x = np.linalg.lstsq(A, y, rcond=SV_RANK_TOL)[0]
    recon = A @ x
    r = y - recon
    return SparseRep(np.asarray(support, dtype=np.int_), x, recon, float(r @ r))


def represent(y, C: Dictionary, k, method="greedy", work_budget=DEFAULT_WORK_BUDGET) -> SparseRep:
    if method == "greedy":
        return successive_represent(y, C, k)[0]
    if method == "omp":
        return omp_represent(y, C, k)[0]
    if method == "exhaustive":
        return exhaustive_best_k(y, C, k, work_budget)
    raise InvalidParams(f"unknown method {method!r}; expected one of {METHODS}")


def d_k(y, C: Dictionary, k, method="greedy", work_budget=DEFAULT_WORK_BUDGET) -> float:
    """Squared error of the k-term representation found by ``method``; k=0 gives |y|^2."""
    if _check_k(k, allow_zero=True) == 0:
        y = _check(y, C)
        return float(y @ y)
    return represent(y, C, k, method, work_budget).residual_sq


def resolve_method(C: Dictionary, k, trials, method, work_budget=DEFAULT_WORK_BUDGET) -> str:
    """``auto`` is exhaustive when trials * C(M, k) fits the work budget, else OMP."""
    if method != "auto":
        if method not in METHODS:
            raise InvalidParams(f"unknown method {method!r}")
        return method
    if k <= 1:
        return "exhaustive"
    return "exhaustive" if trials * math.comb(C.M, k) <= work_budget else "omp"


def distortions(Y, C: Dictionary, k, method="greedy", work_budget=DEFAULT_WORK_BUDGET) -> np.ndarray:
    """``d_k`` for every row of ``Y``."""
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim != 2 or Y.shape[1] != C.n:
        raise DimensionMismatch(f"expected rows of dimension {C.n}, got shape {Y.shape}")
    k = _check_k(k, allow_zero=True)
    if k == 0:
        return np.einsum("ij,ij->i", Y, Y)
    if method == "greedy" or (method == "exhaustive" and k == 1):
        step = max(1, GREEDY_CHUNK // C.M)
        return np.concatenate([_greedy_rows(Y[i:i + step], C, k)[2][:, -1]
                               for i in range(0, len(Y), step)] or [np.empty(0)])
    return np.array([d_k(y, C, k, method, work_budget) for y in Y])


def _sampled_distortions(C, k, trials, method, seed, kind, threads, work_budget):
    if int(trials) != trials or trials < 1:
        raise InvalidParams(f"trials must be a positive integer, got {trials}")
    seed = check_seed(seed)
    method = resolve_method(C, k, trials, method, work_budget)

    def block(b, start, stop):
        Y = draw_block(kind, C.n, seed, b, stop - start)
        return distortions(Y, C, k, method, work_budget)

    return np.concatenate(map_blocks(block, int(trials), threads))


def estimate_worst_case(C: Dictionary, k, trials, method="greedy", seed=0, threads=1,
                        work_budget=DEFAULT_WORK_BUDGET) -> float:
    """Monte Carlo lower estimate of the worst-case distortion over the unit ball.

    By degree-2 homogeneity the supremum over the ball is attained on its
    boundary, so only unit-sphere points are sampled. The result never
    overestimates the true supremum.
    """
    return float(np.max(_sampled_distortions(C, k, trials, method, seed, "sphere", threads, work_budget)))


def estimate_average(C: Dictionary, k, trials, method="greedy", seed=0, threads=1,
                     work_budget=DEFAULT_WORK_BUDGET) -> tuple[float, float]:
    """Mean and standard error of ``d_k`` over uniform draws from the unit ball."""
    if trials < 2:
        raise InvalidParams(f"need at least 2 trials for a standard error, got {trials}")
    d = _sampled_distortions(C, k, trials, method, seed, "ball", threads, work_budget)
    return float(np.mean(d)), float(np.std(d, ddof=1) / math.sqrt(d.size))


def contraction_ratios(C: Dictionary, k, trials, seed=0, kind="sphere", threads=1) -> np.ndarray:
    """Per-stage ratios |z_j|^2 / |z_(j-1)|^2 of the greedy method, shape (trials, k)."""
    if int(trials) != trials or trials < 1:
        raise InvalidParams(f"trials must be a positive integer, got {trials}")
    k = _check_k(k)
    seed = check_seed(seed)
    step = max(1, GREEDY_CHUNK // C.M)

    def block(b, start, stop):
        Y = draw_block(kind, C.n, seed, b, stop - start)
        e = np.concatenate([_greedy_rows(Y[i:i + step], C, k)[2] for i in range(0, len(Y), step)])
        return e[:, 1:] / e[:, :-1]

    return np.concatenate(map_blocks(block, int(trials), threads))


def export_linear_system(y, C: Dictionary, rep: SparseRep) -> LinearSystemView:
    y = _check(y, C)
    idx = np.asarray(rep.indices)
    if idx.size and (idx.min() < 0 or idx.max() >= C.M):
        raise IndexOutOfRange(f"representation indices must lie in [0, {C.M})")
    x = np.zeros(C.M)
    np.add.at(x, idx, rep.coeffs)
    Phi = C.matrix()
    return LinearSystemView(Phi, x, y - Phi @ x)
