"""Successive-refinement codec for white Gaussian sources.

Stage j describes the current error by the index of one atom of a single,
reused unit-norm dictionary. In ``adaptive`` mode the stage coefficient is
the optimal scalar, transmitted as side information. In ``fixed`` mode it
is the public constant ``x_j * gain`` with ``x_j = D**((j-1)/2)`` and
``gain = sqrt(n * (1 - D))``, the length of a codeword that leaves relative
error ``D`` on a source of norm ``sqrt(n)``. A fixed-mode decoder needs only
the indices, ``D`` and ``n``.

Sources of norm about ``sqrt(n)`` are encoded against unit atoms. The
scale lives in the coefficients, never in the stored dictionary.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .approx import ZERO_RESIDUAL
from .core import as_signal, check_seed, derive_seed, draw_block, map_blocks
from .dictionary import Dictionary, random_dictionary
from .errors import DimensionMismatch, IndexOutOfRange, InvalidParams

MODES = ("fixed", "adaptive")
COEFF_BITS = 64  # adaptive side information: one float64 per stage
CALIBRATION_TRIALS = 100
GREEDY_CHUNK = 1 << 22


@dataclass
class RefinementCode:
    indices: np.ndarray
    rate_per_stage: list  # bits per stage, ceil(log2 M_j)
    scalings: np.ndarray  # x_j = D**((j-1)/2)
    mode: str
    d_design: float
    n: int
    gain: float = 0.0  # fixed mode only
    coeffs: np.ndarray | None = None  # adaptive side information
    # encoder-side diagnostics, not part of the description
    encoder_recon: np.ndarray | None = None

    @property
    def k(self) -> int:
        return len(self.indices)

    def bits_through(self, j) -> int:
        return int(sum(self.rate_per_stage[:j]))

    def side_bits_through(self, j) -> int:
        return COEFF_BITS * j if self.mode == "adaptive" else 0

    def stage_coeffs(self) -> np.ndarray:
        if self.mode == "adaptive":
            return self.coeffs
        return self.scalings * self.gain


@dataclass
class StageReport:
    stage: int
    cumulative_bits: int
    rate_per_dim: float
    mean_dist: float
    stderr: float
    ideal_dist: float
    target: float | None
    trials: int
    side_bits: int

    def as_dict(self):
        return asdict(self)


class TailEstimate(NamedTuple):
    tail_prob: float
    tail_contribution: float


def scalings(k, d_design) -> np.ndarray:
    return d_design ** (np.arange(k) / 2.0)


def _stage_dicts(C, k) -> list:
    if isinstance(C, Dictionary):
        return [C] * k
    dicts = list(C)
    if len(dicts) != k:
        raise InvalidParams(f"need one dictionary per stage: got {len(dicts)} for k={k}")
    if len({d.n for d in dicts}) != 1:
        raise DimensionMismatch("per-stage dictionaries must share one dimension")
    return dicts


def _check_mode(mode, d_design):
    if mode not in MODES:
        raise InvalidParams(f"mode must be one of {MODES}, got {mode!r}")
    if mode == "fixed" and not 0 < d_design <= 1:
        raise InvalidParams(f"fixed mode needs 0 < D_design <= 1, got {d_design}")


def _encode_rows(U, dicts: Sequence[Dictionary], mode, d_design):
    """Encode every row of U.

    Returns indices and coefficients (T, k), residual energies (T, k+1) and
    the reconstructions (T, n). The reconstruction is accumulated in the
    same order as ``decode`` so the two agree exactly.
    """
    U = np.asarray(U, dtype=np.float64)
    Z = U.copy()
    R = np.zeros_like(U)
    T, n = Z.shape
    k = len(dicts)
    idx = np.zeros((T, k), dtype=np.int_)
    coef = np.zeros((T, k))
    energies = np.empty((T, k + 1))
    energies[:, 0] = np.einsum("ij,ij->i", Z, Z)
    rows = np.arange(T)
    if mode == "fixed":
        fixed = scalings(k, d_design) * math.sqrt(n * (1.0 - d_design))
    for j, C in enumerate(dicts):
        norms = C.norms_sq
        corr = Z @ C.atoms.T
        if mode == "adaptive":
            live = norms > 0
            safe = np.where(live, norms, 1.0)
            m = np.argmax(np.where(live, corr * corr / safe, 0.0), axis=1)
            x = np.where(live[m], corr[rows, m] / safe[m], 0.0)
        else:
            a = fixed[j]
            # argmin_m |z - a phi_m|^2 = argmax_m 2a<z, phi_m> - a^2 |phi_m|^2
            m = np.argmax(2.0 * a * corr - a * a * norms, axis=1)
            x = np.full(T, a)
        done = energies[:, j] <= ZERO_RESIDUAL * energies[:, 0]
        m[done] = 0
        if mode == "adaptive":
            x[done] = 0.0
        idx[:, j] = m
        coef[:, j] = x
        R += x[:, None] * C.atoms[m]
        Z = U - R
        energies[:, j + 1] = np.einsum("ij,ij->i", Z, Z)
    return idx, coef, energies, R


def encode(u, C, k, mode="adaptive", d_design=1.0) -> RefinementCode:
    """Describe ``u`` in ``k`` stages. ``C`` is one dictionary reused by every
    stage, or a sequence with one dictionary per stage."""
    u = as_signal(u, "u")
    dicts = _stage_dicts(C, k)
    if u.size != dicts[0].n:
        raise DimensionMismatch(f"source has dimension {u.size}, atoms have {dicts[0].n}")
    _check_mode(mode, d_design)
    idx, coef, _, recon = _encode_rows(u[None, :], dicts, mode, d_design)
    n = u.size
    code = RefinementCode(
        indices=idx[0],
        rate_per_stage=[math.ceil(math.log2(d.M)) for d in dicts],
        scalings=scalings(k, d_design) if mode == "fixed" else np.ones(k),
        mode=mode,
        d_design=float(d_design),
        n=n,
        gain=math.sqrt(n * (1.0 - d_design)) if mode == "fixed" else 0.0,
        coeffs=coef[0] if mode == "adaptive" else None,
    )
    code.encoder_recon = recon[0]
    return code


def decode(code: RefinementCode, C, j) -> np.ndarray:
    """Reconstruction from the first ``j`` stage descriptions."""
    if not 0 <= j <= code.k:
        raise IndexOutOfRange(f"prefix length must lie in [0, {code.k}], got {j}")
    dicts = _stage_dicts(C, code.k)
    out = np.zeros(code.n)
    coeffs = code.stage_coeffs()
    for i in range(j):
        m = int(code.indices[i])
        if not 0 <= m < dicts[i].M:
            raise IndexOutOfRange(f"stage {i} index {m} outside [0, {dicts[i].M})")
        out += coeffs[i] * dicts[i].atoms[m]
    return out


def stage_distortions(U, C, k, mode="adaptive", d_design=1.0) -> np.ndarray:
    """Per-dimension distortion |u - decode_j|^2 / n for j = 0..k, every row of U."""
    U = np.asarray(U, dtype=np.float64)
    dicts = _stage_dicts(C, k)
    _check_mode(mode, d_design)
    step = max(1, GREEDY_CHUNK // max(d.M for d in dicts))
    parts = [_encode_rows(U[i:i + step], dicts, mode, d_design)[2] for i in range(0, len(U), step)]
    return np.concatenate(parts) / U.shape[1]


def _sources(n, trials, seed, threads, fn):
    seed = check_seed(seed)
    return np.concatenate(map_blocks(lambda b, s, e: fn(draw_block("gaussian", n, seed, b, e - s)),
                                     int(trials), threads))


def calibrate_design_distortion(C: Dictionary, trials=CALIBRATION_TRIALS, seed=0, threads=1) -> float:
    """Mean stage-1 contraction |z_1|^2 / |u|^2 of the adaptive codec on Gaussian draws."""
    d = _sources(C.n, trials, seed, threads, lambda U: stage_distortions(U, C, 1))
    return float(np.mean(d[:, 1] / d[:, 0]))


def norm_concentration(n, eps, trials, seed=0, threads=1) -> TailEstimate:
    """Monte Carlo estimates of P(|U|/sqrt(n) > 1+eps) and of
    E(|U|/sqrt(n) ; |U|/sqrt(n) > 1+eps) for U standard normal in R^n."""
    if eps <= 0:
        raise InvalidParams(f"eps must be positive, got {eps}")
    if int(trials) != trials or trials < 1:
        raise InvalidParams(f"trials must be a positive integer, got {trials}")

    def block(U):
        r = np.sqrt(np.einsum("ij,ij->i", U, U) / n)
        return np.where(r > 1.0 + eps, r, 0.0)

    tail = _sources(int(n), trials, seed, threads, block)
    return TailEstimate(float(np.mean(tail > 0)), float(np.mean(tail)))


def rd_staircase(n, M, k, trials, seed=0, mode="adaptive", d_design=None, threads=1,
                 dictionary=None, calibration_trials=CALIBRATION_TRIALS) -> list[StageReport]:
    """Empirical distortion after each stage, against the Gaussian curve 2^(-2R).

    The dictionary and the source draws come from independent streams
    derived from ``seed``. In fixed mode ``d_design`` defaults to the
    calibrated stage-1 contraction.
    """
    if int(trials) != trials or trials < 2:
        raise InvalidParams(f"trials must be an integer >= 2, got {trials}")
    if int(k) != k or k < 1:
        raise InvalidParams(f"k must be a positive integer, got {k}")
    C = dictionary if dictionary is not None else random_dictionary(n, M, derive_seed(seed, 1))
    if C.n != n:
        raise DimensionMismatch(f"dictionary dimension {C.n} != n={n}")
    if mode == "fixed" and d_design is None:
        d_design = calibrate_design_distortion(C, calibration_trials, derive_seed(seed, 3), threads)
    d_design = 1.0 if d_design is None else float(d_design)
    _check_mode(mode, d_design)
    dist = _sources(n, trials, derive_seed(seed, 2), threads,
                    lambda U: stage_distortions(U, C, k, mode, d_design))
    stage_bits = math.ceil(math.log2(C.M))
    reports = []
    for j in range(k + 1):
        bits = j * stage_bits
        col = dist[:, j]
        reports.append(StageReport(
            stage=j,
            cumulative_bits=bits,
            rate_per_dim=bits / n,
            mean_dist=float(np.mean(col)),
            stderr=float(np.std(col, ddof=1) / math.sqrt(col.size)),
            ideal_dist=2.0 ** (-2.0 * bits / n),
            target=d_design**j if mode == "fixed" else None,
            trials=int(trials),
            side_bits=COEFF_BITS * j if mode == "adaptive" else 0,
        ))
    return reports


def staircase_slope(reports, stages=None) -> float:
    """Least-squares slope of log2(mean distortion) against cumulative rate per dimension."""
    chosen = [r for r in reports if r.stage >= 1 and (stages is None or r.stage in stages)]
    if len(chosen) < 2:
        raise InvalidParams("need at least two stages to fit a slope")
    x = np.array([r.rate_per_dim for r in chosen])
    y = np.log2([r.mean_dist for r in chosen])
    return float(np.polyfit(x, y, 1)[0])
