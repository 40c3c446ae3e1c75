"""Closed-form distortion bounds for k-sparse representation.

All logarithms are base 2 and rates are in bits per dimension, consistent
with dictionary sizes ``M = 2**(n*R)``.

The converse bound is an asymptotic statement. Its finite-n closed form is
evaluated as written, and reports carry ``asymptotic_only=True`` to say so.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .errors import DomainError, InvalidParams

LN2 = math.log(2.0)


@dataclass(frozen=True)
class BoundParams:
    n: int
    M: int
    k: int

    def __post_init__(self):
        for name in ("n", "M", "k"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise InvalidParams(f"{name} must be a positive integer, got {v}")
        if self.k >= self.n:
            raise InvalidParams(f"need k < n, got k={self.k}, n={self.n}")
        if self.M < self.k:
            raise InvalidParams(f"need M >= k, got M={self.M}, k={self.k}")


@dataclass(frozen=True)
class BoundReport:
    n: int
    M: int
    k: int
    thm1_rhs: float
    thm2_lower: float
    c_n: float
    log2_binom: float
    exponent_bounded_k: float
    asymptotic_only: bool = True

    def as_dict(self):
        return asdict(self)


def _params(p):
    if not isinstance(p, BoundParams):
        raise InvalidParams(f"expected BoundParams, got {type(p).__name__}")
    return p


def log2_binom(M, k) -> float:
    """log2 C(M, k). Exact integer binomial for k <= 2, log-gamma otherwise."""
    if int(M) != M or int(k) != k or not 0 <= k <= M:
        raise InvalidParams(f"need integers 0 <= k <= M, got M={M}, k={k}")
    M, k = int(M), int(k)
    k = min(k, M - k)
    if k == 0:
        return 0.0
    if k <= 2:
        return math.log2(math.comb(M, k))
    if M < 2**52:
        return (math.lgamma(M + 1) - math.lgamma(k + 1) - math.lgamma(M - k + 1)) / LN2
    # huge M: lgamma(M+1) - lgamma(M-k+1) cancels catastrophically in floating point
    return sum(math.log2(M - i) for i in range(k)) - math.lgamma(k + 1) / LN2


def log2_theorem1_rhs(p: BoundParams) -> float:
    p = _params(p)
    return -2.0 * p.k * math.log2(p.M) / p.n


def theorem1_rhs(p: BoundParams) -> float:
    """Achievable worst-case distortion exponent: M**(-2k/n)."""
    return 2.0 ** log2_theorem1_rhs(p)


def c_n(p: BoundParams) -> float:
    p = _params(p)
    n, k = p.n, p.k
    return math.log2(n / (n - k)) + (k / (n - k)) * math.log2(n / k)


def log2_theorem2_lower(p: BoundParams) -> float:
    p = _params(p)
    n, k = p.n, p.k
    return (-2.0 * log2_binom(p.M, k) / (n - k)
            + math.log2((n - k) / n)
            + (k / (n - k)) * math.log2(k / n))


def theorem2_lower(p: BoundParams) -> float:
    """Finite-n converse: 2^(-2 log2 C(M,k)/(n-k)) * ((n-k)/n) * (k/n)^(k/(n-k)).

    Evaluated in the log domain. Valid as n grows; no finite-n guarantee.
    """
    return 2.0 ** log2_theorem2_lower(p)


def exponent_bounded_k(p: BoundParams) -> float:
    """log2 lower bound for bounded k: -2k log2 M / (n - k)."""
    p = _params(p)
    return -2.0 * p.k * math.log2(p.M) / (p.n - p.k)


def report(n, M, k) -> BoundReport:
    p = BoundParams(n, M, k)
    return BoundReport(
        n=p.n, M=p.M, k=p.k,
        thm1_rhs=theorem1_rhs(p),
        thm2_lower=theorem2_lower(p),
        c_n=c_n(p),
        log2_binom=log2_binom(p.M, p.k),
        exponent_bounded_k=exponent_bounded_k(p),
    )


def gaussian_rd(D) -> float:
    """Rate-distortion function of a unit-variance white Gaussian source, bits."""
    if not 0 < D <= 1:
        raise DomainError(f"distortion must lie in (0, 1], got {D}")
    return 0.5 * math.log2(1.0 / D)


def gaussian_dr(R) -> float:
    if not (R >= 0 and math.isfinite(R)):
        raise DomainError(f"rate must be finite and >= 0, got {R}")
    return 2.0 ** (-2.0 * R)


def shannon_lb_rate(n, D) -> float:
    """Shannon lower bound on the rate for a uniform unit-ball source in R^n, bits:
    (n/2) log2(1/D) - log2(pi n) - 1/(6n)."""
    if not 0 < D <= 1:
        raise DomainError(f"distortion must lie in (0, 1], got {D}")
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    return 0.5 * n * math.log2(1.0 / D) - math.log2(math.pi * n) - 1.0 / (6.0 * n)
