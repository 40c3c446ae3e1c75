import math

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from srlab import bounds
from srlab.bounds import BoundParams
from srlab.errors import DomainError, InvalidParams

# Frozen values from an independent mpmath evaluation (50 digits).
C_N_100_10 = 0.5211062150992014
LOG2_BINOM_4096_3 = 33.413980622830625
LOG2_T2_64_4096_2 = -0.9490181327269432
SLB_100_025 = 91.70298101408629


def mp_log2_t2(n, M, k):
    mpmath.mp.dps = 50
    lb = mpmath.log(mpmath.binomial(M, k), 2)
    return float(-2 * lb / (n - k) + mpmath.log(mpmath.mpf(n - k) / n, 2)
                 + mpmath.mpf(k) / (n - k) * mpmath.log(mpmath.mpf(k) / n, 2))


def test_log2_binom():
    assert bounds.log2_binom(4, 2) == pytest.approx(math.log2(6), rel=1e-15)
    assert bounds.log2_binom(4096, 3) == pytest.approx(LOG2_BINOM_4096_3, rel=1e-13)
    assert bounds.log2_binom(10, 0) == 0.0
    big = bounds.log2_binom(2**128, 3)
    mpmath.mp.dps = 60
    assert big == pytest.approx(float(mpmath.log(mpmath.binomial(2**128, 3), 2)), rel=1e-13)


def test_c_n():
    assert bounds.c_n(BoundParams(100, 1000, 10)) == pytest.approx(C_N_100_10, rel=1e-13)
    for k in range(1, 5):
        assert bounds.c_n(BoundParams(10**6, 2**20, k)) < 1e-3


@pytest.mark.parametrize("n,M,k", [(64, 4096, 2), (32, 16, 1), (128, 65536, 1), (64, 256, 3),
                                   (512, 2**128, 1)])
def test_theorem2_matches_mpmath(n, M, k):
    assert bounds.log2_theorem2_lower(BoundParams(n, M, k)) == pytest.approx(mp_log2_t2(n, M, k), rel=1e-12)


def test_theorem2_frozen():
    assert bounds.log2_theorem2_lower(BoundParams(64, 4096, 2)) == pytest.approx(LOG2_T2_64_4096_2, rel=1e-13)


def test_theorem1():
    p = BoundParams(64, 256, 2)
    assert bounds.theorem1_rhs(p) == pytest.approx(256 ** (-4 / 64), rel=1e-14)
    assert bounds.exponent_bounded_k(p) == pytest.approx(-2 * 2 * 8 / 62, rel=1e-14)


def test_report_fields():
    r = bounds.report(64, 256, 1).as_dict()
    assert r["asymptotic_only"] is True
    assert set(r) >= {"thm1_rhs", "thm2_lower", "c_n", "log2_binom", "exponent_bounded_k"}


def test_bound_params_validation():
    for args in [(4, 8, 4), (4, 2, 3), (0, 8, 1), (8, 8, 0)]:
        with pytest.raises(InvalidParams):
            BoundParams(*args)


def test_gaussian_rd_and_shannon():
    assert bounds.gaussian_rd(0.25) == 1.0
    assert bounds.gaussian_dr(1.0) == 0.25
    assert bounds.shannon_lb_rate(100, 0.25) == pytest.approx(SLB_100_025, rel=1e-14)
    for bad in (0.0, -0.1, 1.5):
        with pytest.raises(DomainError):
            bounds.gaussian_rd(bad)
    with pytest.raises(DomainError):
        bounds.gaussian_dr(-1.0)
    with pytest.raises(DomainError):
        bounds.shannon_lb_rate(0, 0.5)


@given(st.floats(0.0, 20.0))
def test_rd_roundtrip(R):
    D = bounds.gaussian_dr(R)
    if D > 0:
        assert bounds.gaussian_rd(D) == pytest.approx(R, abs=1e-12)


def test_theorem2_below_theorem1_asymptotically():
    # the converse exponent tends to the achievable one from below
    for n in (64, 128, 256, 512):
        p = BoundParams(n, 2 ** (n // 4), 1)
        gap = bounds.log2_theorem2_lower(p) - bounds.exponent_bounded_k(p)
        assert gap < 0
