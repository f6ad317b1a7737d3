import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from kdvmeanfield.exceptions import OrderingError
from kdvmeanfield.meanfield import (
    POST_CRITICAL,
    PRE_CRITICAL,
    WellSpec,
    boundaries,
    critical_time,
    dsw_edge_modulus,
    dsw_edge_parametric,
    edp_potential,
    interaction_point,
    interaction_time,
    lw_mean,
    mean_field,
    region_at,
    rw_profile,
)
from kdvmeanfield.whitham import Genus1State, cnoidal_mean

from .test_elliptic import agm_E, agm_K

W = WellSpec(-1.0, 20.0)


def edp_oracle(l1, l2, well):
    """f from the defining integral, split at the midpoint so each end has one singularity."""
    U0, l = well.U0, well.l
    mid = 0.5 * l2
    # quad's algebraic weight carries the inverse square root at each end
    left = integrate.quad(lambda b: math.sqrt((b - U0) / (-b * (b - l1))), l2, mid,
                          weight="alg", wvar=(-0.5, 0), epsabs=0, epsrel=1e-13)[0]
    right = integrate.quad(lambda b: math.sqrt((b - U0) / ((b - l2) * (b - l1))), mid, 0.0,
                           weight="alg", wvar=(0, -0.5), epsabs=0, epsrel=1e-13)[0]
    return l - l / math.pi * (left + right)


@pytest.mark.parametrize("U0,l,want", [(-1, 20, 5.0), (-2, 20, 2.5), (-1, 100, 25.0)])
def test_critical_time(U0, l, want):
    assert critical_time(WellSpec(U0, l)) == pytest.approx(want, rel=1e-15)


def test_wellspec_validation():
    with pytest.raises(ValueError):
        WellSpec(1.0, 20.0)
    with pytest.raises(ValueError):
        WellSpec(-1.0, 0.0)


def test_boundaries_pre_critical_example():
    b = boundaries(W, 3.0)
    assert b.regime == PRE_CRITICAL
    assert b.as_tuple() == pytest.approx((-36.0, -6.0, 2.0, 20.0), abs=1e-12)


def test_boundaries_continuity_at_critical_time():
    ts = critical_time(W)
    lo, hi = boundaries(W, ts * (1 - 1e-13)), boundaries(W, ts)
    assert hi.regime == POST_CRITICAL
    assert hi.x_P == pytest.approx(-10.0, abs=1e-9)
    assert abs(lo.x_P - hi.x_P) <= 1e-9
    # the DSW-side edge starts at the critical point (t*, -l/2) which is also where x_P' lands
    assert lo.x_P_prime == pytest.approx(-10.0, abs=1e-9)
    just_after = boundaries(W, ts * (1 + 1e-6))
    assert just_after.x_P_prime == pytest.approx(-10.0, abs=1e-3)


def test_boundaries_collapse_at_small_t():
    b = boundaries(W, 1e-9)
    assert b.as_tuple() == pytest.approx((0.0, 0.0, 20.0, 20.0), abs=1e-7)


def test_boundaries_rejects_nonpositive_time():
    with pytest.raises(ValueError):
        boundaries(W, 0.0)


@settings(max_examples=50, deadline=None)
@given(U0=st.floats(-3.0, -0.1), l=st.floats(1.0, 200.0), frac=st.floats(0.001, 0.999))
def test_pre_critical_ordering(U0, l, frac):
    well = WellSpec(U0, l)
    b = boundaries(well, frac * critical_time(well))
    assert list(b.as_tuple()) == sorted(b.as_tuple())


@pytest.mark.parametrize("t", [6.0, 10.0, 40.0])
def test_post_critical_ordering(t):
    b = boundaries(W, t)
    assert b.x_L <= b.x_P_prime <= b.x_P <= b.x_R


def test_dsw_edge_limits_and_scaling():
    t, x = dsw_edge_parametric(W, 1.0 - 1e-9)
    assert t == pytest.approx(critical_time(W), rel=1e-5)
    assert x == pytest.approx(-W.l / 2, rel=1e-5)
    t5, x5 = dsw_edge_parametric(W, 0.5)
    assert math.isfinite(t5) and t5 > critical_time(W)
    # independent evaluation with the AGM oracle
    mu = agm_E(0.5) / agm_K(0.5)
    den = 1.5 * mu - 1.0
    assert t5 == pytest.approx((1 + 0.5 * (1 - mu) / den) * 20 / (4 * math.sqrt(0.5)), rel=1e-12)
    assert x5 == pytest.approx(-(1 + 0.75 / den) * 20 / (2 * math.sqrt(0.5)), rel=1e-12)
    t2, x2 = dsw_edge_parametric(WellSpec(-1.0, 40.0), 0.5)
    assert (t2, x2) == pytest.approx((2 * t5, 2 * x5), rel=1e-13)


def test_dsw_edge_after_critical_time_everywhere():
    ts = critical_time(W)
    for m in np.linspace(0.01, 0.99, 50):
        assert dsw_edge_parametric(W, m)[0] > ts


def test_dsw_edge_modulus_inverts():
    for m in (0.2, 0.5, 0.9):
        t, _ = dsw_edge_parametric(W, m)
        assert dsw_edge_modulus(W, t) == pytest.approx(m, rel=1e-9)
    with pytest.raises(ValueError):
        dsw_edge_parametric(W, 1.0)
    with pytest.raises(ValueError):
        dsw_edge_modulus(W, 4.0)


def test_rw_profile_examples():
    well = WellSpec(-1.0, 30.0)
    assert rw_profile(well, 0.0, 10.0) == pytest.approx(-0.5, abs=1e-15)
    assert rw_profile(well, 30.0, 7.0) == 0.0
    assert rw_profile(well, 30.0 - 6.0 * 2.0, 2.0) == pytest.approx(-1.0, abs=1e-15)
    with pytest.raises(ValueError):
        rw_profile(well, 1.0, 0.0)


def test_rw_profile_continuous_and_monotone():
    x = np.linspace(-10, 40, 5001)
    u = rw_profile(WellSpec(-1.0, 30.0), x, 3.0)
    assert np.all(np.diff(u) >= 0)
    assert np.max(np.abs(np.diff(u))) <= (x[1] - x[0]) / 18.0 + 1e-15


def test_mean_field_and_regions_follow_boundaries():
    t = 3.0
    b = boundaries(W, t)
    assert region_at(W, b.x_L - 1, t) == "L"
    assert region_at(W, 0.5 * (b.x_L + b.x_P), t) == "DSW"
    assert region_at(W, 0.5 * (b.x_P + b.x_P_prime), t) == "plateau"
    assert region_at(W, 0.5 * (b.x_P_prime + b.x_R), t) == "RW"
    assert region_at(W, b.x_R + 1, t) == "R"
    assert mean_field(W, 0.5 * (b.x_P + b.x_P_prime), t) == -1.0
    b = boundaries(W, 20.0)
    assert region_at(W, 0.5 * (b.x_P_prime + b.x_P), 20.0) == "LW"
    assert region_at(W, 10.0, 0.0) == "plateau"


def test_edp_potential_limits():
    assert edp_potential(-0.7, 0.0, W) == W.l
    assert edp_potential(-1.0, -1.0, W) == pytest.approx(0.0, abs=1e-14)
    # lambda1 = lambda2 = U0: the integral is int dbeta / sqrt(-beta (beta - U0)) = pi, so f = 0
    near = edp_potential(-1.0, -1.0 + 1e-10, W)
    assert near == pytest.approx(0.0, abs=1e-3)
    with pytest.raises(OrderingError):
        edp_potential(-0.2, -0.5, W)


@pytest.mark.parametrize("lam", [(-0.9, -0.3), (-1.0, -0.5), (-0.6, -0.59), (-0.99, -0.01)])
def test_edp_potential_against_oracle(lam):
    assert edp_potential(*lam, W) == pytest.approx(edp_oracle(*lam, W), rel=1e-10, abs=1e-11)


def test_edp_potential_homogeneous_in_l():
    a = edp_potential(-0.9, -0.3, WellSpec(-1.0, 20.0))
    b = edp_potential(-0.9, -0.3, WellSpec(-1.0, 70.0))
    assert b == pytest.approx(3.5 * a, rel=1e-13)


def test_interaction_time_finite_and_step_stable():
    t1 = interaction_time(-0.9, -0.3, W)
    t2 = interaction_time(-0.9, -0.3, W, step=4e-5)
    assert math.isfinite(t1) and t1 > 0
    assert t2 == pytest.approx(t1, rel=1e-6)
    with pytest.raises(OrderingError):
        interaction_time(-0.3, -0.9, W)


def test_interaction_time_grows_as_train_decays():
    times = [interaction_time(-0.9, -0.9 + d, W) for d in (0.6, 0.3, 0.1, 0.03)]
    assert all(b > a for a, b in zip(times, times[1:]))
    assert times[-1] > 5 * times[0]


@pytest.mark.parametrize("m", [0.3, 0.5, 0.8])
def test_interaction_point_meets_dsw_edge(m):
    # on the DSW side of the interaction region lambda1 -> U0 and m = (lambda2 - lambda1)/(-lambda1)
    lam1 = W.U0 * (1 - 1e-9)
    pt = interaction_point(lam1, lam1 * (1 - m), W)
    t, x = dsw_edge_parametric(W, m)
    assert pt.t == pytest.approx(t, rel=0.02)
    assert pt.x == pytest.approx(x, rel=0.02)


def test_lw_mean():
    assert lw_mean(-0.9, -0.3) == pytest.approx(0.6, abs=1e-15)
    assert lw_mean(-0.5, -0.5) == 0.0
    assert lw_mean(-0.5, -0.5, 0.2) == pytest.approx(0.2)
    with pytest.raises(OrderingError):
        lw_mean(-0.3, -0.9)


def test_lw_mean_and_cnoidal_mean_share_the_zero_amplitude_limit():
    # both tend to lambda3 as lambda2 -> lambda1; the cnoidal mean deviates at O(m^2),
    # the train formula at O(m) (see the decisions ledger)
    l1, l3 = -1.0, 0.0
    m = 1e-3
    l2 = l1 + m * (l3 - l1)
    c = cnoidal_mean(Genus1State(l1, l2, l3))
    assert abs(c - l3) <= m**2
    assert abs(lw_mean(l1, l2, l3) - l3) == pytest.approx(m, rel=1e-9)
