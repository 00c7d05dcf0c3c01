import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from expneuron.bif_pd import (CycleStability, beta, center_manifold, eval_B, eval_C,
                              find_period2, pd_coefficient, pd_threshold, reduced_map)
from expneuron.equilibria import linear_data
from expneuron.errors import (DegenerateThresholdError, NoCycleFoundError,
                              ParameterRangeError, ValidityError)
from expneuron.map_core import MapParams, State, step_shifted
from oracles import CM_NAMES, center_manifold_oracle, restricted_map_oracle, taylor2, \
    shifted_map_complex


def a_for(m0, s):
    """``a`` placing the flip threshold at ``m0`` for this ``s``."""
    return math.exp(s - 1.0) - 1.0 - m0 / 2.0


def test_threshold_examples():
    assert pd_threshold(-1.5, 1.0) == pytest.approx(3.0)
    assert pd_threshold(0.0, 1.0) is None
    assert pd_threshold(2.1, 1.1) is None


@given(st.floats(0.01, 20), st.floats(-1, 3))
def test_threshold_gives_multiplier_minus_one(m0, s):
    a = a_for(m0, s)
    lin = linear_data(MapParams(a, s, pd_threshold(a, s)))
    assert min(abs(lin.lambda_plus + 1), abs(lin.lambda_minus + 1)) <= 1e-9 * max(1.0, m0)


def test_center_manifold_at_m0_3():
    cm = center_manifold(-1.5, 1.0)
    assert (cm.b1, cm.b2, cm.b3) == pytest.approx((1.5, 0.5, -0.5))
    assert (cm.c1, cm.c2, cm.c3) == pytest.approx((2.0, 4.0 / 3.0, 8.0))
    assert (cm.a1, cm.a2, cm.a3) == (0.0, 0.0, 0.0)


def test_degenerate_thresholds():
    with pytest.raises(DegenerateThresholdError):
        center_manifold(a_for(4.0, 1.0), 1.0)
    with pytest.raises(DegenerateThresholdError):
        pd_coefficient(0.0, 1.0)


@pytest.mark.parametrize("a, s", [(-1.5, 1.0), (a_for(0.1, 2.0), 2.0), (a_for(5.0, 2.0), 2.0),
                                  (-3.5, 0.5)])
def test_center_manifold_invariance(a, s):
    m0 = pd_threshold(a, s)
    ref = center_manifold_oracle(a, s, m0)
    cm = center_manifold(a, s)
    for name in CM_NAMES:
        assert getattr(cm, name) == pytest.approx(ref[name], rel=1e-8, abs=1e-10)


def test_restricted_map_matches_sigmas():
    a, s = -1.5, 1.0
    m0 = pd_threshold(a, s)
    ref = center_manifold_oracle(a, s, m0)
    for mu in (0.0, 0.01, -0.02):
        s1, s2, s3 = restricted_map_oracle(a, s, m0, ref, mu)
        red = reduced_map(a, s, m0 + mu)
        # sigma1 is exact to mu**2, sigma2 to mu, sigma3 at mu = 0
        assert red.sigma1 == pytest.approx(s1, abs=1e-9 + abs(mu) ** 3 * 100)
        assert red.sigma2 == pytest.approx(s2, abs=1e-9 + mu ** 2 * 100)
        assert red.sigma3 == pytest.approx(s3, abs=1e-9 + abs(mu) * 100)


def test_reduced_map_examples():
    red = reduced_map(-1.5, 1.0, 3.1)
    assert red.sigma1 == pytest.approx(-0.72)
    assert red.sigma2 == pytest.approx(0.4 / 3)
    assert red.sigma3 == pytest.approx(-2.0 / 3)
    at = reduced_map(-1.5, 1.0, 3.0)
    assert at.sigma1 == -1.0 and at.sigma2 == 0.0
    assert red(0.1) == pytest.approx(-0.072 + 0.01 * 0.4 / 3 - 0.001 * 2 / 3)
    with pytest.raises(ParameterRangeError):
        reduced_map(-1.5, 1.0, 3.6)


def test_dsigma1_dm():
    m0, h = 3.0, 1e-6
    d = (reduced_map(-1.5, 1.0, m0 + h).sigma1 - reduced_map(-1.5, 1.0, m0 - h).sigma1) / (2 * h)
    assert d == pytest.approx(-2.0 / (m0 - 4.0), rel=1e-8)


def test_pd_coefficient_example():
    pa = pd_coefficient(-1.5, 1.0)
    assert pa.m0 == pytest.approx(3.0)
    assert pa.c0_cm == pytest.approx(-2.0 / 3.0)
    assert pa.c0_inv == pytest.approx(-2.0 / 3.0)
    assert pa.sign_s == -1
    assert pa.lambda3 == pytest.approx(-0.5)
    assert pa.beta(pa.m0) == 0.0
    assert pa.dbeta_dm_at_m0 == pytest.approx(-2.0)


@given(st.floats(0.01, 20), st.floats(-1, 3))
@settings(max_examples=500)
def test_sign_agreement_and_beta(m0, s):
    if abs(m0 - 4.0) < 1e-6:
        return
    pa = pd_coefficient(a_for(m0, s), s)
    assert math.copysign(1, pa.c0_cm) == math.copysign(1, pa.c0_inv) == math.copysign(1, m0 - 4)
    assert pa.sign_s == (1 if m0 > 4 else -1)
    red = reduced_map(pa.a, s, pa.m0)
    assert pa.c0_cm == red.sigma2 ** 2 + red.sigma3
    assert beta(pa.m0, pa.m0) == 0.0
    h = 1e-6 * max(1.0, abs(pa.m0 - 4))
    slope = (beta(pa.m0, pa.m0 + h) - beta(pa.m0, pa.m0 - h)) / (2 * h)
    assert slope == pytest.approx(pa.dbeta_dm_at_m0, rel=1e-5)


def test_beta_is_minus_one_minus_sigma1():
    for m in (2.9, 3.0, 3.05, 3.3):
        assert beta(3.0, m) == pytest.approx(-1.0 - reduced_map(-1.5, 1.0, m).sigma1, abs=1e-14)


def test_multilinear_forms():
    assert eval_B(np.array([1.0, 7.0]), np.array([1.0, -2.0]), 1.0) == pytest.approx([-1.0, 0.0])
    a, s = -1.5, 1.2
    q = np.array([1.0, math.exp(s - 1) - a - 1])
    assert eval_C(q, q, q, s) == pytest.approx([-math.exp(s - 1), 0.0])


@given(st.lists(st.floats(-10, 10), min_size=4, max_size=4), st.floats(-2, 2))
def test_B_symmetric(v, s):
    z, u = np.array(v[:2]), np.array(v[2:])
    assert np.array_equal(eval_B(z, u, s), eval_B(u, z, s))


def test_multilinear_forms_match_taylor():
    a, s, m = -1.5, 1.3, 3.0
    E = math.exp(s - 1)

    def fx(x, _):
        return shifted_map_complex(a, s, m, x, 0.0)[0]

    c = taylor2(fx, 0.1, 1.0, 16)
    e1 = np.array([1.0, 0.0])
    assert 2 * c[2, 0].real == pytest.approx(eval_B(e1, e1, s)[0], rel=1e-10)
    assert 6 * c[3, 0].real == pytest.approx(eval_C(e1, e1, e1, s)[0], rel=1e-10)
    assert eval_B(e1, e1, s)[0] == pytest.approx(-E)


def _mapparams(m0, s, mu):
    return MapParams(a_for(m0, s), s, m0 + mu)


def test_period2_unstable_small_m0():
    m0, s = 0.1, 2.0
    p = _mapparams(m0, s, 0.02)
    cyc = find_period2(p)
    assert cyc.stability is CycleStability.UNSTABLE
    assert cyc.residual <= 1e-10
    z1 = step_shifted(p, cyc.x1)
    assert abs(z1.x - cyc.x2.x) <= 1e-10 and abs(z1.y - cyc.x2.y) <= 1e-10
    z2 = step_shifted(p, z1)
    assert abs(z2.x - cyc.x1.x) <= 1e-10 and abs(z2.y - cyc.x1.y) <= 1e-10
    assert cyc.x1 != cyc.x2
    b = beta(m0, p.m)
    assert cyc.normal_form_amplitude == pytest.approx(math.sqrt(-b), rel=0.25)


def test_period2_amplitude_law():
    m0, s = 0.1, 2.0
    errs = []
    for mu in (0.02, 0.01, 0.005, 0.001):
        cyc = find_period2(_mapparams(m0, s, mu))
        errs.append(abs(cyc.normal_form_amplitude / math.sqrt(abs(beta(m0, m0 + mu))) - 1))
    assert errs == sorted(errs, reverse=True)
    assert errs[-1] < 1e-3


@pytest.mark.parametrize("m0, s", [(0.05, 2.0), (0.5, 1.5), (1.0, 2.0), (2.0, 2.0),
                                   (3.5, 2.0), (4.5, 2.0), (5.0, 2.0), (8.0, 3.0), (12.0, 3.0)])
def test_period2_stability_follows_threshold(m0, s):
    cyc = find_period2(_mapparams(m0, s, 0.02))
    assert cyc.residual <= 1e-10
    expected = CycleStability.UNSTABLE if m0 < 4 else CycleStability.STABLE
    assert cyc.stability is expected


def test_no_cycle_at_threshold_or_below():
    m0, s = 0.1, 2.0
    with pytest.raises(NoCycleFoundError):
        find_period2(_mapparams(m0, s, 0.0))
    with pytest.raises(NoCycleFoundError):
        find_period2(_mapparams(m0, s, -0.02))
    with pytest.raises(ValidityError):
        find_period2(MapParams(a_for(m0, s), s, 0.0))


def test_explicit_radius():
    cyc = find_period2(_mapparams(0.1, 2.0, 0.02), radius=0.2)
    assert cyc.residual <= 1e-10
