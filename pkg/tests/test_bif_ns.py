import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from expneuron.bif_ns import (CurveClass, detect_invariant_curve, detect_period,
                              fit_sqrt_scaling, locate_ns_transition, lyapunov_bc_closed_form,
                              lyapunov_closed_form, ns_analysis, ns_g_coefficients,
                              ns_lyapunov, ns_threshold, predict_curve_radius)
from expneuron.errors import ParameterRangeError, ResonanceError
from expneuron.map_core import MapParams
from oracles import textbook_cubic_d, ns_g_oracle

S, M = 1.1, 0.02
A_NS = math.exp(S - 1) - M + 1

ms = st.floats(0.001, 3.999).filter(lambda m: abs(m - 2) > 1e-3 and abs(m - 3) > 1e-3)
ss = st.floats(-2, 3)


def test_threshold_example():
    th = ns_threshold(S, M)
    assert th.a_ns == pytest.approx(2.085171, abs=1e-6)
    assert th.nondegenerate
    assert abs(th.mu0) == pytest.approx(1.0, abs=1e-12)


def test_resonances():
    th2 = ns_threshold(1.0, 2.0)
    assert th2.theta0 == pytest.approx(math.pi / 2) and not th2.nondegenerate
    th3 = ns_threshold(1.0, 3.0)
    assert th3.theta0 == pytest.approx(2 * math.pi / 3) and not th3.nondegenerate
    with pytest.raises(ResonanceError):
        ns_lyapunov(1.0, 3.0)
    an = ns_analysis(1.0, 2.0)
    assert an.d0 is None and an.g20 is not None


@pytest.mark.parametrize("m", [0.0, 4.0, -1.0, 5.0])
def test_m_out_of_range(m):
    with pytest.raises(ParameterRangeError):
        ns_threshold(1.0, m)


@given(ss, ms)
def test_threshold_invariants(s, m):
    th = ns_threshold(s, m)
    assert 0 < th.theta0 < math.pi
    assert abs(th.mu0) == pytest.approx(1.0, abs=1e-12)
    assert th.h0 == pytest.approx((2 - m) / 2)
    assert math.cos(th.theta0) == pytest.approx(th.h0, abs=1e-12)


@given(ss, ms)
def test_g_relations(s, m):
    g20, g11, g02, g21 = ns_g_coefficients(s, m)
    assert g02 == pytest.approx(-g20.conjugate(), rel=1e-12, abs=1e-300)
    assert g11.real == 0.0


@pytest.mark.parametrize("s, m", [(1.0, 1.0), (1.1, 0.02), (1.5, 0.7), (0.2, 3.5), (2.0, 2.4)])
def test_g_against_taylor_extraction(s, m):
    ref = ns_g_oracle(s, m)
    th = ns_threshold(s, m)
    assert ref["mu"] == pytest.approx(th.mu0, abs=1e-12)
    for name, val in zip(("g20", "g11", "g02", "g21"), ns_g_coefficients(s, m)):
        assert np.isfinite(val)
        assert val == pytest.approx(ref[name], abs=1e-9 * max(1.0, abs(ref[name])))


def test_lyapunov_example():
    d0, d0_alt, c1 = ns_lyapunov(S, M)
    assert d0 == pytest.approx(-2.9082e-3, rel=1e-4)
    assert d0 == pytest.approx(-(math.exp(0.1) / 16) * 0.02 * (1 + math.exp(0.1)), rel=1e-12)
    assert d0_alt < 0
    assert (cmath.exp(-1j * ns_threshold(S, M).theta0) * c1).real == d0


@given(ss, ms)
@settings(max_examples=300)
def test_lyapunov_methods(s, m):
    d0, d0_alt, _ = ns_lyapunov(s, m)
    assert d0 < 0 and d0_alt < 0
    assert abs(d0 - lyapunov_closed_form(s, m)) <= 1e-8 * abs(d0)
    assert d0_alt == pytest.approx(lyapunov_bc_closed_form(s, m), rel=1e-9)
    assert d0 / d0_alt == pytest.approx(m * m * (4 - m), rel=1e-9)


@given(ss, ms)
@settings(max_examples=100)
def test_lyapunov_textbook_formula(s, m):
    th = ns_threshold(s, m)
    d = textbook_cubic_d(th.mu0, *ns_g_coefficients(s, m))
    assert d == pytest.approx(lyapunov_closed_form(s, m), rel=1e-8)


def test_predict_radius():
    assert predict_curve_radius(S, M, A_NS) == 0.0
    assert predict_curve_radius(S, M, 2.1) == pytest.approx(1.594, abs=1e-3)
    r1 = predict_curve_radius(S, M, A_NS + 0.001)
    r4 = predict_curve_radius(S, M, A_NS + 0.004)
    assert r4 / r1 == pytest.approx(2.0, rel=0.1)
    with pytest.raises(ParameterRangeError):
        predict_curve_radius(S, M, A_NS - 0.01)
    with pytest.raises(ParameterRangeError):
        predict_curve_radius(S, M, A_NS + 0.2)


def test_curve_classes():
    below = detect_invariant_curve(MapParams(2.0, S, M))
    assert below.classification is CurveClass.FIXED_POINT
    above = detect_invariant_curve(MapParams(A_NS + 0.01, S, M))
    assert above.classification is CurveClass.CLOSED_CURVE
    assert above.mean_radius > 1e-7
    assert np.all(np.isfinite(above.xs))
    pts = above.points
    assert 2 < len(pts) < above.xs.size
    far = detect_invariant_curve(MapParams(2.3, S, M))
    assert far.classification is CurveClass.ESCAPED


def test_curve_requires_positive_m():
    with pytest.raises(ParameterRangeError):
        detect_invariant_curve(MapParams(2.1, S, 0.0))


def test_rotation_number_near_threshold():
    c = detect_invariant_curve(MapParams(A_NS + 1e-4, S, M), n_transient=1_000_000)
    th = ns_threshold(S, M)
    assert c.rotation_number == pytest.approx(th.theta0 / (2 * math.pi), rel=0.05)


def test_no_short_periods_on_curve():
    offsets = np.linspace(1e-3, 0.015, 12)
    periodic = 0
    for off in offsets:
        c = detect_invariant_curve(MapParams(A_NS + off, S, M), n_sample=4096)
        assert c.classification is CurveClass.CLOSED_CURVE
        periodic += detect_period(c, 64) is not None
    assert periodic == 0


def test_detect_period_on_synthetic_orbit():
    from expneuron.bif_ns import InvariantCurve
    k = np.arange(700)
    ang = 2 * np.pi * k * 3 / 7
    c = InvariantCurve(np.cos(ang), np.sin(ang), 1.0, 3 / 7, CurveClass.CLOSED_CURVE)
    assert detect_period(c) == 7


def test_localization_quick():
    a = locate_ns_transition(S, M, A_NS - 0.002, A_NS + 0.002)
    assert abs(a - A_NS) <= 1e-4


def test_bad_bracket():
    with pytest.raises(ParameterRangeError):
        locate_ns_transition(S, M, A_NS + 0.001, A_NS + 0.002)


def test_sqrt_law_near_threshold():
    """Measured radii follow C sqrt(a - a_ns) close to the bifurcation."""
    offsets = np.linspace(2e-4, 2e-3, 8)
    radii = [detect_invariant_curve(MapParams(A_NS + o, S, M), 2_000_000, 20_000).mean_radius
             for o in offsets]
    assert np.all(np.diff(radii) > 0)
    C, r2 = fit_sqrt_scaling(offsets, radii)
    assert C > 0 and r2 >= 0.999


def test_fit_sqrt_scaling_exact():
    off = np.linspace(0.01, 0.1, 10)
    C, r2 = fit_sqrt_scaling(off, 3.0 * np.sqrt(off))
    assert C == pytest.approx(3.0) and r2 == pytest.approx(1.0)
