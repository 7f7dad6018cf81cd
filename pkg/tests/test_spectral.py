import math

import pytest
from hypothesis import given, strategies as st
from scipy.optimize import brentq

from nhbattery.core import LinearGain, SpectralRegion, SystemParams, pt_linear, pt_saturable
from nhbattery.coupling import DEFAULT_COIL, kappa_of_distance
from nhbattery.spectral import (
    NoCrossing,
    UnsupportedConfiguration,
    characteristic_residual,
    exceptional_arc,
    linear_eigenfrequencies,
    nonlinear_eigenfrequencies,
    saturated_gain,
)

pos = st.floats(0.0, 2.0, allow_nan=False)


def _max_residual(es, params):
    return max(characteristic_residual(w, g, params.gamma, params.kappa, params.omega_a)
               for w, g in zip(es.frequencies, es.mode_gains))


def test_linear_examples():
    es = linear_eigenfrequencies(pt_linear(0.5, 0.3))
    assert es.region is SpectralRegion.UNBROKEN
    assert es.frequencies == pytest.approx((1.4, 0.6), abs=1e-15)
    assert _max_residual(es, pt_linear(0.5, 0.3)) < 1e-12

    es = linear_eigenfrequencies(pt_linear(0.5, 0.5))
    assert es.region is SpectralRegion.EXCEPTIONAL_POINT
    assert es.frequencies == (1.0, 1.0)

    es = linear_eigenfrequencies(pt_linear(0.5, 0.7))
    assert es.region is SpectralRegion.BROKEN
    assert es.frequencies[0] == pytest.approx(1 + 0.4898979485566356j, abs=1e-12)
    assert es.frequencies[1] == pytest.approx(1 - 0.4898979485566356j, abs=1e-12)
    assert _max_residual(es, pt_linear(0.5, 0.7)) < 1e-12


def test_linear_rejects_unbalanced_or_detuned():
    with pytest.raises(UnsupportedConfiguration):
        linear_eigenfrequencies(SystemParams(1, 1, 0.5, 0.3, LinearGain(0.2)))
    with pytest.raises(UnsupportedConfiguration):
        linear_eigenfrequencies(SystemParams(1, 1.1, 0.5, 0.3, LinearGain(0.3)))
    with pytest.raises(UnsupportedConfiguration):
        nonlinear_eigenfrequencies(pt_linear(0.5, 0.3))


def test_nonlinear_examples():
    es = nonlinear_eigenfrequencies(pt_saturable(0.5, 0.3))
    assert es.frequencies == pytest.approx((1.0, 1.4, 0.6), abs=1e-15)
    assert es.g_sat == 0.3

    es = nonlinear_eigenfrequencies(pt_saturable(0.5, 0.7))
    assert es.region is SpectralRegion.BROKEN
    assert es.g_sat == pytest.approx(0.25 / 0.7, rel=1e-15)
    assert es.frequencies == pytest.approx((1.0, 1 + 1j * (0.25 / 0.7 - 0.7)), abs=1e-15)

    assert nonlinear_eigenfrequencies(pt_saturable(0.5, 0.5)).g_sat == pytest.approx(0.5)


def test_nonlinear_lossless_drops_center_mode():
    es = nonlinear_eigenfrequencies(pt_saturable(0.5, 0.0))
    assert es.frequencies == (1.5, 0.5)
    assert _max_residual(es, pt_saturable(0.5, 0.0)) == 0.0


def test_residual_examples():
    assert characteristic_residual(1.4, 0.3, 0.3, 0.5) < 1e-12
    assert characteristic_residual(1.0, 0.25 / 0.7, 0.7, 0.5) < 1e-12
    assert characteristic_residual(0.0, 0.0, 0.0, 0.0, 1.0) == 1.0


@given(pos, pos)
def test_every_mode_solves_characteristic_equation(kappa, gamma):
    for params, solver in ((pt_linear(kappa, gamma), linear_eigenfrequencies),
                           (pt_saturable(kappa, gamma), nonlinear_eigenfrequencies)):
        assert _max_residual(solver(params), params) < 1e-10


@given(pos, pos)
def test_linear_conjugate_or_real(kappa, gamma):
    es = linear_eigenfrequencies(pt_linear(kappa, gamma))
    w1, w2 = es.frequencies
    if es.region is SpectralRegion.BROKEN:
        assert w1 == pytest.approx(w2.conjugate()) and w1.real == 1.0
    else:
        assert w1.imag == 0 and w2.imag == 0


def test_g_sat_continuous_at_ep():
    k = 0.5
    below = saturated_gain(k, k * (1 - 1e-6))
    above = saturated_gain(k, k * (1 + 1e-6))
    assert abs(below - above) < 1e-5


@given(st.floats(0.01, 2), st.floats(0.001, 1), st.floats(0.001, 1))
def test_g_sat_rises_then_falls(kappa, u, v):
    lo, hi = sorted((u, v))
    # below the EP
    assert saturated_gain(kappa, kappa * lo) <= saturated_gain(kappa, kappa * hi)
    # above the EP
    assert saturated_gain(kappa, kappa / lo) <= saturated_gain(kappa, kappa / hi)


def test_arc_analytic_curves():
    assert exceptional_arc(lambda d: math.exp(-d), math.exp(-1), (0, 5)) == pytest.approx(1, rel=1e-9)
    assert exceptional_arc(lambda d: 0.5 / (1 + d * d), 0.25, (0, 10)) == pytest.approx(1, rel=1e-9)


def test_arc_on_coil_curve_matches_root_finder():
    curve = lambda d: kappa_of_distance(DEFAULT_COIL, d)
    d_star = exceptional_arc(curve, 0.04, (0.2, 1.2))
    oracle = brentq(lambda d: curve(d) - 0.04, 0.2, 1.2, xtol=1e-14)
    assert d_star == pytest.approx(oracle, rel=1e-8)
    assert abs(curve(d_star) - 0.04) <= 1e-10 * 0.04


def test_arc_no_crossing():
    with pytest.raises(NoCrossing):
        exceptional_arc(lambda d: math.exp(-d), 2.0, (0, 5))
