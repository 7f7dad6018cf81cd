import math

import pytest
from hypothesis import given, strategies as st

from nhbattery.core import (
    AmplitudeState,
    LinearGain,
    SaturableGain,
    SpectralRegion,
    SystemParams,
    average_power,
    classify_region,
    eval_gain,
    storage_energy,
    transfer_energy,
)

rates = st.floats(0.0, 10.0, allow_nan=False)


def test_saturable_gain_values():
    gain = SaturableGain(3.0, 0.05)
    assert eval_gain(gain, 0.0) == pytest.approx(6.05, rel=1e-15)
    assert eval_gain(gain, 1e8) == pytest.approx(-0.05, rel=1e-12)
    assert gain.small_signal == pytest.approx(6.05)


def test_linear_gain_ignores_amplitude():
    assert eval_gain(LinearGain(0.3), 17.2) == 0.3


@given(st.floats(0.1, 10), st.floats(0.001, 1), st.floats(0, 50), st.floats(0, 50))
def test_saturable_gain_decreasing(g1, gamma1, a, b):
    gain = SaturableGain(g1, gamma1)
    lo, hi = sorted((a, b))
    if hi - lo > 1e-6 * (1 + hi):
        assert eval_gain(gain, hi) < eval_gain(gain, lo)


@given(st.floats(0.1, 10), st.floats(0.001, 1))
def test_saturable_gain_zero_crossing(g1, gamma1):
    gain = SaturableGain(g1, gamma1)
    x0 = math.sqrt(2 * (g1 + gamma1) / gamma1 - 1)
    assert eval_gain(gain, x0 * (1 - 1e-6)) > 0 > eval_gain(gain, x0 * (1 + 1e-6))
    assert gain.intensity_at(0.0) == pytest.approx(x0 * x0, rel=1e-12)


def test_saturable_gain_validation():
    with pytest.raises(ValueError):
        SaturableGain(0.0, 0.05)
    with pytest.raises(ValueError):
        SaturableGain(3.0, -0.1)


@pytest.mark.parametrize("gamma,region", [
    (0.3, SpectralRegion.UNBROKEN),
    (0.5, SpectralRegion.EXCEPTIONAL_POINT),
    (0.7, SpectralRegion.BROKEN),
])
def test_classify_examples(gamma, region):
    assert classify_region(0.5, gamma, 1e-9) is region


def test_classify_tolerance_is_relative():
    assert classify_region(0.5, 0.5 * (1 + 5e-10)) is SpectralRegion.EXCEPTIONAL_POINT
    assert classify_region(0.5, 0.5 * (1 + 5e-9)) is SpectralRegion.BROKEN
    with pytest.raises(ValueError):
        classify_region(0.5, 0.5, tol=0.0)


@given(rates, rates, st.floats(1e-3, 1e3))
def test_classify_scale_invariant(kappa, gamma, c):
    # away from the tolerance band the tag must not depend on the overall scale
    if abs(kappa - gamma) > 1e-6 * max(kappa, gamma, 1) * max(c, 1 / c):
        assert classify_region(kappa, gamma) is classify_region(c * kappa, c * gamma)


def test_transfer_energy_examples():
    assert transfer_energy(AmplitudeState(1, 0), 1.0) == 0.0
    k, t = 0.5, 2.0
    psi_b = -k * t * (math.sin(t) + 1j * math.cos(t))
    assert transfer_energy(AmplitudeState(0, psi_b), 1.0) == pytest.approx(1.0, rel=1e-15)
    assert transfer_energy(AmplitudeState(0, 3 + 4j), 2.0) == pytest.approx(50.0)
    assert storage_energy(AmplitudeState(2j, 0), 1.5) == pytest.approx(6.0)


def test_average_power_examples():
    assert average_power(1.0, 2.0) == 0.5
    assert average_power(0.25 * 16, 4.0) == pytest.approx(1.0)  # P = kappa^2 t at the EP
    assert average_power(0.0, 1.0) == 0.0
    for t in (0.0, -1.0):
        with pytest.raises(ValueError):
            average_power(1.0, t)


@given(st.complex_numbers(max_magnitude=1e6), st.complex_numbers(max_magnitude=1e6),
       st.floats(0.01, 10), st.floats(1e-6, 1e6))
def test_energy_and_power_nonnegative(a, b, w, t):
    e = transfer_energy(AmplitudeState(a, b), w)
    assert e >= 0 and average_power(e, t) >= 0


def test_amplitude_state_defaults_and_coercion():
    s = AmplitudeState()
    assert (s.psi_a, s.psi_b, s.t) == (1 + 0j, 0j, 0.0)
    assert isinstance(AmplitudeState(1, 2).psi_b, complex)
    assert not AmplitudeState(float("nan"), 0).is_finite()


def test_system_params_validation():
    with pytest.raises(ValueError):
        SystemParams(kappa=-0.1)
    with pytest.raises(ValueError):
        SystemParams(gamma=-0.1)
    with pytest.raises(ValueError):
        SystemParams(omega_a=0.0)
    with pytest.raises(TypeError):
        SystemParams(gain=0.3)
    assert SystemParams().with_kappa(0.2).kappa == 0.2
