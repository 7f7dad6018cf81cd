import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nhbattery.analytic import (
    LinearSolution,
    max_power,
    max_transfer_energy,
    power_closed_form,
    psi_a_closed_form,
    psi_b_closed_form,
    storage_energy_closed_form,
    transfer_energy_closed_form,
)
from nhbattery.core import SpectralRegion, pt_linear

from oracles import reference_dimer


@pytest.mark.parametrize("kappa,gamma", [(0.5, 0.3), (0.5, 0.5), (0.5, 0.7), (0.2, 0.0)])
def test_initial_condition(kappa, gamma):
    sol = LinearSolution(kappa, gamma)
    assert psi_b_closed_form(sol, 0.0) == 0
    assert psi_a_closed_form(sol, 0.0) == 1
    assert storage_energy_closed_form(sol, 0.0) == 1.0


def test_receiver_amplitude_examples():
    assert abs(psi_b_closed_form(LinearSolution(0.5, 0.5), 2.0)) == pytest.approx(1.0, rel=1e-15)
    assert abs(psi_b_closed_form(LinearSolution(0.5, 0.3), math.pi / 0.8)) == \
        pytest.approx(1.25, rel=1e-14)
    # phase convention -kappa (sin w0 t + i cos w0 t) S(t)
    t = 0.7
    expected = -0.5 * t * (math.sin(t) + 1j * math.cos(t))
    assert psi_b_closed_form(LinearSolution(0.5, 0.5), t) == pytest.approx(expected, rel=1e-15)


def test_transfer_energy_examples():
    assert transfer_energy_closed_form(LinearSolution(0.5, 0.5), 2.0) == pytest.approx(1.0)
    assert transfer_energy_closed_form(LinearSolution(0.5, 0.3), math.pi / 0.8) == \
        pytest.approx(1.5625, rel=1e-14)
    lam = math.sqrt(0.24)
    e = transfer_energy_closed_form(LinearSolution(0.5, 0.7), 5.0)
    assert e == pytest.approx(0.25 / 0.24 * math.sinh(5 * lam) ** 2, rel=1e-14)


def test_transfer_energy_broken_against_ode():
    t = np.linspace(0, 5, 11)
    _, b = reference_dimer(pt_linear(0.5, 0.7), t)
    closed = transfer_energy_closed_form(LinearSolution(0.5, 0.7), t)
    np.testing.assert_allclose(closed[1:], np.abs(b[1:]) ** 2, rtol=1e-6)


def test_storage_energy_examples():
    assert storage_energy_closed_form(LinearSolution(0.5, 0.5), 2.0) == pytest.approx(4.0)
    assert storage_energy_closed_form(LinearSolution(0.5, 0.0), math.pi) == \
        pytest.approx(0.0, abs=1e-30)


def test_energy_is_modulus_of_amplitude():
    sol = LinearSolution(0.4, 0.25)
    t = np.linspace(0, 20, 57)
    np.testing.assert_array_equal(transfer_energy_closed_form(sol, t),
                                  transfer_energy_closed_form(sol, t))
    np.testing.assert_allclose(transfer_energy_closed_form(sol, t),
                               np.abs(psi_b_closed_form(sol, t)) ** 2, rtol=1e-13, atol=1e-300)


@pytest.mark.parametrize("kappa", [0.05, 0.25, 0.5])
def test_branches_meet_at_ep(kappa):
    t = np.linspace(0, 20, 201)
    ep = transfer_energy_closed_form(LinearSolution(kappa, kappa), t)
    for gamma in (kappa * (1 - 1e-6), kappa * (1 + 1e-6)):
        sol = LinearSolution(kappa, gamma)
        assert sol.region is not SpectralRegion.EXCEPTIONAL_POINT
        other = transfer_energy_closed_form(sol, t)
        assert np.max(np.abs(other[1:] - ep[1:]) / ep[1:]) < 1e-4


def test_branch_gap_near_ep_is_second_order():
    # E_unbroken/E_ep - 1 = -(kappa^2 - gamma^2) t^2/3 + O(t^4)
    kappa, t = 1.0, 20.0
    gamma = kappa * (1 - 1e-6)
    ratio = (transfer_energy_closed_form(LinearSolution(kappa, gamma), t)
             / transfer_energy_closed_form(LinearSolution(kappa, kappa), t))
    assert ratio - 1 == pytest.approx(-(kappa ** 2 - gamma ** 2) * t * t / 3, rel=1e-3)


def test_series_branch_is_continuous():
    # rate just above and below the series cutoff
    k = 0.5
    t = np.linspace(0, 20, 101)
    for rate in (0.99e-6, 1.01e-6):
        gamma = math.sqrt(k * k - rate * rate)
        sol = LinearSolution(k, gamma, tol=1e-15)
        S, _ = sol.shape(t)
        exact = np.sin(rate * t) / rate
        np.testing.assert_allclose(S, exact, rtol=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 1.0), st.floats(0.05, 1.0))
def test_matches_independent_ode(kappa, gamma):
    t = np.linspace(0, 20, 401)
    a, b = reference_dimer(pt_linear(kappa, gamma), t)
    sol = LinearSolution(kappa, gamma)
    for closed, ref in ((psi_b_closed_form(sol, t), b), (psi_a_closed_form(sol, t), a)):
        assert np.max(np.abs(closed - ref) / (1 + np.abs(ref))) < 1e-6


@given(st.floats(0.05, 1.0), st.floats(0.0, 1.0), st.floats(0.01, 10.0))
def test_norm_rate_identity(kappa, gamma, t):
    sol = LinearSolution(kappa, gamma)
    h = 1e-5

    def norm(x):
        return abs(psi_a_closed_form(sol, x)) ** 2 + abs(psi_b_closed_form(sol, x)) ** 2

    lhs = (norm(t + h) - norm(t - h)) / (2 * h)
    rhs = 2 * gamma * (abs(psi_a_closed_form(sol, t)) ** 2 - abs(psi_b_closed_form(sol, t)) ** 2)
    assert abs(lhs - rhs) < 1e-6 * (1 + norm(t))


@given(st.floats(0.01, 2.0), st.floats(0.0, 40.0))
def test_hermitian_exchange(kappa, t):
    sol = LinearSolution(kappa, 0.0)
    total = transfer_energy_closed_form(sol, t) + storage_energy_closed_form(sol, t)
    assert total == pytest.approx(1.0, rel=1e-13)


@pytest.mark.parametrize("kappa,gamma,t_end", [
    (0.5, 0.3, 20.0), (0.5, 0.3, 2.0), (0.5, 0.5, 20.0), (0.5, 0.7, 20.0), (0.3, 0.0, 20.0),
    (0.05, 0.049, 20.0),
])
def test_maxima_against_dense_scan(kappa, gamma, t_end):
    sol = LinearSolution(kappa, gamma)
    t = np.linspace(0, t_end, 400001)
    e = transfer_energy_closed_form(sol, t)
    p = power_closed_form(sol, t)
    assert max_transfer_energy(sol, t_end) == pytest.approx(e.max(), rel=1e-8)
    assert max_power(sol, t_end) == pytest.approx(p.max(), rel=1e-8)
    assert max_transfer_energy(sol, t_end) >= e.max() * (1 - 1e-12)


def test_unbroken_peak_energy():
    sol = LinearSolution(0.5, 0.3)
    assert max_transfer_energy(sol, 20.0) == pytest.approx(0.25 / 0.16, rel=1e-15)
    assert max_transfer_energy(LinearSolution(0.5, 0.0), 20.0) == pytest.approx(1.0)
