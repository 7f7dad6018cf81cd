import math

import numpy as np
import pytest
import scipy.special
from hypothesis import given, settings, strategies as st

from nhbattery.coupling import (
    DEFAULT_COIL,
    MU0,
    CoilGeometry,
    CouplingCurve,
    coupling_curve,
    ellipke,
    kappa_of_distance,
    loop_mutual_inductance,
    mutual_inductance,
    self_inductance,
)

from oracles import neumann_mutual


def test_ellipke_at_zero():
    assert ellipke(0.0) == (math.pi / 2, math.pi / 2)


@pytest.mark.parametrize("m", np.linspace(0, 0.99, 34))
def test_ellipke_matches_scipy(m):
    K, E = ellipke(m)
    assert K == pytest.approx(scipy.special.ellipk(m), rel=1e-14)
    assert E == pytest.approx(scipy.special.ellipe(m), rel=1e-14)


@given(st.floats(1e-10, 0.99))
def test_legendre_relation(m):
    K, E = ellipke(m)
    Kc, Ec = ellipke(1.0 - m)
    assert abs(E * Kc + Ec * K - K * Kc - math.pi / 2) < 1e-12


def test_ellipke_domain():
    with pytest.raises(ValueError):
        ellipke(1.0)
    with pytest.raises(ValueError):
        ellipke(-0.1)


def test_loop_pair_against_neumann_example():
    assert loop_mutual_inductance(0.1, 0.1, 0.1) == pytest.approx(neumann_mutual(0.1, 0.1, 0.1),
                                                                  rel=1e-8)


@settings(max_examples=10, deadline=None)
@given(st.floats(0.05, 0.5), st.floats(0.05, 0.5), st.floats(0.1, 2.0))
def test_loop_pair_against_neumann_random(a, b, zfac):
    z = zfac * max(a, b)
    assert loop_mutual_inductance(a, b, z) == pytest.approx(neumann_mutual(a, b, z), rel=1e-8)


def test_far_field_dipole_limit():
    geom = CoilGeometry(0.1, 2, 5e-3, 1e-3)
    d = 20 * geom.radius
    dipole = MU0 * math.pi * geom.radius ** 4 * geom.turns ** 2 / (2 * d ** 3)
    assert mutual_inductance(geom, geom, d) == pytest.approx(dipole, rel=0.01)
    k = kappa_of_distance(geom, d)
    assert k == pytest.approx(0.5 * dipole / self_inductance(geom), rel=0.02)


def test_reciprocity():
    a = CoilGeometry(0.2, 3, 4e-3, 1e-3)
    b = CoilGeometry(0.3, 2, 6e-3, 2e-3)
    assert mutual_inductance(a, b, 0.4) == pytest.approx(mutual_inductance(b, a, 0.4), rel=1e-14)


def test_mutual_is_sum_over_turns():
    geom = CoilGeometry(0.2, 2, 1e-2, 1e-3)
    d = 0.3
    expected = sum(loop_mutual_inductance(0.2, 0.2, d + zb - za)
                   for za in (-5e-3, 5e-3) for zb in (-5e-3, 5e-3))
    assert mutual_inductance(geom, geom, d) == pytest.approx(expected, rel=1e-14)


def test_single_loop_self_inductance():
    geom = CoilGeometry(0.1, 1, 2e-3, 1e-3)
    assert self_inductance(geom) == pytest.approx(MU0 * 0.1 * (math.log(800) - 2), rel=1e-15)
    assert self_inductance(geom) == pytest.approx(5.887e-7, rel=1e-3)


def test_turn_scaling_bounds():
    one = self_inductance(CoilGeometry(0.1, 1, 2e-3, 1e-3))
    two = self_inductance(CoilGeometry(0.1, 2, 2e-3, 1e-3))
    assert 2 * one < two < 4 * one


@given(st.floats(0.02, 1.0), st.integers(1, 5), st.floats(0.0005, 0.005))
def test_self_inductance_positive(radius, turns, wire):
    geom = CoilGeometry(radius, turns, 2.5 * wire, wire) if radius > wire else None
    if geom is not None:
        assert self_inductance(geom) > 0


def test_ratio_to_kappa():
    # any geometry with M/L = 0.2 gives kappa = 0.1 omega0
    geom = DEFAULT_COIL
    L = self_inductance(geom)
    d = __import__("scipy.optimize").optimize.brentq(
        lambda x: mutual_inductance(geom, geom, x) / L - 0.2, 0.02, 2.0, xtol=1e-15)
    assert kappa_of_distance(geom, d) == pytest.approx(0.1, rel=1e-9)
    assert kappa_of_distance(geom, d, omega0=2.0) == pytest.approx(0.2, rel=1e-9)


def test_default_curve_decreasing():
    curve = coupling_curve(DEFAULT_COIL, np.linspace(0.2, 1.2, 51))
    assert np.all(np.diff(curve.kappas) < 0)
    assert 0.05 < curve.kappas[0] < 0.15 and curve.kappas[-1] < 0.005


def test_curve_csv_round_trip():
    curve = coupling_curve(DEFAULT_COIL, [0.2, 0.5, 1.0], omega0=2.0)
    text = curve.to_csv()
    assert text.splitlines()[0] == "d_m,kappa_per_omega0"
    assert CouplingCurve.from_csv(text, omega0=2.0) == curve


def test_curve_validation():
    with pytest.raises(ValueError):
        CouplingCurve((0.2, 0.3), (0.01, 0.02))
    with pytest.raises(ValueError):
        CouplingCurve((0.3, 0.2), (0.02, 0.01))


@pytest.mark.parametrize("kwargs", [dict(radius=1e-3, wire_radius=2e-3), dict(turns=0),
                                    dict(turns=1.5), dict(axial_pitch=1e-3)])
def test_geometry_validation(kwargs):
    with pytest.raises(ValueError):
        CoilGeometry(**kwargs)


def test_domain_errors():
    with pytest.raises(ValueError):
        mutual_inductance(DEFAULT_COIL, DEFAULT_COIL, 0.0)
    with pytest.raises(ValueError):
        loop_mutual_inductance(0.1, 0.1, 0.0)
