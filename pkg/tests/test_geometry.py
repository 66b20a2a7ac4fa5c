from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rfisim.errors import DomainError
from rfisim.geometry import (
    EARTH,
    EarthModel,
    angle_between,
    apparent_nadir,
    direction_angles,
    enu_direction,
    flat_earth_error,
    horizon_nadir,
    nadir_from_apparent,
    path_difference,
    path_difference_approx,
    reflection_geometry,
    satellite_position,
)

deg = np.deg2rad


@pytest.mark.parametrize("alpha_n, alpha_s", [(10.0, 10.63), (35.0, 37.56), (65.0, 74.41)])
def test_apparent_nadir_golden(alpha_n, alpha_s):
    assert np.rad2deg(apparent_nadir(deg(alpha_n), 400e3)) == pytest.approx(alpha_s, abs=0.01)


def test_apparent_nadir_zero_and_horizon():
    assert apparent_nadir(0.0, 705e3) == 0.0
    assert np.rad2deg(horizon_nadir(400e3)) == pytest.approx(70.21, abs=0.05)
    assert np.rad2deg(apparent_nadir(deg(70.21), 400e3)) == pytest.approx(90.0, abs=0.05)
    assert np.rad2deg(nadir_from_apparent(deg(90.0), 400e3)) == pytest.approx(70.21, abs=0.05)
    assert nadir_from_apparent(0.0, 400e3) == 0.0


def test_apparent_nadir_past_horizon_raises():
    with pytest.raises(DomainError):
        apparent_nadir(deg(75.0), 400e3)
    with pytest.raises(DomainError):
        apparent_nadir(-0.1, 400e3)


def test_apparent_nadir_monotone_and_above_nadir():
    a = np.linspace(0, horizon_nadir(400e3) - 1e-6, 2000)
    s = apparent_nadir(a, 400e3)
    assert np.all(np.diff(s) > 0)
    assert np.all(s >= a)


def test_custom_earth_model():
    small = EarthModel(R=1.0e6)
    assert apparent_nadir(deg(30.0), 400e3, small) > apparent_nadir(deg(30.0), 400e3)
    with pytest.raises(ValueError):
        EarthModel(R=0.0)


@given(st.floats(0.0, np.pi / 2), st.floats(300e3, 1000e3))
def test_nadir_round_trip(alpha_s, h_a):
    # arcsin is evaluated near 1 at the horizon, where a rounding error of
    # eps in its argument moves the angle by ~sqrt(2 eps)
    tol = 1e-9 if alpha_s < np.pi / 2 - 1e-4 else 1e-7
    assert apparent_nadir(nadir_from_apparent(alpha_s, h_a), h_a) == pytest.approx(alpha_s, abs=tol)


def test_round_trip_fig_caption_point():
    s = apparent_nadir(deg(35.0), 400e3)
    assert np.rad2deg(s) == pytest.approx(37.56, abs=0.01)
    assert np.rad2deg(nadir_from_apparent(s, 400e3)) == pytest.approx(35.0, abs=1e-9)


def test_path_difference_bounds():
    assert path_difference(10.0, 400e3, np.pi / 2) == pytest.approx(0.0, abs=1e-12)
    assert path_difference(10.0, 400e3, 0.0) == 20.0
    g = reflection_geometry(10.0, 400e3, deg(60.0))
    assert g.delta_d == pytest.approx(10.0, abs=1e-3)
    assert abs(g.delta_d - g.delta_d_approx) < 1e-6


def _naive_delta(h, hs, alpha_s):
    # image method with plain square roots; fine in long double at these magnitudes
    h, hs = np.longdouble(h), np.longdouble(hs)
    x = hs * np.tan(np.longdouble(alpha_s))
    return float(np.sqrt(x * x + (hs + h) ** 2) - np.sqrt(x * x + (hs - h) ** 2))


@pytest.mark.parametrize("alpha_s", [0.0, 0.3, 0.7, 1.0, 1.3, deg(80.0)])
def test_path_difference_matches_direct_evaluation(alpha_s):
    assert path_difference(12.0, 400e3, alpha_s) == pytest.approx(_naive_delta(12.0, 400e3, alpha_s), rel=1e-9)


def test_path_difference_relative_error_bulk(rng):
    n = 100_000
    h = rng.uniform(0.1, 30.0, n)
    hs = rng.uniform(400e3, 1000e3, n)
    a = rng.uniform(0.0, deg(80.0), n)
    exact = path_difference(h, hs, a)
    rel = np.abs(exact - path_difference_approx(h, a)) / exact
    assert rel.max() < 1e-4
    assert np.all((exact >= 0) & (exact <= 2 * h))


@settings(max_examples=200)
@given(st.floats(0.1, 30.0), st.floats(100e3, 2000e3), st.floats(0.0, float(deg(80.0))))
def test_reflection_geometry_properties(h, hs, a):
    g = reflection_geometry(h, hs, a)
    assert 0.0 <= g.delta_d <= 2 * h + 1e-12
    assert 0.0 <= g.x_1R <= g.x_1R + g.x_RS
    # the two horizontal legs add up to the node-satellite separation
    assert g.x_1R + g.x_RS == pytest.approx(hs * np.tan(a), rel=1e-9, abs=1e-9)
    # the incidence angle is close to, but not the same as, the look angle
    assert g.alpha_i <= a + 1e-15
    assert a - g.alpha_i <= h / hs
    if hs >= 1000 * h and a > 0:
        assert abs(g.delta_d - g.delta_d_approx) / g.delta_d < 1e-4


def test_reflection_geometry_uses_exact_incidence():
    g = reflection_geometry(30.0, 3000.0, deg(60.0))
    assert g.alpha_i == pytest.approx(np.arctan(3000.0 / 3030.0 * np.tan(deg(60.0))), rel=1e-12)
    assert g.alpha_i != pytest.approx(deg(60.0), abs=1e-4)


def test_reflection_geometry_los_angle():
    g = reflection_geometry(3.0, 400e3, deg(37.56))
    # measured from the downward vertical: pi - alpha_s up to the node-height correction
    assert g.alpha_los == pytest.approx(np.pi - deg(37.56), abs=1e-5)


def test_reflection_geometry_preconditions():
    with pytest.raises(DomainError):
        reflection_geometry(10.0, 500.0, 0.3)
    with pytest.raises(DomainError):
        reflection_geometry(10.0, 400e3, deg(85.0))


def test_flat_earth_error():
    assert flat_earth_error(0.0) == 0.0
    e30 = flat_earth_error(30.0)
    assert 1e-5 <= e30 < 1e-4
    R = EARTH.R
    sagitta = R - np.sqrt(R * R - 1000.0**2)
    assert flat_earth_error(1000.0) == pytest.approx(sagitta, rel=0.01)
    x = np.linspace(0, 5000, 100)
    assert np.all(np.diff(flat_earth_error(x)) > 0)
    with pytest.raises(ValueError):
        flat_earth_error(-1.0)


@pytest.mark.parametrize("h", [1.6, 10.0, 15.0])
def test_flat_earth_error_validity_regime(h):
    a = np.linspace(0, deg(80.0), 81)
    g = reflection_geometry(h, 400e3, a)
    assert np.all(g.x_1R < 90.0)
    assert np.all(flat_earth_error(g.x_1R) < 1e-3)


def test_flat_earth_error_ten_metre_node():
    g = reflection_geometry(10.0, 400e3, deg(80.0))
    assert g.x_1R < 60.0
    assert flat_earth_error(g.x_1R) == pytest.approx(g.x_1R**2 / (2 * EARTH.R), rel=1e-6)
    assert flat_earth_error(30.0) == pytest.approx(7.06e-5, rel=0.01)


@pytest.mark.xfail(strict=True, reason="sagitta at 30 m * tan(80 deg) = 170 m is 2.3 mm")
def test_flat_earth_error_below_1mm_up_to_30m_nodes():
    g = reflection_geometry(30.0, 400e3, deg(80.0))
    assert flat_earth_error(g.x_1R) < 1e-3


def test_satellite_position():
    assert np.allclose(satellite_position(0.0, 1.3, 400e3), [0, 0, 400e3])
    p = satellite_position(deg(10.0), 0.0, 400e3)
    az, el = direction_angles(p)
    assert np.rad2deg(np.pi / 2 - el) == pytest.approx(10.63, abs=0.01)
    assert az == pytest.approx(0.0)
    p = satellite_position(deg(65.0), deg(90.0), 400e3)
    assert p[0] > 0 and abs(p[1]) < 1e-6 * p[0]
    assert np.rad2deg(np.arctan2(p[0], p[2])) == pytest.approx(74.41, abs=0.01)
    c = (100.0, -50.0, 0.0)
    assert np.allclose(satellite_position(deg(20.0), 2.0, 400e3, c) - c, satellite_position(deg(20.0), 2.0, 400e3))


def test_direction_helpers():
    v = enu_direction(deg(90.0), 0.0)
    assert np.allclose(v, [1, 0, 0])
    az, el = direction_angles(enu_direction(deg(200.0), deg(-30.0)))
    assert np.rad2deg(az) == pytest.approx(200.0)
    assert np.rad2deg(el) == pytest.approx(-30.0)
    assert angle_between([1, 0, 0], [0, 1, 0]) == pytest.approx(np.pi / 2)
    assert angle_between([1, 0, 0], [1, 1e-9, 0]) == pytest.approx(1e-9, rel=1e-6)
