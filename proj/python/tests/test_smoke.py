"""End-to-end smoke tests for the Python bindings."""

import math

import pytest

import tcdirac


def test_constants():
    assert tcdirac.SPEED_OF_LIGHT_AU == pytest.approx(137.035999)
    assert tcdirac.FM_PER_AU == pytest.approx(52917.7249)


def test_sommerfeld():
    # c^2 (sqrt(1 - (Z/c)^2) - 1) for Z = 92.
    c = tcdirac.SPEED_OF_LIGHT_AU
    ref = c * c * (math.sqrt(1.0 - (92.0 / c) ** 2) - 1.0)
    assert tcdirac.sommerfeld_1s(92.0) == pytest.approx(ref, rel=1e-14)


def test_stationary_u91():
    r = tcdirac.stationary_1s(92.0, "point")
    assert r["e_1s"] == pytest.approx(-4861.1979, abs=1e-3)
    rs = tcdirac.stationary_1s(92.0, "sphere")
    assert rs["e_1s"] > r["e_1s"]


def test_bad_model_rejected():
    with pytest.raises(ValueError):
        tcdirac.stationary_1s(92.0, "cube")


def test_collide_1d_short():
    r = tcdirac.collide_1d(b_fm=50.0, steps=300, timeseries_stride=150)
    assert abs(r["norm_final"] - 1.0) < 1e-8
    assert 0.0 < r["p_1s"] < 1.0
    assert r["p_minus"] >= 0.0
    assert len(r["series"]) >= 2
    assert r["series"][0]["t"] < r["series"][-1]["t"]


def test_collide_2d_null():
    r = tcdirac.collide_2d(
        b_fm=47.6,
        z_proj=0.0,
        steps=20,
        n_rho=8,
        n_z=24,
        rho_max_fm=4000.0,
        z_min_fm=-8000.0,
        z_max_fm=8000.0,
        z_target_fm=-4000.0,
    )
    assert r["p_1s"] == pytest.approx(1.0, abs=1e-7)
    assert abs(r["norm_final"] - 1.0) < 1e-9
    assert r["p_ct"] < 1e-3
