import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gravcat.core import CONSTANTS, TANTALUM_DENSITY
from gravcat.forces import MatterDensity1D, density_force, net_force_on_probe, point_force, self_energy

G = CONSTANTS.G


def test_point_force_romero_isart_estimate():
    # quoted estimate ~2e-30 N for M = 0.38 ng, m = 4 ng, L = 1 pm, D = 3 um
    f0 = point_force(0.38e-12, 4e-12, 1e-12, 3e-6)
    assert f0 == pytest.approx(2e-30, rel=0.1)


def test_point_force_oracle():
    M, m, L, D = 0.38e-12, 4e-12, 1e-12, 3e-6
    assert point_force(M, m, L, D) == pytest.approx(6.6743e-11 * M * m * L / (2 * D ** 3), rel=1e-4)


def test_point_force_zero_separation():
    assert point_force(1.0, 1.0, 0.0, 1.0) == 0.0


def test_point_force_cubic_law():
    assert point_force(1e-13, 4e-12, 1e-12, 6e-6) * 8 == pytest.approx(
        point_force(1e-13, 4e-12, 1e-12, 3e-6), rel=1e-15)


def test_point_force_rejects_bad_distance():
    with pytest.raises(ValueError):
        point_force(1, 1, 1, 0.0)


def test_density_force_tantalum_estimate():
    # quoted enhanced estimate 0.6e-28 N
    f0 = density_force(TANTALUM_DENSITY, 4e-12, 10e-12, 1e-6, 5e-6)
    assert f0 == pytest.approx(0.6e-28, rel=0.1)


def test_density_force_far_away_is_zero():
    assert density_force(1e4, 1e-12, 1e-12, math.inf, 1e-6) == 0.0


@given(st.floats(1e3, 2e4), st.floats(1e-6, 1e-5), st.floats(1e-6, 1e-5))
def test_density_force_matches_point_force(rho, a, R):
    M = 4 / 3 * math.pi * R ** 3 * rho
    assert density_force(rho, 4e-12, 1e-12, a, R) == pytest.approx(
        point_force(M, 4e-12, 1e-12, R + a), rel=1e-12)


def _cat_density(M, sigma, L, weights, n=8193):
    half = 0.5 * L + 12 * sigma
    return MatterDensity1D.gaussian_cat(M, sigma, L, -half, half, n, weights)


def test_symmetric_cat_gives_no_net_force(romero):
    p = romero
    f0 = point_force(p.sphere_mass, p.probe_mass, p.cat_separation_L, p.probe_distance_D)
    rho = _cat_density(p.sphere_mass, p.component_width, p.cat_separation_L, (0.5, 0.5))
    assert abs(net_force_on_probe(rho, 0.0, p.probe_offset_y, p.probe_mass)) < 1e-6 * f0


def test_collapsed_density_matches_point_force():
    # D >> packet width: the Gaussian acts as a point mass at +L/2
    M, m, L, D, sigma = 1e-13, 4e-12, 5e-7, 2e-6, 1e-8
    y = math.sqrt(D * D - L * L / 4)
    rho = _cat_density(M, sigma, L, (1.0, 0.0))
    f = net_force_on_probe(rho, 0.0, y, m)
    # the probe is pulled towards +x with horizontal component G M m (L/2) / D^3
    assert f == pytest.approx(point_force(M, m, L, D), rel=0.01)


def test_half_mass_gives_half_force():
    M, m, L, D, sigma = 1e-13, 4e-12, 5e-7, 2e-6, 1e-8
    y = math.sqrt(D * D - L * L / 4)
    full = net_force_on_probe(_cat_density(M, sigma, L, (1.0, 0.0)), 0.0, y, m)
    half = net_force_on_probe(_cat_density(M, sigma, L, (0.5, 0.0)), 0.0, y, m)
    assert half == pytest.approx(0.5 * full, rel=0.01)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 1.0))
def test_force_is_antisymmetric_in_weights(w):
    M, m, L, y, sigma = 1e-13, 4e-12, 5e-7, 2e-6, 1e-8
    a = net_force_on_probe(_cat_density(M, sigma, L, (w, 1 - w), 2049), 0.0, y, m)
    b = net_force_on_probe(_cat_density(M, sigma, L, (1 - w, w), 2049), 0.0, y, m)
    scale = point_force(M, m, L, math.hypot(y, L / 2))
    assert a == pytest.approx(-b, abs=1e-12 * scale)


def test_probe_inside_support_rejected():
    rho = MatterDensity1D(0.0, 1e-9, np.ones(11))
    with pytest.raises(ValueError):
        net_force_on_probe(rho, 5e-9, 0.0, 1.0)


def test_density_total_mass():
    rho = _cat_density(1e-13, 1e-8, 5e-7, (0.5, 0.5))
    assert rho.total_mass() == pytest.approx(1e-13, rel=1e-9)


def test_negative_density_rejected():
    with pytest.raises(ValueError):
        MatterDensity1D(0.0, 1.0, np.array([1.0, -1.0]))


def test_self_energy_direct_evaluation():
    # -G M^2 / (4 L) at M = 1e-13 kg, L = 1 pm
    assert self_energy(1e-13, 1e-12) == pytest.approx(-1.7e-25, rel=0.03)
    assert self_energy(1e-13, 1e-12) == pytest.approx(-G * 1e-26 / 4e-12, rel=1e-15)


def test_self_energy_scaling():
    assert self_energy(1e-13, 0.5e-12) == pytest.approx(2 * self_energy(1e-13, 1e-12))
    assert self_energy(0.0, 1e-12) == 0.0
