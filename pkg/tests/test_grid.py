import math

import numpy as np
import pytest
from scipy import stats

from gravcat.core import TheoryId
from gravcat.grid import (centered_grid, collapse_center_density, grid_trajectory, grw_hit,
                          make_cat_state, poisson_next_event, read_state, sample_collapse_center,
                          write_state)


def cat(L=30.0, sigma=1.0, n=4096, weights=(1.0, 1.0), margin=40.0):
    x0, dx = centered_grid(L, sigma, n, margin)
    return make_cat_state(sigma, L, x0, dx, n, weights=weights)


def test_zero_separation_is_single_gaussian():
    s = cat(L=0.0)
    oracle = np.exp(-s.x ** 2 / 2) / math.sqrt(2 * math.pi)
    assert np.allclose(s.probability(), oracle, atol=1e-10)
    assert s.width() == pytest.approx(1.0, rel=1e-8)


def test_cat_is_symmetric():
    s = cat(L=10.0)
    assert abs(s.mean()) < 1e-10 * 10.0
    assert np.sum(s.probability()[s.x > 0]) * s.dx == pytest.approx(0.5, abs=1e-6)


def test_grid_must_be_power_of_two():
    with pytest.raises(ValueError):
        make_cat_state(1.0, 10.0, -20.0, 0.01, 3000)


def test_hit_preserves_norm():
    s = grw_hit(cat(), 15.0, 2.0)
    assert s.norm() == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("sigma_g", [0.3, 1.0, 4.0])
def test_hit_on_gaussian_narrows_to_product_width(sigma_g):
    s = cat(L=0.0, sigma=2.0, n=8192)
    out = grw_hit(s, 0.0, sigma_g)
    # |psi|^2 std sigma0 times a Gaussian of std sigma_g gives std sigma0 sigma_g / sqrt(sigma0^2 + sigma_g^2)
    expected = 2.0 * sigma_g / math.sqrt(4.0 + sigma_g ** 2)
    assert out.width() == pytest.approx(expected, rel=1e-3)


def test_hit_at_plus_minimum_localises():
    # L = 5 um, sigma_grw = 0.1 um, centre at +L/2
    L, sg = 5e-6, 1e-7
    x0, dx = centered_grid(L, 5e-8, 8192, 60)
    s = make_cat_state(5e-8, L, x0, dx, 8192, 1e-17)
    out = grw_hit(s, L / 2, sg)
    assert np.sum(out.probability()[out.x >= 0]) * out.dx >= 0.999


def test_hit_outside_grid_rejected():
    with pytest.raises(ValueError):
        grw_hit(cat(), 1e6, 1.0)


def test_centre_density_is_normalised():
    X, rho = collapse_center_density(cat(), 2.0)
    assert np.trapezoid(rho, X) == pytest.approx(1.0, abs=1e-8)


def test_centre_sampling_ks_against_quadrature():
    L, sigma, sg = 30.0, 1.0, 2.0
    draws = sample_collapse_center(cat(L, sigma), sg, np.random.default_rng(1), size=10_000)
    s2 = math.sqrt(sigma ** 2 + sg ** 2)
    cdf = lambda x: 0.5 * (stats.norm.cdf(x, L / 2, s2) + stats.norm.cdf(x, -L / 2, s2))
    assert stats.kstest(draws, cdf).statistic < 0.02


def test_centre_sampling_symmetric_cat():
    draws = sample_collapse_center(cat(), 2.0, np.random.default_rng(2), size=10_000)
    frac = np.mean(draws > 0)
    assert abs(frac - 0.5) < 3 * math.sqrt(0.25 / draws.size)


def test_centre_sampling_follows_weights():
    L = 30.0
    s = cat(L, weights=(math.sqrt(0.7), math.sqrt(0.3)))
    draws = sample_collapse_center(s, 0.5, np.random.default_rng(3), size=10_000)
    frac = np.mean(np.abs(draws - L / 2) < L / 4)
    assert abs(frac - 0.7) < 3 * math.sqrt(0.21 / draws.size)


def test_centre_sampling_single_packet_mean():
    s = cat(L=0.0)
    draws = sample_collapse_center(s, 0.5, np.random.default_rng(4), size=10_000)
    se = math.sqrt(1.0 + 0.25) / math.sqrt(draws.size)
    assert abs(draws.mean()) < 3 * se


def test_poisson_zero_rate_never_fires(rng):
    assert poisson_next_event(0.0, rng) == math.inf


def test_poisson_mean(rng):
    draws = np.array([poisson_next_event(1.0, rng) for _ in range(100_000)])
    assert draws.mean() == pytest.approx(1.0, rel=0.01)


def test_poisson_memoryless(rng):
    draws = np.array([poisson_next_event(2.0, rng) for _ in range(100_000)])
    late = draws[draws > 0.5] - 0.5
    se = late.std(ddof=1) / math.sqrt(late.size)
    assert abs(late.mean() - draws.mean()) < 3 * math.hypot(se, draws.std() / math.sqrt(draws.size))


def test_state_file_round_trip(tmp_path):
    s = cat(n=256, L=5.0)
    s = s.with_psi(s.psi * np.exp(1j * s.x))
    write_state(tmp_path / "psi.bin", s)
    back = read_state(tmp_path / "psi.bin")
    assert np.array_equal(back.psi, s.psi)
    assert (back.x0, back.dx, back.mass) == (s.x0, s.dx, s.mass)


def test_grid_rejects_non_semiclassical(romero):
    with pytest.raises(ValueError):
        grid_trajectory(TheoryId.CQT_Newton, romero, 0.01, 1e-3, 0)


def test_grid_nh_zero(pino):
    rec, events = grid_trajectory(TheoryId.NH, pino, 0.01, 1e-3, 0, n=256)
    assert np.all(rec.forces == 0) and events == []


def test_grid_grw_romero_isart_hit_is_ineffective(romero):
    rec, events = grid_trajectory(TheoryId.GRW_mN, romero, 0.01, 1e-3, 0, n=512,
                                  forced_hits=[(0.005, None)], spontaneous=False)
    assert len(events) == 1
    assert events[0].post_width == pytest.approx(events[0].pre_width, rel=1e-3)
    assert np.max(np.abs(rec.forces)) < 1e-3 * rec.f0


def test_grid_grw_pino_forced_hit_switches_force(pino):
    p = pino.replace(slit_arrival_time=0.0)
    rec, events = grid_trajectory(TheoryId.GRW_mN, p, 0.4, 1e-3, 3, forced_hits=[(0.2, None)],
                                  spontaneous=False)
    before = rec.forces[rec.times < 0.2]
    after = rec.forces[rec.times > 0.2]
    assert np.max(np.abs(before)) < 1e-3 * rec.f0
    assert np.allclose(np.abs(after), rec.f0, rtol=0.01)


def test_grid_is_seed_deterministic(pino):
    a = grid_trajectory(TheoryId.CSL_mN, pino, 0.05, 1e-3, 11, n=512)
    b = grid_trajectory(TheoryId.CSL_mN, pino, 0.05, 1e-3, 11, n=512)
    assert [e.time for e in a[1]] == [e.time for e in b[1]]
    assert [e.center for e in a[1]] == [e.center for e in b[1]]
    assert np.array_equal(a[0].forces, b[0].forces)
