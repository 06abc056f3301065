import math

import pytest
import scipy.constants as sc

from gravcat.core import CONSTANTS, CollapseParams, TheoryId
from gravcat.forces import point_force
from gravcat.rates import (ZERO_FAMILY, cqt_decay_rate, csl_cm_rate, csl_lambda, dp_damping_time,
                           dp_effective_theory_valid, dp_noise_temperature, dp_reference_mass,
                           grw_rate, k_critical_time, k_critical_width, pointer_orthogonality,
                           probe_collapse_rate, rate_report, td_csl_backaction_damping,
                           td_dp_damping_time, wafer_nucleon_count)

AMU = CONSTANTS.amu


def within_factor(x, ref, k):
    return ref / k <= x <= ref * k


# ---------------------------------------------------------------- CQT

def test_cqt_decay_rate():
    assert cqt_decay_rate(0.0, 1e-3) == 0.0
    assert cqt_decay_rate(10.0, 0.02) == pytest.approx(1.0)
    assert cqt_decay_rate(400.0, 1e-3) == pytest.approx(4 * cqt_decay_rate(200.0, 1e-3))


# ---------------------------------------------------------------- GRW

def test_grw_rate_values():
    # one hit every 100 s at 1e14 nucleons
    assert grw_rate(1e14) == pytest.approx(1e-2)
    # N lambda at 1e18 nucleons; the prose quotes 1e-2 1/s but 1e18 * 1e-16 = 1e2
    assert grw_rate(1e18) == pytest.approx(1e2)
    assert grw_rate(0) == 0.0


# ---------------------------------------------------------------- CSL

def test_csl_lambda_value():
    lam = csl_lambda(1e-36, 1e-7)
    assert lam == pytest.approx(1e-36 / (8 * math.pi ** 1.5 * 1e-21), rel=1e-14)
    assert lam == pytest.approx(2.245e-17, rel=1e-3)
    assert within_factor(lam, 1e-17, 3)


def test_csl_lambda_scaling():
    assert csl_lambda(2e-36, 1e-7) == pytest.approx(2 * csl_lambda(1e-36, 1e-7))
    assert csl_lambda(1e-36, 2e-7) == pytest.approx(csl_lambda(1e-36, 1e-7) / 8)


def test_csl_cm_rate():
    assert within_factor(csl_cm_rate(1e14, 1), 1e11, 3)
    assert csl_cm_rate(1, 1) == pytest.approx(csl_lambda())
    assert csl_cm_rate(2e14) == pytest.approx(4 * csl_cm_rate(1e14))


# ---------------------------------------------------------------- DP

def test_dp_damping_time():
    tau = dp_damping_time(1e-13, 1e-15)
    assert tau == pytest.approx(math.sqrt(math.pi) * sc.hbar * 1e-15 / (sc.G * 1e-26), rel=1e-12)
    assert tau == pytest.approx(2.8e-13, rel=0.01)
    assert within_factor(tau, 1e-13, 3)


def test_dp_damping_scaling():
    assert dp_damping_time(2e-13) == pytest.approx(dp_damping_time(1e-13) / 4)
    assert dp_damping_time(1e-13, 2e-15) == pytest.approx(2 * dp_damping_time(1e-13, 1e-15))


def test_dp_reference_mass_at_one_kelvin():
    m_r = dp_reference_mass(1.0, 1e-15)
    assert within_factor(m_r / AMU, 1e11, 3)
    assert dp_noise_temperature(m_r, 1e-15) == pytest.approx(1.0, rel=1e-12)


def test_dp_noise_temperature_scaling():
    assert dp_noise_temperature(2e-16) == pytest.approx(dp_noise_temperature(1e-16) / 2)


def test_dp_noise_temperature_rescaled_units():
    units = CONSTANTS.__class__(hbar=1.0, k_B=1.0)
    assert dp_noise_temperature(1.0, 1.0, units) == pytest.approx(1 / 8)


def test_dp_validity_flag():
    assert not dp_effective_theory_valid(1e8 * AMU)
    assert dp_effective_theory_valid(1e14 * AMU)


# ---------------------------------------------------------------- TD

def test_td_csl_backaction():
    rate = td_csl_backaction_damping(1e-13, 1e-6, 1e-24)
    assert rate == pytest.approx(7.0e-29, rel=0.01)
    assert within_factor(rate, 1e-29, 10)
    assert td_csl_backaction_damping(1e-13, 0.0) == 0.0
    assert td_csl_backaction_damping(1e-13, 2e-6) == pytest.approx(2 * td_csl_backaction_damping(1e-13, 1e-6))


def test_td_dp_damping_time():
    assert td_dp_damping_time(1e-13, 1e-15) == pytest.approx(1.4e-13, rel=0.01)
    for m in (1e-20, 1e-13, 1e-5):
        assert td_dp_damping_time(m) == pytest.approx(dp_damping_time(m) / 2, rel=1e-15)


# ---------------------------------------------------------------- K-model

def test_k_critical_width():
    a_c = k_critical_width(1e-13, 1e-6, True)
    oracle = (1e-6 / sc.physical_constants["Planck length"][0]) ** (2 / 3) * sc.hbar / (1e-13 * sc.c)
    assert a_c == pytest.approx(oracle, rel=1e-12)
    assert within_factor(a_c, 1e-11, 10)


def test_k_critical_width_scaling():
    assert k_critical_width(2e-27, 1e-15, False) == pytest.approx(k_critical_width(1e-27, 1e-15, False) / 8)
    assert k_critical_width(1e-13, 8e-6) == pytest.approx(4 * k_critical_width(1e-13, 1e-6))


def test_k_critical_time():
    tau = k_critical_time(1e-13, 1e-11)
    assert tau == pytest.approx(1e-13 * 1e-22 / sc.hbar, rel=1e-12)
    assert within_factor(tau, 0.1, 10)
    assert k_critical_time(1e-13, 2e-11) == pytest.approx(4 * tau)
    assert k_critical_time(0.0, 1e-11) == 0.0


# ---------------------------------------------------------------- pointer and probe

def test_earth_is_not_a_projective_pointer(romero):
    f0 = point_force(romero.sphere_mass, romero.probe_mass, romero.cat_separation_L,
                     romero.probe_distance_D)
    check = pointer_orthogonality(romero, 6e24, f0, 1.0)
    assert check.kinematic_deflection < 1e-50
    assert not check.projective


def test_probe_is_a_projective_pointer(romero):
    check = pointer_orthogonality(romero, romero.probe_mass, 1e-30, 1.0)
    assert check.pointer_separation_used == 1e-6
    assert check.projective


def test_zero_force_gives_no_deflection(romero):
    check = pointer_orthogonality(romero, 6e24, 0.0, 1.0)
    assert check.kinematic_deflection == 0.0 and not check.projective


def test_probe_collapse_rate():
    rate = probe_collapse_rate(1e20, 1e14)
    assert rate == pytest.approx(1e4, rel=1e-5)
    assert abs(rate - probe_collapse_rate(1e20, 0)) / rate < 1e-5
    assert probe_collapse_rate(0, 0) == 0.0


def test_wafer_nucleon_count_order():
    # a 3 mm x 3 mm x 675 um silicon pointer holds ~1e22 nucleons
    assert 1e21 < wafer_nucleon_count() < 1e23


# ---------------------------------------------------------------- report

def test_report_cqt(romero):
    r = rate_report(TheoryId.CQT_Newton, romero)
    assert r.effective_cm_rate == pytest.approx(20.0)
    assert r.collapse_width is None and r.collapse_effective_on_cat


def test_report_grw_romero_width_ineffective(romero):
    r = rate_report(TheoryId.GRW_mN, romero)
    assert r.collapse_width == 1e-7
    assert not r.collapse_effective_on_cat
    assert r.intrinsic_rate == pytest.approx(romero.sphere_nucleons() * 1e-16)


def test_report_zero_family_is_probe_limited(romero):
    for t in ZERO_FAMILY:
        r = rate_report(t, romero)
        assert r.probe_driven_rate > 20.0
        assert r.effective_cm_rate == pytest.approx(20.0)


def test_report_td_csl_backaction(romero):
    r = rate_report(TheoryId.TD_CSL, romero)
    assert r.backaction_rate == pytest.approx(
        td_csl_backaction_damping(romero.sphere_mass, romero.cat_separation_L))


def test_report_nh_has_no_rate(pino):
    r = rate_report(TheoryId.NH, pino)
    assert r.intrinsic_rate == 0.0 and not r.hits_within_coherence


def test_report_serialises(pino):
    d = rate_report(TheoryId.DP_mN, pino).as_dict()
    assert d["theory"] == "DP_mN" and d["damping_time"] > 0


def test_report_respects_collapse_params(pino):
    slow = rate_report(TheoryId.GRW_mN, pino, CollapseParams(lambda_grw=1e-20))
    assert slow.intrinsic_rate == pytest.approx(pino.sphere_nucleons() * 1e-20)
