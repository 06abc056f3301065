"""Closed-form collapse and decoherence rates, critical widths and damping times.

All inputs and outputs are SI.  :func:`rate_report` gathers the numbers
relevant to one theory applied to one experiment protocol.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

from .core import CONSTANTS, CollapseParams, ExperimentProtocol, PhysicalConstants, TheoryId
from .forces import point_force

__all__ = [
    "cqt_decay_rate",
    "grw_rate",
    "csl_lambda",
    "csl_cm_rate",
    "dp_damping_time",
    "dp_noise_temperature",
    "dp_reference_mass",
    "dp_effective_theory_valid",
    "td_csl_backaction_damping",
    "td_dp_damping_time",
    "k_critical_width",
    "k_critical_time",
    "PointerCheck",
    "pointer_orthogonality",
    "probe_collapse_rate",
    "wafer_nucleon_count",
    "protocol_f0",
    "RateReport",
    "rate_report",
    "ZERO_FAMILY",
    "SILICON_DENSITY",
]

SILICON_DENSITY = 2330.0  # kg m^-3

ZERO_FAMILY = frozenset({TheoryId.GRW0, TheoryId.CSL0, TheoryId.DP0, TheoryId.K0})


def cqt_decay_rate(nu: float, tau: float) -> float:
    """Decay constant of the probe-force correlations, nu^2 tau / 2 (nu angular)."""
    if nu < 0 or tau < 0:
        raise ValueError("nu and tau must be >= 0")
    return 0.5 * nu * nu * tau


def grw_rate(n_nucleons: float, lambda_grw: float = CollapseParams.lambda_grw) -> float:
    if n_nucleons < 0:
        raise ValueError("nucleon count must be >= 0")
    return n_nucleons * lambda_grw


def csl_lambda(gamma: float = CollapseParams.gamma_csl, r_c: float = CollapseParams.r_c) -> float:
    """Single-nucleon CSL rate gamma / (8 pi^(3/2) r_c^3)."""
    return gamma / (8.0 * math.pi ** 1.5 * r_c ** 3)


def csl_cm_rate(n_per_cluster: float, k_clusters: float = 1.0,
                lam: Optional[float] = None) -> float:
    """Centre-of-mass localisation rate lambda N^2 k (identical particles)."""
    lam = csl_lambda() if lam is None else lam
    return lam * n_per_cluster ** 2 * k_clusters


def dp_damping_time(m: float, R0: float = CollapseParams.R0_dp,
                    constants: PhysicalConstants = CONSTANTS) -> float:
    """Off-diagonal damping time sqrt(pi) hbar R0 / (G m^2) of a displaced sphere."""
    return math.sqrt(math.pi) * constants.hbar * R0 / (constants.G * m * m)


def dp_noise_temperature(m_r: float, R0: float = CollapseParams.R0_dp,
                         constants: PhysicalConstants = CONSTANTS) -> float:
    """Asymptotic noise-field temperature hbar^2 / (8 k_B m_r R0^2)."""
    return constants.hbar ** 2 / (8.0 * constants.k_B * m_r * R0 * R0)


def dp_reference_mass(T: float = 1.0, R0: float = CollapseParams.R0_dp,
                      constants: PhysicalConstants = CONSTANTS) -> float:
    """Inverse of :func:`dp_noise_temperature`: the mass m_r giving temperature T."""
    return constants.hbar ** 2 / (8.0 * constants.k_B * T * R0 * R0)


def dp_effective_theory_valid(m: float, T: float = 1.0, R0: float = CollapseParams.R0_dp,
                              constants: PhysicalConstants = CONSTANTS) -> bool:
    """Dissipative DP/TD-DP is only trusted for masses at or above m_r."""
    return m >= dp_reference_mass(T, R0, constants)


def td_csl_backaction_damping(m: float, separation: float,
                              gamma: float = CollapseParams.gamma_td_csl,
                              G: float = CONSTANTS.G) -> float:
    """Phase damping rate pi G^2 m^2 |x1 - x2| / (2 gamma) from gravitational back-action."""
    return math.pi * G * G * m * m * separation / (2.0 * gamma)


def td_dp_damping_time(m: float, R0: float = CollapseParams.R0_dp,
                       constants: PhysicalConstants = CONSTANTS) -> float:
    """Half the DP damping time: back-action doubles the decoherence term."""
    return 0.5 * dp_damping_time(m, R0, constants)


def k_critical_width(m_tot: float, R: float, macroscopic: bool = True,
                     constants: PhysicalConstants = CONSTANTS) -> float:
    """Critical width a_c of the K-model.

    Elementary particle: (L/L_p)^2 L.  Macroscopic body of radius R:
    (R/L_p)^(2/3) L.  In both cases L = hbar / (m c).
    """
    lam = constants.hbar / (m_tot * constants.c)
    if macroscopic:
        return (R / constants.L_planck) ** (2.0 / 3.0) * lam
    return (lam / constants.L_planck) ** 2 * lam


def k_critical_time(m: float, a_c: float, constants: PhysicalConstants = CONSTANTS) -> float:
    return m * a_c * a_c / constants.hbar


@dataclass(frozen=True)
class PointerCheck:
    projective: bool
    kinematic_deflection: float
    pointer_separation_used: float


def pointer_orthogonality(p: ExperimentProtocol, pointer_mass: float, f0: float,
                          interaction_time: float, is_probe: Optional[bool] = None,
                          collapse_width: float = CollapseParams.sigma_grw) -> PointerCheck:
    """Are the two pointer states far enough apart for a collapse to tell them apart?

    For the probe the declared ``p.pointer_separation`` is used; for any other
    body (the Earth, say) the separation is twice the rigid-body deflection
    f0 t^2 / (2 M).  ``is_probe`` defaults to ``pointer_mass == p.probe_mass``.
    """
    if not pointer_mass > 0:
        raise ValueError("pointer_mass must be > 0")
    deflection = f0 * interaction_time ** 2 / (2.0 * pointer_mass)
    if is_probe is None:
        is_probe = pointer_mass == p.probe_mass
    used = p.pointer_separation if is_probe else 2.0 * deflection
    return PointerCheck(used > collapse_width, deflection, used)


def probe_collapse_rate(n_pointer_nucleons: float, n_sphere_nucleons: float,
                        lambda_grw: float = CollapseParams.lambda_grw) -> float:
    """GRW rate of the entangled probe + sphere wavefunction."""
    return (n_pointer_nucleons + n_sphere_nucleons) * lambda_grw


def wafer_nucleon_count(thickness: float = 675e-6, width: float = 3e-3,
                        density: float = SILICON_DENSITY,
                        constants: PhysicalConstants = CONSTANTS) -> float:
    """Nucleons in a square silicon wafer; a cross-check of the default pointer size."""
    return density * width * width * thickness / constants.m_nucleon


def protocol_f0(p: ExperimentProtocol, constants: PhysicalConstants = CONSTANTS) -> float:
    return point_force(p.sphere_mass, p.probe_mass, p.cat_separation_L, p.probe_distance_D,
                       constants.G)


@dataclass(frozen=True)
class RateReport:
    """Per-theory rates for one protocol.

    ``effective_cm_rate`` is the rate at which the probe would see the sphere
    change state: the intrinsic collapse rate for semiclassical theories and
    the (probe-limited) jump rate for the CQT-Newton / zero-family theories.
    ``collapse_width`` is ``None`` when the theory has no localisation length.
    """

    theory: TheoryId
    intrinsic_rate: float
    effective_cm_rate: float
    collapse_width: Optional[float]
    damping_time: Optional[float]
    hits_within_coherence: bool
    collapse_effective_on_cat: bool
    f0: float
    probe_driven_rate: Optional[float] = None
    backaction_rate: Optional[float] = None

    def as_dict(self) -> dict:
        d = asdict(self)
        d["theory"] = self.theory.value
        return d


_GRW = {TheoryId.GRW_mN, TheoryId.GRW_fN, TheoryId.GRW0}
_CSL = {TheoryId.CSL_mN, TheoryId.CSL0, TheoryId.TD_CSL, TheoryId.AdlerTD}
_DP = {TheoryId.DP_mN, TheoryId.DP0, TheoryId.KafriEtAl}
_K = {TheoryId.K_mN, TheoryId.K0, TheoryId.BeraEtAl}


def _intrinsic(theory, M, N, R, params, constants):
    """(rate, width, damping time) of the sphere's own collapse dynamics."""
    if theory in _GRW:
        return grw_rate(N, params.lambda_grw), params.sigma_grw, None
    if theory in _CSL:
        return csl_cm_rate(N, 1.0, csl_lambda(params.gamma_csl, params.r_c)), params.r_c, None
    if theory in _DP:
        tau = dp_damping_time(M, params.R0_dp, constants)
        return 1.0 / tau, params.R0_dp, tau
    if theory is TheoryId.TD_DP:
        tau = td_dp_damping_time(M, params.sigma_td_dp, constants)
        return 1.0 / tau, params.sigma_td_dp, tau
    if theory in _K:
        a_c = k_critical_width(M, R, True, constants)
        tau = k_critical_time(M, a_c, constants)
        return 1.0 / tau, a_c, tau
    return 0.0, None, None


def rate_report(theory: TheoryId, p: ExperimentProtocol,
                params: CollapseParams = CollapseParams(),
                constants: PhysicalConstants = CONSTANTS) -> RateReport:
    theory = TheoryId(theory)
    M, N = p.sphere_mass, p.sphere_nucleons(constants)
    f0 = protocol_f0(p, constants)
    gamma_cqt = cqt_decay_rate(p.tunneling_rate_nu, p.probe_resolution_tau)
    rate, width, damping = _intrinsic(theory, M, N, p.sphere_radius, params, constants)
    probe_rate = backaction = None
    effective_on_cat = width is not None and p.cat_separation_L > width
    effective = rate

    if theory is TheoryId.CQT_Newton:
        rate = effective = gamma_cqt
        effective_on_cat = True
    elif theory in ZERO_FAMILY:
        n_tot = p.probe_pointer_nucleons + N
        m_tot = n_tot * constants.m_nucleon
        if theory is TheoryId.GRW0:
            probe_rate = probe_collapse_rate(p.probe_pointer_nucleons, N, params.lambda_grw)
        elif theory is TheoryId.CSL0:
            probe_rate = csl_cm_rate(n_tot, 1.0, csl_lambda(params.gamma_csl, params.r_c))
        elif theory is TheoryId.DP0:
            probe_rate = 1.0 / dp_damping_time(m_tot, params.R0_dp, constants)
        else:
            R_tot = (3.0 * m_tot / (4.0 * math.pi * SILICON_DENSITY)) ** (1.0 / 3.0)
            probe_rate = 1.0 / k_critical_time(m_tot, k_critical_width(m_tot, R_tot, True, constants),
                                               constants)
        check = pointer_orthogonality(p, p.probe_mass, f0, p.coherence_time, True, width)
        effective = min(gamma_cqt, probe_rate) if check.projective else 0.0
    elif theory is TheoryId.TD_CSL:
        backaction = td_csl_backaction_damping(M, p.cat_separation_L, params.gamma_td_csl,
                                               constants.G)
        damping = 1.0 / backaction if backaction > 0 else None

    return RateReport(
        theory=theory,
        intrinsic_rate=rate,
        effective_cm_rate=effective,
        collapse_width=width,
        damping_time=damping,
        hits_within_coherence=effective * p.coherence_time >= 1.0,
        collapse_effective_on_cat=effective_on_cat,
        f0=f0,
        probe_driven_rate=probe_rate,
        backaction_rate=backaction,
    )
