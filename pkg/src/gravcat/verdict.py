"""Which probe signal each theory predicts, and a check against simulated records."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import CONSTANTS, CollapseParams, ExperimentProtocol, PhysicalConstants, TheoryId
from .rates import ZERO_FAMILY, RateReport, pointer_orthogonality, rate_report
from .two_site import (SEMICLASSICAL, EnsembleStats, ForceRecord, ensemble_statistics,
                       run_two_site_ensemble, telegraph_analytic_mean)

__all__ = [
    "SignalClass",
    "Verdict",
    "classify_verdict",
    "verdict_table",
    "GOLDEN_TABLE",
    "record_class",
    "ensemble_record_class",
    "compatible",
    "ScenarioResult",
    "run_scenario",
    "default_dt",
]


class SignalClass(str, enum.Enum):
    NET_ZERO_FORCE = "NET_ZERO_FORCE"
    CONSTANT_SINGLE_MINIMUM = "CONSTANT_SINGLE_MINIMUM"
    TELEGRAPH_JUMPS = "TELEGRAPH_JUMPS"
    INTERMITTENT_FLASH_FORCE = "INTERMITTENT_FLASH_FORCE"
    NO_FORCE = "NO_FORCE"
    RAPID_SUPPRESSION_SINGLE_MINIMUM = "RAPID_SUPPRESSION_SINGLE_MINIMUM"


@dataclass(frozen=True)
class Verdict:
    theory: TheoryId
    protocol: str
    signal_class: SignalClass
    rationale_codes: tuple[str, ...]
    branch_probabilities: Optional[dict] = None

    def as_dict(self) -> dict:
        return {
            "theory": self.theory.value,
            "protocol": self.protocol,
            "signal_class": self.signal_class.value,
            "rationale_codes": list(self.rationale_codes),
            "branch_probabilities": self.branch_probabilities,
        }


_DP_FAMILY = frozenset({TheoryId.DP_mN, TheoryId.TD_DP, TheoryId.KafriEtAl})
_TD = frozenset({TheoryId.TD_CSL, TheoryId.TD_DP})


def classify_verdict(theory: TheoryId, p: ExperimentProtocol,
                     params: CollapseParams = CollapseParams(),
                     constants: PhysicalConstants = CONSTANTS) -> Verdict:
    """Predicted probe-signal class for ``theory`` applied to ``p``.

    Order of the rules: theories without gravitational coupling; flash
    ontology; theories whose probe coupling drives the collapse (CQT-Newton
    and the zero family); then the semiclassical theories by collapse width,
    rate against coherence time, and finally speed of suppression.
    """
    theory = TheoryId(theory)
    S = SignalClass
    r = rate_report(theory, p, params, constants)

    def v(cls, *codes, branches=None):
        return Verdict(theory, p.name, cls, tuple(codes), branches)

    if theory is TheoryId.NH:
        return v(S.NO_FORCE, "NO_GRAVITATIONAL_COUPLING")

    if theory is TheoryId.GRW_fN:
        if r.intrinsic_rate * p.coherence_time >= 1.0:
            return v(S.INTERMITTENT_FLASH_FORCE, "FLASH_SOURCED_GRAVITY")
        return v(S.NO_FORCE, "FLASH_SOURCED_GRAVITY", "RATE_OUTSIDE_COHERENCE")

    if theory is TheoryId.CQT_Newton:
        return v(S.TELEGRAPH_JUMPS, "PROBE_DRIVES_COLLAPSE")

    if theory in ZERO_FAMILY:
        check = pointer_orthogonality(p, p.probe_mass, r.f0, p.coherence_time, True,
                                      r.collapse_width)
        if not check.projective:
            return v(S.NET_ZERO_FORCE, "POINTER_NOT_ORTHOGONAL")
        return v(S.TELEGRAPH_JUMPS, "PROBE_DRIVES_COLLAPSE")

    codes = ["PROBE_DOES_NOT_DRIVE_COLLAPSE"]
    if not r.collapse_effective_on_cat:
        codes.append("WIDTH_INEFFECTIVE")
    if not r.hits_within_coherence:
        codes.append("RATE_OUTSIDE_COHERENCE")
    if len(codes) > 1:
        return v(S.NET_ZERO_FORCE, *codes)

    codes.append("TD_TUNNELING_NEGLIGIBLE" if theory in _TD else "SN_TUNNELING_SUPPRESSED")
    if theory in _DP_FAMILY and r.intrinsic_rate * p.probe_resolution_tau >= 1.0:
        codes.append("DAMPING_BELOW_PROBE_RESOLUTION")
        return v(S.RAPID_SUPPRESSION_SINGLE_MINIMUM, *codes)

    branches = None
    if p.slit_arrival_time > 0:
        p_pre = -math.expm1(-r.intrinsic_rate * p.slit_arrival_time)
        branches = {S.CONSTANT_SINGLE_MINIMUM.value: p_pre, S.TELEGRAPH_JUMPS.value: 1.0 - p_pre}
        if p_pre < 0.5:
            codes.append("COLLAPSE_AFTER_CAT_FORMATION")
            return v(S.TELEGRAPH_JUMPS, *codes, branches=branches)
        codes.append("COLLAPSE_BEFORE_CAT_FORMATION")
    return v(S.CONSTANT_SINGLE_MINIMUM, *codes, branches=branches)


def verdict_table(protocols: Sequence[ExperimentProtocol], theories: Sequence[TheoryId] = tuple(TheoryId),
                  params: CollapseParams = CollapseParams(),
                  constants: PhysicalConstants = CONSTANTS) -> list[Verdict]:
    """Cross product, ordered by protocol then theory."""
    return [classify_verdict(t, p, params, constants) for p in protocols for t in theories]


def _golden():
    T, S = TheoryId, SignalClass
    rows = [
        # theory          RomeroIsart                         Pino
        (T.CQT_Newton, S.TELEGRAPH_JUMPS, S.TELEGRAPH_JUMPS),
        (T.GRW_mN, S.NET_ZERO_FORCE, S.CONSTANT_SINGLE_MINIMUM),
        (T.GRW_fN, S.NO_FORCE, S.INTERMITTENT_FLASH_FORCE),
        (T.CSL_mN, S.NET_ZERO_FORCE, S.CONSTANT_SINGLE_MINIMUM),
        (T.DP_mN, S.RAPID_SUPPRESSION_SINGLE_MINIMUM, S.RAPID_SUPPRESSION_SINGLE_MINIMUM),
        (T.TD_CSL, S.NET_ZERO_FORCE, S.CONSTANT_SINGLE_MINIMUM),
        (T.TD_DP, S.RAPID_SUPPRESSION_SINGLE_MINIMUM, S.RAPID_SUPPRESSION_SINGLE_MINIMUM),
        (T.K_mN, S.NET_ZERO_FORCE, S.CONSTANT_SINGLE_MINIMUM),
        (T.GRW0, S.TELEGRAPH_JUMPS, S.TELEGRAPH_JUMPS),
        (T.CSL0, S.TELEGRAPH_JUMPS, S.TELEGRAPH_JUMPS),
        (T.DP0, S.TELEGRAPH_JUMPS, S.TELEGRAPH_JUMPS),
        (T.K0, S.TELEGRAPH_JUMPS, S.TELEGRAPH_JUMPS),
        (T.NH, S.NO_FORCE, S.NO_FORCE),
        (T.KafriEtAl, S.RAPID_SUPPRESSION_SINGLE_MINIMUM, S.RAPID_SUPPRESSION_SINGLE_MINIMUM),
        (T.BeraEtAl, S.NET_ZERO_FORCE, S.CONSTANT_SINGLE_MINIMUM),
        (T.AdlerTD, S.NET_ZERO_FORCE, S.CONSTANT_SINGLE_MINIMUM),
    ]
    return {"RomeroIsart": {t: a for t, a, _ in rows}, "Pino": {t: b for t, _, b in rows}}


GOLDEN_TABLE = _golden()


# ------------------------------------------------------------ record classes

def record_class(record: ForceRecord, tol: float = 0.1) -> str:
    """Shape of one force record: ZERO, FLASH, TELEGRAPH, CONSTANT or LATE_JUMP.

    Samples with |F| < tol f0 count as zero.  A sign change between
    successive non-zero samples is a telegraph jump; non-zero samples that
    fall back to zero make a flash record; a record that is non-zero from
    its first interval on and never changes sign is constant.
    """
    f = record.forces / record.f0 if record.f0 else record.forces
    on = np.abs(f) >= tol
    if not on.any():
        return "ZERO"
    if on.mean() <= 0.5 and np.any(on[:-1] & ~on[1:]):
        return "FLASH"
    signs = np.sign(f[on])
    if np.any(signs[1:] != signs[:-1]):
        return "TELEGRAPH"
    first = int(np.argmax(on))
    if first <= 1 and on[first:].all():
        return "CONSTANT"
    return "LATE_JUMP"


def ensemble_record_class(records: Sequence[ForceRecord], tol: float = 0.1) -> Optional[SignalClass]:
    """Signal class suggested by a set of records (``None`` when no majority)."""
    classes = [record_class(r, tol) for r in records]
    n = len(classes)
    frac = {c: classes.count(c) / n for c in set(classes)}
    if frac.get("TELEGRAPH", 0.0) >= 0.05:
        return SignalClass.TELEGRAPH_JUMPS
    if frac.get("FLASH", 0.0) > 0.5:
        return SignalClass.INTERMITTENT_FLASH_FORCE
    if frac.get("ZERO", 0.0) > 0.5:
        return SignalClass.NET_ZERO_FORCE
    if frac.get("CONSTANT", 0.0) > 0.5:
        return SignalClass.CONSTANT_SINGLE_MINIMUM
    if frac.get("LATE_JUMP", 0.0) > 0.5:
        return SignalClass.TELEGRAPH_JUMPS
    return None


_SAME_RECORD = {
    SignalClass.NO_FORCE: SignalClass.NET_ZERO_FORCE,
    SignalClass.RAPID_SUPPRESSION_SINGLE_MINIMUM: SignalClass.CONSTANT_SINGLE_MINIMUM,
}


def compatible(verdict_class: SignalClass, extracted: Optional[SignalClass]) -> bool:
    """Records cannot tell NO_FORCE from NET_ZERO, nor rapid from ordinary suppression."""
    if extracted is None:
        return False
    return _SAME_RECORD.get(verdict_class, verdict_class) == _SAME_RECORD.get(extracted, extracted)


# ------------------------------------------------------------ scenarios

@dataclass(eq=False)
class ScenarioResult:
    verdict: Verdict
    rates: RateReport
    records: list = field(default_factory=list)
    stats: Optional[EnsembleStats] = None
    analytic_mean: Optional[np.ndarray] = None
    extracted_class: Optional[SignalClass] = None
    consistent: Optional[bool] = None


def default_dt(report: RateReport, horizon: float) -> float:
    """Output step resolving the jump rate (rate * dt <= 0.05) and at most horizon/100."""
    dt = horizon / 100.0
    rate = report.effective_cm_rate if report.theory is TheoryId.CQT_Newton or \
        report.theory in ZERO_FAMILY else 0.0
    if rate > 0:
        dt = min(dt, 0.05 / rate)
    return dt


def run_scenario(theory: TheoryId, p: ExperimentProtocol, n_traj: int, horizon: Optional[float] = None,
                 dt: Optional[float] = None, seed: int = 0, engine: str = "two_site",
                 params: CollapseParams = CollapseParams(),
                 constants: PhysicalConstants = CONSTANTS, workers: int = 1,
                 max_lag_steps: Optional[int] = None) -> ScenarioResult:
    """Verdict and rates, plus ``n_traj`` simulated records and their statistics.

    ``horizon`` defaults to the protocol's coherence time.  The ``grid``
    engine is available for semiclassical theories and NH; other theories
    fall back to the two-site engine.
    """
    theory = TheoryId(theory)
    verdict = classify_verdict(theory, p, params, constants)
    report = rate_report(theory, p, params, constants)
    result = ScenarioResult(verdict, report)
    if n_traj <= 0:
        return result
    horizon = p.coherence_time if horizon is None else horizon
    dt = default_dt(report, horizon) if dt is None else dt
    if engine == "grid" and (theory in SEMICLASSICAL or theory is TheoryId.NH):
        from .grid import grid_trajectory
        records = [grid_trajectory(theory, p, horizon, dt, seed, index=i, params=params,
                                   constants=constants)[0] for i in range(n_traj)]
    elif engine in ("two_site", "grid"):
        records = run_two_site_ensemble(theory, p, n_traj, horizon, dt, seed, params, constants, workers)
    else:
        raise ValueError(f"unknown engine {engine!r}; choose two_site or grid")
    result.records = records
    result.stats = ensemble_statistics(records, max_lag_steps=max_lag_steps)
    if theory is TheoryId.CQT_Newton or theory in ZERO_FAMILY:
        result.analytic_mean = telegraph_analytic_mean(report.f0, report.effective_cm_rate,
                                                       records[0].times)
    result.extracted_class = ensemble_record_class(records)
    result.consistent = compatible(verdict.signal_class, result.extracted_class)
    return result
