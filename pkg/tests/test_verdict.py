import numpy as np
import pytest

from gravcat.core import TheoryId
from gravcat.two_site import ForceRecord
from gravcat.verdict import (GOLDEN_TABLE, SignalClass, classify_verdict, compatible, record_class,
                             run_scenario, verdict_table)

S = SignalClass

# Independent transcription of the expected signal per theory: (RomeroIsart, Pino).
EXPECTED = {
    "CQT_Newton": ("TELEGRAPH_JUMPS", "TELEGRAPH_JUMPS"),
    "GRW_mN": ("NET_ZERO_FORCE", "CONSTANT_SINGLE_MINIMUM"),
    "GRW_fN": ("NO_FORCE", "INTERMITTENT_FLASH_FORCE"),
    "CSL_mN": ("NET_ZERO_FORCE", "CONSTANT_SINGLE_MINIMUM"),
    "DP_mN": ("RAPID_SUPPRESSION_SINGLE_MINIMUM", "RAPID_SUPPRESSION_SINGLE_MINIMUM"),
    "TD_CSL": ("NET_ZERO_FORCE", "CONSTANT_SINGLE_MINIMUM"),
    "TD_DP": ("RAPID_SUPPRESSION_SINGLE_MINIMUM", "RAPID_SUPPRESSION_SINGLE_MINIMUM"),
    "K_mN": ("NET_ZERO_FORCE", "CONSTANT_SINGLE_MINIMUM"),
    "GRW0": ("TELEGRAPH_JUMPS", "TELEGRAPH_JUMPS"),
    "CSL0": ("TELEGRAPH_JUMPS", "TELEGRAPH_JUMPS"),
    "DP0": ("TELEGRAPH_JUMPS", "TELEGRAPH_JUMPS"),
    "K0": ("TELEGRAPH_JUMPS", "TELEGRAPH_JUMPS"),
    "NH": ("NO_FORCE", "NO_FORCE"),
    "KafriEtAl": ("RAPID_SUPPRESSION_SINGLE_MINIMUM", "RAPID_SUPPRESSION_SINGLE_MINIMUM"),
    "BeraEtAl": ("NET_ZERO_FORCE", "CONSTANT_SINGLE_MINIMUM"),
    "AdlerTD": ("NET_ZERO_FORCE", "CONSTANT_SINGLE_MINIMUM"),
}


def test_expected_table_covers_every_theory():
    assert set(EXPECTED) == {t.value for t in TheoryId}


def test_library_table_agrees_with_transcription():
    for name, (ri, pi) in EXPECTED.items():
        t = TheoryId(name)
        assert GOLDEN_TABLE["RomeroIsart"][t].value == ri
        assert GOLDEN_TABLE["Pino"][t].value == pi


@pytest.mark.parametrize("theory", [t.value for t in TheoryId])
def test_classifier_reproduces_table(theory, romero, pino):
    ri, pi = EXPECTED[theory]
    assert classify_verdict(TheoryId(theory), romero).signal_class.value == ri
    assert classify_verdict(TheoryId(theory), pino).signal_class.value == pi


def test_named_examples(romero, pino):
    assert classify_verdict(TheoryId.GRW_mN, romero).signal_class is S.NET_ZERO_FORCE
    assert classify_verdict(TheoryId.CSL_mN, pino).signal_class is S.CONSTANT_SINGLE_MINIMUM
    assert classify_verdict(TheoryId.GRW0, romero).signal_class is S.TELEGRAPH_JUMPS


def test_verdict_table_order(romero, pino):
    table = verdict_table([romero, pino], [TheoryId.DP_mN, TheoryId.K_mN, TheoryId.NH])
    got = [(v.protocol, v.theory.value, v.signal_class) for v in table]
    assert got == [
        ("RomeroIsart", "DP_mN", S.RAPID_SUPPRESSION_SINGLE_MINIMUM),
        ("RomeroIsart", "K_mN", S.NET_ZERO_FORCE),
        ("RomeroIsart", "NH", S.NO_FORCE),
        ("Pino", "DP_mN", S.RAPID_SUPPRESSION_SINGLE_MINIMUM),
        ("Pino", "K_mN", S.CONSTANT_SINGLE_MINIMUM),
        ("Pino", "NH", S.NO_FORCE),
    ]


def test_rationale_codes(romero, pino):
    v = classify_verdict(TheoryId.GRW_mN, romero)
    assert "WIDTH_INEFFECTIVE" in v.rationale_codes
    v = classify_verdict(TheoryId.CSL_mN, pino)
    assert "COLLAPSE_BEFORE_CAT_FORMATION" in v.rationale_codes
    assert sum(v.branch_probabilities.values()) == pytest.approx(1.0)


def test_grw_fn_needs_hits_within_coherence(pino):
    # with a far smaller GRW rate no flash falls inside the coherence time
    from gravcat.core import CollapseParams
    v = classify_verdict(TheoryId.GRW_fN, pino, CollapseParams(lambda_grw=1e-22))
    assert v.signal_class is S.NO_FORCE


def test_later_slit_arrival_flips_pino_to_telegraph(pino):
    # if the cat forms long before the first expected collapse, the collapse is seen as a jump
    p = pino.replace(sphere_mass=pino.sphere_mass * 0.1, slit_arrival_time=1e-3,
                     coherence_time=0.5, packet_width=1e-8)
    v = classify_verdict(TheoryId.GRW_mN, p)
    assert v.signal_class is S.TELEGRAPH_JUMPS


def rec(values, f0=1.0):
    v = np.asarray(values, dtype=float)
    return ForceRecord(np.arange(v.size) * 1.0, v, TheoryId.NH, 0, [], f0)


@pytest.mark.parametrize("values,cls", [
    ([0, 0, 0, 0], "ZERO"),
    ([-1, -1, -1, -1], "CONSTANT"),
    ([-1, -1, 1, 1], "TELEGRAPH"),
    ([0, 1, 0, 0, -1, 0, 0, 0], "FLASH"),
    ([0, 0, 0, 1, 1], "LATE_JUMP"),
])
def test_record_class(values, cls):
    assert record_class(rec(values)) == cls


def test_compatibility_rules():
    assert compatible(S.NO_FORCE, S.NET_ZERO_FORCE)
    assert compatible(S.RAPID_SUPPRESSION_SINGLE_MINIMUM, S.CONSTANT_SINGLE_MINIMUM)
    assert not compatible(S.TELEGRAPH_JUMPS, S.CONSTANT_SINGLE_MINIMUM)


def test_scenario_without_trajectories(romero):
    r = run_scenario(TheoryId.CQT_Newton, romero, 0)
    assert r.records == [] and r.stats is None and r.consistent is None
    assert r.verdict.signal_class is S.TELEGRAPH_JUMPS


def test_scenario_cqt_mean_follows_exponential(romero):
    r = run_scenario(TheoryId.CQT_Newton, romero, 2000, seed=1)
    s = r.stats
    dev = np.abs(s.mean - r.analytic_mean)[1:] / s.mean_stderr[1:]
    assert np.mean(dev < 3) > 0.95
    assert r.consistent


def test_scenario_rejects_unknown_engine(romero):
    with pytest.raises(ValueError):
        run_scenario(TheoryId.CQT_Newton, romero, 2, engine="lattice")
