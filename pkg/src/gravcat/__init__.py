"""Probe-force signatures of gravitational cat states.

A mesoscopic sphere in a spatial superposition ("cat state") pulls on a
nearby probe mass.  Depending on how gravity couples to quantum matter the
probe sees no force, a constant force towards one minimum, a telegraph signal
that jumps between the two minima, or intermittent flashes.  This package
computes the forces and rates involved, simulates the probe records, and
classifies the signal expected from each theory.
"""
from .core import (CASIMIR_MIN_GAP, CONSTANTS, LEAD_DENSITY, TANTALUM_DENSITY, CollapseParams,
                   ConfigError, ExperimentProtocol, NumericalInstabilityError, PhysicalConstants,
                   ProtocolError, TheoryId, custom_protocol, format_quantity, parse_quantity,
                   preset_protocol, validate_protocol)
from .forces import MatterDensity1D, density_force, net_force_on_probe, point_force, self_energy
from .rates import RateReport, rate_report
from .sn import (MassBracket, RadialState, SNBudget, detect_critical_mass, free_width,
                 make_radial_gaussian, sn_evolve_radial)
from .two_site import (ForceRecord, TwoSiteDensityMatrix, TwoSiteState, csl_diffusive_populations,
                       ensemble_statistics, run_two_site_ensemble, run_two_site_trajectory,
                       telegraph_sample)
from .grid import WaveState1D, grid_trajectory, grw_hit, make_cat_state, sample_collapse_center
from .verdict import (GOLDEN_TABLE, ScenarioResult, SignalClass, Verdict, classify_verdict,
                      run_scenario, verdict_table)
from .io import RunConfig, emit_config, emit_outputs, parse_config

__version__ = "0.1.0"

__all__ = [
    "CASIMIR_MIN_GAP",
    "CONSTANTS",
    "LEAD_DENSITY",
    "TANTALUM_DENSITY",
    "CollapseParams",
    "ConfigError",
    "ExperimentProtocol",
    "NumericalInstabilityError",
    "PhysicalConstants",
    "ProtocolError",
    "TheoryId",
    "custom_protocol",
    "format_quantity",
    "parse_quantity",
    "preset_protocol",
    "validate_protocol",
    "MatterDensity1D",
    "density_force",
    "net_force_on_probe",
    "point_force",
    "self_energy",
    "RateReport",
    "rate_report",
    "MassBracket",
    "RadialState",
    "SNBudget",
    "detect_critical_mass",
    "free_width",
    "make_radial_gaussian",
    "sn_evolve_radial",
    "ForceRecord",
    "TwoSiteDensityMatrix",
    "TwoSiteState",
    "csl_diffusive_populations",
    "ensemble_statistics",
    "run_two_site_ensemble",
    "run_two_site_trajectory",
    "telegraph_sample",
    "WaveState1D",
    "grid_trajectory",
    "grw_hit",
    "make_cat_state",
    "sample_collapse_center",
    "GOLDEN_TABLE",
    "ScenarioResult",
    "SignalClass",
    "Verdict",
    "classify_verdict",
    "run_scenario",
    "verdict_table",
    "RunConfig",
    "emit_config",
    "emit_outputs",
    "parse_config",
]
