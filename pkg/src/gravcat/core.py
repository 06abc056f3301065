"""Physical constants, collapse parameters, experiment protocols and units.

Everything is stored in SI.  Dimensional config values are strings of the
form ``"<number> <unit>"`` and are converted once, at parse time, by
:func:`parse_quantity`.
"""
from __future__ import annotations

import dataclasses
import enum
import math
import re
from dataclasses import dataclass
from typing import Optional

import scipy.constants as sc

__all__ = [
    "PhysicalConstants",
    "CONSTANTS",
    "CollapseParams",
    "ExperimentProtocol",
    "TheoryId",
    "ProtocolError",
    "ConfigError",
    "NumericalInstabilityError",
    "preset_protocol",
    "custom_protocol",
    "validate_protocol",
    "parse_quantity",
    "format_quantity",
    "PROTOCOL_UNITS",
    "COLLAPSE_UNITS",
    "LEAD_DENSITY",
    "TANTALUM_DENSITY",
]


class ProtocolError(ValueError):
    """An experiment protocol violates one of its invariants."""


class ConfigError(ValueError):
    """Malformed or invalid run configuration."""


class NumericalInstabilityError(RuntimeError):
    """A numerical scheme left its stability or accuracy envelope."""


@dataclass(frozen=True)
class PhysicalConstants:
    G: float = sc.G
    hbar: float = sc.hbar
    c: float = sc.c
    k_B: float = sc.k
    m_nucleon: float = sc.m_p
    L_planck: float = sc.physical_constants["Planck length"][0]
    amu: float = sc.physical_constants["atomic mass constant"][0]

    def __post_init__(self):
        for f in dataclasses.fields(self):
            if not getattr(self, f.name) > 0:
                raise ValueError(f"physical constant {f.name} must be > 0")


CONSTANTS = PhysicalConstants()

LEAD_DENSITY = 11360.0  # kg m^-3
TANTALUM_DENSITY = 16700.0  # kg m^-3


@dataclass(frozen=True)
class CollapseParams:
    """Fundamental constants of the collapse models (SI)."""

    lambda_grw: float = 1e-16
    sigma_grw: float = 1e-7
    gamma_csl: float = 1e-36
    r_c: float = 1e-7
    gamma_td_csl: float = 1e-24
    sigma_td_csl: float = 1e-7
    sigma_td_dp: float = 1e-15
    R0_dp: float = 1e-15
    kappa_td: float = 2.0
    dp_noise_temperature: float = 1.0

    def __post_init__(self):
        for f in dataclasses.fields(self):
            if not getattr(self, f.name) > 0:
                raise ValueError(f"collapse parameter {f.name} must be > 0")


class TheoryId(str, enum.Enum):
    CQT_Newton = "CQT_Newton"
    GRW_mN = "GRW_mN"
    GRW_fN = "GRW_fN"
    CSL_mN = "CSL_mN"
    DP_mN = "DP_mN"
    TD_CSL = "TD_CSL"
    TD_DP = "TD_DP"
    K_mN = "K_mN"
    GRW0 = "GRW0"
    CSL0 = "CSL0"
    DP0 = "DP0"
    K0 = "K0"
    NH = "NH"
    KafriEtAl = "KafriEtAl"
    BeraEtAl = "BeraEtAl"
    AdlerTD = "AdlerTD"

    @classmethod
    def parse(cls, name: str) -> "TheoryId":
        try:
            return cls(name)
        except ValueError:
            pass
        folded = {t.value.lower(): t for t in cls}
        key = name.strip().lower().replace("-", "_")
        if key in folded:
            return folded[key]
        valid = ", ".join(t.value for t in cls)
        raise ValueError(f"unknown theory {name!r}; valid values: {valid}")


# ---------------------------------------------------------------- units

_UNITS = {
    "length": {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "µm": 1e-6,
               "micron": 1e-6, "nm": 1e-9, "pm": 1e-12, "fm": 1e-15},
    "mass": {"kg": 1.0, "g": 1e-3, "mg": 1e-6, "ug": 1e-9, "µg": 1e-9,
             "ng": 1e-12, "pg": 1e-15, "amu": CONSTANTS.amu, "u": CONSTANTS.amu},
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "ns": 1e-9,
             "min": 60.0, "h": 3600.0},
    "rate": {"1/s": 1.0, "s^-1": 1.0, "hz": 1.0, "Hz": 1.0, "1/ms": 1e3,
             "kHz": 1e3},
    "density": {"kg/m^3": 1.0, "kg/m3": 1.0, "g/cm^3": 1e3, "g/cm3": 1e3},
    "energy": {"J": 1.0, "eV": sc.e},
    "temperature": {"K": 1.0, "mK": 1e-3},
    "force": {"N": 1.0},
    "volume_rate": {"m^3/s": 1.0, "m3/s": 1.0},
}
_SI_UNIT = {"length": "m", "mass": "kg", "time": "s", "rate": "1/s",
            "density": "kg/m^3", "energy": "J", "temperature": "K",
            "force": "N", "volume_rate": "m^3/s"}

_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(\S+)\s*$")


def parse_quantity(text, dimension: str, key: str = "value") -> float:
    """Convert ``"<number> <unit>"`` to SI.

    ``dimension`` is one of the keys of the unit table, or ``"count"`` for
    dimensionless numbers (which must *not* carry a unit).
    """
    if dimension == "count":
        if isinstance(text, bool):
            raise ConfigError(f"{key}: expected a number, got {text!r}")
        if isinstance(text, (int, float)):
            return float(text)
        try:
            return float(str(text))
        except ValueError:
            raise ConfigError(f"{key}: expected a plain number, got {text!r}") from None
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        raise ConfigError(
            f"{key}: missing unit (expected {dimension}, e.g. '{text} {_SI_UNIT[dimension]}')")
    m = _QUANTITY.match(str(text))
    if m is None:
        raise ConfigError(
            f"{key}: cannot parse {text!r}; expected '<number> <{dimension} unit>'")
    value, unit = float(m.group(1)), m.group(2)
    table = _UNITS[dimension]
    if unit not in table:
        raise ConfigError(
            f"{key}: unit {unit!r} is not a {dimension} unit; use one of {sorted(table)}")
    return value * table[unit]


def format_quantity(value: float, dimension: str) -> str:
    """SI string that :func:`parse_quantity` maps back to the identical float."""
    if dimension == "count":
        return repr(float(value))
    return f"{float(value)!r} {_SI_UNIT[dimension]}"


# ---------------------------------------------------------------- protocol

@dataclass(frozen=True)
class ExperimentProtocol:
    """Geometry, masses and timing of one cat-state preparation plus probe.

    The probe sits on the perpendicular bisector of the two well minima at
    distance ``probe_distance_D = sphere_radius + surface_gap_a`` from each.
    """

    name: str
    sphere_mass: float
    sphere_radius: float
    cat_separation_L: float
    probe_mass: float = 4.0e-12
    surface_gap_a: float = 1e-6
    sphere_density: Optional[float] = None
    tunneling_rate_nu: float = 200.0
    probe_resolution_tau: float = 1e-3
    coherence_time: float = 0.1
    slit_width: Optional[float] = None
    probe_pointer_nucleons: float = 1e20
    pointer_separation: float = 1e-6
    packet_width: Optional[float] = None
    slit_arrival_time: float = 0.0

    @property
    def probe_distance_D(self) -> float:
        return self.sphere_radius + self.surface_gap_a

    @property
    def probe_offset_y(self) -> float:
        """Perpendicular probe offset y with sqrt(y^2 + L^2/4) = D."""
        D, half = self.probe_distance_D, 0.5 * self.cat_separation_L
        return math.sqrt(max(D * D - half * half, 0.0))

    @property
    def component_width(self) -> float:
        """Width (probability std) of each cat component."""
        if self.packet_width is not None:
            return self.packet_width
        return self.cat_separation_L / 10.0

    def sphere_nucleons(self, constants: PhysicalConstants = CONSTANTS) -> float:
        return self.sphere_mass / constants.m_nucleon

    def replace(self, **changes) -> "ExperimentProtocol":
        return dataclasses.replace(self, **changes)


PROTOCOL_UNITS = {
    "sphere_mass": "mass",
    "sphere_radius": "length",
    "cat_separation_L": "length",
    "probe_mass": "mass",
    "surface_gap_a": "length",
    "sphere_density": "density",
    "tunneling_rate_nu": "rate",
    "probe_resolution_tau": "time",
    "coherence_time": "time",
    "slit_width": "length",
    "probe_pointer_nucleons": "count",
    "pointer_separation": "length",
    "packet_width": "length",
    "slit_arrival_time": "time",
}

COLLAPSE_UNITS = {
    "lambda_grw": "rate",
    "sigma_grw": "length",
    "gamma_csl": "volume_rate",
    "r_c": "length",
    "gamma_td_csl": "volume_rate",
    "sigma_td_csl": "length",
    "sigma_td_dp": "length",
    "R0_dp": "length",
    "kappa_td": "count",
    "dp_noise_temperature": "temperature",
}

CASIMIR_MIN_GAP = 1e-6


def validate_protocol(p: ExperimentProtocol) -> list[str]:
    """Return one message per violated invariant (empty when valid)."""
    out = []
    positive = ["sphere_mass", "sphere_radius", "cat_separation_L", "probe_mass",
                "coherence_time", "pointer_separation"]
    for name in positive:
        v = getattr(p, name)
        if not (v > 0 and math.isfinite(v)):
            out.append(f"{name}: must be > 0 (got {v!r})")
    non_negative = ["tunneling_rate_nu", "probe_resolution_tau",
                    "probe_pointer_nucleons", "slit_arrival_time"]
    for name in non_negative:
        v = getattr(p, name)
        if not (v >= 0 and math.isfinite(v)):
            out.append(f"{name}: must be >= 0 (got {v!r})")
    for name in ("sphere_density", "slit_width", "packet_width"):
        v = getattr(p, name)
        if v is not None and not v > 0:
            out.append(f"{name}: must be > 0 when given (got {v!r})")
    if not p.surface_gap_a >= CASIMIR_MIN_GAP:
        out.append(f"surface_gap_a: {p.surface_gap_a!r} m is below the Casimir bound "
                   f"of {CASIMIR_MIN_GAP} m")
    if p.sphere_density and p.sphere_radius > 0 and p.sphere_mass > 0:
        implied = p.sphere_density * 4.0 / 3.0 * math.pi * p.sphere_radius ** 3
        if abs(implied - p.sphere_mass) > 0.01 * p.sphere_mass:
            out.append(f"sphere_mass: {p.sphere_mass!r} kg disagrees with density*volume "
                       f"= {implied!r} kg by more than 1%")
    if p.probe_distance_D <= 0.5 * p.cat_separation_L:
        out.append("cat_separation_L: L/2 must be smaller than the probe distance D")
    return out


def custom_protocol(**fields) -> ExperimentProtocol:
    """Build a ``Custom`` protocol, raising :class:`ProtocolError` if invalid."""
    fields.setdefault("name", "Custom")
    p = ExperimentProtocol(**fields)
    problems = validate_protocol(p)
    if problems:
        raise ProtocolError("; ".join(problems))
    return p


def _romero_isart() -> ExperimentProtocol:
    return ExperimentProtocol(
        name="RomeroIsart",
        sphere_mass=0.38e-12,
        sphere_radius=2e-6,
        sphere_density=LEAD_DENSITY,
        cat_separation_L=1e-12,
        coherence_time=0.1,
        packet_width=1e-13,
    )


def _pino() -> ExperimentProtocol:
    # 1e18 amu at R ~ 1 um is not a physical material density, so none is set.
    slit = 10.61e-9
    return ExperimentProtocol(
        name="Pino",
        sphere_mass=1e18 * CONSTANTS.amu,
        sphere_radius=1e-6,
        cat_separation_L=5e-7,
        coherence_time=0.5,
        slit_width=slit,
        packet_width=slit,
        slit_arrival_time=0.5,
    )


_PRESETS = {"romeroisart": _romero_isart, "pino": _pino}


def preset_protocol(name: str, **overrides) -> ExperimentProtocol:
    key = name.replace("_", "").replace("-", "").replace(" ", "").lower()
    if key not in _PRESETS:
        raise ProtocolError(f"unknown preset {name!r}; choose RomeroIsart or Pino")
    p = _PRESETS[key]()
    if overrides:
        p = dataclasses.replace(p, **overrides)
    problems = validate_protocol(p)
    if problems:
        raise ProtocolError("; ".join(problems))
    return p
