"""Run configuration (YAML) and deterministic CSV / JSON output.

A configuration file looks like::

    protocol:
      preset: Pino              # or give every field inline with a name
      cat_separation_L: 500 nm  # fields next to a preset override it
    collapse:
      lambda_grw: 1e-16 1/s
    theories: [CQT_Newton, CSL_mN]
    engine: two_site            # or grid
    n_traj: 200
    horizon: 0.5 s              # optional, defaults to the coherence time
    dt: 1 ms                    # optional, chosen per theory otherwise
    seed: 0
    workers: 1
    output:
      directory: out
      formats: [csv]
      max_traj_files: 20
    sn:
      sigma0: 0.5 um
      mass: 5e9 amu
      duration: 20 s

Dimensional values need an explicit unit; plain numbers are rejected.
"""
from __future__ import annotations

import csv
import dataclasses
import io as _io
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np
import yaml

from .core import (CONSTANTS, COLLAPSE_UNITS, PROTOCOL_UNITS, CollapseParams, ConfigError, ExperimentProtocol,
                   ProtocolError, TheoryId, custom_protocol, format_quantity, parse_quantity,
                   preset_protocol, validate_protocol)

__all__ = [
    "SCHEMA_VERSION",
    "OUTPUT_ENV_VAR",
    "SNConfig",
    "OutputConfig",
    "RunConfig",
    "parse_config",
    "parse_config_text",
    "config_to_dict",
    "emit_config",
    "fmt",
    "write_csv",
    "write_json",
    "emit_outputs",
    "output_directory",
]

SCHEMA_VERSION = "gravcat/1"
OUTPUT_ENV_VAR = "GRAVCAT_OUT"
ENGINES = ("two_site", "grid")
FORMATS = ("csv", "json")


@dataclass(frozen=True)
class SNConfig:
    """Parameters of the Schrödinger-Newton commands (SI)."""

    sigma0: float = 0.5e-6
    mass: float = 5e9 * CONSTANTS.amu
    duration: float = 20.0
    n_grid: int = 1024
    r_max: float = 32.0  # in units of sigma0
    g_scale: float = 1.0
    sphere_radius: Optional[float] = None
    mass_lo: float = 1e9 * CONSTANTS.amu
    mass_hi: float = 5e10 * CONSTANTS.amu
    max_ratio: float = 1.25


@dataclass(frozen=True)
class OutputConfig:
    directory: Optional[str] = None  # None: $GRAVCAT_OUT, else ./gravcat_out
    formats: tuple[str, ...] = ("csv",)
    max_traj_files: int = 20


@dataclass(frozen=True)
class RunConfig:
    protocol: ExperimentProtocol
    theories: tuple[TheoryId, ...] = (TheoryId.CQT_Newton,)
    engine: str = "two_site"
    n_traj: int = 100
    horizon: Optional[float] = None
    dt: Optional[float] = None
    seed: int = 0
    workers: int = 1
    collapse: CollapseParams = CollapseParams()
    output: OutputConfig = OutputConfig()
    sn: SNConfig = SNConfig()

    def __post_init__(self):
        if self.engine not in ENGINES:
            raise ConfigError(f"engine: {self.engine!r} is not one of {list(ENGINES)}")
        if self.n_traj < 0:
            raise ConfigError(f"n_traj: must be >= 0 (got {self.n_traj})")
        if self.workers < 1:
            raise ConfigError(f"workers: must be >= 1 (got {self.workers})")
        if not self.theories:
            raise ConfigError("theories: at least one theory is required")
        if self.dt is not None and not self.dt > 0:
            raise ConfigError(f"dt: must be > 0 (got {self.dt!r})")
        horizon = self.protocol.coherence_time if self.horizon is None else self.horizon
        if not horizon > 0:
            raise ConfigError(f"horizon: must be > 0 (got {horizon!r})")
        if self.dt is not None and horizon < self.dt:
            raise ConfigError(f"horizon: must be >= dt ({horizon!r} s < {self.dt!r} s)")

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


# ---------------------------------------------------------------- parsing

def _key_marks(node, prefix=()):
    """Map key paths to the (line, column) of their value in the YAML source."""
    marks = {}
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            path = prefix + (str(k.value),)
            marks[path] = (v.start_mark.line + 1, v.start_mark.column + 1)
            marks.update(_key_marks(v, path))
    return marks


class _Ctx:
    def __init__(self, marks, source):
        self.marks, self.source = marks, source

    def fail(self, path, msg):
        where = self.marks.get(tuple(path))
        loc = f"{self.source}:{where[0]}:{where[1]}: " if where else f"{self.source}: "
        raise ConfigError(f"{loc}{'.'.join(path)}: {msg}")

    def mapping(self, value, path, allowed):
        if value is None:
            return {}
        if not isinstance(value, dict):
            self.fail(path, f"expected a mapping, got {type(value).__name__}")
        unknown = sorted(set(value) - set(allowed))
        if unknown:
            self.fail(path + [str(unknown[0])],
                      f"unknown key; allowed keys are {sorted(allowed)}")
        return value

    def quantity(self, value, dimension, path):
        try:
            return parse_quantity(value, dimension, ".".join(path))
        except ConfigError as e:
            msg = str(e).split(": ", 1)[-1]
            self.fail(path, msg)

    def integer(self, value, path, minimum=None):
        if isinstance(value, bool) or not isinstance(value, (int, float)) or value != int(value):
            self.fail(path, f"expected an integer, got {value!r}")
        if minimum is not None and value < minimum:
            self.fail(path, f"must be >= {minimum} (got {value})")
        return int(value)


_TOP_KEYS = {"protocol", "collapse", "theories", "engine", "n_traj", "horizon", "dt", "seed",
             "workers", "output", "sn"}
_SN_UNITS = {"sigma0": "length", "mass": "mass", "duration": "time", "n_grid": "int",
             "r_max": "count", "g_scale": "count", "sphere_radius": "length",
             "mass_lo": "mass", "mass_hi": "mass", "max_ratio": "count"}


def _parse_protocol(ctx, raw):
    raw = ctx.mapping(raw, ["protocol"], {"preset", "name", *PROTOCOL_UNITS})
    fields = {}
    for k, v in raw.items():
        if k in ("preset", "name"):
            continue
        fields[k] = None if v is None else ctx.quantity(v, PROTOCOL_UNITS[k], ["protocol", k])
    try:
        if "preset" in raw:
            p = preset_protocol(str(raw["preset"]))
            if "name" in raw:
                fields["name"] = str(raw["name"])
            p = dataclasses.replace(p, **fields)
            problems = validate_protocol(p)
            if problems:
                raise ProtocolError("; ".join(problems))
            return p
        missing = [k for k in ("sphere_mass", "sphere_radius", "cat_separation_L") if k not in fields]
        if missing:
            ctx.fail(["protocol"], f"give a preset or the fields {missing}")
        return custom_protocol(name=str(raw.get("name", "Custom")), **fields)
    except ProtocolError as e:
        ctx.fail(["protocol"], str(e))


def _parse_theories(ctx, raw):
    if raw is None:
        return (TheoryId.CQT_Newton,)
    items = [raw] if isinstance(raw, str) else raw
    if not isinstance(items, list):
        ctx.fail(["theories"], "expected a theory name or a list of names")
    out = []
    for name in items:
        try:
            out.append(TheoryId.parse(str(name)))
        except ValueError as e:
            ctx.fail(["theories"], str(e))
    return tuple(out)


def _parse_collapse(ctx, raw):
    raw = ctx.mapping(raw, ["collapse"], set(COLLAPSE_UNITS))
    values = {k: ctx.quantity(v, COLLAPSE_UNITS[k], ["collapse", k]) for k, v in raw.items()}
    try:
        return CollapseParams(**values)
    except ValueError as e:
        ctx.fail(["collapse"], str(e))


def _parse_output(ctx, raw):
    raw = ctx.mapping(raw, ["output"], {"directory", "formats", "max_traj_files"})
    kw = {}
    if "directory" in raw:
        kw["directory"] = str(raw["directory"])
    if "formats" in raw:
        formats = raw["formats"]
        formats = [formats] if isinstance(formats, str) else formats
        if not isinstance(formats, list) or not formats or any(f not in FORMATS for f in formats):
            ctx.fail(["output", "formats"], f"expected a non-empty list drawn from {list(FORMATS)}")
        kw["formats"] = tuple(formats)
    if "max_traj_files" in raw:
        kw["max_traj_files"] = ctx.integer(raw["max_traj_files"], ["output", "max_traj_files"], 0)
    return OutputConfig(**kw)


def _parse_sn(ctx, raw):
    raw = ctx.mapping(raw, ["sn"], set(_SN_UNITS))
    kw = {}
    for k, v in raw.items():
        path = ["sn", k]
        if _SN_UNITS[k] == "int":
            kw[k] = ctx.integer(v, path, 16)
        elif v is None and k == "sphere_radius":
            kw[k] = None
        else:
            kw[k] = ctx.quantity(v, _SN_UNITS[k], path)
            if not (kw[k] >= 0 if k == "g_scale" else kw[k] > 0):
                ctx.fail(path, f"must be > 0 (got {v!r})")
    cfg = SNConfig(**kw)
    if not cfg.mass_lo < cfg.mass_hi:
        ctx.fail(["sn", "mass_hi"], "must be larger than sn.mass_lo")
    if not 1.0 < cfg.max_ratio <= 2.0:
        ctx.fail(["sn", "max_ratio"], "must lie in (1, 2]")
    return cfg


def parse_config_text(text: str, source: str = "<config>") -> RunConfig:
    """Parse and validate configuration text; see the module docstring for keys."""
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as e:
        mark = e.problem_mark or e.context_mark
        loc = f"{source}:{mark.line + 1}:{mark.column + 1}" if mark else source
        raise ConfigError(f"{loc}: YAML syntax error: {e.problem or e}") from None
    except yaml.YAMLError as e:
        raise ConfigError(f"{source}: YAML error: {e}") from None
    ctx = _Ctx(_key_marks(node), source)
    data = ctx.mapping(data, [], _TOP_KEYS)
    if "protocol" not in data:
        raise ConfigError(f"{source}: protocol: required section is missing")

    kw: dict[str, Any] = {
        "protocol": _parse_protocol(ctx, data["protocol"]),
        "theories": _parse_theories(ctx, data.get("theories")),
        "collapse": _parse_collapse(ctx, data.get("collapse")),
        "output": _parse_output(ctx, data.get("output")),
        "sn": _parse_sn(ctx, data.get("sn")),
    }
    if "engine" in data:
        kw["engine"] = str(data["engine"])
        if kw["engine"] not in ENGINES:
            ctx.fail(["engine"], f"{kw['engine']!r} is not one of {list(ENGINES)}")
    for k, minimum in (("n_traj", 0), ("seed", 0), ("workers", 1)):
        if k in data:
            kw[k] = ctx.integer(data[k], [k], minimum)
    for k in ("horizon", "dt"):
        if data.get(k) is not None:
            kw[k] = ctx.quantity(data[k], "time", [k])
    try:
        return RunConfig(**kw)
    except ConfigError as e:
        msg = str(e)
        key = msg.split(":", 1)[0]
        ctx.fail([key], msg.split(": ", 1)[-1])


def parse_config(path) -> RunConfig:
    """Read and validate a YAML configuration file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"{path}: cannot read configuration ({e.strerror})") from None
    return parse_config_text(text, str(path))


# ---------------------------------------------------------------- emitting config

def config_to_dict(cfg: RunConfig) -> dict:
    """Plain-data form of ``cfg`` that :func:`parse_config_text` maps back to ``cfg``."""
    proto = {"name": cfg.protocol.name}
    for k, dim in PROTOCOL_UNITS.items():
        v = getattr(cfg.protocol, k)
        if v is not None:
            proto[k] = format_quantity(v, dim)
    sn = {}
    for k, dim in _SN_UNITS.items():
        v = getattr(cfg.sn, k)
        if v is None:
            continue
        sn[k] = int(v) if dim == "int" else format_quantity(v, dim)
    d = {
        "protocol": proto,
        "collapse": {k: format_quantity(getattr(cfg.collapse, k), dim)
                     for k, dim in COLLAPSE_UNITS.items()},
        "theories": [t.value for t in cfg.theories],
        "engine": cfg.engine,
        "n_traj": cfg.n_traj,
        "seed": cfg.seed,
        "workers": cfg.workers,
        "output": {"formats": list(cfg.output.formats),
                   "max_traj_files": cfg.output.max_traj_files},
        "sn": sn,
    }
    if cfg.output.directory is not None:
        d["output"]["directory"] = cfg.output.directory
    if cfg.horizon is not None:
        d["horizon"] = format_quantity(cfg.horizon, "time")
    if cfg.dt is not None:
        d["dt"] = format_quantity(cfg.dt, "time")
    return d


def emit_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False, allow_unicode=True)


# ---------------------------------------------------------------- output files

def fmt(x) -> str:
    """CSV cell: floats with 17 significant digits, booleans lower-case, None empty."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_json_safe(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if hasattr(obj, "value") and isinstance(obj.value, str):
        return obj.value
    return obj


def write_csv(path, header: Sequence[str], rows) -> Path:
    path = Path(path)
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) for x in row])
    path.write_text(buf.getvalue(), encoding="utf-8")
    return path


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    doc = {"schema": SCHEMA_VERSION, **_json_safe(payload)}
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n",
                    encoding="utf-8")
    return path


def _table(directory, stem, header, rows, formats):
    out = []
    rows = list(rows)
    if "csv" in formats:
        out.append(write_csv(directory / f"{stem}.csv", header, rows))
    if "json" in formats:
        out.append(write_json(directory / f"{stem}.json",
                              {"columns": list(header), "rows": [list(r) for r in rows]}))
    return out


def output_directory(cfg: Optional[RunConfig] = None, override=None) -> Path:
    """``override``, else the configured directory, else $GRAVCAT_OUT, else ./gravcat_out."""
    if override is not None:
        return Path(override)
    if cfg is not None and cfg.output.directory is not None:
        return Path(cfg.output.directory)
    return Path(os.environ.get(OUTPUT_ENV_VAR) or "gravcat_out")


def _prepare(directory) -> Path:
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ConfigError(f"output directory {directory}: {e.strerror}") from None
    if not os.access(directory, os.W_OK):
        raise ConfigError(f"output directory {directory} is not writable")
    return directory


def emit_outputs(result, cfg: RunConfig, directory=None) -> list[Path]:
    """Write one scenario result: verdict.json, rates, and (with records) mean, corr, traj_<i>.

    Tables are written as CSV and/or JSON according to ``cfg.output.formats``.
    At most ``cfg.output.max_traj_files`` individual trajectories are written.
    """
    directory = _prepare(output_directory(cfg, directory))
    formats = cfg.output.formats
    files = []
    n = len(result.records)
    verdict = {
        "verdict": result.verdict.as_dict(),
        "n_traj": n,
        "extracted_class": result.extracted_class,
        "consistent": result.consistent,
        "seed": cfg.seed,
        "engine": cfg.engine,
        "config": config_to_dict(cfg),
    }
    files.append(write_json(directory / "verdict.json", verdict))
    files += _table(directory, "rates", ("quantity", "value"),
                    sorted(result.rates.as_dict().items()), formats)
    if n == 0:
        return files
    s = result.stats
    analytic = result.analytic_mean
    rows = (
        (t, m, e, None if analytic is None else a)
        for t, m, e, a in zip(s.times, s.mean, s.mean_stderr,
                              analytic if analytic is not None else [None] * len(s.times))
    )
    files += _table(directory, "mean", ("t", "mean_force", "stderr", "analytic"), rows, formats)
    files += _table(directory, "corr", ("lag", "corr", "stderr"),
                    zip(s.lags, s.corr, s.corr_stderr), formats)
    for i, rec in enumerate(result.records[: cfg.output.max_traj_files]):
        files += _table(directory, f"traj_{i}", ("t", "force"), zip(rec.times, rec.forces), formats)
    return files
