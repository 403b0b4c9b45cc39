"""Run configuration documents."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import jsonschema

from . import catalog as cat
from .catalog import TechnologyProfile
from .errors import ConfigError, DomainError
from .explorer import DEFAULT_N_Q_POINTS, Constraint, qubit_axis
from .merit import DesignPoint, NormMode, Scenario, Weights

DEFAULT_N_Q_NORM = 10**6

_num = {"type": "number"}
_pos_int = {"type": "integer", "minimum": 1}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["scenario"],
    "properties": {
        "catalog": {"type": "string"},
        "technology": {"type": "string"},
        "scenario": {
            "type": "object",
            "additionalProperties": False,
            "required": ["eps_I", "eps_C", "n_q_lim"],
            "properties": {
                "fidelity": _num,
                "quality_factor": _num,
                "tau_c_s": _num,
                "gate_latency_s": _num,
                "eps_I": _num,
                "eps_C": _num,
                "n_q_lim": _pos_int,
                "n_q_norm": _pos_int,
                "norm_mode": {"enum": ["linear", "log"]},
                "weights": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {k: _num for k in ("qb", "qf", "f", "i", "c")},
                },
            },
        },
        "point": {
            "type": "object",
            "additionalProperties": False,
            "required": ["n_q", "n_cores"],
            "properties": {"n_q": _pos_int, "n_cores": _pos_int},
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n_q": {
                    "oneOf": [
                        {"type": "array", "items": _pos_int, "minItems": 1},
                        {
                            "type": "object",
                            "additionalProperties": False,
                            "required": ["min", "max"],
                            "properties": {
                                "min": _num, "max": _num,
                                "points": {"type": "integer", "minimum": 2},
                                "boundaries": {"type": "boolean"},
                            },
                        },
                    ]
                },
                "n_cores": {"type": "array", "items": _pos_int, "minItems": 1},
                "deltas": {"type": "array", "items": _num, "minItems": 1},
                "constraints": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["kind", "name", "bound"],
                        "properties": {
                            "kind": {"enum": ["inequality", "equality"]},
                            "name": {"type": "string"},
                            "bound": _num,
                        },
                    },
                },
            },
        },
        "analysis": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "technologies": {"type": "array", "items": {"type": "string"}},
                "mode": {"enum": ["fixed_cores", "peak_per_cores"]},
                "fixed_cores": _pos_int,
                "deltas": {"type": "array", "items": _num, "minItems": 1},
                "levels": {"type": "array", "items": _num},
                "tol_rel": _num,
                "reference": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["delta", "n_q", "n_cores"],
                    "properties": {
                        "technology": {"type": "string"},
                        "delta": _num, "n_q": _pos_int, "n_cores": _pos_int,
                    },
                },
                "target": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["delta"],
                    "properties": {"technology": {"type": "string"}, "delta": _num},
                },
                "match_tol_rel": _num,
                "same_cores": {"type": "boolean"},
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "format": {"enum": ["csv", "json"]},
                "precision": {"type": "integer", "minimum": 6, "maximum": 17},
                "path": {"type": "string"},
            },
        },
    },
}


@dataclass
class AnalysisConfig:
    technologies: list[str] | None = None
    mode: str = "fixed_cores"
    fixed_cores: int = 256
    deltas: list[float] | None = None
    levels: list[float] = field(default_factory=list)
    tol_rel: float = 0.01
    reference: dict | None = None
    target: dict | None = None
    match_tol_rel: float = 0.05
    same_cores: bool = True


@dataclass
class OutputConfig:
    format: str = "csv"
    precision: int = 9
    path: str | None = None


@dataclass
class RunConfig:
    catalog_path: str | None
    catalog: list[TechnologyProfile]
    technology: str | None
    scenario: Scenario
    point: DesignPoint | None
    n_q_axis: tuple[int, ...] | None
    n_cores_axis: tuple[int, ...]
    deltas: tuple[float, ...]
    constraints: tuple[Constraint, ...]
    analysis: AnalysisConfig
    output: OutputConfig
    raw: dict[str, Any]

    @property
    def config_hash(self) -> str:
        blob = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    @property
    def catalog_hash(self) -> str:
        return hashlib.sha256(cat.dump_catalog(self.catalog).encode()).hexdigest()

    def profile(self, name: str | None = None) -> TechnologyProfile | None:
        name = name or self.technology
        return None if name is None else cat.find(self.catalog, name)


def _path_error(exc: jsonschema.ValidationError) -> ConfigError:
    return ConfigError(f"config error at {exc.json_path}: {exc.message}")


def _field_error(path: str, exc: Exception) -> ConfigError:
    return ConfigError(f"config error at {path}: {exc}")


def _build_scenario(block: dict, tech: TechnologyProfile | None, n_q_norm: int) -> Scenario:
    source_keys = [k for k in ("fidelity", "quality_factor", "tau_c_s", "gate_latency_s") if k in block]
    if tech is not None:
        if source_keys:
            raise ConfigError(
                f"config error at $.scenario: {source_keys} given together with "
                f"technology {tech.name!r}; exactly one fidelity/QF source allowed"
            )
        fidelity, qf = tech.fidelity, tech.quality_factor
    else:
        if "fidelity" not in block:
            raise ConfigError("config error at $.scenario.fidelity: required without a technology")
        has_qf = "quality_factor" in block
        has_times = "tau_c_s" in block or "gate_latency_s" in block
        if has_qf == has_times:
            raise ConfigError(
                "config error at $.scenario: give exactly one of quality_factor "
                "or tau_c_s + gate_latency_s"
            )
        if has_times:
            if not ("tau_c_s" in block and "gate_latency_s" in block):
                raise ConfigError("config error at $.scenario: tau_c_s and gate_latency_s go together")
            try:
                qf = cat.quality_factor(block["tau_c_s"], block["gate_latency_s"])
            except DomainError as exc:
                raise _field_error("$.scenario", exc) from None
        else:
            qf = block["quality_factor"]
        fidelity = block["fidelity"]
    try:
        weights = Weights(**block.get("weights", {}))
    except DomainError as exc:
        raise ConfigError(f"config error at $.scenario.weights: {exc}; each weight must lie in (0,1]") from None
    try:
        return Scenario(
            fidelity=float(fidelity), quality_factor=float(qf),
            eps_i=float(block["eps_I"]), eps_c=float(block["eps_C"]),
            n_q_lim=block["n_q_lim"], n_q_norm=block.get("n_q_norm", n_q_norm),
            weights=weights, norm_mode=NormMode(block.get("norm_mode", "linear")),
        )
    except DomainError as exc:
        raise _field_error("$.scenario", exc) from None


def parse_config(document: str | bytes | dict, base_dir: str | Path | None = None,
                 catalog_path: str | Path | None = None) -> RunConfig:
    """Validate a JSON run configuration and apply defaults.

    ``catalog_path`` overrides the document's ``catalog`` entry; relative
    paths resolve against ``base_dir``. Without any catalog the bundled
    default is used.
    """
    if isinstance(document, dict):
        raw = document
    else:
        try:
            raw = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise _path_error(exc) from None

    base = Path(base_dir) if base_dir is not None else Path.cwd()
    path = catalog_path if catalog_path is not None else raw.get("catalog")
    if path is not None:
        p = Path(path)
        if not p.is_absolute() and catalog_path is None:
            p = base / p
        try:
            profiles = cat.load_catalog(p.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read catalog {str(p)!r}: {exc.strerror}") from None
        path = str(p)
    else:
        profiles = cat.default_catalog()

    names = {t.name for t in profiles}
    tech_name = raw.get("technology")
    analysis_raw = raw.get("analysis", {})
    referenced = [("$.technology", tech_name)]
    referenced += [(f"$.analysis.technologies[{i}]", n) for i, n in enumerate(analysis_raw.get("technologies", []))]
    for key in ("reference", "target"):
        referenced.append((f"$.analysis.{key}.technology", analysis_raw.get(key, {}).get("technology")))
    for where, name in referenced:
        if name is not None and name not in names:
            raise ConfigError(f"config error at {where}: technology {name!r} not in catalog")
    tech = cat.find(profiles, tech_name) if tech_name else None

    sweep_raw = raw.get("sweep", {})
    n_cores_axis = tuple(sweep_raw.get("n_cores", [1]))
    n_q_lim = raw["scenario"]["n_q_lim"]
    n_q_axis = None
    spec_q = sweep_raw.get("n_q")
    if isinstance(spec_q, list):
        n_q_axis = tuple(sorted(set(spec_q)))
    elif isinstance(spec_q, dict):
        try:
            n_q_axis = tuple(qubit_axis(
                int(spec_q["min"]), int(spec_q["max"]), spec_q.get("points", DEFAULT_N_Q_POINTS),
                n_q_lim if spec_q.get("boundaries", True) else None, max(n_cores_axis),
            ))
        except DomainError as exc:
            raise _field_error("$.sweep.n_q", exc) from None
    n_q_norm = max(n_q_axis) if n_q_axis else DEFAULT_N_Q_NORM
    if n_q_axis and n_q_norm < 2:
        n_q_norm = DEFAULT_N_Q_NORM
    scenario = _build_scenario(raw["scenario"], tech, n_q_norm)

    point = None
    if "point" in raw:
        point = DesignPoint(raw["point"]["n_q"], raw["point"]["n_cores"])

    constraints = []
    for i, c in enumerate(sweep_raw.get("constraints", [])):
        try:
            constraints.append(Constraint(c["kind"], c["name"], c["bound"]))
        except ConfigError as exc:
            raise _field_error(f"$.sweep.constraints[{i}].name", exc) from None

    deltas = tuple(sweep_raw.get("deltas", [0.0]))
    if any(d < 0 for d in deltas):
        raise ConfigError("config error at $.sweep.deltas: delta values must be >= 0")

    analysis = AnalysisConfig(**analysis_raw)
    if analysis.deltas is not None and any(d < 0 for d in analysis.deltas):
        raise ConfigError("config error at $.analysis.deltas: delta values must be >= 0")
    if any(lv <= 0 for lv in analysis.levels):
        raise ConfigError("config error at $.analysis.levels: levels must be > 0")

    return RunConfig(
        catalog_path=path, catalog=profiles, technology=tech_name, scenario=scenario,
        point=point, n_q_axis=n_q_axis, n_cores_axis=n_cores_axis, deltas=deltas,
        constraints=tuple(constraints), analysis=analysis,
        output=OutputConfig(**raw.get("output", {})), raw=raw,
    )


def load_config(path: str | Path, catalog_path: str | Path | None = None) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {str(p)!r}: {exc.strerror}") from None
    return parse_config(text, base_dir=p.parent, catalog_path=catalog_path)
