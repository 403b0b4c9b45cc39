"""Qubit technology profiles, catalog documents and delta-evolution."""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, replace
from importlib import resources
from typing import Iterable, Sequence

import jsonschema

from .errors import CatalogError, DomainError

# Relative tolerance for an explicit quality factor versus tau_c / gate_latency.
QF_CONSISTENCY_RTOL = 1e-9

CATALOG_SCHEMA = {
    "type": "object",
    "required": ["technologies"],
    "properties": {
        "description": {"type": "string"},
        "technologies": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "tau_c_s", "gate_latency_s", "fidelity"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "tau_c_s": {"type": "number"},
                    "gate_latency_s": {"type": "number"},
                    "fidelity": {"type": "number"},
                    "quality_factor": {"type": "number"},
                },
            },
        },
    },
    "additionalProperties": False,
}


class FidelityModel(enum.Enum):
    """Rules for projecting gate fidelity under a delta improvement."""

    RECIPROCAL_INFIDELITY = "reciprocal_infidelity"

    def apply(self, fidelity: float, delta: float) -> float:
        if self is FidelityModel.RECIPROCAL_INFIDELITY:
            return 1.0 - (1.0 - fidelity) / (1.0 + delta)
        raise NotImplementedError(self)


def quality_factor(tau_c: float, gate_latency: float) -> float:
    """Number of gate operations that fit in the coherence window."""
    if not tau_c > 0 or not math.isfinite(tau_c):
        raise DomainError(f"tau_c must be positive and finite, got {tau_c!r}")
    if not gate_latency > 0 or not math.isfinite(gate_latency):
        raise DomainError(f"gate_latency must be positive and finite, got {gate_latency!r}")
    return tau_c / gate_latency


@dataclass(frozen=True)
class TechnologyProfile:
    """Physical parameters of one qubit technology.

    ``quality_factor`` defaults to ``tau_c / gate_latency``. Evolved profiles
    carry an improved quality factor that no longer equals that ratio; the
    ``delta`` field records how far the profile was evolved.
    """

    name: str
    tau_c: float
    gate_latency: float
    fidelity: float
    quality_factor: float | None = None
    delta: float = 0.0

    def __post_init__(self):
        qf = quality_factor(self.tau_c, self.gate_latency)
        if not (0.0 < self.fidelity <= 1.0):
            raise DomainError(f"fidelity must lie in (0, 1], got {self.fidelity!r}")
        if self.quality_factor is None:
            object.__setattr__(self, "quality_factor", qf)
        elif not (self.quality_factor > 0 and math.isfinite(self.quality_factor)):
            raise DomainError(f"quality_factor must be positive, got {self.quality_factor!r}")
        if self.delta < 0:
            raise DomainError(f"delta must be >= 0, got {self.delta!r}")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "tau_c_s": self.tau_c,
            "gate_latency_s": self.gate_latency,
            "fidelity": self.fidelity,
            "quality_factor": self.quality_factor,
        }


@dataclass(frozen=True)
class EvolutionDelta:
    delta: float
    fidelity_model: FidelityModel = FidelityModel.RECIPROCAL_INFIDELITY

    def __post_init__(self):
        if not (self.delta >= 0 and math.isfinite(self.delta)):
            raise DomainError(f"delta must be finite and >= 0, got {self.delta!r}")


def evolve(profile: TechnologyProfile, evo: EvolutionDelta | float) -> TechnologyProfile:
    """Project ``profile`` forward by a delta improvement.

    The quality factor grows proportionally, ``QF * (1 + delta)``, and the
    fidelity follows ``evo.fidelity_model``. ``delta == 0`` returns the
    profile unchanged.
    """
    if not isinstance(evo, EvolutionDelta):
        evo = EvolutionDelta(float(evo))
    if evo.delta == 0:
        return profile
    base_name = profile.name.split("@", 1)[0]
    total = (1.0 + profile.delta) * (1.0 + evo.delta) - 1.0
    return replace(
        profile,
        name=f"{base_name}@delta={total:g}",
        quality_factor=profile.quality_factor * (1.0 + evo.delta),
        fidelity=evo.fidelity_model.apply(profile.fidelity, evo.delta),
        delta=total,
    )


def _entry_error(index, entry, field, message):
    name = entry.get("name", f"#{index}") if isinstance(entry, dict) else f"#{index}"
    return CatalogError(f"technology {name!r}: field {field!r}: {message}")


def profiles_from_dict(document: dict) -> list[TechnologyProfile]:
    try:
        jsonschema.validate(document, CATALOG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise CatalogError(f"malformed catalog at {exc.json_path}: {exc.message}") from None

    profiles: list[TechnologyProfile] = []
    seen: set[str] = set()
    for i, entry in enumerate(document["technologies"]):
        name = entry["name"]
        if name in seen:
            raise _entry_error(i, entry, "name", "duplicate technology name")
        seen.add(name)
        for field in ("tau_c_s", "gate_latency_s"):
            if not entry[field] > 0:
                raise _entry_error(i, entry, field, f"must be > 0, got {entry[field]!r}")
        if not 0 < entry["fidelity"] <= 1:
            raise _entry_error(i, entry, "fidelity", f"must lie in (0, 1], got {entry['fidelity']!r}")
        derived = entry["tau_c_s"] / entry["gate_latency_s"]
        qf = entry.get("quality_factor")
        if qf is not None:
            if not qf > 0:
                raise _entry_error(i, entry, "quality_factor", f"must be > 0, got {qf!r}")
            if abs(qf - derived) > QF_CONSISTENCY_RTOL * derived:
                raise _entry_error(
                    i, entry, "quality_factor",
                    f"{qf!r} inconsistent with tau_c_s / gate_latency_s = {derived!r}",
                )
        profiles.append(
            TechnologyProfile(
                name=name,
                tau_c=float(entry["tau_c_s"]),
                gate_latency=float(entry["gate_latency_s"]),
                fidelity=float(entry["fidelity"]),
                quality_factor=float(qf) if qf is not None else None,
            )
        )
    return profiles


def load_catalog(document: str | bytes) -> list[TechnologyProfile]:
    """Parse a JSON catalog document into technology profiles."""
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise CatalogError(f"catalog is not valid JSON: {exc}") from None
    return profiles_from_dict(data)


def dump_catalog(profiles: Iterable[TechnologyProfile]) -> str:
    return json.dumps({"technologies": [p.to_dict() for p in profiles]}, indent=2) + "\n"


def find(profiles: Sequence[TechnologyProfile], name: str) -> TechnologyProfile:
    for p in profiles:
        if p.name == name:
            return p
    known = ", ".join(p.name for p in profiles) or "<empty>"
    raise CatalogError(f"technology {name!r} not in catalog (known: {known})")


def default_catalog() -> list[TechnologyProfile]:
    """The bundled catalog; holds only the published ion-trap parameters."""
    return load_catalog(resources.files("qcdse.data").joinpath("default_catalog.json").read_text())


def placeholder_catalog() -> list[TechnologyProfile]:
    """Ion trap plus rough, non-authoritative values for three other technologies.

    The non-ion-trap numbers are order-of-magnitude placeholders for exercising
    multi-technology studies. Supply measured values for real comparisons.
    """
    return load_catalog(resources.files("qcdse.data").joinpath("placeholder_catalog.json").read_text())
