"""Design-space exploration of multi-core quantum computer architectures."""

__version__ = "0.1.0"

from .catalog import (
    EvolutionDelta, FidelityModel, TechnologyProfile, default_catalog, evolve,
    load_catalog, placeholder_catalog, quality_factor,
)
from .errors import CatalogError, ConfigError, DomainError, EvaluationError, QcdseError
from .merit import DesignPoint, MeritBreakdown, NormMode, Scenario, Weights, gamma

__all__ = [
    "CatalogError", "ConfigError", "DesignPoint", "DomainError", "EvaluationError",
    "EvolutionDelta", "FidelityModel", "MeritBreakdown", "NormMode", "QcdseError",
    "Scenario", "TechnologyProfile", "Weights", "default_catalog", "evolve", "gamma",
    "load_catalog", "placeholder_catalog", "quality_factor",
]
