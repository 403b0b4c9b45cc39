"""Figure-of-merit kernel for multi-core quantum computer configurations.

Gamma is a weighted ratio of five component metrics::

    gamma = (w_qb * J_qb) * (w_qf * J_qf) / ((w_f * J_f) * (w_i * J_i) * (w_c * J_c))

Every public scalar function and the array kernel ``components`` share the
same arithmetic, so a grid cell and a standalone ``gamma`` call agree bit for
bit.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError

LN2 = math.log(2.0)


class NormMode(enum.Enum):
    LINEAR = "linear"
    LOG = "log"


@dataclass(frozen=True)
class Weights:
    qb: float = 1.0
    qf: float = 1.0
    f: float = 1.0
    i: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        for name in ("qb", "qf", "f", "i", "c"):
            w = getattr(self, name)
            if not (0.0 < w <= 1.0):
                raise DomainError(f"weight w_{name}={w!r} outside (0,1]")

    def as_tuple(self):
        return (self.qb, self.qf, self.f, self.i, self.c)


@dataclass(frozen=True)
class Scenario:
    """Fixed parameters of one exploration."""

    fidelity: float
    quality_factor: float
    eps_i: float
    eps_c: float
    n_q_lim: int
    n_q_norm: int
    weights: Weights = field(default_factory=Weights)
    norm_mode: NormMode = NormMode.LINEAR

    def __post_init__(self):
        if not (0.0 < self.fidelity <= 1.0):
            raise DomainError(f"fidelity={self.fidelity!r} outside (0,1]")
        if not (self.quality_factor > 0 and math.isfinite(self.quality_factor)):
            raise DomainError(f"quality_factor={self.quality_factor!r} must be > 0")
        if not self.eps_i >= 0:
            raise DomainError(f"eps_i={self.eps_i!r} must be >= 0")
        if not (0.0 <= self.eps_c < 1.0):
            raise DomainError(f"eps_c={self.eps_c!r} outside [0,1)")
        if int(self.n_q_lim) != self.n_q_lim or self.n_q_lim < 1:
            raise DomainError(f"n_q_lim={self.n_q_lim!r} must be a positive integer")
        if int(self.n_q_norm) != self.n_q_norm or self.n_q_norm < 2:
            raise DomainError(f"n_q_norm={self.n_q_norm!r} must be an integer >= 2")
        object.__setattr__(self, "n_q_lim", int(self.n_q_lim))
        object.__setattr__(self, "n_q_norm", int(self.n_q_norm))
        if not isinstance(self.norm_mode, NormMode):
            object.__setattr__(self, "norm_mode", NormMode(self.norm_mode))

    def with_technology(self, fidelity: float, quality_factor: float) -> "Scenario":
        return replace(self, fidelity=fidelity, quality_factor=quality_factor)


@dataclass(frozen=True)
class DesignPoint:
    n_q: int
    n_cores: int

    def __post_init__(self):
        for name in ("n_q", "n_cores"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise DomainError(f"{name}={v!r} must be a positive integer")
            object.__setattr__(self, name, int(v))


@dataclass(frozen=True)
class MeritBreakdown:
    j_qb: float
    j_qf: float
    j_f: float
    j_i: float
    j_c: float
    n_used: int
    n_q_max: int
    gamma: float


# -- scalar component operations ---------------------------------------------

def normalize_qubits(n_q, n_q_norm, mode=NormMode.LINEAR) -> float:
    """Map a qubit count into [0, 1] relative to ``n_q_norm``."""
    if not n_q >= 1:
        raise DomainError(f"n_q={n_q!r} must be >= 1")
    if n_q > n_q_norm:
        raise DomainError(f"point outside normalized domain: n_q={n_q!r} > n_q_norm={n_q_norm!r}")
    return float(_normalize(np.asarray(n_q, dtype=float), n_q_norm, NormMode(mode)))


def j_qb(n_tilde) -> float:
    """Computational power term, ``2**n_tilde - 1``."""
    if not 0.0 <= n_tilde <= 1.0:
        raise DomainError(f"normalized qubit count {n_tilde!r} outside [0,1]")
    return float(np.expm1(np.asarray(n_tilde, dtype=float) * LN2))


def j_f(fidelity, n_q) -> float:
    """Aggregate fidelity penalty, ``2 - F**n_q``."""
    _check_fidelity(fidelity)
    return float(_j_f(np.asarray(n_q, dtype=float), fidelity))


def n_used(n_q, n_q_lim, n_cores) -> int:
    """Cores holding active qubits: ``ceil(n_q / n_q_lim)`` clamped to ``n_cores``."""
    return int(_n_used(np.asarray(n_q, dtype=float), n_q_lim, np.asarray(n_cores, dtype=float)))


def j_i(n_q, n_cores, eps_i, n_q_lim) -> float:
    """Crosstalk term; exactly 1 while ``n_q < n_q_lim * n_cores``."""
    return float(_j_i(np.asarray(n_q, dtype=float), np.asarray(n_cores, dtype=float), eps_i, n_q_lim))


def j_c(eps_c, n_used) -> float:
    """Inter-core communication overhead, ``2 - (1 - eps_c)**n_used``."""
    if not 0.0 <= eps_c < 1.0:
        raise DomainError(f"eps_c={eps_c!r} outside [0,1)")
    return float(_j_c(eps_c, np.asarray(n_used, dtype=float)))


# -- array kernel ---------------------------------------------------------------

def _check_fidelity(fidelity):
    if not 0.0 < fidelity <= 1.0:
        raise DomainError(f"fidelity={fidelity!r} outside (0,1]")


def _normalize(n_q, n_q_norm, mode):
    if mode is NormMode.LINEAR:
        return n_q / n_q_norm
    return np.log(n_q) / math.log(n_q_norm)


def _j_f(n_q, fidelity):
    # F**N as exp(N ln F): stable for large N
    return 2.0 - np.exp(n_q * math.log(fidelity))


def _n_used(n_q, n_q_lim, n_cores):
    return np.minimum(np.ceil(n_q / n_q_lim), n_cores)


def _j_i(n_q, n_cores, eps_i, n_q_lim):
    n_q_max = n_q_lim * n_cores
    step = np.where(n_q - n_q_max >= 0, 1.0, 0.0)
    return 1.0 + (eps_i * n_q / n_cores) * (step * n_q / n_q_max) ** 3


def _j_c(eps_c, used):
    return 2.0 - np.power(1.0 - eps_c, used)


def components(scenario: Scenario, n_q, n_cores) -> dict[str, np.ndarray]:
    """Evaluate every component on broadcast arrays of ``n_q`` and ``n_cores``.

    ``n_q`` may be fractional (used when re-checking interpolated isoline
    points). Raises DomainError if any ``n_q`` lies outside ``[1, n_q_norm]``.
    """
    n_q = np.asarray(n_q, dtype=float)
    n_cores = np.asarray(n_cores, dtype=float)
    if np.any(n_q < 1) or np.any(n_q > scenario.n_q_norm):
        bad = n_q[(n_q < 1) | (n_q > scenario.n_q_norm)].flat[0]
        raise DomainError(
            f"point outside normalized domain: n_q={bad:g} not in [1, {scenario.n_q_norm}]"
        )
    n_q, n_cores = np.broadcast_arrays(n_q, n_cores)
    w = scenario.weights
    jqb = np.expm1(_normalize(n_q, scenario.n_q_norm, scenario.norm_mode) * LN2)
    jqf = np.full(n_q.shape, float(scenario.quality_factor))
    jf = _j_f(n_q, scenario.fidelity)
    ji = _j_i(n_q, n_cores, scenario.eps_i, scenario.n_q_lim)
    used = _n_used(n_q, scenario.n_q_lim, n_cores)
    jc = _j_c(scenario.eps_c, used)
    gam = (w.qb * jqb) * (w.qf * jqf) / ((w.f * jf) * (w.i * ji) * (w.c * jc))
    return {
        "j_qb": jqb, "j_qf": jqf, "j_f": jf, "j_i": ji, "j_c": jc,
        "n_used": used, "n_q_max": scenario.n_q_lim * n_cores, "gamma": gam,
    }


def gamma(scenario: Scenario, point: DesignPoint) -> MeritBreakdown:
    """Evaluate the figure of merit and all its components at one design point."""
    c = components(scenario, np.array([point.n_q]), np.array([point.n_cores]))
    return MeritBreakdown(
        j_qb=float(c["j_qb"][0]),
        j_qf=float(c["j_qf"][0]),
        j_f=float(c["j_f"][0]),
        j_i=float(c["j_i"][0]),
        j_c=float(c["j_c"][0]),
        n_used=int(c["n_used"][0]),
        n_q_max=int(c["n_q_max"][0]),
        gamma=float(c["gamma"][0]),
    )


def gamma_at(scenario: Scenario, n_q: float, n_cores: int) -> float:
    """Gamma at a possibly fractional qubit count."""
    return float(components(scenario, np.array([float(n_q)]), np.array([n_cores]))["gamma"][0])
