"""Packaged studies: scalability, saw-tooth drops, technology gap analysis,
and equivalent-design search."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .catalog import FidelityModel, TechnologyProfile
from .errors import DomainError
from .explorer import (
    DEFAULT_N_Q_POINTS, Peak, ResultGrid, SweepSpec, peak_by_cores,
    qubit_axis, sweep,
)
from .merit import Scenario

PAPER_CORES = (1, 4, 16, 64, 256)
DEFAULT_DELTAS = tuple(round(0.1 * i, 10) for i in range(21))


# -- saw-tooth -------------------------------------------------------------------

@dataclass(frozen=True)
class Drop:
    k: int
    n_q_before: int
    n_q_after: int
    gamma_before: float
    gamma_after: float


def sawtooth_report(n_q: Sequence[int], gamma: Sequence[float], n_q_lim: int,
                    n_cores: int | None = None) -> list[Drop]:
    """Drops in a gamma(n_q) row where another core comes into use.

    The row must sample both ``k * n_q_lim`` and ``k * n_q_lim + 1`` for every
    ``k >= 1`` in range (and ``k < n_cores`` when ``n_cores`` is given); only
    those boundaries can change the number of used cores.
    """
    n_q = [int(v) for v in n_q]
    pos = {v: i for i, v in enumerate(n_q)}
    if not n_q:
        return []
    k_max = n_q[-1] // n_q_lim
    if n_cores is not None:
        k_max = min(k_max, n_cores - 1)
    drops = []
    for k in range(1, k_max + 1):
        before, after = k * n_q_lim, k * n_q_lim + 1
        if before < n_q[0] or after > n_q[-1]:
            continue
        if before not in pos or after not in pos:
            raise DomainError(f"curve lacks samples at n_q={before} and n_q={after} (k={k})")
        i, j = pos[before], pos[after]
        if gamma[j] < gamma[i]:
            drops.append(Drop(k, before, after, float(gamma[i]), float(gamma[j])))
    return drops


# -- scalability -----------------------------------------------------------------

@dataclass
class ScalabilityReport:
    grid: ResultGrid
    peaks: list[Peak]
    drops: dict[int, list[Drop]]

    @property
    def n_q(self) -> np.ndarray:
        return self.grid.n_q

    def curve(self, n_cores: int) -> np.ndarray:
        ci = int(np.flatnonzero(self.grid.n_cores == n_cores)[0])
        return self.grid.gamma[0, ci]

    def peak(self, n_cores: int) -> Peak:
        return next(p for p in self.peaks if p.n_cores == n_cores)


def scalability_analysis(scenario: Scenario, n_cores_list: Sequence[int] = PAPER_CORES,
                         n_q_range: tuple[int, int, int] | Sequence[int] = (10, 10**6, DEFAULT_N_Q_POINTS),
                         workers: int | None = None) -> ScalabilityReport:
    """Gamma versus qubit count for several core counts, with peaks and drops.

    ``n_q_range`` is either ``(min, max, points)``, expanded by ``qubit_axis``
    with saw-tooth boundaries, or an explicit list of qubit counts.
    """
    n_cores_list = sorted(int(c) for c in n_cores_list)
    if isinstance(n_q_range, tuple) and len(n_q_range) == 3:
        lo, hi, pts = n_q_range
        axis = qubit_axis(int(lo), int(hi), int(pts), scenario.n_q_lim, max(n_cores_list))
    else:
        axis = sorted(int(v) for v in n_q_range)
    grid = sweep(SweepSpec(scenario, tuple(axis), tuple(n_cores_list)), workers=workers)
    curve = peak_by_cores(grid)
    drops = {
        int(c): sawtooth_report(grid.n_q, grid.gamma[0, ci], scenario.n_q_lim, int(c))
        for ci, c in enumerate(grid.n_cores)
    }
    return ScalabilityReport(grid, curve.peaks, drops)


# -- technology gap analysis ------------------------------------------------------

class QtgaMode(enum.Enum):
    FIXED_CORES = "fixed_cores"
    PEAK_PER_CORES = "peak_per_cores"


@dataclass(frozen=True)
class QtgaCurve:
    """One technology at one delta.

    FIXED_CORES: ``x`` is the qubit axis at ``n_cores``.
    PEAK_PER_CORES: ``x`` is the core axis and ``n_q_peak`` the argmax per row.
    """

    technology: str
    delta: float
    fidelity: float
    quality_factor: float
    x: np.ndarray
    gamma: np.ndarray
    n_cores: int | None = None
    n_q_peak: np.ndarray | None = None


@dataclass
class QtgaReport:
    mode: QtgaMode
    curves: list[QtgaCurve]
    grids: dict[str, ResultGrid] = field(default_factory=dict)

    def curve(self, technology: str, delta: float) -> QtgaCurve:
        return next(c for c in self.curves if c.technology == technology and c.delta == delta)


def qtga(catalog: Sequence[TechnologyProfile], delta_list: Sequence[float],
         mode: QtgaMode | str, scenario_base: Scenario, *,
         fixed_cores: int = 256,
         n_q_axis: Sequence[int] | None = None,
         n_cores_axis: Sequence[int] | None = None,
         fidelity_model: FidelityModel = FidelityModel.RECIPROCAL_INFIDELITY,
         workers: int | None = None) -> QtgaReport:
    """Compare technologies under delta evolution.

    Each technology is evolved per delta, its fidelity and quality factor
    replace those in ``scenario_base`` (everything else stays fixed), and the
    design space is swept.
    """
    if not catalog:
        raise DomainError("qtga needs a non-empty catalog")
    mode = QtgaMode(mode)
    deltas = tuple(sorted(float(d) for d in delta_list))
    if mode is QtgaMode.FIXED_CORES:
        cores = (int(fixed_cores),)
    else:
        cores = tuple(n_cores_axis) if n_cores_axis is not None else tuple(range(1, 257))
    if n_q_axis is None:
        n_q_axis = qubit_axis(10, scenario_base.n_q_norm, DEFAULT_N_Q_POINTS,
                              scenario_base.n_q_lim, max(cores))

    curves, grids = [], {}
    for tech in catalog:
        spec = SweepSpec(scenario_base, tuple(n_q_axis), cores, technology=tech,
                         delta_axis=deltas, fidelity_model=fidelity_model)
        grid = sweep(spec, workers=workers)
        grids[tech.name] = grid
        peaks = peak_by_cores(grid) if mode is QtgaMode.PEAK_PER_CORES else None
        for di, d in enumerate(deltas):
            s = grid.scenarios[di]
            if mode is QtgaMode.FIXED_CORES:
                curves.append(QtgaCurve(tech.name, d, s.fidelity, s.quality_factor,
                                        grid.n_q.copy(), grid.gamma[di, 0].copy(),
                                        n_cores=cores[0]))
            else:
                row = peaks.for_delta(d)
                curves.append(QtgaCurve(
                    tech.name, d, s.fidelity, s.quality_factor,
                    np.array([p.n_cores for p in row]), np.array([p.gamma for p in row]),
                    n_q_peak=np.array([p.n_q for p in row]),
                ))
    return QtgaReport(mode, curves, grids)


# -- equivalent designs ----------------------------------------------------------

@dataclass(frozen=True)
class Design:
    technology: str
    delta: float
    n_q: int
    n_cores: int
    gamma: float
    rel_deviation: float = 0.0


@dataclass
class EquivalenceMatch:
    reference: Design
    tol_rel: float
    matches: list[Design]


def equivalent_design(grid_a: ResultGrid, grid_b: ResultGrid,
                      reference: tuple[int, int, int], tol_rel: float,
                      same_cores: bool = False) -> EquivalenceMatch:
    """Cells of ``grid_b`` whose gamma is within ``tol_rel`` of a reference cell.

    ``reference`` indexes ``grid_a`` as ``(delta_idx, cores_idx, n_q_idx)``.
    Matches are sorted by ascending n_q, then n_cores, then delta. With
    ``same_cores`` only cells sharing the reference core count are scanned.
    """
    if not 0 <= tol_rel <= 0.5:
        raise DomainError(f"tol_rel={tol_rel!r} outside [0, 0.5]")
    d, c, q = reference
    if not grid_a.feasible[d, c, q]:
        raise DomainError(f"reference cell {reference} is infeasible")
    g_ref = float(grid_a.gamma[d, c, q])
    ref = Design(grid_a.technology_name, float(grid_a.deltas[d]), int(grid_a.n_q[q]),
                 int(grid_a.n_cores[c]), g_ref)

    dev = np.abs(grid_b.gamma - g_ref) / g_ref
    hit = grid_b.feasible & (dev <= tol_rel)
    if same_cores:
        hit &= (grid_b.n_cores == ref.n_cores)[None, :, None]
    matches = [
        Design(grid_b.technology_name, float(grid_b.deltas[i]), int(grid_b.n_q[k]),
               int(grid_b.n_cores[j]), float(grid_b.gamma[i, j, k]), float(dev[i, j, k]))
        for i, j, k in zip(*np.nonzero(hit))
    ]
    matches.sort(key=lambda m: (m.n_q, m.n_cores, m.delta))
    return EquivalenceMatch(ref, tol_rel, matches)
