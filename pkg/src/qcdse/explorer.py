"""Design-space sweeps, feasibility constraints, peak curves and isolines."""
from __future__ import annotations

import enum
import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import merit
from .catalog import EvolutionDelta, FidelityModel, TechnologyProfile, evolve
from .errors import ConfigError, DomainError, EvaluationError
from .merit import DesignPoint, MeritBreakdown, Scenario

DEFAULT_N_Q_POINTS = 600
COMPONENT_FIELDS = ("j_qb", "j_qf", "j_f", "j_i", "j_c", "n_used", "gamma")


# -- axes ------------------------------------------------------------------------

def log_range(start: float, stop: float, points: int) -> list[float]:
    """Geometrically spaced values from ``start`` to ``stop`` with exact endpoints."""
    if not (0 < start < stop) or points < 2 or not math.isfinite(stop):
        raise DomainError(f"invalid log range ({start!r}, {stop!r}, {points!r})")
    values = np.logspace(math.log10(start), math.log10(stop), int(points)).tolist()
    values[0], values[-1] = float(start), float(stop)
    for i in range(1, len(values) - 1):
        r = round(values[i])
        # snap float noise on exact decades such as 99.99999999999997
        if abs(values[i] - r) <= 1e-9 * values[i]:
            values[i] = float(r)
    return values


def qubit_axis(start: int, stop: int, points: int = DEFAULT_N_Q_POINTS,
               n_q_lim: int | None = None, n_cores_max: int | None = None) -> list[int]:
    """Integer qubit axis: rounded log grid plus saw-tooth boundary samples.

    When ``n_q_lim`` is given, every ``k * n_q_lim`` and ``k * n_q_lim + 1``
    inside ``[start, stop]`` is added (``k < n_cores_max`` if that is given),
    so core-count steps are always resolved.
    """
    values = {int(round(v)) for v in log_range(start, stop, points)}
    if n_q_lim is not None:
        k_max = stop // n_q_lim
        if n_cores_max is not None:
            k_max = min(k_max, n_cores_max - 1)
        for k in range(1, int(k_max) + 1):
            for v in (k * n_q_lim, k * n_q_lim + 1):
                if start <= v <= stop:
                    values.add(v)
    return sorted(values)


# -- constraints -----------------------------------------------------------------

class ConstraintKind(enum.Enum):
    INEQUALITY = "inequality"
    EQUALITY = "equality"


def _total_qubits(s, p):
    return p.n_q

def _cores(s, p):
    return p.n_cores

def _qubits_per_core(s, p):
    return p.n_q / p.n_cores

def _neg_cores(s, p):
    return -p.n_cores

def _neg_qubits(s, p):
    return -p.n_q


# name -> (g(scenario, point), bound sign): residual is g - sign*bound
PREDICATES: dict[str, tuple[Callable, int]] = {
    "MAX_TOTAL_QUBITS": (_total_qubits, 1),
    "MIN_TOTAL_QUBITS": (_neg_qubits, -1),
    "MAX_CORES": (_cores, 1),
    "MIN_CORES": (_neg_cores, -1),
    "MAX_QUBITS_PER_CORE": (_qubits_per_core, 1),
    "TOTAL_QUBITS": (_total_qubits, 1),
    "CORES": (_cores, 1),
}


@dataclass(frozen=True)
class Constraint:
    """A named feasibility predicate: ``residual <= 0`` or ``residual == 0``.

    >>> Constraint(ConstraintKind.INEQUALITY, "MAX_CORES", 256).residual(None, DesignPoint(10, 64))
    -192
    """

    kind: ConstraintKind
    name: str
    bound: float

    def __post_init__(self):
        if self.name not in PREDICATES:
            raise ConfigError(
                f"unknown constraint predicate {self.name!r}; known: {sorted(PREDICATES)}"
            )
        if not isinstance(self.kind, ConstraintKind):
            object.__setattr__(self, "kind", ConstraintKind(self.kind))

    def residual(self, scenario, point):
        fn, sign = PREDICATES[self.name]
        return fn(scenario, point) - sign * self.bound

    def satisfied(self, scenario, point) -> bool:
        r = self.residual(scenario, point)
        return r <= 0 if self.kind is ConstraintKind.INEQUALITY else r == 0


def feasible(scenario: Scenario, point: DesignPoint, constraints: Sequence[Constraint]) -> bool:
    for c in constraints:
        if not isinstance(c, Constraint) or c.name not in PREDICATES:
            raise ConfigError(f"unknown constraint {c!r}")
        if not c.satisfied(scenario, point):
            return False
    return True


# -- sweep -----------------------------------------------------------------------

def _strictly_increasing(values):
    return all(a < b for a, b in zip(values, values[1:]))


@dataclass(frozen=True)
class SweepSpec:
    """Axes, fixed parameters and constraints of one exploration.

    With a ``technology``, every delta on ``delta_axis`` evolves it and the
    evolved fidelity and quality factor replace those in ``scenario``.
    """

    scenario: Scenario
    n_q_axis: tuple[int, ...]
    n_cores_axis: tuple[int, ...]
    technology: TechnologyProfile | None = None
    delta_axis: tuple[float, ...] = (0.0,)
    constraints: tuple[Constraint, ...] = ()
    fidelity_model: FidelityModel = FidelityModel.RECIPROCAL_INFIDELITY

    def __post_init__(self):
        for name in ("n_q_axis", "n_cores_axis", "delta_axis"):
            values = tuple(getattr(self, name))
            if not values:
                raise DomainError(f"{name} is empty")
            if not _strictly_increasing(values):
                raise DomainError(f"{name} must be strictly increasing")
            object.__setattr__(self, name, values)
        object.__setattr__(self, "n_q_axis", tuple(int(v) for v in self.n_q_axis))
        object.__setattr__(self, "n_cores_axis", tuple(int(v) for v in self.n_cores_axis))
        object.__setattr__(self, "delta_axis", tuple(float(v) for v in self.delta_axis))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if self.n_q_axis[0] < 1 or self.n_cores_axis[0] < 1:
            raise DomainError("qubit and core axes must be >= 1")
        if min(self.delta_axis) < 0:
            raise DomainError("delta values must be >= 0")

    def scenario_for(self, delta: float) -> tuple[Scenario, TechnologyProfile | None]:
        if self.technology is None:
            if delta != 0:
                raise DomainError("a nonzero delta needs a technology to evolve")
            return self.scenario, None
        tech = evolve(self.technology, EvolutionDelta(delta, self.fidelity_model))
        return self.scenario.with_technology(tech.fidelity, tech.quality_factor), tech

    def digest(self) -> str:
        payload = {
            "scenario": _scenario_dict(self.scenario),
            "technology": None if self.technology is None else self.technology.to_dict(),
            "n_q": list(self.n_q_axis),
            "n_cores": list(self.n_cores_axis),
            "delta": list(self.delta_axis),
            "constraints": [[c.kind.value, c.name, c.bound] for c in self.constraints],
            "fidelity_model": self.fidelity_model.value,
        }
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _scenario_dict(s: Scenario) -> dict:
    return {
        "fidelity": s.fidelity,
        "quality_factor": s.quality_factor,
        "eps_I": s.eps_i,
        "eps_C": s.eps_c,
        "n_q_lim": s.n_q_lim,
        "n_q_norm": s.n_q_norm,
        "weights": dict(zip(("qb", "qf", "f", "i", "c"), s.weights.as_tuple())),
        "norm_mode": s.norm_mode.value,
    }


@dataclass
class ResultGrid:
    """Dense evaluation over (delta, n_cores, n_q).

    Component arrays have shape ``(len(deltas), len(n_cores), len(n_q))``;
    infeasible cells hold NaN and ``feasible`` is False there.
    """

    deltas: np.ndarray
    n_cores: np.ndarray
    n_q: np.ndarray
    values: dict[str, np.ndarray]
    feasible: np.ndarray
    scenarios: list[Scenario | None]
    technologies: list[TechnologyProfile | None] = field(default_factory=list)
    technology_name: str = ""
    spec_hash: str = ""

    @property
    def gamma(self) -> np.ndarray:
        return self.values["gamma"]

    @property
    def shape(self):
        return self.feasible.shape

    def breakdown(self, d: int, c: int, q: int) -> MeritBreakdown | None:
        if not self.feasible[d, c, q]:
            return None
        v = {k: self.values[k][d, c, q] for k in COMPONENT_FIELDS}
        return MeritBreakdown(
            j_qb=float(v["j_qb"]), j_qf=float(v["j_qf"]), j_f=float(v["j_f"]),
            j_i=float(v["j_i"]), j_c=float(v["j_c"]), n_used=int(v["n_used"]),
            n_q_max=int(self.scenarios[d].n_q_lim * self.n_cores[c]) if self.scenarios[d] else 0,
            gamma=float(v["gamma"]),
        )

    def index_of(self, delta: float, n_cores: int, n_q: int) -> tuple[int, int, int]:
        try:
            return (
                int(np.flatnonzero(self.deltas == delta)[0]),
                int(np.flatnonzero(self.n_cores == n_cores)[0]),
                int(np.flatnonzero(self.n_q == n_q)[0]),
            )
        except IndexError:
            raise DomainError(f"cell (delta={delta}, n_cores={n_cores}, n_q={n_q}) not on grid") from None

    @classmethod
    def from_gamma(cls, n_q, gamma_rows, n_cores=None, deltas=(0.0,)):
        """Build a grid of raw gamma values (components left NaN)."""
        g = np.asarray(gamma_rows, dtype=float)
        if g.ndim == 1:
            g = g[None, None, :]
        elif g.ndim == 2:
            g = g[None, :, :]
        n_cores = np.arange(1, g.shape[1] + 1) if n_cores is None else np.asarray(n_cores)
        values = {k: np.full(g.shape, np.nan) for k in COMPONENT_FIELDS}
        values["gamma"] = g
        return cls(
            deltas=np.asarray(deltas, dtype=float), n_cores=n_cores,
            n_q=np.asarray(n_q), values=values, feasible=~np.isnan(g),
            scenarios=[None] * g.shape[0], technologies=[None] * g.shape[0],
        )


def _evaluate_row(scenario, n_q, n_cores, constraints):
    mask = np.ones(n_q.shape, dtype=bool)
    if constraints:
        for i, q in enumerate(n_q):
            mask[i] = feasible(scenario, DesignPoint(int(q), int(n_cores)), constraints)
    out = {k: np.full(n_q.shape, np.nan) for k in COMPONENT_FIELDS}
    if mask.any():
        comps = merit.components(scenario, n_q[mask], np.full(int(mask.sum()), float(n_cores)))
        for k in COMPONENT_FIELDS:
            out[k][mask] = comps[k]
    return out, mask


def default_workers() -> int:
    return os.cpu_count() or 1


def sweep(spec: SweepSpec, technology: TechnologyProfile | None = None,
          workers: int | None = None) -> ResultGrid:
    """Evaluate gamma at every feasible cell of ``spec``.

    Rows (one per delta and core count) run on a thread pool of ``workers``;
    each result is written back by index so output is schedule-independent.
    """
    if technology is not None:
        spec = SweepSpec(
            scenario=spec.scenario, n_q_axis=spec.n_q_axis, n_cores_axis=spec.n_cores_axis,
            technology=technology, delta_axis=spec.delta_axis,
            constraints=spec.constraints, fidelity_model=spec.fidelity_model,
        )
    n_q = np.array(spec.n_q_axis, dtype=np.int64)
    n_cores = np.array(spec.n_cores_axis, dtype=np.int64)
    deltas = np.array(spec.delta_axis, dtype=float)
    shape = (len(deltas), len(n_cores), len(n_q))
    scen_techs = [spec.scenario_for(d) for d in spec.delta_axis]
    scenarios = [st[0] for st in scen_techs]

    for d, s in zip(spec.delta_axis, scenarios):
        over = n_q[n_q > s.n_q_norm]
        if over.size:
            raise EvaluationError(
                f"n_q={int(over[0])} exceeds n_q_norm={s.n_q_norm} (delta={d:g})",
                coordinates={"delta": d, "n_q": int(over[0])},
            )

    values = {k: np.full(shape, np.nan) for k in COMPONENT_FIELDS}
    mask = np.zeros(shape, dtype=bool)
    n_qf = n_q.astype(float)

    def task(idx):
        di, ci = idx
        try:
            return idx, _evaluate_row(scenarios[di], n_qf, n_cores[ci], spec.constraints)
        except DomainError as exc:
            raise EvaluationError(
                f"evaluation failed at delta={deltas[di]:g}, n_cores={int(n_cores[ci])}: {exc}",
                coordinates={"delta": float(deltas[di]), "n_cores": int(n_cores[ci])},
            ) from exc

    jobs = [(di, ci) for di in range(shape[0]) for ci in range(shape[1])]
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or len(jobs) == 1:
        results = map(task, jobs)
    else:
        pool = ThreadPoolExecutor(max_workers=workers)
        results = pool.map(task, jobs)
    for (di, ci), (row, row_mask) in results:
        for k in COMPONENT_FIELDS:
            values[k][di, ci] = row[k]
        mask[di, ci] = row_mask
    if workers != 1 and len(jobs) > 1:
        pool.shutdown()

    name = spec.technology.name if spec.technology is not None else ""
    return ResultGrid(
        deltas=deltas, n_cores=n_cores, n_q=n_q, values=values, feasible=mask,
        scenarios=scenarios, technologies=[st[1] for st in scen_techs],
        technology_name=name, spec_hash=spec.digest(),
    )


# -- peaks -----------------------------------------------------------------------

@dataclass(frozen=True)
class Peak:
    delta: float
    n_cores: int
    n_q: int
    gamma: float


@dataclass
class PeakCurve:
    technology: str
    peaks: list[Peak]
    missing: list[tuple[float, int]]

    def for_delta(self, delta: float) -> list[Peak]:
        return [p for p in self.peaks if p.delta == delta]


def row_argmax(gamma_row: np.ndarray, mask: np.ndarray) -> int | None:
    """Index of the row maximum over feasible cells; ties go to the smaller index."""
    if not mask.any():
        return None
    g = np.where(mask, gamma_row, -np.inf)
    return int(np.argmax(g))  # np.argmax returns the first occurrence


def peak_by_cores(grid: ResultGrid) -> PeakCurve:
    peaks, missing = [], []
    for di, d in enumerate(grid.deltas):
        for ci, c in enumerate(grid.n_cores):
            qi = row_argmax(grid.gamma[di, ci], grid.feasible[di, ci])
            if qi is None:
                missing.append((float(d), int(c)))
                continue
            peaks.append(Peak(float(d), int(c), int(grid.n_q[qi]), float(grid.gamma[di, ci, qi])))
    return PeakCurve(grid.technology_name, peaks, missing)


# -- isolines --------------------------------------------------------------------

@dataclass(frozen=True)
class IsolinePoint:
    n_q: float
    n_cores: int
    gamma: float


@dataclass
class Isoline:
    delta: float
    level: float
    polylines: list[list[IsolinePoint]]


@dataclass
class IsolineSet:
    technology: str
    tol_rel: float
    lines: list[Isoline]

    def points(self):
        for line in self.lines:
            for poly in line.polylines:
                yield from poly


def _row_crossings(n_q, g, mask, level):
    """Fractional n_q where the feasible, positive samples cross ``level``.

    Linear interpolation in (log n_q, log gamma) between adjacent samples.
    """
    idx = np.flatnonzero(mask & (g > 0))
    out = []
    for a, b in zip(idx, idx[1:]):
        ga, gb = g[a], g[b]
        if ga == level:
            out.append((float(n_q[a]), a, a))
            continue
        if (ga - level) * (gb - level) < 0:
            la, lb = math.log(ga), math.log(gb)
            t = (math.log(level) - la) / (lb - la)
            x = math.exp(math.log(n_q[a]) + t * (math.log(n_q[b]) - math.log(n_q[a])))
            out.append((x, a, b))
    if idx.size and g[idx[-1]] == level:
        out.append((float(n_q[idx[-1]]), idx[-1], idx[-1]))
    return out


def _refine(evaluate, level, lo, hi, x0, tol_rel, iterations=80):
    """Return a point within ``tol_rel`` of ``level``, or None at a discontinuity."""
    gx = evaluate(x0)
    if abs(gx - level) <= tol_rel * level:
        return x0, gx
    g_lo = evaluate(lo)
    if abs(g_lo - level) <= tol_rel * level:
        return lo, g_lo
    rising = g_lo < level
    for _ in range(iterations):
        mid = math.sqrt(lo * hi)
        gm = evaluate(mid)
        if abs(gm - level) <= tol_rel * level:
            return mid, gm
        if (gm < level) == rising:
            lo = mid
        else:
            hi = mid
    return None


def _chain(rows: list[list[float]]) -> list[list[tuple[int, int]]]:
    """Link crossings across adjacent rows by nearest neighbour in log n_q."""
    polylines: list[list[tuple[int, int]]] = []
    open_ends: list[int] = []  # polyline indices ending on the previous row
    for r, xs in enumerate(rows):
        next_open = []
        free = list(open_ends)
        for j, x in enumerate(xs):
            best, best_dist = None, math.inf
            for pi in free:
                pr, pj = polylines[pi][-1]
                dist = abs(math.log(rows[pr][pj]) - math.log(x))
                if dist < best_dist:
                    best, best_dist = pi, dist
            if best is None:
                polylines.append([(r, j)])
                next_open.append(len(polylines) - 1)
            else:
                free.remove(best)
                polylines[best].append((r, j))
                next_open.append(best)
        open_ends = next_open
    return polylines


def isolines(grid: ResultGrid, levels: Sequence[float], tol_rel: float = 0.01,
             evaluate: Callable[[int, float, int], float] | None = None) -> IsolineSet:
    """Equal-gamma curves over (n_q, n_cores) for each level and delta.

    Crossings are interpolated per core row, then re-evaluated with the merit
    kernel (or ``evaluate(delta_index, n_q, n_cores)``) and refined by
    bisection; a crossing that cannot be brought within ``tol_rel`` of its
    level (a saw-tooth jump) is dropped.
    """
    if not 0 < tol_rel <= 0.1:
        raise DomainError(f"tol_rel={tol_rel!r} outside (0, 0.1]")
    if any(not lv > 0 for lv in levels):
        raise DomainError("isoline levels must be positive")

    lines = []
    for di, delta in enumerate(grid.deltas):
        if evaluate is not None:
            ev = lambda x, c, di=di: evaluate(di, x, c)  # noqa: E731
        elif grid.scenarios[di] is not None:
            scen = grid.scenarios[di]
            ev = lambda x, c, s=scen: merit.gamma_at(s, x, c)  # noqa: E731
        else:
            ev = None
        for level in levels:
            rows = []
            for ci, c in enumerate(grid.n_cores):
                g = grid.gamma[di, ci]
                pts = []
                for x, a, b in _row_crossings(grid.n_q, g, grid.feasible[di, ci], level):
                    if ev is None:
                        pts.append(IsolinePoint(x, int(c), float(level)))
                        continue
                    found = _refine(lambda v: ev(v, int(c)), level,
                                    float(grid.n_q[a]), float(grid.n_q[b]), x, tol_rel)
                    if found is not None:
                        pts.append(IsolinePoint(found[0], int(c), found[1]))
                rows.append(pts)
            chains = _chain([[p.n_q for p in pts] for pts in rows])
            polylines = [[rows[r][j] for r, j in chain] for chain in chains]
            lines.append(Isoline(float(delta), float(level), polylines))
    return IsolineSet(grid.technology_name, tol_rel, lines)
