import numpy as np
import pytest

from oracle import oracle_gamma
from qcdse import explorer, merit
from qcdse.catalog import TechnologyProfile
from qcdse.errors import ConfigError, DomainError, EvaluationError
from qcdse.explorer import Constraint, ConstraintKind, ResultGrid, SweepSpec
from qcdse.merit import DesignPoint

PAPER_CORES = (1, 4, 16, 64, 256)


@pytest.fixture(scope="module")
def paper_axis():
    return explorer.qubit_axis(10, 10**6, 600, 1000, 256)


@pytest.fixture(scope="module")
def paper_grid(paper_axis):
    from conftest import ION_TRAP_QF
    s = merit.Scenario(0.999, ION_TRAP_QF, 1e-4, 0.05, 1000, 10**6)
    return explorer.sweep(SweepSpec(s, paper_axis, PAPER_CORES))


def test_log_range_decades():
    assert explorer.log_range(10, 1000, 3) == [10, 100, 1000]
    assert explorer.log_range(10, 1e6, 6) == [10, 100, 1e3, 1e4, 1e5, 1e6]


@pytest.mark.parametrize("args", [(1, 1, 2), (0, 10, 3), (10, 1, 3), (1, 10, 1)])
def test_log_range_invalid(args):
    with pytest.raises(DomainError):
        explorer.log_range(*args)


def test_log_range_geometric():
    v = explorer.log_range(3, 7e5, 50)
    ratios = np.diff(np.log(v))
    assert np.allclose(ratios, ratios[0], rtol=1e-9)
    assert (v[0], v[-1]) == (3, 7e5)


def test_qubit_axis_boundaries(paper_axis):
    assert paper_axis[0] == 10 and paper_axis[-1] == 10**6
    assert paper_axis == sorted(set(paper_axis))
    for k in range(1, 256):
        assert k * 1000 in paper_axis and k * 1000 + 1 in paper_axis
    assert 256001 not in paper_axis


def test_feasible():
    s = merit.Scenario(0.99, 10.0, 0.0, 0.0, 10, 10**6)
    assert explorer.feasible(s, DesignPoint(1000, 1), [])
    c = Constraint(ConstraintKind.INEQUALITY, "MAX_TOTAL_QUBITS", 500)
    assert not explorer.feasible(s, DesignPoint(1000, 1), [c])
    assert explorer.feasible(s, DesignPoint(1000, 256), [Constraint("inequality", "MAX_CORES", 256)])
    assert not explorer.feasible(s, DesignPoint(1000, 257), [Constraint("inequality", "MAX_CORES", 256)])
    eq = Constraint(ConstraintKind.EQUALITY, "CORES", 16)
    assert explorer.feasible(s, DesignPoint(5, 16), [eq])
    assert not explorer.feasible(s, DesignPoint(5, 15), [eq])
    assert explorer.feasible(s, DesignPoint(5, 15), [Constraint("inequality", "MIN_CORES", 15)])
    assert not explorer.feasible(s, DesignPoint(5, 14), [Constraint("inequality", "MIN_CORES", 15)])


def test_unknown_constraint():
    with pytest.raises(ConfigError, match="unknown constraint"):
        Constraint(ConstraintKind.INEQUALITY, "MAX_WIDGETS", 3)


def test_sweep_degenerate(ion_trap_scenario):
    g = explorer.sweep(SweepSpec(ion_trap_scenario, (1000,), (1,)))
    assert g.shape == (1, 1, 1)
    assert g.breakdown(0, 0, 0) == merit.gamma(ion_trap_scenario, DesignPoint(1000, 1))


def test_sweep_aborts_outside_norm(ion_trap_scenario):
    with pytest.raises(EvaluationError) as exc:
        explorer.sweep(SweepSpec(ion_trap_scenario, (10, 2 * 10**6), (1,)))
    assert exc.value.coordinates["n_q"] == 2 * 10**6


@pytest.mark.parametrize("axis", [(), (10, 10), (20, 10)])
def test_sweep_spec_axes(ion_trap_scenario, axis):
    with pytest.raises(DomainError):
        SweepSpec(ion_trap_scenario, axis, (1,))


def test_infeasible_cells_not_evaluated(ion_trap_scenario):
    spec = SweepSpec(ion_trap_scenario, (10, 100, 1000), (1, 4),
                     constraints=(Constraint("inequality", "MAX_QUBITS_PER_CORE", 100),))
    # 1000 / 4 = 250 qubits per core still exceeds the bound
    g = explorer.sweep(spec)
    assert g.feasible.tolist() == [[[True, True, False], [True, True, False]]]
    assert np.isnan(g.gamma[0, 0, 2])
    assert g.breakdown(0, 0, 2) is None


def test_grid_matches_pointwise(paper_grid, ion_trap_scenario):
    for ci, c in enumerate(paper_grid.n_cores):
        for qi, q in enumerate(paper_grid.n_q):
            b = merit.gamma(ion_trap_scenario, DesignPoint(int(q), int(c)))
            assert paper_grid.gamma[0, ci, qi] == b.gamma


def test_sweep_schedule_independent(ion_trap_scenario, paper_axis):
    spec = SweepSpec(ion_trap_scenario, paper_axis, tuple(range(1, 257, 5)))
    a = explorer.sweep(spec, workers=1)
    b = explorer.sweep(spec, workers=8)
    for k in explorer.COMPONENT_FIELDS:
        assert a.values[k].tobytes() == b.values[k].tobytes()


def test_row_maxima_increase_with_cores(paper_grid):
    axis = explorer.qubit_axis(10, 10**6, 600)
    qi = np.searchsorted(paper_grid.n_q, axis)
    # oracle: arbitrary-precision maxima over the plain 600-point log axis
    from conftest import ION_TRAP_QF
    maxima = []
    for ci, c in enumerate(PAPER_CORES):
        best = max(oracle_gamma(0.999, ION_TRAP_QF, 1e-4, 0.05, 1000, q, c, 10**6) for q in axis)
        maxima.append(best)
        assert np.nanmax(paper_grid.gamma[0, ci, qi]) == pytest.approx(float(best), rel=1e-12)
    assert all(a < b for a, b in zip(maxima, maxima[1:]))


def test_peak_by_cores_single_core(paper_grid):
    curve = explorer.peak_by_cores(paper_grid)
    p1 = curve.peaks[0]
    row = paper_grid.gamma[0, 0]
    assert p1.gamma == row.max()
    assert p1.n_q == paper_grid.n_q[int(np.argmax(row))]
    # J_I jumps to 1.1 at n_q == 1000 exactly (step at zero), so the peak is
    # the last grid point below the threshold
    assert p1.n_q == max(q for q in paper_grid.n_q if q < 1000)
    assert [p.n_cores for p in curve.peaks] == list(PAPER_CORES)
    assert all(a.gamma <= b.gamma for a, b in zip(curve.peaks, curve.peaks[1:]))


def test_peak_ties_and_missing():
    g = ResultGrid.from_gamma([1, 2, 3, 4], [[5.0, 7.0, 7.0, 1.0], [np.nan] * 4, [2.0, np.nan, np.nan, np.nan]])
    curve = explorer.peak_by_cores(g)
    assert [(p.n_cores, p.n_q, p.gamma) for p in curve.peaks] == [(1, 2, 7.0), (3, 1, 2.0)]
    assert curve.missing == [(0.0, 2)]


def test_sawtooth_property_resolved_rows(paper_grid):
    for ci, c in enumerate(paper_grid.n_cores):
        c = int(c)
        if c in (1, 256):
            continue
        pos = {int(q): i for i, q in enumerate(paper_grid.n_q)}
        for k in range(1, c):
            row = paper_grid.gamma[0, ci]
            assert row[pos[k * 1000 + 1]] < row[pos[k * 1000]], (c, k)


def test_sawtooth_fades_in_256_core_row(paper_grid):
    # the J_C step (1-eps_c)**k * eps_c shrinks geometrically; past k ~ 160 one
    # extra qubit's J_qb gain outweighs it and the tooth disappears
    pos = {int(q): i for i, q in enumerate(paper_grid.n_q)}
    row = paper_grid.gamma[0, -1]
    missing = [k for k in range(1, 256) if not row[pos[k * 1000 + 1]] < row[pos[k * 1000]]]
    assert missing == list(range(161, 256))


def test_isolines_level_above_max(paper_grid):
    iso = explorer.isolines(paper_grid, [1e9], 0.01)
    assert iso.lines[0].polylines == []


def test_isolines_synthetic_log_interpolation():
    g = ResultGrid.from_gamma([10, 100, 1000], [10.0, 100.0, 1000.0])
    iso = explorer.isolines(g, [50.0], 0.01)
    (poly,) = iso.lines[0].polylines
    (pt,) = poly
    assert pt.n_q == pytest.approx(50.0, rel=1e-12)


def test_isolines_paper_grid_within_tolerance(paper_grid, ion_trap_scenario):
    levels = [1.0, 30.0, 300.0, 3000.0]
    iso = explorer.isolines(paper_grid, levels, 0.01)
    total = 0
    for line in iso.lines:
        for poly in line.polylines:
            for pt in poly:
                total += 1
                g = merit.gamma_at(ion_trap_scenario, pt.n_q, pt.n_cores)
                assert abs(g - line.level) <= 0.01 * line.level
    assert total > 10


def test_isolines_chain_across_rows():
    n_q = [10, 100, 1000, 10000]
    rows = [[1, 10, 100, 1000], [2, 20, 200, 2000], [4, 40, 400, 4000]]
    iso = explorer.isolines(ResultGrid.from_gamma(n_q, rows), [50.0], 0.05)
    (poly,) = iso.lines[0].polylines
    assert [p.n_cores for p in poly] == [1, 2, 3]
    assert [p.n_q for p in poly] == pytest.approx([500, 250, 125], rel=1e-9)


def test_isolines_bad_arguments(paper_grid):
    with pytest.raises(DomainError):
        explorer.isolines(paper_grid, [1.0], 0.5)
    with pytest.raises(DomainError):
        explorer.isolines(paper_grid, [-1.0], 0.01)


def test_sweep_with_technology_overrides_scenario(ion_trap_scenario):
    from dataclasses import replace
    tech = TechnologyProfile("t", 1.0, 1e-4, 0.99)
    base = replace(ion_trap_scenario, fidelity=0.5, quality_factor=3.0)
    g = explorer.sweep(SweepSpec(base, (100, 1000), (2,), technology=tech, delta_axis=(0.0, 1.0)))
    s0, s1 = g.scenarios
    assert (s0.fidelity, s0.quality_factor) == (0.99, 1e4)
    assert s1.fidelity == pytest.approx(0.995) and s1.quality_factor == pytest.approx(2e4)
    assert (s1.eps_i, s1.eps_c, s1.n_q_lim) == (base.eps_i, base.eps_c, base.n_q_lim)
    assert np.all(g.gamma[1] > g.gamma[0])


def test_spec_hash_stable(ion_trap_scenario):
    a = SweepSpec(ion_trap_scenario, (10, 20), (1,))
    b = SweepSpec(ion_trap_scenario, (10, 20), (1,))
    c = SweepSpec(ion_trap_scenario, (10, 21), (1,))
    assert a.digest() == b.digest() != c.digest()
