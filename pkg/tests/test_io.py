import csv
import io
import json
from pathlib import Path

import numpy as np
import pytest

from qcdse import analyses, explorer, merit, results
from qcdse.catalog import default_catalog
from qcdse.config import parse_config
from qcdse.errors import ConfigError, DomainError
from qcdse.explorer import ResultGrid, SweepSpec
from qcdse.merit import NormMode

GOLDEN = Path(__file__).parent / "golden" / "headers.csv"
ION = {"eps_I": 1e-4, "eps_C": 0.05, "n_q_lim": 1000}


def golden_headers():
    with GOLDEN.open() as fh:
        return {row[0]: tuple(row[1:]) for row in csv.reader(fh)}


def test_schema_columns_pinned():
    assert golden_headers() == results.SCHEMAS


@pytest.fixture(scope="module")
def small_grid():
    from conftest import ION_TRAP_QF
    s = merit.Scenario(0.999, ION_TRAP_QF, 1e-4, 0.05, 1000, 10**6)
    return explorer.sweep(SweepSpec(s, tuple(explorer.qubit_axis(10, 10**6, 40, 1000, 16)), (1, 4, 16)))


def test_empty_grid_header_only():
    g = ResultGrid.from_gamma([1, 2], [np.nan, np.nan])
    out = results.emit(g, "csv")
    assert out.decode() == ",".join(results.GRID_COLUMNS) + "\n"


def test_one_cell_grid(ion_trap_scenario):
    g = explorer.sweep(SweepSpec(ion_trap_scenario, (1000,), (1,)))
    g.technology_name = "ion_trap"
    lines = results.emit(g, "csv").decode().splitlines()
    assert len(lines) == 2
    row = dict(zip(lines[0].split(","), lines[1].split(",")))
    assert float(row["gamma"]) == pytest.approx(136.216287, rel=1e-9)
    assert row["technology"] == "ion_trap" and row["n_used"] == "1" and row["feasible"] == "true"
    assert row["gamma"] == "136.216287"


def test_emit_deterministic(small_grid):
    assert results.emit(small_grid, "csv") == results.emit(small_grid, "csv")
    prov = {"config_hash": "x"}
    assert results.emit(small_grid, "json", 9, prov) == results.emit(small_grid, "json", 9, prov)


def test_row_count_is_feasible_cells(small_grid):
    lines = results.emit(small_grid, "csv").decode().splitlines()
    assert len(lines) - 1 == int(small_grid.feasible.sum())


def test_precision_rounding():
    assert results.round_sig(136.21628711630592, 9) == 136.216287
    assert results.round_sig(0.1 + 0.2, 17) == 0.30000000000000004
    assert repr(results.round_sig(1e-7 / 3, 6)) == "3.33333e-08"
    with pytest.raises(DomainError):
        results.emit(ResultGrid.from_gamma([1], [1.0]), "csv", precision=5)


@pytest.mark.parametrize("precision", [6, 9, 17])
def test_json_round_trip(small_grid, precision):
    prov = {"tool_version": "0.1.0", "config_hash": "abc", "timestamp": "2026-01-01T00:00:00+00:00"}
    first = results.emit(small_grid, "json", precision, prov)
    doc = results.load_document(first)
    assert doc.schema == "qcdse.grid/1"
    assert results.emit(doc, "json", precision) == first


def test_json_mirrors_csv(small_grid):
    csv_rows = list(csv.DictReader(io.StringIO(results.emit(small_grid, "csv").decode())))
    js = json.loads(results.emit(small_grid, "json"))
    assert len(csv_rows) == len(js["records"])
    for c, j in zip(csv_rows[:20], js["records"]):
        assert float(c["gamma"]) == j["gamma"]
        assert int(c["n_q"]) == j["n_q"]


def test_emit_derived_artifacts(small_grid):
    peaks = explorer.peak_by_cores(small_grid)
    iso = explorer.isolines(small_grid, [10.0, 100.0], 0.01)
    for obj, schema in [(peaks, "qcdse.peaks/1"), (iso, "qcdse.isolines/1")]:
        js = json.loads(results.emit(obj, "json"))
        assert js["schema"] == schema
        assert tuple(js["columns"]) == results.SCHEMAS[schema]
    assert len(json.loads(results.emit(peaks, "json"))["records"]) == 3
    assert len(json.loads(results.emit(iso, "json"))["records"]) == sum(1 for _ in iso.points())


def test_emit_reports(ion_trap_scenario):
    rep = analyses.scalability_analysis(ion_trap_scenario, [1, 4], (10, 10**6, 30))
    rows = list(csv.DictReader(io.StringIO(results.emit(rep, "csv").decode())))
    assert sum(r["is_peak"] == "true" for r in rows) == 2
    assert sorted(int(r["drop_k"]) for r in rows if r["drop_k"]) == [1, 2, 3]
    q = analyses.qtga(default_catalog(), [0.0, 1.0], "peak_per_cores", ion_trap_scenario,
                      n_q_axis=explorer.qubit_axis(10, 10**6, 30, 1000, 8), n_cores_axis=(1, 8))
    assert len(json.loads(results.emit(q, "json"))["records"]) == 4


def test_write_output_unwritable(tmp_path):
    with pytest.raises(OSError, match="nope"):
        results.write_output(b"x", tmp_path / "nope" / "out.csv")


# -- config ---------------------------------------------------------------------

def test_minimal_config_defaults():
    cfg = parse_config({"technology": "ion_trap", "scenario": ION, "point": {"n_q": 1000, "n_cores": 1}})
    s = cfg.scenario
    assert s.weights.as_tuple() == (1.0,) * 5
    assert s.norm_mode is NormMode.LINEAR
    assert s.n_q_norm == 10**6
    assert s.fidelity == 0.999
    assert merit.gamma(s, cfg.point).gamma == pytest.approx(136.216287116306, rel=1e-12)


def test_config_norm_defaults_to_axis_max():
    cfg = parse_config({"technology": "ion_trap", "scenario": ION,
                        "sweep": {"n_q": {"min": 10, "max": 5000, "points": 10}, "n_cores": [1, 2]}})
    assert cfg.scenario.n_q_norm == 5000
    assert 1000 in cfg.n_q_axis and 1001 in cfg.n_q_axis and 2000 not in cfg.n_q_axis


def test_config_weight_out_of_range():
    with pytest.raises(ConfigError, match=r"\(0,1\]"):
        parse_config({"technology": "ion_trap", "scenario": {**ION, "weights": {"qb": 1.5}}})


def test_config_derives_quality_factor():
    cfg = parse_config({"scenario": {**ION, "fidelity": 0.999, "tau_c_s": 0.2, "gate_latency_s": 5.4e-7}})
    assert cfg.scenario.quality_factor == pytest.approx(3.7037037e5, rel=1e-7)


@pytest.mark.parametrize("doc, where", [
    ({"scenario": {**ION, "fidelity": 0.99}}, "$.scenario"),
    ({"scenario": {**ION, "fidelity": 0.99, "quality_factor": 5, "tau_c_s": 1, "gate_latency_s": 1}}, "$.scenario"),
    ({"technology": "ion_trap", "scenario": {**ION, "fidelity": 0.9}}, "$.scenario"),
    ({"technology": "ion_trap", "scenario": {**ION, "eps_C": "x"}}, "$.scenario.eps_C"),
    ({"technology": "ion_trap", "scenario": ION, "extra": 1}, "$"),
    ({"technology": "nonesuch", "scenario": ION}, "$.technology"),
    ({"technology": "ion_trap", "scenario": ION,
      "sweep": {"constraints": [{"kind": "inequality", "name": "BOGUS", "bound": 1}]}},
     "$.sweep.constraints[0]"),
])
def test_config_errors_name_path(doc, where):
    with pytest.raises(ConfigError) as exc:
        parse_config(doc)
    assert where in str(exc.value)


def test_config_missing_technology_names_it():
    with pytest.raises(ConfigError, match="nonesuch"):
        parse_config({"technology": "nonesuch", "scenario": ION})


def test_config_catalog_relative_path(tmp_path):
    (tmp_path / "cat.json").write_text(json.dumps({"technologies": [
        {"name": "toy", "tau_c_s": 1.0, "gate_latency_s": 0.01, "fidelity": 0.9}]}))
    cfg = parse_config(json.dumps({"catalog": "cat.json", "technology": "toy", "scenario": ION}),
                       base_dir=tmp_path)
    assert cfg.scenario.quality_factor == 100.0
    assert cfg.catalog_path == str(tmp_path / "cat.json")
