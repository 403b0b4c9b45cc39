"""Tidy long-format result documents and their CSV / JSON serialization."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analyses import EquivalenceMatch, QtgaMode, QtgaReport, ScalabilityReport
from .errors import DomainError
from .explorer import IsolineSet, PeakCurve, ResultGrid
from .merit import MeritBreakdown

DEFAULT_PRECISION = 9

GRID_COLUMNS = ("technology", "delta", "n_cores", "n_q", "j_qb", "j_qf", "j_f",
                "j_i", "j_c", "n_used", "gamma", "feasible")
PEAK_COLUMNS = ("technology", "delta", "n_cores", "n_q_peak", "gamma_peak")
ISOLINE_COLUMNS = ("technology", "delta", "level", "polyline", "vertex",
                   "n_cores", "n_q", "gamma")
SCALABILITY_COLUMNS = ("technology", "delta", "n_cores", "n_q", "n_used", "gamma",
                       "is_peak", "drop_k")
QTGA_COLUMNS = ("technology", "delta", "fidelity", "quality_factor", "n_cores",
                "n_q", "gamma")
EQUIV_COLUMNS = ("ref_technology", "ref_delta", "ref_n_cores", "ref_n_q", "ref_gamma",
                 "technology", "delta", "n_cores", "n_q", "gamma", "rel_deviation")

SCHEMAS = {
    "qcdse.grid/1": GRID_COLUMNS,
    "qcdse.peaks/1": PEAK_COLUMNS,
    "qcdse.isolines/1": ISOLINE_COLUMNS,
    "qcdse.scalability/1": SCALABILITY_COLUMNS,
    "qcdse.qtga/1": QTGA_COLUMNS,
    "qcdse.equivalence/1": EQUIV_COLUMNS,
}


@dataclass
class ResultDocument:
    schema: str
    records: list[tuple]
    provenance: dict = field(default_factory=dict)

    @property
    def columns(self) -> tuple[str, ...]:
        return SCHEMAS[self.schema]


# -- conversion ------------------------------------------------------------------

def _grid_records(grid: ResultGrid):
    tech = grid.technology_name
    v = grid.values
    for di, ci, qi in zip(*np.nonzero(grid.feasible)):
        yield (
            tech, float(grid.deltas[di]), int(grid.n_cores[ci]), int(grid.n_q[qi]),
            float(v["j_qb"][di, ci, qi]), float(v["j_qf"][di, ci, qi]),
            float(v["j_f"][di, ci, qi]), float(v["j_i"][di, ci, qi]),
            float(v["j_c"][di, ci, qi]), int(v["n_used"][di, ci, qi]),
            float(v["gamma"][di, ci, qi]), True,
        )


def breakdown_record(b: MeritBreakdown, n_q: int, n_cores: int,
                     technology: str = "", delta: float = 0.0) -> tuple:
    return (technology, float(delta), int(n_cores), int(n_q), b.j_qb, b.j_qf, b.j_f,
            b.j_i, b.j_c, int(b.n_used), b.gamma, True)


def to_document(result, provenance: dict | None = None) -> ResultDocument:
    """Flatten any result object into a schema-tagged record list."""
    prov = dict(provenance or {})
    if isinstance(result, ResultDocument):
        return ResultDocument(result.schema, list(result.records), prov or dict(result.provenance))
    if isinstance(result, ResultGrid):
        if result.spec_hash:
            prov.setdefault("spec_hash", result.spec_hash)
        return ResultDocument("qcdse.grid/1", list(_grid_records(result)), prov)
    if isinstance(result, PeakCurve):
        rows = [(result.technology, p.delta, p.n_cores, p.n_q, p.gamma) for p in result.peaks]
        return ResultDocument("qcdse.peaks/1", rows, prov)
    if isinstance(result, IsolineSet):
        rows = []
        for line in result.lines:
            for pi, poly in enumerate(line.polylines):
                for vi, pt in enumerate(poly):
                    rows.append((result.technology, line.delta, line.level, pi, vi,
                                 pt.n_cores, pt.n_q, pt.gamma))
        return ResultDocument("qcdse.isolines/1", rows, prov)
    if isinstance(result, ScalabilityReport):
        grid = result.grid
        rows = []
        for ci, c in enumerate(grid.n_cores):
            peak = result.peak(int(c))
            after = {d.n_q_after: d.k for d in result.drops[int(c)]}
            for qi, q in enumerate(grid.n_q):
                if not grid.feasible[0, ci, qi]:
                    continue
                rows.append((grid.technology_name, float(grid.deltas[0]), int(c), int(q),
                             int(grid.values["n_used"][0, ci, qi]),
                             float(grid.gamma[0, ci, qi]), int(q) == peak.n_q,
                             after.get(int(q))))
        return ResultDocument("qcdse.scalability/1", rows, prov)
    if isinstance(result, QtgaReport):
        rows = []
        for cv in result.curves:
            if result.mode is QtgaMode.FIXED_CORES:
                for x, g in zip(cv.x, cv.gamma):
                    if not math.isnan(g):
                        rows.append((cv.technology, cv.delta, cv.fidelity, cv.quality_factor,
                                     cv.n_cores, int(x), float(g)))
            else:
                for c, q, g in zip(cv.x, cv.n_q_peak, cv.gamma):
                    rows.append((cv.technology, cv.delta, cv.fidelity, cv.quality_factor,
                                 int(c), int(q), float(g)))
        return ResultDocument("qcdse.qtga/1", rows, prov)
    if isinstance(result, EquivalenceMatch):
        r = result.reference
        ref = (r.technology, r.delta, r.n_cores, r.n_q, r.gamma)
        rows = [ref + (m.technology, m.delta, m.n_cores, m.n_q, m.gamma, m.rel_deviation)
                for m in result.matches]
        return ResultDocument("qcdse.equivalence/1", rows, prov)
    raise TypeError(f"cannot emit {type(result).__name__}")


# -- formatting ------------------------------------------------------------------

def round_sig(x: float, precision: int) -> float:
    """Round to ``precision`` significant digits; repr then gives the shortest form."""
    return float(f"{x:.{precision}g}")


def _json_value(v, precision):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return round_sig(float(v), precision)
    return v


def _csv_value(v, precision):
    v = _json_value(v, precision)
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    return repr(v) if isinstance(v, float) else str(v)


def emit(result, fmt: str = "csv", precision: int = DEFAULT_PRECISION,
         provenance: dict | None = None) -> bytes:
    """Serialize a result to CSV or JSON bytes.

    CSV carries the header row and records only; JSON also carries the
    schema id and the provenance header. Output is byte-identical for
    identical input.
    """
    if not 6 <= precision <= 17:
        raise DomainError(f"precision={precision!r} outside [6, 17]")
    doc = to_document(result, provenance)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(doc.columns)
        for rec in doc.records:
            w.writerow([_csv_value(v, precision) for v in rec])
        return buf.getvalue().encode()
    if fmt == "json":
        payload = {
            "schema": doc.schema,
            "provenance": doc.provenance,
            "columns": list(doc.columns),
            "records": [
                {c: _json_value(v, precision) for c, v in zip(doc.columns, rec)}
                for rec in doc.records
            ],
        }
        return (json.dumps(payload, indent=1, allow_nan=False) + "\n").encode()
    raise DomainError(f"unknown output format {fmt!r}")


def load_document(data: bytes | str) -> ResultDocument:
    """Parse a JSON document written by ``emit``."""
    obj = json.loads(data)
    schema = obj["schema"]
    if schema not in SCHEMAS:
        raise DomainError(f"unknown result schema {schema!r}")
    if tuple(obj["columns"]) != SCHEMAS[schema]:
        raise DomainError(f"columns do not match schema {schema!r}")
    records = [tuple(r[c] for c in SCHEMAS[schema]) for r in obj["records"]]
    return ResultDocument(schema, records, obj.get("provenance", {}))


def write_output(data: bytes, path: str | Path | None, stream=None) -> None:
    """Write to ``path``, or to ``stream`` (binary) when no path is given."""
    if path is None:
        stream.write(data)
        stream.flush()
        return
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise OSError(f"cannot write output to {str(path)!r}: {exc.strerror or exc}") from exc
