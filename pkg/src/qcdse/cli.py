"""Command-line entry point: ``qcdse <subcommand> --config run.json``."""
from __future__ import annotations

import argparse
import datetime as dt
import logging
import os
import sys

from . import __version__, analyses, explorer, merit, results
from .config import RunConfig, load_config
from .errors import EvaluationError, QcdseError

log = logging.getLogger("qcdse")

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2
SUBCOMMANDS = ("eval", "sweep", "scalability", "qtga", "isolines", "peaks", "equiv")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", required=True, help="run configuration (JSON)")
    shared.add_argument("--catalog", help="technology catalog (JSON); overrides the config")
    shared.add_argument("--out", help="output file (default: stdout)")
    shared.add_argument("--format", choices=("csv", "json"), help="output format")
    shared.add_argument("--precision", type=int, help="significant digits, 6..17")
    shared.add_argument("--workers", type=int, default=None,
                        help="parallel evaluation hint; results do not depend on it")
    shared.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="qcdse", description="Design-space exploration of multi-core quantum computers")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "eval": "evaluate one design point",
        "sweep": "evaluate the full grid",
        "scalability": "gamma vs qubits per core count, with peaks and saw-tooth drops",
        "qtga": "technology gap analysis under delta evolution",
        "isolines": "equal-gamma curves over (n_q, n_cores)",
        "peaks": "peak gamma per core count",
        "equiv": "designs matching a reference design's gamma",
    }
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[shared], help=helps[name])
    return parser


def _require_axis(cfg: RunConfig):
    if cfg.n_q_axis is None:
        raise QcdseError("config needs sweep.n_q for this subcommand")
    return cfg.n_q_axis


def _spec(cfg: RunConfig, technology=None, deltas=None, n_q_axis=None, n_cores_axis=None):
    tech = technology if technology is not None else cfg.profile()
    return explorer.SweepSpec(
        scenario=cfg.scenario,
        n_q_axis=tuple(n_q_axis if n_q_axis is not None else _require_axis(cfg)),
        n_cores_axis=tuple(n_cores_axis if n_cores_axis is not None else cfg.n_cores_axis),
        technology=tech,
        delta_axis=tuple(deltas if deltas is not None else cfg.deltas),
        constraints=cfg.constraints,
    )


def _cmd_eval(cfg: RunConfig, workers):
    if cfg.point is None:
        raise QcdseError("config needs a 'point' for eval")
    b = merit.gamma(cfg.scenario, cfg.point)
    doc = results.ResultDocument(
        "qcdse.grid/1",
        [results.breakdown_record(b, cfg.point.n_q, cfg.point.n_cores, cfg.technology or "")],
    )
    return doc


def _cmd_sweep(cfg, workers):
    return explorer.sweep(_spec(cfg), workers=workers)


def _cmd_peaks(cfg, workers):
    return explorer.peak_by_cores(explorer.sweep(_spec(cfg), workers=workers))


def _cmd_isolines(cfg, workers):
    grid = explorer.sweep(_spec(cfg), workers=workers)
    return explorer.isolines(grid, cfg.analysis.levels, cfg.analysis.tol_rel)


def _cmd_scalability(cfg, workers):
    n_q = cfg.n_q_axis if cfg.n_q_axis is not None else (10, cfg.scenario.n_q_norm, explorer.DEFAULT_N_Q_POINTS)
    cores = cfg.n_cores_axis if "n_cores" in cfg.raw.get("sweep", {}) else analyses.PAPER_CORES
    report = analyses.scalability_analysis(cfg.scenario, cores, n_q if cfg.n_q_axis is None else list(n_q),
                                           workers=workers)
    report.grid.technology_name = cfg.technology or ""
    return report


def _cmd_qtga(cfg, workers):
    a = cfg.analysis
    names = a.technologies or [t.name for t in cfg.catalog]
    techs = [cfg.profile(n) for n in names]
    cores = cfg.n_cores_axis if "n_cores" in cfg.raw.get("sweep", {}) else None
    return analyses.qtga(
        techs, a.deltas or list(analyses.DEFAULT_DELTAS), a.mode, cfg.scenario,
        fixed_cores=a.fixed_cores, n_q_axis=cfg.n_q_axis, n_cores_axis=cores, workers=workers,
    )


def _cmd_equiv(cfg, workers):
    a = cfg.analysis
    if a.reference is None:
        raise QcdseError("config needs analysis.reference for equiv")
    ref = a.reference
    target = a.target or {"delta": 0.0}
    ref_tech = cfg.profile(ref.get("technology"))
    tgt_tech = cfg.profile(target.get("technology") or ref.get("technology"))
    axis = sorted(set(_require_axis(cfg)) | {ref["n_q"]})
    cores = sorted(set(cfg.n_cores_axis) | {ref["n_cores"]})
    grid_a = explorer.sweep(_spec(cfg, ref_tech, [ref["delta"]], axis, cores), workers=workers)
    grid_b = explorer.sweep(_spec(cfg, tgt_tech, [target["delta"]], axis, cores), workers=workers)
    idx = grid_a.index_of(float(ref["delta"]), ref["n_cores"], ref["n_q"])
    return analyses.equivalent_design(grid_a, grid_b, idx, a.match_tol_rel, same_cores=a.same_cores)


COMMANDS = {
    "eval": _cmd_eval, "sweep": _cmd_sweep, "scalability": _cmd_scalability,
    "qtga": _cmd_qtga, "isolines": _cmd_isolines, "peaks": _cmd_peaks, "equiv": _cmd_equiv,
}


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    now = dt.datetime.fromtimestamp(int(epoch), dt.timezone.utc) if epoch else dt.datetime.now(dt.timezone.utc)
    return now.replace(microsecond=0).isoformat()


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout.buffer
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=stderr)
        return EXIT_INVALID
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)

    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=stderr,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config, catalog_path=args.catalog)
        fmt = args.format or cfg.output.format
        precision = args.precision if args.precision is not None else cfg.output.precision
        if not 6 <= precision <= 17:
            raise QcdseError(f"--precision {precision} outside [6, 17]")
        out = args.out or cfg.output.path
    except QcdseError as exc:
        print(f"qcdse: {exc}", file=stderr)
        return EXIT_INVALID

    try:
        result = COMMANDS[args.command](cfg, args.workers)
        provenance = {
            "tool_version": __version__,
            "command": args.command,
            "config_hash": cfg.config_hash,
            "catalog_hash": cfg.catalog_hash,
            "timestamp": _timestamp(),
        }
        data = results.emit(result, fmt, precision, provenance)
        results.write_output(data, out, stdout)
    except EvaluationError as exc:
        print(f"qcdse: evaluation failed: {exc}", file=stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"qcdse: {exc}", file=stderr)
        return EXIT_RUNTIME
    except QcdseError as exc:
        print(f"qcdse: {exc}", file=stderr)
        return EXIT_INVALID
    log.info("%s done", args.command)
    return EXIT_OK


def main():
    sys.exit(run())
