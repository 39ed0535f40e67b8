"""Orchestration of every command and CSV emission.

Each ``run_*`` function writes its files under ``cfg.output.directory``
and returns a RunSummary.  CSV files carry a header row, 17 significant
digits and LF line endings, so identical configurations give identical
bytes.
"""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import diagnostics, freeboundary, pde1d, pde_radial
from .config import RunConfig
from .diagnostics import DiagnosticsRecord, FitMode, FitUnreliable
from .freeboundary import LayerGeometry

logger = logging.getLogger(__name__)

FRONT_COLUMNS = ("t", "R", "R1", "R2", "speed", "jump")
PROFILE_COLUMNS = ("x_or_r", "zone", "W", "Sigma")
RELATION_COLUMNS = ("R", "R1", "R2")
SNAPSHOT_COLUMNS = ("x_or_r", "rho", "Sigma", "W")
DISCREPANCY_COLUMNS = (
    "t", "R_pde", "R_dae", "jump_pde", "jump_dae",
    "abs_err_R", "rel_err_R", "abs_err_jump", "rel_err_jump",
)
SUMMARY_COLUMNS = ("value", "final_speed", "final_jump", "fitted_rate")

# share of the run over which the final speed is averaged
_TAIL = 0.2


@dataclass
class RunSummary:
    final_speed: float = math.nan
    final_jump: float = math.nan
    fitted_rate: float = math.nan
    files: list[Path] = field(default_factory=list)


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def _cell(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[object]]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    logger.info("wrote %s", path)
    return path


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


# ---------------------------------------------------------------------------
# Shared pieces
# ---------------------------------------------------------------------------


def _initial_geometry(cfg: RunConfig, dim: int, eta: float) -> LayerGeometry:
    r0 = cfg.geometry.r0
    r1 = cfg.geometry.r1_0
    if r1 is None:
        r1 = freeboundary.solve_r1_given_r(dim, r0, cfg.params, eta)
    return LayerGeometry(r1=r1, r=r0)


def _rate_fit(dim: int, t: np.ndarray, front: np.ndarray, speed: np.ndarray, limit: float) -> float:
    """Slope of |speed - limit|: exponential in t (1D), algebraic in R otherwise."""
    try:
        if dim == 1:
            return diagnostics.fit_rate(t, speed, FitMode.EXPONENTIAL_IN_T, limit).slope
        return diagnostics.fit_rate(front, speed, FitMode.ALGEBRAIC_IN_R, limit).slope
    except FitUnreliable as exc:
        logger.info("rate fit skipped: %s", exc)
        return math.nan


def _speed_limit(cfg: RunConfig) -> float:
    wave = freeboundary.traveling_wave(cfg.params)
    return wave.speed if isinstance(wave, freeboundary.TravelingWave) else math.nan


def _tail_mean(values: np.ndarray) -> float:
    finite = values[np.isfinite(values)]
    if finite.size == 0:
        return math.nan
    start = int(len(finite) * (1.0 - _TAIL))
    return float(np.mean(finite[min(start, len(finite) - 1):]))


# ---------------------------------------------------------------------------
# Analytic commands
# ---------------------------------------------------------------------------


def run_analytic(cfg: RunConfig) -> RunSummary:
    dim = cfg.geometry.dim
    series = freeboundary.integrate_front(
        dim, cfg.geometry.r0, cfg.params, cfg.time.t_end, cfg.analytic_dt
    )
    path = write_csv(
        cfg.output.directory / "front.csv",
        FRONT_COLUMNS,
        zip(series.t, series.r, series.r1, series.r2, series.speed, series.jump),
    )
    return RunSummary(
        final_speed=float(series.speed[-1]),
        final_jump=float(series.jump[-1]),
        fitted_rate=_rate_fit(dim, series.t, series.r, series.speed, _speed_limit(cfg)),
        files=[path],
    )


def run_profile(cfg: RunConfig) -> RunSummary:
    dim = cfg.geometry.dim
    r, r1, extent, points = cfg.profile
    r = cfg.geometry.r0 if r is None else r
    if r1 is None:
        r1 = freeboundary.solve_r1_given_r(dim, r, cfg.params, cfg.params.eta)
    geom = LayerGeometry(r1=r1, r=r)
    lo = -extent * r if dim == 1 else 0.0
    grid = np.linspace(lo, extent * r, points)
    prof = freeboundary.profile(dim, geom, cfg.params, cfg.params.eta, grid)
    path = write_csv(
        cfg.output.directory / "profile.csv",
        PROFILE_COLUMNS,
        zip(prof.grid, prof.zone, prof.w, prof.sigma),
    )
    return RunSummary(
        final_speed=freeboundary.front_speed(dim, r, r1, cfg.params, cfg.params.eta),
        final_jump=freeboundary.pressure_jump(dim, r, r1, cfg.params, cfg.params.eta),
        files=[path],
    )


def run_relation(cfg: RunConfig) -> RunSummary:
    r_min, r_max, count = cfg.relation
    radii = np.linspace(r_min, r_max, count)
    rows = freeboundary.relation_table(cfg.geometry.dim, radii, cfg.params)
    path = write_csv(cfg.output.directory / "relation.csv", RELATION_COLUMNS, rows)
    return RunSummary(files=[path])


# ---------------------------------------------------------------------------
# PDE commands
# ---------------------------------------------------------------------------


@dataclass
class _Recorder:
    """on_step hook: snapshots and diagnostics rows."""

    cfg: RunConfig
    directory: Path
    records: list[DiagnosticsRecord] = field(default_factory=list)
    snapshots: list[Path] = field(default_factory=list)

    def __call__(self, k: int, state) -> None:
        out = self.cfg.output
        if k % out.diagnostics_stride == 0:
            front = self.cfg.front
            self.records.append(
                diagnostics.record(
                    state, self.cfg.params,
                    threshold=front.threshold,
                    jump_threshold=front.jump_threshold,
                    use_median3=front.median3,
                )
            )
        if k % out.snapshot_stride == 0:
            path = self.directory / f"snapshot_{len(self.snapshots):04d}.csv"
            self.snapshots.append(
                write_csv(path, SNAPSHOT_COLUMNS, zip(state.grid.nodes, state.rho, state.sigma, state.w))
            )

    def finish(self) -> list[DiagnosticsRecord]:
        """Fill the speed column from the recorded fronts."""
        t = np.array([r.t for r in self.records])
        front = np.array([r.front for r in self.records])
        ok = np.isfinite(front)
        if ok.sum() >= 2:
            speed = np.full(len(t), math.nan)
            speed[ok] = diagnostics.estimate_speed(t[ok], front[ok])
            self.records = [replace(r, speed=float(s)) for r, s in zip(self.records, speed)]
        return self.records


def _simulate(cfg: RunConfig, radial: bool, directory: Path) -> tuple[_Recorder, object]:
    p = cfg.params
    dt = cfg.time.dt
    if radial:
        geom = _initial_geometry(cfg, 2, p.eta)
        grid = pde_radial.RadialGrid(cfg.grid.l_r, cfg.grid.n)
        state = pde_radial.init_from_analytic_radial(geom, p, grid)
    else:
        geom = _initial_geometry(cfg, 1, p.eta)
        grid = pde1d.Grid1D.symmetric(cfg.grid.x_max, cfg.grid.n)
        state = pde1d.init_from_analytic(geom, p, grid)
    logger.info(
        "%s run: R1=%.6g R=%.6g, %d cells, t_end=%g",
        "radial" if radial else "1D", geom.r1, geom.r, grid.n, cfg.time.t_end,
    )
    recorder = _Recorder(cfg, directory)
    if radial:
        final = pde_radial.simulate_radial(
            state, p, cfg.time.t_end, dt=dt, cfl=cfg.time.cfl, dt_max=cfg.time.dt_max,
            pressure_step=cfg.time.pressure_step,
            closure=cfg.gradient_closure, on_step=recorder, gated=cfg.gated_predictor,
        )
    else:
        final = pde1d.simulate(
            state, p, cfg.time.t_end, dt=dt, cfl=cfg.time.cfl, dt_max=cfg.time.dt_max,
            pressure_step=cfg.time.pressure_step,
            on_step=recorder, gated=cfg.gated_predictor,
        )
    recorder.finish()
    return recorder, final


def _run_pde(cfg: RunConfig, radial: bool) -> RunSummary:
    directory = cfg.output.directory
    recorder, _ = _simulate(cfg, radial, directory)
    records = recorder.records
    diag = write_csv(
        directory / "diagnostics.csv", DiagnosticsRecord.FIELDS, (r.as_row() for r in records)
    )
    t = np.array([r.t for r in records])
    front = np.array([r.front for r in records])
    speed = np.array([r.speed for r in records])
    ok = np.isfinite(speed)
    return RunSummary(
        final_speed=_tail_mean(speed),
        final_jump=float(records[-1].jump) if records else math.nan,
        fitted_rate=_rate_fit(2 if radial else 1, t[ok], front[ok], speed[ok], _speed_limit(cfg)),
        files=[*recorder.snapshots, diag],
    )


def run_sim1d(cfg: RunConfig) -> RunSummary:
    return _run_pde(cfg, radial=False)


def run_simradial(cfg: RunConfig) -> RunSummary:
    return _run_pde(cfg, radial=True)


def run_compare(cfg: RunConfig, radial: bool) -> RunSummary:
    """PDE and front DAE from the same initial radius, side by side."""
    directory = cfg.output.directory
    recorder, _ = _simulate(cfg, radial, directory)
    dim = 2 if radial else 1
    series = freeboundary.integrate_front(
        dim, cfg.geometry.r0, cfg.params, cfg.time.t_end, cfg.analytic_dt
    )
    rows = []
    for rec in recorder.records:
        r_dae = float(np.interp(rec.t, series.t, series.r))
        jump_dae = float(np.interp(rec.t, series.t, series.jump))
        abs_r = abs(rec.front - r_dae)
        abs_j = abs(rec.jump - jump_dae)
        rows.append((
            rec.t, rec.front, r_dae, rec.jump, jump_dae,
            abs_r, abs_r / abs(r_dae), abs_j, abs_j / abs(jump_dae) if jump_dae else math.nan,
        ))
    path = write_csv(directory / "discrepancy.csv", DISCREPANCY_COLUMNS, rows)
    speed = np.array([r.speed for r in recorder.records])
    return RunSummary(
        final_speed=_tail_mean(speed),
        final_jump=float(recorder.records[-1].jump) if recorder.records else math.nan,
        files=[*recorder.snapshots, path],
    )


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------


_SINGLE_RUNNERS = {
    "analytic": run_analytic,
    "profile": run_profile,
    "relation": run_relation,
    "sim1d": run_sim1d,
    "simradial": run_simradial,
}


def _sweep_entry(cfg: RunConfig) -> RunSummary:
    return _SINGLE_RUNNERS[cfg.command](cfg)


def _format_value(value: float) -> str:
    return f"{value:g}"


def run_sweep(cfg: RunConfig, jobs: int = 1) -> RunSummary:
    """One run per sweep value, in its own subdirectory, plus summary.csv."""
    sweep = cfg.sweep
    entries = [
        cfg.with_values(
            sweep.command,
            {
                sweep.parameter: value,
                "output.directory": str(cfg.output.directory / f"{sweep.parameter}={_format_value(value)}"),
            },
        )
        for value in sweep.values
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_entry, entries))
    else:
        results = [_sweep_entry(entry) for entry in entries]
    for value, res in zip(sweep.values, results):
        logger.info("sweep %s=%g: speed %.6g, jump %.6g", sweep.parameter, value, res.final_speed, res.final_jump)
    path = write_csv(
        cfg.output.directory / "summary.csv",
        SUMMARY_COLUMNS,
        ((float(v), r.final_speed, r.final_jump, r.fitted_rate) for v, r in zip(sweep.values, results)),
    )
    files = [f for r in results for f in r.files]
    return RunSummary(files=[*files, path])


def run(cfg: RunConfig, jobs: int = 1, variant: str | None = None) -> RunSummary:
    """Dispatch on ``cfg.command``; *variant* is "1d" or "radial" for compare."""
    if cfg.command in _SINGLE_RUNNERS:
        return _SINGLE_RUNNERS[cfg.command](cfg)
    if cfg.command == "compare":
        return run_compare(cfg, radial=variant == "radial")
    if cfg.command == "sweep":
        return run_sweep(cfg, jobs)
    raise ValueError(f"unknown command {cfg.command!r}")
