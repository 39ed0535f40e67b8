"""Measurements taken from simulation states and front time series.

Front position, pressure jump, volume, speed estimates, convergence-rate
fits and the a priori stability monitors of the normalized model.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np
from scipy import ndimage, stats

from .model import ModelParams
from .pde1d import SimState
from .pde_radial import RadialGrid, RadialState

logger = logging.getLogger(__name__)

FRONT_THRESHOLD = 0.5
JUMP_THRESHOLD = 1.0
NOISE_FLOOR = 1e-13
L2_GROWTH_RATE = 3.5


class NotDetected(Exception):
    """No front crossing in the density profile."""


class FitUnreliable(Exception):
    def __init__(self, message: str, samples: int) -> None:
        super().__init__(message)
        self.samples = samples


class FitMode(Enum):
    EXPONENTIAL_IN_T = "exponential_in_t"
    ALGEBRAIC_IN_R = "algebraic_in_r"


@dataclass(frozen=True)
class FitResult:
    slope: float
    prefactor: float
    r2fit: float
    samples: int


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    front: float
    speed: float
    jump: float
    volume: float
    l2_rho: float
    l2_sigma: float
    max_sigma: float
    max_w: float

    FIELDS = ("t", "front", "speed", "jump", "volume", "l2_rho", "l2_sigma", "max_sigma", "max_w")

    def as_row(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in self.FIELDS)


@dataclass(frozen=True)
class StabilityReport:
    l2_rho: float
    l2_sigma: float
    min_sigma: float
    max_sigma: float
    min_w: float
    max_w: float
    support_volume: float
    flags: tuple[str, ...] = field(default=())


State = SimState | RadialState


def _spacing(state: State) -> float:
    return state.grid.dr if isinstance(state.grid, RadialGrid) else state.grid.dx


def _weights(state: State) -> np.ndarray:
    """Quadrature weights: dx in 1D, 2 pi r dr radially."""
    h = _spacing(state)
    if isinstance(state.grid, RadialGrid):
        return 2.0 * math.pi * state.grid.nodes * h
    return np.full(state.grid.n, h)


# ---------------------------------------------------------------------------
# Front, jump, volume
# ---------------------------------------------------------------------------


def detect_front(state: State, threshold: float = FRONT_THRESHOLD) -> float:
    """Largest position where rho drops through *threshold*, linearly interpolated."""
    rho = state.rho
    x = state.grid.nodes
    above = rho >= threshold
    if not above.any():
        raise NotDetected(f"rho never reaches {threshold!r}")
    if above[-1]:
        raise NotDetected("rho is above the threshold at the domain edge")
    crossings = np.flatnonzero(above[:-1] & ~above[1:])
    j = int(crossings[-1])
    frac = (rho[j] - threshold) / (rho[j] - rho[j + 1])
    return float(x[j] + frac * (x[j + 1] - x[j]))


def median3(v: np.ndarray) -> np.ndarray:
    """Running median over three neighbours; the end values are kept."""
    return ndimage.median_filter(np.asarray(v, dtype=float), size=3, mode="nearest")


def measure_jump(
    state: State,
    threshold: float = FRONT_THRESHOLD,
    jump_threshold: float = JUMP_THRESHOLD,
    use_median3: bool = False,
) -> float:
    """Sigma at the outermost cell inside the front with rho >= jump_threshold.

    The default JUMP_THRESHOLD = 1 keeps only contact cells.  Cells with
    0.5 <= rho < 1 sit inside the front but carry Sigma = 0, so the front
    threshold would read the jump as zero.
    """
    front = detect_front(state, threshold)
    x = state.grid.nodes
    sigma = median3(state.sigma) if use_median3 else state.sigma
    inside = np.flatnonzero((state.rho >= jump_threshold) & (x <= front))
    if inside.size == 0:
        return 0.0
    return float(sigma[inside[-1]])


def volume(state: State) -> float:
    return float(np.sum(state.rho * _weights(state)))


# ---------------------------------------------------------------------------
# Time series
# ---------------------------------------------------------------------------


def estimate_speed(t: Sequence[float], front: Sequence[float], window: int = 5) -> np.ndarray:
    """Least-squares slope of the front over a sliding window of samples.

    Interior samples use a centered window; near the ends the window is
    shifted so it stays inside the series.
    """
    t = np.asarray(t, dtype=float)
    front = np.asarray(front, dtype=float)
    n = len(t)
    if n < 2:
        raise ValueError("need at least two samples to estimate a speed")
    width = min(max(window, 2), n)
    half = width // 2
    out = np.empty(n)
    for i in range(n):
        lo = min(max(i - half, 0), n - width)
        ts, fs = t[lo : lo + width], front[lo : lo + width]
        out[i] = stats.linregress(ts, fs).slope
    return out


def fit_rate(
    x: Sequence[float],
    y: Sequence[float],
    mode: FitMode | str,
    limit: float,
    floor: float = NOISE_FLOOR,
    ceiling: float | None = None,
) -> FitResult:
    """Fit |y - limit| to prefactor * exp(slope * x) or prefactor * x**slope.

    Samples at or below *floor* (and above *ceiling*, when given) are dropped.
    """
    mode = FitMode(mode)
    x = np.asarray(x, dtype=float)
    gap = np.abs(np.asarray(y, dtype=float) - limit)
    usable = np.isfinite(gap) & (gap > floor)
    if ceiling is not None:
        usable &= gap <= ceiling
    if mode is FitMode.ALGEBRAIC_IN_R:
        usable &= x > 0
    count = int(usable.sum())
    if count < 4:
        raise FitUnreliable(f"only {count} samples above the noise floor", count)
    xs = x[usable] if mode is FitMode.EXPONENTIAL_IN_T else np.log(x[usable])
    fit = stats.linregress(xs, np.log(gap[usable]))
    return FitResult(
        slope=float(fit.slope),
        prefactor=float(math.exp(fit.intercept)),
        r2fit=float(fit.rvalue ** 2),
        samples=count,
    )


# ---------------------------------------------------------------------------
# Stability monitors
# ---------------------------------------------------------------------------


def stability_monitors(state: State, p: ModelParams) -> StabilityReport:
    """Norms and bounds; flags are raised only for the normalized model."""
    weights = _weights(state)
    l2_rho = math.sqrt(float(np.sum(state.rho ** 2 * weights)))
    l2_sigma = math.sqrt(float(np.sum(state.sigma ** 2 * weights)))
    support = float(np.sum(weights[state.sigma > 0]))
    report = dict(
        l2_rho=l2_rho,
        l2_sigma=l2_sigma,
        min_sigma=float(state.sigma.min()),
        max_sigma=float(state.sigma.max()),
        min_w=float(state.w.min()),
        max_w=float(state.w.max()),
        support_volume=support,
    )
    flags: list[str] = []
    if p.normalized():
        tol = 5.0 * p.eta + 2.0 * _spacing(state)
        if report["max_sigma"] > 1.0 + tol:
            flags.append("sigma_above_one")
        if report["min_sigma"] < -tol:
            flags.append("sigma_negative")
        if report["max_w"] > 1.0 + tol:
            flags.append("w_above_one")
        if report["min_w"] < -tol:
            flags.append("w_negative")
        if flags:
            logger.warning("t=%.6g: stability bounds violated: %s", state.t, ", ".join(flags))
    return StabilityReport(flags=tuple(flags), **report)


def l2_growth_ok(prev_l2: float, cur_l2: float, dt: float, rate: float = L2_GROWTH_RATE) -> bool:
    """||rho||^2 grew by at most exp(rate * dt) over a step of length dt."""
    return cur_l2 ** 2 <= prev_l2 ** 2 * math.exp(rate * dt) * (1.0 + 1e-12)


def record(
    state: State,
    p: ModelParams,
    speed: float = math.nan,
    threshold: float = FRONT_THRESHOLD,
    jump_threshold: float = JUMP_THRESHOLD,
    use_median3: bool = False,
) -> DiagnosticsRecord:
    """One diagnostics row; front and jump are NaN when no front is found."""
    try:
        front = detect_front(state, threshold)
        jump = measure_jump(state, threshold, jump_threshold, use_median3)
    except NotDetected:
        front = jump = math.nan
    report = stability_monitors(state, p)
    return DiagnosticsRecord(
        t=state.t,
        front=front,
        speed=speed,
        jump=jump,
        volume=volume(state),
        l2_rho=report.l2_rho,
        l2_sigma=report.l2_sigma,
        max_sigma=report.max_sigma,
        max_w=report.max_w,
    )
