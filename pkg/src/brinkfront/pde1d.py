"""1D prediction-correction-projection scheme for the cell density model.

One step:

    predict   (1 - (C_z + C_S C_nu dt) D_xx) W* = W - C_z D_xx W
                  + dt C_S (D_x Sigma)(D_x W) + dt C_nu H
    transport (1 - dt H) rho_new = rho + dt/dx (F_{j+1/2} - F_{j-1/2}),
              face velocities u = C_S (W*_{j+1} - W*_j) / dx
    project   -C_z D_xx W_new + W_new = Sigma(rho_new)

on a cell-centered grid with zero values outside [x_min, x_max].  The
predictor carries the stiff C_nu part implicitly, so the step stays
uniform as C_nu grows.  By default the dt and C_nu terms of the predictor
act only where Sigma > 0; outside the contact set Sigma stays zero and
the predictor row reduces to (1 - C_z D_xx) W* = (1 - C_z D_xx) W.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from . import schemes
from .freeboundary import LayerGeometry, Zone, profile
from .model import ModelParams, growth_rate_array, sigma_of_rho_array

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    n: int

    def __post_init__(self) -> None:
        if self.n < 3:
            raise ValueError(f"need at least 3 cells, got {self.n!r}")
        if not self.x_max > self.x_min:
            raise ValueError(f"empty domain [{self.x_min!r}, {self.x_max!r}]")

    @classmethod
    def symmetric(cls, half_width: float, cells_per_half: int) -> "Grid1D":
        return cls(-half_width, half_width, 2 * cells_per_half)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n

    @property
    def nodes(self) -> np.ndarray:
        return self.x_min + (np.arange(self.n) + 0.5) * self.dx


@dataclass
class SimState:
    t: float
    rho: np.ndarray
    sigma: np.ndarray
    w: np.ndarray
    grid: Grid1D

    def copy(self) -> "SimState":
        return replace(self, rho=self.rho.copy(), sigma=self.sigma.copy(), w=self.w.copy())


# ---------------------------------------------------------------------------
# Stencils (zero values outside the domain)
# ---------------------------------------------------------------------------


def second_difference(v: np.ndarray, dx: float) -> np.ndarray:
    padded = np.concatenate(([0.0], v, [0.0]))
    return (padded[:-2] - 2.0 * padded[1:-1] + padded[2:]) / (dx * dx)


def central_difference(v: np.ndarray, dx: float) -> np.ndarray:
    padded = np.concatenate(([0.0], v, [0.0]))
    return (padded[2:] - padded[:-2]) / (2.0 * dx)


def face_velocities(w: np.ndarray, p: ModelParams, dx: float) -> np.ndarray:
    """C_S dW/dx on all n + 1 faces."""
    padded = np.concatenate(([0.0], w, [0.0]))
    return p.c_s * np.diff(padded) / dx


def helmholtz_bands(
    n: int, coeff: float | np.ndarray, dx: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Bands of I - coeff * D_xx; *coeff* may vary from row to row."""
    coeff = np.broadcast_to(np.asarray(coeff, dtype=float), (n,))
    off = -coeff / (dx * dx)
    diag = 1.0 + 2.0 * coeff / (dx * dx)
    return off, diag, off.copy()


# ---------------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------------


def pressure_support(sigma: np.ndarray, gated: bool) -> np.ndarray:
    """1 on rows where the pressure equation drives the predictor, else 0.

    With *gated* these are the contact cells Sigma > 0, otherwise all cells.
    """
    if not gated:
        return np.ones_like(sigma, dtype=float)
    return (sigma > 0.0).astype(float)


def predict_w(state: SimState, p: ModelParams, dt: float, gated: bool = True) -> np.ndarray:
    """Predictor W* of the potential.

    Off the pressure support the row reduces to
    (1 - C_z D_xx) W* = (1 - C_z D_xx) W.
    """
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    dx = state.grid.dx
    stiff = p.c_s * p.c_nu * dt
    if not math.isfinite(stiff):
        raise ValueError(f"C_S*C_nu*dt overflows (dt={dt!r}, C_nu={p.c_nu!r})")
    chi = pressure_support(state.sigma, gated)
    h = growth_rate_array(state.sigma, p)
    rhs = (
        state.w
        - p.c_z * second_difference(state.w, dx)
        + chi * dt * p.c_s * central_difference(state.sigma, dx) * central_difference(state.w, dx)
        + chi * dt * p.c_nu * h
    )
    coeff = p.c_z + stiff * chi
    return schemes.solve_tridiagonal(*helmholtz_bands(state.grid.n, coeff, dx), rhs)


def advance_rho(
    state: SimState,
    w_star: np.ndarray,
    p: ModelParams,
    dt: float,
    cfl: float = schemes.DEFAULT_CFL,
) -> np.ndarray:
    """Transport rho with the predicted velocity and apply implicit growth."""
    dx = state.grid.dx
    u = face_velocities(w_star, p, dx)
    h = growth_rate_array(state.sigma, p)
    rho, _ = schemes.transport_update(state.rho, u, h, dt, dx, cfl)
    return schemes.enforce_nonnegative(rho, state.rho, dt)


def project_w(rho_next: np.ndarray, p: ModelParams, grid: Grid1D) -> tuple[np.ndarray, np.ndarray]:
    """Sigma from the state law and W from the Helmholtz problem."""
    sigma = sigma_of_rho_array(rho_next, p)
    w = schemes.solve_tridiagonal(*helmholtz_bands(grid.n, p.c_z, grid.dx), sigma)
    return sigma, w


def step(
    state: SimState,
    p: ModelParams,
    dt: float,
    cfl: float = schemes.DEFAULT_CFL,
    gated: bool = True,
) -> SimState:
    w_star = predict_w(state, p, dt, gated)
    rho = advance_rho(state, w_star, p, dt, cfl)
    sigma, w = project_w(rho, p, state.grid)
    return SimState(t=state.t + dt, rho=rho, sigma=sigma, w=w, grid=state.grid)


def choose_dt(
    state: SimState,
    p: ModelParams,
    cfl: float = schemes.DEFAULT_CFL,
    dt_max: float = 0.01,
    pressure_step: float = schemes.PRESSURE_STEP,
) -> float:
    """Admissible step from the current velocities and growth rates.

    Besides the transport and growth limits, C_nu * dt * max(H) stays
    below *pressure_step* * C_p, the pressure gained per step.
    """
    u = face_velocities(state.w, p, state.grid.dx)
    h = growth_rate_array(state.sigma, p)
    return min(dt_max, schemes.admissible_dt(
        u, h, state.grid.dx, cfl, pressure_rate=p.c_nu / p.c_p, pressure_step=pressure_step
    ))


# ---------------------------------------------------------------------------
# Initial data and drivers
# ---------------------------------------------------------------------------


def init_from_analytic(geom: LayerGeometry, p: ModelParams, grid: Grid1D) -> SimState:
    """State sampled from the three-zone solution with regularization p.eta."""
    prof = profile(1, geom, p, p.eta, grid.nodes)
    inside = prof.zone != Zone.OMEGA3.value
    rho = np.where(inside, np.exp(prof.sigma / p.c_nu), 0.0)
    return SimState(t=0.0, rho=rho, sigma=np.where(inside, prof.sigma, 0.0), w=prof.w.copy(), grid=grid)


def edge_fraction(w: np.ndarray) -> float:
    """max |W| over the two boundary cells relative to max |W|."""
    peak = float(np.max(np.abs(w)))
    if peak == 0.0:
        return 0.0
    return max(abs(float(w[0])), abs(float(w[-1]))) / peak


def interior_relation_residual(
    state: SimState, w_star: np.ndarray, p: ModelParams, margin: int = 3
) -> float:
    """max |-C_S D_xx W* - H| over cells at least *margin* cells inside the tumor."""
    inside = state.rho >= 1.0
    for _ in range(margin):
        inside = inside & np.roll(inside, 1) & np.roll(inside, -1)
    if not inside.any():
        return 0.0
    h = growth_rate_array(state.sigma, p)
    res = -p.c_s * second_difference(w_star, state.grid.dx) - h
    return float(np.max(np.abs(res[inside])))


StepHook = Callable[[int, SimState], None]


def simulate(
    state: SimState,
    p: ModelParams,
    t_end: float,
    dt: float | None = None,
    cfl: float = schemes.DEFAULT_CFL,
    dt_max: float = 0.01,
    pressure_step: float = schemes.PRESSURE_STEP,
    on_step: StepHook | None = None,
    edge_tolerance: float = 1e-8,
    gated: bool = True,
) -> SimState:
    """Step *state* to *t_end*; with dt=None each step uses ``choose_dt``."""
    warned = False

    def check_edges(current: SimState) -> None:
        nonlocal warned
        frac = edge_fraction(current.w)
        if not warned and frac > edge_tolerance:
            logger.warning(
                "W at the domain edge is %.3g of its maximum at t=%.4g; widen the domain",
                frac, current.t,
            )
            warned = True

    return schemes.march(
        state,
        t_end,
        advance=lambda s, h: step(s, p, h, cfl, gated),
        propose_dt=lambda s: dt if dt is not None else choose_dt(s, p, cfl, dt_max, pressure_step),
        on_step=on_step,
        after_step=check_edges,
        retries=0 if dt is not None else schemes.MAX_RETRIES,
    )
