"""Radially symmetric 2D version of the prediction-correction-projection scheme.

Nodes sit at r_j = dr/2 + (j-1) dr, so there is no node at the origin.
The radial Laplacian is written in flux form with face radii r_{j+1/2};
the faces at r = 0 and r = l_r carry zero flux.  Density is transported
as g = r * rho with the same central-upwind update as in 1D.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from . import schemes
from .freeboundary import LayerGeometry, Zone, profile
from .model import ModelParams, growth_rate_array, sigma_of_rho_array
from .pde1d import StepHook, pressure_support

logger = logging.getLogger(__name__)


class GradientClosure(Enum):
    VERBATIM = "verbatim"     # (W_2 - W_1) / (2 dr) at both ends
    ONE_SIDED = "one_sided"   # (W_2 - W_1) / dr


@dataclass(frozen=True)
class RadialGrid:
    l_r: float
    n: int

    def __post_init__(self) -> None:
        if self.n < 3:
            raise ValueError(f"need at least 3 cells, got {self.n!r}")
        if not self.l_r > 0:
            raise ValueError(f"l_r must be > 0, got {self.l_r!r}")

    @property
    def dr(self) -> float:
        return self.l_r / self.n

    @property
    def nodes(self) -> np.ndarray:
        return (np.arange(self.n) + 0.5) * self.dr

    @property
    def faces(self) -> np.ndarray:
        """r_{j-1/2} for j = 1..n+1, i.e. 0, dr, ..., l_r."""
        return np.arange(self.n + 1) * self.dr


@dataclass
class RadialState:
    t: float
    rho: np.ndarray
    sigma: np.ndarray
    w: np.ndarray
    grid: RadialGrid

    def copy(self) -> "RadialState":
        return replace(self, rho=self.rho.copy(), sigma=self.sigma.copy(), w=self.w.copy())


# ---------------------------------------------------------------------------
# Operators
# ---------------------------------------------------------------------------


def _laplacian_bands(grid: RadialGrid) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    r = grid.nodes
    f = grid.faces.copy()
    f[0] = 0.0
    f[-1] = 0.0       # no flux through r = l_r
    scale = 1.0 / (r * grid.dr * grid.dr)
    lower = f[:-1] * scale
    upper = f[1:] * scale
    return lower, -(lower + upper), upper


def radial_laplacian(w: np.ndarray, grid: RadialGrid) -> np.ndarray:
    """(1/r)(r W')' with zero-flux closures at both ends."""
    if len(w) != grid.n:
        raise ValueError(f"expected {grid.n} values, got {len(w)}")
    return schemes.tridiagonal_apply(*_laplacian_bands(grid), np.asarray(w, dtype=float))


def radial_gradient(
    v: np.ndarray,
    grid: RadialGrid,
    closure: GradientClosure | str = GradientClosure.VERBATIM,
) -> np.ndarray:
    closure = GradientClosure(closure)
    dr = grid.dr
    out = np.empty_like(v, dtype=float)
    out[1:-1] = (v[2:] - v[:-2]) / (2.0 * dr)
    end = 2.0 * dr if closure is GradientClosure.VERBATIM else dr
    out[0] = (v[1] - v[0]) / end
    out[-1] = (v[-1] - v[-2]) / end
    return out


def _helmholtz_bands(grid: RadialGrid, coeff: float | np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    lower, diag, upper = _laplacian_bands(grid)
    return -coeff * lower, 1.0 - coeff * diag, -coeff * upper


def face_velocities(w: np.ndarray, p: ModelParams, grid: RadialGrid) -> np.ndarray:
    """C_S dW/dr on the n + 1 faces; zero at r = 0 and r = l_r."""
    u = np.zeros(grid.n + 1)
    u[1:-1] = p.c_s * np.diff(w) / grid.dr
    return u


# ---------------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------------


def predict_w_radial(
    state: RadialState,
    p: ModelParams,
    dt: float,
    closure: GradientClosure | str = GradientClosure.VERBATIM,
    gated: bool = True,
) -> np.ndarray:
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    grid = state.grid
    stiff = p.c_s * p.c_nu * dt
    if not math.isfinite(stiff):
        raise ValueError(f"C_S*C_nu*dt overflows (dt={dt!r}, C_nu={p.c_nu!r})")
    chi = pressure_support(state.sigma, gated)
    h = growth_rate_array(state.sigma, p)
    transport = radial_gradient(state.sigma, grid, closure) * radial_gradient(state.w, grid, closure)
    rhs = (
        state.w
        - p.c_z * radial_laplacian(state.w, grid)
        + chi * dt * (p.c_s * transport + p.c_nu * h)
    )
    return schemes.solve_tridiagonal(*_helmholtz_bands(grid, p.c_z + stiff * chi), rhs)


def advance_rho_radial(
    state: RadialState,
    w_star: np.ndarray,
    p: ModelParams,
    dt: float,
    cfl: float = schemes.DEFAULT_CFL,
) -> np.ndarray:
    """Transport g = r * rho, then recover rho = g / r."""
    grid = state.grid
    r = grid.nodes
    g = r * state.rho
    u = face_velocities(w_star, p, grid)
    h = growth_rate_array(state.sigma, p)
    g_new, _ = schemes.transport_update(g, u, h, dt, grid.dr, cfl)
    g_new = schemes.enforce_nonnegative(g_new, g, dt)
    return g_new / r


def project_w_radial(
    rho_next: np.ndarray, p: ModelParams, grid: RadialGrid
) -> tuple[np.ndarray, np.ndarray]:
    sigma = sigma_of_rho_array(rho_next, p)
    w = schemes.solve_tridiagonal(*_helmholtz_bands(grid, p.c_z), sigma)
    return sigma, w


def step_radial(
    state: RadialState,
    p: ModelParams,
    dt: float,
    cfl: float = schemes.DEFAULT_CFL,
    closure: GradientClosure | str = GradientClosure.VERBATIM,
    gated: bool = True,
) -> RadialState:
    w_star = predict_w_radial(state, p, dt, closure, gated)
    rho = advance_rho_radial(state, w_star, p, dt, cfl)
    sigma, w = project_w_radial(rho, p, state.grid)
    return RadialState(t=state.t + dt, rho=rho, sigma=sigma, w=w, grid=state.grid)


def choose_dt_radial(
    state: RadialState,
    p: ModelParams,
    cfl: float = schemes.DEFAULT_CFL,
    dt_max: float = 0.01,
    pressure_step: float = schemes.PRESSURE_STEP,
) -> float:
    u = face_velocities(state.w, p, state.grid)
    h = growth_rate_array(state.sigma, p)
    return min(dt_max, schemes.admissible_dt(
        u, h, state.grid.dr, cfl, pressure_rate=p.c_nu / p.c_p, pressure_step=pressure_step
    ))


# ---------------------------------------------------------------------------
# Initial data and drivers
# ---------------------------------------------------------------------------


def init_from_analytic_radial(geom: LayerGeometry, p: ModelParams, grid: RadialGrid) -> RadialState:
    prof = profile(2, geom, p, p.eta, grid.nodes)
    inside = prof.zone != Zone.OMEGA3.value
    rho = np.where(inside, np.exp(prof.sigma / p.c_nu), 0.0)
    return RadialState(
        t=0.0, rho=rho, sigma=np.where(inside, prof.sigma, 0.0), w=prof.w.copy(), grid=grid
    )


def interior_relation_residual_radial(
    state: RadialState, w_star: np.ndarray, p: ModelParams, margin: int = 3
) -> float:
    """max |-C_S L_r W* - H| over cells at least *margin* cells inside the tumor."""
    inside = state.rho >= 1.0
    # the center cell has no left neighbour to erode against
    for _ in range(margin):
        inside = inside & np.concatenate(([True], inside[:-1])) & np.concatenate((inside[1:], [False]))
    if not inside.any():
        return 0.0
    h = growth_rate_array(state.sigma, p)
    res = -p.c_s * radial_laplacian(w_star, state.grid) - h
    return float(np.max(np.abs(res[inside])))


def simulate_radial(
    state: RadialState,
    p: ModelParams,
    t_end: float,
    dt: float | None = None,
    cfl: float = schemes.DEFAULT_CFL,
    dt_max: float = 0.01,
    pressure_step: float = schemes.PRESSURE_STEP,
    closure: GradientClosure | str = GradientClosure.VERBATIM,
    on_step: StepHook | None = None,
    edge_tolerance: float = 1e-6,
    gated: bool = True,
) -> RadialState:
    warned = False

    def check_edge(current: RadialState) -> None:
        nonlocal warned
        frac = abs(float(current.w[-1])) / max(float(np.max(np.abs(current.w))), 1e-300)
        if not warned and frac > edge_tolerance:
            logger.warning(
                "W at r = l_r is %.3g of its maximum at t=%.4g; enlarge l_r",
                frac, current.t,
            )
            warned = True

    return schemes.march(
        state,
        t_end,
        advance=lambda s, h: step_radial(s, p, h, cfl, closure, gated),
        propose_dt=lambda s: dt if dt is not None else choose_dt_radial(s, p, cfl, dt_max, pressure_step),
        on_step=on_step,
        after_step=check_edge,
        retries=0 if dt is not None else schemes.MAX_RETRIES,
    )
