"""Discrete kernels shared by the 1D and radial schemes.

Tridiagonal solves, the three-branch slope limiter, the central-upwind
face flux and the implicit-growth transport update.  Every routine works
on plain numpy arrays; geometry lives in ``pde1d`` and ``pde_radial``.
"""

from __future__ import annotations

import logging
from typing import Callable

import numpy as np
from scipy import linalg

logger = logging.getLogger(__name__)

DEFAULT_CFL = 0.4
GROWTH_CAP = 0.9
MAX_RETRIES = 8
PRESSURE_STEP = 5e-3
NEGATIVE_TOL = 1e-12


class CFLViolation(Exception):
    """Time step too large for the transport update."""

    def __init__(self, message: str, dt: float, admissible_dt: float) -> None:
        super().__init__(message)
        self.dt = dt
        self.admissible_dt = admissible_dt


def solve_tridiagonal(
    lower: np.ndarray, diag: np.ndarray, upper: np.ndarray, rhs: np.ndarray
) -> np.ndarray:
    """Solve  lower[j] x[j-1] + diag[j] x[j] + upper[j] x[j+1] = rhs[j].

    ``lower[0]`` and ``upper[-1]`` are ignored.
    """
    n = len(diag)
    if not (len(lower) == len(upper) == len(rhs) == n):
        raise ValueError("tridiagonal bands and right-hand side must have equal length")
    ab = np.zeros((3, n))
    ab[0, 1:] = upper[:-1]
    ab[1, :] = diag
    ab[2, :-1] = lower[1:]
    return linalg.solve_banded((1, 1), ab, rhs, check_finite=True)


def tridiagonal_apply(
    lower: np.ndarray, diag: np.ndarray, upper: np.ndarray, x: np.ndarray
) -> np.ndarray:
    out = diag * x
    out[1:] += lower[1:] * x[:-1]
    out[:-1] += upper[:-1] * x[1:]
    return out


def limited_slopes(q: np.ndarray) -> np.ndarray:
    """Three-branch slope: 0 at extrema, else the smaller one-sided difference.

    Cells outside the array count as zero.
    """
    padded = np.concatenate(([0.0], q, [0.0]))
    back = padded[1:-1] - padded[:-2]
    fwd = padded[2:] - padded[1:-1]
    return np.where(
        back * fwd < 0,
        0.0,
        np.where(np.abs(fwd) > np.abs(back), back, fwd),
    )


def face_fluxes(q: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Central-upwind fluxes on the n + 1 faces of n cells.

    ``u[k]`` is the face velocity between cells k-1 and k, so the material
    velocity is -u.  Face 0 and face n see zero ghost states.
    """
    if len(u) != len(q) + 1:
        raise ValueError(f"need {len(q) + 1} face velocities, got {len(u)}")
    sigma = limited_slopes(q)
    right = np.concatenate(([0.0], q + 0.5 * sigma))   # q^R of the cell left of each face
    left = np.concatenate((q - 0.5 * sigma, [0.0]))    # q^L of the cell right of each face
    return 0.5 * (u * (right + left) - np.abs(u) * (right - left))


def admissible_dt(
    u: np.ndarray,
    growth_rate: np.ndarray,
    dx: float,
    cfl: float = DEFAULT_CFL,
    pressure_rate: float = 0.0,
    pressure_step: float = PRESSURE_STEP,
) -> float:
    """Largest dt meeting dt*max|u|/dx <= cfl and dt*max(H) <= GROWTH_CAP.

    With *pressure_rate* = C_nu / C_p > 0 the step also satisfies
    dt * pressure_rate * max(H) <= pressure_step, which bounds the pressure
    gained per step in units of C_p.  The transport update itself only
    enforces the first two limits.
    """
    u_max = float(np.max(np.abs(u))) if len(u) else 0.0
    h_max = float(np.max(growth_rate)) if len(growth_rate) else 0.0
    limits = [np.inf]
    if u_max > 0:
        limits.append(cfl * dx / u_max)
    if h_max > 0:
        limits.append(GROWTH_CAP / h_max)
        if pressure_rate > 0:
            limits.append(pressure_step / (pressure_rate * h_max))
    return float(min(limits))


def transport_update(
    q: np.ndarray,
    u: np.ndarray,
    growth_rate: np.ndarray,
    dt: float,
    dx: float,
    cfl: float = DEFAULT_CFL,
) -> tuple[np.ndarray, np.ndarray]:
    """One step of (1 - dt H) q_new = q + dt/dx (F_{j+1/2} - F_{j-1/2}).

    Returns the new state and the face fluxes used.
    """
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    limit = admissible_dt(u, growth_rate, dx, cfl)
    # tolerate rounding in dt chosen exactly at the limit
    if dt > limit * (1.0 + 1e-12):
        raise CFLViolation(
            f"dt={dt:.6g} exceeds the admissible step {limit:.6g}", dt, limit
        )
    flux = face_fluxes(q, u)
    q_new = (q + (dt / dx) * (flux[1:] - flux[:-1])) / (1.0 - dt * growth_rate)
    return q_new, flux


def enforce_nonnegative(q_new: np.ndarray, q_old: np.ndarray, dt: float) -> np.ndarray:
    """Clip rounding-level negatives; a real undershoot rejects the step."""
    low = float(q_new.min())
    if low < -NEGATIVE_TOL * max(1.0, float(q_old.max())):
        raise CFLViolation(f"state went negative ({low:.3g})", dt, 0.5 * dt)
    return np.maximum(q_new, 0.0)


def march(
    state,
    t_end: float,
    advance: Callable[[object, float], object],
    propose_dt: Callable[[object], float],
    on_step: Callable[[int, object], None] | None = None,
    after_step: Callable[[object], None] | None = None,
    retries: int = MAX_RETRIES,
):
    """Advance *state* (anything with a ``t`` attribute) to *t_end*.

    A step rejected with CFLViolation is retried with 0.95 times the
    admissible step it reports, at most *retries* times.
    """
    k = 0
    if on_step is not None:
        on_step(0, state)
    while state.t < t_end - 1e-12 * max(1.0, t_end):
        trial = min(propose_dt(state), t_end - state.t)
        for attempt in range(retries + 1):
            try:
                nxt = advance(state, trial)
                break
            except CFLViolation as exc:
                if attempt == retries:
                    raise
                logger.debug("t=%.6g: %s, retrying", state.t, exc)
                trial = 0.95 * exc.admissible_dt
        state = nxt
        k += 1
        if after_step is not None:
            after_step(state)
        if on_step is not None:
            on_step(k, state)
    logger.debug("march finished after %d steps at t=%.6g", k, state.t)
    return state
