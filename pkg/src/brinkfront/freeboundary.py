"""Closed-form three-zone solutions of the free boundary (incompressible) model.

The tumor occupies a ball of radius R (an interval [-R, R] in 1D).  Inside
it a saturated core of radius R1 carries Sigma = C_p; the layer
R1 < r < R carries 0 < Sigma < C_p; outside, Sigma = 0 and rho = 0:

    Omega1:  W = C_p + A * core0(r / s)                s = sqrt(eta*C_S + C_z)
    Omega2:  W = -r^2 / (2 n C_S) + a * phi_n(r) + b    phi_1 = r, phi_2 = ln r, phi_3 = 1/r
    Omega3:  W = d * outer0(r / l)                      l = sqrt(C_z)

with core0 = cosh, I0, i0 and outer0 = exp(-.), K0, k0 for n = 1, 2, 3.
W and W' are continuous at both interfaces; continuity of W' at R is the
algebraic boundary relation linking R1 and R.  Together with the front
speed  dR/dt = -C_S W'(R)  it forms a differential-algebraic system.

Layer values are evaluated in a form relative to Gamma_1, so that the
relation keeps full accuracy when R1 is large (the raw a*ln(R) + b form
cancels catastrophically there).  ``coefficients`` still exposes a, b, A, d.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np
from scipy import optimize, special

from .model import ModelParams
from .specfun import Ratio, ratio_large_z, spherical_i_scaled

logger = logging.getLogger(__name__)

_BISECT_RTOL = 4.0 * np.finfo(float).eps
_NEWTON_STEPS = 3
_KINK_TOL = 1e-8


class NoAnsatzSolution(Exception):
    """The three-zone ansatz admits no solution for these parameters."""

    def __init__(self, message: str, dim: int, params: ModelParams) -> None:
        super().__init__(message)
        self.dim = dim
        self.params = params


class Zone(Enum):
    OMEGA1 = "Omega1"
    OMEGA2 = "Omega2"
    OMEGA3 = "Omega3"


@dataclass(frozen=True)
class LayerGeometry:
    r1: float
    r: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.r1 <= self.r):
            raise ValueError(f"need 0 <= r1 <= r, got r1={self.r1!r}, r={self.r!r}")

    @property
    def r2(self) -> float:
        return self.r - self.r1


@dataclass(frozen=True)
class ProfileCoefficients:
    a: float
    b: float
    big_a: float
    d: float | None
    dimension: int
    eta_used: float


@dataclass
class Profile:
    grid: np.ndarray
    w: np.ndarray
    sigma: np.ndarray
    zone: np.ndarray
    relation_residual: float = 0.0
    kinked: bool = False


@dataclass
class FrontSeries:
    t: np.ndarray
    r: np.ndarray
    r1: np.ndarray
    speed: np.ndarray
    jump: np.ndarray

    @property
    def r2(self) -> np.ndarray:
        return self.r - self.r1

    def __len__(self) -> int:
        return len(self.t)


@dataclass(frozen=True)
class TravelingWave:
    speed: float
    width: float
    jump: float


@dataclass(frozen=True)
class NoTravelingLayer:
    """No persistent intermediate layer: 2*C_z exceeds C_p*C_S."""

    reason: str = field(default="C_p * C_S < 2 * C_z")


# ---------------------------------------------------------------------------
# Building blocks
# ---------------------------------------------------------------------------


def _check_dim(dim: int) -> int:
    if dim not in (1, 2, 3):
        raise ValueError(f"dimension must be 1, 2 or 3, got {dim!r}")
    return dim


def _core_ratio(dim: int, z: float) -> float:
    """core1(z) / core0(z): tanh, I1/I0 or i1/i0."""
    if z == 0.0:
        return 0.0
    if dim == 1:
        return math.tanh(z)
    if dim == 2:
        return ratio_large_z(Ratio.I1_OVER_I0, z)
    return ratio_large_z(Ratio.i1_OVER_i0, z)


def _outer_ratio(dim: int, z: float) -> float:
    """outer0(z) / outer1(z); identically 1 for the 1D exponential."""
    if dim == 1:
        return 1.0
    if dim == 2:
        return ratio_large_z(Ratio.K0_OVER_K1, z)
    return ratio_large_z(Ratio.k0_OVER_k1, z)


def _log1p_minus_x(x):
    if np.ndim(x) == 0:
        x = float(x)
        if abs(x) < 1e-3:
            return x * x * (-0.5 + x * (1.0 / 3.0 + x * (-0.25 + x * 0.2)))
        return math.log1p(x) - x
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-3
    series = x * x * (-0.5 + x * (1.0 / 3.0 + x * (-0.25 + x * 0.2)))
    with np.errstate(invalid="ignore"):
        direct = np.log1p(x) - x
    return np.where(small, series, direct)


def _layer_values(dim: int, r1: float, r, p: ModelParams, eta: float):
    """W and -W' in Omega2 at radius *r* (scalar or array), relative to Gamma_1."""
    s = p.inner_length(eta)
    q = _core_ratio(dim, r1 / s)
    cs = p.c_s
    base = p.c_p - s * s / cs          # W on Gamma_1
    r = float(r) if np.ndim(r) == 0 else np.asarray(r, dtype=float)
    h = r - r1
    if dim == 1:
        w = base - h * h / (2.0 * cs) - s * q * h / cs
        g = (h + s * q) / cs
    elif dim == 2:
        if r1 == 0.0:
            w = base - r * r / (4.0 * cs)
            g = r / (2.0 * cs)
        else:
            x = h / r1
            log_ratio = math.log1p(x) if isinstance(x, float) else np.log1p(x)
            w = (
                base
                - h * h / (4.0 * cs)
                + r1 * r1 / (2.0 * cs) * _log1p_minus_x(x)
                - r1 * s * q * log_ratio / cs
            )
            g = (h * (2.0 * r1 + h) + 2.0 * r1 * s * q) / (2.0 * cs * r)
    else:
        w = base - (h * h * (3.0 * r1 + h) + 6.0 * r1 * s * q * h) / (6.0 * cs * r)
        g = (h * (r * r + r * r1 + r1 * r1) + 3.0 * r1 * r1 * s * q) / (3.0 * cs * r * r)
    return w, g


def _relation(dim: int, r1: float, r: float, p: ModelParams, eta: float) -> float:
    """Unchecked boundary relation: l * kappa(R/l) * (-W'(R)) - W(R)."""
    l = p.outer_length
    w, g = _layer_values(dim, r1, r, p, eta)
    res = float(l * _outer_ratio(dim, r / l) * g - w)
    if dim == 1:
        # the quadratic in R2
        return 2.0 * p.c_s * res
    return res


def _residual_tol(p: ModelParams) -> float:
    return 1e-12 * max(1.0, p.c_p)


def _bisect_then_polish(f, lo: float, hi: float, scale: float) -> float:
    root = optimize.bisect(
        f, lo, hi, xtol=1e-11 * max(1.0, scale), rtol=_BISECT_RTOL, maxiter=200
    )
    froot = f(root)
    for _ in range(_NEWTON_STEPS):
        if froot == 0.0:
            break
        step = 1e-7 * max(1.0, abs(root))
        a, b = max(lo, root - step), min(hi, root + step)
        slope = (f(b) - f(a)) / (b - a)
        if slope == 0.0 or not math.isfinite(slope):
            break
        candidate = root - froot / slope
        if not lo <= candidate <= hi:
            break
        fcand = f(candidate)
        if abs(fcand) >= abs(froot):
            break
        root, froot = candidate, fcand
    return root


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


def coefficients(
    dim: int, r1: float, p: ModelParams, eta: float = 0.0, r: float | None = None
) -> ProfileCoefficients:
    """Coefficients a, b, A (and d once the outer radius *r* is known)."""
    _check_dim(dim)
    if r1 < 0:
        raise ValueError(f"r1 must be >= 0, got {r1!r}")
    if not 0.0 <= eta < p.c_p:
        raise ValueError(f"eta must lie in [0, c_p), got {eta!r}")
    cs = p.c_s
    s = p.inner_length(eta)
    z = r1 / s
    q = _core_ratio(dim, z)
    w1 = p.c_p - s * s / cs
    if dim == 1:
        a = r1 / cs - s * q / cs
        b = w1 + r1 * r1 / (2.0 * cs) - a * r1
        # 1 / cosh(z) without overflow
        inv_core0 = 2.0 * math.exp(-z) / (1.0 + math.exp(-2.0 * z))
    elif dim == 2:
        if r1 == 0.0:
            a, b = 0.0, w1
        else:
            a = r1 * r1 / (2.0 * cs) - r1 * s * q / cs
            b = w1 + r1 * r1 / (4.0 * cs) - a * math.log(r1)
        inv_core0 = math.exp(-z) / special.i0e(z)
    else:
        a = -(r1 ** 3) / (3.0 * cs) + r1 * r1 * s * q / cs
        b = w1 + r1 * r1 / (2.0 * cs) - r1 * s * q / cs
        inv_core0 = math.exp(-z) / spherical_i_scaled(0, z)
    big_a = -(s * s / cs) * inv_core0

    d = None
    if r is not None:
        if r < r1:
            raise ValueError(f"outer radius {r!r} is inside r1={r1!r}")
        w_r, _ = _layer_values(dim, r1, r, p, eta)
        w_r = float(w_r)
        zr = r / p.outer_length
        if dim == 1:
            d = w_r
        elif zr > 700.0:
            d = math.copysign(math.inf, w_r) if w_r != 0 else 0.0
        elif dim == 2:
            d = w_r / special.k0(zr)
        else:
            d = w_r * zr * math.exp(zr) / (0.5 * math.pi)
    return ProfileCoefficients(a=a, b=b, big_a=big_a, d=d, dimension=dim, eta_used=eta)


def boundary_relation_residual(
    dim: int, r1: float, r: float, p: ModelParams, eta: float = 0.0
) -> float:
    """L.H.S. - R.H.S. of the R1/R relation; zero iff W' is continuous at R.

    In 1D this is the quadratic in R2 = R - R1.
    """
    _check_dim(dim)
    if not (0.0 <= r1 <= r) or r <= 0.0:
        raise ValueError(f"need 0 <= r1 <= r and r > 0, got r1={r1!r}, r={r!r}")
    return _relation(dim, r1, r, p, eta)


def solve_r2_given_r1(dim: int, r1: float, p: ModelParams, eta: float = 0.0) -> float:
    """Layer width R2 >= 0 for a given core radius."""
    _check_dim(dim)
    if r1 < 0:
        raise ValueError(f"r1 must be >= 0, got {r1!r}")
    tol = _residual_tol(p)
    if dim == 1:
        l = p.outer_length
        s = p.inner_length(eta)
        tau = math.tanh(r1 / s)
        half_b = l + s * tau
        c = 2.0 * l * s * tau + 2.0 * (s * s - p.c_p * p.c_s)
        disc = half_b * half_b - c
        if disc < 0:
            raise NoAnsatzSolution(
                f"no real layer width for r1={r1!r} (discriminant {disc:.3g})", dim, p
            )
        # -half_b + sqrt(disc), without cancellation
        r2 = -c / (half_b + math.sqrt(disc))
        if r2 < 0:
            if abs(c) <= tol:
                return 0.0
            raise NoAnsatzSolution(f"layer width is negative for r1={r1!r}", dim, p)
        return r2

    def f(h: float) -> float:
        return _relation(dim, r1, r1 + h, p, eta)

    f0 = f(0.0)
    if abs(f0) <= tol:
        return 0.0
    if f0 > 0:
        raise NoAnsatzSolution(
            f"relation has no positive layer width at r1={r1!r} (residual {f0:.3g} at R2=0)",
            dim, p,
        )
    hi = 10.0 * math.sqrt(2.0 * p.c_p * p.c_s)
    if f(hi) < 0:
        raise NoAnsatzSolution(f"no sign change of the relation in [0, {hi:.6g}]", dim, p)
    return _bisect_then_polish(f, 0.0, hi, scale=hi)


def solve_r1_given_r(
    dim: int,
    r: float,
    p: ModelParams,
    eta: float = 0.0,
    bracket: tuple[float, float] | None = None,
) -> float:
    """Core radius R1 in [0, r] satisfying the boundary relation.

    *bracket* is a hint (e.g. from the previous time step); it is ignored
    when it does not enclose a sign change.
    """
    _check_dim(dim)
    if not r > 0:
        raise ValueError(f"r must be > 0, got {r!r}")
    tol = _residual_tol(p)

    def f(r1: float) -> float:
        return _relation(dim, r1, r, p, eta)

    if bracket is not None:
        lo, hi = max(0.0, bracket[0]), min(r, bracket[1])
        if lo < hi:
            flo, fhi = f(lo), f(hi)
            if flo * fhi < 0:
                return _bisect_then_polish(f, lo, hi, scale=r)

    f0 = f(0.0)
    if abs(f0) <= tol:
        return 0.0
    if f0 < 0:
        raise NoAnsatzSolution(
            f"r={r!r} is below the minimal ansatz radius (residual {f0:.3g} at R1=0)",
            dim, p,
        )
    fr = f(r)
    if fr == 0.0:
        return r
    if fr > 0:
        raise NoAnsatzSolution(f"relation has no root for R1 in [0, {r!r}]", dim, p)
    return _bisect_then_polish(f, 0.0, r, scale=r)


def minimal_radius(dim: int, p: ModelParams, eta: float = 0.0) -> float:
    """Outer radius at which the core vanishes (R1 = 0)."""
    _check_dim(dim)

    def f(r: float) -> float:
        return _relation(dim, 0.0, r, p, eta)

    lo = 1e-12 * p.outer_length
    if f(lo) >= 0:
        raise NoAnsatzSolution("no layer can form: C_p <= (eta*C_S + C_z)/C_S", dim, p)
    hi = max(1.0, p.outer_length)
    while f(hi) < 0:
        hi *= 2.0
        if hi > 1e8:
            raise NoAnsatzSolution("minimal radius search diverged", dim, p)
    return _bisect_then_polish(f, lo, hi, scale=hi)


def front_speed(dim: int, r: float, r1: float, p: ModelParams, eta: float = 0.0) -> float:
    """dR/dt = -C_S W'(R)."""
    _check_dim(dim)
    if not (0.0 <= r1 <= r) or r <= 0.0:
        raise ValueError(f"need 0 <= r1 <= r and r > 0, got r1={r1!r}, r={r!r}")
    _, g = _layer_values(dim, r1, r, p, eta)
    return float(p.c_s * g)


def pressure_jump(dim: int, r: float, r1: float, p: ModelParams, eta: float = 0.0) -> float:
    """Sigma(R-): the inside limit of the pressure at the front."""
    _check_dim(dim)
    if not (0.0 <= r1 <= r) or r <= 0.0:
        raise ValueError(f"need 0 <= r1 <= r and r > 0, got r1={r1!r}, r={r!r}")
    w, _ = _layer_values(dim, r1, r, p, eta)
    return float(w) + p.c_z / p.c_s


def traveling_wave(p: ModelParams) -> TravelingWave | NoTravelingLayer:
    """Large-core limit, identical in every dimension."""
    root = math.sqrt(2.0 * p.c_p * p.c_s)
    l = p.outer_length
    if p.c_p * p.c_s < 2.0 * p.c_z:
        return NoTravelingLayer()
    return TravelingWave(
        speed=root - l,
        width=root - 2.0 * l,
        jump=math.sqrt(2.0 * p.c_z * p.c_p / p.c_s),
    )


def asymptotic_width(dim: int, r1: float, p: ModelParams, sign: str = "+") -> float:
    """Leading-order layer width alpha_0 = +-sqrt(2 C_p C_S) - 2 sqrt(C_z) at core radius *r1*.

    In 1D this is the exact large-core width.  In 2D/3D the width at *r1*
    is alpha_0 + alpha_1 / r1 + o(1 / r1); alpha_1 has no closed form, so
    only alpha_0 is returned and the correction is measured by
    ``correction_coefficient``.
    """
    _check_dim(dim)
    if sign not in ("+", "-"):
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    root = math.sqrt(2.0 * p.c_p * p.c_s)
    return (root if sign == "+" else -root) - 2.0 * p.outer_length


def correction_coefficient(
    dim: int, r1_values: Sequence[float], p: ModelParams, eta: float = 0.0
) -> np.ndarray:
    """r1 * (R2(r1) - alpha_0+); tends to the first-order coefficient alpha_1."""
    return np.array(
        [
            r1 * (solve_r2_given_r1(dim, r1, p, eta) - asymptotic_width(dim, r1, p, "+"))
            for r1 in r1_values
        ]
    )


# ---------------------------------------------------------------------------
# Profiles
# ---------------------------------------------------------------------------


def _core_profile_ratio(dim: int, x: np.ndarray, r1: float, s: float) -> np.ndarray:
    """core0(x/s) / core0(r1/s) for 0 <= x <= r1."""
    z, zr = x / s, r1 / s
    damp = np.exp(z - zr)
    if dim == 1:
        return damp * (1.0 + np.exp(-2.0 * z)) / (1.0 + math.exp(-2.0 * zr))
    if dim == 2:
        return damp * special.i0e(z) / special.i0e(zr)
    num = np.array([spherical_i_scaled(0, float(v)) for v in np.atleast_1d(z)])
    return damp * num / spherical_i_scaled(0, zr)


def _outer_profile_ratio(dim: int, x: np.ndarray, r: float, l: float) -> np.ndarray:
    """outer0(x/l) / outer0(r/l) for x >= r."""
    damp = np.exp(-(x - r) / l)
    if dim == 1:
        return damp
    if dim == 2:
        return damp * special.k0e(x / l) / special.k0e(r / l)
    return damp * r / x


def evaluate_w(
    dim: int, geom: LayerGeometry, p: ModelParams, x: np.ndarray, eta: float = 0.0
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """W, Sigma and zone index (1, 2, 3) at distances *x* >= 0 from the center."""
    x = np.asarray(x, dtype=float)
    r1, r = geom.r1, geom.r
    s, l = p.inner_length(eta), p.outer_length
    w = np.empty_like(x)
    sigma = np.zeros_like(x)
    zone = np.where(x <= r1, 1, np.where(x <= r, 2, 3))

    inner = zone == 1
    if inner.any():
        ratio = _core_profile_ratio(dim, x[inner], r1, s)
        w[inner] = p.c_p - (s * s / p.c_s) * ratio
        sigma[inner] = p.c_p - eta * ratio

    layer = zone == 2
    if layer.any():
        w_layer, _ = _layer_values(dim, r1, x[layer], p, eta)
        w[layer] = w_layer
        sigma[layer] = w_layer + p.c_z / p.c_s

    outer = zone == 3
    if outer.any():
        w_r, _ = _layer_values(dim, r1, r, p, eta)
        w[outer] = float(w_r) * _outer_profile_ratio(dim, x[outer], r, l)
    return w, sigma, zone


def profile(
    dim: int, geom: LayerGeometry, p: ModelParams, eta: float, grid: np.ndarray
) -> Profile:
    """Sample W and Sigma of the three-zone solution on *grid*.

    Geometries that violate the boundary relation still produce a profile
    (with a kink in W at R); ``kinked`` is set and a warning logged.
    """
    _check_dim(dim)
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) < 0):
        raise ValueError("grid must be sorted ascending")
    if dim > 1 and np.any(grid < 0):
        raise ValueError("radial grids must be nonnegative")
    x = np.abs(grid) if dim == 1 else grid
    w, sigma, zone_index = evaluate_w(dim, geom, p, x, eta)
    zones = np.array([Zone.OMEGA1.value, Zone.OMEGA2.value, Zone.OMEGA3.value])[zone_index - 1]

    residual = _relation(dim, geom.r1, geom.r, p, eta) if geom.r > 0 else 0.0
    kinked = abs(residual) > _KINK_TOL * max(1.0, p.c_p)
    if kinked:
        logger.warning(
            "geometry r1=%.6g r=%.6g violates the boundary relation (residual %.3g); W has a kink at R",
            geom.r1, geom.r, residual,
        )
    return Profile(grid=grid, w=w, sigma=sigma, zone=zones, relation_residual=residual, kinked=kinked)


def derivative_mismatch(
    dim: int,
    geom: LayerGeometry,
    p: ModelParams,
    at: str = "outer",
    eta: float = 0.0,
    h: float = 1e-6,
) -> float:
    """|W'(b-) - W'(b+)| at Gamma_1 ("inner") or Gamma_2 ("outer").

    Second-order one-sided differences on each side, so the jump of W''
    across the interface does not leak into the stencil.
    """
    if at not in ("inner", "outer"):
        raise ValueError(f"at must be 'inner' or 'outer', got {at!r}")
    b = geom.r1 if at == "inner" else geom.r
    if at == "inner" and b < 2.0 * h:
        return 0.0
    pts = np.array([b - 2.0 * h, b - h, b, b + h, b + 2.0 * h])
    w, _, _ = evaluate_w(dim, geom, p, pts, eta)
    left = (3.0 * w[2] - 4.0 * w[1] + w[0]) / (2.0 * h)
    right = (-3.0 * w[2] + 4.0 * w[3] - w[4]) / (2.0 * h)
    return float(abs(left - right))


def relation_table(
    dim: int, r_values: Sequence[float], p: ModelParams, eta: float = 0.0
) -> list[tuple[float, float | None, float | None]]:
    """(R, R1, R2) rows; R1/R2 are None where R is below the minimal radius."""
    rows: list[tuple[float, float | None, float | None]] = []
    for r in r_values:
        try:
            r1 = solve_r1_given_r(dim, float(r), p, eta)
        except NoAnsatzSolution as exc:
            logger.debug("relation: R=%.6g has no ansatz solution (%s)", r, exc)
            rows.append((float(r), None, None))
            continue
        rows.append((float(r), r1, float(r) - r1))
    return rows


# ---------------------------------------------------------------------------
# Front DAE
# ---------------------------------------------------------------------------


def integrate_front(
    dim: int,
    r0: float,
    p: ModelParams,
    t_end: float,
    dt: float,
    eta: float = 0.0,
) -> FrontSeries:
    """Integrate dR/dt = front_speed(R, R1(R)) with classical RK4.

    R1 is re-solved from the boundary relation at every stage evaluation.
    """
    _check_dim(dim)
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    if t_end < 0:
        raise ValueError(f"t_end must be >= 0, got {t_end!r}")

    r1_prev = solve_r1_given_r(dim, r0, p, eta)

    def core_radius(r: float) -> float:
        width = 0.05 + 2.0 * dt
        guess = r1_prev + (r - r_now)
        return solve_r1_given_r(dim, r, p, eta, bracket=(guess - width, guess + width))

    def rhs(r: float) -> float:
        return front_speed(dim, r, core_radius(r), p, eta)

    r_now = r0
    t_now = 0.0
    ts, rs, r1s, speeds, jumps = [0.0], [r0], [r1_prev], [], []
    speeds.append(front_speed(dim, r0, r1_prev, p, eta))
    jumps.append(pressure_jump(dim, r0, r1_prev, p, eta))

    n_steps = max(0, math.ceil(t_end / dt - 1e-12))
    for _ in range(n_steps):
        h = min(dt, t_end - t_now)
        if h <= 0:
            break
        k1 = speeds[-1]
        k2 = rhs(r_now + 0.5 * h * k1)
        k3 = rhs(r_now + 0.5 * h * k2)
        k4 = rhs(r_now + h * k3)
        r_next = r_now + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        r1_next = core_radius(r_next)
        r_now, r1_prev = r_next, r1_next
        t_now += h
        ts.append(t_now)
        rs.append(r_now)
        r1s.append(r1_next)
        speeds.append(front_speed(dim, r_now, r1_next, p, eta))
        jumps.append(pressure_jump(dim, r_now, r1_next, p, eta))

    logger.debug("front DAE: dim=%d, %d steps, R %.6g -> %.6g", dim, n_steps, r0, r_now)
    return FrontSeries(
        t=np.array(ts), r=np.array(rs), r1=np.array(r1s),
        speed=np.array(speeds), jump=np.array(jumps),
    )
