"""Physical parameters and constitutive relations of the cell density model.

    rho_t - C_S div(rho grad W) = rho H(C_p - Sigma(rho))
    -C_z Lap W + W = Sigma
    Sigma(rho) = 0 for rho <= 1, C_nu ln(rho) for rho >= 1

The sharp Heaviside switch is never evaluated; every solver uses the
piecewise-linear regularization ``heaviside_eta`` of width ``eta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class DomainError(ValueError):
    """Raised when a constitutive relation is evaluated outside its domain."""

    def __init__(self, message: str, value: float) -> None:
        super().__init__(message)
        self.value = value


@dataclass(frozen=True)
class ModelParams:
    c_s: float = 1.0     # mobility
    c_z: float = 0.2     # Brinkman viscosity
    c_p: float = 1.0     # pressure threshold for growth
    c_nu: float = 50.0   # stiffness of the state law
    eta: float = 1e-3    # Heaviside regularization width

    def __post_init__(self) -> None:
        for name in ("c_s", "c_z", "c_p", "c_nu", "eta"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and > 0, got {value!r}")
        if self.eta >= self.c_p:
            raise ValueError(
                f"eta must be smaller than c_p (eta={self.eta!r}, c_p={self.c_p!r})"
            )

    @property
    def outer_length(self) -> float:
        """Screening length sqrt(C_z) of W outside the tumor."""
        return math.sqrt(self.c_z)

    def inner_length(self, eta: float = 0.0) -> float:
        """Screening length sqrt(eta*C_S + C_z) inside the saturated core."""
        return math.sqrt(eta * self.c_s + self.c_z)

    def normalized(self) -> bool:
        """True for the C_S = C_z = C_p = 1 case covered by the a priori bounds."""
        return self.c_s == 1.0 and self.c_z == 1.0 and self.c_p == 1.0


# ---------------------------------------------------------------------------
# Scalar relations
# ---------------------------------------------------------------------------


def sigma_of_rho(rho: float, p: ModelParams) -> float:
    """Pressure of the state law; zero until cells are in contact (rho = 1)."""
    if rho < 0:
        raise DomainError(f"density must be >= 0, got {rho!r}", rho)
    if rho <= 1.0:
        return 0.0
    return p.c_nu * math.log(rho)


def rho_of_sigma(sigma: float, p: ModelParams) -> float:
    """Inverse of the state law on the branch rho >= 1.

    Points outside the tumor support carry rho = 0, not 1; deciding which
    applies is up to the caller.
    """
    if sigma < 0:
        raise DomainError(f"pressure must be >= 0, got {sigma!r}", sigma)
    return math.exp(sigma / p.c_nu)


def heaviside_eta(u: float, p: ModelParams) -> float:
    if u <= 0.0:
        return 0.0
    if u >= p.eta:
        return 1.0
    return u / p.eta


def growth(rho: float, sigma: float, p: ModelParams) -> float:
    """Growth term rho * H_eta(C_p - sigma)."""
    if rho < 0:
        raise DomainError(f"density must be >= 0, got {rho!r}", rho)
    return rho * heaviside_eta(p.c_p - sigma, p)


# ---------------------------------------------------------------------------
# Array forms used by the PDE schemes
# ---------------------------------------------------------------------------


def sigma_of_rho_array(rho: np.ndarray, p: ModelParams) -> np.ndarray:
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        bad = float(rho[rho < 0].min())
        raise DomainError(f"density must be >= 0, got {bad!r}", bad)
    out = np.zeros_like(rho)
    contact = rho > 1.0
    out[contact] = p.c_nu * np.log(rho[contact])
    return out


def heaviside_eta_array(u: np.ndarray, p: ModelParams) -> np.ndarray:
    return np.clip(np.asarray(u, dtype=float) / p.eta, 0.0, 1.0)


def growth_rate_array(sigma: np.ndarray, p: ModelParams) -> np.ndarray:
    """H_eta(C_p - sigma) pointwise; multiply by rho for the growth term."""
    return heaviside_eta_array(p.c_p - np.asarray(sigma, dtype=float), p)
