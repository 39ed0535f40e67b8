"""Modified Bessel functions of orders 0 and 1, cylindrical and spherical.

Cylindrical values come from the Cephes routines in ``scipy.special``.
Spherical values use their closed forms in sinh/cosh/exp, switching to a
short Taylor series below ``_SMALL_Z``.

Ratios such as I1/I0 are always formed from exponentially scaled values, so
they stay finite far beyond the point where I0 itself overflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from scipy import special

_I_MAX_Z = 700.0
_SMALL_Z = 1e-4


class BesselDomainError(ValueError):
    def __init__(self, message: str, z: float) -> None:
        super().__init__(message)
        self.z = z


class BesselOverflowError(OverflowError):
    def __init__(self, message: str, z: float) -> None:
        super().__init__(message)
        self.z = z


class Family(Enum):
    I = "I"   # cylindrical, first kind
    K = "K"   # cylindrical, second kind
    i = "i"   # spherical, first kind
    k = "k"   # spherical, second kind


class Ratio(Enum):
    I1_OVER_I0 = "I1_over_I0"
    K0_OVER_K1 = "K0_over_K1"
    i1_OVER_i0 = "i1_over_i0"
    k0_OVER_k1 = "k0_over_k1"


@dataclass(frozen=True)
class BesselEval:
    value: float | None          # None where the raw value is not representable
    scaled_value: float          # value * exp(-z) for first kind, * exp(z) for second kind


def _check_order(order: int) -> None:
    if order not in (0, 1):
        raise ValueError(f"only orders 0 and 1 are supported, got {order!r}")


def _check_positive(z: float, name: str) -> None:
    if not z > 0:
        raise BesselDomainError(f"{name} requires z > 0, got {z!r}", z)


def _check_nonnegative(z: float, name: str) -> None:
    if not z >= 0:
        raise BesselDomainError(f"{name} requires z >= 0, got {z!r}", z)


# ---------------------------------------------------------------------------
# Cylindrical
# ---------------------------------------------------------------------------


def bessel_i(order: int, z: float) -> float:
    _check_order(order)
    _check_nonnegative(z, "bessel_i")
    if z > _I_MAX_Z:
        raise BesselOverflowError(
            f"I{order}({z!r}) overflows; use bessel_i_scaled or ratio_large_z", z
        )
    return float(special.i0(z) if order == 0 else special.i1(z))


def bessel_i_scaled(order: int, z: float) -> float:
    """I_order(z) * exp(-z)."""
    _check_order(order)
    _check_nonnegative(z, "bessel_i_scaled")
    return float(special.i0e(z) if order == 0 else special.i1e(z))


def bessel_k(order: int, z: float) -> float:
    _check_order(order)
    _check_positive(z, "bessel_k")
    return float(special.k0(z) if order == 0 else special.k1(z))


def bessel_k_scaled(order: int, z: float) -> float:
    """K_order(z) * exp(z)."""
    _check_order(order)
    _check_positive(z, "bessel_k_scaled")
    return float(special.k0e(z) if order == 0 else special.k1e(z))


# ---------------------------------------------------------------------------
# Spherical
# ---------------------------------------------------------------------------


def spherical_i(order: int, z: float) -> float:
    _check_order(order)
    _check_nonnegative(z, "spherical_i")
    if z > _I_MAX_Z:
        raise BesselOverflowError(
            f"i{order}({z!r}) overflows; use spherical_i_scaled or ratio_large_z", z
        )
    if z < _SMALL_Z:
        z2 = z * z
        i0 = 1.0 + z2 / 6.0 + z2 * z2 / 120.0
    else:
        i0 = math.sinh(z) / z
    if order == 0:
        return i0
    # z cosh z - sinh z cancels badly for small z
    if z < 1.0:
        return i0 * _coth_minus_inv(z)
    return (z * math.cosh(z) - math.sinh(z)) / (z * z)


def spherical_i_scaled(order: int, z: float) -> float:
    """i_order(z) * exp(-z)."""
    _check_order(order)
    _check_nonnegative(z, "spherical_i_scaled")
    if z < _SMALL_Z:
        i0 = spherical_i(0, z) * math.exp(-z)
    else:
        i0 = -math.expm1(-2.0 * z) / (2.0 * z)
    if order == 0:
        return i0
    return i0 * _coth_minus_inv(z)


def spherical_k(order: int, z: float) -> float:
    _check_order(order)
    _check_positive(z, "spherical_k")
    return spherical_k_scaled(order, z) * math.exp(-z)


def spherical_k_scaled(order: int, z: float) -> float:
    """k_order(z) * exp(z)."""
    _check_order(order)
    _check_positive(z, "spherical_k_scaled")
    if order == 0:
        return 0.5 * math.pi / z
    return 0.5 * math.pi * (z + 1.0) / (z * z)


# ---------------------------------------------------------------------------
# Ratios
# ---------------------------------------------------------------------------


def _coth_minus_inv(z: float) -> float:
    """coth(z) - 1/z, i.e. i1(z)/i0(z)."""
    if z < 0.1:
        z2 = z * z
        return z * (
            1.0 / 3.0
            + z2 * (-1.0 / 45.0 + z2 * (2.0 / 945.0 + z2 * (-1.0 / 4725.0 + z2 * 2.0 / 93555.0)))
        )
    return 1.0 / math.tanh(z) - 1.0 / z


def ratio_large_z(kind: Ratio | str, z: float) -> float:
    """Exact Bessel ratio, safe for arbitrarily large *z*.

    For z >> 1 the cylindrical ratios behave like 1 - 1/(2z) and the
    spherical ones like 1 - 1/z; this function never truncates to those.
    """
    kind = Ratio(kind)
    if kind is Ratio.I1_OVER_I0:
        _check_nonnegative(z, "I1/I0")
        if z == 0:
            return 0.0
        return float(special.i1e(z) / special.i0e(z))
    if kind is Ratio.K0_OVER_K1:
        _check_positive(z, "K0/K1")
        return float(special.k0e(z) / special.k1e(z))
    if kind is Ratio.i1_OVER_i0:
        _check_nonnegative(z, "i1/i0")
        if z == 0:
            return 0.0
        return _coth_minus_inv(z)
    _check_positive(z, "k0/k1")
    return z / (z + 1.0)


def evaluate(family: Family | str, order: int, z: float) -> BesselEval:
    family = Family(family)
    if family is Family.I:
        scaled = bessel_i_scaled(order, z)
        value = bessel_i(order, z) if z <= _I_MAX_Z else None
    elif family is Family.K:
        scaled = bessel_k_scaled(order, z)
        value = bessel_k(order, z)
    elif family is Family.i:
        scaled = spherical_i_scaled(order, z)
        value = spherical_i(order, z) if z <= _I_MAX_Z else None
    else:
        scaled = spherical_k_scaled(order, z)
        value = spherical_k(order, z)
    return BesselEval(value=value, scaled_value=scaled)
