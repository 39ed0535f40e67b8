"""Tests for the modified Bessel functions and their ratios."""

import math

import numpy as np
import pytest
from scipy import special

from src.brinkfront.specfun import (
    BesselDomainError,
    BesselOverflowError,
    Family,
    Ratio,
    bessel_i,
    bessel_i_scaled,
    bessel_k,
    bessel_k_scaled,
    evaluate,
    ratio_large_z,
    spherical_i,
    spherical_i_scaled,
    spherical_k,
    spherical_k_scaled,
)

_EULER_GAMMA = 0.5772156649015329


def _series_i0(z: float, terms: int = 40) -> float:
    q = z * z / 4.0
    return sum(q ** k / math.factorial(k) ** 2 for k in range(terms))


def _series_k0(z: float, terms: int = 40) -> float:
    q = z * z / 4.0
    harmonic, total = 0.0, 0.0
    for k in range(1, terms):
        harmonic += 1.0 / k
        total += q ** k / math.factorial(k) ** 2 * harmonic
    return -(math.log(z / 2.0) + _EULER_GAMMA) * _series_i0(z, terms) + total


class TestCylindrical:
    def test_reference_values(self):
        assert bessel_i(0, 1.0) == pytest.approx(1.2660658777520082, abs=1e-10)
        assert bessel_k(0, 1.0) == pytest.approx(0.42102443824070834, abs=1e-10)

    @pytest.mark.parametrize("z", [0.1, 0.5, 1.0, 2.0, 4.0])
    def test_power_series(self, z):
        assert bessel_i(0, z) == pytest.approx(_series_i0(z), rel=1e-12)
        assert bessel_k(0, z) == pytest.approx(_series_k0(z), rel=1e-10)

    def test_wronskian(self):
        for z in np.linspace(0.1, 50.0, 200):
            w = z * (bessel_i(0, z) * bessel_k(1, z) + bessel_i(1, z) * bessel_k(0, z))
            assert abs(w - 1.0) <= 1e-9

    def test_scaled(self):
        z = 30.0
        assert bessel_i_scaled(1, z) == pytest.approx(bessel_i(1, z) * math.exp(-z), rel=1e-13)
        assert bessel_k_scaled(0, z) == pytest.approx(bessel_k(0, z) * math.exp(z), rel=1e-13)

    def test_i_at_zero(self):
        assert bessel_i(0, 0.0) == 1.0
        assert bessel_i(1, 0.0) == 0.0

    def test_k_needs_positive(self):
        with pytest.raises(BesselDomainError) as exc:
            bessel_k(0, 0.0)
        assert exc.value.z == 0.0

    def test_negative_argument(self):
        with pytest.raises(BesselDomainError):
            bessel_i(0, -1.0)

    def test_overflow(self):
        with pytest.raises(BesselOverflowError):
            bessel_i(0, 800.0)
        assert math.isfinite(bessel_i_scaled(0, 800.0))

    def test_unsupported_order(self):
        with pytest.raises(ValueError):
            bessel_i(2, 1.0)


class TestSpherical:
    @pytest.mark.parametrize("z", [1e-6, 1e-3, 0.05, 0.5, 1.0, 3.0, 10.0, 30.0])
    def test_first_kind(self, z):
        assert spherical_i(0, z) == pytest.approx(special.spherical_in(0, z), rel=1e-12)
        assert spherical_i(1, z) == pytest.approx(special.spherical_in(1, z), rel=1e-10)

    @pytest.mark.parametrize("z", [0.05, 0.5, 1.0, 3.0, 10.0, 30.0])
    def test_second_kind(self, z):
        assert spherical_k(0, z) == pytest.approx(special.spherical_kn(0, z), rel=1e-12)
        assert spherical_k(1, z) == pytest.approx(special.spherical_kn(1, z), rel=1e-12)

    def test_closed_forms(self):
        z = 2.0
        assert spherical_i(0, z) == pytest.approx(math.sinh(z) / z)
        assert spherical_k_scaled(0, z) == pytest.approx(math.pi / (2.0 * z))
        assert spherical_k_scaled(1, z) == pytest.approx(math.pi * (z + 1.0) / (2.0 * z * z))

    def test_scaled_far_out(self):
        z = 5000.0
        assert spherical_i_scaled(0, z) == pytest.approx(1.0 / (2.0 * z), rel=1e-12)
        with pytest.raises(BesselOverflowError):
            spherical_i(0, z)

    def test_origin(self):
        assert spherical_i(0, 0.0) == 1.0
        assert spherical_i(1, 0.0) == 0.0
        with pytest.raises(BesselDomainError):
            spherical_k(0, 0.0)


class TestRatios:
    @pytest.mark.parametrize("z", [0.01, 0.5, 2.0, 20.0, 300.0])
    def test_moderate_z_matches_direct_quotient(self, z):
        assert ratio_large_z(Ratio.I1_OVER_I0, z) == pytest.approx(special.i1(z) / special.i0(z), rel=1e-12)
        assert ratio_large_z(Ratio.K0_OVER_K1, z) == pytest.approx(special.k0(z) / special.k1(z), rel=1e-12)
        assert ratio_large_z(Ratio.k0_OVER_k1, z) == pytest.approx(
            special.spherical_kn(0, z) / special.spherical_kn(1, z), rel=1e-12
        )

    @pytest.mark.parametrize("z", [0.01, 0.5, 2.0, 20.0])
    def test_spherical_first_kind(self, z):
        expected = special.spherical_in(1, z) / special.spherical_in(0, z)
        assert ratio_large_z(Ratio.i1_OVER_i0, z) == pytest.approx(expected, rel=1e-10)

    @pytest.mark.parametrize("z", [1e3, 1e5, 1e8])
    def test_large_z_asymptotics(self, z):
        assert ratio_large_z(Ratio.I1_OVER_I0, z) == pytest.approx(1.0 - 0.5 / z, abs=1.0 / z**2)
        assert ratio_large_z(Ratio.K0_OVER_K1, z) == pytest.approx(1.0 - 0.5 / z, abs=1.0 / z**2)
        assert ratio_large_z(Ratio.i1_OVER_i0, z) == pytest.approx(1.0 - 1.0 / z, abs=1.0 / z**2)
        assert ratio_large_z(Ratio.k0_OVER_k1, z) == pytest.approx(1.0 - 1.0 / z, abs=1.0 / z**2)

    def test_accepts_string_kind(self):
        assert ratio_large_z("k0_over_k1", 1.0) == 0.5

    def test_first_kind_vanish_at_origin(self):
        assert ratio_large_z(Ratio.I1_OVER_I0, 0.0) == 0.0
        assert ratio_large_z(Ratio.i1_OVER_i0, 0.0) == 0.0

    def test_second_kind_rejects_origin(self):
        with pytest.raises(BesselDomainError):
            ratio_large_z(Ratio.K0_OVER_K1, 0.0)


class TestEvaluate:
    def test_both_values(self):
        res = evaluate(Family.K, 1, 2.0)
        assert res.value == pytest.approx(special.k1(2.0))
        assert res.scaled_value == pytest.approx(special.k1e(2.0))

    def test_unrepresentable_value(self):
        res = evaluate("I", 0, 1000.0)
        assert res.value is None
        assert res.scaled_value == pytest.approx(special.i0e(1000.0))

    def test_spherical(self):
        res = evaluate(Family.i, 1, 1.5)
        assert res.value == pytest.approx(special.spherical_in(1, 1.5))
