"""Tests for the three-zone free boundary solutions and the front DAE."""

import logging
import math

import numpy as np
import pytest

from src.brinkfront.diagnostics import FitMode, fit_rate
from src.brinkfront.freeboundary import (
    LayerGeometry,
    NoAnsatzSolution,
    NoTravelingLayer,
    TravelingWave,
    Zone,
    asymptotic_width,
    boundary_relation_residual,
    coefficients,
    correction_coefficient,
    derivative_mismatch,
    evaluate_w,
    front_speed,
    integrate_front,
    minimal_radius,
    pressure_jump,
    profile,
    relation_table,
    solve_r1_given_r,
    solve_r2_given_r1,
    traveling_wave,
)
from src.brinkfront.model import ModelParams

STRONG = ModelParams(c_s=1.0, c_z=2.0, c_p=4.0)
DEFAULT = ModelParams(c_s=1.0, c_z=0.2, c_p=1.0)
THIN = ModelParams(c_s=1.0, c_z=0.02, c_p=2.0)


def _wave_speed(p: ModelParams) -> float:
    return math.sqrt(2.0 * p.c_p * p.c_s) - math.sqrt(p.c_z)


def _speed_gap(dim: int, r1: float, p: ModelParams) -> float:
    r = r1 + solve_r2_given_r1(dim, r1, p)
    return front_speed(dim, r, r1, p) - _wave_speed(p)


class TestBoundaryRelation:
    def test_1d_reference_pair(self):
        r1 = solve_r1_given_r(1, 1.5, STRONG)
        assert r1 == pytest.approx(1.2781, abs=2e-3)
        assert abs(boundary_relation_residual(1, r1, 1.5, STRONG)) <= 1e-12 * STRONG.c_p

    def test_1d_width_from_core(self):
        r2 = solve_r2_given_r1(1, 1.2781, STRONG)
        assert 1.2781 + r2 == pytest.approx(1.5, abs=2e-3)

    def test_2d_near_minimal_radius(self):
        r1 = solve_r1_given_r(2, 2.71, THIN)
        assert 0.1 < r1 < 0.5
        assert abs(boundary_relation_residual(2, r1, 2.71, THIN)) <= 1e-10

    def test_2d_minimal_radius(self):
        assert minimal_radius(2, THIN) == pytest.approx(2.680, abs=1e-2)

    def test_1d_minimal_radius_closed_form(self):
        expected = math.sqrt(2.0 * (DEFAULT.c_p - DEFAULT.c_z) + DEFAULT.c_z) - math.sqrt(DEFAULT.c_z)
        assert minimal_radius(1, DEFAULT) == pytest.approx(expected, rel=1e-10)

    @pytest.mark.parametrize("dim", [1, 2, 3])
    def test_round_trip(self, dim):
        r1 = 3.0
        r = r1 + solve_r2_given_r1(dim, r1, DEFAULT)
        assert solve_r1_given_r(dim, r, DEFAULT) == pytest.approx(r1, abs=1e-8)

    @pytest.mark.parametrize("dim", [1, 2, 3])
    def test_relation_monotone_in_r(self, dim):
        radii = np.linspace(2.5, 6.0, 10)
        r1 = [solve_r1_given_r(dim, r, DEFAULT) for r in radii]
        assert np.all(np.diff(r1) > 0)

    def test_below_minimal_radius(self):
        with pytest.raises(NoAnsatzSolution) as exc:
            solve_r1_given_r(1, 0.5, DEFAULT)
        assert exc.value.dim == 1
        assert exc.value.params is DEFAULT

    def test_no_layer_possible(self):
        with pytest.raises(NoAnsatzSolution):
            minimal_radius(2, ModelParams(c_z=2.0, c_p=1.0))

    def test_bad_dimension(self):
        with pytest.raises(ValueError):
            solve_r1_given_r(4, 1.0, DEFAULT)

    def test_bracket_hint_is_optional(self):
        plain = solve_r1_given_r(2, 4.0, DEFAULT)
        hinted = solve_r1_given_r(2, 4.0, DEFAULT, bracket=(plain - 0.1, plain + 0.1))
        wrong = solve_r1_given_r(2, 4.0, DEFAULT, bracket=(0.0, 0.01))
        assert hinted == pytest.approx(plain, abs=1e-9)
        assert wrong == pytest.approx(plain, abs=1e-9)

    def test_relation_table_marks_missing_rows(self):
        rows = relation_table(1, [0.5, 1.5], DEFAULT)
        assert rows[0] == (0.5, None, None)
        r, r1, r2 = rows[1]
        assert r1 + r2 == pytest.approx(r)


class TestCoefficients:
    def test_1d_reference(self):
        c = coefficients(1, 1.2781, STRONG)
        assert c.a == pytest.approx(0.26252, abs=1e-3)
        assert c.d is None
        assert c.dimension == 1

    @pytest.mark.parametrize("dim", [1, 2, 3])
    def test_raw_form_matches_layer(self, dim):
        p, r1, r = DEFAULT, 1.0, 1.6
        c = coefficients(dim, r1, p, r=r)
        x = 1.3
        phi = {1: x, 2: math.log(x), 3: 1.0 / x}[dim]
        raw = -x * x / (2.0 * dim * p.c_s) + c.a * phi + c.b
        w, _, _ = evaluate_w(dim, LayerGeometry(r1, r), p, np.array([x]))
        assert raw == pytest.approx(w[0], abs=1e-12)

    def test_outer_coefficient_1d(self):
        c = coefficients(1, 1.0, DEFAULT, r=1.6)
        w, _, _ = evaluate_w(1, LayerGeometry(1.0, 1.6), DEFAULT, np.array([1.6]))
        assert c.d == pytest.approx(w[0])

    def test_eta_range(self):
        with pytest.raises(ValueError):
            coefficients(1, 1.0, DEFAULT, eta=DEFAULT.c_p)


class TestSmoothness:
    def test_c1_matching_random_parameters(self):
        rng = np.random.default_rng(20240611)
        for _ in range(50):
            c_s = rng.uniform(0.5, 2.0)
            c_z = rng.uniform(0.01, 0.5)
            c_p = (2.5 * c_z / c_s + 0.1) * rng.uniform(1.0, 4.0)
            eta = rng.choice([0.0, 1e-3 * c_p])
            p = ModelParams(c_s=c_s, c_z=c_z, c_p=c_p, eta=max(eta, 1e-6))
            r1 = rng.uniform(0.1, 20.0)
            for dim in (1, 2, 3):
                geom = LayerGeometry(r1, r1 + solve_r2_given_r1(dim, r1, p, eta))
                assert derivative_mismatch(dim, geom, p, "inner", eta) <= 1e-7
                assert derivative_mismatch(dim, geom, p, "outer", eta) <= 1e-7

    @pytest.mark.parametrize("dim", [1, 2, 3])
    def test_kink_off_the_relation(self, dim):
        r1 = 1.2781
        r = r1 + solve_r2_given_r1(dim, r1, STRONG)
        assert derivative_mismatch(dim, LayerGeometry(r1, r + 0.2), STRONG) >= 1e-2


class TestProfile:
    def test_zones_and_bounds(self):
        r1 = solve_r1_given_r(1, 1.5, STRONG)
        grid = np.linspace(-4.5, 4.5, 901)
        prof = profile(1, LayerGeometry(r1, 1.5), STRONG, 0.0, grid)
        assert not prof.kinked
        assert prof.zone[450] == Zone.OMEGA1.value
        assert prof.zone[0] == Zone.OMEGA3.value
        assert set(prof.zone) == {"Omega1", "Omega2", "Omega3"}
        assert np.all(prof.sigma >= 0.0)
        assert np.all(prof.sigma <= STRONG.c_p + 1e-12)
        np.testing.assert_array_equal(prof.sigma[prof.zone == "Omega3"], 0.0)
        np.testing.assert_allclose(prof.sigma[prof.zone == "Omega1"], STRONG.c_p)
        np.testing.assert_allclose(prof.w, prof.w[::-1], atol=1e-14)

    def test_outside_decays(self):
        r1 = solve_r1_given_r(2, 2.0, DEFAULT)
        prof = profile(2, LayerGeometry(r1, 2.0), DEFAULT, 0.0, np.linspace(2.0, 8.0, 61))
        outer = prof.w[prof.zone == "Omega3"]
        assert np.all(np.diff(outer) < 0)
        assert outer[-1] < 1e-4

    def test_kinked_geometry_warns(self, caplog):
        with caplog.at_level(logging.WARNING, logger="src.brinkfront.freeboundary"):
            prof = profile(1, LayerGeometry(1.2781, 1.7), STRONG, 0.0, np.linspace(-3, 3, 61))
        assert prof.kinked
        assert "kink" in caplog.text

    def test_radial_grid_must_be_nonnegative(self):
        with pytest.raises(ValueError):
            profile(2, LayerGeometry(0.5, 2.0), DEFAULT, 0.0, np.linspace(-1.0, 1.0, 5))

    def test_regularized_core(self):
        eta = 1e-2
        r1 = solve_r1_given_r(1, 2.5, DEFAULT, eta)
        prof = profile(1, LayerGeometry(r1, 2.5), DEFAULT, eta, np.array([0.0]))
        assert DEFAULT.c_p - eta <= prof.sigma[0] < DEFAULT.c_p


class TestTravelingWave:
    def test_reference_values(self):
        wave = traveling_wave(DEFAULT)
        assert isinstance(wave, TravelingWave)
        assert wave.speed == pytest.approx(0.96695, abs=1e-4)
        assert wave.width == pytest.approx(0.51977, abs=1e-4)
        assert wave.jump == pytest.approx(0.63246, abs=1e-5)

    def test_borderline_width_is_zero(self):
        wave = traveling_wave(STRONG)
        assert isinstance(wave, TravelingWave)
        assert wave.width == 0.0

    def test_no_layer(self):
        assert isinstance(traveling_wave(ModelParams(c_z=10.0, c_p=1.0)), NoTravelingLayer)

    def test_asymptotic_width(self):
        assert asymptotic_width(2, 100.0, THIN, "+") == pytest.approx(1.71716, abs=1e-5)
        assert asymptotic_width(2, 100.0, THIN, "-") == pytest.approx(-2.28284, abs=1e-5)
        with pytest.raises(ValueError):
            asymptotic_width(2, 100.0, THIN, "*")
        assert asymptotic_width(1, 5.0, THIN) == asymptotic_width(3, 500.0, THIN)

    def test_1d_large_core_is_the_wave(self):
        p = DEFAULT
        r1 = 1e3 * p.outer_length
        r = r1 + solve_r2_given_r1(1, r1, p)
        wave = traveling_wave(p)
        assert abs(front_speed(1, r, r1, p) - wave.speed) <= 1e-6
        assert abs(pressure_jump(1, r, r1, p) - wave.jump) <= 1e-6
        assert abs(r - r1 - wave.width) <= 1e-6

    @pytest.mark.parametrize("dim", [2, 3])
    def test_multid_approach_is_first_order(self, dim):
        p = THIN
        near = _speed_gap(dim, 1e2 * p.outer_length, p)
        far_r1 = 1e3 * p.outer_length
        far = _speed_gap(dim, far_r1, p)
        assert abs(far) <= 5.0 / far_r1
        assert 6.0 <= near / far <= 15.0
        r = far_r1 + solve_r2_given_r1(dim, far_r1, p)
        assert abs(pressure_jump(dim, r, far_r1, p) - traveling_wave(p).jump) < 0.05

    def test_1d_correction_vanishes(self):
        values = correction_coefficient(1, [50.0, 100.0], DEFAULT)
        np.testing.assert_allclose(values, 0.0, atol=1e-9)

    def test_2d_correction_settles(self):
        c = correction_coefficient(2, [50.0, 100.0, 200.0], THIN)
        assert abs(c[2] - c[1]) < abs(c[1] - c[0])

    def test_1d_exponential_residual(self):
        l = DEFAULT.outer_length
        ratio = _speed_gap(1, 2.0 + l, DEFAULT) / _speed_gap(1, 2.0, DEFAULT)
        assert ratio == pytest.approx(math.exp(-2.0), rel=1e-2)


class TestFrontDAE:
    def test_1d_reaches_wave_speed(self):
        series = integrate_front(1, 1.5, DEFAULT, t_end=10.0, dt=0.01)
        assert len(series) == 1001
        assert series.t[-1] == pytest.approx(10.0)
        assert np.all(np.diff(series.r) > 0)
        assert abs(series.speed[-1] - _wave_speed(DEFAULT)) <= 1e-9
        np.testing.assert_allclose(series.r2, series.r - series.r1)

    def test_1d_exponential_rate(self):
        series = integrate_front(1, 1.5, DEFAULT, t_end=10.0, dt=0.01)
        v = _wave_speed(DEFAULT)
        fit = fit_rate(series.t, series.speed, FitMode.EXPONENTIAL_IN_T, v, floor=1e-10, ceiling=1e-3)
        assert fit.slope == pytest.approx(-2.0 * v / DEFAULT.outer_length, rel=0.05)
        assert fit.r2fit > 0.99

    def test_rk4_order(self):
        finals = [
            integrate_front(1, 1.5, DEFAULT, t_end=1.0, dt=dt).r[-1] for dt in (0.05, 0.025, 0.0125)
        ]
        ratio = abs(finals[0] - finals[1]) / abs(finals[1] - finals[2])
        assert 12.0 <= ratio <= 20.0

    # the lag scales with the curvature (dim - 1) / R
    @pytest.mark.parametrize("dim, r0, prefactor", [(2, 2.71, 1.1), (3, 3.5, 2.2)])
    def test_algebraic_approach(self, dim, r0, prefactor):
        series = integrate_front(dim, r0, THIN, t_end=53.0, dt=0.1)
        assert series.r[-1] > 90.0
        far = series.r >= 30.0
        fit = fit_rate(
            series.r[far], series.speed[far], FitMode.ALGEBRAIC_IN_R, _wave_speed(THIN)
        )
        assert fit.slope == pytest.approx(-1.0, abs=0.1)
        assert fit.prefactor == pytest.approx(prefactor, rel=0.1)

    def test_jump_tends_to_wave_jump(self):
        series = integrate_front(1, 1.5, DEFAULT, t_end=8.0, dt=0.02)
        assert series.jump[-1] == pytest.approx(traveling_wave(DEFAULT).jump, abs=1e-8)

    def test_rejects_nonpositive_dt(self):
        with pytest.raises(ValueError):
            integrate_front(1, 1.5, DEFAULT, t_end=1.0, dt=0.0)

    def test_start_below_minimal_radius(self):
        with pytest.raises(NoAnsatzSolution):
            integrate_front(1, 0.5, DEFAULT, t_end=1.0, dt=0.1)
