import math

from fractions import Fraction

import mpmath
import numpy as np
from django.core.cache import cache
from django.test import SimpleTestCase
from scipy.special import fresnel

from apps.functional.fitting import fit_exponent, fit_log_linear, perturbative_slope
from apps.functional.perturbation import (
    first_order_amplitude,
    first_order_transition,
    fresnel_integral,
    tail_coefficient,
)
from apps.functional.recurrence import partial_sum, recurrence_defect, solve_recurrence
from apps.functional.sweep import (
    REDUCTION,
    functional_residual,
    functional_residual_via_reduction,
    gamma_sweep,
)
from apps.hamiltonians.params import ModelParams
from apps.hamiltonians.registry import get_family
from apps.propagator.limits import survival_probability
from apps.propagator.structures import LimitPolicy
from apps.utils.exceptions import DataError, DomainError

mpmath.mp.dps = 30

FRESNEL_LIMIT = complex(mpmath.exp(1j * mpmath.pi / 4) * mpmath.sqrt(mpmath.pi))


def lz_oracle(gamma):
    return float(mpmath.exp(-mpmath.pi * gamma))


class RecurrenceTests(SimpleTestCase):
    def test_coefficients_for_minus_one(self):
        table = solve_recurrence(Fraction(-1), 5)
        self.assertEqual(
            table.coefficients,
            (Fraction(1), Fraction(-1), Fraction(1, 2), Fraction(-1, 6), Fraction(1, 24), Fraction(-1, 120)),
        )
        self.assertTrue(table.all_match)
        self.assertTrue(table.satisfies_recurrence)

    def test_closed_form_holds_exactly(self):
        for seed in (Fraction(-355, 113), Fraction(-1), Fraction(1, 2)):
            table = solve_recurrence(seed, 30)
            self.assertEqual(len(table.closed_form_match), 31)
            self.assertTrue(table.all_match, seed)
            for n in range(31):
                self.assertEqual(table.coefficients[n] * math.factorial(n), seed ** n)
                self.assertEqual(recurrence_defect(table.coefficients, n), 0)

    def test_zero_seed_gives_constant_solution(self):
        table = solve_recurrence(0, 10)
        self.assertEqual(table.coefficients[0], 1)
        self.assertTrue(all(coefficient == 0 for coefficient in table.coefficients[1:]))
        self.assertTrue(table.all_match)

    def test_zero_branch(self):
        table = solve_recurrence(Fraction(-1), 6, a0=0)
        self.assertTrue(all(coefficient == 0 for coefficient in table.coefficients))
        self.assertTrue(table.satisfies_recurrence)

    def test_preconditions(self):
        with self.assertRaises(DomainError):
            solve_recurrence(-1, 0)
        with self.assertRaises(DomainError):
            solve_recurrence(-1, 5, a0=2)

    def test_partial_sums_approach_the_exponential(self):
        table = solve_recurrence(Fraction(-math.pi), 25)
        for gamma in (0.1, 0.5, 1.0):
            self.assertAlmostEqual(partial_sum(table, gamma), lz_oracle(gamma), delta=1e-12)
        self.assertEqual(partial_sum(table, 0.5, order=0), 1.0)

    def test_partial_sum_matches_measured_probability(self):
        cache.clear()
        table = solve_recurrence(Fraction(-math.pi), 25)
        measured = survival_probability(get_family('lz'), ModelParams.from_gamma(0.5)).value
        self.assertAlmostEqual(partial_sum(table, 0.5), measured, delta=1e-3)


class FresnelTests(SimpleTestCase):
    def test_tail_coefficients(self):
        self.assertEqual(tail_coefficient(0), 0.5j)
        self.assertAlmostEqual(tail_coefficient(1), 0.25)
        self.assertAlmostEqual(tail_coefficient(2), -0.375j)

    def test_corrected_integral_reaches_the_closed_form(self):
        for T in (30.0, 45.0):
            result = fresnel_integral(1.0, T, 3)
            self.assertLessEqual(abs(result.value - FRESNEL_LIMIT), 1e-6, T)
            self.assertLess(result.error_estimate, 1e-6)

    def test_error_decreases_with_order(self):
        estimates = [fresnel_integral(1.0, 30.0, order).error_estimate for order in range(4)]
        self.assertEqual(estimates, sorted(estimates, reverse=True))
        errors = [abs(fresnel_integral(1.0, 30.0, order).value - FRESNEL_LIMIT) for order in range(4)]
        self.assertEqual(errors, sorted(errors, reverse=True))

    def test_uncorrected_integral_is_off_by_the_tail(self):
        result = fresnel_integral(1.0, 30.0, 0)
        self.assertGreater(result.error_estimate, 1e-3)
        self.assertGreater(abs(result.value - FRESNEL_LIMIT), 1e-3)
        self.assertEqual(result.tail, 0)

    def test_scaling_with_slope(self):
        self.assertAlmostEqual(
            abs(fresnel_integral(4.0, 30.0, 3).value - 0.5 * fresnel_integral(1.0, 30.0, 3).value), 0.0, delta=1e-6
        )

    def test_quadrature_matches_scipy_fresnel(self):
        for b, T in ((1.0, 7.0), (2.5, 12.0)):
            x = T * math.sqrt(2 * b / math.pi)
            S, C = fresnel(x)
            oracle = 2 * math.sqrt(math.pi / (2 * b)) * complex(C, S)
            self.assertAlmostEqual(abs(fresnel_integral(b, T, 0).quadrature - oracle), 0.0, delta=1e-10)

    def test_preconditions(self):
        with self.assertRaises(DomainError):
            fresnel_integral(1.0, 0.0)
        with self.assertRaises(DomainError):
            fresnel_integral(0.0, 30.0)


class FirstOrderTests(SimpleTestCase):
    def test_uncoupled(self):
        self.assertEqual(first_order_amplitude(ModelParams(b=1.0, g=0.0)), 0)

    def test_closed_form(self):
        amplitude = first_order_amplitude(ModelParams(b=1.0, g=0.05))
        self.assertLessEqual(abs(amplitude - (-1j * 0.05 * FRESNEL_LIMIT)), 1e-6)

    def test_matches_propagated_transition(self):
        cache.clear()
        params = ModelParams(b=1.0, g=0.05)
        transition = first_order_transition(params)
        self.assertAlmostEqual(transition, math.pi * 0.05 ** 2, delta=1e-6)
        measured = 1 - survival_probability(get_family('lz'), params).value
        self.assertLessEqual(abs(transition - measured) / measured, 0.02)


class FittingTests(SimpleTestCase):
    def setUp(self):
        cache.clear()

    def test_synthetic_exponential(self):
        gammas = np.array([0.1, 0.2, 0.4, 0.8])
        result = fit_log_linear(gammas, np.exp(-2 * gammas))
        self.assertAlmostEqual(result.c_estimate, -2.0, places=9)
        self.assertLess(result.residual_norm, 1e-12)
        self.assertEqual(result.model, 'p = exp(c*gamma)')
        self.assertEqual(len(result.data), 4)

    def test_needs_three_distinct_gammas(self):
        with self.assertRaises(DomainError):
            fit_log_linear([0.1], [0.7])
        with self.assertRaises(DomainError):
            fit_log_linear([0.1, 0.1, 0.2], [0.7, 0.7, 0.5])
        with self.assertRaises(DomainError):
            fit_exponent([0.1])

    def test_non_positive_probability_is_a_data_error(self):
        with self.assertRaises(DataError):
            fit_log_linear([0.1, 0.2, 0.3], [0.7, 0.0, 0.4])

    def test_exponent_is_minus_pi(self):
        result = fit_exponent([0.1, 0.2, 0.4, 0.8])
        self.assertAlmostEqual(result.c_estimate, -math.pi, delta=0.01)
        self.assertLess(result.c_estimate, 0)

    def test_perturbative_slope_agrees_with_exponent(self):
        slope = perturbative_slope([0.0025, 0.005, 0.01], LimitPolicy(tolerance=1e-5))
        self.assertLessEqual(abs(slope.slope - math.pi) / math.pi, 0.01)
        exponent = fit_exponent(np.linspace(0.1, 1.0, 5))
        self.assertLessEqual(abs(slope.slope + exponent.c_estimate) / math.pi, 0.01)


class SweepTests(SimpleTestCase):
    def setUp(self):
        cache.clear()

    def test_uncoupled_point(self):
        record = functional_residual(0.0)
        self.assertAlmostEqual(record.p, 1.0, places=14)
        self.assertAlmostEqual(record.functional_residual, 0.0, places=14)
        self.assertTrue(record.ok)

    def test_functional_equation(self):
        for gamma in (0.5, 1.0):
            record = functional_residual(gamma)
            self.assertLessEqual(abs(record.functional_residual), 5e-4, gamma)
            self.assertAlmostEqual(record.p, lz_oracle(gamma), delta=2e-4)

    def test_functional_equation_over_range(self):
        for record in gamma_sweep(np.linspace(0.1, 2.0, 8)):
            self.assertTrue(record.ok)
            self.assertLessEqual(abs(record.functional_residual), 5e-4, record.gamma)

    def test_reduction_route(self):
        self.assertAlmostEqual(functional_residual_via_reduction(0.0).functional_residual, 0.0, places=14)
        for tau in (1.0, 4.0):
            record = functional_residual_via_reduction(0.5, tau)
            self.assertEqual(record.route, REDUCTION)
            self.assertEqual(record.tau, tau)
            self.assertLessEqual(abs(record.functional_residual), 1e-3)

    def test_sweep_keeps_input_order(self):
        gammas = [1.0, 0.25, 0.5]
        serial = gamma_sweep(gammas)
        threaded = gamma_sweep(gammas, max_workers=3)
        self.assertEqual([record.gamma for record in serial], gammas)
        self.assertEqual(serial, threaded)
        for record in serial:
            self.assertLessEqual(abs(record.functional_residual), 5e-4)

    def test_single_zero_point(self):
        records = gamma_sweep([0])
        self.assertEqual(len(records), 1)
        self.assertAlmostEqual(records[0].functional_residual, 0.0, places=14)

    def test_failed_point_does_not_abort(self):
        policy = LimitPolicy(tolerance=1e-15, max_rungs=2, use_cache=False)
        records = gamma_sweep([0.0, 0.5], policy)
        self.assertTrue(records[0].ok)
        self.assertFalse(records[1].ok)
        self.assertIn('did not converge', records[1].error)
        self.assertTrue(math.isnan(records[1].p))

    def test_preconditions(self):
        with self.assertRaises(DomainError):
            gamma_sweep([])
        with self.assertRaises(DomainError):
            gamma_sweep([0.5, -1.0])
        with self.assertRaises(DomainError):
            functional_residual_via_reduction(0.5, tau=0.0)
