import math

from unittest import mock

import mpmath
import numpy as np
from django.core.cache import cache
from django.test import SimpleTestCase
from scipy.linalg import expm

from apps.hamiltonians import families
from apps.hamiltonians.params import ModelParams
from apps.hamiltonians.registry import get_family
from apps.propagator.evolution import evolve_generator, evolve_window, transition_matrix
from apps.propagator.limits import (
    _averaged_survival,
    endpoint_sample_count,
    slowest_slope_gap,
    survival_probability,
)
from apps.propagator.stepper import local_frequency, propagate
from apps.propagator.structures import EvolutionWindow, IntegratorConfig, LimitPolicy, Method, UnitaryResult
from apps.utils.exceptions import ConvergenceError, DomainError, StepSizeUnderflow, UnitarityError
from apps.utils.linalg import dagger, expm_hermitian, ordered_product, unitarity_defect

mpmath.mp.dps = 30


def lz_oracle(gamma):
    return float(mpmath.exp(-mpmath.pi * gamma))


def random_hermitian(rng, dim, count=None):
    shape = (dim, dim) if count is None else (count, dim, dim)
    a = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    return 0.5 * (a + dagger(a))


# Same finite window and a fine mesh, for comparisons between models.
EXACT = IntegratorConfig(method=Method.MAGNUS4, interaction_picture=False, phase_per_step=0.1)


class LinalgTests(SimpleTestCase):
    def test_expm_hermitian_matches_scipy(self):
        rng = np.random.default_rng(1)
        for dim in (2, 3, 4):
            G = random_hermitian(rng, dim)
            np.testing.assert_allclose(expm_hermitian(G), expm(-1j * G), atol=1e-12)

    def test_expm_hermitian_broadcasts(self):
        rng = np.random.default_rng(2)
        stack = random_hermitian(rng, 3, count=5)
        result = expm_hermitian(stack)
        self.assertEqual(result.shape, (5, 3, 3))
        np.testing.assert_allclose(result[3], expm(-1j * stack[3]), atol=1e-12)
        self.assertLess(unitarity_defect(result), 1e-13)

    def test_ordered_product_puts_later_factors_left(self):
        rng = np.random.default_rng(3)
        for count in (1, 2, 5, 8, 13):
            stack = expm_hermitian(random_hermitian(rng, 2, count=count))
            expected = np.eye(2, dtype=complex)
            for U in stack:
                expected = U @ expected
            np.testing.assert_allclose(ordered_product(stack), expected, atol=1e-13)

    def test_ordered_product_needs_a_matrix(self):
        with self.assertRaises(ValueError):
            ordered_product(np.zeros((0, 2, 2)))

    def test_local_frequency(self):
        H = families.lz_hamiltonian(np.array([0.0, 3.0]), ModelParams(b=1, g=0.5))
        np.testing.assert_allclose(local_frequency(H), [1.0, 7.0])


class StructureTests(SimpleTestCase):
    def test_config_validation(self):
        with self.assertRaises(DomainError):
            IntegratorConfig(step_tolerance=0.0)
        with self.assertRaises(DomainError):
            IntegratorConfig(max_step=-1.0)
        with self.assertRaises(ValueError):
            IntegratorConfig(method='euler')

    def test_interaction_picture_defaults_to_two_levels(self):
        config = IntegratorConfig()
        self.assertTrue(config.uses_interaction_picture(2))
        self.assertFalse(config.uses_interaction_picture(3))
        self.assertTrue(IntegratorConfig(interaction_picture=True).uses_interaction_picture(4))

    def test_zero_length_window_is_rejected(self):
        with self.assertRaises(DomainError):
            EvolutionWindow(1.0, 1.0)
        with self.assertRaises(DomainError):
            EvolutionWindow(2.0, -2.0)

    def test_limit_policy_validation(self):
        with self.assertRaises(DomainError):
            LimitPolicy(max_rungs=1)
        with self.assertRaises(DomainError):
            LimitPolicy(tolerance=0.0)


class PropagateTests(SimpleTestCase):
    params = ModelParams(b=1.0, g=0.5)

    def generator(self):
        return get_family('lz').at(self.params)

    def test_methods_agree(self):
        reference, _ = propagate(self.generator(), -5.0, 5.0,
                                 IntegratorConfig(method=Method.MAGNUS4, phase_per_step=0.05), 2)
        adaptive, steps = propagate(self.generator(), -5.0, 5.0,
                                    IntegratorConfig(method=Method.ADAPTIVE, step_tolerance=1e-11), 2)
        midpoint, _ = propagate(self.generator(), -5.0, 5.0,
                                IntegratorConfig(method=Method.MIDPOINT, phase_per_step=0.01), 2)
        self.assertGreater(steps, 0)
        np.testing.assert_allclose(adaptive, reference, atol=1e-6)
        np.testing.assert_allclose(midpoint, reference, atol=1e-3)

    def test_backward_is_the_adjoint(self):
        config = IntegratorConfig()
        forward, _ = propagate(self.generator(), -2.0, 3.0, config, 2)
        backward, _ = propagate(self.generator(), 3.0, -2.0, config, 2)
        np.testing.assert_allclose(backward, dagger(forward), atol=1e-14)
        np.testing.assert_allclose(backward @ forward, np.eye(2), atol=1e-12)

    def test_empty_segment_is_identity(self):
        matrix, steps = propagate(self.generator(), 1.0, 1.0, IntegratorConfig(), 2)
        np.testing.assert_array_equal(matrix, np.eye(2))
        self.assertEqual(steps, 0)

    def test_segments_compose(self):
        config = IntegratorConfig(phase_per_step=0.1)
        whole, _ = propagate(self.generator(), -4.0, 4.0, config, 2)
        first, _ = propagate(self.generator(), -4.0, 0.5, config, 2)
        second, _ = propagate(self.generator(), 0.5, 4.0, config, 2)
        np.testing.assert_allclose(second @ first, whole, atol=1e-7)

    def test_unreachable_tolerance_underflows(self):
        config = IntegratorConfig(method=Method.ADAPTIVE, step_tolerance=1e-300)
        with self.assertRaises(StepSizeUnderflow):
            propagate(self.generator(), -1.0, 1.0, config, 2)

    def test_adaptive_lands_on_the_window_end(self):
        config = IntegratorConfig(method=Method.ADAPTIVE)
        reference_config = IntegratorConfig(method=Method.MAGNUS4, phase_per_step=0.05)
        matrix, _ = propagate(self.generator(), -0.21882, 0.0059418, config, 2)
        reference, _ = propagate(self.generator(), -0.21882, 0.0059418, reference_config, 2)
        np.testing.assert_allclose(matrix, reference, atol=1e-8)

        rng = np.random.default_rng(7)
        for start, end in np.sort(rng.uniform(-3.0, 3.0, size=(40, 2)), axis=1):
            with self.subTest(start=start, end=end):
                matrix, steps = propagate(self.generator(), start, end, config, 2)
                self.assertGreater(steps, 0)
                self.assertLessEqual(unitarity_defect(matrix), 1e-12)

    def test_adaptive_step_budget(self):
        config = IntegratorConfig(method=Method.ADAPTIVE)
        with mock.patch('apps.propagator.stepper.MAX_ADAPTIVE_STEPS', 3):
            with self.assertRaises(ConvergenceError) as caught:
                propagate(self.generator(), -5.0, 5.0, config, 2)
        self.assertIn('budget of 3 steps', str(caught.exception))

    def test_magnus_step_is_fourth_order(self):
        # max_step large enough that the mesh is set by phase alone.
        def run(phase_per_step):
            config = IntegratorConfig(method=Method.MAGNUS4, phase_per_step=phase_per_step, max_step=10.0)
            return propagate(self.generator(), -6.0, 6.0, config, 2)

        reference, _ = run(0.0125)
        steps, errors = [], []
        for phase_per_step in (0.4, 0.2, 0.1):
            matrix, count = run(phase_per_step)
            steps.append(count)
            errors.append(np.max(np.abs(matrix - reference)))
        slope = -np.polyfit(np.log(steps), np.log(errors), 1)[0]
        self.assertGreaterEqual(slope, 3.5)

    def test_evolve_generator(self):
        result = evolve_generator(self.generator(), 2.0, -2.0)
        self.assertIsInstance(result, UnitaryResult)
        self.assertEqual(result.window, (2.0, -2.0))
        self.assertEqual(result.dim, 2)
        self.assertTrue(result.accepted)


class EvolveWindowTests(SimpleTestCase):
    def test_uncoupled_levels_do_not_mix(self):
        for name in ('lz', 'three_level', 'composite4'):
            family = get_family(name)
            result = evolve_window(family, ModelParams(b=1.0, g=0.0), EvolutionWindow(-7.0, 11.0))
            np.testing.assert_allclose(np.abs(result.matrix), np.eye(family.dim), atol=1e-12)

    def test_two_level_window(self):
        # A single finite window still carries an O(g / bT) oscillation.
        result = evolve_window(get_family('lz'), ModelParams(b=1.0, g=1.0), EvolutionWindow.symmetric(60.0))
        matrix = transition_matrix(result)
        self.assertLessEqual(result.unitarity_defect, 1e-8)
        self.assertAlmostEqual(matrix.survival(0), lz_oracle(1.0), delta=5e-3)

    def test_two_level_transition_matrix_structure(self):
        result = evolve_window(get_family('lz'), ModelParams(b=1.0, g=0.6), EvolutionWindow.symmetric(30.0))
        P = transition_matrix(result).entries
        self.assertAlmostEqual(P[0, 0], P[1, 1], places=10)
        self.assertAlmostEqual(P[0, 1], P[1, 0], places=10)
        np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-10)

    def test_identity_result(self):
        result = UnitaryResult(matrix=np.eye(3), unitarity_defect=0.0, steps_taken=0, window=EvolutionWindow(0, 1))
        np.testing.assert_array_equal(transition_matrix(result).entries, np.eye(3))

    def test_rejected_result_has_no_transition_matrix(self):
        result = UnitaryResult(matrix=2 * np.eye(2), unitarity_defect=3.0, steps_taken=1, window=EvolutionWindow(0, 1))
        self.assertFalse(result.accepted)
        with self.assertRaises(UnitarityError):
            transition_matrix(result)

    def test_composite_factorizes(self):
        window = EvolutionWindow.symmetric(40.0)
        for gamma in (0.25, 0.5, 1.0, 2.0):
            with self.subTest(gamma=gamma):
                params = ModelParams.from_gamma(gamma)
                P4 = transition_matrix(evolve_window(get_family('composite4'), params, window, EXACT))
                P2 = transition_matrix(evolve_window(get_family('lz'), params, window, EXACT))
                self.assertLessEqual(np.max(np.abs(P4.entries - np.kron(P2.entries, P2.entries))), 1e-6)
                self.assertTrue(P4.is_doubly_stochastic())

    def test_dark_state_reduction(self):
        window = EvolutionWindow.symmetric(40.0)
        for gamma in (0.25, 1.0):
            params = ModelParams.from_gamma(gamma)
            P4 = transition_matrix(evolve_window(get_family('composite4'), params, window, EXACT))
            P3 = transition_matrix(evolve_window(get_family('three_level'), params, window, EXACT))
            rotated = transition_matrix(evolve_window(get_family('composite4_rotated'), params, window, EXACT))
            self.assertLessEqual(abs(P4.survival(0) - P3.survival(0)), 1e-6)
            self.assertLessEqual(abs(P4.survival(0) - rotated.survival(0)), 1e-6)

    def test_gauge_shift_keeps_probabilities(self):
        params = ModelParams(b=1.0, g=0.5, tau=2.0)
        window = EvolutionWindow(-20.0, 20.0, tau=2.0)
        plain = transition_matrix(evolve_window(get_family('effective_two_level'), params, window))
        shifted = transition_matrix(evolve_window(get_family('effective_two_level_shifted'), params, window))
        np.testing.assert_allclose(plain.entries, shifted.entries, atol=1e-8)


class SurvivalProbabilityTests(SimpleTestCase):
    def setUp(self):
        cache.clear()

    def test_uncoupled_survival_is_one(self):
        estimate = survival_probability(get_family('lz'), ModelParams(b=1.0, g=0.0))
        self.assertAlmostEqual(estimate.value, 1.0, places=14)

    def test_landau_zener_formula(self):
        for gamma in (0.25, 0.5, 1.0, 2.0):
            estimate = survival_probability(get_family('lz'), ModelParams.from_gamma(gamma))
            self.assertAlmostEqual(estimate.value, lz_oracle(gamma), delta=2e-4, msg=f"gamma={gamma}")
            self.assertLessEqual(estimate.unitarity_defect, 1e-8)

    def test_depends_only_on_gamma(self):
        lz = get_family('lz')
        reference = survival_probability(lz, ModelParams(b=1.0, g=1.0)).value
        self.assertAlmostEqual(survival_probability(lz, ModelParams(b=4.0, g=2.0)).value, reference, delta=4e-4)
        self.assertAlmostEqual(
            survival_probability(lz, ModelParams(b=0.5, g=0.5)).value,
            survival_probability(lz, ModelParams(b=1.0, g=math.sqrt(0.5))).value,
            delta=4e-4,
        )
        self.assertAlmostEqual(
            survival_probability(lz, ModelParams(b=2.0, g=1.0)).value,
            survival_probability(lz, ModelParams(b=1.0, g=1 / math.sqrt(2))).value,
            delta=4e-4,
        )

    def test_sign_of_coupling_is_irrelevant(self):
        lz = get_family('lz')
        params = ModelParams.from_gamma(0.5)
        self.assertAlmostEqual(
            survival_probability(lz, params).value,
            survival_probability(lz, params.sign_flipped()).value,
            delta=1e-10,
        )

    def test_three_level_bright_state(self):
        # (P4)_11 = p^2 for the composite, which the three-level model reproduces.
        estimate = survival_probability(get_family('three_level'), ModelParams.from_gamma(0.25))
        self.assertAlmostEqual(estimate.value, lz_oracle(0.25) ** 2, delta=4e-4)

    def test_results_are_cached(self):
        lz = get_family('lz')
        first = survival_probability(lz, ModelParams.from_gamma(0.5))
        second = survival_probability(lz, ModelParams.from_gamma(0.5))
        self.assertEqual(first, second)
        uncached = survival_probability(lz, ModelParams.from_gamma(0.5), policy=LimitPolicy(use_cache=False))
        self.assertEqual(uncached.value, first.value)

    def test_ladder_that_cannot_converge(self):
        policy = LimitPolicy(tolerance=1e-15, max_rungs=2, use_cache=False)
        with self.assertRaises(ConvergenceError) as caught:
            survival_probability(get_family('lz'), ModelParams.from_gamma(1.0), policy=policy)
        self.assertEqual(len(caught.exception.values), 2)

    def test_level_out_of_range(self):
        with self.assertRaises(DomainError):
            survival_probability(get_family('lz'), ModelParams(b=1.0, g=1.0), level=2)

    def test_endpoint_samples_resolve_the_fastest_pair(self):
        self.assertEqual(endpoint_sample_count(get_family('lz'), ModelParams(b=1.0, g=1.0), 16), 16)
        self.assertEqual(endpoint_sample_count(get_family('three_level'), ModelParams(b=1.0, g=1.0), 16), 32)
        # slopes 32, 0, -2: the 1-3 pair runs 17 times faster than the 2-3 pair
        tau_family = get_family('three_level_tau')
        self.assertEqual(endpoint_sample_count(tau_family, ModelParams(b=1.0, g=1.0, tau=16.0), 16), 272)

    def test_averaged_survival_over_every_sample_pair(self):
        rng = np.random.default_rng(3)
        core = expm_hermitian(random_hermitian(rng, 3))
        right = expm_hermitian(random_hermitian(rng, 3, count=5))
        left = expm_hermitian(random_hermitian(rng, 3, count=7))
        explicit = np.mean([[abs((R @ core @ L)[1, 1]) ** 2 for L in left] for R in right])
        self.assertAlmostEqual(_averaged_survival(core, right, left, 1), explicit, places=13)

    def test_slowest_slope_gap(self):
        self.assertEqual(slowest_slope_gap(get_family('lz'), ModelParams(b=1.5, g=1.0)), 3.0)
        self.assertEqual(slowest_slope_gap(get_family('three_level_tau'), ModelParams(b=1.0, g=1.0, tau=4.0)), 2.0)
