import mpmath
import numpy as np
from django.core.cache import cache
from django.test import SimpleTestCase

from apps.flatland.curvature import corrupted_partner, curvature_check, grid_from_ranges, standard_grid
from apps.flatland.deformation import decoupling_gap, deformation_experiment, tau_scaling_probability
from apps.flatland.paths import ParamPath, evolve_along_path
from apps.hamiltonians.params import ModelParams
from apps.hamiltonians.registry import get_family
from apps.propagator.evolution import evolve_window
from apps.propagator.limits import survival_probability
from apps.propagator.structures import EvolutionWindow
from apps.utils.exceptions import DomainError, UnsupportedFamilyError

E_MINUS_PI = float(mpmath.exp(-mpmath.pi))


class GridTests(SimpleTestCase):
    def test_standard_grid(self):
        grid = standard_grid()
        self.assertEqual(len(grid), 11 * 8)
        self.assertIn((-5.0, 0.5), grid)
        self.assertIn((5.0, 4.0), grid)

    def test_ranges_are_inclusive(self):
        self.assertEqual(grid_from_ranges((0, 0, 1), (1, 1, 1)), [(0.0, 1.0)])
        self.assertEqual(len(grid_from_ranges((-1, 1, 0.5), (1, 2, 1))), 10)

    def test_bad_ranges(self):
        with self.assertRaises(DomainError):
            grid_from_ranges((0, 1, 0), (1, 2, 1))
        with self.assertRaises(DomainError):
            grid_from_ranges((1, 0, 1), (1, 2, 1))
        with self.assertRaises(DomainError):
            grid_from_ranges((0, 1, 1), (-1, 2, 1))


class CurvatureTests(SimpleTestCase):
    family = get_family('three_level_tau')

    def test_zero_curvature_on_standard_grid(self):
        report = curvature_check(self.family, standard_grid())
        self.assertEqual(len(report.commutator_residuals), 88)
        self.assertEqual(len(report.compatibility_residuals), 88)
        self.assertLessEqual(report.max_commutator, 1e-12)
        self.assertLessEqual(report.max_compatibility, 1e-12)
        self.assertLessEqual(report.fd_deviation, 1e-6)
        self.assertEqual(len(report.fd_points), 10)
        self.assertTrue(report.passes(1e-10))

    def test_finite_difference_points_are_reproducible(self):
        grid = standard_grid()
        self.assertEqual(curvature_check(self.family, grid).fd_points, curvature_check(self.family, grid).fd_points)

    def test_corrupted_partner_is_caught(self):
        corrupted = corrupted_partner(self.family)
        self.assertEqual(corrupted.name, 'three_level_tau_corrupted')
        report = curvature_check(corrupted, standard_grid())
        self.assertGreater(report.max_commutator, 1e-3)
        self.assertFalse(report.passes(1e-10))

    def test_single_point(self):
        report = curvature_check(self.family, [(0.0, 1.0)])
        self.assertEqual(len(report.commutator_residuals), 1)

    def test_family_without_partner(self):
        with self.assertRaises(UnsupportedFamilyError):
            curvature_check(get_family('lz'), standard_grid())

    def test_empty_grid_and_bad_tau(self):
        with self.assertRaises(DomainError):
            curvature_check(self.family, [])
        with self.assertRaises(DomainError):
            curvature_check(self.family, [(0.0, -1.0)])


class ParamPathTests(SimpleTestCase):
    def test_validation(self):
        with self.assertRaises(DomainError):
            ParamPath(((0, 1),))
        with self.assertRaises(DomainError):
            ParamPath(((0, 1), (0, 1)))
        with self.assertRaises(DomainError):
            ParamPath(((0, 1), (1, 2)))
        with self.assertRaises(DomainError):
            ParamPath(((0, 0), (1, 0)))

    def test_deformed_path(self):
        path = ParamPath.deformed(50.0, 8.0)
        self.assertEqual(path.vertices, ((-50.0, 1.0), (-50.0, 8.0), (50.0, 8.0), (50.0, 1.0)))
        self.assertEqual(len(path.segments()), 3)


class PathEvolutionTests(SimpleTestCase):
    family = get_family('three_level_tau')
    params = ModelParams.from_gamma(0.5)

    def test_horizontal_path_is_ordinary_evolution(self):
        along = evolve_along_path(self.family, self.params, ParamPath.horizontal(10.0))
        direct = evolve_window(self.family, self.params, EvolutionWindow.symmetric(10.0))
        np.testing.assert_allclose(along.matrix, direct.matrix, atol=1e-12)

    def test_excursion_up_and_back_cancels(self):
        horizontal = evolve_along_path(self.family, self.params, ParamPath.horizontal(10.0))
        excursion = ParamPath(((-10.0, 1.0), (-10.0, 2.0), (-10.0, 1.0), (10.0, 1.0)))
        detour = evolve_along_path(self.family, self.params, excursion)
        np.testing.assert_allclose(detour.matrix, horizontal.matrix, atol=1e-10)
        self.assertTrue(detour.accepted)

    def test_vertical_segment_needs_a_partner(self):
        path = ParamPath(((-1.0, 1.0), (-1.0, 2.0)))
        with self.assertRaises(UnsupportedFamilyError):
            evolve_along_path(get_family('effective_two_level'), self.params, path)


class DeformationTests(SimpleTestCase):
    def setUp(self):
        cache.clear()

    def test_deformed_path_keeps_survival(self):
        record = deformation_experiment(ModelParams.from_gamma(0.5), tau0=8.0, T=50.0)
        self.assertLessEqual(abs(record.difference), 1e-3)
        self.assertTrue(record.passes(1e-3))
        self.assertLessEqual(max(record.vertical_offdiagonal_mass), 1e-3)
        self.assertLessEqual(record.unitarity_defect, 1e-8)

    def test_path_invariance_across_couplings(self):
        for gamma in (0.25, 1.0):
            with self.subTest(gamma=gamma):
                record = deformation_experiment(ModelParams.from_gamma(gamma), tau0=8.0, T=50.0)
                self.assertLessEqual(abs(record.difference), 1e-3)

    def test_longer_windows(self):
        windows = (25.0, 50.0, 100.0)
        records = [deformation_experiment(ModelParams.from_gamma(0.5), tau0=8.0, T=T) for T in windows]
        differences = [abs(record.difference) for record in records]
        for difference in differences:
            self.assertLessEqual(difference, 1e-3)
        # Both paths give the same propagator; what is left is integration error.
        self.assertLessEqual(differences[-1], differences[0] + 1e-5)

        # Vertical segments turn adiabatic like C / T**2.
        masses = [max(record.vertical_offdiagonal_mass) for record in records]
        exponent = -np.polyfit(np.log(windows), np.log(masses), 1)[0]
        self.assertGreaterEqual(exponent, 1.5)

    def test_uncoupled_paths(self):
        record = deformation_experiment(ModelParams(b=1.0, g=0.0), tau0=8.0, T=20.0)
        self.assertAlmostEqual(record.p_horizontal, 1.0, places=12)
        self.assertAlmostEqual(record.p_deformed, 1.0, places=12)
        self.assertAlmostEqual(record.difference, 0.0, places=12)

    def test_preconditions(self):
        with self.assertRaises(DomainError):
            deformation_experiment(ModelParams.from_gamma(0.5), tau0=0.5, T=50.0)
        with self.assertRaises(DomainError):
            deformation_experiment(ModelParams.from_gamma(0.5), tau0=8.0, T=0.0)

    def test_tau_scaling_is_tau_independent(self):
        params = ModelParams.from_gamma(0.5)
        direct = survival_probability(get_family('lz'), ModelParams.from_gamma(1.0)).value
        values = [tau_scaling_probability(params, tau).value for tau in (1.0, 2.0, 4.0, 8.0, 16.0)]
        for value in values:
            self.assertAlmostEqual(value, E_MINUS_PI, delta=2e-4)
            self.assertAlmostEqual(value, direct, delta=6e-4)
        self.assertLessEqual(max(values) - min(values), 6e-4)

    def test_tau_scaling_uncoupled(self):
        self.assertAlmostEqual(tau_scaling_probability(ModelParams(b=1.0, g=0.0), 3.0).value, 1.0, places=14)

    def test_tau_scaling_rejects_bad_tau(self):
        with self.assertRaises(DomainError):
            tau_scaling_probability(ModelParams.from_gamma(0.5), 0.0)

    def test_three_level_survival_is_tau_independent(self):
        family = get_family('three_level_tau')
        params = ModelParams.from_gamma(0.5)
        for tau in (1.0, 4.0, 8.0, 16.0):
            with self.subTest(tau=tau):
                estimate = survival_probability(family, params.with_tau(tau))
                self.assertAlmostEqual(estimate.value, E_MINUS_PI, delta=2e-4)

    def test_level_three_decouples_at_large_tau(self):
        params = ModelParams.from_gamma(0.5)
        gaps = [decoupling_gap(params, tau0) for tau0 in (4.0, 8.0, 16.0)]
        self.assertLess(max(gaps), 2e-4)
        self.assertLessEqual(gaps[-1], gaps[0] + 5e-5)
