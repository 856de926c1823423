import math

import numpy as np
from django.test import SimpleTestCase

from apps.hamiltonians import families
from apps.hamiltonians.params import ModelParams, TransitionMatrix
from apps.hamiltonians.registry import get_family, registered_names
from apps.utils.exceptions import DomainError, UnknownFamilyError
from apps.utils.linalg import commutator, hermiticity_defect

SQRT2 = math.sqrt(2.0)


class ModelParamsTests(SimpleTestCase):
    def test_gamma_and_from_gamma(self):
        params = ModelParams.from_gamma(0.5, b=2.0)
        self.assertAlmostEqual(params.g, 1.0)
        self.assertAlmostEqual(params.gamma, 0.5)

    def test_negative_gamma_is_rejected(self):
        with self.assertRaises(DomainError):
            ModelParams.from_gamma(-0.1)

    def test_sign_flipped_keeps_gamma(self):
        params = ModelParams(b=1.0, g=0.7)
        self.assertEqual(params.sign_flipped(), ModelParams(b=1.0, g=-0.7))
        self.assertAlmostEqual(params.sign_flipped().gamma, params.gamma)

    def test_non_positive_slope_is_rejected(self):
        with self.assertRaises(DomainError):
            families.lz_hamiltonian(0.0, ModelParams(b=0.0, g=1.0))
        with self.assertRaises(DomainError):
            families.lz_hamiltonian(0.0, ModelParams(b=-1.0, g=1.0))

    def test_non_positive_tau_is_rejected(self):
        with self.assertRaises(DomainError):
            families.three_level_tau_family(0.0, ModelParams(b=1.0, g=1.0, tau=0.0))


class TwoLevelTests(SimpleTestCase):
    def test_matrix_entries(self):
        np.testing.assert_array_equal(families.lz_hamiltonian(0.0, ModelParams(b=1, g=0.5)), [[0, 0.5], [0.5, 0]])
        np.testing.assert_array_equal(families.lz_hamiltonian(2.0, ModelParams(b=1, g=0)), [[2, 0], [0, -2]])
        np.testing.assert_array_equal(families.lz_hamiltonian(1.0, ModelParams(b=3, g=1)), [[3, 1], [1, -3]])

    def test_broadcasts_over_times(self):
        t = np.linspace(-3, 3, 7)
        stack = families.lz_hamiltonian(t, ModelParams(b=2, g=0.3))
        self.assertEqual(stack.shape, (7, 2, 2))
        np.testing.assert_allclose(stack[:, 0, 0], 2 * t)

    def test_scaled_time_equivalent(self):
        self.assertEqual(families.scaled_time_equivalent(ModelParams(b=4, g=2)), ModelParams(b=1, g=1))
        self.assertEqual(families.scaled_time_equivalent(ModelParams(b=1, g=0.3)), ModelParams(b=1, g=0.3))


class CompositeTests(SimpleTestCase):
    def test_pattern_at_zero(self):
        H = families.composite4_hamiltonian(0.0, ModelParams(b=1, g=1))
        np.testing.assert_array_equal(np.diagonal(H), np.zeros(4))
        couplings = {(0, 1), (0, 2), (1, 3), (2, 3)}
        for i in range(4):
            for j in range(4):
                expected = 1.0 if (min(i, j), max(i, j)) in couplings else 0.0
                self.assertEqual(H[i, j], expected, (i, j))

    def test_uncoupled_diagonal(self):
        H = families.composite4_hamiltonian(1.0, ModelParams(b=1, g=0))
        np.testing.assert_array_equal(H, np.diag([2, 0, 0, -2]))

    def test_matches_kronecker_product_oracle(self):
        params = ModelParams(b=1.3, g=0.4)
        for t in (-2.5, 0.0, 0.7):
            H2 = families.lz_hamiltonian(t, params)
            oracle = np.kron(H2, np.eye(2)) + np.kron(np.eye(2), H2)
            np.testing.assert_allclose(families.composite4_hamiltonian(t, params), oracle, atol=1e-15)

    def test_rotation_decouples_third_state(self):
        rotated = families.rotate_out_dark_state(families.composite4_hamiltonian(0.0, ModelParams(b=1, g=1)))
        np.testing.assert_array_equal(rotated[2, :], np.zeros(4))
        np.testing.assert_array_equal(rotated[:, 2], np.zeros(4))
        self.assertEqual(rotated[0, 1], SQRT2)
        self.assertEqual(rotated[1, 3], SQRT2)

    def test_rotation_leaves_uncoupled_diagonal(self):
        rotated = families.rotate_out_dark_state(families.composite4_hamiltonian(1.5, ModelParams(b=1, g=0)))
        np.testing.assert_allclose(rotated, np.diag([3, 0, 0, -3]), atol=1e-15)

    def test_rotation_is_the_orthogonal_similarity(self):
        H = families.composite4_hamiltonian(0.8, ModelParams(b=1.1, g=0.6))
        V = families.dark_state_rotation()
        np.testing.assert_allclose(V @ V.T, np.eye(4), atol=1e-15)
        np.testing.assert_allclose(families.rotate_out_dark_state(H), V @ H @ V.T, atol=1e-14)

    def test_rotation_rejects_wrong_shape(self):
        with self.assertRaises(ValueError):
            families.rotate_out_dark_state(np.eye(3))

    def test_three_level_is_the_bright_block(self):
        params = ModelParams(b=1, g=1)
        np.testing.assert_array_equal(
            families.three_level_hamiltonian(0.0, params),
            [[0, SQRT2, 0], [SQRT2, 0, SQRT2], [0, SQRT2, 0]],
        )
        for t in (-1.0, 0.0, 2.5):
            rotated = families.rotate_out_dark_state(families.composite4_hamiltonian(t, params))
            bright = np.delete(np.delete(rotated, 2, axis=0), 2, axis=1)
            np.testing.assert_array_equal(bright, families.three_level_hamiltonian(t, params))


class TauFamilyTests(SimpleTestCase):
    def test_tau_one_recovers_three_level(self):
        params = ModelParams(b=0.9, g=0.4, tau=1.0)
        for t in (-3.0, 0.0, 1.7):
            np.testing.assert_array_equal(
                families.three_level_tau_family(t, params), families.three_level_hamiltonian(t, params)
            )

    def test_couplings_at_tau_two(self):
        H = families.three_level_tau_family(0.0, ModelParams(b=1, g=1, tau=2))
        self.assertAlmostEqual(H[0, 1].real, 2.0, places=15)
        self.assertAlmostEqual(H[1, 2].real, SQRT2, places=15)

    def test_partner_entries(self):
        H = families.commuting_partner(0.0, ModelParams(b=1, g=2, tau=1))
        self.assertAlmostEqual(H[0, 0].real, 1.0)
        self.assertAlmostEqual(H[0, 1].real, 0.0)
        self.assertAlmostEqual(H[0, 2].real, 1.0)
        self.assertAlmostEqual(H[1, 1].real, 2.0)
        self.assertAlmostEqual(H[2, 2].real, 1.0)

    def test_partner_commutes_and_is_compatible(self):
        rng = np.random.default_rng(7)
        for t, tau in zip(rng.uniform(-6, 6, 20), rng.uniform(0.3, 5, 20)):
            params = ModelParams(b=1.2, g=0.8, tau=tau)
            H = families.three_level_tau_family(t, params)
            partner = families.commuting_partner(t, params)
            self.assertLess(np.linalg.norm(commutator(H, partner)), 1e-11)
            np.testing.assert_allclose(
                families.dtau_three_level_tau_family(t, params), families.dt_commuting_partner(t, params)
            )

    def test_effective_two_level(self):
        np.testing.assert_allclose(
            families.effective_two_level(0.0, ModelParams(b=1, g=1, tau=1)), [[0, SQRT2], [SQRT2, 0]]
        )

    def test_gauge_shift_gives_a_two_level_sweep(self):
        params = ModelParams(b=1.5, g=0.6, tau=3.0)
        for t in (-2.0, 0.5):
            shifted = families.gauge_shift(families.effective_two_level(t, params), t, lambda s: params.b * params.tau * s)
            oracle = families.lz_hamiltonian(t, ModelParams(b=params.b * params.tau, g=math.sqrt(2 * params.tau) * params.g))
            np.testing.assert_allclose(shifted, oracle, atol=1e-14)
            np.testing.assert_allclose(families.effective_two_level_shifted(t, params), oracle, atol=1e-14)

    def test_zero_gauge_shift_is_identity(self):
        H = families.effective_two_level(1.0, ModelParams(b=1, g=1, tau=2))
        np.testing.assert_array_equal(families.gauge_shift(H, 1.0, 0.0), H)


class RegistryTests(SimpleTestCase):
    def test_every_family_is_hermitian(self):
        params = ModelParams(b=1.1, g=0.7, tau=2.5)
        t = np.linspace(-10, 10, 41)
        for name in registered_names():
            family = get_family(name)
            stack = family.eval_H(t, params)
            self.assertEqual(stack.shape, (41, family.dim, family.dim), name)
            self.assertLessEqual(hermiticity_defect(stack), 1e-14, name)

    def test_unknown_family_lists_registered_names(self):
        with self.assertRaises(UnknownFamilyError) as caught:
            get_family('nosuch')
        self.assertIn('nosuch', str(caught.exception))
        self.assertIn('three_level_tau', str(caught.exception))

    def test_partner_support(self):
        self.assertTrue(get_family('three_level_tau').supports_curvature)
        self.assertFalse(get_family('lz').has_partner)

    def test_partner_at_broadcasts_over_tau(self):
        family = get_family('three_level_tau')
        params = ModelParams(b=1, g=0.5)
        taus = np.array([1.0, 2.0, 3.0])
        stack = family.partner_at(-4.0, params)(taus)
        self.assertEqual(stack.shape, (3, 3, 3))
        np.testing.assert_array_equal(stack[1], families.commuting_partner(-4.0, params.with_tau(2.0)))

    def test_diagonal_coefficients(self):
        intercepts, slopes = get_family('three_level').diagonal_coefficients(ModelParams(b=1.5, g=1))
        np.testing.assert_allclose(intercepts, 0.0)
        np.testing.assert_allclose(slopes, [3.0, 0.0, -3.0])


class TransitionMatrixTests(SimpleTestCase):
    def test_identity(self):
        matrix = TransitionMatrix.from_unitary(np.eye(3))
        np.testing.assert_array_equal(matrix.entries, np.eye(3))
        self.assertTrue(matrix.is_doubly_stochastic())
        self.assertEqual(matrix.offdiagonal_mass(), 0.0)

    def test_rotation_is_doubly_stochastic(self):
        angle = 0.3
        U = np.array([[math.cos(angle), -1j * math.sin(angle)], [-1j * math.sin(angle), math.cos(angle)]])
        matrix = TransitionMatrix.from_unitary(U)
        self.assertAlmostEqual(matrix.survival(0), math.cos(angle) ** 2)
        self.assertAlmostEqual(matrix.offdiagonal_mass(), math.sin(angle) ** 2)
        self.assertTrue(matrix.is_doubly_stochastic(1e-14))
