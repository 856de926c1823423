import logging

import numpy as np

from apps.hamiltonians.params import TransitionMatrix
from apps.propagator.stepper import local_frequency, propagate
from apps.propagator.structures import IntegratorConfig, UnitaryResult, UNITARITY_BOUND
from apps.utils.exceptions import DomainError, UnitarityError
from apps.utils.linalg import unitarity_defect

logger = logging.getLogger(__name__)


class FamilyPropagator:
    """
    Propagators of one family at fixed parameters between arbitrary times.

    In the interaction picture the diagonal of H (affine in t) is removed by
    S(t) = diag(exp(i phi_k(t))) with phi_k' = H_kk, leaving the off-diagonal
    couplings dressed with exp(i (phi_j - phi_k)). Segments returned by
    :meth:`segment` compose in whichever picture is active and have the same
    absolute values on the diagonal as the Schroedinger-picture propagator.
    """

    def __init__(self, family, params, config=None):
        self.family = family
        self.params = params
        self.config = config or IntegratorConfig()
        self.dim = family.dim
        self.interaction = self.config.uses_interaction_picture(family.dim)
        self.intercepts, self.slopes = family.diagonal_coefficients(params)
        self.hamiltonian = family.at(params)

    def phases(self, t):
        t = np.asarray(t, dtype=float)[..., None]
        return self.intercepts * t + 0.5 * self.slopes * t ** 2

    def generator(self, t):
        H = self.hamiltonian(t)
        if not self.interaction:
            return H
        phase = self.phases(t)
        dressing = np.exp(1j * (phase[..., :, None] - phase[..., None, :]))
        return (H - np.einsum('...i,ij->...ij', np.diagonal(H, axis1=-2, axis2=-1), np.eye(self.dim))) * dressing

    def frequency(self, t):
        return local_frequency(self.hamiltonian(t))

    def segment(self, t_start, t_end):
        return propagate(self.generator, t_start, t_end, self.config, self.dim, self.frequency)

    def to_schroedinger(self, matrix, t_start, t_end):
        if not self.interaction:
            return matrix
        start = np.exp(1j * self.phases(t_start))
        end = np.exp(-1j * self.phases(t_end))
        return end[:, None] * matrix * start[None, :]


def evolve_window(family, params, window, config=None):
    """
    Time-ordered exponential of the family over the window at tau = window.tau.

    A result whose unitarity defect exceeds the bound is returned flagged
    (``accepted`` is False) and logged; transition_matrix refuses it.
    """
    params = params.with_tau(window.tau)
    propagator = FamilyPropagator(family, params, config)
    matrix, steps = propagator.segment(window.t_start, window.t_end)
    matrix = propagator.to_schroedinger(matrix, window.t_start, window.t_end)
    result = UnitaryResult(
        matrix=matrix,
        unitarity_defect=unitarity_defect(matrix),
        steps_taken=steps,
        window=window,
    )
    if not result.accepted:
        logger.warning(
            f"Rejected propagator for {family.name} on [{window.t_start}, {window.t_end}]: "
            f"unitarity defect {result.unitarity_defect:.3e}"
        )
    logger.debug(f"{family.name}: {steps} steps on [{window.t_start}, {window.t_end}] at tau={window.tau}")
    return result


def transition_matrix(result):
    if not result.accepted:
        raise UnitarityError(result.unitarity_defect, UNITARITY_BOUND)
    return TransitionMatrix.from_unitary(result.matrix)


def check_level(family, level):
    if not 0 <= level < family.dim:
        raise DomainError(f"level {level} is outside 0..{family.dim - 1} for {family.name}")


def evolve_generator(generator, s_start, s_end, config=None):
    """
    Ordered exponential of any broadcasting matrix function of one variable.

    Integrates backwards when s_end < s_start; the window of the result is
    the (s_start, s_end) pair.
    """
    config = config or IntegratorConfig()
    dim = np.shape(generator(np.asarray(float(s_start))))[-1]
    matrix, steps = propagate(generator, s_start, s_end, config, dim)
    return UnitaryResult(
        matrix=matrix,
        unitarity_defect=unitarity_defect(matrix),
        steps_taken=steps,
        window=(s_start, s_end),
    )
