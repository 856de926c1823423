import logging

from dataclasses import dataclass

import numpy as np

from apps.flatland.paths import ParamPath, segment_propagators
from apps.hamiltonians.params import TransitionMatrix
from apps.hamiltonians.registry import get_family
from apps.propagator.limits import survival_probability
from apps.utils.exceptions import DomainError
from apps.utils.linalg import unitarity_defect

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DeformationRecord:
    gamma: float
    tau0: float
    T: float
    p_horizontal: float
    p_deformed: float
    difference: float
    vertical_offdiagonal_mass: tuple
    unitarity_defect: float

    def passes(self, tolerance):
        return abs(self.difference) <= tolerance


def deformation_experiment(params, tau0, T, config=None):
    """
    Survival probability of level 1 of the tau family along the straight
    path at tau = 1 and along the three-segment detour through tau0.

    The vertical segments' transition matrices are returned as their
    largest off-diagonal mass: near zero means those segments only
    contribute phases.
    """
    if not tau0 > 1:
        raise DomainError(f"tau0 must exceed the starting tau = 1, got {tau0}")
    if not T > 0:
        raise DomainError(f"T must be positive, got {T}")
    family = get_family('three_level_tau')
    start = params.with_tau(1.0)

    (horizontal, _), = segment_propagators(family, start, ParamPath.horizontal(T), config)
    (up, _), (across, _), (down, _) = segment_propagators(family, start, ParamPath.deformed(T, tau0), config)
    deformed = down @ across @ up

    p_horizontal = TransitionMatrix.from_unitary(horizontal).survival(0)
    p_deformed = TransitionMatrix.from_unitary(deformed).survival(0)
    record = DeformationRecord(
        gamma=params.gamma,
        tau0=tau0,
        T=T,
        p_horizontal=p_horizontal,
        p_deformed=p_deformed,
        difference=p_horizontal - p_deformed,
        vertical_offdiagonal_mass=(
            TransitionMatrix.from_unitary(up).offdiagonal_mass(),
            TransitionMatrix.from_unitary(down).offdiagonal_mass(),
        ),
        unitarity_defect=max(unitarity_defect(horizontal), unitarity_defect(deformed)),
    )
    logger.info(
        f"Deformation at gamma={record.gamma:.6g}, tau0={tau0}, T={T}: "
        f"p={p_horizontal:.10f} vs {p_deformed:.10f}"
    )
    return record


def tau_scaling_probability(params, tau, policy=None):
    """Survival on level 1 of the effective two-level model at tau; equals p(2 gamma) for every tau."""
    if not tau > 0:
        raise DomainError(f"tau must be positive, got {tau}")
    return survival_probability(get_family('effective_two_level'), params.with_tau(tau), 0, policy)


def decoupling_gap(params, tau0, policy=None):
    """|(P_3,tau0)_11 - tau_scaling_probability(tau0)|; small once level 3 has decoupled at large tau0."""
    three_level = survival_probability(get_family('three_level_tau'), params.with_tau(tau0), 0, policy)
    effective = tau_scaling_probability(params, tau0, policy)
    return float(np.abs(three_level.value - effective.value))
