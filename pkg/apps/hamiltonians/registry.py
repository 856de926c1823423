import logging

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from apps.hamiltonians import families
from apps.utils.exceptions import UnknownFamilyError

logger = logging.getLogger(__name__)

Evaluator = Callable[..., np.ndarray]


@dataclass(frozen=True)
class HamiltonianFamily:
    """
    A named matrix-valued function of (t, params), optionally with a commuting
    partner H' and the analytic derivatives dH/dtau and dH'/dt.
    """
    name: str
    dim: int
    eval_H: Evaluator
    eval_Hprime: Optional[Evaluator] = None
    eval_dtau_H: Optional[Evaluator] = None
    eval_dt_Hprime: Optional[Evaluator] = None
    description: str = ''

    @property
    def has_partner(self):
        return self.eval_Hprime is not None

    @property
    def supports_curvature(self):
        return self.has_partner and self.eval_dtau_H is not None and self.eval_dt_Hprime is not None

    def at(self, params):
        """H as a function of t alone, for fixed params."""
        return lambda t: self.eval_H(t, params)

    def partner_at(self, t, params):
        """H' as a function of tau alone, at fixed t; broadcasts over arrays of tau."""
        def partner(tau):
            taus = np.asarray(tau, dtype=float)
            stack = [self.eval_Hprime(t, params.with_tau(float(value))) for value in taus.ravel()]
            return np.array(stack).reshape(taus.shape + (self.dim, self.dim))
        return partner

    def diagonal_coefficients(self, params):
        """
        Intercepts and slopes of the (affine in t) diagonal of H.

        Every registered family has a diagonal linear in t; the propagator
        uses the slopes for its time scale and the interaction picture.
        """
        at_zero = np.real(np.diagonal(self.eval_H(0.0, params)))
        at_one = np.real(np.diagonal(self.eval_H(1.0, params)))
        return at_zero, at_one - at_zero


FAMILIES = {}


def register(family):
    if family.name in FAMILIES:
        logger.warning(f"Replacing registered family '{family.name}'")
    FAMILIES[family.name] = family
    return family


def get_family(name):
    try:
        return FAMILIES[name]
    except KeyError:
        raise UnknownFamilyError(name, registered_names()) from None


def registered_names():
    return sorted(FAMILIES)


register(HamiltonianFamily(
    name='lz',
    dim=2,
    eval_H=families.lz_hamiltonian,
    description='two-level linear sweep [[bt, g], [g, -bt]]',
))
register(HamiltonianFamily(
    name='composite4',
    dim=4,
    eval_H=families.composite4_hamiltonian,
    description='two uncoupled copies of the two-level sweep',
))
register(HamiltonianFamily(
    name='composite4_rotated',
    dim=4,
    eval_H=lambda t, params: families.rotate_out_dark_state(families.composite4_hamiltonian(t, params)),
    description='composite4 with the dark state rotated into level 3',
))
register(HamiltonianFamily(
    name='three_level',
    dim=3,
    eval_H=families.three_level_hamiltonian,
    description='bright three-level reduction of composite4',
))
register(HamiltonianFamily(
    name='three_level_tau',
    dim=3,
    eval_H=families.three_level_tau_family,
    eval_Hprime=families.commuting_partner,
    eval_dtau_H=families.dtau_three_level_tau_family,
    eval_dt_Hprime=families.dt_commuting_partner,
    description='tau-deformed three-level model with its commuting partner',
))
register(HamiltonianFamily(
    name='effective_two_level',
    dim=2,
    eval_H=families.effective_two_level,
    description='levels 1-2 of the tau family at large tau',
))
register(HamiltonianFamily(
    name='effective_two_level_shifted',
    dim=2,
    eval_H=families.effective_two_level_shifted,
    description='effective_two_level gauge-shifted to slope b*tau',
))
