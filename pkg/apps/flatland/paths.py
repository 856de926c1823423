import logging

from dataclasses import dataclass

import numpy as np

from apps.propagator.evolution import FamilyPropagator, evolve_generator
from apps.propagator.structures import IntegratorConfig, UnitaryResult
from apps.utils.exceptions import DomainError, UnsupportedFamilyError
from apps.utils.linalg import unitarity_defect

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ParamPath:
    """
    Polyline in the (t, tau) plane made of axis-aligned segments.

    Diagonal segments are rejected: along a pure-t segment the path-ordered
    exponential integrates H at fixed tau, along a pure-tau segment it
    integrates H' at fixed t.
    """
    vertices: tuple

    def __post_init__(self):
        vertices = tuple((float(t), float(tau)) for t, tau in self.vertices)
        if len(vertices) < 2:
            raise DomainError("a path needs at least 2 vertices")
        for t, tau in vertices:
            if not tau > 0:
                raise DomainError(f"path vertex ({t}, {tau}) has tau <= 0")
        for (t0, tau0), (t1, tau1) in zip(vertices, vertices[1:]):
            if (t0, tau0) == (t1, tau1):
                raise DomainError(f"repeated vertex ({t0}, {tau0})")
            if t0 != t1 and tau0 != tau1:
                raise DomainError(f"segment ({t0}, {tau0}) -> ({t1}, {tau1}) is not axis-aligned")
        object.__setattr__(self, 'vertices', vertices)

    @classmethod
    def horizontal(cls, T, tau=1.0):
        return cls(((-T, tau), (T, tau)))

    @classmethod
    def deformed(cls, T, tau0, tau=1.0):
        """Up from (-T, tau) to tau0, across to T, back down to tau."""
        return cls(((-T, tau), (-T, tau0), (T, tau0), (T, tau)))

    def segments(self):
        return list(zip(self.vertices, self.vertices[1:]))


def segment_propagator(family, params, start, end, config):
    """Propagator along one axis-aligned segment, in the Schroedinger picture."""
    (t0, tau0), (t1, tau1) = start, end
    if tau0 == tau1:
        propagator = FamilyPropagator(family, params.with_tau(tau0), config)
        matrix, steps = propagator.segment(t0, t1)
        return propagator.to_schroedinger(matrix, t0, t1), steps
    if not family.has_partner:
        raise UnsupportedFamilyError(f"{family.name} has no commuting partner for the tau segment at t={t0}")
    result = evolve_generator(family.partner_at(t0, params), tau0, tau1, config)
    return result.matrix, result.steps_taken


def segment_propagators(family, params, path, config=None):
    config = config or IntegratorConfig()
    return [segment_propagator(family, params, start, end, config) for start, end in path.segments()]


def evolve_along_path(family, params, path, config=None):
    """
    Path-ordered exponential of -i (H dt + H' dtau) along the path: the
    ordered product of the segment propagators, first segment rightmost.
    """
    total = np.eye(family.dim, dtype=complex)
    steps = 0
    for matrix, count in segment_propagators(family, params, path, config):
        total = matrix @ total
        steps += count
    result = UnitaryResult(
        matrix=total,
        unitarity_defect=unitarity_defect(total),
        steps_taken=steps,
        window=path,
    )
    if not result.accepted:
        logger.warning(f"Rejected path propagator for {family.name}: defect {result.unitarity_defect:.3e}")
    return result
