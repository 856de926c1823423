import logging

from dataclasses import dataclass, replace

import numpy as np

from apps.hamiltonians.params import ModelParams
from apps.utils.exceptions import DomainError, UnsupportedFamilyError
from apps.utils.linalg import commutator, frobenius

logger = logging.getLogger(__name__)

FD_STEP = 1e-5
FD_SAMPLES = 10


@dataclass(frozen=True)
class CurvatureReport:
    grid: tuple
    commutator_residuals: tuple
    compatibility_residuals: tuple
    max_commutator: float
    max_compatibility: float
    fd_points: tuple = ()
    fd_deviation: float = 0.0

    def passes(self, threshold):
        return self.max_commutator <= threshold and self.max_compatibility <= threshold


def grid_from_ranges(t_range, tau_range):
    """Cartesian (t, tau) grid from inclusive (start, stop, step) ranges."""
    def points(start, stop, step):
        if step <= 0 or stop < start:
            raise DomainError(f"bad grid range {start}:{stop}:{step}")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return start + step * np.arange(count)

    taus = points(*tau_range)
    if np.any(taus <= 0):
        raise DomainError("curvature grid needs tau > 0")
    return [(float(t), float(tau)) for t in points(*t_range) for tau in taus]


def standard_grid():
    return grid_from_ranges((-5.0, 5.0, 1.0), (0.5, 4.0, 0.5))


def _residuals(family, params, t, tau):
    at = params.with_tau(tau)
    H = family.eval_H(t, at)
    partner = family.eval_Hprime(t, at)
    compatibility = family.eval_dtau_H(t, at) - family.eval_dt_Hprime(t, at)
    return float(frobenius(commutator(H, partner))), float(frobenius(compatibility))


def _finite_difference_deviation(family, params, t, tau, step):
    at = params.with_tau(tau)
    dtau_H = (family.eval_H(t, params.with_tau(tau + step)) - family.eval_H(t, params.with_tau(tau - step))) / (2 * step)
    dt_partner = (family.eval_Hprime(t + step, at) - family.eval_Hprime(t - step, at)) / (2 * step)
    return max(
        float(frobenius(dtau_H - family.eval_dtau_H(t, at))),
        float(frobenius(dt_partner - family.eval_dt_Hprime(t, at))),
    )


def curvature_check(family, grid, params=None, fd_samples=FD_SAMPLES, fd_step=FD_STEP, seed=0):
    """
    Residuals of the two integrability conditions, [H, H'] = 0 and
    dH/dtau = dH'/dt, at every grid point using the analytic derivatives.

    The analytic derivatives are cross-checked against central differences
    at ``fd_samples`` points drawn (reproducibly) from the grid's bounding box.
    """
    if not family.supports_curvature:
        raise UnsupportedFamilyError(f"{family.name} has no commuting partner with analytic derivatives")
    if not grid:
        raise DomainError("curvature grid is empty")
    params = params or ModelParams(b=1.0, g=1.0)

    commutators, compatibilities = [], []
    for t, tau in grid:
        if tau <= 0:
            raise DomainError(f"grid point ({t}, {tau}) has tau <= 0")
        commutator_residual, compatibility_residual = _residuals(family, params, t, tau)
        commutators.append(commutator_residual)
        compatibilities.append(compatibility_residual)

    points = np.array(grid, dtype=float)
    low, high = points.min(axis=0), points.max(axis=0)
    rng = np.random.default_rng(seed)
    fd_points = tuple(
        (float(t), float(tau)) for t, tau in low + (high - low) * rng.random((fd_samples, 2))
    )
    fd_deviation = max(
        (_finite_difference_deviation(family, params, t, tau, fd_step) for t, tau in fd_points),
        default=0.0,
    )

    report = CurvatureReport(
        grid=tuple(grid),
        commutator_residuals=tuple(commutators),
        compatibility_residuals=tuple(compatibilities),
        max_commutator=max(commutators),
        max_compatibility=max(compatibilities),
        fd_points=fd_points,
        fd_deviation=fd_deviation,
    )
    logger.info(
        f"Curvature of {family.name} on {len(grid)} points: commutator {report.max_commutator:.3e}, "
        f"compatibility {report.max_compatibility:.3e}, finite differences {fd_deviation:.3e}"
    )
    return report


def corrupted_partner(family):
    """Negative control: the partner with its (2, 3) entry set to g."""
    def eval_Hprime(t, params):
        H = np.array(family.eval_Hprime(t, params), copy=True)
        H[..., 1, 2] = H[..., 2, 1] = params.g
        return H

    return replace(family, name=f"{family.name}_corrupted", eval_Hprime=eval_Hprime)
