import logging
import math

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

from apps.flatland.deformation import tau_scaling_probability
from apps.hamiltonians.params import ModelParams
from apps.hamiltonians.registry import get_family
from apps.propagator.limits import survival_probability
from apps.utils.exceptions import DomainError, LZError

logger = logging.getLogger(__name__)

DIRECT = 'direct'
REDUCTION = 'reduction'


@dataclass(frozen=True)
class SweepRecord:
    """
    One point of the functional equation check: p(gamma), p(2 gamma) and
    p(2 gamma) - p(gamma)^2. A failed point keeps NaN values and the error.
    """
    gamma: float
    p: float
    p_error: float
    p_double_gamma: float
    p_double_gamma_error: float
    functional_residual: float
    route: str = DIRECT
    tau: Optional[float] = None
    error: Optional[str] = None

    @property
    def ok(self):
        return self.error is None

    @classmethod
    def failed(cls, gamma, route, tau, error):
        nan = math.nan
        return cls(gamma, nan, nan, nan, nan, nan, route=route, tau=tau, error=str(error))


def _check_gamma(gamma):
    if not gamma >= 0:
        raise DomainError(f"gamma must be non-negative, got {gamma}")


def _record(gamma, single, double, route, tau=None):
    return SweepRecord(
        gamma=gamma,
        p=single.value,
        p_error=single.error,
        p_double_gamma=double.value,
        p_double_gamma_error=double.error,
        functional_residual=double.value - single.value ** 2,
        route=route,
        tau=tau,
    )


def functional_residual(gamma, policy=None):
    """p(2 gamma) - p(gamma)^2 from two independent runs of the two-level model."""
    _check_gamma(gamma)
    family = get_family('lz')
    single = survival_probability(family, ModelParams.from_gamma(gamma), 0, policy)
    double = survival_probability(family, ModelParams.from_gamma(2 * gamma), 0, policy)
    return _record(gamma, single, double, DIRECT)


def functional_residual_via_reduction(gamma, tau=1.0, policy=None):
    """As functional_residual, with p(2 gamma) read off the effective model at tau."""
    _check_gamma(gamma)
    if not tau > 0:
        raise DomainError(f"tau must be positive, got {tau}")
    params = ModelParams.from_gamma(gamma)
    single = survival_probability(get_family('lz'), params, 0, policy)
    double = tau_scaling_probability(params, tau, policy)
    return _record(gamma, single, double, REDUCTION, tau)


def gamma_sweep(gamma_grid, policy=None, via_reduction=False, tau=1.0, max_workers=1):
    """
    One SweepRecord per gamma in input order. Points are independent and
    run on ``max_workers`` threads; a point whose propagation fails is kept
    as a failed record instead of aborting the sweep.
    """
    gamma_grid = [float(gamma) for gamma in gamma_grid]
    if not gamma_grid:
        raise DomainError("gamma grid is empty")
    for gamma in gamma_grid:
        _check_gamma(gamma)
    route = REDUCTION if via_reduction else DIRECT

    def run(gamma):
        try:
            if via_reduction:
                return functional_residual_via_reduction(gamma, tau, policy)
            return functional_residual(gamma, policy)
        except LZError as exc:
            logger.warning(f"Sweep point gamma={gamma} failed: {exc}")
            return SweepRecord.failed(gamma, route, tau if via_reduction else None, exc)

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            records = list(pool.map(run, gamma_grid))
    else:
        records = [run(gamma) for gamma in gamma_grid]

    failures = sum(not record.ok for record in records)
    logger.info(f"Sweep over {len(records)} gamma values ({route}) finished with {failures} failures")
    return records
