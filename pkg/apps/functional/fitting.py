import logging

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import curve_fit

from apps.hamiltonians.params import ModelParams
from apps.hamiltonians.registry import get_family
from apps.propagator.limits import survival_probability
from apps.utils.exceptions import DataError, DomainError

logger = logging.getLogger(__name__)

EXPONENT_MODEL = 'p = exp(c*gamma)'


@dataclass(frozen=True)
class FitResult:
    c_estimate: float
    covariance: float
    residual_norm: float
    data: tuple
    model: str = EXPONENT_MODEL

    @property
    def standard_error(self):
        return float(np.sqrt(self.covariance))


@dataclass(frozen=True)
class SlopeFit:
    """(1 - p)/gamma = slope + curvature * gamma, fitted over small gamma."""
    slope: float
    curvature: float
    covariance: tuple
    data: tuple = field(default=())


def _check_gammas(gammas):
    gammas = np.asarray(gammas, dtype=float)
    if np.any(gammas <= 0):
        raise DomainError(f"fit needs gamma > 0, got {gammas.tolist()}")
    if np.unique(gammas).size < 3:
        raise DomainError(f"fit needs at least 3 distinct gamma values, got {gammas.tolist()}")
    return gammas


def _through_origin(gamma, c):
    return c * gamma


def _affine(gamma, intercept, slope):
    return intercept + slope * gamma


def fit_log_linear(gammas, probabilities):
    """Least-squares fit of ln p = c gamma through the origin."""
    gammas = _check_gammas(gammas)
    probabilities = np.asarray(probabilities, dtype=float)
    if probabilities.shape != gammas.shape:
        raise DomainError(f"{gammas.size} gamma values but {probabilities.size} probabilities")
    if np.any(probabilities <= 0):
        bad = gammas[probabilities <= 0].tolist()
        raise DataError(f"cannot take the log of non-positive p at gamma = {bad}")

    logs = np.log(probabilities)
    (c,), covariance = curve_fit(_through_origin, gammas, logs, p0=[-1.0])
    residual = float(np.linalg.norm(logs - c * gammas))
    result = FitResult(
        c_estimate=float(c),
        covariance=float(covariance[0, 0]),
        residual_norm=residual,
        data=tuple(zip(gammas.tolist(), probabilities.tolist())),
    )
    if result.c_estimate >= 0:
        logger.warning(f"Non-negative exponent {result.c_estimate:.6g}: data does not decay")
    logger.info(f"Fitted c = {result.c_estimate:.8g} over {gammas.size} points, residual {residual:.3e}")
    return result


def measure_lz(gammas, policy=None):
    family = get_family('lz')
    return [survival_probability(family, ModelParams.from_gamma(gamma), 0, policy).value for gamma in gammas]


def fit_exponent(gammas, policy=None):
    """Measure p(gamma) of the two-level model and fit p = exp(c gamma)."""
    gammas = _check_gammas(gammas)
    return fit_log_linear(gammas, measure_lz(gammas, policy))


def perturbative_slope(gammas, policy=None):
    """
    The gamma -> 0 limit of (1 - p)/gamma from a straight-line fit in gamma.

    Fitting (1 - p) itself with a line through the origin absorbs the
    -pi^2 gamma^2 / 2 term into the slope; the intercept of (1 - p)/gamma
    does not.
    """
    gammas = _check_gammas(gammas)
    probabilities = np.asarray(measure_lz(gammas, policy))
    ratios = (1.0 - probabilities) / gammas
    (slope, curvature), covariance = curve_fit(_affine, gammas, ratios, p0=[np.pi, 0.0])
    logger.info(f"Perturbative slope {slope:.8g} from {gammas.size} points")
    return SlopeFit(
        slope=float(slope),
        curvature=float(curvature),
        covariance=tuple(map(tuple, covariance.tolist())),
        data=tuple(zip(gammas.tolist(), probabilities.tolist())),
    )
