import logging
import math

import numpy as np
from django.conf import settings
from django.core.cache import cache

from apps.propagator.evolution import FamilyPropagator, check_level
from apps.propagator.structures import LimitPolicy, SurvivalEstimate, UNITARITY_BOUND
from apps.utils.exceptions import ConvergenceError, DomainError, UnitarityError
from apps.utils.linalg import unitarity_defect

logger = logging.getLogger(__name__)


def slope_gaps(family, params):
    """Nonzero differences between the diabatic slopes of the family."""
    _, slopes = family.diagonal_coefficients(params)
    gaps = np.abs(slopes[:, None] - slopes[None, :])
    gaps = gaps[gaps > 1e-12 * max(1.0, float(np.max(np.abs(slopes))))]
    if gaps.size == 0:
        raise DomainError(f"{family.name} has no diabatic crossing at {params}")
    return gaps


def slowest_slope_gap(family, params):
    """Smallest nonzero difference between the diabatic slopes of the family."""
    return float(np.min(slope_gaps(family, params)))


def endpoint_sample_count(family, params, per_cycle):
    """
    Samples per endpoint window: ``per_cycle`` for every cycle the fastest
    diabatic pair completes while the slowest completes one.

    Uniform samples over one slow period average out every harmonic below
    the sample count; with fewer samples a pair whose rate is a multiple of
    the count aliases onto the mean.
    """
    gaps = slope_gaps(family, params)
    cycles = math.ceil(float(np.max(gaps) / np.min(gaps)) - 1e-9)
    return per_cycle * cycles


def _cache_key(family, params, level, policy, samples):
    return (f"survival:{family.name}:{params.b!r}:{params.g!r}:{params.tau!r}:{level}:"
            f"{samples}:{policy.token()}")


def _endpoint_extensions(propagator, T, period, samples):
    """
    Propagators from T to T + d_m and from -T - d_m to -T, with the offsets
    d_m at the midpoints of ``samples`` equal slices of one period.
    """
    offsets = (np.arange(samples) + 0.5) * period / samples
    right, left = [], []
    forward = backward = np.eye(propagator.dim, dtype=complex)
    previous = 0.0
    steps = 0
    for offset in offsets:
        piece, n_right = propagator.segment(T + previous, T + offset)
        forward = piece @ forward
        piece, n_left = propagator.segment(-T - offset, -T - previous)
        backward = backward @ piece
        right.append(forward)
        left.append(backward)
        steps += n_right + n_left
        previous = offset
    return np.array(right), np.array(left), steps


def _averaged_survival(core, right, left, level):
    """
    Mean of |(R_i C L_j)_kk|^2 over every pair of end and start samples,
    summed through the two dim x dim Gram matrices instead of the full grid.
    """
    ends = right[:, level, :] @ core
    starts = left[:, :, level]
    end_gram = ends.T @ ends.conj()
    start_gram = starts.T @ starts.conj()
    return float(np.real(np.sum(end_gram * start_gram))) / (len(ends) * len(starts))


def survival_probability(family, params, level=0, policy=None):
    """
    Diabatic survival probability (P)_{level,level} in the t -> +-infinity limit.

    Rung k integrates [-T_k, T_k], T_k = T_0 2**k, by extending the previous
    rung with two outer shells, then averages |U_kk|^2 over start and end
    times spanning one period of the slowest diabatic phase rate at T_k, with
    enough samples to resolve the fastest one (endpoint_sample_count). The
    averages converge once two consecutive rungs agree within the policy
    tolerance; their difference is the reported error.
    """
    policy = policy or LimitPolicy()
    check_level(family, level)
    samples = endpoint_sample_count(family, params, policy.endpoint_samples)
    key = _cache_key(family, params, level, policy, samples)
    if policy.use_cache:
        cached = cache.get(key)
        if cached is not None:
            logger.info(f"Returning cached survival probability for {family.name} at {params}")
            return cached

    gap = slowest_slope_gap(family, params)
    T0 = policy.time_scale / math.sqrt(0.5 * gap)
    propagator = FamilyPropagator(family, params, policy.config)

    ladder = []
    core = None
    worst_defect = 0.0
    previous_T = 0.0
    for rung in range(policy.max_rungs):
        T = T0 * 2 ** rung
        if core is None:
            core, steps = propagator.segment(-T, T)
        else:
            outer_right, n_right = propagator.segment(previous_T, T)
            outer_left, n_left = propagator.segment(-T, -previous_T)
            core = outer_right @ core @ outer_left
            steps = n_right + n_left
        defect = unitarity_defect(core)
        if defect > UNITARITY_BOUND:
            raise UnitarityError(defect, UNITARITY_BOUND)
        worst_defect = max(worst_defect, defect)

        period = 2 * math.pi / (gap * T)
        right, left, extension_steps = _endpoint_extensions(propagator, T, period, samples)
        value = _averaged_survival(core, right, left, level)
        ladder.append((T, value))
        logger.debug(f"{family.name} rung {rung}: T={T:.4g}, p={value:.12g}, steps={steps + extension_steps}")

        if len(ladder) >= 2:
            change = abs(ladder[-1][1] - ladder[-2][1])
            if change < policy.tolerance:
                estimate = SurvivalEstimate(
                    value=value,
                    error=change,
                    level=level,
                    ladder=tuple(ladder),
                    unitarity_defect=worst_defect,
                )
                if policy.use_cache:
                    cache.set(key, estimate, settings.LZ_CACHE_TIMEOUT)
                return estimate
        previous_T = T

    raise ConvergenceError(
        f"{family.name} survival probability did not converge within {policy.max_rungs} rungs",
        values=ladder,
    )
