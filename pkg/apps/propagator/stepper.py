"""
Unitary one-variable steppers.

A generator is any callable ``s -> H(s)`` that broadcasts over arrays of s
(see apps.hamiltonians.families). Every step multiplies by exp(-i G) with a
Hermitian G, so the propagators are unitary by construction.
"""
import logging
import math

import numpy as np

from apps.propagator.structures import Method
from apps.utils.exceptions import ConvergenceError, StepSizeUnderflow
from apps.utils.linalg import commutator, dagger, expm_hermitian, frobenius, ordered_product

logger = logging.getLogger(__name__)

GAUSS_OFFSET = math.sqrt(3.0) / 6.0
MAGNUS_COMMUTATOR = math.sqrt(3.0) / 12.0
COARSE_SAMPLES = 2049
CHUNK = 1 << 15
MAX_ADAPTIVE_STEPS = 2_000_000
UNDERFLOW = 1e-13


def local_frequency(matrices):
    """Bound on the eigenvalue spread of each matrix in a stack."""
    diagonal = np.real(np.diagonal(matrices, axis1=-2, axis2=-1))
    offdiagonal = matrices - np.einsum('...i,ij->...ij', np.diagonal(matrices, axis1=-2, axis2=-1),
                                       np.eye(matrices.shape[-1]))
    coupling = np.max(np.sum(np.abs(offdiagonal), axis=-1), axis=-1)
    return np.ptp(diagonal, axis=-1) + 2 * coupling


def build_mesh(frequency, s_start, s_end, config):
    """
    Step boundaries between s_start < s_end, uniform in accumulated phase.

    ``frequency`` maps an array of s to the local phase rate; it is sampled
    on a coarse grid and inverted by linear interpolation. ``max_step`` acts
    as a floor on the rate.
    """
    grid = np.linspace(s_start, s_end, COARSE_SAMPLES)
    floor = config.phase_per_step / config.max_step
    rate = np.maximum(frequency(grid), floor)
    phase = np.concatenate([[0.0], np.cumsum(0.5 * (rate[1:] + rate[:-1]) * np.diff(grid))])
    steps = max(1, math.ceil(phase[-1] / config.phase_per_step))
    mesh = np.interp(np.linspace(0.0, phase[-1], steps + 1), phase, grid)
    mesh[0], mesh[-1] = s_start, s_end
    return mesh


def midpoint_generators(generator, left, h):
    return h[:, None, None] * generator(left + 0.5 * h)


def magnus4_generators(generator, left, h):
    """
    Fourth-order Magnus exponent from the two Gauss-Legendre nodes:
    G = h/2 (H1 + H2) + i sqrt(3)/12 h^2 [H1, H2].
    """
    H1 = generator(left + (0.5 - GAUSS_OFFSET) * h)
    H2 = generator(left + (0.5 + GAUSS_OFFSET) * h)
    h = h[:, None, None]
    return 0.5 * h * (H1 + H2) + 1j * MAGNUS_COMMUTATOR * h ** 2 * commutator(H1, H2)


GENERATORS = {
    Method.MIDPOINT: midpoint_generators,
    Method.MAGNUS4: magnus4_generators,
}


def fixed_step(generator, mesh, method, dim):
    step_generators = GENERATORS[method]
    total = np.eye(dim, dtype=complex)
    for start in range(0, len(mesh) - 1, CHUNK):
        chunk = mesh[start:start + CHUNK + 1]
        left, h = chunk[:-1], np.diff(chunk)
        total = ordered_product(expm_hermitian(step_generators(generator, left, h))) @ total
    return total


def _single_step(generator, s, h):
    return expm_hermitian(magnus4_generators(generator, np.array([s]), np.array([h]))[0])


def adaptive(generator, frequency, s_start, s_end, config, dim):
    """
    Step doubling around the Magnus-4 step.

    One step of size h is compared with two of size h/2; the difference
    divided by 2**4 - 1 estimates the local error of the two half steps,
    which are kept when it is within ``step_tolerance``.
    """
    tolerance = config.step_tolerance
    s = s_start
    h = min(config.max_step, config.phase_per_step / max(float(frequency(s)), 1e-300))
    total = np.eye(dim, dtype=complex)
    steps = 0
    while s < s_end:
        remaining = s_end - s
        clamped = h >= remaining - UNDERFLOW * max(1.0, abs(s_end))
        if clamped:
            h = remaining
        if h <= UNDERFLOW * max(1.0, abs(s)):
            raise StepSizeUnderflow(s, h)
        whole = _single_step(generator, s, h)
        first = _single_step(generator, s, 0.5 * h)
        halves = _single_step(generator, s + 0.5 * h, 0.5 * h) @ first
        error = float(frobenius(whole - halves)) / 15.0
        if error <= tolerance:
            total = halves @ total
            s = s_end if clamped else s + h
            steps += 1
            if steps >= MAX_ADAPTIVE_STEPS and s < s_end:
                raise ConvergenceError(
                    f"adaptive stepper used its budget of {MAX_ADAPTIVE_STEPS} steps at s={s!r} "
                    f"before reaching {s_end!r}"
                )
        factor = 2.0 if error == 0 else min(2.0, max(0.2, 0.9 * (tolerance / error) ** 0.2))
        h = min(config.max_step, h * factor)
    return total, steps


def propagate(generator, s_start, s_end, config, dim, frequency=None):
    """
    Propagator from s_start to s_end and the number of steps taken.

    s_end < s_start is allowed: the result is the adjoint of the forward
    propagator, which is the ordered exponential along the reversed segment.
    ``frequency`` sets the mesh density and defaults to the eigenvalue-spread
    bound of the generator itself.
    """
    if frequency is None:
        def frequency(s):
            return local_frequency(generator(s))
    if s_start == s_end:
        return np.eye(dim, dtype=complex), 0
    if s_end < s_start:
        forward, steps = propagate(generator, s_end, s_start, config, dim, frequency)
        return dagger(forward), steps
    if config.method is Method.ADAPTIVE:
        return adaptive(generator, frequency, s_start, s_end, config, dim)
    mesh = build_mesh(frequency, s_start, s_end, config)
    return fixed_step(generator, mesh, config.method, dim), len(mesh) - 1
