import logging
import math

from dataclasses import dataclass

import numpy as np

from apps.utils.exceptions import DomainError

logger = logging.getLogger(__name__)

GAUSS_NODES = 20
PANEL_PHASE = math.pi / 4


@dataclass(frozen=True)
class FresnelResult:
    """Truncated integral plus tail correction, with the first omitted tail term as error."""
    value: complex
    error_estimate: float
    quadrature: complex
    tail: complex


def tail_coefficient(k):
    """c_k = -(2k-1)!! / (2i)^(k+1) of the tail series; c_0 = i/2."""
    double_factorial = math.prod(range(2 * k - 1, 0, -2)) if k > 0 else 1
    return -double_factorial / (2j) ** (k + 1)


def _truncated_integral(b, T):
    """2 * int_0^T exp(i b t^2) dt by Gauss-Legendre on panels of equal phase."""
    panels = math.ceil(b * T ** 2 / PANEL_PHASE)
    edges = np.sqrt(np.arange(panels + 1) * PANEL_PHASE / b)
    edges[-1] = T
    left, right = edges[:-1], edges[1:]
    nodes, weights = np.polynomial.legendre.leggauss(GAUSS_NODES)
    half = 0.5 * (right - left)[:, None]
    t = half * nodes + 0.5 * (right + left)[:, None]
    return complex(2 * np.sum(half * weights * np.exp(1j * b * t ** 2)))


def fresnel_integral(b, T, correction_order=3):
    """
    int_{-T}^{T} exp(i b t^2) dt plus both stationary-phase tails.

    With u = sqrt(b) T each tail is exp(i b T^2)/sqrt(b) * sum_k c_k / u^(2k+1),
    so the corrected value approaches exp(i pi/4) sqrt(pi/b).
    """
    if not b > 0:
        raise DomainError(f"slope b must be positive, got {b}")
    if not T > 0:
        raise DomainError(f"truncation T must be positive, got {T}")
    if correction_order < 0:
        raise DomainError(f"correction_order must be non-negative, got {correction_order}")

    quadrature = _truncated_integral(b, T)
    u = math.sqrt(b) * T
    scale = np.exp(1j * b * T ** 2) / math.sqrt(b)
    tail = 2 * scale * sum(tail_coefficient(k) / u ** (2 * k + 1) for k in range(correction_order))
    error = 2 * abs(tail_coefficient(correction_order)) / (math.sqrt(b) * u ** (2 * correction_order + 1))
    return FresnelResult(
        value=complex(quadrature + tail),
        error_estimate=float(error),
        quadrature=quadrature,
        tail=complex(tail),
    )


def first_order_amplitude(params, T=30.0):
    """Lowest Dyson term of the off-diagonal propagator entry, -i g int exp(i b t^2) dt."""
    params.require_slope()
    return -1j * params.g * fresnel_integral(params.b, T, 3).value


def first_order_transition(params, T=30.0):
    """Leading-order 1 - p, close to pi g^2 / b."""
    return float(abs(first_order_amplitude(params, T)) ** 2)
