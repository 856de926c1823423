"""
Matrix-valued Hamiltonian families of the linear-sweep derivation.

Every evaluator accepts a scalar time or an array of times and returns a
complex array of shape ``t.shape + (dim, dim)``; the propagator evaluates a
whole step mesh in one call.
"""
import math

import numpy as np

SQRT_HALF = math.sqrt(0.5)


def _empty(t, dim):
    t = np.asarray(t, dtype=float)
    return t, np.zeros(t.shape + (dim, dim), dtype=complex)


def kronecker_sum(a, b):
    """a (x) 1 + 1 (x) b for (stacks of) square matrices."""
    da, db = a.shape[-1], b.shape[-1]
    left = np.einsum('...ij,kl->...ikjl', a, np.eye(db))
    right = np.einsum('ij,...kl->...ikjl', np.eye(da), b)
    return (left + right).reshape(a.shape[:-2] + (da * db, da * db))


def lz_hamiltonian(t, params):
    """[[b t, g], [g, -b t]]"""
    params.require_slope()
    t, H = _empty(t, 2)
    H[..., 0, 0] = params.b * t
    H[..., 1, 1] = -params.b * t
    H[..., 0, 1] = H[..., 1, 0] = params.g
    return H


def composite4_hamiltonian(t, params):
    """Two uncoupled copies of the same sweep: H_LZ (x) 1 + 1 (x) H_LZ."""
    H2 = lz_hamiltonian(t, params)
    return kronecker_sum(H2, H2)


def dark_state_rotation():
    """
    Orthogonal rotation in the plane of the 2nd and 3rd basis states.

    Applied as ``V @ H @ V.T`` it maps the symmetric combination of states 2
    and 3 to position 2 and the antisymmetric (dark) combination to position 3.
    """
    V = np.eye(4)
    V[1, 1] = V[1, 2] = V[2, 2] = SQRT_HALF
    V[2, 1] = -SQRT_HALF
    return V


def rotate_out_dark_state(H4):
    """
    Rotate the composite Hamiltonian so that the 3rd state decouples.

    The rotation is written out row- and column-wise instead of as a matrix
    product so that the coupling entries come out as exactly sqrt(2)*g.
    """
    H4 = np.asarray(H4)
    if H4.shape[-2:] != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {H4.shape}")
    rows = H4.astype(complex, copy=True)
    rows[..., 1, :] = SQRT_HALF * (H4[..., 1, :] + H4[..., 2, :])
    rows[..., 2, :] = SQRT_HALF * (H4[..., 2, :] - H4[..., 1, :])
    rotated = rows.copy()
    rotated[..., :, 1] = SQRT_HALF * (rows[..., :, 1] + rows[..., :, 2])
    rotated[..., :, 2] = SQRT_HALF * (rows[..., :, 2] - rows[..., :, 1])
    return rotated


def three_level_hamiltonian(t, params):
    params.require_slope()
    t, H = _empty(t, 3)
    coupling = np.sqrt(2.0) * params.g
    H[..., 0, 0] = 2 * params.b * t
    H[..., 2, 2] = -2 * params.b * t
    H[..., 0, 1] = H[..., 1, 0] = coupling
    H[..., 1, 2] = H[..., 2, 1] = coupling
    return H


def three_level_tau_family(t, params):
    """The three-level model with level 1 sped up by tau; tau = 1 is three_level_hamiltonian."""
    params.require_slope().require_tau()
    t, H = _empty(t, 3)
    b, g, tau = params.b, params.g, params.tau
    H[..., 0, 0] = 2 * b * tau * t
    H[..., 2, 2] = -2 * b * t
    H[..., 0, 1] = H[..., 1, 0] = np.sqrt(2 * tau) * g
    H[..., 1, 2] = H[..., 2, 1] = np.sqrt(2.0) * g
    return H


def commuting_partner(t, params):
    """Partner H' with [H, H'] = 0 and dH/dtau = dH'/dt for three_level_tau_family."""
    params.require_slope().require_tau()
    t, H = _empty(t, 3)
    b, g, tau = params.b, params.g, params.tau
    H[..., 0, 0] = g ** 2 / (2 * b * (tau + 1)) + b * t ** 2
    H[..., 0, 1] = H[..., 1, 0] = g * t / np.sqrt(2 * tau)
    H[..., 0, 2] = H[..., 2, 0] = g ** 2 / (2 * b * (tau + 1) * np.sqrt(tau))
    H[..., 1, 1] = g ** 2 / (2 * b * tau)
    H[..., 2, 2] = g ** 2 / (2 * b * tau * (tau + 1))
    return H


def dtau_three_level_tau_family(t, params):
    params.require_slope().require_tau()
    t, H = _empty(t, 3)
    H[..., 0, 0] = 2 * params.b * t
    H[..., 0, 1] = H[..., 1, 0] = params.g / np.sqrt(2 * params.tau)
    return H


def dt_commuting_partner(t, params):
    params.require_slope().require_tau()
    t, H = _empty(t, 3)
    H[..., 0, 0] = 2 * params.b * t
    H[..., 0, 1] = H[..., 1, 0] = params.g / np.sqrt(2 * params.tau)
    return H


def effective_two_level(t, params):
    """Levels 1 and 2 of the tau family once level 3 has decoupled."""
    params.require_slope().require_tau()
    t, H = _empty(t, 2)
    H[..., 0, 0] = 2 * params.b * params.tau * t
    H[..., 0, 1] = H[..., 1, 0] = np.sqrt(2 * params.tau) * params.g
    return H


def gauge_shift(H, t, shift):
    """
    H - shift(t) * 1.

    ``shift`` is a callable of t or a constant; transition probabilities are
    unchanged because the shift only adds a common phase.
    """
    H = np.asarray(H)
    value = shift(t) if callable(shift) else shift
    value = np.asarray(value, dtype=float)
    return H - value[..., None, None] * np.eye(H.shape[-1])


def effective_two_level_shifted(t, params):
    """effective_two_level in the gauge where it is an LZ model of slope b*tau."""
    return gauge_shift(effective_two_level(t, params), t, lambda s: params.b * params.tau * np.asarray(s))


def scaled_time_equivalent(params):
    """The unit-slope sweep with the same transition probabilities (time rescaled by sqrt(b))."""
    params.require_slope()
    return type(params)(b=1.0, g=params.g / math.sqrt(params.b), tau=params.tau)
