"""
Dense linear algebra for the small (dim <= 4) complex matrices of this project.

Every helper broadcasts over leading axes, so a stack of N matrices of shape
(N, d, d) is handled in one call.
"""
import numpy as np


def dagger(matrix):
    return np.conj(np.swapaxes(matrix, -1, -2))


def commutator(a, b):
    return a @ b - b @ a


def frobenius(matrix):
    return np.linalg.norm(matrix, axis=(-2, -1))


def hermiticity_defect(matrix):
    """Largest Frobenius norm of H - H^dagger over the stack."""
    return float(np.max(frobenius(matrix - dagger(matrix))))


def unitarity_defect(matrix):
    dim = matrix.shape[-1]
    return float(np.max(frobenius(dagger(matrix) @ matrix - np.eye(dim))))


def expm_hermitian(generator):
    """
    exp(-i G) for Hermitian G through an eigendecomposition.

    The result is unitary to rounding for any step size, which is why the
    steppers never call a generic matrix exponential.
    """
    eigenvalues, vectors = np.linalg.eigh(generator)
    phases = np.exp(-1j * eigenvalues)
    return (vectors * phases[..., None, :]) @ dagger(vectors)


def ordered_product(stack):
    """
    Time-ordered product U_n ... U_2 U_1 of a stack (U_1, ..., U_n).

    Pairs are multiplied level by level, so the number of Python-level
    operations grows like log(n).
    """
    stack = np.asarray(stack)
    if stack.shape[0] == 0:
        raise ValueError("ordered_product needs at least one matrix")
    dim = stack.shape[-1]
    while stack.shape[0] > 1:
        if stack.shape[0] % 2:
            stack = np.concatenate([stack, np.eye(dim, dtype=stack.dtype)[None]], axis=0)
        stack = stack[1::2] @ stack[0::2]
    return stack[0]
