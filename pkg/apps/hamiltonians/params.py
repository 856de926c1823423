import math

from dataclasses import dataclass, replace

import numpy as np

from apps.utils.exceptions import DomainError


@dataclass(frozen=True)
class ModelParams:
    """
    Physical parameters of a linear sweep: slope b, coupling g and the
    deformation parameter tau (only read by the tau-dependent families).
    """
    b: float = 1.0
    g: float = 0.0
    tau: float = 1.0

    @classmethod
    def from_gamma(cls, gamma, b=1.0, tau=1.0):
        if gamma < 0:
            raise DomainError(f"gamma must be non-negative, got {gamma}")
        return cls(b=b, g=math.sqrt(gamma * b), tau=tau)

    @property
    def gamma(self):
        return self.g ** 2 / self.b

    def require_slope(self):
        if not self.b > 0:
            raise DomainError(f"slope b must be positive, got {self.b}")
        return self

    def require_tau(self):
        if not self.tau > 0:
            raise DomainError(f"deformation parameter tau must be positive, got {self.tau}")
        return self

    def with_tau(self, tau):
        return replace(self, tau=tau)

    def sign_flipped(self):
        return replace(self, g=-self.g)


@dataclass(frozen=True)
class TransitionMatrix:
    """Element-wise absolute squares of a propagator."""
    entries: np.ndarray
    row_defect: float
    col_defect: float

    @classmethod
    def from_unitary(cls, matrix):
        entries = np.abs(np.asarray(matrix)) ** 2
        return cls(
            entries=entries,
            row_defect=float(np.max(np.abs(entries.sum(axis=1) - 1.0))),
            col_defect=float(np.max(np.abs(entries.sum(axis=0) - 1.0))),
        )

    @property
    def dim(self):
        return self.entries.shape[0]

    def survival(self, level=0):
        return float(self.entries[level, level])

    def offdiagonal_mass(self):
        """Largest probability, over starting levels, of ending anywhere else."""
        return float(np.max(self.entries.sum(axis=0) - np.diag(self.entries)))

    def is_doubly_stochastic(self, tolerance=1e-7):
        return self.row_defect <= tolerance and self.col_defect <= tolerance
