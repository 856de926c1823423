from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from django.conf import settings

from apps.utils.exceptions import DomainError

UNITARITY_BOUND = 1e-8


class Method(str, Enum):
    MIDPOINT = 'midpoint'
    MAGNUS4 = 'magnus4'
    ADAPTIVE = 'adaptive'


@dataclass(frozen=True)
class IntegratorConfig:
    """
    How a single window is integrated.

    Fixed-step methods use a mesh that is uniform in accumulated diabatic
    phase (``phase_per_step`` radians per step) and never coarser than
    ``max_step``. ``interaction_picture=None`` selects it for two-level
    families only.
    """
    method: Method = Method.MAGNUS4
    step_tolerance: float = field(default_factory=lambda: settings.LZ_STEP_TOLERANCE)
    max_step: float = field(default_factory=lambda: settings.LZ_MAX_STEP)
    phase_per_step: float = field(default_factory=lambda: settings.LZ_PHASE_PER_STEP)
    interaction_picture: Optional[bool] = None

    def __post_init__(self):
        object.__setattr__(self, 'method', Method(self.method))
        if not self.step_tolerance > 0:
            raise DomainError(f"step_tolerance must be positive, got {self.step_tolerance}")
        if not self.max_step > 0:
            raise DomainError(f"max_step must be positive, got {self.max_step}")
        if not self.phase_per_step > 0:
            raise DomainError(f"phase_per_step must be positive, got {self.phase_per_step}")

    def uses_interaction_picture(self, dim):
        if self.interaction_picture is None:
            return dim == 2
        return self.interaction_picture

    def token(self):
        return (f"{self.method.value}:{self.step_tolerance!r}:{self.max_step!r}:"
                f"{self.phase_per_step!r}:{self.interaction_picture}")


@dataclass(frozen=True)
class EvolutionWindow:
    t_start: float
    t_end: float
    tau: float = 1.0

    def __post_init__(self):
        if not self.t_start < self.t_end:
            raise DomainError(f"window needs t_start < t_end, got [{self.t_start}, {self.t_end}]")

    @classmethod
    def symmetric(cls, T, tau=1.0):
        return cls(-T, T, tau)


@dataclass(frozen=True)
class UnitaryResult:
    matrix: np.ndarray
    unitarity_defect: float
    steps_taken: int
    window: EvolutionWindow

    @property
    def accepted(self):
        return self.unitarity_defect <= UNITARITY_BOUND

    @property
    def dim(self):
        return self.matrix.shape[0]


@dataclass(frozen=True)
class LimitPolicy:
    """
    Finite-T stand-in for the t -> +-infinity limit.

    Rung k integrates [-T_k, T_k] with T_k = time_scale / sqrt(rate) * 2**k and
    averages the survival probability over ``endpoint_samples`` start and end
    times spread across one diabatic oscillation period; the ladder stops
    when two consecutive averages differ by less than ``tolerance``.
    """
    tolerance: float = field(default_factory=lambda: settings.LZ_PROBABILITY_TOLERANCE)
    time_scale: float = field(default_factory=lambda: settings.LZ_TIME_SCALE)
    max_rungs: int = field(default_factory=lambda: settings.LZ_MAX_RUNGS)
    endpoint_samples: int = field(default_factory=lambda: settings.LZ_ENDPOINT_SAMPLES)
    config: IntegratorConfig = field(default_factory=IntegratorConfig)
    use_cache: bool = True

    def __post_init__(self):
        if not self.tolerance > 0:
            raise DomainError(f"probability tolerance must be positive, got {self.tolerance}")
        if not self.time_scale > 0:
            raise DomainError(f"time scale must be positive, got {self.time_scale}")
        if self.max_rungs < 2:
            raise DomainError(f"the ladder needs at least 2 rungs, got {self.max_rungs}")
        if self.endpoint_samples < 1:
            raise DomainError(f"endpoint_samples must be at least 1, got {self.endpoint_samples}")

    def token(self):
        return (f"{self.tolerance!r}:{self.time_scale!r}:{self.max_rungs}:"
                f"{self.endpoint_samples}:{self.config.token()}")


@dataclass(frozen=True)
class SurvivalEstimate:
    """Infinite-time survival probability of one level with its ladder history."""
    value: float
    error: float
    level: int
    ladder: tuple
    unitarity_defect: float

    @property
    def final_T(self):
        return self.ladder[-1][0]
