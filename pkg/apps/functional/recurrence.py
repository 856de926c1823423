import logging
import math

from dataclasses import dataclass
from fractions import Fraction

from apps.utils.exceptions import DomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RecurrenceTable:
    """
    Taylor coefficients a_0..a_N of a solution of p(2x) = p(x)^2, in exact
    rational arithmetic, with the per-coefficient check against
    a_n = a_0 a_1^n / n!.
    """
    a1: Fraction
    a0: Fraction
    coefficients: tuple
    closed_form_match: tuple
    satisfies_recurrence: bool

    @property
    def all_match(self):
        return all(self.closed_form_match)


def recurrence_defect(coefficients, n):
    """2^n a_n - sum_l a_l a_{n-l}; zero for every n on a solution."""
    return 2 ** n * coefficients[n] - sum(coefficients[l] * coefficients[n - l] for l in range(n + 1))


def solve_recurrence(a1, N, a0=1):
    """
    Coefficients of p(x) = sum a_n x^n with 2^n a_n = sum_{l=0}^{n} a_l a_{n-l}.

    a_0 is 0 or 1 (a_0 = a_0^2). On the a_0 = 1 branch a_1 is free and
    (2^n - 2) a_n = sum_{l=1}^{n-1} a_l a_{n-l} fixes a_n for n >= 2; on the
    a_0 = 0 branch every coefficient vanishes.
    """
    if N < 1:
        raise DomainError(f"N must be at least 1, got {N}")
    a0 = Fraction(a0)
    if a0 not in (0, 1):
        raise DomainError(f"a0 must solve a0 = a0^2 (0 or 1), got {a0}")
    a1 = Fraction(a1)

    if a0 == 0:
        if a1 != 0:
            logger.warning(f"a0 = 0 forces a1 = 0; ignoring a1 = {a1}")
        coefficients = [Fraction(0)] * (N + 1)
    else:
        coefficients = [a0, a1]
        for n in range(2, N + 1):
            convolution = sum(coefficients[l] * coefficients[n - l] for l in range(1, n))
            coefficients.append(convolution / (2 ** n - 2))

    free = coefficients[1]
    matches = tuple(
        coefficients[n] * math.factorial(n) == a0 * free ** n
        for n in range(N + 1)
    )
    table = RecurrenceTable(
        a1=a1,
        a0=a0,
        coefficients=tuple(coefficients),
        closed_form_match=matches,
        satisfies_recurrence=all(recurrence_defect(coefficients, n) == 0 for n in range(N + 1)),
    )
    logger.debug(f"Recurrence a0={a0}, a1={a1}, N={N}: closed form holds for all n: {table.all_match}")
    return table


def partial_sum(table, gamma, order=None):
    """sum_{n <= order} a_n gamma^n in floating point."""
    order = len(table.coefficients) - 1 if order is None else order
    return sum(float(table.coefficients[n]) * gamma ** n for n in range(order + 1))
