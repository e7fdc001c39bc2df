"""Shared error types and sentinel values."""

import math


class NumericFailure(RuntimeError):
    """A numerical routine failed to produce a trustworthy result.

    Raised with diagnostics (condition numbers, residuals, quadrature error
    estimates) so callers can report what went wrong instead of silently
    returning garbage.
    """


#: Sentinel for "no finite parameter value satisfies the constraint".
#: Using +inf keeps comparisons natural: an infeasible required power or
#: pilot length is larger than every feasible one.
INFEASIBLE = math.inf


def is_feasible(value) -> bool:
    """True if ``value`` is a finite solver result, False for INFEASIBLE."""
    return math.isfinite(value)
