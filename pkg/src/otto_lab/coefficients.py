"""Curvature coefficients appearing in the semigroup and bridge inequalities.

Both coefficients have removable singularities at rho = 0.  Below a cutoff on
|rho*T| a truncated Taylor series is used, which is accurate far beyond double
precision there and reproduces the limit value T exactly at rho = 0.
"""

import numpy as np

SERIES_CUTOFF = 1e-8


def decay_coefficient(rho, T):
    """Return (1 - exp(-2 rho T)) / (2 rho), with limit T at rho = 0."""
    x = rho * T
    if abs(x) < SERIES_CUTOFF:
        return T * (1.0 - x + 2.0 * x * x / 3.0)
    return -np.expm1(-2.0 * x) / (2.0 * rho)


def growth_coefficient(rho, T):
    """Return (exp(2 rho T) - 1) / (2 rho), with limit T at rho = 0."""
    x = rho * T
    if abs(x) < SERIES_CUTOFF:
        return T * (1.0 + x + 2.0 * x * x / 3.0)
    return np.expm1(2.0 * x) / (2.0 * rho)


def literal_decay_coefficient(rho, T):
    """Return (1 - exp(-2 rho T)) / (2 rho T), the form printed for the toy model.

    Its limit at rho = 0 is 1.  Only reported next to `decay_coefficient`.
    """
    return decay_coefficient(rho, T) / T


def literal_growth_coefficient(rho, T):
    """Return (exp(2 rho T) - 1) / (2 rho T), limit 1 at rho = 0."""
    return growth_coefficient(rho, T) / T
