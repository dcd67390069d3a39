"""Twisted multiple Dirichlet series: evaluation and parity reduction.

The library evaluates series of the form

    zeta(h, k, y, A) = sum over m in N^r of
        prod_j e(m_j y_j) / m_j^{h_j} * prod_i (sum_j a_ij m_j)^{-k_i}

both directly (compensated shell summation with tail control) and through
the reduction of zeta(y) + (-1)^{wt+r+1} zeta(-y) to lower-depth sums with
generating-function coefficients, then checks the two against each other.
"""

from .model import (
    SeriesSpec,
    SpecError,
    convergence_check,
    load_spec,
    parse_spec,
    validate_spec,
)
from .evaluator import rhs_total, verify_parity, zeta_direct

__all__ = [
    "SeriesSpec",
    "SpecError",
    "convergence_check",
    "load_spec",
    "parse_spec",
    "validate_spec",
    "zeta_direct",
    "rhs_total",
    "verify_parity",
]
