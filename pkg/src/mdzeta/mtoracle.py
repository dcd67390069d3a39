"""Independent closed form of G for the single all-ones form, zero twist.

For instances whose matrix is one row of ones, G telescopes to

    (-e(t_last)/2 pi i) * (e(u) - 1)/(S - u) * prod_v 2 pi i t_v/(e(t_v) - 1)

with u = sum_{j in J} t_j - t_last and S the sum of the frozen outer
variables.  This route shares no code with the basis/coset assembly: the
exponentials come from the series exponential, the cotangent-type factors
from series inversion rather than Bernoulli polynomials.  It exists to
cross-check the assembly, so keep it independent.
"""

from __future__ import annotations

import math

from . import mpseries
from .model import SeriesSpec, subset_context
from .mpseries import MultiSeries


def _unit_factor(variables, caps, total_cap, var) -> MultiSeries:
    # 2 pi i t/(e(t) - 1) as 1/(sum_m (2 pi i t)^m/(m+1)!)
    base = mpseries.zero(variables, caps, total_cap)
    pos = base.variables.index(var)
    for m in range(min(base.caps[pos], base.total_cap) + 1):
        key = tuple(m if i == pos else 0 for i in range(len(base.variables)))
        base.coeffs[key] = mpseries.two_pi_i_power(m) / math.factorial(m + 1)
    return mpseries.invert_unit(base)


def mt_closed_form_G(spec: SeriesSpec, J, m_outer=None) -> MultiSeries:
    """Reference G for (spec, J); spec must be all-ones with zero twist."""
    if not spec.is_mordell_tornheim():
        raise ValueError("closed form only covers the single all-ones form")
    if any(v != 0 for v in spec.y):
        raise ValueError("closed form implemented for zero twist only")
    ctx = subset_context(spec, tuple(J))
    m_outer = dict(m_outer or {})
    if set(m_outer) != set(ctx.Jbar):
        raise ValueError(f"outer tuple must cover Jbar = {ctx.Jbar}")
    last = f"t{spec.r + 1}"
    variables = tuple(f"t{j}" for j in ctx.J) + (last,)
    caps = tuple(spec.h[j - 1] for j in ctx.J) + (spec.k[0],)
    total_cap = sum(caps)
    S = sum(m_outer[j] for j in ctx.Jbar)

    u = mpseries.linear_form(
        {f"t{j}": 1.0 for j in ctx.J} | {last: -1.0}, variables, caps, total_cap
    )
    one = mpseries.constant(1.0, variables, caps, total_cap)
    if S == 0:
        # (e(u) - 1)/(0 - u) = -sum_n (2 pi i)^(n+1) u^n / (n+1)!
        middle = mpseries.zero(variables, caps, total_cap)
        upow = one
        for n in range(total_cap + 1):
            middle = mpseries.series_add(
                middle,
                mpseries.series_scale(
                    upow, -mpseries.two_pi_i_power(n + 1) / math.factorial(n + 1)
                ),
            )
            upow = mpseries.series_mul(upow, u)
    else:
        eu = mpseries.series_sub(
            mpseries.exp_2pii_linear(
                {f"t{j}": 1 for j in ctx.J} | {last: -1}, variables, caps, total_cap
            ),
            one,
        )
        geom = one
        scaled = mpseries.series_scale(u, 1.0 / S)
        for _ in range(total_cap):
            geom = mpseries.series_add(one, mpseries.series_mul(scaled, geom))
        middle = mpseries.series_scale(mpseries.series_mul(eu, geom), 1.0 / S)

    prefactor = mpseries.series_scale(
        mpseries.exp_2pii_linear({last: 1}, variables, caps, total_cap),
        -1.0 / (2j * math.pi),
    )
    out = mpseries.series_mul(prefactor, middle)
    for var in variables:
        out = mpseries.series_mul(out, _unit_factor(variables, caps, total_cap, var))
    return out
