"""Oracles shared across the suite, deliberately independent of the library
code paths they check: a fast exact series for zeta(3), Bernoulli numbers by
the explicit double sum (no recurrence), Taylor coefficients via the Cauchy
integral on a roots-of-unity grid, and exact lattice membership by rational
solve."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np

from mdzeta import mpseries
from mdzeta.exact import RationalMatrix


def apery_zeta3() -> float:
    """zeta(3) from the alternating central-binomial series, exact partials."""
    total = Fraction(0)
    for n in range(1, 40):
        total += Fraction((-1) ** (n - 1), n**3 * math.comb(2 * n, n))
    return float(Fraction(5, 2) * total)


def bernoulli_explicit(n: int) -> Fraction:
    """B_n by the explicit double sum (B_1 = -1/2 convention), no recurrence."""
    total = Fraction(0)
    for k in range(n + 1):
        inner = sum(
            Fraction((-1) ** j * math.comb(k, j) * j**n) for j in range(k + 1)
        )
        total += inner / (k + 1)
    return total


def two_zeta_even(h: int) -> float:
    """2*zeta(h) for even h >= 2 from the Bernoulli closed form, exact until cast."""
    if h % 2 or h < 2:
        raise ValueError("even h >= 2 only")
    b = bernoulli_explicit(h)
    sign = -1 if (h // 2 + 1) % 2 else 1
    return float(sign * b) * (2.0 * math.pi) ** h / math.factorial(h)


def series_max_diff(a, b) -> float:
    return mpseries.max_abs(mpseries.series_sub(a, b))


def fft_taylor_coeffs(fn, nvars: int, max_degree: int, radius: float = 0.3) -> dict:
    """Taylor coefficients of fn at 0 by sampling on a polytorus.

    fn takes a tuple of complex points.  The grid is padded well past
    max_degree so aliasing from higher-order terms is negligible for
    functions whose nearest singularity is at distance >= 1.
    """
    n = max(max_degree + 2, 26)
    pts = radius * np.exp(2j * np.pi * np.arange(n) / n)
    vals = np.empty((n,) * nvars, dtype=complex)
    for idx in itertools.product(range(n), repeat=nvars):
        vals[idx] = fn(tuple(pts[i] for i in idx))
    # forward transform: coefficient m needs the e^{-2 pi i km/n} kernel
    co = np.fft.fftn(vals) / vals.size
    return {
        key: co[key] / radius ** sum(key)
        for key in itertools.product(range(max_degree + 1), repeat=nvars)
    }


def row_lattice_membership(vectors):
    """Membership test for the lattice of integer combinations of the rows.

    Returns a closure so the matrix inverse is computed once per lattice;
    delta is a member iff delta * inverse has integer entries throughout.
    """
    inv = RationalMatrix.from_rows(vectors).inverse()
    m = inv.nrows

    def member(delta) -> bool:
        coords = (
            sum(Fraction(delta[i]) * inv.rows[i][j] for i in range(m))
            for j in range(m)
        )
        return all(c.denominator == 1 for c in coords)

    return member
