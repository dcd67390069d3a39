"""Assembly of the lattice generating function G and its coefficients.

For a chosen subset J of inner variables, the reduction replaces the series
over the J variables by coefficients of a truncated series G in one variable
t_f per member f of a family Lambda of affine functionals on Z^|J|: one
member per variable in J and one per form meeting J.  G is a sum over the
bases B extracted from Lambda of coset-averaged Bernoulli-polynomial factors
(for members of B) times geometric factors -t_g/(d_g - L_g(t)) (for the
rest).  Whenever some d_g vanishes the per-basis terms are singular while
the sum is not; those tuples are assembled over a common denominator of
primitive linear forms and resolved by exact truncated division with a
remainder check.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, prod

from . import exact, mpseries
from .exact import RationalMatrix
from .model import SeriesSpec, SubsetContext, subset_context
from .mpseries import MultiSeries, SingularConfiguration
from .phase import unit_phase


@dataclass(frozen=True)
class AffineFunctional:
    """One member of Lambda: n -> <vec, n> + dot.

    Tags 1..r mark variable members (vec = e_j, dot = 0); tags r+i mark form
    members (vec = the i-th form restricted to J, dot = minus the form's
    contribution from the frozen outer variables).  Tags keep value-duplicate
    members distinct, which matters when a form restricted to J coincides
    with a coordinate vector.
    """

    tag: int
    vec: tuple[int, ...]
    dot: Fraction


def variable_name(tag: int) -> str:
    return f"t{tag}"


def build_lambda(spec: SeriesSpec, ctx: SubsetContext, m_outer) -> tuple[AffineFunctional, ...]:
    """The family Lambda for subset J with the outer tuple frozen.

    m_outer maps each j in Jbar to its (positive integer) value; it may be
    empty exactly when J = [r].
    """
    m_outer = dict(m_outer or {})
    if set(m_outer) != set(ctx.Jbar):
        raise exact.ExactError(
            f"outer tuple must cover Jbar = {ctx.Jbar}, got {sorted(m_outer)}"
        )
    members = []
    for j in ctx.J:
        vec = tuple(1 if jj == j else 0 for jj in ctx.J)
        members.append(AffineFunctional(tag=j, vec=vec, dot=Fraction(0)))
    for i in ctx.I:
        vec = tuple(spec.a(i, j) for j in ctx.J)
        dotv = -sum(
            (Fraction(spec.a(i, j) * m_outer[j]) for j in ctx.Jbar), Fraction(0)
        )
        members.append(AffineFunctional(tag=spec.r + i, vec=vec, dot=dotv))
    return tuple(members)


def enumerate_bases(members) -> tuple[tuple[int, ...], ...]:
    """Position tuples of all bases of Lambda, in lexicographic order."""
    m = len(members[0].vec)
    if exact.rank_of([f.vec for f in members]) < m:
        raise exact.RankDeficient("family does not span; no bases exist")
    out = []
    for idx in itertools.combinations(range(len(members)), m):
        if RationalMatrix.from_rows([members[i].vec for i in idx]).det() != 0:
            out.append(idx)
    return tuple(out)


def _normalize_linear(weights: dict[str, Fraction], order: tuple[str, ...]):
    """Split a rational linear form into (primitive integer form, scale).

    The primitive form has coprime integer coefficients and a positive
    leading coefficient in the given variable order, so equal directions
    normalize to the identical key.
    """
    den = 1
    for w in weights.values():
        den = den * w.denominator // gcd(den, w.denominator)
    ints = {name: int(w * den) for name, w in weights.items() if w != 0}
    g = 0
    for v in ints.values():
        g = gcd(g, abs(v))
    lead = next(name for name in order if ints.get(name, 0) != 0)
    if ints[lead] < 0:
        g = -g
    prim = tuple(ints.get(name, 0) // g for name in order)
    return prim, Fraction(g, den)


class GeneratingFunctionPlan:
    """Everything about (instance, J) that survives across outer tuples.

    Bases, dual bases, coset representatives, the certified direction rho,
    the rho-directed fractional parts, the Bernoulli factor products per
    (basis, coset), the linear forms L_g with their normalizations, and the
    d_g as linear functions of the outer tuple.  evaluate() then does only
    per-tuple work: evaluate the d_g, pick the regular or the singular
    assembly, and scale cached series by roots of unity.
    """

    def __init__(self, spec: SeriesSpec, J, rho_variant: int = 0):
        self.spec = spec
        self.ctx = subset_context(spec, tuple(J))
        ctx = self.ctx
        self.m = len(ctx.J)
        template = build_lambda(spec, ctx, {j: 1 for j in ctx.Jbar})
        self.tags = tuple(f.tag for f in template)
        self.vecs = tuple(f.vec for f in template)
        self.variables = tuple(variable_name(t) for t in self.tags)
        caps = [spec.h[j - 1] for j in ctx.J] + [spec.k[i - 1] for i in ctx.I]
        self.caps = tuple(caps)
        self.total_cap = sum(caps)
        # dot part of each member as a linear map of the outer tuple
        self.dot_coeffs: tuple[dict[int, int], ...] = tuple(
            {}
            if tag <= spec.r
            else {j: -spec.a(tag - spec.r, j) for j in ctx.Jbar if spec.a(tag - spec.r, j)}
            for tag in self.tags
        )
        self.bases = enumerate_bases(template)
        self.rho = exact.choose_rho(self.vecs, variant=rho_variant)
        self.duals = tuple(
            exact.dual_basis([self.vecs[p] for p in basis]) for basis in self.bases
        )
        self.cosets = tuple(
            exact.coset_representatives([self.vecs[p] for p in basis])
            for basis in self.bases
        )
        y_J = tuple(spec.y[j - 1] for j in ctx.J)
        self.pairings = []       # per basis: tuple over basis members
        self.frac_parts = []     # per basis: per coset rep: tuple over members
        for bi, basis in enumerate(self.bases):
            pair = tuple(
                exact.dot(self.rho.coords, self.duals[bi][fi])
                for fi in range(len(basis))
            )
            self.pairings.append(pair)
            rows = []
            for w in self.cosets[bi].representatives:
                point = tuple(y + Fraction(wc) for y, wc in zip(y_J, w))
                rows.append(
                    tuple(
                        exact.fractional_part(
                            exact.dot(point, self.duals[bi][fi]), pair[fi]
                        )
                        for fi in range(len(basis))
                    )
                )
            self.frac_parts.append(rows)
        # complements, L_g data and d_g as linear maps of the outer tuple
        self.complements = tuple(
            tuple(p for p in range(len(template)) if p not in basis)
            for basis in self.bases
        )
        self.l_weights = []   # per basis: {gpos: {var: Fraction}}
        self.l_normal = []    # per basis: {gpos: (primitive tuple, scale)}
        self.d_linear = []    # per basis: {gpos: {j in Jbar: Fraction}}
        for bi, basis in enumerate(self.bases):
            lw, ln, dl = {}, {}, {}
            for gpos in self.complements[bi]:
                gvec = self.vecs[gpos]
                weights = {self.variables[gpos]: Fraction(1)}
                dcoef = dict(
                    (j, Fraction(c)) for j, c in self.dot_coeffs[gpos].items()
                )
                for fi, fpos in enumerate(basis):
                    pairing = exact.dot(gvec, self.duals[bi][fi])
                    if pairing != 0:
                        name = self.variables[fpos]
                        weights[name] = weights.get(name, Fraction(0)) - pairing
                        for j, c in self.dot_coeffs[fpos].items():
                            dcoef[j] = dcoef.get(j, Fraction(0)) - Fraction(c) * pairing
                lw[gpos] = {n: w for n, w in weights.items() if w != 0}
                ln[gpos] = _normalize_linear(lw[gpos], self.variables)
                dl[gpos] = {j: c for j, c in dcoef.items() if c != 0}
            self.l_weights.append(lw)
            self.l_normal.append(ln)
            self.d_linear.append(dl)
        self._narrow_bprods = self._build_bprods(self.caps, self.total_cap)
        self._wide_cache: dict[int, dict] = {}

    def _build_bprods(self, caps, total_cap) -> dict:
        out = {}
        for bi, basis in enumerate(self.bases):
            for wi, cs in enumerate(self.frac_parts[bi]):
                series = mpseries.constant(1.0, self.variables, caps, total_cap)
                for fi, fpos in enumerate(basis):
                    series = mpseries.series_mul(
                        series,
                        mpseries.bernoulli_factor(
                            self.variables, caps, total_cap,
                            self.variables[fpos], cs[fi],
                        ),
                    )
                out[(bi, wi)] = series
        return out

    def member_dots(self, m_outer) -> tuple[Fraction, ...]:
        return tuple(
            sum((Fraction(c * m_outer[j]) for j, c in coeffs.items()), Fraction(0))
            for coeffs in self.dot_coeffs
        )

    def _coset_sum(self, bi, dots, bprods) -> MultiSeries:
        basis = self.bases[bi]
        acc = None
        for wi, cs in enumerate(self.frac_parts[bi]):
            scalar = complex(1.0)
            for fi, fpos in enumerate(basis):
                if dots[fpos] != 0 and cs[fi] != 0:
                    scalar *= unit_phase(-dots[fpos] * cs[fi])
            piece = mpseries.series_scale(bprods[(bi, wi)], scalar)
            acc = piece if acc is None else mpseries.series_add(acc, piece)
        return mpseries.series_scale(acc, 1.0 / self.cosets[bi].group_order)

    def evaluate(self, m_outer=None) -> MultiSeries:
        """G for one outer tuple, truncated to the target caps."""
        m_outer = dict(m_outer or {})
        if set(m_outer) != set(self.ctx.Jbar):
            raise exact.ExactError(
                f"outer tuple must cover Jbar = {self.ctx.Jbar}, got {sorted(m_outer)}"
            )
        dots = self.member_dots(m_outer)
        dvals = {}
        singular = []
        for bi in range(len(self.bases)):
            for gpos in self.complements[bi]:
                d = sum(
                    (c * m_outer[j] for j, c in self.d_linear[bi][gpos].items()),
                    Fraction(0),
                )
                dvals[(bi, gpos)] = d
                if d == 0:
                    singular.append((bi, gpos))
        if not singular:
            return self._assemble_regular(dots, dvals)
        return self._assemble_singular(dots, dvals, set(singular))

    def _assemble_regular(self, dots, dvals) -> MultiSeries:
        total = mpseries.zero(self.variables, self.caps, self.total_cap)
        for bi in range(len(self.bases)):
            term = self._coset_sum(bi, dots, self._narrow_bprods)
            for gpos in self.complements[bi]:
                term = mpseries.series_mul(
                    term,
                    mpseries.rational_factor(
                        self.variables, self.caps, self.total_cap,
                        self.variables[gpos], dvals[(bi, gpos)],
                        self.l_weights[bi][gpos],
                    ),
                )
            total = mpseries.series_add(total, term)
        return total

    def _wide_bprods(self, total_cap) -> dict:
        if total_cap not in self._wide_cache:
            caps = (total_cap,) * len(self.variables)
            self._wide_cache[total_cap] = self._build_bprods(caps, total_cap)
        return self._wide_cache[total_cap]

    def _assemble_singular(self, dots, dvals, singular) -> MultiSeries:
        # multiplicity of each primitive form per basis, and its max overall
        per_basis = []
        max_mult: dict[tuple, int] = {}
        for bi in range(len(self.bases)):
            cnt = Counter(
                self.l_normal[bi][gpos][0]
                for gpos in self.complements[bi]
                if (bi, gpos) in singular
            )
            per_basis.append(cnt)
            for form, mult in cnt.items():
                max_mult[form] = max(max_mult.get(form, 0), mult)
        extra = sum(max_mult.values())
        total_cap = self.total_cap + extra
        caps = (total_cap,) * len(self.variables)
        bprods = self._wide_bprods(total_cap)
        form_series = {
            form: mpseries.linear_form(
                dict(zip(self.variables, map(float, form))), self.variables, caps, total_cap
            )
            for form in max_mult
        }
        numer = mpseries.zero(self.variables, caps, total_cap)
        for bi in range(len(self.bases)):
            term = self._coset_sum(bi, dots, bprods)
            scale = Fraction(1)
            for gpos in self.complements[bi]:
                name = self.variables[gpos]
                if (bi, gpos) in singular:
                    # -t_g/(0 - L) = t_g/(scale * primitive form)
                    term = mpseries.series_mul(
                        term,
                        mpseries.monomial(
                            self.variables, caps,
                            tuple(1 if v == name else 0 for v in self.variables),
                            total_cap=total_cap,
                        ),
                    )
                    scale /= self.l_normal[bi][gpos][1]
                else:
                    term = mpseries.series_mul(
                        term,
                        mpseries.rational_factor(
                            self.variables, caps, total_cap,
                            name, dvals[(bi, gpos)], self.l_weights[bi][gpos],
                        ),
                    )
            if scale != 1:
                term = mpseries.series_scale(term, float(scale))
            for form, mult in max_mult.items():
                for _ in range(mult - per_basis[bi].get(form, 0)):
                    term = mpseries.series_mul(term, form_series[form])
            numer = mpseries.series_add(numer, term)
        threshold = 1e-8 * max(1.0, mpseries.max_abs(numer))
        for form, mult in max_mult.items():
            weights = dict(zip(self.variables, form))
            for _ in range(mult):
                numer, leftover = mpseries.divide_linear(numer, weights)
                if leftover > threshold:
                    raise SingularConfiguration(
                        f"pole along {dict((v, c) for v, c in weights.items() if c)} "
                        f"does not cancel (remainder {leftover:.3e}) for J = {self.ctx.J}"
                    )
        return mpseries.truncated(numer, caps=self.caps, total_cap=self.total_cap)


@dataclass(frozen=True)
class GFAssembly:
    """A fully evaluated G for one subset and one outer tuple."""

    members: tuple[AffineFunctional, ...]
    bases: tuple[tuple[int, ...], ...]
    rho: exact.RhoVector
    variables: tuple[str, ...]
    caps: tuple[int, ...]
    series: MultiSeries


def compute_G(spec: SeriesSpec, J, m_outer=None, rho_variant: int = 0) -> GFAssembly:
    """Build the plan for (spec, J), evaluate one outer tuple, keep context."""
    plan = GeneratingFunctionPlan(spec, J, rho_variant=rho_variant)
    series = plan.evaluate(m_outer)
    members = build_lambda(spec, plan.ctx, m_outer)
    return GFAssembly(
        members=members,
        bases=plan.bases,
        rho=plan.rho,
        variables=plan.variables,
        caps=plan.caps,
        series=series,
    )


def extract_D(assembly: GFAssembly) -> complex:
    """The distribution value: top coefficient times the factorials."""
    raw = mpseries.coefficient(assembly.series, assembly.caps)
    return raw * prod(math.factorial(c) for c in assembly.caps)


def zm_partial_sum(members, exponents, y, M: int) -> complex:
    """Box partial sum of e(<y,n>) / prod f(n)^e over [-M, M]^m, f(n) != 0.

    The limit in M recovers, up to the sign (-1)^|Lambda| and the factorial
    normalization, the same distribution value extract_D reads off G; the
    agreement of the two routes is the empirical check on the coefficient
    machinery.
    """
    m = len(members[0].vec)
    if len(exponents) != len(members):
        raise exact.ExactError("one exponent per member required")
    total = 0.0 + 0.0j
    comp = 0.0 + 0.0j
    for n in itertools.product(range(-M, M + 1), repeat=m):
        vals = [exact.dot(f.vec, n) + f.dot for f in members]
        if any(v == 0 for v in vals):
            continue
        denom = 1.0
        for v, e in zip(vals, exponents):
            denom *= float(v) ** e
        term = unit_phase(exact.dot(y, n)) / denom
        diff = term - comp
        new_total = total + diff
        comp = (new_total - total) - diff
        total = new_total
    return total
