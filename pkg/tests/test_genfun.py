"""Generating-function layer: the family Lambda, bases, G, D, and box sums."""

import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

import helpers
from mdzeta import exact, genfun, model, mpseries, mtoracle
from mdzeta.genfun import AffineFunctional, _normalize_linear

MT = model.parse_spec({"h": [1, 1], "k": [1], "y": ["0", "0"], "A": [[1, 1]]})


def _family(*vecs):
    return tuple(
        AffineFunctional(tag=i + 1, vec=v, dot=Fraction(0))
        for i, v in enumerate(vecs)
    )


def test_build_lambda_full_subset():
    ctx = model.subset_context(MT, (1, 2))
    members = genfun.build_lambda(MT, ctx, {})
    assert tuple(f.tag for f in members) == (1, 2, 3)
    assert tuple(f.vec for f in members) == ((1, 0), (0, 1), (1, 1))
    assert all(f.dot == 0 for f in members)


def test_build_lambda_freezes_outer_variables():
    ctx = model.subset_context(MT, (1,))
    members = genfun.build_lambda(MT, ctx, {2: 5})
    assert tuple(f.tag for f in members) == (1, 3)
    assert tuple(f.vec for f in members) == ((1,), (1,))
    assert tuple(f.dot for f in members) == (0, -5)
    assert isinstance(members[1].dot, Fraction)


def test_build_lambda_drops_forms_outside_subset():
    spec = model.parse_spec(
        {"h": [1, 1], "k": [1, 1], "y": ["0", "0"], "A": [[1, 0], [0, 1]]}
    )
    ctx = model.subset_context(spec, (1,))
    assert ctx.I == (1,)
    members = genfun.build_lambda(spec, ctx, {2: 3})
    # row 2 has no support on J = {1}; only m_1 and form 1 survive
    assert tuple(f.tag for f in members) == (1, 3)
    assert members[1].dot == 0


def test_build_lambda_outer_tuple_must_cover_complement():
    ctx = model.subset_context(MT, (1,))
    with pytest.raises(exact.ExactError):
        genfun.build_lambda(MT, ctx, {})
    with pytest.raises(exact.ExactError):
        genfun.build_lambda(MT, ctx, {1: 1, 2: 2})


def test_enumerate_bases_lists_independent_tuples_lex():
    assert genfun.enumerate_bases(_family((1, 0), (0, 1), (1, 1))) == (
        (0, 1),
        (0, 2),
        (1, 2),
    )
    # parallel vectors never form a basis together
    assert genfun.enumerate_bases(_family((1, 0), (0, 1), (2, 0))) == ((0, 1), (1, 2))
    assert genfun.enumerate_bases(_family((1,), (1,))) == ((0,), (1,))


def test_enumerate_bases_requires_spanning_family():
    with pytest.raises(exact.RankDeficient):
        genfun.enumerate_bases(_family((1, 1), (2, 2)))


def test_normalize_linear_examples():
    prim, scale = _normalize_linear(
        {"a": Fraction(-2, 3), "c": Fraction(4, 3)}, ("a", "b", "c")
    )
    assert prim == (1, 0, -2)
    assert scale == Fraction(-2, 3)
    prim, scale = _normalize_linear({"b": Fraction(5)}, ("a", "b"))
    assert (prim, scale) == ((0, 1), 5)


_NAMES = ("u", "v", "w")


@given(
    st.lists(
        st.tuples(
            st.sampled_from(_NAMES),
            st.fractions(min_value=-5, max_value=5, max_denominator=6),
        ),
        min_size=1,
        max_size=3,
        unique_by=lambda t: t[0],
    ).filter(lambda ws: any(w != 0 for _, w in ws))
)
def test_normalize_linear_recombines_exactly(ws):
    weights = {n: w for n, w in ws if w != 0}
    prim, scale = _normalize_linear(weights, _NAMES)
    assert math.gcd(*(abs(c) for c in prim)) == 1
    assert next(c for c in prim if c != 0) > 0
    for name, c in zip(_NAMES, prim):
        assert c * scale == weights.get(name, 0)


def test_plan_matches_closed_form_on_regular_path():
    plan = genfun.GeneratingFunctionPlan(MT, (1,))
    for m2 in (1, 2, 5):
        series = plan.evaluate({2: m2})
        oracle = mtoracle.mt_closed_form_G(MT, (1,), {2: m2})
        assert helpers.series_max_diff(series, oracle) <= 1e-12


def test_plan_matches_closed_form_on_singular_path():
    series = genfun.compute_G(MT, (1, 2)).series
    oracle = mtoracle.mt_closed_form_G(MT, (1, 2))
    assert helpers.series_max_diff(series, oracle) <= 1e-12


def test_assembly_fields_cohere():
    asm = genfun.compute_G(MT, (1,), {2: 2})
    assert genfun.variable_name(3) == "t3"
    assert asm.variables == ("t1", "t3")
    assert asm.caps == (1, 1)
    assert asm.series.variables == asm.variables
    assert asm.series.caps == asm.caps
    assert asm.bases == ((0,), (1,))
    assert asm.rho.coords == (1,)
    ctx = model.subset_context(MT, (1,))
    assert asm.members == genfun.build_lambda(MT, ctx, {2: 2})


def test_extract_d_reads_top_coefficient_times_factorials():
    # non-unimodular form: the value is averaged over two cosets
    spec = model.parse_spec({"h": [2], "k": [2], "y": ["0"], "A": [[2]]})
    asm = genfun.compute_G(spec, (1,))
    raw = mpseries.coefficient(asm.series, (2, 2))
    assert genfun.extract_D(asm) == raw * 4
    assert abs(raw - math.pi**4 / 180) <= 1e-12


def test_rho_variants_give_identical_series():
    spec = model.parse_spec(
        {"h": [1, 1], "k": [1, 1, 1], "y": ["0", "0"], "A": [[1, 0], [0, 1], [1, 1]]}
    )
    coords, series = [], []
    for variant in range(3):
        asm = genfun.compute_G(spec, (1, 2), rho_variant=variant)
        coords.append(asm.rho.coords)
        series.append(asm.series)
    assert len(set(coords)) == 3
    assert mpseries.max_abs(series[0]) > 1
    for other in series[1:]:
        assert helpers.series_max_diff(series[0], other) <= 1e-10


def test_zm_partial_sum_skips_zeros_of_members():
    members = _family((1,))
    assert genfun.zm_partial_sum(members, (2,), (Fraction(0),), 1) == 2.0
    with pytest.raises(exact.ExactError):
        genfun.zm_partial_sum(members, (2, 2), (Fraction(0),), 1)


def test_zm_partial_sum_applies_the_twist():
    members = _family((1,))
    zm = genfun.zm_partial_sum(members, (2,), (Fraction(1, 2),), 200)
    assert abs(zm - (-math.pi**2 / 6)) < 1e-3


def test_zm_partial_sum_approaches_top_coefficient():
    asm = genfun.compute_G(MT, (1,), {2: 5})
    raw = mpseries.coefficient(asm.series, asm.caps)
    gaps = [
        abs(genfun.zm_partial_sum(asm.members, (1, 1), (Fraction(0),), M) - raw)
        for M in (100, 400)
    ]
    assert gaps[1] < gaps[0]
    assert gaps[1] < 1e-2
