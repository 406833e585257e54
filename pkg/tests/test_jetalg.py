import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contactlax.jetalg import (
    ONE,
    CoverageError,
    DiffPoly,
    FieldId,
    JetQuotient,
    JetVariable,
    PoleError,
    StructureError,
    WAVE,
    divide_exact,
    evaluate,
    eval_tree,
    from_tree,
    independent,
    jet,
    normalize,
    primitive,
    substitute,
    to_tree,
    total_derivative,
)
from conftest import FIELD_NAMES, random_tree

V = FieldId("v")
W = FieldId("w")
v, w = jet(V), jet(W)
vx = jet(V, (1, 0, 0, 0))


def tree_nodes():
    leaf = st.one_of(
        st.fractions(min_value=-5, max_value=5, max_denominator=6).map(
            lambda f: {"op": "num", "value": str(f)}
        ),
        st.tuples(
            st.sampled_from(FIELD_NAMES),
            st.lists(st.integers(0, 2), min_size=4, max_size=4),
        ).map(lambda t: {"op": "jet", "field": t[0], "d": t[1]}),
    )
    return st.recursive(
        leaf,
        lambda ch: st.one_of(
            st.lists(ch, min_size=2, max_size=3).map(lambda a: {"op": "add", "args": a}),
            st.lists(ch, min_size=2, max_size=3).map(lambda a: {"op": "mul", "args": a}),
            st.tuples(ch, st.integers(0, 3)).map(lambda t: {"op": "pow", "base": t[0], "exp": t[1]}),
        ),
        max_leaves=10,
    )


def test_normalize_commutativity():
    assert v * w + w * v == 2 * (v * w)


def test_normalize_cancellation():
    assert (v - v).is_zero()
    assert normalize({"op": "add", "args": [to_tree(v), to_tree(-v)]}).is_zero()


def test_normalize_expansion():
    assert (v + w) ** 2 == v * v + 2 * v * w + w * w


def test_normalize_rejects_malformed():
    with pytest.raises(StructureError):
        from_tree({"op": "pow", "base": to_tree(v), "exp": -1})
    with pytest.raises(StructureError):
        from_tree({"op": "frobnicate"})
    with pytest.raises(StructureError):
        from_tree({"not": "a node"})


@given(tree_nodes())
@settings(max_examples=200, deadline=None)
def test_normalize_idempotent(t):
    e = from_tree(t)
    assert from_tree(to_tree(e)) == e


def test_total_derivative_jet_bump():
    assert total_derivative(v, "x") == vx


def test_total_derivative_leibniz_example():
    assert total_derivative(v * w, "x") == vx * w + v * jet(W, (1, 0, 0, 0))


def test_mixed_partials_example():
    a = jet(FieldId("a"))
    once = total_derivative(total_derivative(a, "x"), "y")
    other = total_derivative(total_derivative(a, "y"), "x")
    assert once == other == jet(FieldId("a"), (1, 1, 0, 0))


@given(tree_nodes(), st.sampled_from("xyzt"), st.sampled_from("xyzt"))
@settings(max_examples=150, deadline=None)
def test_total_derivatives_commute(t, d1, d2):
    e = from_tree(t)
    assert total_derivative(total_derivative(e, d1), d2) == total_derivative(
        total_derivative(e, d2), d1
    )


@given(tree_nodes(), tree_nodes(), st.sampled_from("xyzt"))
@settings(max_examples=150, deadline=None)
def test_leibniz(t1, t2, d):
    e1, e2 = from_tree(t1), from_tree(t2)
    assert total_derivative(e1 * e2, d) == total_derivative(e1, d) * e2 + e1 * total_derivative(e2, d)


def test_substitute_direct_replacement():
    q = FieldId("q")
    qy, qz = jet(q, (0, 1, 0, 0)), jet(q, (0, 0, 1, 0))
    out = substitute(v * qz, {JetVariable(V): JetQuotient(qy, qz)})
    assert out == JetQuotient(qy)


def test_substitute_prolonged_rule():
    psi = FieldId("psi", WAVE)
    rule = {JetVariable(psi, (0, 1, 0, 0)): JetQuotient(jet(psi, (0, 0, 1, 0)) * v)}
    out = substitute(jet(psi, (1, 1, 0, 0)), rule, prolong=True)
    hand = jet(psi, (1, 0, 1, 0)) * v + jet(psi, (0, 0, 1, 0)) * vx
    assert out == JetQuotient(hand)


def test_substitute_identity():
    e = v * w + 3 * v
    assert substitute(e, {}) == JetQuotient(e)


def test_substitute_coverage_error_without_prolong():
    psi = FieldId("psi", WAVE)
    rule = {JetVariable(psi, (0, 1, 0, 0)): JetQuotient(v)}
    with pytest.raises(CoverageError):
        substitute(jet(psi, (1, 1, 0, 0)), rule, prolong=False)


def test_substitute_leaves_lower_jets_alone():
    psi = FieldId("psi", WAVE)
    rule = {JetVariable(psi, (0, 1, 0, 0)): JetQuotient(v)}
    e = jet(psi, (1, 0, 0, 0)) * jet(psi, (0, 1, 0, 0))
    assert substitute(e, rule) == JetQuotient(jet(psi, (1, 0, 0, 0)) * v)


def test_eval_examples():
    pt = {JetVariable(V): Fraction(2), JetVariable(W): Fraction(3)}
    assert evaluate(v * w, pt) == 6
    pt2 = {JetVariable(V): Fraction(2), JetVariable(V, (1, 0, 0, 0)): Fraction(5)}
    assert evaluate(total_derivative(v ** 2, "x"), pt2) == 20


def test_eval_errors():
    with pytest.raises(CoverageError):
        evaluate(v, {})
    with pytest.raises(PoleError):
        evaluate(JetQuotient(v, w), {JetVariable(V): Fraction(1), JetVariable(W): Fraction(0)})


def test_eval_of_normalized_matches_tree_oracle():
    rng = random.Random(99)
    for _ in range(100):
        t = random_tree(rng)
        e = from_tree(t)
        pt_raw = {}
        for jv in e.jet_variables():
            pt_raw[(jv.field.name, jv.d)] = Fraction(rng.randint(-5, 5), rng.randint(1, 4))

        def fill(node):
            if node["op"] == "jet":
                key = (node["field"], tuple(node["d"]))
                pt_raw.setdefault(key, Fraction(rng.randint(-5, 5), rng.randint(1, 4)))
            for ch in node.get("args", []):
                fill(ch)
            if "base" in node:
                fill(node["base"])

        fill(t)
        pt = {JetVariable(FieldId(nm), d): val for (nm, d), val in pt_raw.items()}
        assert evaluate(e, pt) == eval_tree(t, pt_raw)


def test_zero_iff_eval_zero_cross_oracle():
    rng = random.Random(1234)
    for _ in range(60):
        t = random_tree(rng)
        e = from_tree(t)
        results = []
        for _ in range(20):
            pt = {}
            for jv in e.jet_variables() or []:
                pt[jv] = Fraction(rng.randint(-100, 100), rng.randint(1, 100))
            results.append(evaluate(e, pt))
        if e.is_zero():
            assert all(r == 0 for r in results)
        else:
            assert any(r != 0 for r in results)


@given(tree_nodes())
@settings(max_examples=150, deadline=None)
def test_json_roundtrip_bit_exact(t):
    import json

    e = from_tree(t)
    emitted = to_tree(e)
    again = to_tree(from_tree(emitted))
    assert json.dumps(emitted) == json.dumps(again)
    assert from_tree(emitted) == e


def test_independent_variables():
    z, t = independent("z"), independent("t")
    assert total_derivative(z, "z") == ONE
    assert total_derivative(z, "t").is_zero()
    assert total_derivative(z * t, "t") == z


def test_quotient_collapses_when_divisible():
    q = JetQuotient(w * w - v * v, w - v)
    assert q.den == ONE
    assert q.num == w + v


def test_quotient_monomial_content():
    q = FieldId("q")
    qy, qz = jet(q, (0, 1, 0, 0)), jet(q, (0, 0, 1, 0))
    assert JetQuotient(qy * qz, qz * qz) == JetQuotient(qy, qz)


def test_quotient_equality_cross_multiplies():
    a = FieldId("a")
    lhs = JetQuotient((v + w) * (jet(a) + w), (v - w) * (jet(a) + w))
    rhs = JetQuotient(v + w, v - w)
    assert lhs == rhs


def test_divide_exact():
    assert divide_exact((v + w) * (v - w), v - w) == v + w
    assert divide_exact(v * v + w, v - w) is None


def test_primitive_strips_content_and_sign():
    e = -6 * v * v * w - 4 * v * w * w
    prim, scale, mono = e and primitive(e)
    assert prim == 3 * v + 2 * w
    assert scale == -2
    assert DiffPoly({mono: 1}) == v * w
