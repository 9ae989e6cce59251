import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from isoblock import expr
from isoblock.errors import DomainError, ParseError
from isoblock.expr import BinOp, Call, Neg, Num, Pow, Var, UnknownIdentifierError

NAMES = ["x", "y", "z"]


def trees(max_leaves=12):
    leaf = st.one_of(
        st.integers(0, 2).map(lambda i: Var(i, NAMES[i])),
        st.floats(0, 100, allow_nan=False).map(Num),
        st.sampled_from(["a", "b"]).map(lambda p: Num({"a": 2.5, "b": -1.0}[p], p)),
    )

    def extend(children):
        return st.one_of(
            st.builds(Neg, children),
            st.builds(BinOp, st.sampled_from("+-*/"), children, children),
            st.builds(Pow, children, st.integers(-3, 4)),
            st.builds(Call, st.sampled_from(expr.FUNCTIONS), children),
        )

    return st.recursive(leaf, extend, max_leaves=max_leaves)


@given(trees())
def test_print_parse_round_trip(tree):
    text = expr.to_source(tree)
    (back,) = expr.parse_expressions(text, 3, {"a": 2.5, "b": -1.0})
    assert back == tree


@given(trees(), st.lists(st.floats(-3, 3), min_size=3, max_size=3))
def test_compiled_matches_tree_walker(tree, point):
    f = expr.compile_node(tree)
    try:
        ref = expr.evaluate(tree, point)
    except (DomainError, OverflowError, ZeroDivisionError):
        return
    with np.errstate(all="ignore"):
        try:
            got = f(point)
        except DomainError:
            pytest.fail("compiled evaluator rejected a point the tree walker accepted")
    if math.isfinite(ref):
        assert got == pytest.approx(ref, rel=1e-12, abs=1e-12)


def test_precedence_and_associativity():
    (t,) = expr.parse_expressions("-x^2", 2)
    assert t == Neg(Pow(Var(0, "x"), 2))
    (t,) = expr.parse_expressions("x - y - 1", 2)
    assert expr.evaluate(t, [5.0, 2.0]) == 2.0
    (t,) = expr.parse_expressions("x / y / 2", 2)
    assert expr.evaluate(t, [8.0, 2.0]) == 2.0
    (t,) = expr.parse_expressions("x^(-1)", 2)
    assert t == Pow(Var(0, "x"), -1)


def test_indexed_and_short_coordinate_names():
    a = expr.parse_expressions("x1*x2, x3", 3)
    b = expr.parse_expressions("x*y, z", 3)
    assert [expr.evaluate(t, [2, 3, 4]) for t in a] == [expr.evaluate(t, [2, 3, 4]) for t in b]
    with pytest.raises(UnknownIdentifierError):
        expr.parse_expressions("x, w", 2)
    with pytest.raises(UnknownIdentifierError):
        expr.parse_expressions("x1, x5", 4)  # x5 is outside n = 4


@pytest.mark.parametrize("source, where", [
    ("x +", 3), ("x * (y", 6), ("x ^ y", 4), ("x ^ 1.5", 4), ("sin x", 4), ("x $ y", 2), ("q*(", 3),
])
def test_syntax_errors_carry_position(source, where):
    with pytest.raises(ParseError) as info:
        expr.parse_expressions(source, 2)
    assert info.value.position == where
    assert "^" in str(info.value)


def test_unknown_identifier_reported_after_syntax():
    with pytest.raises(UnknownIdentifierError) as info:
        expr.parse_expressions("x + q", 2)
    assert "q" in str(info.value)


@pytest.mark.parametrize("source, point, fragment", [
    ("1/x", [0.0, 1.0], "x"), ("sqrt(x - 2)", [1.0, 0.0], "sqrt"), ("(x - y)^(-2)", [1.0, 1.0], "x - y"),
])
def test_domain_errors_name_the_subexpression(source, point, fragment):
    (t,) = expr.parse_expressions(source, 2)
    with pytest.raises(DomainError) as info:
        expr.compile_node(t)(point)
    assert fragment in str(info.value)


def test_evaluation_is_pure():
    (t,) = expr.parse_expressions("sin(x) * exp(y) + x^3", 2)
    f = expr.compile_node(t)
    pts = np.random.default_rng(0).normal(size=(2, 50))
    first = f(pts.copy())
    again = f(pts.copy())
    np.testing.assert_array_equal(first, again)
    assert t == expr.parse_expressions("sin(x) * exp(y) + x^3", 2)[0]
