import string

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from expr_corpus import ENV, INVALID, NAMES, VALID, python_oracle
from phmlab.expr import BinOp, Call, ExprError, Neg, Num, Pow, Var, evaluate, free_names, parse_expression, to_text
from phmlab.jetcalc import PRIMITIVES, Jet2


@pytest.mark.parametrize("text", VALID)
def test_valid_corpus_matches_python(text):
    node = parse_expression(text, NAMES)
    assert evaluate(node, ENV) == pytest.approx(python_oracle(text), rel=1e-14, abs=1e-15)


@pytest.mark.parametrize("text,kind", INVALID)
def test_invalid_corpus_rejected(text, kind):
    with pytest.raises(ExprError) as ei:
        parse_expression(text, NAMES)
    assert ei.value.kind == kind
    assert 0 <= ei.value.offset <= len(text.encode())


@pytest.mark.parametrize("text", VALID)
def test_round_trip_fixed_point(text):
    node = parse_expression(text, NAMES)
    again = parse_expression(to_text(node), NAMES)
    assert again == node
    assert to_text(again) == to_text(node)


def test_exp_closed_form():
    node = parse_expression("exp(2*t)", ["t"])
    j = evaluate(node, {"t": Jet2.variable(np.array([0.0]), 0, 1)})
    assert j.val[0] == 1.0
    assert j.grad[0, 0] == 2.0
    assert j.hess[0, 0, 0] == 4.0


def test_unknown_identifier_names_it():
    with pytest.raises(ExprError) as ei:
        parse_expression("1/2*(dzish)", ["x"])
    assert ei.value.kind == "unknown identifier"
    assert ei.value.name == "dzish"
    assert ei.value.offset == 5


def test_unary_minus_below_power():
    assert parse_expression("-x^2", ["x"]) == Neg(Pow(Var("x"), 2))
    assert parse_expression("x-y-t", ["x", "y", "t"]) == BinOp("-", BinOp("-", Var("x"), Var("y")), Var("t"))


def test_byte_offsets_count_utf8():
    with pytest.raises(ExprError) as ei:
        parse_expression("x + é", ["x"])
    assert ei.value.offset == 4


def test_free_names():
    assert free_names(parse_expression("a*sin(x)+y^2", NAMES)) == {"a", "x", "y"}


def test_division_by_zero_constant():
    with pytest.raises(ZeroDivisionError):
        evaluate(parse_expression("x/(y-y)", NAMES), ENV)


# -- properties -------------------------------------------------------------

_leaf = st.one_of(
    st.floats(min_value=0, max_value=1e6, allow_nan=False, allow_infinity=False).map(Num),
    st.sampled_from(NAMES).map(Var),
)


def _grow(children):
    return st.one_of(
        children.map(Neg),
        st.tuples(st.sampled_from("+-*/"), children, children).map(lambda t: BinOp(*t)),
        st.tuples(children, st.integers(-4, 4)).map(lambda t: Pow(*t)),
        st.tuples(st.sampled_from(sorted(PRIMITIVES)), children).map(lambda t: Call(*t)),
    )


asts = st.recursive(_leaf, _grow, max_leaves=12)


@given(asts)
@settings(max_examples=300, deadline=None)
def test_print_parse_fixed_point(node):
    assert parse_expression(to_text(node), NAMES) == node


@given(asts)
@settings(max_examples=200, deadline=None)
def test_jet_value_slot_matches_plain(node):
    x = np.array([0.3, 0.61, 1.7])
    plain_env = {n: x + i * 0.1 for i, n in enumerate(NAMES)}
    jet_env = {n: Jet2.variable(plain_env[n], i, len(NAMES)) for i, n in enumerate(NAMES)}
    with np.errstate(all="ignore"):
        try:
            plain = np.asarray(evaluate(node, plain_env), dtype=float)
        except (ArithmeticError, ValueError):
            return
        jet = evaluate(node, jet_env)
    jv = jet.val if isinstance(jet, Jet2) else np.asarray(jet, dtype=float)
    np.testing.assert_array_equal(np.broadcast_to(jv, plain.shape), plain)


@given(st.text(alphabet=string.printable + "éπ", max_size=40))
@settings(max_examples=400, deadline=None)
def test_parser_total(text):
    try:
        parse_expression(text, NAMES)
    except ExprError as e:
        assert 0 <= e.offset <= len(text.encode())
