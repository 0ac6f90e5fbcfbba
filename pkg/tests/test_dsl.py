import cmath
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fsis.dsl import (BinaryOp, Call, Constant, DSLEvaluationError, DSLNameError,
                      DSLSyntaxError, GeneratorSpecError, Negate, Number, Variable,
                      evaluate, evaluate_fourier, format_expression, parse_endpoint,
                      parse_expression, parse_generator, read_sampled_fibers)


def test_precedence_and_associativity():
    e = parse_expression("1 - 2 - 3 * w / 4")
    assert e == BinaryOp("-", BinaryOp("-", Number("1"), Number("2")),
                         BinaryOp("/", BinaryOp("*", Number("3"), Variable()), Number("4")))


def test_unary_minus_and_call():
    assert parse_expression("-cos(pi*w)") == Negate(
        Call("cos", BinaryOp("*", Constant("pi"), Variable())))


@pytest.mark.parametrize("text, w, expected", [
    ("cos(2*pi*w)", 0.125, math.cos(math.pi / 4)),
    ("sin(2*pi*w)", 0.3, math.sin(0.6 * math.pi)),
    ("exp(i*pi*w)", 0.5, 1j),
    ("1/2 + w", 1.0, 1.5),
    ("(w - 1) * (w + 1)", 3.0, 8.0),
])
def test_evaluate_against_mpmath(text, w, expected):
    got = evaluate(parse_expression(text), w)
    mp_ref = {
        "cos(2*pi*w)": lambda x: mpmath.cos(2 * mpmath.pi * x),
        "sin(2*pi*w)": lambda x: mpmath.sin(2 * mpmath.pi * x),
        "exp(i*pi*w)": lambda x: mpmath.exp(1j * mpmath.pi * x),
    }.get(text)
    ref = complex(mp_ref(mpmath.mpf(w))) if mp_ref else expected
    assert abs(got - ref) < 1e-14


@pytest.mark.parametrize("text", ["cos(", "1 +", "w w", "()", "1 $ 2", ""])
def test_syntax_errors(text):
    with pytest.raises(DSLSyntaxError):
        parse_expression(text)


def test_unknown_name_reports_position():
    with pytest.raises(DSLNameError) as info:
        parse_expression("1 + tan(w)")
    assert "tan" in str(info.value)


def test_division_by_zero_is_reported_with_frequency():
    e = parse_expression("1 / (w - 1)")
    with pytest.raises(DSLEvaluationError) as info:
        evaluate(e, 1.0)
    assert info.value.xi == 1.0


def test_overflow_is_an_error():
    with pytest.raises(DSLEvaluationError):
        evaluate(parse_expression("exp(1000*w)"), 1.0)


_atoms = st.sampled_from(["w", "pi", "i", "1", "2.5", "0.125"])


@st.composite
def expressions(draw, depth=3):
    if depth == 0 or draw(st.booleans()):
        return draw(_atoms)
    kind = draw(st.sampled_from(["bin", "neg", "call", "paren"]))
    if kind == "bin":
        op = draw(st.sampled_from("+-*/"))
        return f"{draw(expressions(depth - 1))} {op} {draw(expressions(depth - 1))}"
    if kind == "neg":
        return f"-{draw(expressions(depth - 1))}"
    if kind == "call":
        return f"{draw(st.sampled_from(['cos', 'sin', 'exp']))}({draw(expressions(depth - 1))})"
    return f"({draw(expressions(depth - 1))})"


@given(expressions())
def test_format_roundtrip(text):
    e = parse_expression(text)
    assert parse_expression(format_expression(e)) == e


@given(expressions(), st.floats(-3, 3, allow_nan=False))
def test_formatted_expression_evaluates_identically(text, w):
    e = parse_expression(text)
    try:
        a = evaluate(e, w)
    except DSLEvaluationError:
        with pytest.raises(DSLEvaluationError):
            evaluate(parse_expression(format_expression(e)), w)
        return
    assert evaluate(parse_expression(format_expression(e)), w) == a


@pytest.mark.parametrize("raw, expected", [
    ("5/2", Fraction(5, 2)), ("0.125", Fraction(1, 8)), (3, Fraction(3)),
    ("-1/3", Fraction(-1, 3)), (0.5, Fraction(1, 2)),
])
def test_endpoints_are_exact(raw, expected):
    assert parse_endpoint(raw) == expected


@pytest.mark.parametrize("raw", ["inf", "-Infinity", float("inf"), "1/0", "abc",
                                 "0.1234567890123", True])
def test_bad_endpoints(raw):
    with pytest.raises(GeneratorSpecError):
        parse_endpoint(raw)


def test_overlapping_pieces_rejected():
    with pytest.raises(GeneratorSpecError, match="overlapping"):
        parse_generator({"name": "g", "pieces": [
            {"support": ["0", "1"], "expr": "1"}, {"support": ["1/2", "2"], "expr": "w"}]})


def test_reversed_piece_rejected():
    with pytest.raises(GeneratorSpecError):
        parse_generator({"name": "g", "pieces": [{"support": ["1", "0"], "expr": "1"}]})


def test_half_open_membership():
    g = parse_generator({"name": "g", "pieces": [{"support": ["0", "1/2"], "expr": "1"}]})
    assert evaluate_fourier(g, 0.0) == 1
    assert evaluate_fourier(g, 0.5) == 0
    assert evaluate_fourier(g, math.nextafter(0.5, 0)) == 1


def test_example_generator_values():
    g = parse_generator({"name": "phi1", "pieces": [
        {"support": ["0", "1"], "expr": "cos(2*pi*w)"},
        {"support": ["1", "2"], "expr": "sin(2*pi*w)"}]})
    for w in np.linspace(0, 0.99, 17):
        assert abs(evaluate_fourier(g, w) - cmath.cos(2 * math.pi * w)) < 1e-15
        assert abs(evaluate_fourier(g, w + 1) - cmath.sin(2 * math.pi * (w + 1))) < 1e-15


def test_evaluation_error_names_generator():
    g = parse_generator({"name": "bad", "pieces": [{"support": ["0", "2"], "expr": "1/(w-1)"}]})
    with pytest.raises(DSLEvaluationError, match="bad") as info:
        evaluate_fourier(g, 1.0)
    assert info.value.xi == 1.0


def test_sampled_fibers_roundtrip(tmp_path):
    path = tmp_path / "fib.csv"
    rows = ["node,k1,re,im"]
    for node in range(4):
        rows.append(f"{node},0,{node}.5,0")
        rows.append(f"{node},1,0,-1")
    path.write_text("\n".join(rows) + "\n")
    g = parse_generator({"name": "s", "sampled": {"n": 1, "grid": 4, "window": [[0], [1]],
                                                  "file": "fib.csv"}}, tmp_path)
    assert g.n == 1
    np.testing.assert_array_equal(g.body.values[:, 0], [0.5, 1.5, 2.5, 3.5])
    np.testing.assert_array_equal(g.body.values[:, 1], [-1j] * 4)


def test_sampled_fibers_missing_node(tmp_path):
    path = tmp_path / "fib.csv"
    path.write_text("node,k1,k2,re,im\n0,0,0,1,0\n")
    with pytest.raises(GeneratorSpecError, match="not covered"):
        read_sampled_fibers(path, 2, 2, ((0, 0),))


def test_sampled_fibers_index_outside_window(tmp_path):
    path = tmp_path / "fib.csv"
    path.write_text("node,k1,re,im\n0,5,1,0\n")
    with pytest.raises(GeneratorSpecError, match="window"):
        read_sampled_fibers(path, 1, 1, ((0,),))


@settings(max_examples=50)
@given(st.integers(-50, 50), st.integers(1, 60))
def test_rational_endpoint_strings(p, q):
    assert parse_endpoint(f"{p}/{q}") == Fraction(p, q)
