from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lierealize.catalog import load_catalog
from lierealize.parser import ParseError, parse_expr, parse_field, parse_field_list, tokenize
from lierealize.symexpr import Expr


def kinds(text):
    return [t.kind for t in tokenize(text) if t.kind != "end"]


def test_maximal_munch_variable():
    toks = tokenize("x12")
    assert [(t.kind, t.lexeme) for t in toks[:-1]] == [("ident", "x12")]


def test_function_power_tokens():
    assert kinds("sin(x1)^2") == ["funcname", "paren", "ident", "paren", "op", "number"]


def test_token_positions_increase():
    toks = tokenize("x1 + 3/4*sin(x2)^2")
    pos = [t.pos for t in toks]
    assert pos == sorted(pos) and len(set(pos)) == len(pos)


def test_illegal_character_position():
    with pytest.raises(ParseError) as err:
        tokenize("x1 $ x2")
    assert err.value.diagnostic.position == 3
    assert err.value.diagnostic.column == 4


def test_precedence():
    x1, x2 = Expr.var(1), Expr.var(2)
    assert parse_expr("-x1^2") == -(x1**2)
    assert parse_expr("x1 + x2*x1") == x1 + x2 * x1
    assert parse_expr("2*x1^2^2") == 2 * x1**4
    assert parse_expr("(x1 + x2)^2") == (x1 + x2) ** 2
    assert parse_expr("sec(x2)^2 - tan(x2)^2") == Expr.const(1)


def test_rational_literals():
    assert parse_expr("3/4*x1") == Expr.var(1) * Expr.const(Fraction(3, 4))


@pytest.mark.parametrize("text", [
    "x1/x2", "sin(x1 + x2)", "sin x1", "x1^x2", "x1^-1", "x0", "2x1", "x1 +", "((x1)", "foo(x1)", "",
    "d1", "x1^1.5",
])
def test_bad_expressions(text):
    with pytest.raises(ParseError):
        parse_expr(text)


def test_variable_bound():
    with pytest.raises(ParseError) as err:
        parse_expr("x3", 2)
    assert "x3" in str(err.value)


def test_field_components_accumulate():
    X = parse_field("x2*d1 + x1*d2 + d1", 2)
    assert X.coeffs[0].as_expr() == Expr.var(2) + 1
    assert X.coeffs[1].as_expr() == Expr.var(1)


def test_field_with_separators():
    X = parse_field("x2*d1; (1 + x1)*d2")
    assert X.n == 2


@pytest.mark.parametrize("text", ["d1*d2", "x1 + d1", "d1^2", "x1*d1;", "x2*d1;; d2", "x1"])
def test_bad_fields(text):
    with pytest.raises(ParseError):
        parse_field(text)


def test_empty_component_diagnostic():
    with pytest.raises(ParseError) as err:
        parse_field("x2*d1;; d2")
    assert "empty component" in str(err.value)


def test_single_d1():
    [X] = parse_field_list("d1")
    assert X.n == 1


def test_so3_second_realization_lines():
    text = (
        "-sin(x1)*tan(x2)*d1 - cos(x1)*d2 + sin(x1)*sec(x2)*d3\n"
        "# comment\n"
        "\n"
        "-cos(x1)*tan(x2)*d1 + sin(x1)*d2 + cos(x1)*sec(x2)*d3\n"
        "d1\n"
    )
    fields = parse_field_list(text)
    assert len(fields) == 3 and all(f.n == 3 for f in fields)


def test_field_list_reports_line():
    with pytest.raises(ParseError) as err:
        parse_field_list("d1\nx1*d2 +\n")
    assert err.value.diagnostic.line == 2


def test_oversized_literals_are_diagnosed():
    with pytest.raises(ParseError):
        parse_expr("1" * 5000)
    with pytest.raises(ParseError):
        parse_expr("x" + "9" * 5000)
    with pytest.raises(ParseError):
        parse_expr("x1^100000")


def test_catalog_round_trip():
    for entry in load_catalog():
        for assignment in entry.param_assignments() or [{}]:
            for X in entry.instantiate(entry.n_min, assignment):
                assert parse_field(str(X), X.n) == X


@given(st.text(max_size=40))
@settings(max_examples=400, deadline=None)
def test_fuzz_text_never_crashes(text):
    for parse in (parse_expr, parse_field, parse_field_list):
        try:
            parse(text)
        except ParseError:
            pass


@given(st.text(alphabet="x0123456789dsinco()+-*/^;. \n", max_size=30))
@settings(max_examples=400, deadline=None)
def test_fuzz_grammar_alphabet(text):
    for parse in (parse_expr, parse_field, parse_field_list):
        try:
            parse(text)
        except ParseError:
            pass


@given(st.binary(max_size=40))
@settings(max_examples=200, deadline=None)
def test_fuzz_bytes(data):
    text = data.decode("utf-8", errors="replace")
    try:
        parse_field_list(text)
    except ParseError:
        pass
