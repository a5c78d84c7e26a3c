from fractions import Fraction

import pytest

from expression_parser import ExpressionSyntaxError, parse_polynomial, tokenize
from multipoly import PrimeField, polynomial_ring


def test_precedence_and_powers():
    x, y = polynomial_ring("x y")
    assert parse_polynomial("x + 2*y^2*x", ["x", "y"]) == x + 2 * y ** 2 * x
    assert parse_polynomial("(x + y)^2", ["x", "y"]) == (x + y) ** 2
    assert parse_polynomial("x - y - 1", ["x", "y"]) == x - y - 1


def test_leading_unary_minus_binds_looser_than_power():
    (x,) = polynomial_ring("x")
    assert parse_polynomial("-x^2", ["x"]) == -(x ** 2)
    assert parse_polynomial("2*(-x + 1)", ["x"]) == 2 - 2 * x


def test_variables_default_to_sorted_names():
    f = parse_polynomial("z*a + 1")
    assert f.variables == ("a", "z")


def test_rational_literals():
    (x,) = polynomial_ring("x")
    assert parse_polynomial("1/2*x", ["x"]) == x.scale(Fraction(1, 2))
    with pytest.raises(ExpressionSyntaxError) as exc:
        parse_polynomial("1/2*x", ["x"], allow_rationals=False)
    assert exc.value.column == 2


def test_prime_field_domain():
    f = parse_polynomial("x + 8", ["x"], domain=PrimeField(7))
    assert f.constant_value() == 1


def test_tokenize_columns_respect_offset():
    tokens = tokenize("t - 1", line=3, column_offset=10)
    assert [(tok.kind, tok.column) for tok in tokens] == [("ident", 11), ("op", 13), ("num", 15), ("end", 16)]


@pytest.mark.parametrize("text, column, fragment", [
    ("t-", 2, "dangling operator"),
    ("t + ", 3, "dangling operator"),
    ("t $ 1", 3, "unexpected character"),
    ("(t + 1", 1, "unclosed"),
    ("t + 1)", 6, "unmatched"),
    ("t^0", 3, "exponent"),
    ("1/0", 3, "zero denominator"),
    ("s + 1", 1, "unknown name"),
    ("t/2", 2, "division"),
    ("", 1, "empty expression"),
])
def test_syntax_errors_point_at_the_offending_column(text, column, fragment):
    with pytest.raises(ExpressionSyntaxError) as exc:
        parse_polynomial(text, ["t"], line=4)
    assert exc.value.line == 4
    assert exc.value.column == column
    assert fragment in exc.value.message


def test_syntax_error_is_a_value_error():
    with pytest.raises(ValueError, match="line 1, column 3"):
        parse_polynomial("x *", ["x"])
