"""
Expression Parser
Operator-precedence parser for polynomial text with line/column diagnostics
"""

import re
from fractions import Fraction
from typing import List, NamedTuple, Optional, Sequence

from multipoly import QQ, SparsePolynomial


class ExpressionSyntaxError(ValueError):
    """Syntax error carrying a 1-based line and column"""

    def __init__(self, message: str, line: int, column: int):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class Token(NamedTuple):
    kind: str
    text: str
    column: int


_TOKEN_RE = re.compile(r"\s*(?:(?P<num>[0-9]+)|(?P<ident>[_A-Za-z][_A-Za-z0-9]*)|(?P<op>[-+*^/()]))")

# binary operators and their precedence; '^' and '/' are handled while reading operands
_operator_precedence = {
    "(": 0,
    "+": 1,
    "-": 1,
    "*": 2,
}


def tokenize(text: str, line: int = 1, column_offset: int = 0) -> List[Token]:
    """Split text into tokens. Columns are 1-based and shifted by `column_offset`."""
    tokens: List[Token] = []
    pos = 0
    stripped_end = len(text.rstrip())
    while pos < stripped_end:
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExpressionSyntaxError(f"unexpected character {text[bad]!r}", line,
                                        column_offset + bad + 1)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append(Token(kind, m.group(kind), column_offset + start + 1))
        pos = m.end()
    tokens.append(Token("end", "", column_offset + stripped_end + 1))
    return tokens


def _identifiers(tokens: Sequence[Token]) -> List[str]:
    return sorted({tok.text for tok in tokens if tok.kind == "ident"})


def parse_polynomial(text: str, variables: Optional[Sequence[str]] = None, domain=QQ,
                     allow_rationals: bool = True, line: int = 1,
                     column_offset: int = 0) -> SparsePolynomial:
    """
    Parse polynomial text into a SparsePolynomial.

    Grammar: expr := ['-'] term (('+'|'-') term)*; term := factor ('*' factor)*;
    factor := atom ('^' posint)*; atom := integer ['/' integer] | name | '(' expr ')'

    Args:
        text: the expression
        variables: ambient variable list (defaults to the sorted names used)
        domain: coefficient domain
        allow_rationals: accept integer/integer literals
        line, column_offset: position of `text` inside a larger document

    Returns:
        The parsed polynomial

    Raises:
        ExpressionSyntaxError: on any syntax error or unknown name
    """
    tokens = tokenize(text, line, column_offset)
    if variables is None:
        variables = _identifiers(tokens)
    variables = tuple(variables)

    operand_stack: List[SparsePolynomial] = []
    operator_stack: List[Token] = []
    last_operator: Optional[Token] = None

    def fail(message: str, column: int):
        raise ExpressionSyntaxError(message, line, column)

    def apply_top():
        op = operator_stack.pop()
        right = operand_stack.pop()
        left = operand_stack.pop()
        if op.text == "+":
            operand_stack.append(left + right)
        elif op.text == "-":
            operand_stack.append(left - right)
        else:
            operand_stack.append(left * right)

    def eval_preceding(precedence: int):
        while operator_stack and operator_stack[-1].text != "(" and \
                _operator_precedence[operator_stack[-1].text] >= precedence:
            apply_top()

    i = 0
    expect_operand = True
    while True:
        tok = tokens[i]
        if expect_operand:
            if tok.kind == "num":
                value = Fraction(int(tok.text))
                if tokens[i + 1].text == "/":
                    slash = tokens[i + 1]
                    if not allow_rationals:
                        fail("non-integer coefficient", slash.column)
                    den = tokens[i + 2]
                    if den.kind != "num":
                        fail("expected an integer denominator", slash.column)
                    if int(den.text) == 0:
                        fail("zero denominator", den.column)
                    value = Fraction(int(tok.text), int(den.text))
                    i += 2
                operand_stack.append(SparsePolynomial.constant(variables, value, domain))
                expect_operand = False
            elif tok.kind == "ident":
                if tok.text not in variables:
                    fail(f"unknown name {tok.text!r}", tok.column)
                operand_stack.append(SparsePolynomial.variable(variables, tok.text, domain))
                expect_operand = False
            elif tok.text == "(":
                operator_stack.append(tok)
            elif tok.text == "-" and (i == 0 or tokens[i - 1].text == "("):
                # leading unary minus reads as 0 - operand
                operand_stack.append(SparsePolynomial.zero(variables, domain))
                operator_stack.append(tok)
                last_operator = tok
            elif tok.kind == "end":
                if last_operator is not None:
                    fail(f"dangling operator {last_operator.text!r}", last_operator.column)
                fail("empty expression", tok.column)
            else:
                fail(f"expected a number, name or '(' but found {tok.text!r}", tok.column)
            i += 1
            continue

        # expecting an operator
        if tok.text == "^":
            exp_tok = tokens[i + 1]
            if exp_tok.kind != "num":
                fail("exponent must be a positive integer", tok.column if exp_tok.kind == "end" else exp_tok.column)
            exponent = int(exp_tok.text)
            if exponent < 1:
                fail("exponent must be a positive integer", exp_tok.column)
            operand_stack[-1] = operand_stack[-1] ** exponent
            i += 2
            continue
        if tok.text in ("+", "-", "*"):
            eval_preceding(_operator_precedence[tok.text])
            operator_stack.append(tok)
            last_operator = tok
            expect_operand = True
            i += 1
            continue
        if tok.text == ")":
            while operator_stack and operator_stack[-1].text != "(":
                apply_top()
            if not operator_stack:
                fail("unmatched ')'", tok.column)
            operator_stack.pop()
            i += 1
            continue
        if tok.kind == "end":
            while operator_stack:
                if operator_stack[-1].text == "(":
                    fail("unclosed '('", operator_stack[-1].column)
                apply_top()
            return operand_stack[0]
        if tok.text == "/":
            fail("division is only allowed inside a rational literal", tok.column)
        fail(f"expected an operator but found {tok.text!r}", tok.column)
