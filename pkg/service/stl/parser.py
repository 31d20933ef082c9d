"""Concrete syntax for the STL fragment.

Grammar (UTF-8 text, whitespace and newlines are insignificant):

    formula := term ("and" term)*
    term    := ("G" | "F") interval atom
             | atom "U" interval atom
             | atom
    interval:= "[" number "," number "]"
    atom    := ["not"] identifier | "true"

A single term parses to the term itself; two or more become a Conjunction.
"""

import re
from dataclasses import dataclass
from typing import List, Mapping, Optional

from common.config.constants import AppConstants
from domain.exceptions import FormulaSyntaxError, IntervalError, UnknownPredicateError
from domain.models.formula import (
    Always,
    Conjunction,
    Eventually,
    Predicate,
    StlFormula,
    TimeInterval,
    TrueFormula,
    Until,
)

_TOKEN_SPEC = [
    ("NUMBER", r"[-+]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?"),
    ("IDENT", r"[A-Za-z_][A-Za-z0-9_]*"),
    ("LBRACK", r"\["),
    ("RBRACK", r"\]"),
    ("COMMA", r","),
    ("NEWLINE", r"\n"),
    ("SKIP", r"[ \t\r]+"),
    ("MISMATCH", r"."),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{name}>{pattern})" for name, pattern in _TOKEN_SPEC))

_KEYWORDS = {
    AppConstants.KEYWORD_AND,
    AppConstants.KEYWORD_NOT,
    AppConstants.KEYWORD_TRUE,
    AppConstants.OPERATOR_ALWAYS,
    AppConstants.OPERATOR_EVENTUALLY,
    AppConstants.OPERATOR_UNTIL,
}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> List[Token]:
    """Split formula text into tokens with 1-based line/column positions."""
    tokens = []
    line, line_start = 1, 0
    for match in _TOKEN_RE.finditer(text):
        kind = match.lastgroup
        column = match.start() - line_start + 1
        if kind == "NEWLINE":
            line += 1
            line_start = match.end()
            continue
        if kind == "SKIP":
            continue
        if kind == "MISMATCH":
            raise FormulaSyntaxError(f"unexpected character {match.group()!r}", line, column)
        if kind == "IDENT" and match.group() in _KEYWORDS:
            kind = match.group()
        tokens.append(Token(kind, match.group(), line, column))
    tokens.append(Token("EOF", "", line, len(text) - line_start + 1))
    return tokens


class _Parser:
    """Recursive-descent parser over a token list."""

    def __init__(self, tokens: List[Token], predicates: Optional[Mapping[str, object]]):
        self.tokens = tokens
        self.position = 0
        self.predicates = predicates

    def peek(self) -> Token:
        return self.tokens[self.position]

    def advance(self) -> Token:
        token = self.tokens[self.position]
        self.position += 1
        return token

    def expect(self, kind: str, what: str) -> Token:
        token = self.peek()
        if token.kind != kind:
            found = token.text or "end of input"
            raise FormulaSyntaxError(f"expected {what}, found {found!r}", token.line, token.column)
        return self.advance()

    def parse(self) -> StlFormula:
        terms = [self.term()]
        while self.peek().kind == AppConstants.KEYWORD_AND:
            self.advance()
            terms.append(self.term())
        self.expect("EOF", "'and' or end of formula")
        if len(terms) == 1:
            return terms[0]
        return Conjunction(tuple(terms))

    def term(self) -> StlFormula:
        token = self.peek()
        if token.kind in (AppConstants.OPERATOR_ALWAYS, AppConstants.OPERATOR_EVENTUALLY):
            self.advance()
            interval = self.interval()
            child = self.atom()
            if token.kind == AppConstants.OPERATOR_ALWAYS:
                return Always(interval, child)
            return Eventually(interval, child)

        left = self.atom()
        if self.peek().kind == AppConstants.OPERATOR_UNTIL:
            self.advance()
            interval = self.interval()
            right = self.atom()
            return Until(interval, left, right)
        return left

    def interval(self) -> TimeInterval:
        opening = self.expect("LBRACK", "'['")
        a = float(self.expect("NUMBER", "interval start").text)
        self.expect("COMMA", "','")
        b = float(self.expect("NUMBER", "interval end").text)
        self.expect("RBRACK", "']'")
        try:
            return TimeInterval(a, b)
        except IntervalError as e:
            raise IntervalError(
                f"line {opening.line}, column {opening.column}: {e}", AppConstants.STAGE_INPUT
            ) from e

    def atom(self) -> StlFormula:
        token = self.peek()
        if token.kind == AppConstants.KEYWORD_TRUE:
            self.advance()
            return TrueFormula()
        negated = False
        if token.kind == AppConstants.KEYWORD_NOT:
            self.advance()
            negated = True
        name = self.expect("IDENT", "predicate name")
        if self.predicates is not None and name.text not in self.predicates:
            raise UnknownPredicateError(
                f"line {name.line}, column {name.column}: unknown predicate {name.text!r}",
                AppConstants.STAGE_INPUT,
            )
        return Predicate(name.text, negated)


def parse_formula(text: str, predicates: Optional[Mapping[str, object]] = None) -> StlFormula:
    """
    Parse formula text.

    Args:
        text: Formula source
        predicates: Name -> predicate table; when given, every referenced
            name must be present

    Returns:
        Formula AST

    Raises:
        FormulaSyntaxError: On grammar violations (with line/column)
        UnknownPredicateError: On names missing from the table
        IntervalError: On a > b or negative bounds
    """
    return _Parser(tokenize(text), predicates).parse()


def _format_number(value: float) -> str:
    return repr(float(value))


def _format_interval(interval: TimeInterval) -> str:
    return f"[{_format_number(interval.a)},{_format_number(interval.b)}]"


def _format_atom(formula: StlFormula) -> str:
    if isinstance(formula, TrueFormula):
        return AppConstants.KEYWORD_TRUE
    if isinstance(formula, Predicate):
        prefix = f"{AppConstants.KEYWORD_NOT} " if formula.negated else ""
        return prefix + formula.name
    raise ValueError(f"{type(formula).__name__} cannot be printed in atom position")


def _format_term(formula: StlFormula) -> str:
    if isinstance(formula, Always):
        return f"{AppConstants.OPERATOR_ALWAYS}{_format_interval(formula.interval)} {_format_atom(formula.child)}"
    if isinstance(formula, Eventually):
        return f"{AppConstants.OPERATOR_EVENTUALLY}{_format_interval(formula.interval)} {_format_atom(formula.child)}"
    if isinstance(formula, Until):
        return (
            f"{_format_atom(formula.left)} {AppConstants.OPERATOR_UNTIL}"
            f"{_format_interval(formula.interval)} {_format_atom(formula.right)}"
        )
    return _format_atom(formula)


def format_formula(formula: StlFormula) -> str:
    """
    Print a formula in the concrete grammar.

    Raises:
        ValueError: For nestings the grammar cannot express (for example a
            conjunction under a temporal operator)
    """
    if isinstance(formula, Conjunction):
        if not formula.children:
            raise ValueError("empty conjunction cannot be printed")
        return f" {AppConstants.KEYWORD_AND} ".join(_format_term(child) for child in formula.children)
    return _format_term(formula)
