"""Abstract syntax, concrete grammar, and gradations for graded modal logic.

Grammar (whitespace insensitive, parentheses required around binary
connectives)::

    f ::= "true" | "false" | IDENT
        | "!" f
        | "(" f "&" f ")" | "(" f "|" f ")"
        | "<" IDENT ":" INT ">" f        -- at least INT successors satisfy f
        | "[" IDENT ":" INT "]" f        -- box; parser sugar, see below

    IDENT = [A-Za-z][A-Za-z0-9_]*

``[a:k] f`` desugars to ``!<a:k> !f``; the core AST and the printer know
only the diamond form, so depth/rank/model-checking definitions stay
single-sourced.  Grades start at 1.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ParseError


class Formula:
    """Base class for graded modal formulas."""

    __slots__ = ()


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Bot(Formula):
    pass


@dataclass(frozen=True)
class Prop(Formula):
    name: str


@dataclass(frozen=True)
class Not(Formula):
    child: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Diamond(Formula):
    """At least ``grade`` distinct ``agent``-successors satisfy ``child``."""

    agent: str
    grade: int
    child: Formula

    def __post_init__(self):
        if self.grade < 1:
            raise ValueError(f"grade must be at least 1, got {self.grade}")


TOP = Top()
BOT = Bot()


def box(agent: str, grade: int, child: Formula) -> Formula:
    """The dual modality, in its desugared core form."""
    return Not(Diamond(agent, grade, Not(child)))


def and_all(formulas: list[Formula]) -> Formula:
    """Left-nested conjunction; empty input yields ``true``."""
    if not formulas:
        return TOP
    acc = formulas[0]
    for f in formulas[1:]:
        acc = And(acc, f)
    return acc


def or_all(formulas: list[Formula]) -> Formula:
    """Left-nested disjunction; empty input yields ``false``."""
    if not formulas:
        return BOT
    acc = formulas[0]
    for f in formulas[1:]:
        acc = Or(acc, f)
    return acc


_TOKEN = re.compile(r"\s*(?:([A-Za-z][A-Za-z0-9_]*)|(\d+)|([()&|!<>:\[\]]))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if match is None:
            rest = text[pos:].lstrip()
            if not rest:
                break
            raise ParseError(f"unexpected character {rest[0]!r}", column=pos + 1)
        if match.group(1):
            tokens.append(("ident", match.group(1), match.start(1)))
        elif match.group(2):
            tokens.append(("int", match.group(2), match.start(2)))
        else:
            tokens.append(("punct", match.group(3), match.start(3)))
        pos = match.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def error(self, message: str):
        column = self.tokens[self.pos][2] + 1 if self.pos < len(self.tokens) else len(self.text) + 1
        raise ParseError(message, column=column)

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self):
        tok = self.peek()
        if tok is None:
            self.error("unexpected end of input")
        self.pos += 1
        return tok

    def expect_punct(self, value: str):
        tok = self.take()
        if tok[0] != "punct" or tok[1] != value:
            self.error(f"expected {value!r}, got {tok[1]!r}")
        return tok

    def expect_ident(self) -> str:
        tok = self.take()
        if tok[0] != "ident":
            self.error(f"expected a name, got {tok[1]!r}")
        return tok[1]

    def expect_grade(self) -> int:
        tok = self.take()
        if tok[0] != "int":
            self.error(f"expected a grade, got {tok[1]!r}")
        grade = int(tok[1])
        if grade < 1:
            self.error("grades start at 1")
        return grade

    def formula(self) -> Formula:
        tok = self.take()
        kind, value, _ = tok
        if kind == "ident":
            if value == "true":
                return TOP
            if value == "false":
                return BOT
            return Prop(value)
        if kind == "punct" and value == "!":
            return Not(self.formula())
        if kind == "punct" and value == "(":
            left = self.formula()
            op = self.take()
            if op[0] != "punct" or op[1] not in "&|":
                self.error(f"expected '&' or '|', got {op[1]!r}")
            right = self.formula()
            self.expect_punct(")")
            return And(left, right) if op[1] == "&" else Or(left, right)
        if kind == "punct" and value == "<":
            agent = self.expect_ident()
            self.expect_punct(":")
            grade = self.expect_grade()
            self.expect_punct(">")
            return Diamond(agent, grade, self.formula())
        if kind == "punct" and value == "[":
            agent = self.expect_ident()
            self.expect_punct(":")
            grade = self.expect_grade()
            self.expect_punct("]")
            return box(agent, grade, self.formula())
        self.pos -= 1
        self.error(f"unexpected token {value!r}")
        raise AssertionError  # unreachable


def parse_formula(text: str) -> Formula:
    parser = _Parser(text)
    result = parser.formula()
    if parser.peek() is not None:
        parser.error("trailing input after formula")
    return result


def format_formula(formula: Formula) -> str:
    """Concrete syntax in core form; ``parse_formula`` inverts it."""
    if isinstance(formula, Top):
        return "true"
    if isinstance(formula, Bot):
        return "false"
    if isinstance(formula, Prop):
        return formula.name
    if isinstance(formula, Not):
        return "!" + format_formula(formula.child)
    if isinstance(formula, And):
        return f"({format_formula(formula.left)} & {format_formula(formula.right)})"
    if isinstance(formula, Or):
        return f"({format_formula(formula.left)} | {format_formula(formula.right)})"
    if isinstance(formula, Diamond):
        return f"<{formula.agent}:{formula.grade}> {format_formula(formula.child)}"
    raise TypeError(f"not a formula: {formula!r}")


def nesting_depth(formula: Formula) -> int:
    """Maximal nesting of modal operators; atoms have depth 0."""
    if isinstance(formula, (Top, Bot, Prop)):
        return 0
    if isinstance(formula, Not):
        return nesting_depth(formula.child)
    if isinstance(formula, (And, Or)):
        return max(nesting_depth(formula.left), nesting_depth(formula.right))
    if isinstance(formula, Diamond):
        return nesting_depth(formula.child) + 1
    raise TypeError(f"not a formula: {formula!r}")


def counting_rank(formula: Formula) -> int:
    """Maximal grade occurring in the formula; propositional formulas rank 0."""
    if isinstance(formula, (Top, Bot, Prop)):
        return 0
    if isinstance(formula, Not):
        return counting_rank(formula.child)
    if isinstance(formula, (And, Or)):
        return max(counting_rank(formula.left), counting_rank(formula.right))
    if isinstance(formula, Diamond):
        return max(formula.grade, counting_rank(formula.child))
    raise TypeError(f"not a formula: {formula!r}")


@dataclass(frozen=True)
class FragmentBound:
    """Rank/depth bounds carving out a finite fragment of the logic."""

    cap: int
    depth: int

    def __post_init__(self):
        if self.cap < 0 or self.depth < 0:
            raise ValueError("bounds must be nonnegative")


def in_fragment(formula: Formula, bound: FragmentBound) -> bool:
    return counting_rank(formula) <= bound.cap and nesting_depth(formula) <= bound.depth
