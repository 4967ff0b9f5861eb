"""Single-variable predicates over the integers: parse, print, evaluate, enumerate.

Grammar (whitespace-insensitive)::

    pred   := or ; or := and { "or" and } ; and := not { "and" not } ;
    not    := "not" not | cmp ;
    cmp    := sum ( "=" | "!=" | "<" | "<=" | ">" | ">=" ) sum ;
    sum    := prod { ("+"|"-") prod } ; prod := unary { "*" unary } ;
    unary  := "-" unary | pow ; pow := atom [ "^" integer ] ;
    atom   := integer | "x" | "(" pred-or-sum ")" .

Arithmetic is over unbounded Python integers, never reduced modulo 2**k.
A value ``x`` is a solution when the predicate evaluates to true.
"""

from __future__ import annotations

import re
from bisect import bisect_left
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Union

import numpy as np

from .errors import PredicateSyntaxError, PredicateTypeError
from .statevec import check_width


# -- AST ---------------------------------------------------------------------


@dataclass(frozen=True)
class Int:
    value: int


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    operand: "Arith"


@dataclass(frozen=True)
class Add:
    left: "Arith"
    right: "Arith"


@dataclass(frozen=True)
class Sub:
    left: "Arith"
    right: "Arith"


@dataclass(frozen=True)
class Mul:
    left: "Arith"
    right: "Arith"


@dataclass(frozen=True)
class Pow:
    base: "Arith"
    exponent: int


@dataclass(frozen=True)
class Cmp:
    op: str
    left: "Arith"
    right: "Arith"


@dataclass(frozen=True)
class Not:
    operand: "Bool"


@dataclass(frozen=True)
class And:
    left: "Bool"
    right: "Bool"


@dataclass(frozen=True)
class Or:
    left: "Bool"
    right: "Bool"


Arith = Union[Int, Var, Neg, Add, Sub, Mul, Pow]
Bool = Union[Cmp, Not, And, Or]
PredicateAst = Bool

X = Var()

_BOOL = (Cmp, Not, And, Or)
CMP_OPS = ("=", "!=", "<", "<=", ">", ">=")


def is_boolean(node) -> bool:
    return isinstance(node, _BOOL)


# -- tokenizer ---------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<int>\d+)|(?P<word>[A-Za-z_][A-Za-z0-9_]*)|(?P<op><=|>=|!=|[=<>+\-*^()]))"
)
_KEYWORDS = {"x", "and", "or", "not"}


@dataclass(frozen=True)
class _Token:
    kind: str  # "int", "x", "and", "or", "not", an operator, or "end"
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise PredicateSyntaxError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastgroup)
        value = m.group(m.lastgroup)
        if m.lastgroup == "int":
            tokens.append(_Token("int", value, start))
        elif m.lastgroup == "word":
            if value not in _KEYWORDS:
                raise PredicateSyntaxError(f"unknown identifier {value!r}", start)
            tokens.append(_Token(value, value, start))
        else:
            tokens.append(_Token(value, value, start))
        pos = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


# -- parser ------------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, expected: str):
        tok = self.tok
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        raise PredicateSyntaxError(f"expected {expected}, found {found}", tok.pos)

    def parse(self) -> PredicateAst:
        start = self.tok.pos
        node = self.parse_or()
        if self.tok.kind != "end":
            self.fail("end of input")
        if not is_boolean(node):
            raise PredicateTypeError("predicate must be a comparison or boolean expression", start)
        return node

    def _bool_operand(self, node, pos: int, op: str):
        if not is_boolean(node):
            raise PredicateTypeError(f"operand of '{op}' must be boolean", pos)
        return node

    def _arith_operand(self, node, pos: int, op: str):
        if is_boolean(node):
            raise PredicateTypeError(f"operand of '{op}' must be arithmetic", pos)
        return node

    def parse_or(self):
        pos = self.tok.pos
        node = self.parse_and()
        while self.tok.kind == "or":
            self.advance()
            rpos = self.tok.pos
            right = self.parse_and()
            node = Or(self._bool_operand(node, pos, "or"), self._bool_operand(right, rpos, "or"))
        return node

    def parse_and(self):
        pos = self.tok.pos
        node = self.parse_not()
        while self.tok.kind == "and":
            self.advance()
            rpos = self.tok.pos
            right = self.parse_not()
            node = And(self._bool_operand(node, pos, "and"), self._bool_operand(right, rpos, "and"))
        return node

    def parse_not(self):
        if self.tok.kind == "not":
            self.advance()
            pos = self.tok.pos
            return Not(self._bool_operand(self.parse_not(), pos, "not"))
        return self.parse_cmp()

    def parse_cmp(self):
        # A bare sum is accepted here so that parenthesized arithmetic parses;
        # the root and boolean operators reject it by type.
        pos = self.tok.pos
        left = self.parse_sum()
        if self.tok.kind in CMP_OPS:
            op = self.advance().kind
            rpos = self.tok.pos
            right = self.parse_sum()
            return Cmp(op, self._arith_operand(left, pos, op), self._arith_operand(right, rpos, op))
        return left

    def parse_sum(self):
        pos = self.tok.pos
        node = self.parse_prod()
        while self.tok.kind in ("+", "-"):
            op = self.advance().kind
            rpos = self.tok.pos
            right = self.parse_prod()
            cls = Add if op == "+" else Sub
            node = cls(self._arith_operand(node, pos, op), self._arith_operand(right, rpos, op))
        return node

    def parse_prod(self):
        pos = self.tok.pos
        node = self.parse_unary()
        while self.tok.kind == "*":
            self.advance()
            rpos = self.tok.pos
            right = self.parse_unary()
            node = Mul(self._arith_operand(node, pos, "*"), self._arith_operand(right, rpos, "*"))
        return node

    def parse_unary(self):
        if self.tok.kind == "-":
            self.advance()
            pos = self.tok.pos
            return Neg(self._arith_operand(self.parse_unary(), pos, "-"))
        return self.parse_pow()

    def parse_pow(self):
        pos = self.tok.pos
        base = self.parse_atom()
        if self.tok.kind == "^":
            self.advance()
            if self.tok.kind != "int":
                self.fail("a non-negative integer exponent")
            exponent = int(self.advance().text)
            return Pow(self._arith_operand(base, pos, "^"), exponent)
        return base

    def parse_atom(self):
        tok = self.tok
        if tok.kind == "int":
            self.advance()
            return Int(int(tok.text))
        if tok.kind == "x":
            self.advance()
            return X
        if tok.kind == "(":
            self.advance()
            node = self.parse_or()
            if self.tok.kind != ")":
                self.fail("')'")
            self.advance()
            return node
        self.fail("an integer, 'x' or '('")


def parse(text: str) -> PredicateAst:
    """Parse predicate text into an AST.

    Raises PredicateSyntaxError (carrying a 0-based ``position``) for
    malformed input and PredicateTypeError for ill-typed trees, such as a
    comparison used as an arithmetic operand or an arithmetic root.

    >>> parse("x*x - 4 = 0")
    Cmp(op='=', left=Sub(left=Mul(left=Var(), right=Var()), right=Int(value=4)), right=Int(value=0))
    """
    return _Parser(text).parse()


def format_predicate(node) -> str:
    """Canonical fully parenthesized text; ``parse(format_predicate(t)) == t``."""
    if isinstance(node, Int):
        return str(node.value) if node.value >= 0 else f"(-{-node.value})"
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Neg):
        return f"(-{format_predicate(node.operand)})"
    if isinstance(node, Pow):
        return f"({format_predicate(node.base)} ^ {node.exponent})"
    if isinstance(node, Not):
        return f"(not {format_predicate(node.operand)})"
    if isinstance(node, Cmp):
        return f"({format_predicate(node.left)} {node.op} {format_predicate(node.right)})"
    symbol = {Add: "+", Sub: "-", Mul: "*", And: "and", Or: "or"}[type(node)]
    return f"({format_predicate(node.left)} {symbol} {format_predicate(node.right)})"


# -- evaluation --------------------------------------------------------------

_CMP_FUNCS: dict[str, Callable[[int, int], bool]] = {
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def _compile(node) -> Callable[[int], object]:
    if isinstance(node, Int):
        v = node.value
        return lambda x: v
    if isinstance(node, Var):
        return lambda x: x
    if isinstance(node, Neg):
        f = _compile(node.operand)
        return lambda x: -f(x)
    if isinstance(node, Pow):
        f, e = _compile(node.base), node.exponent
        return lambda x: f(x) ** e
    if isinstance(node, Not):
        f = _compile(node.operand)
        return lambda x: not f(x)
    if isinstance(node, Cmp):
        f, g, cmp = _compile(node.left), _compile(node.right), _CMP_FUNCS[node.op]
        return lambda x: cmp(f(x), g(x))
    f, g = _compile(node.left), _compile(node.right)
    if isinstance(node, Add):
        return lambda x: f(x) + g(x)
    if isinstance(node, Sub):
        return lambda x: f(x) - g(x)
    if isinstance(node, Mul):
        return lambda x: f(x) * g(x)
    if isinstance(node, And):
        return lambda x: f(x) and g(x)
    if isinstance(node, Or):
        return lambda x: f(x) or g(x)
    raise TypeError(f"not a predicate node: {node!r}")


@lru_cache(maxsize=256)
def _compiled(ast: PredicateAst) -> Callable[[int], object]:
    if not is_boolean(ast):
        raise PredicateTypeError("predicate root must be boolean")
    return _compile(ast)


def compile_predicate(ast: PredicateAst) -> Callable[[int], bool]:
    """Return ``f`` with ``f(x) == evaluate(ast, x)``, for hot loops."""
    f = _compiled(ast)

    def check(x: int) -> bool:
        if x < 0:
            raise ValueError(f"x must be non-negative, got {x}")
        return bool(f(int(x)))

    return check


def evaluate(ast: PredicateAst, x: int) -> bool:
    return compile_predicate(ast)(x)


@dataclass(frozen=True)
class SolutionSet:
    """Members of [0, 2**k) satisfying a predicate; ``n`` is their count."""

    k: int
    members: tuple[int, ...]

    def __post_init__(self):
        members = tuple(sorted(set(int(m) for m in self.members)))
        if members and (members[0] < 0 or members[-1] >= 1 << self.k):
            raise ValueError(f"members must lie in [0, {1 << self.k})")
        object.__setattr__(self, "members", members)

    @property
    def n(self) -> int:
        return len(self.members)

    @property
    def size(self) -> int:
        return 1 << self.k

    def non_members(self) -> tuple[int, ...]:
        inside = set(self.members)
        return tuple(x for x in range(self.size) if x not in inside)

    def __contains__(self, x: int) -> bool:
        i = bisect_left(self.members, x)
        return i < len(self.members) and self.members[i] == x


@lru_cache(maxsize=64)
def truth_table(ast: PredicateAst, k: int) -> np.ndarray:
    """Read-only boolean array ``t`` with ``t[x] == evaluate(ast, x)`` for x in [0, 2**k)."""
    k = check_width(k)
    f = _compiled(ast)
    table = np.fromiter((bool(f(x)) for x in range(1 << k)), dtype=bool, count=1 << k)
    table.flags.writeable = False
    return table


def enumerate_solutions(ast: PredicateAst, k: int) -> SolutionSet:
    """Exhaustive scan of [0, 2**k); the ground truth for everything downstream."""
    table = truth_table(ast, k)
    return SolutionSet(k, tuple(int(i) for i in np.flatnonzero(table)))
