"""Small arithmetic expression language for immersion components.

Grammar (standard precedence, caret is right-associative and binds above
unary minus):

    expr   := term  (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | 'pi' | PARAM | FUNC '(' expr ')' | '(' expr ')'

Parameters are named u1..um. Parse errors carry a 1-based line/column and
the offending token. The printer emits source that reparses to a
structurally equal tree (minimal parentheses).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from ..errors import EvaluationError, ParseError

FUNCTIONS = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": math.exp,
    "log": math.log,
    "sinh": math.sinh,
    "cosh": math.cosh,
    "sqrt": math.sqrt,
}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Pi:
    pass


@dataclass(frozen=True)
class Param:
    index: int  # zero-based; prints as u{index+1}


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Num | Pi | Param | Neg | BinOp | Call


@dataclass(frozen=True)
class _Token:
    kind: str  # num, ident, op, lparen, rparen, end
    text: str
    line: int
    column: int


_NUMBER = re.compile(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_PARAM = re.compile(r"^u([1-9][0-9]*)$")


def _tokenize(src: str) -> list[_Token]:
    tokens = []
    line, col = 1, 1
    i = 0
    while i < len(src):
        ch = src[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch in "+-*/^":
            tokens.append(_Token("op", ch, line, col))
            i += 1
            col += 1
            continue
        if ch == "(":
            tokens.append(_Token("lparen", ch, line, col))
            i += 1
            col += 1
            continue
        if ch == ")":
            tokens.append(_Token("rparen", ch, line, col))
            i += 1
            col += 1
            continue
        m = _NUMBER.match(src, i)
        if m:
            tokens.append(_Token("num", m.group(0), line, col))
            col += len(m.group(0))
            i = m.end()
            continue
        m = _IDENT.match(src, i)
        if m:
            tokens.append(_Token("ident", m.group(0), line, col))
            col += len(m.group(0))
            i = m.end()
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("end", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token], param_count: int | None):
        self.tokens = tokens
        self.pos = 0
        self.param_count = param_count

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, message: str, tok: _Token | None = None):
        tok = tok or self.peek()
        shown = tok.text or "end of input"
        raise ParseError(f"{message} (found {shown!r})", tok.line, tok.column)

    def parse(self) -> Expr:
        node = self.expr()
        if self.peek().kind != "end":
            self.fail("syntax error: trailing input")
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.peek().kind == "op" and self.peek().text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        node = self.atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.advance()
            return BinOp("^", node, self.unary())
        return node

    def atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "lparen":
            self.advance()
            node = self.expr()
            if self.peek().kind != "rparen":
                self.fail("syntax error: expected ')'")
            self.advance()
            return node
        if tok.kind == "ident":
            self.advance()
            if tok.text == "pi":
                return Pi()
            m = _PARAM.match(tok.text)
            if m:
                index = int(m.group(1)) - 1
                if self.param_count is not None and index >= self.param_count:
                    raise ParseError(
                        f"parameter {tok.text!r} exceeds the declared count "
                        f"{self.param_count}",
                        tok.line,
                        tok.column,
                    )
                return Param(index)
            if tok.text in FUNCTIONS:
                if self.peek().kind != "lparen":
                    self.fail(f"function {tok.text!r} requires an argument list")
                self.advance()
                arg = self.expr()
                if self.peek().kind != "rparen":
                    self.fail(f"syntax error: expected ')' closing {tok.text!r}")
                self.advance()
                return Call(tok.text, arg)
            raise ParseError(f"unknown identifier {tok.text!r}", tok.line, tok.column)
        self.fail("syntax error: expected a value")


def parse_expr(src: str, param_count: int | None = None) -> Expr:
    """Parse one expression; validate parameter indices when a count is given."""
    return _Parser(_tokenize(src), param_count).parse()


def max_param_index(e: Expr) -> int:
    """Highest zero-based parameter index used, or -1 for constants."""
    match e:
        case Param(index=i):
            return i
        case Neg(operand=v):
            return max_param_index(v)
        case BinOp(left=a, right=b):
            return max(max_param_index(a), max_param_index(b))
        case Call(arg=a):
            return max_param_index(a)
        case _:
            return -1


def eval_expr(e: Expr, params) -> float:
    """IEEE double evaluation; domain violations and non-finite results raise
    EvaluationError naming the offending subexpression."""
    value = _eval(e, params)
    if not math.isfinite(value):
        raise EvaluationError(f"non-finite result from {to_source(e)!r}")
    return value


def _eval(e: Expr, params) -> float:
    match e:
        case Num(value=v):
            return v
        case Pi():
            return math.pi
        case Param(index=i):
            if i >= len(params):
                raise EvaluationError(
                    f"parameter u{i + 1} has no value ({len(params)} supplied)"
                )
            return float(params[i])
        case Neg(operand=v):
            return -_eval(v, params)
        case BinOp(op=op, left=a, right=b):
            x, y = _eval(a, params), _eval(b, params)
            if op == "+":
                return x + y
            if op == "-":
                return x - y
            if op == "*":
                return x * y
            if op == "/":
                if y == 0.0:
                    raise EvaluationError(f"division by zero in {to_source(e)!r}")
                return x / y
            try:
                out = math.pow(x, y)
            except (ValueError, OverflowError) as exc:
                raise EvaluationError(f"bad power in {to_source(e)!r}: {exc}")
            return out
        case Call(func=fn, arg=a):
            x = _eval(a, params)
            try:
                out = FUNCTIONS[fn](x)
            except (ValueError, OverflowError) as exc:
                raise EvaluationError(
                    f"domain error in {to_source(e)!r}: {exc}"
                )
            return out
    raise EvaluationError(f"malformed expression node {e!r}")


def _prec(e: Expr) -> int:
    match e:
        case BinOp(op="+") | BinOp(op="-"):
            return 1
        case BinOp(op="*") | BinOp(op="/"):
            return 2
        case Neg():
            return 3
        case BinOp(op="^"):
            return 4
        case _:
            return 5


def _wrap(e: Expr, minimum: int) -> str:
    s = to_source(e)
    return f"({s})" if _prec(e) < minimum else s


def to_source(e: Expr) -> str:
    """Print with minimal parentheses; reparses to a structurally equal tree."""
    match e:
        case Num(value=v):
            return repr(v)
        case Pi():
            return "pi"
        case Param(index=i):
            return f"u{i + 1}"
        case Neg(operand=v):
            return f"-{_wrap(v, 3)}"
        case Call(func=fn, arg=a):
            return f"{fn}({to_source(a)})"
        case BinOp(op="^", left=a, right=b):
            return f"{_wrap(a, 5)}^{_wrap(b, 3)}"
        case BinOp(op=op, left=a, right=b) if op in "+-":
            return f"{_wrap(a, 1)} {op} {_wrap(b, 2)}"
        case BinOp(op=op, left=a, right=b):
            return f"{_wrap(a, 2)} {op} {_wrap(b, 3)}"
    raise ValueError(f"cannot print {e!r}")


def compile_components(exprs: list[Expr]):
    """Vector-valued callable evaluating a list of expressions."""

    def mapping(u):
        return np.array([_eval(e, u) for e in exprs], dtype=float)

    return mapping
