"""Boundary expressions in ``x`` and ``y``: a small recursive-descent parser.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := ('-' | '+') factor | base ('^' int)?
    base   := number | 'x' | 'y' | fn '(' expr ')' | zfn '(' int ')' | '(' expr ')'
    fn     := 'sin' | 'cos' | 'exp'
    zfn    := 're_zn' | 'im_zn'          # Re / Im of (x + iy)^n

``^`` binds tighter than unary minus, so ``-x^2`` is ``-(x^2)``.
Evaluation is vectorised over ``numpy`` arrays.
"""
import re
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams, ParseError

__all__ = ["Expr", "evaluate", "parse_boundary_expr"]

FUNCS = {"sin": np.sin, "cos": np.cos, "exp": np.exp}
ZFUNCS = ("re_zn", "im_zn")

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


@dataclass(frozen=True)
class Token:
    kind: str  # "num", "name", "op" or "end"
    text: str
    offset: int


def _tokenize(src):
    tokens, pos = [], 0
    while True:
        while pos < len(src) and src[pos].isspace():
            pos += 1
        if pos == len(src):
            tokens.append(Token("end", "", pos))
            return tokens
        m = _TOKEN.match(src, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {src[pos]!r}", pos, ())
        kind = m.lastgroup
        tokens.append(Token(kind, m.group(kind), m.start(kind)))
        pos = m.end()


class Expr:
    def __call__(self, x, y):
        raise NotImplementedError


@dataclass(frozen=True)
class Num(Expr):
    value: float

    def __call__(self, x, y):
        return np.full(np.shape(x), self.value)


@dataclass(frozen=True)
class Var(Expr):
    name: str

    def __call__(self, x, y):
        return np.array(x if self.name == "x" else y, dtype=float)


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr

    def __call__(self, x, y):
        return -self.arg(x, y)


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr

    def __call__(self, x, y):
        a, b = self.left(x, y), self.right(x, y)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if np.any(np.abs(b) < 1e-300):
            raise InvalidParams("division by zero in boundary expression")
        return a / b


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int

    def __call__(self, x, y):
        b = self.base(x, y)
        if self.exponent < 0 and np.any(np.abs(b) < 1e-300):
            raise InvalidParams("negative power of zero in boundary expression")
        return b ** float(self.exponent)


@dataclass(frozen=True)
class Call(Expr):
    name: str
    arg: Expr

    def __call__(self, x, y):
        return FUNCS[self.name](self.arg(x, y))


@dataclass(frozen=True)
class ZPow(Expr):
    part: str
    n: int

    def __call__(self, x, y):
        z = (np.asarray(x, dtype=float) + 1j * np.asarray(y, dtype=float)) ** self.n
        return z.real if self.part == "re_zn" else z.imag


_BASE_START = {"number", "x", "y", "(", "-", "+"} | set(FUNCS) | set(ZFUNCS)


class _Parser:
    def __init__(self, src):
        self.tokens = _tokenize(src)
        self.pos = 0

    @property
    def tok(self):
        return self.tokens[self.pos]

    def advance(self):
        t = self.tok
        self.pos += 1
        return t

    def fail(self, expected):
        t = self.tok
        what = "end of input" if t.kind == "end" else repr(t.text)
        raise ParseError(f"unexpected {what}", t.offset, expected)

    def expect(self, text):
        if self.tok.kind == "op" and self.tok.text == text:
            return self.advance()
        self.fail({text})

    def integer(self, allow_sign):
        sign = 1
        if allow_sign and self.tok.kind == "op" and self.tok.text in "+-":
            sign = -1 if self.advance().text == "-" else 1
        t = self.tok
        if t.kind != "num" or not t.text.isdigit():
            self.fail({"integer"})
        self.advance()
        return sign * int(t.text)

    def parse(self):
        e = self.expr()
        if self.tok.kind != "end":
            self.fail({"+", "-", "*", "/", "^", "end of input"})
        return e

    def expr(self):
        e = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            e = BinOp(op, e, self.term())
        return e

    def term(self):
        e = self.factor()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            e = BinOp(op, e, self.factor())
        return e

    def factor(self):
        if self.tok.kind == "op" and self.tok.text in "+-":
            neg = self.advance().text == "-"
            f = self.factor()
            return Neg(f) if neg else f
        b = self.base()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            return Pow(b, self.integer(allow_sign=True))
        return b

    def base(self):
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Num(float(t.text))
        if t.kind == "name":
            if t.text in ("x", "y"):
                self.advance()
                return Var(t.text)
            if t.text in FUNCS:
                self.advance()
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(t.text, arg)
            if t.text in ZFUNCS:
                self.advance()
                self.expect("(")
                n = self.integer(allow_sign=False)
                self.expect(")")
                return ZPow(t.text, n)
            self.fail(_BASE_START)
        if t.kind == "op" and t.text == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        self.fail(_BASE_START)


def parse_boundary_expr(src):
    """Parse ``src`` into a callable ``Expr``; raises ``ParseError``."""
    if not isinstance(src, str):
        raise ParseError("expression must be a string", 0, ())
    try:
        return _Parser(src).parse()
    except ParseError as exc:
        # Report byte offsets into the UTF-8 encoding of the source.
        offset = len(src[: exc.offset].encode("utf-8"))
        if offset == exc.offset:
            raise
        raise ParseError(str(exc).split(" at offset")[0], offset, exc.expected) from None


def evaluate(expr, x, y):
    if isinstance(expr, str):
        expr = parse_boundary_expr(expr)
    return expr(x, y)
