"""Recursive-descent parser and second-order forward automatic differentiation.

Expressions describe custom mass profiles m(x) and potentials V(x).  The
grammar is deliberately small:

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | power
    power  := atom ('^' factor)?          # right-associative
    atom   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'

with functions sin, cos, exp, ln, sqrt.  Every evaluation carries value,
first and second derivative at once (truncated Taylor arithmetic), so a
single pass yields the (m, m', m'') triple needed by the dynamics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

from .errors import ExprDomainError, ExprSyntaxError, UnknownIdentifier

FUNCTIONS = ("sin", "cos", "exp", "ln", "sqrt")


# --- abstract syntax tree ---------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Expr"


Expr = Union[Num, Var, Neg, BinOp, Call]


# --- tokenizer --------------------------------------------------------------

_OPS = set("+-*/^()")


@dataclass(frozen=True)
class _Token:
    kind: str   # NUMBER, IDENT, OP, EOF
    text: str
    column: int  # 1-based


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        col = i + 1
        if c in _OPS:
            tokens.append(_Token("OP", c, col))
            i += 1
        elif c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            while j < n and (text[j].isdigit() or text[j] == "."):
                j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            lexeme = text[i:j]
            try:
                float(lexeme)
            except ValueError:
                raise ExprSyntaxError(col, "a well-formed number") from None
            tokens.append(_Token("NUMBER", lexeme, col))
            i = j
        elif c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("IDENT", text[i:j], col))
            i = j
        else:
            raise ExprSyntaxError(col, f"a token (got {c!r})")
    tokens.append(_Token("EOF", "", n + 1))
    return tokens


# --- parser -----------------------------------------------------------------

class _Parser:
    def __init__(self, tokens: list[_Token], variables: Sequence[str]):
        self.tokens = tokens
        self.pos = 0
        self.variables = tuple(variables)

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op: str) -> None:
        tok = self.peek()
        if tok.kind != "OP" or tok.text != op:
            raise ExprSyntaxError(tok.column, f"'{op}'")
        self.advance()

    def parse(self) -> Expr:
        node = self.expr()
        tok = self.peek()
        if tok.kind != "EOF":
            raise ExprSyntaxError(tok.column, "end of input")
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.peek().kind == "OP" and self.peek().text in "+-":
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.peek().kind == "OP" and self.peek().text in "*/":
            op = self.advance().text
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Expr:
        tok = self.peek()
        if tok.kind == "OP" and tok.text == "-":
            self.advance()
            return Neg(self.factor())
        return self.power()

    def power(self) -> Expr:
        node = self.atom()
        tok = self.peek()
        if tok.kind == "OP" and tok.text == "^":
            self.advance()
            # exponent may carry a unary minus; recursion keeps ^ right-associative
            node = BinOp("^", node, self.factor())
        return node

    def atom(self) -> Expr:
        tok = self.advance()
        if tok.kind == "NUMBER":
            return Num(float(tok.text))
        if tok.kind == "IDENT":
            nxt = self.peek()
            if nxt.kind == "OP" and nxt.text == "(":
                if tok.text not in FUNCTIONS:
                    raise UnknownIdentifier(tok.text, tok.column)
                self.advance()
                arg = self.expr()
                self.expect_op(")")
                return Call(tok.text, arg)
            if tok.text not in self.variables:
                raise UnknownIdentifier(tok.text, tok.column)
            return Var(tok.text)
        if tok.kind == "OP" and tok.text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        what = "end of input" if tok.kind == "EOF" else repr(tok.text)
        raise ExprSyntaxError(tok.column, f"a number, variable or '(' (got {what})")


def parse_expression(text: str, variables: Sequence[str] = ("x",)) -> Expr:
    """Parse ``text`` into an Expr, resolving identifiers against ``variables``.

    Raises ExprSyntaxError (with a 1-based column) or UnknownIdentifier;
    never anything else, however malformed the input.
    """
    return _Parser(_tokenize(text), variables).parse()


# --- pretty printer ---------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def to_source(expr: Expr) -> str:
    """Render an Expr to text that parses back to a structurally equal tree."""
    return _render(expr, 0)


def _render(e: Expr, parent_prec: int) -> str:
    if isinstance(e, Num):
        s = repr(e.value)
        # a negative literal behaves like a unary minus precedence-wise
        return f"({s})" if s.startswith("-") and parent_prec > _PREC["neg"] else s
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.fn}({_render(e.arg, 0)})"
    if isinstance(e, Neg):
        inner = _render(e.arg, _PREC["neg"])
        s = f"-{inner}"
        return f"({s})" if parent_prec > _PREC["neg"] else s
    assert isinstance(e, BinOp)
    prec = _PREC[e.op]
    if e.op == "^":
        # right-associative; left operand must bind tighter than ^
        left = _render(e.left, prec + 1)
        right = _render(e.right, prec)
    else:
        left = _render(e.left, prec)
        right = _render(e.right, prec + 1)
    s = f"{left}{e.op}{right}"
    return f"({s})" if parent_prec > prec else s


# --- second-order dual arithmetic -------------------------------------------

@dataclass(frozen=True)
class Dual2:
    """Value with first and second derivative with respect to one seed."""

    val: float
    d1: float = 0.0
    d2: float = 0.0

    @staticmethod
    def seed(x: float) -> "Dual2":
        return Dual2(float(x), 1.0, 0.0)

    @staticmethod
    def const(c: float) -> "Dual2":
        return Dual2(float(c), 0.0, 0.0)


def _add(a: Dual2, b: Dual2) -> Dual2:
    return Dual2(a.val + b.val, a.d1 + b.d1, a.d2 + b.d2)


def _sub(a: Dual2, b: Dual2) -> Dual2:
    return Dual2(a.val - b.val, a.d1 - b.d1, a.d2 - b.d2)


def _mul(a: Dual2, b: Dual2) -> Dual2:
    return Dual2(a.val * b.val,
                 a.d1 * b.val + a.val * b.d1,
                 a.d2 * b.val + 2.0 * a.d1 * b.d1 + a.val * b.d2)


def _div(a: Dual2, b: Dual2, where: Expr) -> Dual2:
    if b.val == 0.0:
        raise ExprDomainError("division by zero", to_source(where))
    q = a.val / b.val
    q1 = (a.d1 - q * b.d1) / b.val
    q2 = (a.d2 - 2.0 * q1 * b.d1 - q * b.d2) / b.val
    return Dual2(q, q1, q2)


def _chain(u: Dual2, f: float, fp: float, fpp: float) -> Dual2:
    return Dual2(f, fp * u.d1, fpp * u.d1 * u.d1 + fp * u.d2)


def _int_pow(u: Dual2, k: int, where: Expr) -> Dual2:
    if k == 0:
        return Dual2.const(1.0)
    if k < 0:
        return _div(Dual2.const(1.0), _int_pow(u, -k, where), where)
    out = u
    for _ in range(k - 1):
        out = _mul(out, u)
    return out


def _pow(a: Dual2, b: Dual2, where: Expr) -> Dual2:
    exponent_constant = b.d1 == 0.0 and b.d2 == 0.0
    if exponent_constant and float(b.val).is_integer():
        # repeated multiplication keeps negative bases exact and real
        return _int_pow(a, int(b.val), where)
    if a.val <= 0.0:
        raise ExprDomainError(
            "non-integer power of a non-positive base", to_source(where))
    if exponent_constant:
        p = b.val
        f = a.val ** p
        return _chain(a, f, p * a.val ** (p - 1.0), p * (p - 1.0) * a.val ** (p - 2.0))
    ln_a = _chain(a, math.log(a.val), 1.0 / a.val, -1.0 / (a.val * a.val))
    return _exp(_mul(b, ln_a))


def _exp(u: Dual2) -> Dual2:
    e = math.exp(u.val)
    return _chain(u, e, e, e)


def _eval(e: Expr, env: dict[str, Dual2]) -> Dual2:
    if isinstance(e, Num):
        return Dual2.const(e.value)
    if isinstance(e, Var):
        return env[e.name]
    if isinstance(e, Neg):
        u = _eval(e.arg, env)
        return Dual2(-u.val, -u.d1, -u.d2)
    if isinstance(e, Call):
        u = _eval(e.arg, env)
        if e.fn == "sin":
            s, c = math.sin(u.val), math.cos(u.val)
            return _chain(u, s, c, -s)
        if e.fn == "cos":
            s, c = math.sin(u.val), math.cos(u.val)
            return _chain(u, c, -s, -c)
        if e.fn == "exp":
            return _exp(u)
        if e.fn == "ln":
            if u.val <= 0.0:
                raise ExprDomainError("ln of a non-positive value", to_source(e))
            return _chain(u, math.log(u.val), 1.0 / u.val, -1.0 / (u.val * u.val))
        if e.fn == "sqrt":
            if u.val <= 0.0:
                raise ExprDomainError("sqrt of a non-positive value", to_source(e))
            r = math.sqrt(u.val)
            return _chain(u, r, 0.5 / r, -0.25 / (u.val * r))
        raise AssertionError(f"unreachable function {e.fn}")
    assert isinstance(e, BinOp)
    a = _eval(e.left, env)
    b = _eval(e.right, env)
    if e.op == "+":
        return _add(a, b)
    if e.op == "-":
        return _sub(a, b)
    if e.op == "*":
        return _mul(a, b)
    if e.op == "/":
        return _div(a, b, e)
    return _pow(a, b, e)


def eval_dual(expr: Expr, x: float, variable: str | None = None) -> tuple[float, float, float]:
    """Evaluate a one-variable expression: (value, d/dx, d2/dx2) at x.

    Derivatives are exact for the grammar's function set; nothing is
    finite-differenced internally.
    """
    name = variable
    if name is None:
        names = sorted(free_variables(expr))
        name = names[0] if names else "x"
    out = _eval(expr, {name: Dual2.seed(x)})
    return out.val, out.d1, out.d2


def eval_value(expr: Expr, env: dict[str, float]) -> float:
    """Plain value of a (possibly multivariate) expression."""
    duals = {k: Dual2.const(v) for k, v in env.items()}
    return _eval(expr, duals).val


def eval_gradient(expr: Expr, names: Sequence[str],
                  values: Sequence[float]) -> tuple[float, list[float]]:
    """Value and first partial derivatives of a multivariate expression.

    One dual pass per coordinate; second-order components are discarded.
    """
    base = {n: Dual2.const(v) for n, v in zip(names, values)}
    val = _eval(expr, base).val
    grad = []
    for n, v in zip(names, values):
        env = dict(base)
        env[n] = Dual2.seed(v)
        grad.append(_eval(expr, env).d1)
    return val, grad


def free_variables(expr: Expr) -> set[str]:
    if isinstance(expr, Var):
        return {expr.name}
    if isinstance(expr, Neg):
        return free_variables(expr.arg)
    if isinstance(expr, Call):
        return free_variables(expr.arg)
    if isinstance(expr, BinOp):
        return free_variables(expr.left) | free_variables(expr.right)
    return set()
