"""Arithmetic expression language for chart entries.

Grammar (highest precedence first)::

    atom    := number | identifier | identifier '(' expr ')' | '(' expr ')'
    power   := atom ('^' unary)?            # right associative, integer exponent
    unary   := '-' unary | '+' unary | power
    term    := unary (('*' | '/') unary)*
    expr    := term (('+' | '-') term)*

Identifiers are the coordinates ``x1..x4``, the constant ``pi`` and the
functions ``sin cos exp sqrt tanh cosh sinh``. Callers may admit extra
variable names (the custom fiber-map syntax uses ``a``, ``zr``, ``zi``).
"""

from __future__ import annotations

import dataclasses
import math
import re
from dataclasses import dataclass

import numpy as np

from .jets import DIV_EPS, DomainError, Jet2

COORDINATES = ("x1", "x2", "x3", "x4")
FUNCTIONS = ("sin", "cos", "exp", "sqrt", "tanh", "cosh", "sinh")


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, offset: int, text: str = ""):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset
        self.text = text


class UnknownIdentifier(ExprSyntaxError):
    pass


class Expr:
    """Base class of the syntax tree. Nodes are frozen dataclasses with a cached hash."""

    def _fields(self) -> tuple:
        return tuple(getattr(self, f.name) for f in dataclasses.fields(self))

    def __hash__(self) -> int:
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((type(self).__name__,) + self._fields())
            object.__setattr__(self, "_hash", h)
        return h

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        return type(self) is type(other) and hash(self) == hash(other) and self._fields() == other._fields()

    def __str__(self) -> str:
        return to_text(self)

    def __add__(self, other):
        return Add(self, _lift(other))

    def __radd__(self, other):
        return Add(_lift(other), self)

    def __sub__(self, other):
        return Sub(self, _lift(other))

    def __rsub__(self, other):
        return Sub(_lift(other), self)

    def __mul__(self, other):
        return Mul(self, _lift(other))

    def __rmul__(self, other):
        return Mul(_lift(other), self)

    def __truediv__(self, other):
        return Div(self, _lift(other))

    def __rtruediv__(self, other):
        return Div(_lift(other), self)

    def __neg__(self):
        return Neg(self)

    def __pow__(self, n: int):
        return Pow(self, int(n))


def _lift(v) -> Expr:
    if isinstance(v, Expr):
        return v
    if v < 0:
        return Neg(Num(-float(v)))
    return Num(float(v))


@dataclass(frozen=True, eq=False)
class Num(Expr):
    value: float


@dataclass(frozen=True, eq=False)
class Pi(Expr):
    pass


@dataclass(frozen=True, eq=False)
class Var(Expr):
    name: str


@dataclass(frozen=True, eq=False)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True, eq=False)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=False)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=False)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=False)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=False)
class Pow(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True, eq=False)
class Call(Expr):
    func: str
    arg: Expr


PI = Pi()


def var(name: str) -> Var:
    return Var(name)


def call(func: str, arg) -> Call:
    if func not in FUNCTIONS:
        raise ValueError(f"unknown function {func!r}")
    return Call(func, _lift(arg))


# --- tokenizer / parser -----------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9']*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExprSyntaxError(f"unexpected character {text[bad]!r}", bad, text)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, variables):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.variables = set(variables)

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.peek()
        if val != value or kind != "op":
            found = "end of input" if kind == "end" else repr(val)
            raise ExprSyntaxError(f"expected {value!r}, found {found}", pos, self.text)
        self.take()

    def parse(self) -> Expr:
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {val!r}", pos, self.text)
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            right = self.term()
            left = Add(left, right) if op == "+" else Sub(left, right)
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            right = self.unary()
            left = Mul(left, right) if op == "*" else Div(left, right)
        return left

    def unary(self) -> Expr:
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return Neg(self.unary())
        if kind == "op" and val == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        kind, val, pos = self.peek()
        if kind == "op" and val == "^":
            self.take()
            exp_pos = self.peek()[2]
            exponent = self.unary()
            n = _constant_integer(exponent)
            if n is None:
                raise ExprSyntaxError("exponent must be an integer constant", exp_pos, self.text)
            return Pow(base, n)
        return base

    def atom(self) -> Expr:
        kind, val, pos = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(val, arg)
            if val == "pi":
                return PI
            if val in self.variables:
                return Var(val)
            raise UnknownIdentifier(f"unknown identifier {val!r}", pos, self.text)
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect(")")
            return e
        found = "end of input" if kind == "end" else repr(val)
        raise ExprSyntaxError(f"unexpected {found}", pos, self.text)


def _constant_integer(e: Expr):
    if isinstance(e, Num) and float(e.value).is_integer():
        return int(e.value)
    if isinstance(e, Neg):
        n = _constant_integer(e.arg)
        return None if n is None else -n
    return None


def parse(text: str, variables=COORDINATES) -> Expr:
    return _Parser(text, variables).parse()


# --- canonical printer ------------------------------------------------------

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4}


def _prec(e: Expr) -> int:
    return _PREC.get(type(e), 5)


def _num_text(v: float) -> str:
    if v < 0:
        return f"(-{_num_text(-v)})"
    if float(v).is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(float(v))


def to_text(e: Expr) -> str:
    if isinstance(e, Num):
        return _num_text(e.value)
    if isinstance(e, Pi):
        return "pi"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({to_text(e.arg)})"
    if isinstance(e, Neg):
        inner = to_text(e.arg)
        return f"-{inner}" if _prec(e.arg) >= 3 else f"-({inner})"
    if isinstance(e, Pow):
        base = to_text(e.base)
        if _prec(e.base) <= 4:
            base = f"({base})"
        exp = str(e.exponent) if e.exponent >= 0 else f"(-{-e.exponent})"
        return f"{base}^{exp}"
    op = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(e)]
    p = _prec(e)
    left = to_text(e.left)
    if _prec(e.left) < p:
        left = f"({left})"
    right = to_text(e.right)
    # operators associate to the left, so an equal-precedence right operand needs parentheses
    if _prec(e.right) <= p:
        right = f"({right})"
    return f"{left} {op} {right}"


# --- evaluation -------------------------------------------------------------

_FLOAT_FUNCS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "tanh": np.tanh,
    "cosh": np.cosh,
    "sinh": np.sinh,
}


def evaluate(e: Expr, env: dict, _cache=None):
    """Numeric evaluation; ``env`` maps variable names to floats or arrays."""
    cache = {} if _cache is None else _cache
    if e in cache:
        return cache[e]
    if isinstance(e, Num):
        r = e.value
    elif isinstance(e, Pi):
        r = math.pi
    elif isinstance(e, Var):
        if e.name not in env:
            raise KeyError(f"no value bound for {e.name!r}")
        r = np.asarray(env[e.name], dtype=float)
    elif isinstance(e, Neg):
        r = -evaluate(e.arg, env, cache)
    elif isinstance(e, (Add, Sub, Mul, Div)):
        a = evaluate(e.left, env, cache)
        b = evaluate(e.right, env, cache)
        if isinstance(e, Add):
            r = a + b
        elif isinstance(e, Sub):
            r = a - b
        elif isinstance(e, Mul):
            r = a * b
        else:
            if np.any(np.abs(b) < DIV_EPS):
                raise DomainError(f"division by ~0 in {to_text(e.right)}")
            r = a / b
    elif isinstance(e, Pow):
        b = evaluate(e.base, env, cache)
        if e.exponent < 0 and np.any(np.abs(b) < DIV_EPS):
            raise DomainError(f"division by ~0 in {to_text(e.base)}")
        r = np.asarray(b, dtype=float) ** e.exponent
    elif isinstance(e, Call):
        a = evaluate(e.arg, env, cache)
        if e.func == "sqrt":
            if np.any(np.asarray(a) < 0):
                raise DomainError(f"sqrt of negative value in {to_text(e.arg)}")
            r = np.sqrt(a)
        else:
            r = _FLOAT_FUNCS[e.func](a)
    else:
        raise TypeError(f"not an expression node: {e!r}")
    cache[e] = r
    return r


def coordinate_env(x) -> dict:
    x = np.asarray(x, dtype=float)
    return {name: x[..., k] for k, name in enumerate(COORDINATES)}


def eval_jet2(e: Expr, x, _cache=None) -> Jet2:
    """Value, gradient and Hessian of ``e`` with respect to ``x1..x4`` at ``x``.

    ``x`` has shape ``(4,)`` or ``(N, 4)``; the jet is batched accordingly.
    Identical subtrees are evaluated once per call through ``_cache``.
    """
    x = np.asarray(x, dtype=float)
    shape = x.shape[:-1]
    cache = {} if _cache is None else _cache
    return _jet(e, x, shape, cache)


def _jet(e: Expr, x, shape, cache) -> Jet2:
    if e in cache:
        return cache[e]
    if isinstance(e, Num):
        r = Jet2.constant(e.value, shape)
    elif isinstance(e, Pi):
        r = Jet2.constant(math.pi, shape)
    elif isinstance(e, Var):
        if e.name not in COORDINATES:
            raise KeyError(f"jets are taken with respect to x1..x4, not {e.name!r}")
        k = COORDINATES.index(e.name)
        r = Jet2.variable(x[..., k], k)
    elif isinstance(e, Neg):
        r = -_jet(e.arg, x, shape, cache)
    elif isinstance(e, (Add, Sub, Mul)):
        a = _jet(e.left, x, shape, cache)
        b = _jet(e.right, x, shape, cache)
        r = a + b if isinstance(e, Add) else a - b if isinstance(e, Sub) else a * b
    elif isinstance(e, Div):
        a = _jet(e.left, x, shape, cache)
        b = _jet(e.right, x, shape, cache)
        r = a * b.reciprocal(to_text(e.right))
    elif isinstance(e, Pow):
        b = _jet(e.base, x, shape, cache)
        if e.exponent < 0:
            r = (b ** (-e.exponent)).reciprocal(to_text(e))
        else:
            r = b**e.exponent
    elif isinstance(e, Call):
        a = _jet(e.arg, x, shape, cache)
        if e.func == "sqrt":
            r = a.sqrt(to_text(e.arg))
        else:
            r = getattr(a, e.func)()
    else:
        raise TypeError(f"not an expression node: {e!r}")
    cache[e] = r
    return r
