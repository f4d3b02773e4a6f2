"""Integrand expression language: parsing, vectorised evaluation, symbolic d/dw.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | factor
    factor := atom ('^' ['-'] number)?
    atom   := number | ident | func '(' args ')' | '(' expr ')'

Identifiers are ``x1..xm``, ``y1..ym``, ``w1..wn``, ``z1..zn``. Functions are
``abs exp log sqrt neg step`` (one argument) and ``min max`` (two).
``step(t)`` is 1 for ``t >= 0`` and 0 otherwise.

Products and quotients follow the measure-theory convention ``0 * inf = 0``:
a factor that is exactly zero annihilates a pole in the other factor, and
``0 / 0 = 0``. This is what lets indicator-masked integrands such as
``step(z1 - x1) / z1`` be evaluated at ``z1 = 0``.
"""

import math
import re
from dataclasses import dataclass
from typing import Tuple

import numpy as np

UNARY_FUNCS = ("abs", "exp", "log", "sqrt", "neg", "step")
BINARY_FUNCS = ("min", "max")
NONSMOOTH_FUNCS = ("abs", "step", "min", "max")
VAR_KINDS = ("x", "y", "w", "z")


class ExprError(ValueError):
    pass


class ParseError(ExprError):
    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class NonSmoothError(ExprError):
    pass


# -- AST ------------------------------------------------------------------


class Node:
    __slots__ = ()

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Num(Node):
    value: float


@dataclass(frozen=True)
class Var(Node):
    name: str

    @property
    def kind(self):
        return self.name[0]

    @property
    def index(self):
        return int(self.name[1:])


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node


@dataclass(frozen=True)
class Pow(Node):
    base: Node
    exponent: float


@dataclass(frozen=True)
class Call(Node):
    name: str
    args: Tuple[Node, ...]


def variables(node):
    """Set of variable names occurring in ``node``."""
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Num):
        return set()
    if isinstance(node, BinOp):
        return variables(node.left) | variables(node.right)
    if isinstance(node, Pow):
        return variables(node.base)
    out = set()
    for a in node.args:
        out |= variables(a)
    return out


def has_kind(node, kinds):
    return any(v[0] in kinds for v in variables(node))


def nonsmooth_in(node, kinds):
    """True if a kink/jump function has an argument depending on ``kinds``."""
    if isinstance(node, (Num, Var)):
        return False
    if isinstance(node, BinOp):
        return nonsmooth_in(node.left, kinds) or nonsmooth_in(node.right, kinds)
    if isinstance(node, Pow):
        return nonsmooth_in(node.base, kinds)
    if node.name in NONSMOOTH_FUNCS and any(has_kind(a, kinds) for a in node.args):
        return True
    return any(nonsmooth_in(a, kinds) for a in node.args)


# -- parsing --------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _tokenize(text):
    tokens = []
    pos = 0
    raw = text.encode("utf-8")
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        mt = _TOKEN.match(text, pos)
        if not mt or mt.end() == pos:
            start = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError(f"unexpected character {text[start]!r}",
                             len(text[:start].encode("utf-8")))
        kind = mt.lastgroup
        start = mt.start(kind)
        tokens.append((kind, mt.group(kind), len(text[:start].encode("utf-8"))))
        pos = mt.end()
    return tokens, len(raw)


class _Parser:
    def __init__(self, text, dim_m, dim_n):
        self.tokens, self.end = _tokenize(text)
        self.i = 0
        self.dim_m, self.dim_n = dim_m, dim_n

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def fail_eof(self, what):
        # dangling input: point at the last token that was consumed
        off = self.tokens[-1][2] if self.tokens else 0
        raise ParseError(f"unexpected end of input, expected {what}", off)

    def take(self, value=None, kind=None, what="token"):
        tok = self.peek()
        if tok is None:
            self.fail_eof(what)
        if (value is not None and tok[1] != value) or (kind is not None and tok[0] != kind):
            raise ParseError(f"expected {what}, found {tok[1]!r}", tok[2])
        self.i += 1
        return tok

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok is not None:
            raise ParseError(f"unexpected {tok[1]!r}", tok[2])
        return node

    def expr(self):
        node = self.term()
        while (tok := self.peek()) is not None and tok[1] in "+-" and tok[0] == "op":
            self.i += 1
            node = BinOp(tok[1], node, self.term())
        return node

    def term(self):
        node = self.unary()
        while (tok := self.peek()) is not None and tok[1] in "*/" and tok[0] == "op":
            self.i += 1
            node = BinOp(tok[1], node, self.unary())
        return node

    def unary(self):
        tok = self.peek()
        if tok is not None and tok[1] == "-":
            self.i += 1
            return Call("neg", (self.unary(),))
        return self.factor()

    def factor(self):
        node = self.atom()
        tok = self.peek()
        if tok is not None and tok[1] == "^":
            self.i += 1
            sign = 1.0
            if (t := self.peek()) is not None and t[1] == "-":
                self.i += 1
                sign = -1.0
            num = self.take(kind="num", what="numeric exponent")
            node = Pow(node, sign * float(num[1]))
        return node

    def atom(self):
        tok = self.peek()
        if tok is None:
            self.fail_eof("operand")
        kind, val, off = tok
        if kind == "num":
            self.i += 1
            return Num(float(val))
        if kind == "op" and val == "(":
            self.i += 1
            node = self.expr()
            self.take(")", what="')'")
            return node
        if kind == "ident":
            self.i += 1
            if val in UNARY_FUNCS or val in BINARY_FUNCS:
                return self.call(val, off)
            return self.variable(val, off)
        raise ParseError(f"unexpected {val!r}", off)

    def call(self, name, off):
        self.take("(", what=f"'(' after {name}")
        args = [self.expr()]
        while (tok := self.peek()) is not None and tok[1] == ",":
            self.i += 1
            args.append(self.expr())
        self.take(")", what="')'")
        want = 1 if name in UNARY_FUNCS else 2
        if len(args) != want:
            raise ParseError(f"{name} takes {want} argument(s), got {len(args)}", off)
        return Call(name, tuple(args))

    def variable(self, name, off):
        mt = re.fullmatch(r"([xywz])(\d+)", name)
        if not mt:
            raise ParseError(f"unknown identifier {name!r}", off)
        k = int(mt.group(2))
        limit = self.dim_m if mt.group(1) in "xy" else self.dim_n
        if not 1 <= k <= limit:
            raise ParseError(f"variable {name!r} out of range (1..{limit})", off)
        return Var(name)


def parse_expr(text, dim_m=1, dim_n=1):
    """Parse ``text`` into an AST; raises :class:`ParseError` with a byte offset."""
    return _Parser(text, dim_m, dim_n).parse()


# -- printing -------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _fmt_num(v):
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def to_text(node, parent=0, right=False):
    """Parseable text for ``node`` (round-trips through :func:`parse_expr`)."""
    if isinstance(node, Num):
        s = _fmt_num(node.value)
        return f"({s})" if node.value < 0 else s
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.name}({', '.join(to_text(a) for a in node.args)})"
    if isinstance(node, Pow):
        return f"{to_text(node.base, 4)}^{_fmt_num(node.exponent)}"
    prec = _PREC[node.op]
    s = f"{to_text(node.left, prec)} {node.op} {to_text(node.right, prec, True)}"
    if prec < parent or (right and prec == parent):
        s = f"({s})"
    return s


# -- evaluation -----------------------------------------------------------


def _mul(a, b):
    with np.errstate(invalid="ignore", over="ignore"):
        out = np.multiply(a, b)
    zero = ((a == 0) & ~np.isfinite(b)) | ((b == 0) & ~np.isfinite(a))
    if np.any(zero):
        out = np.where(zero, 0.0, out)
    return out


def _div(a, b):
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = np.divide(a, b)
    zero = (a == 0) & ((b == 0) | ~np.isfinite(b))
    if np.any(zero):
        out = np.where(zero, 0.0, out)
    return out


def _pow(a, e):
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if float(e).is_integer():
            return np.power(a, int(e)) if e >= 0 else 1.0 / np.power(a, int(-e))
        return np.power(a, e)


def _call(name, args):
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if name == "abs":
            return np.abs(args[0])
        if name == "exp":
            return np.exp(args[0])
        if name == "log":
            return np.log(args[0])
        if name == "sqrt":
            return np.sqrt(args[0])
        if name == "neg":
            return np.negative(args[0])
        if name == "step":
            return np.where(args[0] >= 0, 1.0, 0.0)
        if name == "min":
            return np.minimum(args[0], args[1])
        if name == "max":
            return np.maximum(args[0], args[1])
    raise ExprError(f"unknown function {name!r}")


def evaluate(node, env):
    """Evaluate ``node`` with numpy broadcasting; ``env`` maps names to arrays.

    Non-finite results are returned as-is; callers decide how to treat poles.
    """
    if isinstance(node, Num):
        return np.float64(node.value)
    if isinstance(node, Var):
        try:
            return env[node.name]
        except KeyError:
            raise ExprError(f"no value bound for {node.name}") from None
    if isinstance(node, BinOp):
        a, b = evaluate(node.left, env), evaluate(node.right, env)
        if node.op == "+":
            with np.errstate(invalid="ignore"):
                return np.add(a, b)
        if node.op == "-":
            with np.errstate(invalid="ignore"):
                return np.subtract(a, b)
        if node.op == "*":
            return _mul(a, b)
        return _div(a, b)
    if isinstance(node, Pow):
        return _pow(evaluate(node.base, env), node.exponent)
    return _call(node.name, [evaluate(a, env) for a in node.args])


# -- construction helpers with light simplification -----------------------

ZERO, ONE = Num(0.0), Num(1.0)


def _is(node, v):
    return isinstance(node, Num) and node.value == v


def add(a, b):
    if _is(a, 0):
        return b
    if _is(b, 0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    return BinOp("+", a, b)


def sub(a, b):
    if _is(b, 0):
        return a
    if _is(a, 0):
        return neg(b)
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    return BinOp("-", a, b)


def mul(a, b):
    if _is(a, 0) or _is(b, 0):
        return ZERO
    if _is(a, 1):
        return b
    if _is(b, 1):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    return BinOp("*", a, b)


def div(a, b):
    if _is(a, 0):
        return ZERO
    if _is(b, 1):
        return a
    if isinstance(a, Num) and isinstance(b, Num) and b.value != 0:
        return Num(a.value / b.value)
    return BinOp("/", a, b)


def neg(a):
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Call) and a.name == "neg":
        return a.args[0]
    return Call("neg", (a,))


def power(a, e):
    if e == 0:
        return ONE
    if e == 1:
        return a
    if isinstance(a, Num):
        return Num(a.value**e)
    return Pow(a, float(e))


# -- differentiation ------------------------------------------------------


def diff(node, var):
    """Symbolic partial derivative of ``node`` with respect to variable ``var``.

    Kinks and jumps (abs, step, min, max) are only allowed in arguments that do
    not involve ``var``; there the derivative is zero.
    """
    if var not in variables(node):
        return ZERO
    if isinstance(node, Var):
        return ONE
    if isinstance(node, BinOp):
        da, db = diff(node.left, var), diff(node.right, var)
        a, b = node.left, node.right
        if node.op == "+":
            return add(da, db)
        if node.op == "-":
            return sub(da, db)
        if node.op == "*":
            return add(mul(da, b), mul(a, db))
        # (a/b)' = a'/b - a b' / b^2
        return sub(div(da, b), div(mul(a, db), power(b, 2)))
    if isinstance(node, Pow):
        e = node.exponent
        return mul(mul(Num(e), power(node.base, e - 1)), diff(node.base, var))
    name, arg = node.name, node.args[0]
    if name in NONSMOOTH_FUNCS:
        raise NonSmoothError(f"{name}(...) depends on {var}; not differentiable")
    d = diff(arg, var)
    if name == "neg":
        return neg(d)
    if name == "exp":
        return mul(node, d)
    if name == "log":
        return div(d, arg)
    if name == "sqrt":
        return div(d, mul(Num(2.0), node))
    raise ExprError(f"cannot differentiate {name}")


def substitute(node, mapping):
    """Rename variables according to ``mapping`` (name -> name)."""
    if isinstance(node, Var):
        return Var(mapping.get(node.name, node.name))
    if isinstance(node, Num):
        return node
    if isinstance(node, BinOp):
        return BinOp(node.op, substitute(node.left, mapping), substitute(node.right, mapping))
    if isinstance(node, Pow):
        return Pow(substitute(node.base, mapping), node.exponent)
    return Call(node.name, tuple(substitute(a, mapping) for a in node.args))


def swap_mapping(dim_m, dim_n):
    """Variable renaming realising ``(x, y, w, z) -> (y, x, z, w)``."""
    mapping = {}
    for k in range(1, dim_m + 1):
        mapping[f"x{k}"], mapping[f"y{k}"] = f"y{k}", f"x{k}"
    for c in range(1, dim_n + 1):
        mapping[f"w{c}"], mapping[f"z{c}"] = f"z{c}", f"w{c}"
    return mapping


def is_finite_number(v):
    return isinstance(v, (int, float)) and math.isfinite(v)
