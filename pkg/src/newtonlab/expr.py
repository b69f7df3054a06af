"""Expression trees for entire functions of one complex variable ``z``.

Formulas are parsed from text, differentiated symbolically, simplified by
constant folding and a handful of identities, and compiled to vectorized
numpy evaluators that totalize the result on the Riemann sphere: any value
that overflows, is NaN, or comes from a (near-)zero denominator becomes the
point at infinity, represented as :data:`INF`.
"""
from __future__ import annotations

import cmath
import functools
import re
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

#: Canonical representation of the point at infinity.
INF = complex(np.inf, 0.0)

#: Values with modulus beyond this are treated as infinity.
HUGE = 1e300
#: Denominators with modulus below this produce infinity.
TINY = 1e-300


class ParseError(ValueError):
    """Raised for malformed formulas; ``offset`` is the byte offset of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


# --------------------------------------------------------------------------
# AST


class Expr:
    """Base class of all expression nodes."""

    def __add__(self, other):
        return Add(self, _coerce(other))

    def __radd__(self, other):
        return Add(_coerce(other), self)

    def __sub__(self, other):
        return Sub(self, _coerce(other))

    def __rsub__(self, other):
        return Sub(_coerce(other), self)

    def __mul__(self, other):
        return Mul(self, _coerce(other))

    def __rmul__(self, other):
        return Mul(_coerce(other), self)

    def __truediv__(self, other):
        return Div(self, _coerce(other))

    def __neg__(self):
        return Neg(self)

    def __pow__(self, n: int):
        return Pow(self, n)

    def __str__(self) -> str:
        return to_string(self)


def _coerce(value) -> Expr:
    if isinstance(value, Expr):
        return value
    return Const(complex(value))


@dataclass(frozen=True, eq=True, repr=True)
class Const(Expr):
    value: complex

    def __post_init__(self):
        v = complex(self.value)
        if not (np.isfinite(v.real) and np.isfinite(v.imag)):
            raise ValueError(f"constants must be finite, got {self.value!r}")
        object.__setattr__(self, "value", v)


@dataclass(frozen=True)
class Var(Expr):
    """The independent variable ``z``."""


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Exp(Expr):
    arg: Expr


@dataclass(frozen=True)
class Sin(Expr):
    arg: Expr


@dataclass(frozen=True)
class Cos(Expr):
    arg: Expr


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Div(Expr):
    left: Expr
    right: Expr

    def __post_init__(self):
        if isinstance(self.right, Const) and self.right.value == 0:
            raise ZeroDivisionError("division by the constant 0")


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int

    def __post_init__(self):
        if not isinstance(self.exponent, (int, np.integer)) or isinstance(self.exponent, bool):
            raise TypeError("exponent must be an integer")
        if self.exponent < 0:
            raise ValueError("exponent must be non-negative")
        object.__setattr__(self, "exponent", int(self.exponent))


z = Var()

UNARY = (Neg, Exp, Sin, Cos)
BINARY = (Add, Sub, Mul, Div)
TRANSCENDENTAL = (Exp, Sin, Cos)
_FUNCS = {"exp": Exp, "sin": Sin, "cos": Cos}


def children(e: Expr) -> tuple:
    if isinstance(e, UNARY):
        return (e.arg,)
    if isinstance(e, BINARY):
        return (e.left, e.right)
    if isinstance(e, Pow):
        return (e.base,)
    return ()


def walk(e: Expr):
    """Yield every node of ``e`` (pre-order)."""
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def is_transcendental(e: Expr) -> bool:
    return any(isinstance(node, TRANSCENDENTAL) for node in walk(e))


def is_constant(e: Expr) -> bool:
    return not any(isinstance(node, Var) for node in walk(e))


# --------------------------------------------------------------------------
# Parsing

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?i?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    raw = text.encode("utf-8")
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", len(text[:pos].encode()))
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), len(text[: m.start()].encode())))
        pos = m.end()
    tokens.append(("end", "", len(raw)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, text, off = self.take()
        if text != value:
            found = "end of input" if kind == "end" else repr(text)
            raise ParseError(f"expected {value!r}, found {found}", off)

    def parse(self) -> Expr:
        e = self.expr()
        kind, text, off = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {text!r}", off)
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            right = self.term()
            left = Add(left, right) if op == "+" else Sub(left, right)
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.peek()[1] in ("*", "/"):
            _, op, off = self.take()
            right = self.unary()
            if op == "*":
                left = Mul(left, right)
            else:
                if isinstance(right, Const) and right.value == 0:
                    raise ParseError("division by zero", off)
                left = Div(left, right)
        return left

    def unary(self) -> Expr:
        if self.peek()[1] == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            return Pow(base, self.exponent())
        return base

    def exponent(self) -> int:
        kind, text, off = self.peek()
        if text == "(":
            self.take()
            n = self.exponent()
            self.expect(")")
            return n
        if text == "-":
            raise ParseError("negative exponent", off)
        if kind != "number":
            raise ParseError("exponent must be a non-negative integer literal", off)
        self.take()
        if not text.isdigit():
            raise ParseError(f"non-integer exponent {text!r}", off)
        return int(text)

    def atom(self) -> Expr:
        kind, text, off = self.take()
        if kind == "number":
            if text.endswith("i"):
                return Const(complex(0.0, float(text[:-1])))
            return Const(complex(float(text)))
        if kind == "name":
            if text == "z":
                return Var()
            if text == "i":
                return Const(1j)
            if text in _FUNCS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return _FUNCS[text](arg)
            raise ParseError(f"unknown identifier {text!r}", off)
        if text == "(":
            e = self.expr()
            self.expect(")")
            return e
        if text == "-":
            return Neg(self.unary())
        found = "end of input" if kind == "end" else repr(text)
        raise ParseError(f"unexpected {found}", off)


def parse_function(text: str) -> Expr:
    """Parse a formula in ``z`` such as ``"z^3 - 2*z + 2"`` or ``"z*exp(z)"``.

    Precedence from tightest: ``^``, unary minus, ``* /``, ``+ -``. Exponents are
    non-negative integer literals, optionally parenthesized. Implicit
    multiplication is not supported.
    """
    if not isinstance(text, str):
        raise TypeError("formula must be a string")
    return _Parser(text).parse()


# --------------------------------------------------------------------------
# Printing

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4}


def _fmt_const(c: complex) -> str:
    if c.imag == 0:
        return repr(c.real) if c.real != int(c.real) or abs(c.real) > 1e15 else str(int(c.real))
    if c.real == 0:
        return f"{c.imag!r}i"
    return f"({c.real!r}+{c.imag!r}i)" if c.imag > 0 else f"({c.real!r}-{-c.imag!r}i)"


def to_string(e: Expr) -> str:
    """Render ``e`` in the input grammar; ``parse_function(to_string(e))`` evaluates like ``e``."""
    if isinstance(e, Const):
        s = _fmt_const(e.value)
        return f"({s})" if s.startswith("-") else s
    if isinstance(e, Var):
        return "z"
    if isinstance(e, TRANSCENDENTAL):
        return f"{type(e).__name__.lower()}({to_string(e.arg)})"
    if isinstance(e, Neg):
        return f"-{_wrap(e.arg, 3, strict=False)}"
    if isinstance(e, Pow):
        return f"{_wrap(e.base, 5, strict=False)}^{e.exponent}"
    op = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(e)]
    p = _PREC[type(e)]
    return f"{_wrap(e.left, p, strict=False)} {op} {_wrap(e.right, p, strict=True)}"


def _wrap(e: Expr, prec: int, strict: bool) -> str:
    s = to_string(e)
    ep = _PREC.get(type(e), 10)
    if isinstance(e, Const) and not s.startswith("("):
        ep = 10
    if ep < prec or (strict and ep == prec):
        return f"({s})"
    return s


# --------------------------------------------------------------------------
# Calculus


def differentiate(e: Expr) -> Expr:
    """Symbolic d/dz, simplified."""
    return simplify(_d(e))


def _d(e: Expr) -> Expr:
    if isinstance(e, Const):
        return Const(0)
    if isinstance(e, Var):
        return Const(1)
    if isinstance(e, Neg):
        return Neg(_d(e.arg))
    if isinstance(e, Add):
        return Add(_d(e.left), _d(e.right))
    if isinstance(e, Sub):
        return Sub(_d(e.left), _d(e.right))
    if isinstance(e, Mul):
        return Add(Mul(_d(e.left), e.right), Mul(e.left, _d(e.right)))
    if isinstance(e, Div):
        num = Sub(Mul(_d(e.left), e.right), Mul(e.left, _d(e.right)))
        return Div(num, Pow(e.right, 2))
    if isinstance(e, Pow):
        n = e.exponent
        if n == 0:
            return Const(0)
        return Mul(Mul(Const(n), Pow(e.base, n - 1)), _d(e.base))
    if isinstance(e, Exp):
        return Mul(e, _d(e.arg))
    if isinstance(e, Sin):
        return Mul(Cos(e.arg), _d(e.arg))
    if isinstance(e, Cos):
        return Mul(Neg(Sin(e.arg)), _d(e.arg))
    raise TypeError(f"not an expression node: {e!r}")


def _fold(value: complex, fallback: Expr) -> Expr:
    if cmath.isfinite(value):
        return Const(value)
    return fallback


def _is(e: Expr, value: complex) -> bool:
    return isinstance(e, Const) and e.value == value


def simplify(e: Expr) -> Expr:
    """Constant folding plus the identities x*1, x+0, x*0, x^1, x^0, x/1, --x."""
    if isinstance(e, (Const, Var)):
        return e
    if isinstance(e, Pow):
        b = simplify(e.base)
        if e.exponent == 0:
            return Const(1)
        if e.exponent == 1:
            return b
        if isinstance(b, Const):
            try:
                return _fold(b.value**e.exponent, Pow(b, e.exponent))
            except OverflowError:
                pass
        return Pow(b, e.exponent)
    if isinstance(e, UNARY):
        a = simplify(e.arg)
        if isinstance(e, Neg):
            if isinstance(a, Const):
                return Const(-a.value)
            if isinstance(a, Neg):
                return a.arg
            return Neg(a)
        if isinstance(a, Const):
            fn = {Exp: cmath.exp, Sin: cmath.sin, Cos: cmath.cos}[type(e)]
            try:
                return _fold(fn(a.value), type(e)(a))
            except (OverflowError, ValueError):
                pass
        return type(e)(a)

    left, right = simplify(e.left), simplify(e.right)
    if isinstance(e, Add):
        if isinstance(left, Const) and isinstance(right, Const):
            return _fold(left.value + right.value, Add(left, right))
        if _is(left, 0):
            return right
        if _is(right, 0):
            return left
        return Add(left, right)
    if isinstance(e, Sub):
        if isinstance(left, Const) and isinstance(right, Const):
            return _fold(left.value - right.value, Sub(left, right))
        if _is(right, 0):
            return left
        if _is(left, 0):
            return simplify(Neg(right))
        return Sub(left, right)
    if isinstance(e, Mul):
        if isinstance(left, Const) and isinstance(right, Const):
            return _fold(left.value * right.value, Mul(left, right))
        if _is(left, 0) or _is(right, 0):
            return Const(0)
        if _is(left, 1):
            return right
        if _is(right, 1):
            return left
        return Mul(left, right)
    if isinstance(e, Div):
        if _is(right, 0):
            # keep the unfolded denominator so no literal-zero division appears
            return Div(left, e.right)
        if isinstance(left, Const) and isinstance(right, Const):
            return _fold(left.value / right.value, Div(left, right))
        if _is(right, 1):
            return left
        if _is(left, 0):
            return Const(0)
        return Div(left, right)
    raise TypeError(f"not an expression node: {e!r}")


# --------------------------------------------------------------------------
# Evaluation

ArrayFn = Callable[[np.ndarray], np.ndarray]


def _ipow(a: np.ndarray, n: int) -> np.ndarray:
    if n == 0:
        return np.ones_like(a)
    result = None
    base = a
    while n:
        if n & 1:
            result = base if result is None else result * base
        n >>= 1
        if n:
            base = base * base
    return result


def safe_divide(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    """Elementwise ``num/den`` with (near-)zero denominators sent to :data:`INF`."""
    with np.errstate(all="ignore"):
        out = num / den
    small = np.abs(den) < TINY
    if small.any():
        out = np.where(small, INF, out)
    return out


def totalize(values: np.ndarray) -> np.ndarray:
    """Map NaN, infinite and overflowing entries to :data:`INF`."""
    with np.errstate(all="ignore"):
        bad = ~np.isfinite(values) | (np.abs(values) > HUGE)
    if bad.any():
        values = np.where(bad, INF, values)
    return values


@functools.lru_cache(maxsize=256)
def compile_expr(e: Expr) -> ArrayFn:
    """Compile ``e`` to a function of a complex ndarray, totalized to the sphere."""
    raw = _compile(e)

    def fn(zs: np.ndarray) -> np.ndarray:
        zs = np.asarray(zs, dtype=np.complex128)
        with np.errstate(all="ignore"):
            return totalize(np.asarray(raw(zs), dtype=np.complex128))

    return fn


def _compile(e: Expr) -> ArrayFn:
    if isinstance(e, Const):
        c = e.value
        return lambda zs: np.full(zs.shape, c, dtype=np.complex128)
    if isinstance(e, Var):
        return lambda zs: zs
    if isinstance(e, Pow):
        f, n = _compile(e.base), e.exponent
        return lambda zs: _ipow(f(zs), n)
    if isinstance(e, UNARY):
        f = _compile(e.arg)
        op = {Neg: np.negative, Exp: np.exp, Sin: np.sin, Cos: np.cos}[type(e)]
        return lambda zs: op(f(zs))
    f, g = _compile(e.left), _compile(e.right)
    if isinstance(e, Add):
        return lambda zs: f(zs) + g(zs)
    if isinstance(e, Sub):
        return lambda zs: f(zs) - g(zs)
    if isinstance(e, Mul):
        return lambda zs: f(zs) * g(zs)
    return lambda zs: safe_divide(f(zs), g(zs))


def evaluate(e: Expr, point: complex) -> complex:
    """Evaluate ``e`` at a finite point; returns :data:`INF` for the point at infinity."""
    return complex(compile_expr(e)(np.array([point], dtype=np.complex128))[0])


def is_infinite(value) -> bool:
    """True for the point at infinity (scalar or elementwise for arrays)."""
    if np.ndim(value):
        return ~np.isfinite(value)
    return not cmath.isfinite(value)


ExprLike = Union[Expr, str]


def as_expr(e: ExprLike) -> Expr:
    return parse_function(e) if isinstance(e, str) else e
