"""Closed-form scalar fields on a coordinate chart.

Expressions are parsed from text with the grammar::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := ('+' | '-')* base ('^' integer)?
    base   := number | ident | '(' expr ')' | func '(' expr ')'
    func   := sin | cos | exp

Identifiers are chart coordinates or ``i`` (the imaginary unit).  Parsed
expressions compile to a flat register program that the jet kernel
(:mod:`gencontact.kernels`) evaluates to value, gradient and Hessian in one
pass.  Tensor-valued fields (:class:`Field`) are evaluable maps from a point
to a :class:`~gencontact.jets.Jet`; they are built from expression arrays or
by composing other fields.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import _jetcore_py as ops
from . import kernels
from .jets import Jet


class ExpressionSyntaxError(ValueError):
    def __init__(self, message: str, offset: int, src: str):
        super().__init__(f"{message} at offset {offset}: {src!r}")
        self.offset = offset
        self.src = src


class UnknownIdentifierError(ValueError):
    pass


class DomainError(ArithmeticError):
    """Evaluation hit a pole (division by a vanishing value)."""


@dataclass(frozen=True)
class ChartSpec:
    names: tuple[str, ...]

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if not names:
            raise ValueError("a chart needs at least one coordinate")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate coordinate names in {names}")
        for n in names:
            if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", n) or n in ("i", "sin", "cos", "exp"):
                raise ValueError(f"invalid coordinate name {n!r}")

    @property
    def dim(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def __add__(self, other: "ChartSpec") -> "ChartSpec":
        return ChartSpec(self.names + other.names)

    def product(self, other: "ChartSpec") -> "ChartSpec":
        """Concatenated chart; clashing names of ``other`` get the suffix ``2`` (then ``3``, ...)."""
        names = list(self.names)
        for n in other.names:
            new, k = n, 2
            while new in names:
                new, k = f"{n}{k}", k + 1
            names.append(new)
        return ChartSpec(tuple(names))


# ---------------------------------------------------------------------------
# AST

@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Imag:
    pass


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: object


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _fmt_num(v: Fraction) -> str:
    if v.denominator == 1:
        return str(v.numerator)
    # literals are decimal, so the denominator divides a power of ten
    places = 0
    while (v * 10**places).denominator != 1:
        places += 1
    digits = str(v.numerator * 10**places // v.denominator).rjust(places + 1, "0")
    return f"{digits[:-places]}.{digits[-places:]}"


def to_source(node) -> str:
    """Print an AST so that parsing the text gives back an equal AST."""
    if isinstance(node, Num):
        return _fmt_num(node.value)
    if isinstance(node, Imag):
        return "i"
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    if isinstance(node, Neg):
        inner = to_source(node.operand)
        if isinstance(node.operand, BinOp):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, Pow):
        base = to_source(node.base)
        if not isinstance(node.base, (Var, Imag, Call, Num)):
            base = f"({base})"
        return f"{base}^{node.exponent}"
    if isinstance(node, BinOp):
        p = _PREC[node.op]
        left = to_source(node.left)
        if isinstance(node.left, BinOp) and _PREC[node.left.op] < p:
            left = f"({left})"
        right = to_source(node.right)
        if isinstance(node.right, BinOp) and _PREC[node.right.op] <= p:
            right = f"({right})"
        if isinstance(node.right, Neg):
            right = f"({right})"
        return f"{left} {node.op} {right}"
    raise TypeError(f"not an expression node: {node!r}")


# ---------------------------------------------------------------------------
# parser

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:\.\d*)?|\.\d+)|(?P<id>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))")
_FUNCS = ("sin", "cos", "exp")


class _Parser:
    def __init__(self, src: str, chart: ChartSpec):
        self.src = src
        self.chart = chart
        self.toks = []
        pos = 0
        stripped = src.rstrip()
        while pos < len(stripped):
            m = _TOKEN.match(stripped, pos)
            if m is None or m.end() == pos:
                bad = len(stripped[:pos]) + (len(stripped[pos:]) - len(stripped[pos:].lstrip()))
                raise ExpressionSyntaxError(f"unexpected character {stripped[bad]!r}", self._byte(bad), src)
            kind = m.lastgroup
            self.toks.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.toks.append(("end", "", len(stripped)))
        self.k = 0

    def _byte(self, char_offset: int) -> int:
        return len(self.src[:char_offset].encode())

    def peek(self):
        return self.toks[self.k]

    def take(self):
        t = self.toks[self.k]
        self.k += 1
        return t

    def error(self, msg, tok):
        raise ExpressionSyntaxError(msg, self._byte(tok[2]), self.src)

    def expect(self, text):
        t = self.take()
        if t[1] != text:
            self.error(f"expected {text!r}, found {t[1] or 'end of input'!r}", t)

    def parse(self):
        node = self.expr()
        t = self.peek()
        if t[0] != "end":
            self.error(f"unexpected token {t[1]!r}", t)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self):
        t = self.peek()
        if t[0] == "op" and t[1] in ("+", "-"):
            self.take()
            inner = self.factor()
            return Neg(inner) if t[1] == "-" else inner
        base = self.base()
        if self.peek()[1] == "^":
            self.take()
            sign = 1
            if self.peek()[1] == "-":
                self.take()
                sign = -1
            t = self.take()
            if t[0] != "num" or not t[1].isdigit():
                self.error("exponent must be an integer literal", t)
            return Pow(base, sign * int(t[1]))
        return base

    def base(self):
        t = self.take()
        kind, text, _ = t
        if kind == "num":
            return Num(Fraction(text))
        if kind == "id":
            if text in _FUNCS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            if text == "i":
                return Imag()
            if text not in self.chart.names:
                raise UnknownIdentifierError(f"unknown identifier {text!r} (chart {self.chart.names})")
            return Var(text)
        if text == "(":
            node = self.expr()
            self.expect(")")
            return node
        self.error(f"unexpected {text or 'end of input'!r}", t)


def parse_expr(src: str, chart: ChartSpec):
    return _Parser(src, chart).parse()


# ---------------------------------------------------------------------------
# compilation to register programs


@dataclass
class Program:
    ops: np.ndarray
    arg_a: np.ndarray
    arg_b: np.ndarray
    arg_k: np.ndarray
    consts: np.ndarray
    outputs: np.ndarray
    dim: int

    def run(self, point, backend: str | None = None):
        fn = kernels.BACKENDS[backend] if backend else kernels.eval_program
        p = np.ascontiguousarray(point, dtype=float)
        if p.shape != (self.dim,):
            raise ValueError(f"point has shape {p.shape}, chart dimension is {self.dim}")
        status, v, g, h = fn(self.ops, self.arg_a, self.arg_b, self.arg_k, self.consts, self.outputs, p)
        if status >= 0:
            raise DomainError(f"division by a vanishing value at point {tuple(p)}")
        # rounding in the kernels can differ between h_ij and h_ji; averaging makes H exactly symmetric
        h = 0.5 * (h + np.swapaxes(h, 1, 2))
        return v, g, h


class _Compiler:
    _UNARY = {"sin": ops.OP_SIN, "cos": ops.OP_COS, "exp": ops.OP_EXP}
    _BIN = {"+": ops.OP_ADD, "-": ops.OP_SUB, "*": ops.OP_MUL, "/": ops.OP_DIV}

    def __init__(self, chart: ChartSpec):
        self.chart = chart
        self.code: list[tuple[int, int, int, int]] = []
        self.consts: list[complex] = []
        self.memo: dict = {}

    def emit(self, op, a=0, b=0, k=0):
        key = (op, a, b, k)
        if key in self.memo:
            return self.memo[key]
        self.code.append(key)
        self.memo[key] = len(self.code) - 1
        return len(self.code) - 1

    def const(self, c: complex):
        if c not in self.consts:
            self.consts.append(c)
        return self.emit(ops.OP_CONST, k=self.consts.index(c))

    def visit(self, node):
        if isinstance(node, Num):
            return self.const(complex(float(node.value)))
        if isinstance(node, Imag):
            return self.const(1j)
        if isinstance(node, Var):
            return self.emit(ops.OP_VAR, k=self.chart.index(node.name))
        if isinstance(node, Neg):
            return self.emit(ops.OP_NEG, self.visit(node.operand))
        if isinstance(node, Pow):
            return self.emit(ops.OP_POWI, self.visit(node.base), k=node.exponent)
        if isinstance(node, Call):
            return self.emit(self._UNARY[node.func], self.visit(node.arg))
        if isinstance(node, BinOp):
            return self.emit(self._BIN[node.op], self.visit(node.left), self.visit(node.right))
        raise TypeError(node)

    def finish(self, outputs) -> Program:
        code = np.array(self.code, dtype=np.int64).reshape(-1, 4)
        return Program(
            ops=np.ascontiguousarray(code[:, 0], dtype=np.int32),
            arg_a=np.ascontiguousarray(code[:, 1], dtype=np.int32),
            arg_b=np.ascontiguousarray(code[:, 2], dtype=np.int32),
            arg_k=np.ascontiguousarray(code[:, 3], dtype=np.int64),
            consts=np.array(self.consts or [0j], dtype=complex),
            outputs=np.array(outputs, dtype=np.int32),
            dim=self.chart.dim,
        )


def compile_exprs(asts: Sequence, chart: ChartSpec) -> Program:
    c = _Compiler(chart)
    outs = [c.visit(a) for a in asts]
    return c.finish(outs)


# ---------------------------------------------------------------------------
# scalar fields


@dataclass(frozen=True)
class ScalarField:
    ast: object
    chart: ChartSpec
    program: Program = field(compare=False, repr=False, default=None)

    def __post_init__(self):
        if self.program is None:
            object.__setattr__(self, "program", compile_exprs([self.ast], self.chart))

    @property
    def source(self) -> str:
        return to_source(self.ast)

    def jet(self, point, backend: str | None = None) -> Jet:
        v, g, h = self.program.run(point, backend)
        return Jet(v[0], g[0], h[0], 2, self.chart.dim)

    def __call__(self, point) -> complex:
        return complex(self.jet(point).val)


def parse_field(src: str, chart: ChartSpec) -> ScalarField:
    return ScalarField(parse_expr(src, chart), chart)


def eval_jet(f: ScalarField, point) -> Jet:
    return f.jet(np.asarray(point, dtype=float))


def fd_gradient(f: ScalarField, point, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient; an oracle for testing :func:`eval_jet`."""
    if h <= 0:
        raise ValueError("step must be positive")
    p = np.asarray(point, dtype=float)
    out = np.empty(len(p), dtype=complex)
    for k in range(len(p)):
        e = np.zeros_like(p)
        e[k] = h
        out[k] = (f(p + e) - f(p - e)) / (2 * h)
    return out


# ---------------------------------------------------------------------------
# tensor fields


class Field:
    """A point-dependent tensor, evaluated to a :class:`Jet`.

    Evaluations are cached per point; a field never changes after
    construction, so the cache is safe to share.
    """

    def __init__(self, fn: Callable[[np.ndarray], Jet], shape: tuple, dim: int, name: str = ""):
        self._fn = fn
        self.shape = tuple(shape)
        self.dim = dim
        self.name = name
        self._cached = lru_cache(maxsize=256)(self._eval_key)

    def _eval_key(self, key):
        jet = self._fn(np.array(key, dtype=float))
        if jet.shape != self.shape:
            raise ValueError(f"field {self.name or '?'} produced shape {jet.shape}, expected {self.shape}")
        return jet

    def at(self, point) -> Jet:
        p = np.asarray(point, dtype=float)
        if p.shape != (self.dim,):
            raise ValueError(f"point has shape {p.shape}, field dimension is {self.dim}")
        return self._cached(tuple(p.tolist()))

    def value(self, point) -> np.ndarray:
        return self.at(point).val

    # constructors -------------------------------------------------------
    @classmethod
    def from_exprs(cls, exprs, chart: ChartSpec, name: str = "") -> "Field":
        """Field whose components are expression strings (or ScalarFields) in an array."""
        arr = np.asarray(exprs, dtype=object)
        asts = [e.ast if isinstance(e, ScalarField) else parse_expr(str(e), chart) for e in arr.ravel()]
        prog = compile_exprs(asts, chart)
        shape = arr.shape
        d = chart.dim

        def fn(p):
            v, g, h = prog.run(p)
            return Jet(v.reshape(shape), np.moveaxis(g, 1, 0).reshape((d,) + shape),
                       np.moveaxis(h, (1, 2), (0, 1)).reshape((d, d) + shape), 2, d)

        return cls(fn, shape, d, name)

    @classmethod
    def constant(cls, value, dim: int, name: str = "") -> "Field":
        j = Jet.const(value, dim)
        return cls(lambda p: j, j.shape, dim, name)

    @classmethod
    def zeros(cls, shape, dim: int) -> "Field":
        return cls.constant(np.zeros(shape, complex), dim)

    def map(self, fn: Callable[[Jet], Jet], shape=None, name: str = "") -> "Field":
        shape = self.shape if shape is None else shape
        return Field(lambda p: fn(self.at(p)), shape, self.dim, name)

    @staticmethod
    def combine(fn: Callable[..., Jet], fields: Sequence["Field"], shape, name: str = "") -> "Field":
        dim = fields[0].dim
        if any(f.dim != dim for f in fields):
            raise ValueError("fields live on different charts")
        return Field(lambda p: fn(*(f.at(p) for f in fields)), shape, dim, name)

    def lift(self, dim: int, offset: int) -> "Field":
        """The same tensor viewed on a product chart of dimension ``dim``."""
        base = self

        def fn(p):
            return base.at(p[offset:offset + base.dim]).embed(dim, offset)

        return Field(fn, self.shape, dim, self.name)

    def __repr__(self):
        return f"Field({self.name or '?'}, shape={self.shape}, dim={self.dim})"
