"""Exact exponential polynomials sum_r p_r(x) e^{r x} with rational data,
and a parser for the small expression language used on the command line.

Grammar: numbers, ``x``, ``exp(c*x)``, ``sinh(c*x)``, ``cosh(c*x)``, sums,
differences, products, division by constants and non-negative integer powers.
"""
from __future__ import annotations

import ast
from fractions import Fraction
from math import comb, factorial
from typing import Dict, Tuple

import numpy as np

Poly = Tuple[Fraction, ...]  # ascending coefficients


def _trim(p) -> Poly:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return tuple(p)


def _padd(p: Poly, q: Poly) -> Poly:
    n = max(len(p), len(q))
    return _trim((p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n))


def _pmul(p: Poly, q: Poly) -> Poly:
    if not p or not q:
        return ()
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return _trim(out)


class ExpPoly:
    """Immutable map rate -> polynomial (ascending Fraction coefficients)."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Dict[Fraction, Poly] = None):
        clean = {}
        for r, p in (terms or {}).items():
            p = _trim(Fraction(c) for c in p)
            if p:
                r = Fraction(r)
                clean[r] = _padd(clean.get(r, ()), p)
                if not clean[r]:
                    del clean[r]
        self._terms = clean

    @classmethod
    def const(cls, c) -> "ExpPoly":
        return cls({Fraction(0): (Fraction(c),)})

    @classmethod
    def monomial(cls, k: int, rate=0, coeff=1) -> "ExpPoly":
        return cls({Fraction(rate): (Fraction(0),) * k + (Fraction(coeff),)})

    @classmethod
    def x(cls) -> "ExpPoly":
        return cls.monomial(1)

    @classmethod
    def exp(cls, rate) -> "ExpPoly":
        return cls.monomial(0, rate)

    @property
    def terms(self) -> Dict[Fraction, Poly]:
        return dict(self._terms)

    def part(self, rate) -> Poly:
        return self._terms.get(Fraction(rate), ())

    def without(self, rate) -> "ExpPoly":
        return ExpPoly({r: p for r, p in self._terms.items() if r != Fraction(rate)})

    def is_zero(self) -> bool:
        return not self._terms

    def __eq__(self, other):
        return isinstance(other, ExpPoly) and self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __add__(self, other):
        other = _coerce(other)
        out = dict(self._terms)
        for r, p in other._terms.items():
            out[r] = _padd(out.get(r, ()), p)
        return ExpPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return ExpPoly({r: tuple(-c for c in p) for r, p in self._terms.items()})

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        other = _coerce(other)
        out: Dict[Fraction, Poly] = {}
        for r1, p1 in self._terms.items():
            for r2, p2 in other._terms.items():
                out[r1 + r2] = _padd(out.get(r1 + r2, ()), _pmul(p1, p2))
        return ExpPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        out = ExpPoly.const(1)
        for _ in range(k):
            out = out * self
        return out

    def integral(self) -> "ExpPoly":
        """x -> int_0^x self(t) dt, in closed form."""
        out = ExpPoly()
        for r, p in self._terms.items():
            for k, c in enumerate(p):
                out = out + c * _int_mono(k, r)
        return out

    def convolve(self, other: "ExpPoly") -> "ExpPoly":
        """x -> int_0^x self(t) other(x - t) dt, in closed form."""
        other = _coerce(other)
        out = ExpPoly()
        for r, p in self._terms.items():
            for s, q in other._terms.items():
                for a, ca in enumerate(p):
                    for b, cb in enumerate(q):
                        if ca and cb:
                            out = out + ca * cb * _conv_mono(a, r, b, s)
        return out

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        total = np.zeros_like(x)
        for r, p in sorted(self._terms.items()):
            poly = np.zeros_like(x)
            for c in reversed(p):
                poly = poly * x + float(c)
            total = total + (poly * np.exp(float(r) * x) if r != 0 else poly)
        return float(total) if total.ndim == 0 else total

    def __repr__(self):
        if not self._terms:
            return "0"
        parts = []
        for r, p in sorted(self._terms.items()):
            poly = " + ".join(f"{c}*x^{k}" if k else f"{c}" for k, c in enumerate(p) if c)
            parts.append(f"({poly})" + (f"*exp({r}*x)" if r else ""))
        return " + ".join(parts)


def _coerce(v) -> ExpPoly:
    if isinstance(v, ExpPoly):
        return v
    if isinstance(v, (int, Fraction)):
        return ExpPoly.const(v)
    if isinstance(v, float):
        return ExpPoly.const(Fraction(repr(v)))
    raise TypeError(f"cannot use {type(v).__name__} in an exponential polynomial")


def _int_mono(k: int, r: Fraction) -> ExpPoly:
    """int_0^x t^k e^{r t} dt."""
    if r == 0:
        return ExpPoly.monomial(k + 1, 0, Fraction(1, k + 1))
    # antiderivative e^{rt} sum_j (-1)^j k!/(k-j)! t^{k-j} / r^{j+1}
    poly = [Fraction(0)] * (k + 1)
    for j in range(k + 1):
        poly[k - j] = Fraction((-1) ** j * factorial(k), factorial(k - j)) / r ** (j + 1)
    anti = ExpPoly({r: tuple(poly)})
    return anti - ExpPoly.const(Fraction((-1) ** k * factorial(k)) / r ** (k + 1))


def _conv_mono(a: int, r: Fraction, b: int, s: Fraction) -> ExpPoly:
    """(t^a e^{rt}) * (t^b e^{st}) = e^{sx} sum_c C(b,c) (-1)^c x^{b-c} int_0^x t^{a+c} e^{(r-s)t} dt."""
    out = ExpPoly()
    for c in range(b + 1):
        coeff = Fraction(comb(b, c) * (-1) ** c)
        out = out + coeff * ExpPoly.monomial(b - c, s) * _int_mono(a + c, r - s)
    return out


# -- parser -------------------------------------------------------------------

class ExprError(ValueError):
    pass


_FUNCS = ("exp", "sinh", "cosh")


def _const_of(node) -> Fraction:
    e = _build(node)
    t = e.terms
    if not t:
        return Fraction(0)
    if set(t) != {Fraction(0)} or len(t[Fraction(0)]) != 1:
        raise ExprError("expected a constant")
    return t[Fraction(0)][0]


def _linear_rate(node) -> Fraction:
    e = _build(node)
    t = e.terms
    if not t:
        return Fraction(0)
    if set(t) != {Fraction(0)} or len(t[Fraction(0)]) != 2 or t[Fraction(0)][0] != 0:
        raise ExprError("exp/sinh/cosh arguments must be of the form c*x")
    return t[Fraction(0)][1]


def _build(node) -> ExpPoly:
    if isinstance(node, ast.Expression):
        return _build(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
            and not isinstance(node.value, bool):
        return ExpPoly.const(Fraction(repr(node.value)) if isinstance(node.value, float) else node.value)
    if isinstance(node, ast.Name):
        if node.id == "x":
            return ExpPoly.x()
        raise ExprError(f"unknown name {node.id!r}; the variable is 'x'")
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _build(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp):
        if isinstance(node.op, ast.Add):
            return _build(node.left) + _build(node.right)
        if isinstance(node.op, ast.Sub):
            return _build(node.left) - _build(node.right)
        if isinstance(node.op, ast.Mult):
            return _build(node.left) * _build(node.right)
        if isinstance(node.op, ast.Div):
            c = _const_of(node.right)
            if c == 0:
                raise ExprError("division by zero")
            return _build(node.left) * ExpPoly.const(1 / c)
        if isinstance(node.op, ast.Pow):
            k = _const_of(node.right)
            if k.denominator != 1 or k < 0:
                raise ExprError("powers must be non-negative integers")
            return _build(node.left) ** int(k)
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS:
        if len(node.args) != 1 or node.keywords:
            raise ExprError(f"{node.func.id} takes one argument")
        c = _linear_rate(node.args[0])
        up, down = ExpPoly.exp(c), ExpPoly.exp(-c)
        if node.func.id == "exp":
            return up
        half = ExpPoly.const(Fraction(1, 2))
        return half * (up - down) if node.func.id == "sinh" else half * (up + down)
    raise ExprError(f"unsupported syntax: {ast.dump(node)[:60]}")


def parse(text: str) -> ExpPoly:
    """Parse an expression in x into an exact ExpPoly."""
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ExprError(f"syntax error at column {exc.offset}: {exc.msg}") from None
    return _build(tree)


# -- numeric expressions in several variables -----------------------------------

_NUMERIC_FUNCS = {"exp": np.exp, "log": np.log, "sqrt": np.sqrt, "sinh": np.sinh,
                  "cosh": np.cosh, "tanh": np.tanh, "abs": np.abs}
_NUMERIC_CONSTS = {"pi": np.pi, "e": np.e}


def numeric(text: str, n: int):
    """Compile an expression in x1..xn (or x when n = 1) to f(x), x[..., n] -> array."""
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ExprError(f"syntax error at column {exc.offset}: {exc.msg}") from None
    names = {f"x{i + 1}": i for i in range(n)}
    if n == 1:
        names["x"] = 0

    def ev(node, x):
        if isinstance(node, ast.Expression):
            return ev(node.body, x)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
                and not isinstance(node.value, bool):
            return float(node.value)
        if isinstance(node, ast.Name):
            if node.id in names:
                return x[..., names[node.id]]
            if node.id in _NUMERIC_CONSTS:
                return _NUMERIC_CONSTS[node.id]
            raise ExprError(f"unknown name {node.id!r}")
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand, x)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            ops = {ast.Add: np.add, ast.Sub: np.subtract, ast.Mult: np.multiply,
                   ast.Div: np.divide, ast.Pow: np.power}
            op = ops.get(type(node.op))
            if op is not None:
                return op(ev(node.left, x), ev(node.right, x))
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) \
                and node.func.id in _NUMERIC_FUNCS and len(node.args) == 1 and not node.keywords:
            return _NUMERIC_FUNCS[node.func.id](ev(node.args[0], x))
        raise ExprError(f"unsupported syntax: {ast.dump(node)[:60]}")

    ev(tree, np.ones(n))  # reject bad names early

    def f(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(ev(tree, x), x.shape[:-1]) * 1.0

    return f
