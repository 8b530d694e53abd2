"""Numeric-only expression trees for coordinate maps.

These cover what the exact kernel deliberately excludes (division by
arbitrary expressions, square roots, inverse trigonometric functions).  They
are evaluated in floating point together with their gradient by forward-mode
differentiation; they are never differentiated symbolically.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .symexpr import SINGULAR_TOL, Expr, Ratio, SingularPointError

__all__ = ["NumMapExpr", "sqrt", "sin", "cos", "tan", "atan", "acot", "atan2"]


class NumMapExpr:
    """Immutable expression node: ``op`` plus argument nodes or a payload."""

    __slots__ = ("op", "args")

    def __init__(self, op: str, *args):
        self.op = op
        self.args = args

    # leaves ---------------------------------------------------------------
    @classmethod
    def var(cls, v: int) -> "NumMapExpr":
        return cls("var", v)

    @classmethod
    def const(cls, value) -> "NumMapExpr":
        return cls("const", float(value))

    @classmethod
    def param(cls, name: str) -> "NumMapExpr":
        return cls("param", name)

    @classmethod
    def from_exact(cls, value) -> "NumMapExpr":
        """Lift an :class:`Expr` or :class:`Ratio` (evaluated by the exact kernel)."""
        if isinstance(value, (int, float, Fraction)):
            return cls.const(value)
        return cls("exact", Ratio.coerce(value))

    @staticmethod
    def coerce(value) -> "NumMapExpr":
        if isinstance(value, NumMapExpr):
            return value
        if isinstance(value, (Expr, Ratio)):
            return NumMapExpr.from_exact(value)
        return NumMapExpr.const(value)

    # operators ------------------------------------------------------------
    def __add__(self, other):
        return NumMapExpr("add", self, NumMapExpr.coerce(other))

    def __radd__(self, other):
        return NumMapExpr("add", NumMapExpr.coerce(other), self)

    def __sub__(self, other):
        return NumMapExpr("sub", self, NumMapExpr.coerce(other))

    def __rsub__(self, other):
        return NumMapExpr("sub", NumMapExpr.coerce(other), self)

    def __mul__(self, other):
        return NumMapExpr("mul", self, NumMapExpr.coerce(other))

    def __rmul__(self, other):
        return NumMapExpr("mul", NumMapExpr.coerce(other), self)

    def __truediv__(self, other):
        return NumMapExpr("div", self, NumMapExpr.coerce(other))

    def __rtruediv__(self, other):
        return NumMapExpr("div", NumMapExpr.coerce(other), self)

    def __neg__(self):
        return NumMapExpr("neg", self)

    def __pow__(self, e: int):
        if not isinstance(e, int):
            raise TypeError("only integer powers")
        return NumMapExpr("pow", self, e)

    # evaluation -----------------------------------------------------------
    def eval(self, point, params=None) -> float:
        return self.eval_grad(point, params)[0]

    def eval_grad(self, point, params=None) -> tuple[float, np.ndarray]:
        """Value and gradient with respect to the coordinates at ``point``."""
        point = np.asarray(point, dtype=float)
        return self._eval(point, params or {})

    def _eval(self, p: np.ndarray, params) -> tuple[float, np.ndarray]:
        n = len(p)
        op, a = self.op, self.args
        if op == "const":
            return a[0], np.zeros(n)
        if op == "var":
            g = np.zeros(n)
            g[a[0] - 1] = 1.0
            return float(p[a[0] - 1]), g
        if op == "param":
            return float(params[a[0]]), np.zeros(n)
        if op == "exact":
            r: Ratio = a[0]
            val = r.eval_num(p, params)
            grad = np.array([r.partial(v).eval_num(p, params) for v in range(1, n + 1)])
            return val, grad
        if op == "neg":
            v, g = a[0]._eval(p, params)
            return -v, -g
        if op == "pow":
            v, g = a[0]._eval(p, params)
            k = a[1]
            if k < 0 and abs(v) < SINGULAR_TOL:
                raise SingularPointError(f"base of ^{k}", p)
            return v**k, k * v ** (k - 1) * g if k else np.zeros(n)
        if op in ("add", "sub", "mul", "div"):
            u, gu = a[0]._eval(p, params)
            w, gw = a[1]._eval(p, params)
            if op == "add":
                return u + w, gu + gw
            if op == "sub":
                return u - w, gu - gw
            if op == "mul":
                return u * w, gu * w + u * gw
            if abs(w) < SINGULAR_TOL:
                raise SingularPointError("denominator", p)
            return u / w, (gu * w - u * gw) / (w * w)
        if op == "atan2":
            y, gy = a[0]._eval(p, params)
            x, gx = a[1]._eval(p, params)
            r2 = x * x + y * y
            if r2 < SINGULAR_TOL:
                raise SingularPointError("atan2 at the origin", p)
            return math.atan2(y, x), (x * gy - y * gx) / r2
        v, g = a[0]._eval(p, params)
        if op == "sqrt":
            if v <= SINGULAR_TOL:
                raise SingularPointError("sqrt argument", p)
            s = math.sqrt(v)
            return s, g / (2 * s)
        if op == "sin":
            return math.sin(v), math.cos(v) * g
        if op == "cos":
            return math.cos(v), -math.sin(v) * g
        if op == "tan":
            c = math.cos(v)
            if abs(c) < SINGULAR_TOL:
                raise SingularPointError("cos", p)
            return math.tan(v), g / (c * c)
        if op == "atan":
            return math.atan(v), g / (1 + v * v)
        if op == "acot":
            # principal branch with values in (0, pi)
            return math.pi / 2 - math.atan(v), -g / (1 + v * v)
        raise ValueError(f"unknown node {op!r}")

    def __repr__(self):
        if self.op in ("const", "var", "param"):
            return f"{self.op}({self.args[0]})"
        if self.op == "exact":
            return f"[{self.args[0]}]"
        return f"{self.op}({', '.join(map(repr, self.args))})"


def _unary(op):
    def build(x) -> NumMapExpr:
        return NumMapExpr(op, NumMapExpr.coerce(x))

    build.__name__ = op
    return build


sqrt = _unary("sqrt")
sin = _unary("sin")
cos = _unary("cos")
tan = _unary("tan")
atan = _unary("atan")
acot = _unary("acot")


def atan2(y, x) -> NumMapExpr:
    return NumMapExpr("atan2", NumMapExpr.coerce(y), NumMapExpr.coerce(x))
