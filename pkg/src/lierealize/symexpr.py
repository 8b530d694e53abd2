"""Exact trig-Laurent polynomial arithmetic.

An :class:`Expr` is a finite sum of monomials

    coeff * prod x_v^e * prod sin(x_v)^s cos(x_v)^c * prod p^k

with ``coeff`` rational, ``s`` in {0, 1} and ``c`` any integer (negative powers
encode ``tan`` and ``sec``).  Parameters ``p`` are opaque symbols that are
constant with respect to every coordinate.  On this class the representation
is canonical, so the zero test is structural.

A :class:`Ratio` is a formal quotient whose denominator is kept as a product of
factors so that common denominators stay small; nothing is ever cancelled
against the numerator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb
from numbers import Rational
from typing import Iterable, Mapping

__all__ = [
    "Expr",
    "Ratio",
    "ExactPoint",
    "SingularPointError",
    "add",
    "mul",
    "partial",
    "is_zero_expr",
    "eval_num",
    "ratio_equal",
    "parse_expr",
    "random_exact_point",
]

#: cos(x) is treated as vanishing below this magnitude in float evaluation
SINGULAR_TOL = 1e-12


class SingularPointError(ValueError):
    """Evaluation hit a point where a denominator factor vanishes."""

    def __init__(self, factor: str, point=None):
        self.factor = factor
        self.point = point
        super().__init__(f"singular point: {factor} vanishes")


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)) and not isinstance(value, bool):
        return Fraction(value)
    raise TypeError(f"exact rational expected, got {type(value).__name__}")


# --------------------------------------------------------------------------
# monomial keys
#
# key = (poly, trig, params)
#   poly   : tuple of (var, exp)          exp >= 1, sorted by var
#   trig   : tuple of (var, s, c)         s in {0,1}, (s, c) != (0, 0)
#   params : tuple of (name, exp)         exp >= 1, sorted by name

_ONE_KEY = ((), (), ())


def _merge(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for k, e in b:
        d[k] = d.get(k, 0) + e
    return tuple(sorted((k, e) for k, e in d.items() if e))


def _expand_trig(d: Mapping[int, tuple[int, int]]) -> list[tuple[int, tuple]]:
    """Rewrite sin^s cos^c per variable into canonical atoms (s <= 1)."""
    out: list[tuple[int, list]] = [(1, [])]
    for v in sorted(d):
        s, c = d[v]
        q, r = divmod(s, 2)
        if q == 0:
            if r or c:
                for _, atoms in out:
                    atoms.append((v, r, c))
            continue
        # sin^(2q+r) cos^c = sin^r cos^c (1 - cos^2)^q
        new = []
        for mult, atoms in out:
            for k in range(q + 1):
                m = mult * comb(q, k) * (-1) ** k
                cc = c + 2 * k
                if r or cc:
                    new.append((m, atoms + [(v, r, cc)]))
                else:
                    new.append((m, list(atoms)))
        out = new
    return [(m, tuple(atoms)) for m, atoms in out]


@lru_cache(maxsize=1 << 16)
def _mul_trig(t1: tuple, t2: tuple) -> tuple:
    if not t1:
        return ((1, t2),)
    if not t2:
        return ((1, t1),)
    d = {v: (s, c) for v, s, c in t1}
    clash = False
    for v, s, c in t2:
        if v in d:
            s0, c0 = d[v]
            d[v] = (s0 + s, c0 + c)
            clash = clash or s0 + s > 1
        else:
            d[v] = (s, c)
    if not clash:
        return ((1, tuple(sorted((v, s, c) for v, (s, c) in d.items() if s or c))),)
    return tuple(_expand_trig(d))


@lru_cache(maxsize=1 << 18)
def _mul_keys(k1: tuple, k2: tuple) -> tuple:
    poly = _merge(k1[0], k2[0])
    params = _merge(k1[2], k2[2])
    return tuple((m, (poly, t, params)) for m, t in _mul_trig(k1[1], k2[1]))


def _key_vars(key: tuple) -> set[int]:
    return {v for v, _ in key[0]} | {v for v, _, _ in key[1]}


# --------------------------------------------------------------------------
# printing helpers


def _fmt_atom(name: str, e: int) -> str:
    return name if e == 1 else f"{name}^{e}"


def _fmt_trig(v: int, s: int, c: int) -> list[str]:
    x = f"x{v}"
    if s == 0:
        if c > 0:
            return [_fmt_atom(f"cos({x})", c)]
        return [_fmt_atom(f"sec({x})", -c)]
    # sin * cos^c
    if c >= 0:
        return [f"sin({x})"] + ([_fmt_atom(f"cos({x})", c)] if c else [])
    # re-sugar one sin/cos pair as tan
    return [f"tan({x})"] + ([_fmt_atom(f"sec({x})", -c - 1)] if c < -1 else [])


def _fmt_key(key: tuple) -> list[str]:
    poly, trig, params = key
    parts: list[str] = []
    tmap = {v: (s, c) for v, s, c in trig}
    pmap = dict(poly)
    for v in sorted(set(tmap) | set(pmap)):
        if v in pmap:
            parts.append(_fmt_atom(f"x{v}", pmap[v]))
        if v in tmap:
            parts.extend(_fmt_trig(v, *tmap[v]))
    parts.extend(_fmt_atom(p, e) for p, e in params)
    return parts


def _fmt_coeff(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


# --------------------------------------------------------------------------


class Expr:
    """Canonical sum of monomials; immutable and hashable."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[tuple, Fraction] | None = None):
        # trusted constructor: terms must already be canonical
        self._terms: dict[tuple, Fraction] = dict(terms) if terms else {}
        self._hash = None

    # construction ---------------------------------------------------------
    @classmethod
    def const(cls, value) -> "Expr":
        q = _as_fraction(value)
        return cls({_ONE_KEY: q}) if q else cls()

    @classmethod
    def var(cls, v: int, power: int = 1) -> "Expr":
        if v < 1:
            raise ValueError("variable indices start at 1")
        if power < 0:
            raise ValueError("negative powers of coordinates are not in the class")
        if power == 0:
            return cls.const(1)
        return cls({(((v, power),), (), ()): Fraction(1)})

    @classmethod
    def param(cls, name: str, power: int = 1) -> "Expr":
        if power < 0:
            raise ValueError("negative powers of parameters are not in the class")
        if power == 0:
            return cls.const(1)
        return cls({((), (), ((name, power),)): Fraction(1)})

    @classmethod
    def trig(cls, v: int, s: int, c: int) -> "Expr":
        """sin(x_v)^s * cos(x_v)^c, with s >= 0 and any integer c."""
        if v < 1:
            raise ValueError("variable indices start at 1")
        if s < 0:
            raise ValueError("negative sine powers are not in the class")
        return cls._from_raw([(Fraction(m), ((), t, ())) for m, t in _expand_trig({v: (s, c)})])

    @classmethod
    def sin(cls, v: int) -> "Expr":
        return cls.trig(v, 1, 0)

    @classmethod
    def cos(cls, v: int) -> "Expr":
        return cls.trig(v, 0, 1)

    @classmethod
    def tan(cls, v: int) -> "Expr":
        return cls.trig(v, 1, -1)

    @classmethod
    def sec(cls, v: int) -> "Expr":
        return cls.trig(v, 0, -1)

    @classmethod
    def _from_raw(cls, pairs: Iterable[tuple[Fraction, tuple]]) -> "Expr":
        acc: dict[tuple, Fraction] = {}
        for q, key in pairs:
            acc[key] = acc.get(key, 0) + q
        return cls({k: q for k, q in acc.items() if q})

    @staticmethod
    def coerce(value) -> "Expr":
        if isinstance(value, Expr):
            return value
        return Expr.const(value)

    # inspection -----------------------------------------------------------
    @property
    def terms(self) -> dict[tuple, Fraction]:
        return dict(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(k == _ONE_KEY for k in self._terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not a constant")
        return self._terms.get(_ONE_KEY, Fraction(0))

    def variables(self) -> set[int]:
        out: set[int] = set()
        for k in self._terms:
            out |= _key_vars(k)
        return out

    def parameters(self) -> set[str]:
        return {p for k in self._terms for p, _ in k[2]}

    def depends_on(self, v: int) -> bool:
        return any(v in _key_vars(k) for k in self._terms)

    def sort_key(self) -> tuple:
        return tuple(sorted(self._terms.items()))

    def leading(self) -> tuple[tuple, Fraction]:
        key = max(self._terms)
        return key, self._terms[key]

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, Ratio):
            return NotImplemented
        other = Expr.coerce(other)
        if not other._terms:
            return self
        if not self._terms:
            return other
        acc = dict(self._terms)
        for k, q in other._terms.items():
            r = acc.get(k, 0) + q
            if r:
                acc[k] = r
            else:
                acc.pop(k, None)
        return Expr(acc)

    __radd__ = __add__

    def __neg__(self):
        return Expr({k: -q for k, q in self._terms.items()})

    def __sub__(self, other):
        if isinstance(other, Ratio):
            return NotImplemented
        return self + (-Expr.coerce(other))

    def __rsub__(self, other):
        return Expr.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, Ratio):
            return NotImplemented
        other = Expr.coerce(other)
        a, b = self._terms, other._terms
        if not a or not b:
            return Expr()
        if len(b) == 1 and _ONE_KEY in b:
            q = b[_ONE_KEY]
            return Expr({k: c * q for k, c in a.items()})
        if len(a) == 1 and _ONE_KEY in a:
            q = a[_ONE_KEY]
            return Expr({k: c * q for k, c in b.items()})
        acc: dict[tuple, Fraction] = {}
        for k1, q1 in a.items():
            for k2, q2 in b.items():
                q = q1 * q2
                for m, key in _mul_keys(k1, k2):
                    acc[key] = acc.get(key, 0) + (q if m == 1 else q * m)
        return Expr({k: q for k, q in acc.items() if q})

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if not isinstance(e, int) or e < 0:
            raise ValueError("Expr powers must be non-negative integers")
        result = Expr.const(1)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __truediv__(self, other):
        return Ratio(self) / other

    def __rtruediv__(self, other):
        return Ratio(Expr.coerce(other)) / self

    def __eq__(self, other):
        if isinstance(other, Ratio):
            return NotImplemented
        if not isinstance(other, Expr):
            try:
                other = Expr.coerce(other)
            except TypeError:
                return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # calculus -------------------------------------------------------------
    def partial(self, v: int) -> "Expr":
        """Partial derivative with respect to x_v."""
        out: list[tuple[Fraction, tuple]] = []
        for (poly, trig, params), q in self._terms.items():
            pmap = dict(poly)
            tmap = {w: (s, c) for w, s, c in trig}
            e = pmap.get(v, 0)
            s, c = tmap.get(v, (0, 0))
            if not e and not (s or c):
                continue
            if e:
                pm = dict(pmap)
                if e == 1:
                    del pm[v]
                else:
                    pm[v] = e - 1
                out.append((q * e, (tuple(sorted(pm.items())), trig, params)))
            if s or c:
                if s == 0:
                    atoms = [(-c, (1, c - 1))]
                else:
                    atoms = [(1 + c, (0, c + 1)), (-c, (0, c - 1))]
                for m, (s2, c2) in atoms:
                    if not m:
                        continue
                    tm = dict(tmap)
                    if s2 or c2:
                        tm[v] = (s2, c2)
                    else:
                        del tm[v]
                    t = tuple(sorted((w, a, b) for w, (a, b) in tm.items()))
                    out.append((q * m, (poly, t, params)))
        return Expr._from_raw(out)

    def derive_params(self, derivation: Mapping[str, "Expr"]) -> "Expr":
        """Apply the derivation sending each parameter p to ``derivation[p]``.

        Parameters absent from the mapping are treated as constants.
        """
        result = Expr()
        for (poly, trig, params), q in self._terms.items():
            for i, (p, e) in enumerate(params):
                dp = derivation.get(p)
                if dp is None:
                    continue
                rest = list(params)
                if e == 1:
                    del rest[i]
                else:
                    rest[i] = (p, e - 1)
                mono = Expr({(poly, trig, tuple(rest)): q * e})
                result = result + mono * Expr.coerce(dp)
        return result

    # substitution ---------------------------------------------------------
    def subs_params(self, values: Mapping[str, object]) -> "Expr":
        if not values or not (self.parameters() & set(values)):
            return self
        vals = {p: Expr.coerce(v) for p, v in values.items()}
        cache: dict[tuple[str, int], Expr] = {}
        result = Expr()
        for (poly, trig, params), q in self._terms.items():
            keep = tuple((p, e) for p, e in params if p not in vals)
            term = Expr({(poly, trig, keep): q})
            for p, e in params:
                if p in vals:
                    if (p, e) not in cache:
                        cache[(p, e)] = vals[p] ** e
                    term = term * cache[(p, e)]
            result = result + term
        return result

    def rename_vars(self, mapping: Mapping[int, int]) -> "Expr":
        """Relabel coordinates; ``mapping`` must be injective on used variables."""
        out = []
        for (poly, trig, params), q in self._terms.items():
            p2 = tuple(sorted((mapping.get(v, v), e) for v, e in poly))
            t2 = tuple(sorted((mapping.get(v, v), s, c) for v, s, c in trig))
            out.append((q, (p2, t2, params)))
        return Expr._from_raw(out)

    # evaluation -----------------------------------------------------------
    def eval_num(self, point, params: Mapping[str, float] | None = None) -> float:
        params = params or {}
        total = 0.0
        for (poly, trig, prm), q in self._terms.items():
            val = float(q)
            for v, e in poly:
                val *= point[v - 1] ** e
            for v, s, c in trig:
                x = point[v - 1]
                cv = math.cos(x)
                if c < 0 and abs(cv) < SINGULAR_TOL:
                    raise SingularPointError(f"cos(x{v})", point)
                if s:
                    val *= math.sin(x)
                if c:
                    val *= cv**c
            for p, e in prm:
                if p not in params:
                    raise KeyError(f"no value for parameter {p!r}")
                val *= params[p] ** e
            total += val
        return total

    def eval_exact(self, pt: "ExactPoint") -> Fraction:
        total = Fraction(0)
        for (poly, trig, prm), q in self._terms.items():
            val = q
            for v, e in poly:
                val *= pt.x[v - 1] ** e
            for v, s, c in trig:
                cv = pt.cos[v - 1]
                if c < 0 and cv == 0:
                    raise SingularPointError(f"cos(x{v})", pt)
                if s:
                    val *= pt.sin[v - 1]
                if c:
                    val *= cv**c
            for p, e in prm:
                val *= pt.params[p] ** e
            total += val
        return total

    # printing -------------------------------------------------------------
    def __str__(self):
        if not self._terms:
            return "0"
        pieces = []
        for key in sorted(self._terms, key=_print_order):
            q = self._terms[key]
            factors = _fmt_key(key)
            mag = abs(q)
            if not factors:
                body = _fmt_coeff(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = _fmt_coeff(mag) + "*" + "*".join(factors)
            pieces.append(("-" if q < 0 else "+", body))
        sign, body = pieces[0]
        text = ("-" if sign == "-" else "") + body
        for sign, body in pieces[1:]:
            text += f" {sign} {body}"
        return text

    def __repr__(self):
        return f"Expr({str(self)!r})"


def _print_order(key: tuple):
    poly, trig, params = key
    deg = sum(e for _, e in poly) + sum(e for _, e in params)
    return (-deg, tuple((v, -e) for v, e in poly), trig, params)


# --------------------------------------------------------------------------
# Ratio


def _factor_den(e: Expr) -> tuple[Expr, dict[Expr, int]]:
    """Split a nonzero denominator into (unit-inverse, {factor: exponent}).

    Single monomials are split into atoms (x_v, p, sin x_v); units (rational
    constants, cos powers) are inverted into the numerator.  Other sums are
    scaled so that their leading coefficient is 1.
    """
    if e.is_zero():
        raise ZeroDivisionError("zero denominator")
    terms = e._terms
    if len(terms) == 1:
        (key, q), = terms.items()
        poly, trig, params = key
        inv = Expr({_ONE_KEY: 1 / q})
        factors: dict[Expr, int] = {}
        for v, k in poly:
            factors[Expr.var(v)] = k
        for p, k in params:
            factors[Expr.param(p)] = k
        for v, s, c in trig:
            if c:
                inv = inv * Expr.trig(v, 0, -c)
            if s:
                factors[Expr.sin(v)] = 1
        return inv, factors
    _, lead = e.leading()
    return Expr.const(1 / lead), {e * (1 / lead): 1}


def _deglex(poly, params, order) -> tuple:
    exps = dict(poly)
    exps.update(params)
    vec = tuple(exps.get(k, 0) for k in order)
    return (sum(vec), vec)


def exact_quotient(num: Expr, f: Expr) -> Expr | None:
    """num / f when f divides num exactly and f has no trig atoms, else None.

    Long division in the polynomial variables and parameters (degree-lex
    order) with the trig part of each term riding along as coefficient.  The
    leading coefficient of f is a nonzero rational, so for this single
    divisor a zero remainder is equivalent to divisibility.
    """
    if any(trig for (_, trig, _) in f._terms):
        return None
    if num.is_zero():
        return Expr()
    order = sorted({v for (poly, _, _) in list(num._terms) + list(f._terms) for v, _ in poly}) + sorted(
        {p for (_, _, prm) in list(num._terms) + list(f._terms) for p, _ in prm}
    )

    def mono(key):
        poly, _, params = key
        return _deglex(poly, params, order)

    lead_key = max(f._terms, key=mono)
    lead_q = f._terms[lead_key]
    lead_vec = mono(lead_key)[1]
    quotient = Expr()
    rem = num
    while not rem.is_zero():
        top = max(mono(k) for k in rem._terms)
        vec = top[1]
        if any(a < b for a, b in zip(vec, lead_vec)):
            return None
        # all remainder terms sharing this monomial, with their trig parts
        coeff = []
        for (poly, trig, params), q in rem._terms.items():
            if mono((poly, trig, params)) == top:
                coeff.append((q / lead_q, ((), trig, ())))
        shift = [a - b for a, b in zip(vec, lead_vec)]
        poly = tuple((k, e) for k, e in zip(order, shift) if e and isinstance(k, int))
        params = tuple((k, e) for k, e in zip(order, shift) if e and isinstance(k, str))
        t = Expr._from_raw([(q, (poly, trig, params)) for q, (_, trig, _) in coeff])
        quotient = quotient + t
        rem = rem - t * f
    return quotient


class Ratio:
    """Formal quotient ``num / prod(factor^exp)``; equality by cross-multiplication."""

    __slots__ = ("num", "factors")

    def __init__(self, num=0, den=1):
        num = Expr.coerce(num)
        den = Expr.coerce(den)
        inv, factors = _factor_den(den)
        self.num: Expr = num * inv
        self.factors: dict[Expr, int] = {} if self.num.is_zero() else factors

    @classmethod
    def _make(cls, num: Expr, factors: dict[Expr, int]) -> "Ratio":
        r = object.__new__(cls)
        r.num = num
        r.factors = {} if num.is_zero() else {f: k for f, k in factors.items() if k}
        return r

    @staticmethod
    def coerce(value) -> "Ratio":
        if isinstance(value, Ratio):
            return value
        return Ratio(Expr.coerce(value))

    @property
    def den(self) -> Expr:
        out = Expr.const(1)
        for f, k in self.factors.items():
            out = out * f**k
        return out

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def cancel(self) -> "Ratio":
        """Divide out denominator factors that divide the numerator exactly."""
        num, factors = self.num, dict(self.factors)
        for f in list(factors):
            while factors[f]:
                q = exact_quotient(num, f)
                if q is None:
                    break
                num, factors[f] = q, factors[f] - 1
        return Ratio._make(num, factors)

    def is_polynomial(self) -> bool:
        return not self.factors

    def as_expr(self) -> Expr:
        if self.factors:
            raise ValueError(f"{self} has a non-unit denominator")
        return self.num

    def variables(self) -> set[int]:
        out = self.num.variables()
        for f in self.factors:
            out |= f.variables()
        return out

    def parameters(self) -> set[str]:
        out = self.num.parameters()
        for f in self.factors:
            out |= f.parameters()
        return out

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        if not _scalar_like(other):
            return NotImplemented
        other = Ratio.coerce(other)
        if not other.factors and not self.factors:
            return Ratio._make(self.num + other.num, {})
        if other.num.is_zero():
            return self
        if self.num.is_zero():
            return other
        lcm = dict(self.factors)
        for f, k in other.factors.items():
            lcm[f] = max(lcm.get(f, 0), k)
        return Ratio._make(
            _scale(self.num, lcm, self.factors) + _scale(other.num, lcm, other.factors), lcm
        )

    __radd__ = __add__

    def __neg__(self):
        return Ratio._make(-self.num, self.factors)

    def __sub__(self, other):
        if not _scalar_like(other):
            return NotImplemented
        return self + (-Ratio.coerce(other))

    def __rsub__(self, other):
        if not _scalar_like(other):
            return NotImplemented
        return Ratio.coerce(other) - self

    def __mul__(self, other):
        if not _scalar_like(other):
            return NotImplemented
        other = Ratio.coerce(other)
        factors = dict(self.factors)
        for f, k in other.factors.items():
            factors[f] = factors.get(f, 0) + k
        return Ratio._make(self.num * other.num, factors)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not _scalar_like(other):
            return NotImplemented
        other = Ratio.coerce(other)
        if other.num.is_zero():
            raise ZeroDivisionError("division by the zero expression")
        inv, nf = _factor_den(other.num)
        factors = dict(self.factors)
        for f, k in nf.items():
            factors[f] = factors.get(f, 0) + k
        num = self.num * inv
        for f, k in other.factors.items():
            num = num * f**k
        return Ratio._make(num, factors)

    def __rtruediv__(self, other):
        if not _scalar_like(other):
            return NotImplemented
        return Ratio.coerce(other) / self

    def __pow__(self, e: int):
        if not isinstance(e, int) or e < 0:
            raise ValueError("Ratio powers must be non-negative integers")
        return Ratio._make(self.num**e, {f: k * e for f, k in self.factors.items()})

    def __eq__(self, other):
        if not _scalar_like(other):
            return NotImplemented
        return ratio_equal(self, other)

    __hash__ = None  # equality is semantic

    # calculus -------------------------------------------------------------
    def _derive(self, d_expr) -> "Ratio":
        dn = d_expr(self.num)
        moving = {f: k for f, k in self.factors.items()}
        derivs = {f: d_expr(f) for f in moving}
        active = [f for f in moving if not derivs[f].is_zero()]
        if not active:
            return Ratio._make(dn, self.factors)
        # (n/D)' = (n' B - n sum_i k_i b_i' B/b_i) / (D B),  B = prod active b_i
        B = Expr.const(1)
        for f in active:
            B = B * f
        acc = dn * B
        for i, f in enumerate(active):
            others = Expr.const(self.factors[f])
            for g in active:
                if g is not f:
                    others = others * g
            acc = acc - self.num * derivs[f] * others
        factors = dict(self.factors)
        for f in active:
            factors[f] += 1
        return Ratio._make(acc, factors)

    def partial(self, v: int) -> "Ratio":
        return self._derive(lambda e: e.partial(v))

    def derive_params(self, derivation: Mapping[str, Expr]) -> "Ratio":
        return self._derive(lambda e: e.derive_params(derivation))

    # substitution ---------------------------------------------------------
    def subs_params(self, values: Mapping[str, object]) -> "Ratio":
        vals = {p: Ratio.coerce(v) for p, v in values.items()}
        if all(v.is_polynomial() for v in vals.values()):
            ev = {p: v.num for p, v in vals.items()}
            out = Ratio(self.num.subs_params(ev))
            for f, k in self.factors.items():
                out = out / Ratio(f.subs_params(ev)) ** k
            return out
        # rational parameter values: route through variable-style substitution
        return _subs_generic(self, lambda e: _subs_expr_params(e, vals))

    def subs_vars(self, values: Mapping[int, "Ratio"]) -> "Ratio":
        """Substitute Ratios for coordinates (polynomial occurrences only).

        Trig atoms may only be renamed: the substituted value for a variable
        that appears inside sin/cos must be a bare coordinate.
        """
        vals = {v: Ratio.coerce(r) for v, r in values.items()}
        return _subs_generic(self, lambda e: _subs_expr_vars(e, vals))

    # evaluation -----------------------------------------------------------
    def eval_num(self, point, params=None) -> float:
        n = self.num.eval_num(point, params)
        d = 1.0
        for f, k in self.factors.items():
            fv = f.eval_num(point, params)
            if abs(fv) < SINGULAR_TOL:
                raise SingularPointError(str(f), point)
            d *= fv**k
        return n / d

    def eval_exact(self, pt: "ExactPoint") -> Fraction:
        n = self.num.eval_exact(pt)
        d = Fraction(1)
        for f, k in self.factors.items():
            fv = f.eval_exact(pt)
            if fv == 0:
                raise SingularPointError(str(f), pt)
            d *= fv**k
        return n / d

    def __str__(self):
        if not self.factors:
            return str(self.num)
        num = str(self.num)
        if len(self.num) > 1:
            num = f"({num})"
        parts = []
        for f, k in sorted(self.factors.items(), key=lambda fk: fk[0].sort_key()):
            base = str(f) if len(f) == 1 else f"({f})"
            parts.append(base if k == 1 else f"{base}^{k}")
        den = "*".join(parts)
        return f"{num}/({den})" if len(parts) > 1 else f"{num}/{den}"

    def __repr__(self):
        return f"Ratio({str(self)!r})"


def _scalar_like(value) -> bool:
    return isinstance(value, (Ratio, Expr, int, Fraction)) and not isinstance(value, bool)


def _scale(num: Expr, target: dict, have: dict) -> Expr:
    for f, k in target.items():
        missing = k - have.get(f, 0)
        if missing:
            num = num * f**missing
    return num


def _subs_generic(r: Ratio, subs_expr) -> Ratio:
    out = subs_expr(r.num)
    for f, k in r.factors.items():
        out = out / subs_expr(f) ** k
    return out


def _subs_expr_params(e: Expr, vals: Mapping[str, Ratio]) -> Ratio:
    result = Ratio(0)
    for (poly, trig, params), q in e._terms.items():
        keep = tuple((p, k) for p, k in params if p not in vals)
        term = Ratio(Expr({(poly, trig, keep): q}))
        for p, k in params:
            if p in vals:
                term = term * vals[p] ** k
        result = result + term
    return result


def _subs_expr_vars(e: Expr, vals: Mapping[int, Ratio]) -> Ratio:
    """Substitute into an Expr over a common denominator prod den_v^deg_v."""
    renames: dict[int, int] = {}
    for v, r in vals.items():
        if r.is_polynomial() and len(r.num) == 1:
            (key, q), = r.num._terms.items()
            if q == 1 and not key[1] and not key[2] and len(key[0]) == 1 and key[0][0][1] == 1:
                renames[v] = key[0][0][0]
    for key in e._terms:
        for v, _, _ in key[1]:
            if v in vals and v not in renames:
                raise ValueError(
                    f"cannot substitute {vals[v]} for x{v} inside a trigonometric atom"
                )
    # max polynomial degree per substituted variable
    degree: dict[int, int] = {}
    for key in e._terms:
        for v, k in key[0]:
            if v in vals and v not in renames:
                degree[v] = max(degree.get(v, 0), k)
    numer_pows: dict[tuple[int, int], Expr] = {}
    den_pows: dict[tuple[int, int], Expr] = {}

    def npow(v, k):
        if (v, k) not in numer_pows:
            numer_pows[(v, k)] = vals[v].num ** k
        return numer_pows[(v, k)]

    def dpow(v, k):
        if (v, k) not in den_pows:
            den_pows[(v, k)] = vals[v].den ** k
        return den_pows[(v, k)]

    total = Expr()
    for (poly, trig, params), q in e._terms.items():
        keep_poly = []
        factor = Expr.const(1)
        used = {}
        for v, k in poly:
            if v in renames:
                keep_poly.append((renames[v], k))
            elif v in vals:
                used[v] = k
            else:
                keep_poly.append((v, k))
        new_trig = [(renames.get(v, v), s, c) for v, s, c in trig]
        base = _canon_trig(q, keep_poly, new_trig, params)
        for v, d in degree.items():
            k = used.get(v, 0)
            if k:
                factor = factor * npow(v, k)
            if d - k:
                factor = factor * dpow(v, d - k)
        total = total + base * factor
    factors: dict[Expr, int] = {}
    for v, d in degree.items():
        for f, k in vals[v].factors.items():
            factors[f] = factors.get(f, 0) + k * d
    return Ratio._make(total, factors)


def _merge_list(pairs):
    d: dict[int, int] = {}
    for v, k in pairs:
        d[v] = d.get(v, 0) + k
    return [(v, k) for v, k in d.items() if k]


def _canon_trig(q, poly, trig, params) -> Expr:
    d: dict[int, tuple[int, int]] = {}
    for v, s, c in trig:
        s0, c0 = d.get(v, (0, 0))
        d[v] = (s0 + s, c0 + c)
    p = tuple(sorted(_merge_list(poly)))
    return Expr._from_raw([(q * m, (p, t, params)) for m, t in _expand_trig(d)])


# --------------------------------------------------------------------------
# exact sample points


@dataclass(frozen=True)
class ExactPoint:
    """A formal rational point: independent values for x_v and (sin x_v, cos x_v).

    ``sin`` and ``cos`` lie on the rational unit circle.  Treating x_v and its
    trig values as independent is sound for the canonical class, where
    polynomial and trigonometric atoms are algebraically independent.
    """

    x: tuple[Fraction, ...]
    sin: tuple[Fraction, ...]
    cos: tuple[Fraction, ...]
    params: Mapping[str, Fraction] = field(default_factory=dict)

    def as_floats(self) -> list[float]:
        # a float point consistent with the trig values (for display only)
        return [math.atan2(float(s), float(c)) for s, c in zip(self.sin, self.cos)]


def _rand_rational(rng, bound: int = 97) -> Fraction:
    num = int(rng.integers(-bound, bound + 1))
    den = int(rng.integers(1, bound + 1))
    return Fraction(num, den)


def random_exact_point(n: int, rng, params: Iterable[str] = (), bound: int = 97) -> ExactPoint:
    """Random rational point; trig values from t -> (2t, 1-t^2)/(1+t^2)."""
    xs, ss, cs = [], [], []
    for _ in range(n):
        xs.append(_rand_rational(rng, bound))
        while True:
            t = _rand_rational(rng, bound)
            if abs(t) != 1:
                break
        ss.append(2 * t / (1 + t * t))
        cs.append((1 - t * t) / (1 + t * t))
    prm = {p: _rand_rational(rng, bound) for p in sorted(params)}
    return ExactPoint(tuple(xs), tuple(ss), tuple(cs), prm)


# --------------------------------------------------------------------------
# functional surface


def add(a, b):
    return a + b


def mul(a, b):
    return a * b


def partial(a, v: int):
    return a.partial(v)


def is_zero_expr(a) -> bool:
    return a.is_zero()


def eval_num(a, point, params=None) -> float:
    return a.eval_num(point, params)


def ratio_equal(a, b) -> bool:
    return (Ratio.coerce(a) - Ratio.coerce(b)).num.is_zero()


def parse_expr(text: str, n: int | None = None) -> Expr:
    from .parser import parse_expr as _parse

    return _parse(text, n)
