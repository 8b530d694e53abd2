"""Vector fields with exact coefficients.

A :class:`VectorField` on n variables is the operator ``sum_a X_a d_a`` with
each ``X_a`` a :class:`~lierealize.symexpr.Ratio`.  Linear-algebra questions
over the constants (relations, spans, generic rank) are answered by exact
sampling at random rational points and then confirmed symbolically.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import _linalg
from .nummap import NumMapExpr
from .symexpr import Expr, ExactPoint, Ratio, SingularPointError, random_exact_point

__all__ = [
    "VectorField",
    "PointMap",
    "PushforwardReport",
    "lie_bracket",
    "constant_relations",
    "generic_rank",
    "rank_certificate",
    "pushforward",
    "pushforward_check",
    "match_basis",
    "flow_rk4",
    "exact_sample",
]

#: sample points tried before giving up on avoiding a singular locus
MAX_SAMPLE_ATTEMPTS = 200


class VectorField:
    """First-order operator ``sum_a coeffs[a-1] * d_a``."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs: Sequence):
        if len(coeffs) != n:
            raise ValueError(f"expected {n} coefficients, got {len(coeffs)}")
        self.n = n
        self.coeffs: tuple[Ratio, ...] = tuple(Ratio.coerce(c) for c in coeffs)

    @classmethod
    def zero(cls, n: int) -> "VectorField":
        return cls(n, [Ratio(0)] * n)

    @classmethod
    def coordinate(cls, a: int, n: int) -> "VectorField":
        """The field d_a."""
        return cls(n, [Ratio(1) if b == a else Ratio(0) for b in range(1, n + 1)])

    @classmethod
    def from_text(cls, text: str, n: int | None = None) -> "VectorField":
        from .parser import parse_field

        return parse_field(text, n)

    # algebra --------------------------------------------------------------
    def _check(self, other: "VectorField"):
        if not isinstance(other, VectorField):
            raise TypeError("vector field expected")
        if other.n != self.n:
            raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")

    def __add__(self, other):
        self._check(other)
        return VectorField(self.n, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other):
        self._check(other)
        return VectorField(self.n, [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self):
        return VectorField(self.n, [-a for a in self.coeffs])

    def __rmul__(self, scalar):
        s = Ratio.coerce(scalar)
        return VectorField(self.n, [s * a for a in self.coeffs])

    def __eq__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        return self.n == other.n and (self - other).is_zero()

    __hash__ = None

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def apply(self, f) -> Ratio:
        """Directional derivative X(f)."""
        f = Ratio.coerce(f)
        out = Ratio(0)
        for a, c in enumerate(self.coeffs, start=1):
            if not c.is_zero():
                out = out + c * f.partial(a)
        return out

    def bracket(self, other: "VectorField") -> "VectorField":
        return lie_bracket(self, other)

    def pad(self, n: int) -> "VectorField":
        """Same operator on n >= self.n variables (extra variables inert)."""
        if n < self.n:
            raise ValueError("cannot drop variables")
        return VectorField(n, list(self.coeffs) + [Ratio(0)] * (n - self.n))

    def subs_params(self, values) -> "VectorField":
        return VectorField(self.n, [c.subs_params(values) for c in self.coeffs])

    def variables(self) -> set[int]:
        out: set[int] = set()
        for c in self.coeffs:
            out |= c.variables()
        return out

    def parameters(self) -> set[str]:
        out: set[str] = set()
        for c in self.coeffs:
            out |= c.parameters()
        return out

    # evaluation -----------------------------------------------------------
    def eval_num(self, point, params=None) -> np.ndarray:
        return np.array([c.eval_num(point, params) for c in self.coeffs])

    def eval_exact(self, pt: ExactPoint) -> list[Fraction]:
        return [c.eval_exact(pt) for c in self.coeffs]

    # text / json ----------------------------------------------------------
    def __str__(self):
        parts = []
        for a, c in enumerate(self.coeffs, start=1):
            if c.is_zero():
                continue
            text = str(c)
            if text == "1":
                parts.append(f"d{a}")
            elif text == "-1":
                parts.append(f"-d{a}")
            elif c.is_polynomial() and len(c.num) == 1:
                parts.append(f"{text}*d{a}")
            else:
                parts.append(f"({text})*d{a}")
        return "; ".join(parts) if parts else "0*d1"

    def __repr__(self):
        return f"VectorField({self.n}, {str(self)!r})"

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "coeffs": [{"num": str(c.num), "den": str(c.den)} for c in self.coeffs],
        }

    @classmethod
    def from_json(cls, data) -> "VectorField":
        from .parser import parse_expr

        if isinstance(data, str):
            data = json.loads(data)
        n = int(data["n"])
        coeffs = [
            Ratio(parse_expr(c["num"], n), parse_expr(c.get("den", "1"), n))
            for c in data["coeffs"]
        ]
        return cls(n, coeffs)


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    """[X, Y]_a = sum_b (X_b d_b Y_a - Y_b d_b X_a)."""
    X._check(Y)
    out = []
    for a in range(X.n):
        acc = Ratio(0)
        for b in range(X.n):
            xb, yb = X.coeffs[b], Y.coeffs[b]
            if not xb.is_zero() and not Y.coeffs[a].is_zero():
                acc = acc + xb * Y.coeffs[a].partial(b + 1)
            if not yb.is_zero() and not X.coeffs[a].is_zero():
                acc = acc - yb * X.coeffs[a].partial(b + 1)
        out.append(acc)
    return VectorField(X.n, out)


# --------------------------------------------------------------------------
# exact sampling


def _common_n(fields: Sequence[VectorField]) -> int:
    if not fields:
        raise ValueError("empty field list")
    n = fields[0].n
    for f in fields:
        if f.n != n:
            raise ValueError(f"dimension mismatch: {n} vs {f.n}")
    return n


def _no_params(fields: Sequence[VectorField]) -> None:
    free = set().union(*(f.parameters() for f in fields))
    if free:
        raise ValueError(f"substitute parameters {sorted(free)} before solving over constants")


def exact_sample(fields: Sequence[VectorField], rng) -> tuple[ExactPoint, list[list[Fraction]]]:
    """Coefficient matrix (fields x coordinates) at a random nonsingular point."""
    n = _common_n(fields)
    for _ in range(MAX_SAMPLE_ATTEMPTS):
        pt = random_exact_point(n, rng)
        try:
            return pt, [f.eval_exact(pt) for f in fields]
        except SingularPointError:
            continue
    raise SingularPointError("every sampled point", None)


def _combination(fields: Sequence[VectorField], coeffs: Sequence[Fraction]) -> VectorField:
    total = VectorField.zero(fields[0].n)
    for c, f in zip(coeffs, fields):
        if c:
            total = total + Ratio(Expr.const(c)) * f
    return total


def constant_relations(fields: Sequence[VectorField], rng=None, max_samples: int = 20) -> list[tuple[Fraction, ...]]:
    """Basis of constant vectors lam with sum_s lam_s e_s = 0.

    Every returned relation is confirmed symbolically.  An empty list means
    the fields are linearly independent over the constants.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    m = len(fields)
    _common_n(fields)
    _no_params(fields)
    rows: list[list[Fraction]] = []
    prev_dim, stable = None, 0
    for _ in range(max_samples):
        _, mat = exact_sample(fields, rng)
        rows.extend(list(col) for col in zip(*mat))  # one equation per coordinate
        basis = _linalg.nullspace(rows, m)
        if not basis:
            return []
        if len(basis) == prev_dim:
            stable += 1
            if stable >= 2 and all(_combination(fields, v).is_zero() for v in basis):
                return [tuple(v) for v in basis]
        else:
            prev_dim, stable = len(basis), 0
    basis = _linalg.nullspace(rows, m)
    bad = [v for v in basis if not _combination(fields, v).is_zero()]
    if bad:
        raise RuntimeError(f"sampling did not separate candidate relation {bad[0]}")
    return [tuple(v) for v in basis]


def express_in_span(X: VectorField, fields: Sequence[VectorField], rng=None, max_samples: int = 20):
    """Constants lam with X = sum lam_s e_s (verified symbolically), or None."""
    rng = rng if rng is not None else np.random.default_rng(0)
    _common_n(list(fields) + [X])
    _no_params(list(fields) + [X])
    m = len(fields)
    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    sol = None
    for k in range(max_samples):
        _, mat = exact_sample(list(fields) + [X], rng)
        for a in range(X.n):
            rows.append([mat[s][a] for s in range(m)])
            rhs.append(mat[m][a])
        sol = _linalg.solve(rows, rhs)
        if sol is None:
            return None
        if k >= 1 and (X - _combination(fields, sol)).is_zero():
            return tuple(sol)
    return None


@dataclass(frozen=True)
class RankCertificate:
    rank: int
    rows: tuple[int, ...]
    cols: tuple[int, ...]
    minor: Ratio


def rank_certificate(fields: Sequence[VectorField], rng=None, samples: int = 20) -> RankCertificate:
    """Generic rank with a symbolic nonzero minor witnessing it."""
    rng = rng if rng is not None else np.random.default_rng(0)
    n = _common_n(fields)
    best, best_mat = -1, None
    for _ in range(samples):
        _, mat = exact_sample(fields, rng)
        r = _linalg.rank(mat)
        if r > best:
            best, best_mat = r, mat
    if best == 0:
        return RankCertificate(0, (), (), Ratio(1))
    _, cols = _linalg.rref(best_mat)
    _, rows = _linalg.rref(_linalg.transpose(best_mat))
    sub = [[fields[i].coeffs[j] for j in cols] for i in rows]
    minor = _linalg.det(sub)
    if minor.is_zero():
        raise RuntimeError("sampled rank not confirmed by a symbolic minor")
    assert len(cols) == best and len(rows) == best and n >= best
    return RankCertificate(best, tuple(rows), tuple(cols), minor)


def generic_rank(fields: Sequence[VectorField], rng=None, samples: int = 20) -> int:
    return rank_certificate(fields, rng, samples).rank


# --------------------------------------------------------------------------
# coordinate maps


@dataclass(frozen=True)
class PointMap:
    """Change of coordinates x -> x~ with explicit inverse.

    In symbolic mode both directions are tuples of :class:`Ratio` (forward in
    the old variables, inverse in the new ones).  In numeric mode they are
    :class:`~lierealize.nummap.NumMapExpr` trees.
    """

    n: int
    forward: tuple
    inverse: tuple
    mode: str = "symbolic"

    def __post_init__(self):
        if self.mode not in ("symbolic", "numeric"):
            raise ValueError("mode must be 'symbolic' or 'numeric'")
        conv = Ratio.coerce if self.mode == "symbolic" else NumMapExpr.coerce
        object.__setattr__(self, "forward", tuple(conv(f) for f in self.forward))
        object.__setattr__(self, "inverse", tuple(conv(f) for f in self.inverse))
        if len(self.forward) != len(self.inverse):
            raise ValueError("forward and inverse must have the same length")

    @property
    def n_out(self) -> int:
        return len(self.forward)

    def check_inverse(self, rng=None, samples: int = 10, sampler=None) -> bool:
        """forward(inverse(y)) == y (exactly, or at sampled points to 1e-9)."""
        if self.mode == "symbolic":
            subs = dict(enumerate(self.inverse, start=1))
            return all(
                f.subs_vars(subs) == Ratio(Expr.var(a))
                for a, f in enumerate(self.forward, start=1)
            )
        rng = rng if rng is not None else np.random.default_rng(0)
        sampler = sampler or (lambda r: r.uniform(-1.5, 1.5, self.n))
        done = 0
        for _ in range(MAX_SAMPLE_ATTEMPTS):
            p = np.asarray(sampler(rng), dtype=float)
            try:
                q = np.array([f.eval(p) for f in self.forward])
                back = np.array([g.eval(q) for g in self.inverse])
            except SingularPointError:
                continue
            if np.max(np.abs(back - p)) > 1e-9:
                return False
            done += 1
            if done == samples:
                return True
        raise SingularPointError("every sampled point", None)

    def jacobian(self, point) -> tuple[np.ndarray, np.ndarray]:
        """Image and numeric Jacobian of the forward map at ``point``."""
        vals, grads = zip(*(NumMapExpr.coerce(f).eval_grad(point) for f in self.forward))
        return np.array(vals), np.vstack(grads)


def pushforward(X: VectorField, pmap: PointMap) -> VectorField:
    """Symbolic pushforward: components X(forward_a) rewritten in new variables."""
    if pmap.mode != "symbolic":
        raise ValueError("symbolic pushforward needs a symbolic map; use pushforward_check")
    if X.n != pmap.n:
        raise ValueError(f"dimension mismatch: field on {X.n}, map on {pmap.n} variables")
    subs = dict(enumerate(pmap.inverse, start=1))
    return VectorField(pmap.n_out, [X.apply(f).subs_vars(subs).cancel() for f in pmap.forward])


@dataclass(frozen=True)
class PushforwardReport:
    residual: float
    samples: int
    worst_point: tuple[float, ...]


def _numeric_samples(pmap: PointMap, rng, samples: int, sampler, evaluate):
    sampler = sampler or (lambda r: r.uniform(-1.5, 1.5, pmap.n))
    out = []
    for _ in range(MAX_SAMPLE_ATTEMPTS * max(1, samples)):
        p = np.asarray(sampler(rng), dtype=float)
        try:
            out.append((p, evaluate(p)))
        except SingularPointError:
            continue
        if len(out) == samples:
            return out
    raise SingularPointError("sampling could not avoid the singular locus", None)


def pushforward_check(
    X: VectorField, Y: VectorField, pmap: PointMap, samples: int = 100, rng=None, sampler=None
) -> PushforwardReport:
    """max over samples of |J(p) X(p) - Y(map(p))| (sup norm)."""
    rng = rng if rng is not None else np.random.default_rng(0)

    def evaluate(p):
        q, J = pmap.jacobian(p)
        return q, J @ X.eval_num(p), Y.eval_num(q)

    worst, worst_p = 0.0, None
    pts = _numeric_samples(pmap, rng, samples, sampler, evaluate)
    for p, (_, pushed, target) in pts:
        r = float(np.max(np.abs(pushed - target)))
        if worst_p is None or r > worst:
            worst, worst_p = r, p
    return PushforwardReport(worst, len(pts), tuple(float(v) for v in worst_p))


def match_basis(
    Xs: Sequence[VectorField], Ys: Sequence[VectorField], pmap: PointMap,
    samples: int = 100, rng=None, sampler=None,
) -> tuple[list[tuple[int, int]], float, float]:
    """Find the signed permutation pushing Xs onto Ys.

    Returns ``(perm, residual, identity_residual)`` where ``perm[i] = (j, sign)``
    means push(X_i) = sign * Y_j, ``residual`` is the sup-norm mismatch under that
    matching and ``identity_residual`` the mismatch for the unpermuted basis.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    m = len(Xs)
    if len(Ys) != m:
        raise ValueError("bases of different size")

    def evaluate(p):
        q, J = pmap.jacobian(p)
        return [J @ X.eval_num(p) for X in Xs], [Y.eval_num(q) for Y in Ys]

    pts = _numeric_samples(pmap, rng, samples, sampler, evaluate)

    def residual(perm):
        worst = 0.0
        for _, (pushed, targets) in pts:
            for i, (j, s) in enumerate(perm):
                worst = max(worst, float(np.max(np.abs(pushed[i] - s * targets[j]))))
        return worst

    candidates = (
        list(zip(order, signs))
        for order in itertools.permutations(range(m))
        for signs in itertools.product((1, -1), repeat=m)
    )
    best = min(candidates, key=residual)
    return best, residual(best), residual([(i, 1) for i in range(m)])


# --------------------------------------------------------------------------
# flows


def compile_field(X: VectorField, params=None) -> Callable[[np.ndarray], np.ndarray]:
    def f(p):
        return X.eval_num(p, params)

    return f


def flow_rk4(X: VectorField, p, eps: float, steps: int | None = None, params=None) -> np.ndarray:
    """Classical RK4 for dx/dt = X(x) from p over [0, eps]."""
    if steps is None:
        steps = max(100, math.ceil(1000 * abs(eps)))
    return rk4(compile_field(X, params), np.asarray(p, dtype=float), eps, steps)


def rk4(f: Callable[[np.ndarray], np.ndarray], y0: np.ndarray, t: float, steps: int) -> np.ndarray:
    """Fixed-step RK4 for an autonomous system; raises on singular states."""
    h = t / steps
    y = np.array(y0, dtype=float)
    for k in range(steps):
        try:
            # overflow is detected below through the finiteness check
            with np.errstate(over="ignore", invalid="ignore"):
                k1 = f(y)
                k2 = f(y + 0.5 * h * k1)
                k3 = f(y + 0.5 * h * k2)
                k4 = f(y + h * k3)
        except (SingularPointError, OverflowError) as exc:
            factor = getattr(exc, "factor", "overflow")
            raise SingularPointError(f"{factor} (step {k} of {steps})", y) from exc
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise SingularPointError(f"trajectory blew up (step {k} of {steps})", y)
    return y
