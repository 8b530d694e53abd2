"""Mechanical checks of the computations inside the classification proofs.

Three groups:

* the sl(2,R) (+) A1 extension: the form-preserving change of variables, the
  induced action on the coefficients of the commuting operator e4, and the
  invariant (xi2)^2 - 4 xi1 xi3;
* the so(3) (+) A1 extension: the commutant of the alpha-parameterised so(3)
  realization, and the Lie equations for the coefficient vector with their
  closed-form solution;
* the coordinate changes relating R(so(3),1) to the planar and Cartesian
  rotation fields.

Exact checks return zero residuals; numeric ones carry the residual actually
observed.  Nothing here patches the printed formulas: disagreements are
returned as discrepancies.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import nummap
from ._linalg import rank as exact_rank
from .liefield import PointMap, VectorField, lie_bracket, match_basis, pushforward, rk4
from .nummap import NumMapExpr
from .parser import parse_expr, parse_field_list
from .symexpr import Expr, Ratio, SingularPointError, random_exact_point

__all__ = [
    "CheckReport",
    "TransformParams",
    "AnsatzCoefficients",
    "CommutantSolution",
    "LieOdeProblem",
    "ClosedFormSolution",
    "sl2_generators",
    "sl2_preserving_map",
    "compose_transforms",
    "check_transformed_generators",
    "ansatz_field",
    "transform_ansatz",
    "printed_tilde_xi",
    "corrected_tilde_xi",
    "invariant_I",
    "so3_alpha_fields",
    "commutant_field",
    "check_commutant_system",
    "closed_form",
    "lie_ode_compare",
    "annihilating_rho4",
    "coordinate_change_checks",
    "random_lie_ode_problem",
]


@dataclass
class CheckReport:
    check: str
    status: str  # "ok" | "fail"
    residual: float | None = None
    discrepancies: list = field(default_factory=list)
    samples: int = 0
    seed: int | None = None
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_json(self) -> dict:
        out = {"check": self.check, "status": self.status}
        if self.residual is not None:
            out["residual"] = self.residual
        out["discrepancies"] = self.discrepancies
        out["samples"] = self.samples
        out["seed"] = self.seed
        if self.details:
            out["details"] = self.details
        return out


def _r(value) -> Ratio:
    if isinstance(value, str):
        return Ratio(parse_expr(value))
    return Ratio.coerce(value)


# ==========================================================================
# sl(2,R) (+) A1: the form-preserving map


def sl2_generators(n: int = 3) -> list[VectorField]:
    """R(sl(2,R),1): d1, x1 d1 + x2 d2, x1^2 d1 + 2 x1 x2 d2 + x2 d3."""
    return parse_field_list("d1\nx1*d1 + x2*d2\nx1^2*d1 + 2*x1*x2*d2 + x2*d3", n)


@dataclass(frozen=True)
class TransformParams:
    """Coefficients f^1, f^2, f^3 of the map (functions of the inert variables).

    ``grad_a[a][k]`` holds the derivative of f^a along the k-th inert variable
    and ``grad_j[j][k]`` that of f^j; both default to empty (no inert
    variables), which is the only case needed when xi^j = 0.
    """

    f1: Ratio
    f2: Ratio
    f3: Ratio
    grad_a: tuple = ((), (), ())
    grad_j: tuple = ()

    def __post_init__(self):
        for name in ("f1", "f2", "f3"):
            object.__setattr__(self, name, _r(getattr(self, name)))
        object.__setattr__(self, "grad_a", tuple(tuple(_r(v) for v in row) for row in self.grad_a))
        object.__setattr__(self, "grad_j", tuple(tuple(_r(v) for v in row) for row in self.grad_j))
        if self.f2.is_zero():
            raise ValueError("f2 must be nonzero: the map is not invertible")

    @classmethod
    def symbolic(cls, hat: int = 0) -> "TransformParams":
        """Fully symbolic parameters f1, f2, f3 with derivative symbols f<a>_<k>."""
        ks = range(4, 4 + hat)
        return cls(
            Expr.param("f1"), Expr.param("f2"), Expr.param("f3"),
            tuple(tuple(Expr.param(f"f{a}_{k}") for k in ks) for a in (1, 2, 3)),
            tuple(tuple(Expr.param(f"fj{j}_{k}") for k in ks) for j in ks),
        )

    @classmethod
    def identity(cls) -> "TransformParams":
        return cls(0, 1, 0)


_F = ("__f1", "__f2", "__f3")


def _forward(f1, f2, f3) -> tuple[Ratio, Ratio, Ratio]:
    x1, x2, x3 = (Ratio(Expr.var(i)) for i in (1, 2, 3))
    q = 1 - f1 * x3
    return (x1 + f1 * x2 / q, f2 * x2 / q**2, f2 * x3 / q + f3)


def _inverse(f1, f2, f3) -> tuple[Ratio, Ratio, Ratio]:
    y1, y2, y3 = (Ratio(Expr.var(i)) for i in (1, 2, 3))
    s = f2 + f1 * (y3 - f3)
    return (y1 - f1 * y2 / s, f2 * y2 / s**2, (y3 - f3) / s)


def sl2_preserving_map(tp: TransformParams) -> PointMap:
    """x~1 = x1 + f1 x2/(1 - f1 x3), x~2 = f2 x2/(1 - f1 x3)^2, x~3 = f2 x3/(1 - f1 x3) + f3."""
    return PointMap(3, _forward(tp.f1, tp.f2, tp.f3), _inverse(tp.f1, tp.f2, tp.f3))


def compose_transforms(outer: TransformParams, inner: TransformParams) -> TransformParams:
    """Parameters of ``outer o inner`` (x3 acts by the Moebius matrix [[f2 - f1 f3, f3], [-f1, 1]])."""
    def mat(tp):
        return [[tp.f2 - tp.f1 * tp.f3, tp.f3], [-tp.f1, Ratio(1)]]

    A, B = mat(outer), mat(inner)
    (a, b), (c, d) = [[A[i][0] * B[0][j] + A[i][1] * B[1][j] for j in range(2)] for i in range(2)]
    if d.num.is_zero():
        raise ValueError("composite sends x3 = infinity to a finite point; no normalized form")
    return TransformParams(-c / d, outer.f2 * inner.f2 / d**2, b / d)


def check_transformed_generators(tp: TransformParams) -> CheckReport:
    """Push e1, e2, e3 through the map and compare with the same formulas in x~."""
    pmap = sl2_preserving_map(tp)
    discrepancies = []
    if not pmap.check_inverse():
        discrepancies.append("inverse map does not invert the forward map")
    gens = sl2_generators(3)
    for i, e in enumerate(gens, start=1):
        pushed = pushforward(e, pmap)
        for a in range(3):
            if not (pushed.coeffs[a] - e.coeffs[a]).is_zero():
                discrepancies.append(f"e{i}: component d{a + 1} becomes {pushed.coeffs[a]}")
    return CheckReport("transform-generators", "fail" if discrepancies else "ok", 0.0, discrepancies, 1)


# --------------------------------------------------------------------------
# the commuting operator e4 and its coefficients


@dataclass(frozen=True)
class AnsatzCoefficients:
    """e4 = xi1 x2 d1 + (2 xi1 x3 + xi2) x2 d2 + (xi1 x3^2 + xi2 x3 + xi3) d3 + xi^j d_j."""

    xi1: Ratio
    xi2: Ratio
    xi3: Ratio
    xi_j: tuple = ()

    def __post_init__(self):
        for name in ("xi1", "xi2", "xi3"):
            v = _r(getattr(self, name))
            if v.variables() & {1, 2, 3}:
                raise ValueError(f"{name} must not depend on x1, x2, x3")
            object.__setattr__(self, name, v)
        object.__setattr__(self, "xi_j", tuple(_r(v) for v in self.xi_j))

    @classmethod
    def symbolic(cls, hat: int = 0) -> "AnsatzCoefficients":
        return cls(Expr.param("xi1"), Expr.param("xi2"), Expr.param("xi3"),
                   tuple(Expr.param(f"xi_{k}") for k in range(4, 4 + hat)))

    def as_tuple(self) -> tuple[Ratio, Ratio, Ratio]:
        return (self.xi1, self.xi2, self.xi3)


def ansatz_field(ac: AnsatzCoefficients) -> VectorField:
    """The x1, x2, x3 components of e4 (the inert part is carried by ``xi_j``)."""
    x2, x3 = Ratio(Expr.var(2)), Ratio(Expr.var(3))
    return VectorField(3, [
        ac.xi1 * x2,
        (2 * ac.xi1 * x3 + ac.xi2) * x2,
        ac.xi1 * x3**2 + ac.xi2 * x3 + ac.xi3,
    ])


def _directional(ac: AnsatzCoefficients, grads: Sequence[Ratio]) -> Ratio:
    """sum_k xi^k d_k f for an inert-variable gradient ``grads``."""
    if not ac.xi_j:
        return Ratio(0)
    if len(grads) != len(ac.xi_j):
        raise ValueError("gradient length does not match the number of inert variables")
    out = Ratio(0)
    for xi, g in zip(ac.xi_j, grads):
        out = out + xi * g
    return out


@dataclass
class TransformResult:
    coefficients: AnsatzCoefficients
    in_shape: bool
    transformed_field: VectorField
    printed_discrepancy: tuple[Ratio, Ratio, Ratio]

    @property
    def printed_agrees(self) -> bool:
        return all(d.is_zero() for d in self.printed_discrepancy)


class AnsatzEscapeError(RuntimeError):
    """The transformed operator is not of the ansatz form."""


def transform_ansatz(ac: AnsatzCoefficients, tp: TransformParams) -> TransformResult:
    """Push e4 through the map, check the ansatz shape and read off xi~.

    The pushforward is authoritative; the printed formulas are evaluated
    alongside and their difference is returned per component.
    """
    D = [_directional(ac, g) for g in tp.grad_a] if ac.xi_j else [Ratio(0)] * 3
    placeholders = [Ratio(Expr.param(p)) for p in _F]
    fwd = _forward(*placeholders)
    e4 = ansatz_field(ac)
    values = dict(zip(_F, (tp.f1, tp.f2, tp.f3)))
    comps = []
    for F in fwd:
        comp = e4.apply(F)
        if ac.xi_j:
            # chain rule through the inert-variable dependence of f^a
            for p, d in zip(_F, D):
                if not d.is_zero():
                    comp = comp + F.derive_params({p: Expr.const(1)}) * d
        comps.append(comp.subs_params(values))
    inv = dict(enumerate(_inverse(tp.f1, tp.f2, tp.f3), start=1))
    comps = [c.subs_vars(inv).cancel() for c in comps]
    new = VectorField(3, comps)

    y2, y3 = Ratio(Expr.var(2)), Ratio(Expr.var(3))
    t1 = comps[0] / y2
    t2 = comps[1] / y2 - 2 * t1 * y3
    t3 = comps[2] - t1 * y3**2 - t2 * y3
    in_shape = all(t.partial(v).is_zero() for t in (t1, t2, t3) for v in (1, 2, 3))
    if not in_shape:
        raise AnsatzEscapeError(f"transformed operator {new} leaves the ansatz form")
    xi = [_freeze_constant(t) for t in (t1, t2, t3)]
    xi_j = ()
    if ac.xi_j:
        xi_j = tuple(_directional(ac, g) for g in tp.grad_j)
    result = AnsatzCoefficients(*xi, xi_j)
    printed = printed_tilde_xi(ac, tp)
    return TransformResult(result, in_shape, new, tuple(a - b for a, b in zip(xi, printed)))


def _freeze_constant(t: Ratio) -> Ratio:
    """Value of an x-independent Ratio, as a parameter-only Ratio."""
    for y in itertools.product(range(0, 4), repeat=3):
        try:
            return t.subs_vars({i + 1: Ratio(v) for i, v in enumerate(y)}).cancel()
        except ZeroDivisionError:
            continue
    raise ZeroDivisionError("could not find a regular point to evaluate at")


def printed_tilde_xi(ac: AnsatzCoefficients, tp: TransformParams) -> tuple[Ratio, Ratio, Ratio]:
    """The coefficient formulas exactly as printed, including their typesetting."""
    x1, x2, x3 = ac.as_tuple()
    f1, f2, f3 = tp.f1, tp.f2, tp.f3
    d1, d2, d3 = ([_directional(ac, g) for g in tp.grad_a] if ac.xi_j else [Ratio(0)] * 3)
    t1 = (x1 + x2 * f1 + x3 * f1**2 + d1) / f2
    t2 = x2 + 2 * x3 * f1 - 2 * t1 * f3**2 + d2 / f2
    t3 = x3 * f2 - t1 * f3**2 - t2 * f3 + x3 * f2 + d3
    return t1, t2, t3


def corrected_tilde_xi(ac: AnsatzCoefficients, tp: TransformParams) -> tuple[Ratio, Ratio, Ratio]:
    """Coefficient formulas that agree with the recomputed pushforward.

    Differences from the printed ones: f3 instead of (f3)^2 in the second
    formula, and the third has +xi~1 (f3)^2 with a single xi3 f2 term, which
    is the same as the printed right-hand side with the duplicate removed
    once xi~2 carries f3.
    """
    x1, x2, x3 = ac.as_tuple()
    f1, f2, f3 = tp.f1, tp.f2, tp.f3
    d1, d2, d3 = ([_directional(ac, g) for g in tp.grad_a] if ac.xi_j else [Ratio(0)] * 3)
    t1 = (x1 + x2 * f1 + x3 * f1**2 + d1) / f2
    t2 = x2 + 2 * x3 * f1 - 2 * t1 * f3 + d2 / f2
    t3 = x3 * f2 - t1 * f3**2 - t2 * f3 + d3
    return t1, t2, t3


def invariant_I(ac: AnsatzCoefficients) -> Ratio:
    """(xi2)^2 - 4 xi1 xi3; only meaningful when xi^j = 0."""
    if any(not v.is_zero() for v in ac.xi_j):
        raise ValueError("the invariant is only claimed for xi^j = 0")
    return ac.xi2**2 - 4 * ac.xi1 * ac.xi3


def random_transform(rng, bound: int = 9) -> TransformParams:
    def q():
        return Fraction(int(rng.integers(-bound, bound + 1)), int(rng.integers(1, bound + 1)))

    f2 = Fraction(0)
    while f2 == 0:
        f2 = q()
    return TransformParams(q(), f2, q())


def random_ansatz(rng, bound: int = 9) -> AnsatzCoefficients:
    def q():
        return Fraction(int(rng.integers(-bound, bound + 1)), int(rng.integers(1, bound + 1)))

    return AnsatzCoefficients(q(), q(), q())


# ==========================================================================
# so(3) (+) A1: the commutant


def so3_alpha_fields(alpha: int, n: int = 4) -> list[VectorField]:
    """e1, e2, e3 of R(so(3),1) (alpha = 0) or R(so(3),2) (alpha = 1)."""
    if alpha not in (0, 1):
        raise ValueError("alpha must be 0 or 1")
    text = (
        "-sin(x1)*tan(x2)*d1 - cos(x1)*d2 + alpha*sin(x1)*sec(x2)*d3\n"
        "-cos(x1)*tan(x2)*d1 + sin(x1)*d2 + alpha*cos(x1)*sec(x2)*d3\n"
        "d1"
    )
    return [f.subs_params({"alpha": alpha}) for f in parse_field_list(text, n)]


def transpose_vars(X: VectorField, i: int, j: int) -> VectorField:
    """X with the variables x_i and x_j exchanged."""
    swap = {i: j, j: i}
    coeffs = list(X.coeffs)
    coeffs[i - 1], coeffs[j - 1] = coeffs[j - 1], coeffs[i - 1]
    out = []
    for c in coeffs:
        num = c.num.rename_vars(swap)
        r = Ratio(num)
        for f, k in c.factors.items():
            r = r / Ratio(f.rename_vars(swap)) ** k
        out.append(r)
    return VectorField(X.n, out)


@dataclass(frozen=True)
class CommutantSolution:
    phi1: Ratio
    phi2: Ratio
    phi3: Ratio
    phi_j: tuple = ()
    alpha: int = 1

    def __post_init__(self):
        if self.alpha not in (0, 1):
            raise ValueError("alpha must be 0 or 1")
        for name in ("phi1", "phi2", "phi3"):
            object.__setattr__(self, name, _r(getattr(self, name)))
        object.__setattr__(self, "phi_j", tuple(_r(v) for v in self.phi_j))

    @classmethod
    def symbolic(cls, alpha: int = 1, hat: int = 1) -> "CommutantSolution":
        return cls(Expr.param("phi1"), Expr.param("phi2"), Expr.param("phi3"),
                   tuple(Expr.param(f"phi{k}") for k in range(4, 4 + hat)), alpha)

    @property
    def n(self) -> int:
        return 3 + len(self.phi_j)


def commutant_field(cs: CommutantSolution) -> VectorField:
    """e4 from the general solution (alpha = 1) or xi1 = xi2 = 0, xi3 = phi3 (alpha = 0)."""
    n = cs.n
    hat = list(cs.phi_j)
    if cs.alpha == 0:
        return VectorField(n, [Ratio(0), Ratio(0), cs.phi3] + hat)
    s3, c3 = Ratio(Expr.sin(3)), Ratio(Expr.cos(3))
    sec2, tan2 = Ratio(Expr.sec(2)), Ratio(Expr.tan(2))
    a = cs.phi1 * s3 + cs.phi2 * c3
    return VectorField(n, [a * sec2, cs.phi2 * s3 - cs.phi1 * c3, cs.phi3 - a * tan2] + hat)


# printed system for the commutant, one equation per entry; xiA_B is d_B xi^A
_PRINTED_SYSTEM = {
    "x1-free": ["xi{a}_1"],  # for every a
    "x1-free'": ["xi2_2", "xi{j}_2"],
    "cos-group": ["alpha*xi2_3 - xi1*cos(x2)", "alpha*xi1_3*cos(x2) + xi2", "xi3_2*cos(x2) + alpha*xi1"],
    "tan-group": ["xi1_2 - xi1*tan(x2)", "alpha*xi3_3 - alpha*xi2*tan(x2)", "alpha*xi{j}_3"],
}


def printed_system(alpha: int, n: int) -> list[tuple[str, Expr]]:
    eqs = []
    for label, templates in _PRINTED_SYSTEM.items():
        for t in templates:
            if "{a}" in t:
                inst = [t.format(a=a) for a in range(1, n + 1)]
            elif "{j}" in t:
                inst = [t.format(j=j) for j in range(4, n + 1)]
            else:
                inst = [t]
            for text in inst:
                e = parse_expr(text, n).subs_params({"alpha": alpha})
                eqs.append((label.rstrip("'"), e))
    return eqs


def commutator_system(alpha: int, n: int) -> list[tuple[str, Expr]]:
    """Components of [e4, e_i] for e4 = xi^a(x) d_a, linear in xi^a and d_b xi^a."""
    gens = so3_alpha_fields(alpha, n)
    eqs = []
    for i, e in enumerate(gens, start=1):
        for a in range(1, n + 1):
            total = Expr()
            ea = e.coeffs[a - 1].as_expr()
            for b in range(1, n + 1):
                total = total + Expr.param(f"xi{b}") * ea.partial(b)
                eb = e.coeffs[b - 1].as_expr()
                if not eb.is_zero():
                    total = total - eb * Expr.param(f"xi{a}_{b}")
            eqs.append((f"[e4,e{i}]_{a}", total))
    return eqs


def _jet_symbols(n: int) -> list[str]:
    return [f"xi{a}" for a in range(1, n + 1)] + [f"xi{a}_{b}" for a in range(1, n + 1) for b in range(1, n + 1)]


def _linear_coefficients(e: Expr, symbols: Sequence[str]) -> dict[str, Expr]:
    """Split an expression linear in ``symbols`` into their coefficients."""
    out: dict[str, dict] = {s: {} for s in symbols}
    index = set(symbols)
    for (poly, trig, params), q in e.terms.items():
        hits = [(p, k) for p, k in params if p in index]
        if len(hits) != 1 or hits[0][1] != 1:
            raise ValueError(f"{e} is not linear in the jet symbols")
        sym = hits[0][0]
        rest = tuple((p, k) for p, k in params if p != sym)
        out[sym][(poly, trig, rest)] = q
    return {s: Expr(t) for s, t in out.items()}


def _systems_equivalent(A, B, symbols, rng, samples=6) -> bool:
    """Same row space over the function field, tested at exact random points."""
    ca = [_linear_coefficients(e, symbols) for _, e in A]
    cb = [_linear_coefficients(e, symbols) for _, e in B]
    n = max(max((v for c in ca + cb for e in c.values() for v in e.variables()), default=1), 1)
    for _ in range(samples):
        try:
            pt = random_exact_point(n, rng)
            ma = [[c[s].eval_exact(pt) for s in symbols] for c in ca]
            mb = [[c[s].eval_exact(pt) for s in symbols] for c in cb]
        except SingularPointError:
            continue
        ra, rb, rab = exact_rank(ma), exact_rank(mb), exact_rank(ma + mb)
        if not (ra == rb == rab):
            return False
    return True


def _substitute_solution(e: Expr, e4: VectorField, n: int) -> Ratio:
    symbols = _jet_symbols(n)
    coeffs = _linear_coefficients(e, symbols)
    values = {f"xi{a}": e4.coeffs[a - 1] for a in range(1, n + 1)}
    for a in range(1, n + 1):
        for b in range(1, n + 1):
            values[f"xi{a}_{b}"] = e4.coeffs[a - 1].partial(b)
    out = Ratio(0)
    for s, c in coeffs.items():
        if not c.is_zero():
            out = out + Ratio(c) * values[s]
    return out


def check_commutant_system(cs: CommutantSolution, rng=None) -> CheckReport:
    """[e4, e_i] = 0 exactly, plus the primed-basis identity for e4.

    Also compares the printed PDE system with the recomputed commutator
    conditions (row-space equality) and substitutes the general solution
    into the printed system.  Text-level mismatches become discrepancies.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    n = cs.n
    gens = so3_alpha_fields(cs.alpha, n)
    e4 = commutant_field(cs)
    discrepancies = []
    for i, e in enumerate(gens, start=1):
        br = lie_bracket(e4, e)
        if not br.is_zero():
            discrepancies.append(f"[e4, e{i}] = {br}")
    primed = [transpose_vars(e, 1, 3) for e in so3_alpha_fields(1, n)]
    combo = VectorField.zero(n)
    if cs.alpha == 1:
        combo = cs.phi1 * primed[0] + cs.phi2 * primed[1]
    combo = combo + cs.phi3 * primed[2]
    for k, phi in enumerate(cs.phi_j, start=4):
        combo = combo + phi * VectorField.coordinate(k, n)
    if not (combo - e4).is_zero():
        discrepancies.append(f"e4 - (phi^a e_a' + phi^j d_j) = {combo - e4}")
    printed = printed_system(cs.alpha, n)
    computed = commutator_system(cs.alpha, n)
    equivalent = _systems_equivalent(printed, computed, _jet_symbols(n), rng)
    if not equivalent:
        discrepancies.append("printed PDE system is not equivalent to the commutator conditions")
    unsatisfied = []
    for label, eq in printed:
        val = _substitute_solution(eq, e4, n)
        if not val.is_zero():
            unsatisfied.append(f"({label}) {eq} -> {val}")
    discrepancies.extend(f"general solution violates printed equation {u}" for u in unsatisfied)
    return CheckReport(
        "commutant", "fail" if discrepancies else "ok", 0.0, discrepancies, 1,
        details={"alpha": cs.alpha, "n": n, "printed_system_equivalent": equivalent},
    )


# ==========================================================================
# Lie equations d gamma / d eps = rho x gamma - beta rho4


@dataclass(frozen=True)
class LieOdeProblem:
    rho: tuple[float, float, float]
    rho4: tuple[float, float, float]
    phi: tuple[float, float, float]
    beta: int
    eps: float

    def rhs(self, gamma: np.ndarray) -> np.ndarray:
        return np.cross(self.rho, gamma) - self.beta * np.asarray(self.rho4, dtype=float)

    def linear_rhs(self):
        """rhs as gamma -> A gamma - b with A the cross-product matrix of rho (faster)."""
        r1, r2, r3 = self.rho
        A = np.array([[0.0, -r3, r2], [r3, 0.0, -r1], [-r2, r1, 0.0]])
        b = self.beta * np.asarray(self.rho4, dtype=float)
        return lambda g: A @ g - b


def orthonormal_frame(rho) -> np.ndarray:
    """Right-handed orthogonal O whose third column is rho/|rho|.

    Seed: the standard basis vector on which rho/|rho| has the smallest
    absolute component (lowest index on ties), Gram-Schmidt against it.
    """
    rho = np.asarray(rho, dtype=float)
    norm = float(np.linalg.norm(rho))
    if norm == 0.0:
        raise ValueError("rho must be nonzero")
    u = rho / norm
    k = int(np.argmin(np.abs(u)))
    seed = np.zeros(3)
    seed[k] = 1.0
    v1 = seed - np.dot(seed, u) * u
    v1 /= np.linalg.norm(v1)
    v2 = np.cross(u, v1)
    return np.column_stack([v1, v2, u])


@dataclass(frozen=True)
class ClosedFormSolution:
    O: np.ndarray
    speed: float  # |rho|

    def J(self, eps: float) -> np.ndarray:
        c, s = math.cos(self.speed * eps), math.sin(self.speed * eps)
        return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])

    def Jint(self, eps: float) -> np.ndarray:
        """Integral of J from 0 to eps, entrywise in closed form."""
        r = self.speed
        s, one_minus_c = math.sin(r * eps) / r, (1 - math.cos(r * eps)) / r
        return np.array([[s, -one_minus_c, 0.0], [one_minus_c, s, 0.0], [0.0, 0.0, eps]])

    def Jint_det(self, eps: float) -> float:
        r = self.speed
        return (2 - 2 * math.cos(r * eps)) / (r * r) * eps

    def gamma(self, p: LieOdeProblem, eps: float) -> np.ndarray:
        O = self.O
        out = O @ self.J(eps) @ O.T @ np.asarray(p.phi, dtype=float)
        if p.beta:
            out = out - p.beta * (O @ self.Jint(eps) @ O.T @ np.asarray(p.rho4, dtype=float))
        return out


def closed_form(rho) -> ClosedFormSolution:
    return ClosedFormSolution(orthonormal_frame(rho), float(np.linalg.norm(rho)))


def lie_ode_compare(p: LieOdeProblem, checkpoints: int = 10) -> dict:
    """Closed form vs RK4 at ``checkpoints`` equally spaced times in (0, eps]."""
    if not np.any(np.asarray(p.rho)):
        raise ValueError("rho must be nonzero")
    sol = closed_form(p.rho)
    total = max(100, math.ceil(1000 * abs(p.eps)))
    per = max(1, math.ceil(total / checkpoints))
    h = p.eps / checkpoints
    y = np.asarray(p.phi, dtype=float)
    rhs = p.linear_rhs()
    deviation, norm_drift_closed, norm_drift_rk4 = 0.0, 0.0, 0.0
    phi_norm = float(np.linalg.norm(p.phi))
    for k in range(1, checkpoints + 1):
        y = rk4(rhs, y, h, per)
        exact = sol.gamma(p, k * h)
        deviation = max(deviation, float(np.linalg.norm(y - exact)))
        if p.beta == 0:
            norm_drift_closed = max(norm_drift_closed, abs(float(np.linalg.norm(exact)) - phi_norm))
            norm_drift_rk4 = max(norm_drift_rk4, abs(float(np.linalg.norm(y)) - phi_norm))
    return {
        "deviation": deviation,
        "norm_drift_closed": norm_drift_closed,
        "norm_drift_rk4": norm_drift_rk4,
        "orthogonality": float(np.max(np.abs(sol.O.T @ sol.O - np.eye(3)))),
    }


def annihilating_rho4(rho, phi, eps: float) -> tuple[np.ndarray, float]:
    """rho4 = O (int_0^eps J)^{-1} J(eps) O^T phi, and det(int_0^eps J)."""
    sol = closed_form(rho)
    det = sol.Jint_det(eps)
    if abs(det) < 1e-14:
        raise ValueError(f"integral of J is singular at eps = {eps} (det = {det})")
    O = sol.O
    rhs = sol.J(eps) @ O.T @ np.asarray(phi, dtype=float)
    return O @ np.linalg.solve(sol.Jint(eps), rhs), det


def random_lie_ode_problem(rng, beta: int | None = None, eps_range=(-2.0, 2.0)) -> LieOdeProblem:
    while True:
        rho = rng.uniform(-2, 2, 3)
        if np.linalg.norm(rho) > 1e-3:
            break
    return LieOdeProblem(
        tuple(rho), tuple(rng.uniform(-1, 1, 3)), tuple(rng.uniform(-1, 1, 3)),
        int(rng.integers(0, 2)) if beta is None else beta, float(rng.uniform(*eps_range)),
    )


# ==========================================================================
# coordinate changes for R(so(3),1)


PLANAR_FIELDS = "(1 + x1^2)*d1 + x1*x2*d2\nx2*d1 - x1*d2\n-x1*x2*d1 - (1 + x2^2)*d2"
ROTATION_FIELDS = "x2*d3 - x3*d2\nx3*d1 - x1*d3\nx1*d2 - x2*d1"


def stereographic_map() -> PointMap:
    """(x1, x2) -> (t, x) with tan x1 = t/x and cot x2 = sqrt(x^2 + t^2).

    Branch: t = -cot x2 sin x1, x = -cot x2 cos x1 on 0 < x2 < pi/2.
    """
    X1, X2 = NumMapExpr.var(1), NumMapExpr.var(2)
    cot2 = nummap.cos(X2) / nummap.sin(X2)
    t = -cot2 * nummap.sin(X1)
    x = -cot2 * nummap.cos(X1)
    T, Xp = NumMapExpr.var(1), NumMapExpr.var(2)
    inv1 = nummap.atan2(-T, -Xp)
    inv2 = nummap.acot(nummap.sqrt(T * T + Xp * Xp))
    return PointMap(2, (t, x), (inv1, inv2), mode="numeric")


def spherical_map() -> PointMap:
    """(longitude x1, latitude x2, radius x3) -> Cartesian coordinates."""
    fwd = [parse_expr(s, 3) for s in ("x3*cos(x2)*cos(x1)", "x3*cos(x2)*sin(x1)", "x3*sin(x2)")]
    Y1, Y2, Y3 = (NumMapExpr.var(i) for i in (1, 2, 3))
    r = nummap.sqrt(Y1 * Y1 + Y2 * Y2 + Y3 * Y3)
    inv = (nummap.atan2(Y2, Y1), nummap.atan(Y3 / nummap.sqrt(Y1 * Y1 + Y2 * Y2)), r)
    return PointMap(3, tuple(NumMapExpr.from_exact(f) for f in fwd), inv, mode="numeric")


def _stereo_sampler(rng):
    return np.array([rng.uniform(-math.pi, math.pi), rng.uniform(0.2, 1.35)])


def _sphere_sampler(rng):
    return np.array([rng.uniform(-math.pi, math.pi), rng.uniform(-1.35, 1.35), rng.uniform(0.5, 2.0)])


def coordinate_change_checks(samples: int = 100, seed: int = 0, tol: float = 1e-9) -> list[CheckReport]:
    """Planar (stereographic) and Cartesian forms of R(so(3),1), numerically."""
    from .catalog import instantiate

    ss = np.random.SeedSequence(seed)
    rng_a, rng_b, rng_c = (np.random.default_rng(s) for s in ss.spawn(3))
    reports = []

    so3 = instantiate("so3", 1, 2)
    smap = stereographic_map()
    planar = parse_field_list(PLANAR_FIELDS, 2)
    perm, res, res_id = match_basis(so3, planar, smap, samples, rng_a, _stereo_sampler)
    relation = 0.0
    for _ in range(samples):
        p = _stereo_sampler(rng_c)
        t, x = (f.eval(p) for f in smap.forward)
        relation = max(relation, abs(math.tan(p[0]) - t / x), abs(1 / math.tan(p[1]) - math.hypot(x, t)))
    ok = res <= tol and relation <= tol and smap.check_inverse(rng_c, 20, _stereo_sampler)
    reports.append(CheckReport(
        "stereographic-map", "ok" if ok else "fail", res,
        [] if res_id <= tol else [f"basis order differs: push(e_i) = sign * planar_j with {_fmt_perm(perm)}"],
        samples, seed,
        details={"permutation": _fmt_perm(perm), "identity_order_residual": res_id,
                 "substitution_residual": relation},
    ))

    rot = parse_field_list(ROTATION_FIELDS, 3)
    cmap = spherical_map()
    so3_3 = instantiate("so3", 1, 3)
    perm, res, res_id = match_basis(so3_3, rot, cmap, samples, rng_b, _sphere_sampler)

    def unit_sphere(rng):
        p = _sphere_sampler(rng)
        p[2] = 1.0
        return p

    _, res_unit, _ = match_basis(so3_3, rot, cmap, 10, rng_c, unit_sphere)
    ok = max(res, res_unit) <= tol and cmap.check_inverse(rng_c, 20, _sphere_sampler)
    reports.append(CheckReport(
        "spherical-map", "ok" if ok else "fail", max(res, res_unit), [], samples, seed,
        details={"permutation": _fmt_perm(perm), "identity_order_residual": res_id,
                 "unit_sphere_residual": res_unit},
    ))
    return reports


def _fmt_perm(perm) -> str:
    return ", ".join(f"e{i + 1}->{'+' if s > 0 else '-'}R{j + 1}" for i, (j, s) in enumerate(perm))


# ==========================================================================
# suites (one CheckReport each); every trial gets its own spawned generator


def _trial_rngs(seed: int, trials: int):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(trials)]


def suite_transform_generators(trials: int = 20, seed: int = 0) -> CheckReport:
    draws = [TransformParams.symbolic(), TransformParams(Expr.param("a"), 1, 0)]
    draws += [random_transform(r) for r in _trial_rngs(seed, trials)]
    discrepancies = []
    for tp in draws:
        rep = check_transformed_generators(tp)
        discrepancies += [f"f = ({tp.f1}, {tp.f2}, {tp.f3}): {d}" for d in rep.discrepancies]
    return CheckReport("transform-generators", "fail" if discrepancies else "ok", 0.0,
                       discrepancies, len(draws), seed)


def suite_transform_ansatz(trials: int = 20, seed: int = 0) -> CheckReport:
    """Shape preservation, corrected formulas, group property; printed formulas diffed."""
    rngs = _trial_rngs(seed, trials)
    failures, printed_bad = [], [0, 0, 0]
    cases = [(AnsatzCoefficients.symbolic(), TransformParams.symbolic()),
             (AnsatzCoefficients.symbolic(1), TransformParams.symbolic(1))]
    cases += [(random_ansatz(r), random_transform(r)) for r in rngs]
    for ac, tp in cases:
        try:
            res = transform_ansatz(ac, tp)
        except AnsatzEscapeError as exc:
            failures.append(str(exc))
            continue
        for a, (got, want) in enumerate(zip(res.coefficients.as_tuple(), corrected_tilde_xi(ac, tp)), start=1):
            if not (got - want).is_zero():
                failures.append(f"xi~{a} differs from the recomputed formula for f = ({tp.f1}, {tp.f2}, {tp.f3})")
        for a, d in enumerate(res.printed_discrepancy):
            printed_bad[a] += not d.is_zero()
    for r in rngs:
        ac, g, f = random_ansatz(r), random_transform(r), random_transform(r)
        while True:
            try:
                gf = compose_transforms(g, f)
                break
            except ValueError:
                g = random_transform(r)
        twice = transform_ansatz(transform_ansatz(ac, f).coefficients, g).coefficients
        once = transform_ansatz(ac, gf).coefficients
        if any(not (x - y).is_zero() for x, y in zip(twice.as_tuple(), once.as_tuple())):
            failures.append("composition of two transforms differs from the composed transform")
    discrepancies = failures + [
        f"printed formula for xi~{a + 1} disagrees with the pushforward in {k} of {len(cases)} cases"
        for a, k in enumerate(printed_bad) if k
    ]
    return CheckReport("transform-ansatz", "fail" if failures else "ok", 0.0, discrepancies,
                       len(cases), seed, details={"printed_formulas_agree": not any(printed_bad)})


def suite_invariant(trials: int = 20, seed: int = 0) -> CheckReport:
    cases = [(AnsatzCoefficients.symbolic(), TransformParams.symbolic())]
    cases += [(random_ansatz(r), random_transform(r)) for r in _trial_rngs(seed, trials)]
    discrepancies = []
    for ac, tp in cases:
        diff = invariant_I(transform_ansatz(ac, tp).coefficients) - invariant_I(ac)
        if not diff.is_zero():
            discrepancies.append(f"I changes by {diff} for f = ({tp.f1}, {tp.f2}, {tp.f3})")
    return CheckReport("invariant", "fail" if discrepancies else "ok", 0.0, discrepancies, len(cases), seed)


def suite_commutant(trials: int = 6, seed: int = 0) -> CheckReport:
    discrepancies, details = [], {}
    rng = np.random.default_rng(seed)
    cases = [CommutantSolution(0, 0, 1, (), 0), CommutantSolution(0, 0, 1, (), 1)]
    cases += [CommutantSolution.symbolic(a, hat) for a in (0, 1) for hat in (1, 2)]
    for cs in cases:
        rep = check_commutant_system(cs, rng)
        discrepancies += [f"alpha={cs.alpha}, n={cs.n}: {d}" for d in rep.discrepancies]
        details[f"alpha={cs.alpha},n={cs.n}"] = rep.details["printed_system_equivalent"]
    return CheckReport("commutant", "fail" if discrepancies else "ok", 0.0, discrepancies, len(cases), seed,
                       details={"printed_system_equivalent": details})


def suite_lie_ode(trials: int = 50, seed: int = 0) -> CheckReport:
    worst, drift = 0.0, 0.0
    for r in _trial_rngs(seed, trials):
        out = lie_ode_compare(random_lie_ode_problem(r))
        worst = max(worst, out["deviation"])
        zero_beta = lie_ode_compare(random_lie_ode_problem(r, beta=0))
        worst = max(worst, zero_beta["deviation"])
        drift = max(drift, zero_beta["norm_drift_closed"], zero_beta["norm_drift_rk4"])
    ok = worst <= 1e-8 and drift <= 1e-10
    return CheckReport("lie-ode", "ok" if ok else "fail", worst, [], trials, seed,
                       details={"max_norm_drift_beta0": drift})


def suite_annihilate(trials: int = 50, seed: int = 0) -> CheckReport:
    worst, dets = 0.0, []
    for r in _trial_rngs(seed, trials):
        p = random_lie_ode_problem(r, beta=1, eps_range=(0.1, 1.0))
        rho4, det = annihilating_rho4(p.rho, p.phi, p.eps)
        dets.append(det)
        q = LieOdeProblem(p.rho, tuple(rho4), p.phi, 1, p.eps)
        end = closed_form(q.rho).gamma(q, q.eps)
        worst = max(worst, float(np.linalg.norm(end)), lie_ode_compare(q)["deviation"])
    ok = worst <= 1e-8 and all(d != 0 for d in dets)
    return CheckReport("annihilate", "ok" if ok else "fail", worst, [], trials, seed,
                       details={"min_abs_det_Jint": min(abs(d) for d in dets), "max_abs_det_Jint": max(abs(d) for d in dets)})


def suite_coordinate_change(trials: int = 100, seed: int = 0) -> list[CheckReport]:
    return coordinate_change_checks(max(100, trials), seed)


SUITES = {
    "transform-generators": suite_transform_generators,
    "transform-ansatz": suite_transform_ansatz,
    "invariant": suite_invariant,
    "commutant": suite_commutant,
    "lie-ode": suite_lie_ode,
    "annihilate": suite_annihilate,
    "coordinate-change": suite_coordinate_change,
}


def run_suite(name: str, trials: int | None = None, seed: int = 0) -> list[CheckReport]:
    """Run one named suite (or "all"); ``trials`` None uses each suite's default."""
    names = list(SUITES) if name == "all" else [name]
    out = []
    for nm in names:
        if nm not in SUITES:
            raise KeyError(f"unknown check {nm!r}; choose from {', '.join(SUITES)} or all")
        kwargs = {"seed": seed} if trials is None else {"seed": seed, "trials": trials}
        res = SUITES[nm](**kwargs)
        out.extend(res if isinstance(res, list) else [res])
    return out
