"""Structure constants, Killing form and identification of the four
unsolvable real Lie algebras of dimension at most four."""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from . import _linalg
from .liefield import VectorField, constant_relations, express_in_span, lie_bracket
from .symexpr import Expr, Ratio

__all__ = [
    "AlgebraTag",
    "StructureConstants",
    "ValidationReport",
    "RealizationReport",
    "ALGEBRAS",
    "validate",
    "killing_form",
    "signature",
    "identify",
    "express_in_span",
    "verify_realization",
    "derived_basis",
    "center_basis",
]


class AlgebraTag(str, enum.Enum):
    SL2R = "sl2R"
    SO3 = "so3"
    SL2R_PLUS_A1 = "sl2R_plus_A1"
    SO3_PLUS_A1 = "so3_plus_A1"
    UNKNOWN = "unknown"

    def __str__(self):
        return self.value


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class StructureConstants:
    """``c[i][j][k]`` with [e_i, e_j] = sum_k c[i][j][k] e_k (0-based storage)."""

    m: int
    c: tuple

    @classmethod
    def from_brackets(cls, m: int, brackets: Mapping[tuple[int, int], Mapping[int, object]]) -> "StructureConstants":
        """Build from 1-based relations ``{(i, j): {k: coeff}}``; antisymmetric completion."""
        c = [[[Fraction(0)] * m for _ in range(m)] for _ in range(m)]
        for (i, j), rhs in brackets.items():
            for k, q in rhs.items():
                q = _frac(q)
                c[i - 1][j - 1][k - 1] = q
                c[j - 1][i - 1][k - 1] = -q
        return cls.from_array(c)

    @classmethod
    def from_array(cls, c) -> "StructureConstants":
        m = len(c)
        return cls(m, tuple(tuple(tuple(_frac(x) for x in row) for row in plane) for plane in c))

    @classmethod
    def from_json(cls, data) -> "StructureConstants":
        if isinstance(data, str):
            data = json.loads(data)
        m = int(data["m"])
        rels: dict[tuple[int, int], dict[int, Fraction]] = {}
        for i, j, k, q in data["c"]:
            i, j, k = int(i), int(j), int(k)
            if not (1 <= i <= m and 1 <= j <= m and 1 <= k <= m):
                raise ValueError(f"index out of range in entry {[i, j, k, q]}")
            if i >= j:
                raise ValueError(f"entries must list i < j, got {[i, j, k, q]}")
            rels.setdefault((i, j), {})[k] = Fraction(str(q))
        return cls.from_brackets(m, rels)

    def to_json(self) -> dict:
        entries = []
        for i in range(self.m):
            for j in range(i + 1, self.m):
                for k in range(self.m):
                    q = self.c[i][j][k]
                    if q:
                        entries.append([i + 1, j + 1, k + 1, str(q)])
        return {"m": self.m, "c": entries}

    def bracket(self, u: Sequence[Fraction], v: Sequence[Fraction]) -> list[Fraction]:
        m = self.m
        out = [Fraction(0)] * m
        for i in range(m):
            if not u[i]:
                continue
            for j in range(m):
                if not v[j]:
                    continue
                uv = u[i] * v[j]
                row = self.c[i][j]
                for k in range(m):
                    if row[k]:
                        out[k] += uv * row[k]
        return out

    def ad(self, u: Sequence[Fraction]) -> list[list[Fraction]]:
        """Matrix of ad_u in the basis: column j is [u, e_j]."""
        cols = [self.bracket(u, _unit(j, self.m)) for j in range(self.m)]
        return _linalg.transpose(cols)

    def change_basis(self, P) -> "StructureConstants":
        """Constants in the basis e'_i = sum_a P[a][i] e_a (P invertible)."""
        P = [[_frac(x) for x in row] for row in P]
        Pinv = _linalg.inverse(P)
        cols = _linalg.transpose(P)
        c = [[[Fraction(0)] * self.m for _ in range(self.m)] for _ in range(self.m)]
        for i in range(self.m):
            for j in range(self.m):
                w = self.bracket(cols[i], cols[j])
                new = [sum((Pinv[k][a] * w[a] for a in range(self.m)), Fraction(0)) for k in range(self.m)]
                c[i][j] = new
        return StructureConstants.from_array(c)

    def with_entry(self, i: int, j: int, k: int, value) -> "StructureConstants":
        """Copy with c_ij^k (1-based) set to ``value`` and c_ji^k = -value."""
        c = [[list(row) for row in plane] for plane in self.c]
        c[i - 1][j - 1][k - 1] = _frac(value)
        c[j - 1][i - 1][k - 1] = -_frac(value)
        return StructureConstants.from_array(c)


def _unit(j: int, m: int) -> list[Fraction]:
    return [Fraction(int(i == j)) for i in range(m)]


ALGEBRAS: dict[AlgebraTag, StructureConstants] = {
    AlgebraTag.SL2R: StructureConstants.from_brackets(3, {(1, 2): {1: 1}, (1, 3): {2: 2}, (2, 3): {3: 1}}),
    AlgebraTag.SO3: StructureConstants.from_brackets(3, {(1, 2): {3: 1}, (1, 3): {2: -1}, (2, 3): {1: 1}}),
    AlgebraTag.SL2R_PLUS_A1: StructureConstants.from_brackets(4, {(1, 2): {1: 1}, (1, 3): {2: 2}, (2, 3): {3: 1}}),
    AlgebraTag.SO3_PLUS_A1: StructureConstants.from_brackets(4, {(1, 2): {3: 1}, (1, 3): {2: -1}, (2, 3): {1: 1}}),
}


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violation: str | None = None  # "antisymmetry" | "jacobi"
    indices: tuple[int, ...] = ()  # 1-based
    value: Fraction | None = None

    def __str__(self):
        if self.ok:
            return "ok"
        return f"{self.violation} violated at {self.indices}: value {self.value}"


def validate(sc: StructureConstants) -> ValidationReport:
    """Exact antisymmetry and Jacobi checks; reports the first violation."""
    m, c = sc.m, sc.c
    for i in range(m):
        for j in range(i, m):
            for k in range(m):
                if c[i][j][k] + c[j][i][k] != 0:
                    return ValidationReport(False, "antisymmetry", (i + 1, j + 1, k + 1), c[i][j][k])
    for i in range(m):
        for j in range(i + 1, m):
            for k in range(j + 1, m):
                for s in range(m):
                    total = sum(
                        (c[i][j][l] * c[l][k][s] + c[j][k][l] * c[l][i][s] + c[k][i][l] * c[l][j][s]
                         for l in range(m)),
                        Fraction(0),
                    )
                    if total:
                        return ValidationReport(False, "jacobi", (i + 1, j + 1, k + 1, s + 1), total)
    return ValidationReport(True)


def killing_form(sc: StructureConstants) -> list[list[Fraction]]:
    """K[i][j] = trace(ad e_i . ad e_j)."""
    ads = [sc.ad(_unit(i, sc.m)) for i in range(sc.m)]
    K = [[Fraction(0)] * sc.m for _ in range(sc.m)]
    for i in range(sc.m):
        for j in range(i, sc.m):
            prod = _linalg.matmul(ads[i], ads[j])
            K[i][j] = K[j][i] = sum((prod[t][t] for t in range(sc.m)), Fraction(0))
    return K


def signature(sym) -> tuple[int, int, int]:
    """(positive, negative, null) counts by exact congruence diagonalization."""
    diag = _linalg.congruence_diagonal(sym)
    return (sum(d > 0 for d in diag), sum(d < 0 for d in diag), sum(d == 0 for d in diag))


def derived_basis(sc: StructureConstants) -> list[list[Fraction]]:
    """Echelon basis of span{[e_i, e_j]}."""
    vecs = [sc.bracket(_unit(i, sc.m), _unit(j, sc.m)) for i in range(sc.m) for j in range(i + 1, sc.m)]
    red, piv = _linalg.rref(vecs) if vecs else ([], [])
    return red[: len(piv)]


def center_basis(sc: StructureConstants) -> list[list[Fraction]]:
    """Basis of {v : [v, e_j] = 0 for all j}."""
    rows = []
    for j in range(sc.m):
        for k in range(sc.m):
            rows.append([sc.c[i][j][k] for i in range(sc.m)])
    return _linalg.nullspace(rows, sc.m)


def restrict(sc: StructureConstants, basis: Sequence[Sequence[Fraction]]) -> StructureConstants:
    """Constants of the subalgebra spanned by ``basis`` (must be closed)."""
    d = len(basis)
    cols = _linalg.transpose([list(b) for b in basis])
    c = [[[Fraction(0)] * d for _ in range(d)] for _ in range(d)]
    for i in range(d):
        for j in range(d):
            w = sc.bracket(basis[i], basis[j])
            coords = _linalg.solve(cols, w)
            if coords is None:
                raise ValueError("basis does not span a subalgebra")
            c[i][j] = coords
    return StructureConstants.from_array(c)


def identify(sc: StructureConstants) -> AlgebraTag:
    """Decide which of the four target algebras ``sc`` is (basis independent)."""
    report = validate(sc)
    if not report.ok:
        raise ValueError(f"not a Lie algebra: {report}")
    K = killing_form(sc)
    p, q, null = signature(K)
    if sc.m == 3 and null == 0:
        if (p, q) == (2, 1):
            return AlgebraTag.SL2R
        if (p, q) == (0, 3):
            return AlgebraTag.SO3
        return AlgebraTag.UNKNOWN
    if sc.m == 4 and p + q == 3:
        derived = derived_basis(sc)
        center = center_basis(sc)
        if len(derived) != 3 or len(center) != 1:
            return AlgebraTag.UNKNOWN
        if _linalg.rank(derived + center) != 4:
            return AlgebraTag.UNKNOWN
        inner = identify(restrict(sc, derived))
        return {
            AlgebraTag.SL2R: AlgebraTag.SL2R_PLUS_A1,
            AlgebraTag.SO3: AlgebraTag.SO3_PLUS_A1,
        }.get(inner, AlgebraTag.UNKNOWN)
    return AlgebraTag.UNKNOWN


@dataclass
class RealizationReport:
    ok: bool
    failures: list[tuple[int, int, VectorField]] = field(default_factory=list)
    relations: list[tuple[Fraction, ...]] = field(default_factory=list)
    message: str = ""

    @property
    def first_failure(self) -> tuple[int, int] | None:
        return self.failures[0][:2] if self.failures else None

    def __str__(self):
        if self.ok:
            return "ok"
        parts = []
        for i, j, residual in self.failures:
            parts.append(f"[e{i}, e{j}] - c_{i}{j}^k e_k = {residual}")
        if self.relations:
            parts.append("not faithful: relations " + ", ".join(
                "(" + ", ".join(str(x) for x in r) + ")" for r in self.relations))
        if self.message:
            parts.append(self.message)
        return "; ".join(parts)


def verify_realization(fields: Sequence[VectorField], sc: StructureConstants, rng=None,
                       stop_at_first: bool = False) -> RealizationReport:
    """Exact check of every commutation relation plus faithfulness."""
    if len(fields) != sc.m:
        return RealizationReport(False, message=f"{len(fields)} fields for a {sc.m}-dimensional algebra")
    failures = []
    for i in range(sc.m):
        for j in range(i + 1, sc.m):
            residual = lie_bracket(fields[i], fields[j])
            for k in range(sc.m):
                q = sc.c[i][j][k]
                if q:
                    residual = residual - Ratio(Expr.const(q)) * fields[k]
            if not residual.is_zero():
                failures.append((i + 1, j + 1, residual))
                if stop_at_first:
                    return RealizationReport(False, failures)
    relations = constant_relations(fields, rng)
    return RealizationReport(not failures and not relations, failures, relations)
