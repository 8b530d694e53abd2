from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
import sympy

from lierealize.algebra import ALGEBRAS, AlgebraTag
from lierealize.catalog import (
    CatalogError, get_entry, instantiate, list_catalog, load_catalog, verify_entry,
)
from lierealize.catalog import parse_catalog
from conftest import to_sympy


def test_catalog_size():
    entries = load_catalog()
    assert len(entries) == 20
    counts = Counter(e.algebra for e in entries)
    assert counts == {
        AlgebraTag.SL2R: 5, AlgebraTag.SL2R_PLUS_A1: 9, AlgebraTag.SO3: 2, AlgebraTag.SO3_PLUS_A1: 4,
    }


def test_indices_are_contiguous():
    for tag in ALGEBRAS:
        assert [e.index for e in list_catalog(tag)] == list(range(1, len(list_catalog(tag)) + 1))


def test_parametric_entry():
    entry = get_entry("sl2R_plus_A1", 3)
    assert entry.params == {"c": (Fraction(-1), Fraction(0), Fraction(1))}
    assert len(entry.param_assignments()) == 3


def test_instantiate_errors():
    with pytest.raises(CatalogError):
        instantiate("so3", 2, n=2)  # below n_min
    with pytest.raises(CatalogError):
        instantiate("sl2R_plus_A1", 3, params={"c": 2})
    with pytest.raises(CatalogError):
        instantiate("sl2R_plus_A1", 3)
    with pytest.raises(CatalogError):
        instantiate("sl2R", 1, params={"c": 0})
    with pytest.raises(CatalogError):
        get_entry("so3", 7)
    with pytest.raises(CatalogError):
        get_entry("gl2", 1)


def test_instantiate_pads_inert_variables():
    fields = instantiate("so3", 1, n=4)
    assert all(f.n == 4 for f in fields)
    assert verify_entry(get_entry("so3", 1), 4).ok


def test_parse_catalog_errors():
    with pytest.raises(CatalogError):
        parse_catalog("algebra: so3\nindex: 1\n")
    with pytest.raises(CatalogError):
        parse_catalog("algebra: e8\nindex: 1\nn_min: 1\nfields:\n  d1\n")
    with pytest.raises(CatalogError):
        parse_catalog("colour: blue\n")


def test_describe_is_json_ready():
    import json

    json.dumps([e.describe() for e in load_catalog()])


def test_failed_entry_keeps_printed_text():
    entry = get_entry("so3", 1)
    bad = type(entry)(entry.algebra, entry.index, entry.n_min, entry.params,
                      (entry.fields[1], entry.fields[0], entry.fields[2]))
    rep = verify_entry(bad)
    assert not rep.ok
    assert rep.describe()["discrepancy"]["printed_fields"] == list(bad.fields)


def _sympy_bracket(X, Y, syms):
    return [
        sum(X[b] * sympy.diff(Y[a], syms[b]) - Y[b] * sympy.diff(X[a], syms[b]) for b in range(len(syms)))
        for a in range(len(syms))
    ]


def test_catalog_brackets_with_sympy():
    # independent route: sympy differentiation of the printed text, checked numerically
    rng = np.random.default_rng(3)
    for entry in load_catalog():
        sc = ALGEBRAS[entry.algebra]
        for assignment in entry.param_assignments() or [{}]:
            fields = entry.instantiate(None, assignment)
            n = fields[0].n
            syms = sympy.symbols(" ".join(f"x{i}" for i in range(1, n + 1)), seq=True)
            sf = [[to_sympy(c) for c in X.coeffs] for X in fields]
            points = [rng.uniform(-0.7, 0.7, n) for _ in range(4)]
            for i in range(sc.m):
                for j in range(i + 1, sc.m):
                    br = _sympy_bracket(sf[i], sf[j], syms)
                    rhs = [sum(float(sc.c[i][j][k]) * sf[k][a] for k in range(sc.m)) for a in range(n)]
                    f = sympy.lambdify(syms, [b - r for b, r in zip(br, rhs)], "math")
                    for p in points:
                        assert np.max(np.abs(f(*p))) < 1e-9, (entry.name, assignment, i + 1, j + 1)
