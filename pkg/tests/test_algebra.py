import json
from fractions import Fraction

import numpy as np
import pytest

from lierealize.algebra import (
    ALGEBRAS, AlgebraTag, StructureConstants, center_basis, derived_basis, identify, killing_form, signature,
    validate, verify_realization,
)
from lierealize.catalog import instantiate
from lierealize.parser import parse_field_list


def numeric_killing(sc):
    # independent oracle: ad matrices as float arrays, K_ij = trace(ad_i ad_j)
    c = np.array([[[float(x) for x in row] for row in plane] for plane in sc.c])
    ads = [c[i].T for i in range(sc.m)]  # (ad e_i)_{kj} = c_ij^k
    return np.array([[np.trace(a @ b) for b in ads] for a in ads])


def random_basis_change(rng, m):
    while True:
        P = [[Fraction(int(rng.integers(-3, 4)), int(rng.integers(1, 3))) for _ in range(m)] for _ in range(m)]
        if abs(np.linalg.det(np.array(P, dtype=float))) > 1e-6:
            return P


@pytest.mark.parametrize("tag", list(ALGEBRAS))
def test_printed_tables_are_lie_algebras(tag):
    assert validate(ALGEBRAS[tag]).ok
    assert identify(ALGEBRAS[tag]) == tag


@pytest.mark.parametrize("tag", list(ALGEBRAS))
def test_killing_form_matches_trace_oracle(tag):
    sc = ALGEBRAS[tag]
    K = np.array(killing_form(sc), dtype=float)
    assert np.array_equal(K, numeric_killing(sc))


def test_killing_signatures():
    assert signature(killing_form(ALGEBRAS[AlgebraTag.SL2R])) == (2, 1, 0)
    assert signature(killing_form(ALGEBRAS[AlgebraTag.SO3])) == (0, 3, 0)
    assert signature(killing_form(ALGEBRAS[AlgebraTag.SO3_PLUS_A1])) == (0, 3, 1)


def test_sl2_killing_entries():
    K = killing_form(ALGEBRAS[AlgebraTag.SL2R])
    assert K == [[0, 0, -4], [0, 2, 0], [-4, 0, 0]]


@pytest.mark.parametrize("tag", list(ALGEBRAS))
def test_identify_is_basis_independent(tag, rng):
    sc = ALGEBRAS[tag]
    for _ in range(10):
        new = sc.change_basis(random_basis_change(rng, sc.m))
        assert validate(new).ok
        assert identify(new) == tag
        assert signature(killing_form(new)) == signature(killing_form(sc))


def test_change_basis_by_identity_is_noop():
    sc = ALGEBRAS[AlgebraTag.SO3]
    assert sc.change_basis([[1, 0, 0], [0, 1, 0], [0, 0, 1]]) == sc


@pytest.mark.parametrize("tag", list(ALGEBRAS))
def test_single_entry_mutation_breaks_jacobi(tag):
    sc = ALGEBRAS[tag]
    bad = sc.with_entry(1, 2, 2, sc.c[0][1][1] + 1)
    report = validate(bad)
    assert not report.ok and report.violation == "jacobi"


def test_antisymmetry_violation_reported():
    c = [[[Fraction(0)] * 3 for _ in range(3)] for _ in range(3)]
    c[0][1][2] = Fraction(1)
    report = validate(StructureConstants.from_array(c))
    assert report.violation == "antisymmetry" and report.indices == (1, 2, 3)


def test_identify_rejects_invalid():
    with pytest.raises(ValueError):
        identify(ALGEBRAS[AlgebraTag.SL2R].with_entry(1, 2, 2, 1))


def test_unknown_algebras():
    abelian = StructureConstants.from_brackets(3, {})
    assert identify(abelian) == AlgebraTag.UNKNOWN
    affine = StructureConstants.from_brackets(2, {(1, 2): {1: 1}})
    assert identify(affine) == AlgebraTag.UNKNOWN
    heisenberg_plus_a1 = StructureConstants.from_brackets(4, {(1, 2): {3: 1}})
    assert validate(heisenberg_plus_a1).ok
    assert identify(heisenberg_plus_a1) == AlgebraTag.UNKNOWN
    # so3 table with a fourth element acting nontrivially is not a Lie algebra
    assert not validate(StructureConstants.from_brackets(
        4, {(1, 2): {3: 1}, (1, 3): {2: -1}, (2, 3): {1: 1}, (1, 4): {4: 1}})).ok


def test_derived_and_center():
    sc = ALGEBRAS[AlgebraTag.SL2R_PLUS_A1]
    assert len(derived_basis(sc)) == 3
    assert center_basis(sc) == [[0, 0, 0, 1]]


def test_json_round_trip():
    sc = ALGEBRAS[AlgebraTag.SO3]
    data = json.loads(json.dumps(sc.to_json()))
    assert StructureConstants.from_json(data) == sc


def test_json_rejects_bad_indices():
    with pytest.raises(ValueError):
        StructureConstants.from_json({"m": 3, "c": [[2, 1, 3, "1"]]})
    with pytest.raises(ValueError):
        StructureConstants.from_json({"m": 3, "c": [[1, 2, 4, "1"]]})


def test_verify_realization_ok():
    assert verify_realization(instantiate("so3", 2), ALGEBRAS[AlgebraTag.SO3]).ok


def test_verify_realization_reports_first_failure():
    fields = instantiate("so3", 1)
    wrong = [fields[1], fields[0], fields[2]]
    report = verify_realization(wrong, ALGEBRAS[AlgebraTag.SO3])
    assert not report.ok and report.first_failure == (1, 2)
    assert "[e1, e2]" in str(report)


def test_verify_realization_detects_unfaithful():
    # an abelian pair represented by the same field twice
    sc = StructureConstants.from_brackets(2, {})
    report = verify_realization(parse_field_list("d1\n2*d1", 1), sc)
    assert not report.ok and report.relations


def test_verify_realization_wrong_count():
    assert not verify_realization(instantiate("so3", 1)[:2], ALGEBRAS[AlgebraTag.SO3]).ok
