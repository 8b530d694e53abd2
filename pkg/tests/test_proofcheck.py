import math
from fractions import Fraction

import numpy as np
import pytest

from lierealize import proofcheck as pc
from lierealize.liefield import VectorField, lie_bracket
from lierealize.parser import parse_field
from lierealize.symexpr import Expr, Ratio

xi1, xi2, xi3 = (Expr.param(f"xi{k}") for k in (1, 2, 3))


# -- the form-preserving map ------------------------------------------------


def test_identity_map_preserves_generators():
    assert pc.check_transformed_generators(pc.TransformParams.identity()).ok


def test_symbolic_map_preserves_generators():
    assert pc.check_transformed_generators(pc.TransformParams(Expr.param("a"), 1, 0)).ok
    assert pc.check_transformed_generators(pc.TransformParams.symbolic()).ok


def test_random_maps_preserve_generators(rng):
    for _ in range(5):
        assert pc.check_transformed_generators(pc.random_transform(rng)).ok


def test_degenerate_map_rejected():
    with pytest.raises(ValueError):
        pc.TransformParams(1, 0, 0)


def test_wrong_map_is_caught():
    # a single power of (1 - f1 x3) in x~2, with its own exact inverse, must break a generator's form
    from lierealize.liefield import pushforward

    good = pc.sl2_preserving_map(pc.TransformParams(Fraction(1, 2), 1, 0))
    y1, y2, y3 = (Ratio(Expr.var(i)) for i in (1, 2, 3))
    fwd = (good.forward[0], Ratio(Expr.var(2)) / (1 - Ratio(Expr.var(3)) / 2), good.forward[2])
    inv = (y1 - y2 / 2, y2 / (1 + y3 / 2), good.inverse[2])
    broken = pc.PointMap(3, fwd, inv)
    assert broken.check_inverse()
    pushed = [pushforward(e, broken) for e in pc.sl2_generators()]
    assert any(P != e for P, e in zip(pushed, pc.sl2_generators()))


def test_composition_matches_moebius_product():
    f = pc.TransformParams(Fraction(1, 3), 2, Fraction(-1, 2))
    g = pc.TransformParams(Fraction(-2, 5), Fraction(3, 4), 1)
    h = pc.compose_transforms(g, f)
    inner = dict(enumerate(pc.sl2_preserving_map(f).forward, start=1))
    for F_g, F_h in zip(pc.sl2_preserving_map(g).forward, pc.sl2_preserving_map(h).forward):
        assert F_g.subs_vars(inner) == F_h


def test_composition_without_normalized_form():
    # g1 * f3 = 1 puts the pole of the composite at x3 = infinity
    with pytest.raises(ValueError):
        pc.compose_transforms(pc.TransformParams(1, 1, 0), pc.TransformParams(0, 1, 1))


# -- coefficients of the commuting operator ----------------------------------


def test_identity_map_fixes_coefficients():
    ac = pc.AnsatzCoefficients.symbolic()
    res = pc.transform_ansatz(ac, pc.TransformParams.identity())
    assert res.coefficients.as_tuple() == ac.as_tuple()


def test_leading_scaling():
    res = pc.transform_ansatz(pc.AnsatzCoefficients(1, 0, 0), pc.TransformParams(0, 2, 0))
    assert res.coefficients.xi1 == Ratio(Fraction(1, 2))


def test_transformed_operator_keeps_the_ansatz_form():
    res = pc.transform_ansatz(pc.AnsatzCoefficients.symbolic(), pc.TransformParams.symbolic())
    assert res.in_shape
    assert res.transformed_field == pc.ansatz_field(res.coefficients)


def test_ansatz_commutes_with_generators():
    e4 = pc.ansatz_field(pc.AnsatzCoefficients.symbolic())
    for e in pc.sl2_generators():
        assert lie_bracket(e4, e).is_zero()


def test_recomputed_formulas_symbolic():
    for hat in (0, 1, 2):
        ac, tp = pc.AnsatzCoefficients.symbolic(hat), pc.TransformParams.symbolic(hat)
        got = pc.transform_ansatz(ac, tp).coefficients
        for a, b in zip(got.as_tuple(), pc.corrected_tilde_xi(ac, tp)):
            assert (a - b).is_zero()


def test_printed_formulas_first_agrees_others_do_not():
    ac, tp = pc.AnsatzCoefficients.symbolic(), pc.TransformParams.symbolic()
    d1, d2, d3 = pc.transform_ansatz(ac, tp).printed_discrepancy
    assert d1.is_zero()
    assert not d2.is_zero() and not d3.is_zero()


def test_printed_formulas_agree_when_f3_vanishes_and_xi3_does():
    # the (f3)^2 vs f3 slip is invisible at f3 = 0; the duplicated xi3 f2 needs xi3 = 0
    ac = pc.AnsatzCoefficients(xi1, xi2, 0)
    tp = pc.TransformParams(Expr.param("f1"), Expr.param("f2"), 0)
    assert pc.transform_ansatz(ac, tp).printed_agrees


def test_inert_variables_carry_chain_rule_terms():
    ac, tp = pc.AnsatzCoefficients.symbolic(1), pc.TransformParams.symbolic(1)
    res = pc.transform_ansatz(ac, tp)
    plain = pc.transform_ansatz(pc.AnsatzCoefficients.symbolic(), pc.TransformParams.symbolic())
    assert not (res.coefficients.xi1 - plain.coefficients.xi1).is_zero()
    assert res.coefficients.xi_j[0] == Ratio(Expr.param("xi_4") * Expr.param("fj4_4"))


def test_invariant_examples():
    c = Expr.param("c")
    assert pc.invariant_I(pc.AnsatzCoefficients(1, 0, c)) == Ratio(-4 * c)
    assert pc.invariant_I(pc.AnsatzCoefficients(0, 1, 0)) == Ratio(1)
    with pytest.raises(ValueError):
        pc.invariant_I(pc.AnsatzCoefficients.symbolic(1))


def test_invariant_exactly_preserved_symbolic():
    ac, tp = pc.AnsatzCoefficients.symbolic(), pc.TransformParams.symbolic()
    out = pc.transform_ansatz(ac, tp).coefficients
    assert (pc.invariant_I(out) - pc.invariant_I(ac)).is_zero()


def test_group_property(rng):
    for _ in range(5):
        ac, f, g = pc.random_ansatz(rng), pc.random_transform(rng), pc.random_transform(rng)
        twice = pc.transform_ansatz(pc.transform_ansatz(ac, f).coefficients, g).coefficients
        once = pc.transform_ansatz(ac, pc.compose_transforms(g, f)).coefficients
        assert twice.as_tuple() == once.as_tuple()


def test_ansatz_rejects_x_dependence():
    with pytest.raises(ValueError):
        pc.AnsatzCoefficients(Expr.var(1), 0, 0)


# -- commutant of the so(3) realizations --------------------------------------


def test_alpha_zero_with_d3():
    e4 = pc.commutant_field(pc.CommutantSolution(0, 0, 1, (), 0))
    assert e4 == VectorField.coordinate(3, 3)
    for e in pc.so3_alpha_fields(0, 3):
        assert lie_bracket(e4, e).is_zero()


def test_alpha_one_e3_prime():
    assert pc.commutant_field(pc.CommutantSolution(0, 0, 1, (), 1)) == VectorField.coordinate(3, 3)


@pytest.mark.parametrize("alpha", [0, 1])
def test_general_solution_commutes(alpha):
    rep = pc.check_commutant_system(pc.CommutantSolution.symbolic(alpha, 2))
    assert rep.ok, rep.discrepancies
    assert rep.details["printed_system_equivalent"]


def test_primed_fields_transpose_x1_and_x3():
    e1p = pc.transpose_vars(pc.so3_alpha_fields(1, 3)[0], 1, 3)
    assert e1p == parse_field("sin(x3)*sec(x2)*d1 - cos(x3)*d2 - sin(x3)*tan(x2)*d3", 3)


def test_broken_solution_is_reported():
    cs = pc.CommutantSolution.symbolic(1, 1)
    e4 = pc.commutant_field(cs)
    bad = e4 + parse_field("x2*d4", 4)
    gens = pc.so3_alpha_fields(1, 4)
    assert any(not lie_bracket(bad, e).is_zero() for e in gens)


def test_printed_system_detects_a_dropped_equation():
    rng = np.random.default_rng(0)
    printed = pc.printed_system(1, 4)
    computed = pc.commutator_system(1, 4)
    symbols = pc._jet_symbols(4)
    assert pc._systems_equivalent(printed, computed, symbols, rng)
    assert not pc._systems_equivalent(printed[:-2], computed, symbols, rng)


def test_alpha_must_be_binary():
    with pytest.raises(ValueError):
        pc.so3_alpha_fields(2)
    with pytest.raises(ValueError):
        pc.CommutantSolution(0, 0, 0, (), 3)


# -- Lie equations --------------------------------------------------------------


def test_rotation_about_third_axis():
    p = pc.LieOdeProblem((0, 0, 1), (0, 0, 0), (1, 0, 0), 0, math.pi / 2)
    sol = pc.closed_form(p.rho)
    assert np.allclose(sol.gamma(p, p.eps), [0, 1, 0], atol=1e-12)
    assert pc.lie_ode_compare(p)["deviation"] <= 1e-8


def test_frame_is_orthogonal_with_rho_third(rng):
    for rho in [(0, 0, 1), (1, 0, 0), (1, 1, 0), tuple(rng.uniform(-2, 2, 3))]:
        O = pc.orthonormal_frame(rho)
        assert np.allclose(O.T @ O, np.eye(3), atol=1e-12)
        assert np.allclose(O[:, 2], np.asarray(rho) / np.linalg.norm(rho))
        assert np.linalg.det(O) == pytest.approx(1.0)


def test_J_at_zero_is_identity():
    sol = pc.closed_form((1, 2, 3))
    assert np.array_equal(sol.J(0.0), np.eye(3))
    assert np.allclose(sol.Jint(0.0), 0)


def test_Jint_is_the_integral_of_J():
    sol = pc.closed_form((0.3, -1.2, 0.5))
    eps = 0.8
    ts = np.linspace(0, eps, 2001)
    vals = np.array([sol.J(t) for t in ts])
    integral = np.trapezoid(vals, ts, axis=0)
    assert np.allclose(integral, sol.Jint(eps), atol=1e-6)
    assert sol.Jint_det(eps) == pytest.approx(np.linalg.det(sol.Jint(eps)))


def test_zero_rho_rejected():
    with pytest.raises(ValueError):
        pc.lie_ode_compare(pc.LieOdeProblem((0, 0, 0), (0, 0, 0), (1, 0, 0), 0, 1.0))


def test_norm_preserved_without_translation(rng):
    for _ in range(5):
        out = pc.lie_ode_compare(pc.random_lie_ode_problem(rng, beta=0))
        assert out["norm_drift_closed"] <= 1e-10 and out["norm_drift_rk4"] <= 1e-10


def test_annihilating_rho4_examples():
    rho4, det = pc.annihilating_rho4((0, 0, 1), (0, 0, 1), 1.0)
    assert np.allclose(rho4, [0, 0, 1]) and det != 0
    rho4, _ = pc.annihilating_rho4((1, 2, 0), (0, 0, 0), 0.5)
    assert np.allclose(rho4, 0)
    with pytest.raises(ValueError):
        pc.annihilating_rho4((0, 0, 1), (1, 0, 0), 0.0)


def test_annihilating_rho4_zeroes_the_endpoint(rng):
    for _ in range(5):
        p = pc.random_lie_ode_problem(rng, beta=1, eps_range=(0.1, 1.0))
        rho4, _ = pc.annihilating_rho4(p.rho, p.phi, p.eps)
        q = pc.LieOdeProblem(p.rho, tuple(rho4), p.phi, 1, p.eps)
        assert np.linalg.norm(pc.closed_form(q.rho).gamma(q, q.eps)) <= 1e-8


# -- coordinate changes ---------------------------------------------------------


def test_stereographic_at_unit_point():
    # (t, x) = (1, 1): x1 = atan2(-1, -1), cot x2 = sqrt(2)
    from lierealize.catalog import instantiate
    from lierealize.liefield import match_basis

    smap = pc.stereographic_map()
    p = np.array([smap.inverse[0].eval([1.0, 1.0]), smap.inverse[1].eval([1.0, 1.0])])
    q = np.array([f.eval(p) for f in smap.forward])
    assert np.allclose(q, [1.0, 1.0])
    planar = pc.parse_field_list(pc.PLANAR_FIELDS, 2)
    perm, res, _ = match_basis(instantiate("so3", 1), planar, smap, 1, sampler=lambda r: p)
    assert res <= 1e-9 and perm == [(2, 1), (0, 1), (1, 1)]


def test_coordinate_change_checks():
    stereo, cart = pc.coordinate_change_checks(samples=100, seed=5)
    assert stereo.ok and stereo.residual <= 1e-9 and stereo.samples >= 100
    assert cart.ok and cart.residual <= 1e-9
    assert cart.details["permutation"]


# -- suites ---------------------------------------------------------------------


def test_suites_are_reproducible():
    a = [r.to_json() for r in pc.run_suite("lie-ode", trials=3, seed=11)]
    b = [r.to_json() for r in pc.run_suite("lie-ode", trials=3, seed=11)]
    assert a == b


def test_unknown_suite():
    with pytest.raises(KeyError):
        pc.run_suite("nope")


def test_report_shape():
    [rep] = pc.run_suite("invariant", trials=2, seed=1)
    data = rep.to_json()
    assert {"check", "status", "discrepancies", "samples", "seed"} <= set(data)
