import itertools

import numpy as np
import pytest

from g2erp.exterior import (
    E7,
    G0,
    G1,
    OMEGA,
    OMEGA3,
    OMEGA4,
    OMEGA7,
    PHI,
    RHO_MINUS,
    RHO_PLUS,
    STAR_PHI,
    TAU,
    VOL,
    DegreeError,
    KForm,
    from_g0g1_order,
    form,
    gl7_action,
    inner,
    interior,
    project_2forms,
    star6,
    star7,
    theta,
    to_g0g1_order,
    wedge,
)
from g2erp.quad import T3, T4, T7, theta4
from g2erp.scalars import EXACT, exact_array, to_float_array

import _oracles as O


def test_phi_decomposition_and_star():
    assert PHI == wedge(OMEGA, E7) + RHO_PLUS
    assert star7(PHI) == STAR_PHI
    assert STAR_PHI == wedge(OMEGA, OMEGA) * EXACT.scalar("1/2") + wedge(RHO_MINUS, E7)
    assert wedge(PHI, STAR_PHI) == VOL * 7
    assert star6(OMEGA) == wedge(OMEGA, OMEGA) * EXACT.scalar("1/2")
    assert star6(wedge(OMEGA, OMEGA)) == OMEGA * 2


def test_star_relations_between_h_and_g():
    rng = np.random.default_rng(1)
    for k in range(7):
        g = O.random_h_form(rng, k)
        assert (star7(g) - wedge(star6(g), E7)).close_to(KForm.zero(7 - k).to_float())
        assert (star7(wedge(g, E7)) - star6(g) * (-1) ** k).close_to(KForm.zero(6 - k).to_float())


def test_wedge_graded_commutative_and_associative():
    rng = np.random.default_rng(2)
    for _ in range(50):
        p, q, r = rng.integers(0, 3, size=3)
        a, b, c = (O.random_form(rng, int(k)) for k in (p, q, r))
        assert wedge(a, b).close_to(wedge(b, a) * (-1) ** (p * q), 1e-9)
        assert wedge(wedge(a, b), c).close_to(wedge(a, wedge(b, c)), 1e-9)


def test_wedge_matches_pointwise_evaluation():
    rng = np.random.default_rng(3)
    for _ in range(30):
        a, b = O.random_form(rng, 1), O.random_form(rng, 2)
        vs = list(rng.normal(size=(3, 7)))
        direct = O.evaluate(wedge(a, b), vs)
        # (a ^ b)(u, v, w) = a(u)b(v, w) - a(v)b(u, w) + a(w)b(u, v)
        expect = (O.evaluate(a, [vs[0]]) * O.evaluate(b, [vs[1], vs[2]])
                  - O.evaluate(a, [vs[1]]) * O.evaluate(b, [vs[0], vs[2]])
                  + O.evaluate(a, [vs[2]]) * O.evaluate(b, [vs[0], vs[1]]))
        assert abs(direct - expect) < 1e-9


def test_theta_matches_pointwise_definition():
    rng = np.random.default_rng(4)
    for _ in range(40):
        B = rng.normal(size=(7, 7))
        k = int(rng.integers(1, 4))
        a = O.random_form(rng, k)
        vs = list(rng.normal(size=(k, 7)))
        assert abs(O.evaluate(theta(B, a), vs) - O.theta_pointwise(B, a, vs)) < 1e-9


def test_interior_product():
    rng = np.random.default_rng(5)
    a = O.random_form(rng, 3)
    X, u, v = rng.normal(size=(3, 7))
    assert abs(O.evaluate(interior(X, a), [u, v]) - O.evaluate(a, [X, u, v])) < 1e-9
    with pytest.raises(DegreeError):
        interior(0, KForm.zero(0))


def test_gl7_action_is_a_representation_with_derivative_theta():
    rng = np.random.default_rng(6)
    for _ in range(10):
        h1, h2 = np.eye(7) + 0.2 * rng.normal(size=(2, 7, 7))
        a = O.random_form(rng, 3)
        assert gl7_action(h1 @ h2, a).close_to(gl7_action(h1, gl7_action(h2, a)), 1e-9)
        assert O.gl7_fd_error(rng) < 1e-6


def test_star_involution_suite():
    assert O.suite_star_involution() == []


def test_theta_star_suite():
    assert O.suite_theta_star() == []


def test_lambda2_projections():
    p7, p14 = project_2forms(TAU)
    assert p7.is_zero() and p14 == TAU
    p7, p14 = project_2forms(OMEGA)
    assert p14.is_zero()
    assert star7(wedge(p14, PHI)) == -p14
    assert star7(wedge(TAU, TAU)) == form("-2*e347")
    assert inner(TAU, TAU) == EXACT.scalar(2)


def test_t_actions_on_tau():
    third = EXACT.scalar("1/3")
    assert theta4(T7, TAU) == OMEGA7 * third
    assert theta4(T3, TAU) == OMEGA3 * third
    assert theta4(T4, TAU) == OMEGA4 * third


def test_t_action_table_self_consistent_values():
    """theta(T_i) on the six 2-forms, checked pointwise and by self-adjointness."""
    forms = O.two_forms(False)
    for T in (T7, T3, T4):
        Tf = to_float_array(T)
        full = np.zeros((7, 7))
        full[np.ix_(G1, G1)] = Tf
        for name, f in forms.items():
            got = theta4(T, f.to_float())
            for i, j in itertools.combinations(range(7), 2):
                ei, ej = np.eye(7)[i], np.eye(7)[j]
                assert abs(O.evaluate(got, [ei, ej]) - O.theta_pointwise(full, f, [ei, ej])) < 1e-12
            for other in forms.values():
                assert abs(inner(got, other) - inner(f, theta4(T, other.to_float()))) < 1e-12
    third = EXACT.scalar("1/3")
    exact = O.two_forms()
    assert theta4(T7, exact["omega4bar"]) == exact["omega4"] * third
    assert theta4(T3, exact["omega3bar"]) == exact["omega7"] * third
    assert theta4(T4, exact["omega4bar"]) == exact["omega7"] * third


def test_reference_table_matches_except_three_bar_signs():
    assert O.table_mismatches() == ["theta(T7)omega4bar", "theta(T3)omega3bar", "theta(T4)omega4bar"]


def test_basis_reordering_round_trip():
    M = exact_array(np.arange(49).reshape(7, 7).tolist())
    assert (to_g0g1_order(from_g0g1_order(M)) == M).all()
    assert list(G0) == [6, 2, 3]


def test_form_parser():
    assert form("e12-e56") == TAU
    assert form("3*e347").coeffs.dtype == object
    with pytest.raises(Exception):
        form("e88")
