import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from g2erp.exterior import PHI, TAU, gl7_action, theta
from g2erp.formats import FormatError, dump_bracket, parse_bracket, parse_quadruple
from g2erp.liealg import Bracket, check_jacobi
from g2erp.quad import (
    EXAMPLE_J_H,
    SP_LABELS,
    T3,
    T4,
    T7,
    Quadruple,
    catalog,
    catalog_text,
    chart,
    check_structure,
    from_bracket,
    from_chart,
    load_quadruple_text,
    nilradical,
    sp_from_params,
    sp_membership,
    sp_params,
    theta4,
    to_bracket,
    unimodular_specialization,
)
from g2erp.scalars import EXACT, FLOAT, ExactScalar, to_float_array

import _oracles as O

small = st.fractions(min_value=-5, max_value=5, max_denominator=6).map(ExactScalar.rational)
params = st.lists(small, min_size=10, max_size=10)


@given(params)
def test_sp_parametrization_annihilates_tau(p):
    E = sp_from_params(np.array(p, dtype=object))
    assert sp_membership(E)
    assert theta4(E, TAU).is_zero()
    assert all(a == b for a, b in zip(sp_params(E), p))


def test_sp_is_ten_dimensional_annihilator():
    # independent count: the 4x4 matrices killing tau under theta
    cols = []
    for n in range(16):
        E = np.zeros((4, 4))
        E.flat[n] = 1.0
        cols.append(to_float_array(theta4(E, TAU.to_float()).coeffs))
    assert 16 - np.linalg.matrix_rank(np.array(cols).T) == 10 == len(SP_LABELS)
    assert not sp_membership(T7) and not sp_membership(T3) and not sp_membership(T4)


@given(st.lists(small, min_size=34, max_size=34))
def test_chart_round_trip(x):
    x = np.array(x, dtype=object)
    q = from_chart(x)
    assert all(a == b for a, b in zip(chart(q), x))
    assert from_bracket(to_bracket(q)) == q


def test_catalog_charts_round_trip():
    for name in O.NAMES:
        q = O.cat(name)
        assert from_chart(chart(q)) == q
        assert load_quadruple_text(q.to_text()) == q
        assert load_quadruple_text(catalog_text(name)).name == name


def test_catalog_unknown_name():
    with pytest.raises(KeyError):
        catalog("X")


@pytest.mark.parametrize("name", O.NAMES)
def test_catalog_structure_checks(name):
    verdict = check_structure(O.cat(name))
    assert verdict.all_pass, verdict.failed()
    assert verdict.erp and verdict.tau_is_normal and verdict.consistent


def test_catalog_float_structure_checks():
    for name in O.NAMES:
        assert check_structure(O.cat(name).to_float(), cross_check=False).all_pass


def test_mutation_breaks_checks():
    q = O.cat("J")
    A = q.A.copy()
    A[2, 2] = EXACT.scalar(0)
    verdict = check_structure(q.replace(A=A))
    assert not verdict.all_pass
    assert verdict.consistent


def test_perturbed_b_block_fails_jacobi():
    q = O.cat("M1")
    B = q.B.copy()
    B[0, 1] = B[0, 1] + EXACT.scalar(1)
    verdict = check_structure(q.replace(B=B))
    assert verdict.jacobi_failures
    assert not check_jacobi(to_bracket(q.replace(B=B)))


def test_nilradical_dimensions():
    expected = {"J": 4, "M2": 5, "M3": 5, "B": 6, "M1": 6}
    for name, dim in expected.items():
        cand, verdict = nilradical(O.cat(name))
        assert cand.dim == dim and verdict.passed


def test_unimodular_specialization_of_j():
    rep = unimodular_specialization(O.cat("J"))
    assert rep.unimodular and rep.ok, rep.checks
    q = O.cat("J")
    assert EXACT.is_zero(q.A1)
    mats = [M * ExactScalar.sqrt(3) for M in (q.A, q.B, q.C)]
    for i, X in enumerate(mats):
        assert EXACT.is_zero(X - X.T)
        for j, Y in enumerate(mats):
            assert np.trace(X @ Y) == EXACT.scalar(int(i == j))
            assert EXACT.is_zero(X @ Y - Y @ X)


def test_non_unimodular_entries_report_data():
    for name in ("M2", "M3", "B", "M1"):
        rep = unimodular_specialization(O.cat(name))
        assert not rep.unimodular and rep.data and rep.nilradical_status == "PASS"


def test_example_map_is_in_g2():
    assert gl7_action(EXAMPLE_J_H, PHI) == PHI
    assert EXACT.is_zero(EXAMPLE_J_H.T @ EXAMPLE_J_H - EXACT.eye(7))


def test_theta4_matches_theta_on_g1():
    rng = np.random.default_rng(40)
    M = rng.normal(size=(4, 4))
    full = np.zeros((7, 7))
    full[np.ix_([0, 1, 4, 5], [0, 1, 4, 5])] = M
    assert theta4(M, TAU.to_float()).close_to(theta(full, TAU.to_float()), 1e-12)


def test_quadruple_shapes_and_mixed_backends():
    with pytest.raises(ValueError):
        Quadruple(np.zeros((3, 3)), np.zeros((4, 4)), np.zeros((4, 4)), np.zeros((4, 4)))
    q = O.cat("J")
    mixed = Quadruple(q.A1, to_float_array(q.A), q.B, q.C)
    assert mixed.backend is FLOAT
    assert mixed == q


def test_quadruple_file_errors_carry_line_numbers():
    good = catalog_text("J").splitlines()
    bad = list(good)
    for n, line in enumerate(bad):
        if line.strip() == "[B]":
            bad[n + 1] = "0 0 zz 0"
            lineno = n + 2
            break
    with pytest.raises(FormatError) as err:
        parse_quadruple("\n".join(bad))
    assert err.value.line == lineno
    with pytest.raises(FormatError):
        parse_quadruple("[A1]\n0 0\n")
    with pytest.raises(FormatError):
        parse_quadruple("[A1]\n0 0 0\n0 0\n")


def test_decimal_file_becomes_float():
    text = O.cat("M2").to_float().to_text()
    parsed = parse_quadruple(text)
    assert not parsed.exact
    assert load_quadruple_text(text) == O.cat("M2")


def test_bracket_format_round_trip():
    mu = O.bracket("M3")
    constants, exact = parse_bracket(dump_bracket(mu.constants()))
    assert exact
    assert Bracket.from_constants(constants, EXACT) == mu
    with pytest.raises(FormatError):
        parse_bracket("1 2\n")


def test_nilradical_of_a_slightly_rotated_float_entry():
    # a tiny U0 rotation makes C nearly but not exactly nilpotent
    from g2erp.deform import group_action, u0

    for angle in (1e-4, 0.3):
        moved = group_action(u0(angle, 0.0), O.cat("M2"))
        cand, verdict = nilradical(moved)
        assert cand.dim == 5 and verdict.passed
