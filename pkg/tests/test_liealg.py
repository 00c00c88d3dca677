import itertools

import numpy as np
import pytest
from scipy.linalg import expm

from g2erp.exterior import N, KForm
from g2erp.liealg import (
    Bracket,
    NotJacobi,
    NotSolvable,
    check_jacobi,
    coordinate_span,
    d_squared_zero,
    derivations,
    derived_algebra,
    is_derivation,
    is_solvable,
    ricci,
    scalar_curvature,
    unimodular,
    verify_nilradical,
)
from g2erp.scalars import EXACT, FLOAT, to_float_array

import _oracles as O

HEISENBERG = Bracket.from_constants({(1, 2, 3): 1}, name="h3+R4")
SO3 = Bracket.from_constants({(1, 2, 3): 1, (2, 3, 1): 1, (3, 1, 2): 1}, name="so3+R4")


def test_constructor_validation():
    with pytest.raises(ValueError):
        Bracket.from_constants({(1, 1, 2): 1})
    with pytest.raises(ValueError):
        Bracket.from_constants({(1, 8, 2): 1})
    c = np.zeros((N, N, N))
    c[0, 1, 2] = 1.0
    with pytest.raises(ValueError):
        Bracket(c)


def test_constants_round_trip():
    for name in O.NAMES:
        mu = O.bracket(name)
        assert Bracket.from_constants(mu.constants(), EXACT) == mu


def test_differential_of_one_forms_is_minus_the_bracket():
    rng = np.random.default_rng(20)
    mu = O.random_antisymmetric(rng)
    e = np.eye(N)
    for k in range(N):
        dk = mu.d(KForm(1, e[k]))
        for i, j in itertools.combinations(range(N), 2):
            assert abs(O.evaluate(dk, [e[i], e[j]]) + mu.c[i, j, k]) < 1e-12


def test_jacobi_failure_reports_a_triple():
    mu = Bracket.from_constants({(1, 2, 3): 1, (3, 4, 1): 1, (2, 4, 5): 1})
    res = check_jacobi(mu)
    assert not res and res.triple is not None
    assert not d_squared_zero(mu)
    with pytest.raises(NotJacobi):
        ricci(mu)


def test_d2_matches_jacobi_suite():
    assert O.suite_d2_jacobi() == []


def test_catalog_brackets_satisfy_jacobi():
    for name in O.NAMES:
        mu = O.bracket(name)
        assert check_jacobi(mu) and d_squared_zero(mu)


def test_act_is_the_derivative_of_transform():
    rng = np.random.default_rng(21)
    mu = O.random_lie(rng)
    D = rng.normal(size=(N, N))
    eps = 1e-6
    fd = (mu.transform(expm(eps * D)).c - mu.transform(expm(-eps * D)).c) / (2 * eps)
    assert np.max(np.abs(fd - mu.act(D).c)) < 1e-6


def test_transform_preserves_jacobi_and_composes():
    rng = np.random.default_rng(22)
    mu = O.random_lie(rng)
    h1, h2 = expm(0.3 * rng.normal(size=(2, N, N)))
    assert check_jacobi(mu.transform(h1))
    lhs = mu.transform(h1 @ h2).c
    rhs = mu.transform(h2).transform(h1).c
    assert np.max(np.abs(lhs - rhs)) < 1e-9


def test_ricci_matches_structure_constant_formula_on_catalog():
    for name in O.NAMES:
        R = to_float_array(O.ricci_of(name))
        assert np.max(np.abs(R - O.ricci_formula(to_float_array(O.bracket(name).c)))) < 1e-12


def test_ricci_matches_formula_on_random_lie_brackets():
    rng = np.random.default_rng(23)
    for _ in range(20):
        mu = O.random_lie(rng)
        R = ricci(mu)
        assert np.max(np.abs(R - R.T)) < 1e-10
        assert np.max(np.abs(R - O.ricci_formula(mu.c))) < 1e-9


def test_heisenberg_ricci_and_scalar_curvature():
    # known values for the 3-dimensional Heisenberg algebra with unit bracket
    R = ricci(HEISENBERG)
    expect = np.zeros((N, N), dtype=object)
    expect[:] = EXACT.scalar(0)
    expect[0, 0] = expect[1, 1] = EXACT.scalar("-1/2")
    expect[2, 2] = EXACT.scalar("1/2")
    assert EXACT.is_zero(R - expect)
    assert scalar_curvature(HEISENBERG) == EXACT.scalar("-1/2")


def test_solvability_and_unimodularity():
    assert is_solvable(HEISENBERG) and unimodular(HEISENBERG)
    assert not is_solvable(SO3)
    with pytest.raises(NotSolvable):
        verify_nilradical(SO3, coordinate_span(range(3)))
    for name in O.NAMES:
        assert is_solvable(O.bracket(name))
    assert unimodular(O.bracket("J"))
    assert not unimodular(O.bracket("M1"))


def test_nilradical_verdicts_on_small_example():
    # h3 + R4 is nilpotent, so the whole space is the nilradical
    assert verify_nilradical(HEISENBERG, coordinate_span(range(N))).passed
    verdict = verify_nilradical(HEISENBERG, coordinate_span([2]))
    assert verdict.status == "FAIL"
    assert derived_algebra(HEISENBERG) == coordinate_span([2])


def test_derivations():
    assert derivations(Bracket.abelian()).dim == N * N
    assert derivations(Bracket.abelian(FLOAT)).dim == N * N
    for name in O.NAMES:
        mu = O.bracket(name)
        for v in derivations(mu).basis:
            assert is_derivation(mu, v.reshape(N, N))


def test_derivations_of_heisenberg():
    # Der(h3) has dimension 6; the R4 factor adds gl4 and the maps between them
    assert derivations(HEISENBERG).dim == 6 + 16 + 4 + 8
