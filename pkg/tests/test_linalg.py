from fractions import Fraction

import numpy as np
import pytest

from g2erp.linalg import InconsistentSystem, Subspace, det, inverse, matmul, nullspace, rank, solve
from g2erp.scalars import EXACT, FLOAT, ExactScalar, exact_array, to_float_array


def random_rational(rng, shape, rank_=None):
    """Integer matrix, optionally of prescribed rank, as an exact array."""
    if rank_ is None:
        M = rng.integers(-3, 4, size=shape)
    else:
        M = rng.integers(-3, 4, size=(shape[0], rank_)) @ rng.integers(-3, 4, size=(rank_, shape[1]))
    return exact_array(M.tolist()), M.astype(float)


@pytest.mark.parametrize("seed", range(25))
def test_rank_and_nullspace_against_numpy(seed):
    rng = np.random.default_rng(seed)
    shape = tuple(rng.integers(2, 8, size=2))
    r = int(rng.integers(1, min(shape) + 1))
    Mx, Mf = random_rational(rng, shape, r)
    assert rank(Mx) == np.linalg.matrix_rank(Mf) == rank(Mf, FLOAT)
    K = nullspace(Mx)
    assert len(K) == shape[1] - rank(Mx)
    for v in K:
        assert EXACT.is_zero(matmul(Mx, np.array(v, dtype=object)))
    Kf = nullspace(Mf, FLOAT)
    assert len(Kf) == len(K)
    assert np.allclose(Mf @ np.array(Kf).T, 0) if len(Kf) else True


@pytest.mark.parametrize("seed", range(15))
def test_solve_inverse_det(seed):
    rng = np.random.default_rng(100 + seed)
    n = int(rng.integers(2, 6))
    Mx, Mf = random_rational(rng, (n, n))
    if abs(np.linalg.det(Mf)) < 0.5:
        Mf = Mf + 7 * np.eye(n)
        Mx = exact_array(Mf.astype(int).tolist())
    assert abs(float(det(Mx)) - np.linalg.det(Mf)) < 1e-6
    inv = inverse(Mx)
    assert EXACT.is_zero(matmul(Mx, inv) - EXACT.eye(n))
    b = exact_array(rng.integers(-5, 6, size=n).tolist())
    x = solve(Mx, b)
    assert EXACT.is_zero(matmul(Mx, x) - b)


def test_solve_inconsistent():
    M = exact_array([[1, 0], [1, 0]])
    with pytest.raises(InconsistentSystem):
        solve(M, exact_array([1, 2]))


def test_surd_entries():
    s2 = ExactScalar.sqrt(2)
    M = np.array([[s2, ExactScalar.rational(1)], [ExactScalar.rational(2), s2]], dtype=object)
    assert rank(M) == 1
    assert det(M) == ExactScalar()
    M[1, 1] = s2 + ExactScalar.rational(Fraction(1, 3))
    assert rank(M) == 2


def test_subspace_algebra():
    e = EXACT.eye(4)
    U = Subspace([e[0], e[1]], 4)
    V = Subspace([e[1], e[2]], 4)
    assert (U + V).dim == 3
    assert U.contains(e[0] + e[1] * 3)
    assert not U.contains(e[2])
    assert Subspace([e[0]], 4).issubset(U)
    assert U == Subspace([e[0] + e[1], e[0] - e[1]], 4)
    comp = U.complement_basis()
    assert (U + Subspace([e[i] for i in comp], 4)).dim == 4
    assert to_float_array(e).shape == (4, 4)
