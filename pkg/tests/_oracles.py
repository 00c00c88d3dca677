"""Independent oracles, cached catalog computations and the 1000-case property suites.

Oracles here avoid the library's own routes: Ricci comes from the
structure-constant formula instead of the curvature tensor, forms are evaluated
pointwise as multilinear maps instead of through the monomial tables.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np

from g2erp.deform import rigidity
from g2erp.exterior import (
    COMBOS,
    N,
    OMEGA,
    PHI,
    RHO_PLUS,
    KForm,
    gl7_action,
    star6,
    star7,
    theta,
)
from g2erp.g2core import delta_la, split_torsion, torsion
from g2erp.liealg import Bracket, check_jacobi, d_squared_zero, ricci
from g2erp.linalg import nullspace
from g2erp.quad import CATALOG_NAMES, catalog, to_bracket
from g2erp.scalars import FLOAT, to_float_array

CASES = 1000
TOL = 1e-9


# -- cached catalog computations ---------------------------------------------------------


@lru_cache(maxsize=None)
def cat(name: str):
    return catalog(name)


@lru_cache(maxsize=None)
def bracket(name: str) -> Bracket:
    return to_bracket(cat(name))


@lru_cache(maxsize=None)
def torsion_of(name: str):
    return torsion(bracket(name))


@lru_cache(maxsize=None)
def ricci_of(name: str) -> np.ndarray:
    return ricci(bracket(name))


@lru_cache(maxsize=None)
def rigidity_of(name: str):
    return rigidity(cat(name))


NAMES = CATALOG_NAMES


# -- pointwise evaluation of forms ----------------------------------------------------------


def evaluate(a: KForm, vectors: list[np.ndarray]) -> float:
    """a(v1, ..., vk) from the determinant formula on monomials."""
    k = a.degree
    V = np.array(vectors, dtype=float).T  # columns are the vectors
    total = 0.0
    for I, c in zip(COMBOS[k], to_float_array(a.coeffs)):
        if c:
            total += c * np.linalg.det(V[list(I), :]) if k else c
    return total


def theta_pointwise(B: np.ndarray, a: KForm, vectors: list[np.ndarray]) -> float:
    """(theta(B)a)(v...) = -sum_s a(..., B v_s, ...)."""
    out = 0.0
    for s in range(len(vectors)):
        vs = list(vectors)
        vs[s] = B @ vs[s]
        out -= evaluate(a, vs)
    return out


# -- Ricci oracle from the structure constants ----------------------------------------------


def ricci_formula(c: np.ndarray) -> np.ndarray:
    """Ric = M - B/2 - S(ad H) for an orthonormal basis.

    <M x, y> = -1/2 sum <[x,e_i],e_j><[y,e_i],e_j> + 1/4 sum <[e_i,e_j],x><[e_i,e_j],y>,
    B is the Killing form and H the mean curvature vector, <H, x> = tr ad x.
    """
    c = np.asarray(c, dtype=float)
    ad = [c[i].T for i in range(N)]
    M = -0.5 * np.einsum("xij,yij->xy", c, c) + 0.25 * np.einsum("ijx,ijy->xy", c, c)
    killing = np.array([[np.trace(ad[x] @ ad[y]) for y in range(N)] for x in range(N)])
    H = np.array([np.trace(ad[x]) for x in range(N)])
    adH = sum(h * a for h, a in zip(H, ad))
    return M - 0.5 * killing - 0.5 * (adH + adH.T)


# -- random generators --------------------------------------------------------------------


@lru_cache(maxsize=None)
def sl3c_basis() -> np.ndarray:
    """Basis of the stabilizer of rho+ in gl(6), a copy of sl(3, C)."""
    rp = RHO_PLUS.to_float()
    cols = []
    for n in range(36):
        E = np.zeros((6, 6))
        E.flat[n] = 1.0
        cols.append(to_float_array(theta(E, rp).coeffs))
    K = nullspace(np.array(cols).T, FLOAT)
    return np.array(K).reshape(-1, 6, 6)


def random_closed_split(rng: np.random.Generator) -> tuple[Bracket, Bracket, np.ndarray]:
    """A closed split bracket with lambda = 0 and A in sl(3, C)."""
    basis = sl3c_basis()
    A = np.tensordot(rng.normal(size=len(basis)), basis, axes=1)
    lam = Bracket.abelian(FLOAT)
    return Bracket.from_split(lam, A), lam, A


def random_lie(rng: np.random.Generator) -> Bracket:
    """A random bracket satisfying Jacobi: a conjugate of a closed split one."""
    from scipy.linalg import expm

    mu, _, _ = random_closed_split(rng)
    return mu.transform(expm(0.3 * rng.normal(size=(N, N)) / math.sqrt(N)))


def random_antisymmetric(rng: np.random.Generator) -> Bracket:
    c = rng.normal(size=(N, N, N))
    return Bracket(c - c.transpose(1, 0, 2))


def random_form(rng: np.random.Generator, k: int) -> KForm:
    return KForm(k, rng.normal(size=math.comb(N, k)))


def random_h_form(rng: np.random.Generator, k: int) -> KForm:
    c = np.zeros(math.comb(N, k))
    for n, I in enumerate(COMBOS[k]):
        if 6 not in I:
            c[n] = rng.normal()
    return KForm(k, c)


# -- 1000-case property suites (cached, shared with the acceptance file) ----------------------


def _max(a: KForm) -> float:
    return float(np.max(np.abs(to_float_array(a.coeffs)), initial=0.0))


@lru_cache(maxsize=None)
def suite_star_involution(cases: int = CASES, seed: int = 11) -> list[str]:
    rng = np.random.default_rng(seed)
    bad = []
    for n in range(cases):
        k = int(rng.integers(0, N + 1))
        a = random_form(rng, k)
        if _max(star7(star7(a)) - a) > TOL:
            bad.append(f"star7 case {n} degree {k}")
        k6 = int(rng.integers(0, 7))
        b = random_h_form(rng, k6)
        if _max(star6(star6(b)) - b * (-1) ** k6) > TOL:
            bad.append(f"star6 case {n} degree {k6}")
    return bad


@lru_cache(maxsize=None)
def suite_theta_star(cases: int = CASES, seed: int = 12) -> list[str]:
    rng = np.random.default_rng(seed)
    bad = []
    for n in range(cases):
        A = rng.normal(size=(6, 6))
        k = int(rng.integers(0, 7))
        a = random_h_form(rng, k)
        lhs = theta(A, star6(a)) + star6(theta(A.T.copy(), a))
        rhs = star6(a) * (-np.trace(A))
        if _max(lhs - rhs) > TOL:
            bad.append(f"case {n} degree {k}")
    return bad


@lru_cache(maxsize=None)
def suite_d2_jacobi(cases: int = CASES, seed: int = 13) -> list[str]:
    rng = np.random.default_rng(seed)
    bad = []
    for n in range(cases):
        mu = random_lie(rng) if n % 2 == 0 else random_antisymmetric(rng)
        expected_lie = n % 2 == 0
        jac, d2 = bool(check_jacobi(mu)), d_squared_zero(mu)
        if jac != d2 or jac != expected_lie:
            bad.append(f"case {n}: jacobi={jac} d2={d2}")
    return bad


@lru_cache(maxsize=None)
def suite_split_torsion(cases: int = CASES, seed: int = 14) -> list[str]:
    rng = np.random.default_rng(seed)
    bad = []
    for n in range(cases):
        mu, lam, A = random_closed_split(rng)
        rep = torsion(mu)
        if not rep.closed:
            bad.append(f"case {n}: generator gave a non-closed bracket")
            continue
        if _max(split_torsion(lam, A) - rep.tau) > TOL * max(1.0, _max(rep.tau)):
            bad.append(f"case {n}")
    return bad


@lru_cache(maxsize=None)
def suite_delta_la_random(cases: int = 200, seed: int = 15) -> list[str]:
    rng = np.random.default_rng(seed)
    bad = []
    for n in range(cases):
        mu, lam, A = random_closed_split(rng)
        direct = mu.d(torsion(mu).tau)
        if _max(delta_la(lam, A) - direct) > TOL * max(1.0, _max(direct)):
            bad.append(f"case {n}")
    return bad


def delta_la_catalog() -> list[str]:
    bad = []
    for name in NAMES:
        mu = bracket(name)
        lam, A = mu.split()
        direct = mu.d(torsion_of(name).tau)
        if not (delta_la(lam, A) - direct).is_zero():
            bad.append(name)
    return bad


# -- the reference T_i action table -------------------------------------------------------------

TABLE_COLUMNS = ("tau", "omega7", "omega3", "omega4", "omega3bar", "omega4bar")
REFERENCE_TABLE = {
    "T7": (("omega7", 1), ("tau", 1), (None, 0), ("omega4bar", 1), (None, 0), ("omega4", -1)),
    "T3": (("omega3", 1), ("omega3bar", 1), ("tau", 1), (None, 0), ("omega7", -1), (None, 0)),
    "T4": (("omega4", 1), ("omega4bar", 1), (None, 0), ("tau", 1), (None, 0), ("omega7", -1)),
}


def two_forms(backend_exact: bool = True) -> dict[str, KForm]:
    from g2erp.exterior import OMEGA3, OMEGA3_BAR, OMEGA4, OMEGA4_BAR, OMEGA7, TAU

    forms = dict(zip(TABLE_COLUMNS, (TAU, OMEGA7, OMEGA3, OMEGA4, OMEGA3_BAR, OMEGA4_BAR)))
    return forms if backend_exact else {k: v.to_float() for k, v in forms.items()}


def table_mismatches() -> list[str]:
    """Entries of the reference table that theta(T_i) does not reproduce exactly."""
    from fractions import Fraction

    from g2erp.quad import T3, T4, T7, theta4
    from g2erp.scalars import EXACT

    forms = two_forms()
    third = EXACT.scalar(Fraction(1, 3))
    bad = []
    for tname, T in (("T7", T7), ("T3", T3), ("T4", T4)):
        for col, (target, sign) in zip(TABLE_COLUMNS, REFERENCE_TABLE[tname]):
            got = theta4(T, forms[col])
            want = KForm.zero(2) if target is None else forms[target] * (third * sign)
            if not (got - want).is_zero():
                bad.append(f"theta({tname}){col}")
    return bad


def gl7_fd_error(rng: np.random.Generator, eps: float = 1e-6) -> float:
    """|d/dt exp(tB).a at 0 - theta(B)a| by central differences."""
    from scipy.linalg import expm

    B = rng.normal(size=(N, N))
    a = random_form(rng, int(rng.integers(1, N)))
    plus = gl7_action(expm(eps * B), a)
    minus = gl7_action(expm(-eps * B), a)
    fd = (plus - minus) * (1 / (2 * eps))
    return _max(fd - theta(B, a))


__all__ = [name for name in dir() if not name.startswith("__")]
_ = (OMEGA, PHI, itertools)
