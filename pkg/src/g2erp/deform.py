"""Symmetry groups of (phi, tau), their action on quadruples, and rigidity.

All subspaces of deformations live in the 34-coordinate chart of ``quad.chart``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .exterior import G0, G1, H, H1, INDEX, N, PHI, TAU, from_g0g1_order
from .liealg import Bracket, derivations, form_equations
from .linalg import Subspace, inverse, matmul, nullspace
from .quad import (
    Quadruple,
    check_structure,
    comm,
    from_bracket,
    sp_from_params,
    sp_membership,
    sp_params,
    theta4,
    to_bracket,
    tr,
    _forms,
)
from .scalars import EXACT, FLOAT, ONE, Backend, backend_of, exact_array, to_float_array


class RouteMismatch(AssertionError):
    """The closed-form action and bracket conjugation disagree."""


class NotERPQuadruple(ValueError):
    pass


# -- stabilizer algebras ---------------------------------------------------------------


def _selector_rows(positions, backend: Backend) -> np.ndarray:
    M = backend.zeros((len(positions), N * N))
    for r, (a, b) in enumerate(positions):
        M[r, N * a + b] = ONE if backend.exact else 1.0
    return M


def stabilizer_algebra(kind: str, backend: Backend = EXACT) -> Subspace:
    """Lie algebra of the stabilizer, as a subspace of gl7 (row-major 7a + b).

    ``g2``: theta(D) phi = 0.  ``h_tau``: additionally theta(D) tau = 0 and
    D(h) in h.  ``g1_tau``: theta(D) tau = 0 and D(g1) in g1.
    """
    blocks = []
    if kind == "g2":
        blocks.append(form_equations([PHI], backend))
    elif kind == "h_tau":
        blocks.append(form_equations([PHI, TAU], backend))
        blocks.append(_selector_rows([(6, j) for j in H], backend))
    elif kind == "g1_tau":
        blocks.append(form_equations([PHI, TAU], backend))
        blocks.append(_selector_rows([(i, j) for i in range(N) if i not in G1 for j in G1], backend))
    else:
        raise ValueError(f"unknown stabilizer {kind!r}")
    M = np.concatenate(blocks, axis=0)
    return Subspace(nullspace(M, backend), N * N, backend)


def algebra_matrices(S: Subspace) -> list[np.ndarray]:
    return [v.reshape(N, N) for v in S.basis]


def ug1_tau_matrix(a, b, c, d, backend: Backend = EXACT) -> np.ndarray:
    """The reference 4-parameter family, converted from the (e7, e3, e4, e1, e2, e5, e6) order."""
    half = backend.scalar("1/2") if backend.exact else 0.5
    z = backend.scalar(0)
    rows = [
        [z, c, -b, z, z, z, z],
        [-c, z, a, z, z, z, z],
        [b, -a, z, z, z, z, z],
        [z, z, z, z, -d, b * half, -c * half],
        [z, z, z, d, z, -c * half, -b * half],
        [z, z, z, -b * half, c * half, z, -a + d],
        [z, z, z, c * half, b * half, a - d, z],
    ]
    return from_g0g1_order(np.array(rows, dtype=object if backend.exact else float))


# -- group elements ----------------------------------------------------------------


def _rotation(angle: float) -> np.ndarray:
    """[[cos, sin], [-sin, cos]]; exact when the angle is a multiple of pi/2."""
    k = angle / (math.pi / 2)
    if abs(k - round(k)) < 1e-12:
        c, s = [(1, 0), (0, 1), (-1, 0), (0, -1)][round(k) % 4]
        return exact_array([[c, s], [-s, c]])
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, s], [-s, c]])


@dataclass(frozen=True)
class SymmetryElement:
    """A 7x7 matrix in the standard basis tagged by the family it comes from."""

    matrix: np.ndarray
    tag: str
    params: tuple = ()

    @property
    def backend(self) -> Backend:
        return backend_of(self.matrix)


def u0(theta1: float, theta2: float) -> SymmetryElement:
    """diag(1, h1, h2, h3) on (e7 | e3 e4 | e1 e2 | e5 e6) with h1 h2 h3 = I."""
    rots = [_rotation(theta1), _rotation(theta2), _rotation(-theta1 - theta2)]
    exact = all(r.dtype == object for r in rots)
    backend = EXACT if exact else FLOAT
    M = backend.eye(N)
    for r, (i, j) in zip(rots, ((2, 3), (0, 1), (4, 5))):
        M[np.ix_([i, j], [i, j])] = r if exact else to_float_array(r)
    return SymmetryElement(M, "U0", (theta1, theta2))


G_MATRIX = from_g0g1_order(exact_array([
    [-1, 0, 0, 0, 0, 0, 0],
    [0, 1, 0, 0, 0, 0, 0],
    [0, 0, -1, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 1, 0],
    [0, 0, 0, 0, 0, 0, -1],
    [0, 0, 0, -1, 0, 0, 0],
    [0, 0, 0, 0, 1, 0, 0],
]))

G_TILDE = from_g0g1_order(exact_array(np.diag([-1, 1, -1, 1, -1, 1, -1])))

G1_BLOCK = exact_array([[1, 0], [0, -1]])
G2_BLOCK = exact_array([[0, 0, 1, 0], [0, 0, 0, -1], [-1, 0, 0, 0], [0, 1, 0, 0]])


def g_element() -> SymmetryElement:
    return SymmetryElement(G_MATRIX.copy(), "g")


def u0g(theta1: float, theta2: float) -> SymmetryElement:
    h = u0(theta1, theta2)
    M = matmul(h.matrix, G_MATRIX) if h.backend.exact else h.matrix @ to_float_array(G_MATRIX)
    return SymmetryElement(M, "U0g", (theta1, theta2))


def ug1_exp(a: float, b: float, c: float, d: float, t: float = 1.0) -> SymmetryElement:
    D = to_float_array(ug1_tau_matrix(a, b, c, d, FLOAT))
    return SymmetryElement(expm(t * D), "Ug1", (a, b, c, d, t))


def identity_element(backend: Backend = EXACT) -> SymmetryElement:
    return SymmetryElement(backend.eye(N), "U0", (0.0, 0.0))


# -- actions on quadruples -----------------------------------------------------------


def _conj(h: np.ndarray, M: np.ndarray) -> np.ndarray:
    return matmul(matmul(h, M), inverse(h))


def _aligned(q: Quadruple, h: SymmetryElement) -> tuple[Quadruple, np.ndarray]:
    if q.backend.exact and h.backend.exact:
        return q, h.matrix
    return q.to_float(), to_float_array(h.matrix)


def _formula_action(q: Quadruple, tag: str, M: np.ndarray) -> Quadruple:
    A1, A, B, C = q.blocks
    if tag == "U0":
        h1 = M[np.ix_(list(H1), list(H1))]
        h2 = M[np.ix_(list(G1), list(G1))]
        x, y = h1[0, 0], h1[0, 1]
        return Quadruple(_conj(h1, A1), _conj(h2, A), _conj(h2, B * x + C * y),
                         _conj(h2, C * x - B * y), name=q.name)
    if tag == "g":
        g1 = G1_BLOCK if q.backend.exact else to_float_array(G1_BLOCK)
        g2 = G2_BLOCK if q.backend.exact else to_float_array(G2_BLOCK)
        return Quadruple(-_conj(g1, A1), -_conj(g2, A), _conj(g2, B), -_conj(g2, C), name=q.name)
    if tag in ("U0g", "Ug1"):
        # block-diagonal on g0 + g1: new ad(e_a) = h2 (sum_b k^-1[b, a] ad e_b) h2^-1
        k = M[np.ix_(list(G0), list(G0))]
        h2 = M[np.ix_(list(G1), list(G1))]
        kinv = inverse(k)
        mats = (A, B, C)
        new = []
        for a_ in range(3):
            acc = mats[0] * kinv[0, a_] + mats[1] * kinv[1, a_] + mats[2] * kinv[2, a_]
            new.append(_conj(h2, acc))
        g0_bracket = Bracket.from_split(None, _embed_h1(A1, q.backend)).transform(_embed_g0(k, q.backend))
        A1n = g0_bracket.ad(6)[np.ix_(list(H1), list(H1))].copy()
        stray = g0_bracket.c.copy()
        for i in H1:
            for j in H1:
                stray[6, i, j] = stray[6, i, j] * 0
                stray[i, 6, j] = stray[i, 6, j] * 0
        if not q.backend.is_zero(stray):
            raise ValueError("the element moves e7 out of the quadruple chart")
        return Quadruple(A1n, new[0], new[1], new[2], name=q.name)
    raise ValueError(f"untagged symmetry element ({tag!r})")


def _embed_h1(A1: np.ndarray, backend: Backend) -> np.ndarray:
    A = backend.zeros((6, 6))
    A[np.ix_(list(H1), list(H1))] = A1
    return A


def _embed_g0(k: np.ndarray, backend: Backend) -> np.ndarray:
    M = backend.eye(N)
    M[np.ix_(list(G0), list(G0))] = k
    return M


def _outside_chart(mu: Bracket) -> bool:
    """True if mu has structure constants outside the quadruple shape."""
    c = mu.c.copy()
    zero = c[0, 0, 0] * 0
    for e, dom in ((6, H1), (6, G1), (2, G1), (3, G1)):
        for j in dom:
            for k in dom:
                c[e, j, k] = zero
                c[j, e, k] = zero
    return not mu.backend.is_zero(c)


def group_action(h: SymmetryElement, q: Quadruple) -> Quadruple:
    """h . q by the closed-form block formulas, checked against bracket conjugation."""
    if not isinstance(h, SymmetryElement) or not h.tag:
        raise ValueError("group_action needs a tagged SymmetryElement")
    q2, M = _aligned(q, h)
    by_formula = _formula_action(q2, h.tag, M)
    conj = to_bracket(q2).transform(M)
    if _outside_chart(conj):
        raise RouteMismatch("conjugated bracket leaves the quadruple chart")
    by_conj = from_bracket(conj, q.name)
    if not by_formula == by_conj:
        raise RouteMismatch("block formula and bracket conjugation disagree")
    return by_formula


# -- linearized ERP system ---------------------------------------------------------------


def _unit(n: int, j: int, backend: Backend) -> np.ndarray:
    x = backend.zeros(n)
    x[j] = ONE if backend.exact else 1.0
    return x


def _tangent_columns(q: Quadruple, xbar: np.ndarray) -> np.ndarray:
    """Linearized Jacobi and torsion conditions at the chart velocity ``xbar`` (zero iff it is tangent)."""
    backend = q.backend
    A1b = xbar[:4].reshape(2, 2)
    Ab = sp_from_params(xbar[4:14], backend)
    Bb = sp_from_params(xbar[14:24], backend)
    Cb = sp_from_params(xbar[24:34], backend)
    A, B, C = q.A, q.B, q.C
    a, b, c, d = q.a, q.b, q.c, q.d
    ab, bb, cb, db = A1b[0, 0], A1b[0, 1], A1b[1, 0], A1b[1, 1]
    lin_ab = comm(Ab, B) + comm(A, Bb) - (B * ab + Bb * a + C * cb + Cb * c)
    lin_ac = comm(Ab, C) + comm(A, Cb) - (B * bb + Bb * b + C * db + Cb * d)
    lin_bc = comm(Bb, C) + comm(B, Cb)
    _, w7, w3, w4, _ = _forms(backend)
    lin_tau = theta4(Ab.T.copy(), w7) + theta4(Bb.T.copy(), w3) + theta4(Cb.T.copy(), w4) + w7 * (ab + db)
    parts = [lin_ab.reshape(-1), lin_ac.reshape(-1), lin_bc.reshape(-1), _g1_coeffs(lin_tau)]
    return np.concatenate(parts)


def _g1_coeffs(f) -> np.ndarray:
    return np.array([f.coeffs[INDEX[2][(i, j)]] for n, i in enumerate(G1) for j in G1[n + 1:]], dtype=f.coeffs.dtype)


def tangent_matrix(q: Quadruple) -> np.ndarray:
    backend = q.backend
    cols = [_tangent_columns(q, _unit(34, j, backend)) for j in range(34)]
    return np.array(cols, dtype=object if backend.exact else float).T


def _require_erp(q: Quadruple) -> None:
    v = check_structure(q)
    if not v.all_pass:
        raise NotERPQuadruple(f"quadruple fails: {', '.join(v.failed())}")


def tangent_system(q: Quadruple, check: bool = True) -> Subspace:
    """Null space of the linearized ERP conditions in the 34-coordinate chart."""
    if check:
        _require_erp(q)
    return Subspace(nullspace(tangent_matrix(q), q.backend), 34, q.backend)


def chart_velocity(mu_dot: Bracket) -> np.ndarray:
    """Chart coordinates of a bracket velocity of quadruple shape."""
    if _outside_chart(mu_dot):
        raise ValueError("velocity leaves the quadruple chart")
    qd = from_bracket(mu_dot)
    for M in (qd.A, qd.B, qd.C):
        if not sp_membership(M):
            raise ValueError("velocity block outside sp(g1, tau)")
    parts = [qd.A1.reshape(-1), sp_params(qd.A), sp_params(qd.B), sp_params(qd.C)]
    return np.concatenate(parts).astype(qd.A.dtype)


def symmetry_kind(q: Quadruple) -> str:
    return "g1_tau" if q.backend.is_zero(tr(q.A1)) else "h_tau"


def orbit_tangent(q: Quadruple) -> Subspace:
    backend = q.backend
    mu = to_bracket(q)
    algebra = stabilizer_algebra(symmetry_kind(q), backend)
    vecs = [chart_velocity(mu.act(D)) for D in algebra_matrices(algebra)]
    return Subspace(np.array(vecs, dtype=object if backend.exact else float).reshape(-1, 34), 34, backend)


def linear_deformation_space(q: Quadruple) -> Subspace:
    """The derivation family (D1, D2, 0, 0) with D in su(3), block-diagonal, D e7 = 0."""
    backend = q.backend
    mu = to_bracket(q)
    ders = derivations(mu, block_diag=True, fix_e7=True, su3=True)
    vecs = []
    for v in ders.basis:
        D = v.reshape(N, N)
        D1 = D[np.ix_(list(H1), list(H1))]
        D2 = D[np.ix_(list(G1), list(G1))].copy()
        if not sp_membership(D2):
            raise ValueError("derivation block outside sp(g1, tau)")
        zero = backend.zeros(10)
        vecs.append(np.concatenate([D1.reshape(-1), sp_params(D2), zero, zero]))
    return Subspace(np.array(vecs, dtype=object if backend.exact else float).reshape(-1, 34), 34, backend)


@dataclass
class TangentReport:
    tangent_dim: int
    orbit_dim: int
    derivation_dim: int
    sum_dim: int
    equivariantly_rigid: bool
    rigid: bool
    orbit_in_tangent: bool
    derivations_in_tangent: bool
    kind: str

    def summary(self) -> str:
        yn = lambda b: "yes" if b else "no"
        return (f"T={self.tangent_dim}, u.mu={self.orbit_dim}, d={self.derivation_dim}, "
                f"rigid={yn(self.rigid)}, equivariantly_rigid={yn(self.equivariantly_rigid)}")


def rigidity(q: Quadruple) -> TangentReport:
    T = tangent_system(q)
    U = orbit_tangent(q)
    D = linear_deformation_space(q)
    S = U + D
    return TangentReport(
        tangent_dim=T.dim,
        orbit_dim=U.dim,
        derivation_dim=D.dim,
        sum_dim=S.dim,
        equivariantly_rigid=U == T,
        rigid=S == T,
        orbit_in_tangent=U.issubset(T),
        derivations_in_tangent=D.issubset(T),
        kind=symmetry_kind(q),
    )


def chart_inner(u: np.ndarray, v: np.ndarray):
    return sum((a * b for a, b in zip(u, v)), u[0] * 0)


__all__ = [
    "G_MATRIX",
    "G_TILDE",
    "NotERPQuadruple",
    "RouteMismatch",
    "SymmetryElement",
    "TangentReport",
    "algebra_matrices",
    "chart_inner",
    "chart_velocity",
    "g_element",
    "group_action",
    "identity_element",
    "linear_deformation_space",
    "orbit_tangent",
    "rigidity",
    "stabilizer_algebra",
    "symmetry_kind",
    "tangent_matrix",
    "tangent_system",
    "u0",
    "u0g",
    "ug1_exp",
    "ug1_tau_matrix",
]
