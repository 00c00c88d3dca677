"""ERP normal form: quadruples (A1, A, B, C) and their structure checks.

A1 acts on span(e3, e4) through ad e7; A, B, C act on g1 = span(e1, e2, e5, e6)
through ad e7, ad e3, ad e4.  4x4 blocks use the basis order (e1, e2, e5, e6).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources

import numpy as np

from .exterior import G1, H1, OMEGA3, OMEGA3_BAR, OMEGA4, OMEGA7, TAU, Endo, KForm, theta
from .formats import dump_quadruple, parse_quadruple
from .g2core import torsion
from .liealg import Bracket, NilradicalVerdict, check_jacobi, coordinate_span, verify_nilradical
from .linalg import Subspace, matmul
from .scalars import EXACT, FLOAT, ONE, Backend, backend_of, exact_array, to_float_array

CATALOG_NAMES = ("J", "M2", "M3", "B", "M1")

T7 = exact_array([["-1/3", 0, 0, 0], [0, 0, 0, 0], [0, 0, "1/3", 0], [0, 0, 0, 0]])
T3 = exact_array([[0, 0, 0, "1/3"], [0, 0, 0, 0], [0, 0, 0, 0], ["1/3", 0, 0, 0]])
T4 = exact_array([[0, 0, 0, 0], [0, 0, 0, "-1/3"], [0, 0, 0, 0], [0, "-1/3", 0, 0]])

# Free entries of an element of sp(g1, tau), as (row, col) in the 4x4 block.
SP_LABELS = ("11", "12", "15", "16", "21", "25", "26", "55", "56", "65")
_POS = {"1": 0, "2": 1, "5": 2, "6": 3}
SP_POSITIONS = tuple((_POS[s[0]], _POS[s[1]]) for s in SP_LABELS)


def sp_from_params(p, backend: Backend | None = None) -> np.ndarray:
    """The 4x4 matrix with the sp(g1, tau) pattern built from 10 parameters."""
    backend = backend or backend_of(np.asarray(p))
    p = list(p)
    E11, E12, E15, E16, E21, E25, E26, E55, E56, E65 = p
    E = backend.zeros((4, 4))
    rows = [
        [E11, E12, E15, E16],
        [E21, -E11, E25, E26],
        [E26, -E16, E55, E56],
        [-E25, E15, E65, -E55],
    ]
    for i in range(4):
        for j in range(4):
            E[i, j] = rows[i][j]
    return E


def sp_params(E: np.ndarray) -> np.ndarray:
    return np.array([E[i, j] for i, j in SP_POSITIONS], dtype=E.dtype)


def _embed4(M: np.ndarray) -> np.ndarray:
    return Endo(M, G1).embed()


def _embed2(M: np.ndarray) -> np.ndarray:
    return Endo(M, H1).embed()


def theta4(M: np.ndarray, a: KForm) -> KForm:
    return theta(Endo(M, G1), a)


def _forms(backend: Backend):
    forms = (TAU, OMEGA7, OMEGA3, OMEGA4, OMEGA3_BAR)
    return forms if backend.exact else tuple(f.to_float() for f in forms)


def sp_pattern_ok(E: np.ndarray) -> bool:
    backend = backend_of(E)
    return backend.is_zero(E - sp_from_params(sp_params(E), backend))


def sp_membership(E: np.ndarray) -> bool:
    """theta(E) tau = 0, cross-checked against the explicit 10-parameter pattern."""
    backend = backend_of(E)
    tau = _forms(backend)[0]
    by_theta = theta4(E, tau).is_zero(backend)
    by_pattern = sp_pattern_ok(E)
    if by_theta != by_pattern:
        raise AssertionError("sp(g1, tau) characterizations disagree")
    return by_theta


def sym(M: np.ndarray) -> np.ndarray:
    half = EXACT.scalar(Fraction(1, 2)) if M.dtype == object else 0.5
    return (M + M.T) * half


def comm(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    return matmul(X, Y) - matmul(Y, X)


def tr(M: np.ndarray):
    return np.trace(M)


def frob(X: np.ndarray, Y: np.ndarray):
    return tr(matmul(X, Y.T))


# -- quadruples ---------------------------------------------------------------------


@dataclass
class Quadruple:
    A1: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    name: str = ""
    notes: str = ""

    def __post_init__(self):
        if self.A1.shape != (2, 2) or any(M.shape != (4, 4) for M in (self.A, self.B, self.C)):
            raise ValueError("a quadruple needs a 2x2 block and three 4x4 blocks")
        exact = [M.dtype == object for M in self.blocks]
        if any(exact) and not all(exact):
            self.A1, self.A, self.B, self.C = (to_float_array(M) for M in self.blocks)

    @property
    def blocks(self) -> tuple[np.ndarray, ...]:
        return (self.A1, self.A, self.B, self.C)

    @property
    def backend(self) -> Backend:
        return backend_of(self.A)

    @classmethod
    def zero(cls, backend: Backend = EXACT) -> Quadruple:
        return cls(backend.zeros((2, 2)), backend.zeros((4, 4)), backend.zeros((4, 4)), backend.zeros((4, 4)), "zero")

    def to_float(self) -> Quadruple:
        return Quadruple(*(to_float_array(M) for M in self.blocks), name=self.name, notes=self.notes)

    def replace(self, **blocks) -> Quadruple:
        data = dict(zip(("A1", "A", "B", "C"), (M.copy() for M in self.blocks)))
        data.update(blocks)
        return Quadruple(**data, name=self.name, notes=self.notes)

    @property
    def a(self):
        return self.A1[0, 0]

    @property
    def b(self):
        return self.A1[0, 1]

    @property
    def c(self):
        return self.A1[1, 0]

    @property
    def d(self):
        return self.A1[1, 1]

    @property
    def E(self) -> np.ndarray:
        return self.A - self._t(T7)

    @property
    def F(self) -> np.ndarray:
        return self.B - self._t(T3)

    @property
    def G(self) -> np.ndarray:
        return self.C - self._t(T4)

    def _t(self, T: np.ndarray) -> np.ndarray:
        return T if self.backend.exact else to_float_array(T)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Quadruple):
            return NotImplemented
        backend = self.backend if self.backend.exact and other.backend.exact else FLOAT
        return all(backend.is_zero(backend.convert(x) - backend.convert(y)) for x, y in zip(self.blocks, other.blocks))

    __hash__ = None

    def to_text(self) -> str:
        return dump_quadruple(*self.blocks, name=self.name, notes=self.notes)


def chart(q: Quadruple) -> np.ndarray:
    """34 coordinates: A1 row-major, then the sp parameters of E, F, G."""
    parts = [q.A1.reshape(-1), sp_params(q.E), sp_params(q.F), sp_params(q.G)]
    return np.concatenate(parts).astype(q.A.dtype)


def from_chart(x, backend: Backend | None = None, name: str = "") -> Quadruple:
    x = np.asarray(x)
    backend = backend or backend_of(x)
    if x.shape != (34,):
        raise ValueError("chart vectors have 34 coordinates")
    conv = (lambda M: M) if backend.exact else to_float_array
    A1 = x[:4].reshape(2, 2).copy()
    A = sp_from_params(x[4:14], backend) + conv(T7)
    B = sp_from_params(x[14:24], backend) + conv(T3)
    C = sp_from_params(x[24:34], backend) + conv(T4)
    return Quadruple(A1, A, B, C, name=name)


def to_bracket(q: Quadruple) -> Bracket:
    backend = q.backend
    c = backend.zeros((7, 7, 7))
    for e, M, dom in ((6, q.A1, H1), (6, q.A, G1), (2, q.B, G1), (3, q.C, G1)):
        for b, j in enumerate(dom):
            for a, k in enumerate(dom):
                v = M[a, b]
                c[e, j, k] = c[e, j, k] + v
                c[j, e, k] = c[j, e, k] - v
    return Bracket(c, q.name)


def from_bracket(mu: Bracket, name: str = "") -> Quadruple:
    """Read the four blocks back from a bracket of quadruple shape."""
    ad7, ad3, ad4 = mu.ad(6), mu.ad(2), mu.ad(3)
    idx = lambda M, dom: M[np.ix_(list(dom), list(dom))].copy()
    return Quadruple(idx(ad7, H1), idx(ad7, G1), idx(ad3, G1), idx(ad4, G1), name=name or mu.name)


@lru_cache(maxsize=None)
def _catalog_text(name: str) -> str:
    return resources.files("g2erp").joinpath("data", f"{name}.quad").read_text(encoding="utf-8")


def load_quadruple_text(text: str) -> Quadruple:
    parsed = parse_quadruple(text)
    return Quadruple(parsed.A1, parsed.A, parsed.B, parsed.C, name=parsed.name, notes=parsed.notes)


def catalog(name: str) -> Quadruple:
    if name not in CATALOG_NAMES:
        raise KeyError(f"unknown catalog entry {name!r}; known: {', '.join(CATALOG_NAMES)}")
    return load_quadruple_text(_catalog_text(name))


def catalog_text(name: str) -> str:
    catalog(name)
    return _catalog_text(name)


# A map in G2 certifying that J is equivariantly equivalent to the earlier unimodular example.
EXAMPLE_J_H = exact_array([
    [0, 0, "3*sqrt(2)", "3*sqrt(2)", 0, 0, 0],
    [0, 0, "sqrt(6)", "-sqrt(6)", "-2*sqrt(6)", 0, 0],
    ["-3*sqrt(2)", "-3*sqrt(2)", 0, 0, 0, 0, 0],
    ["-sqrt(6)", "sqrt(6)", 0, 0, 0, 0, "2*sqrt(6)"],
    [0, 0, 0, 0, 0, -6, 0],
    [0, 0, "-2*sqrt(3)", "2*sqrt(3)", "-2*sqrt(3)", 0, 0],
    ["-2*sqrt(3)", "2*sqrt(3)", 0, 0, 0, 0, "-2*sqrt(3)"],
]) * EXACT.scalar(Fraction(1, 6))


# -- structure checks -----------------------------------------------------------------


@dataclass
class StructureVerdict:
    flags: dict
    jacobi_failures: list = field(default_factory=list)
    erp: bool = False
    tau_is_normal: bool = False
    consistent: bool = True
    nilradical_dim: int | None = None

    @property
    def all_pass(self) -> bool:
        return all(self.flags.values())

    def failed(self) -> list[str]:
        return [k for k, v in self.flags.items() if not v]


def jacobi_identities(q: Quadruple) -> dict[str, np.ndarray]:
    A, B, C = q.A, q.B, q.C
    return {
        "jac_AB": comm(A, B) - (B * q.a + C * q.c),
        "jac_AC": comm(A, C) - (B * q.b + C * q.d),
        "jac_BC": comm(B, C),
    }


def torsion_condition(q: Quadruple) -> KForm:
    """theta(E^t) w7 + theta(F^t) w3 + theta(G^t) w4 + tr(A1) w7 (zero when it holds)."""
    _, w7, w3, w4, _ = _forms(q.backend)
    return (theta4(q.E.T.copy(), w7) + theta4(q.F.T.copy(), w3) + theta4(q.G.T.copy(), w4)
            + w7 * tr(q.A1))


def closedness_identities(q: Quadruple) -> dict[str, KForm]:
    _, w7, w3, w4, w3b = _forms(q.backend)
    third = EXACT.scalar(Fraction(1, 3)) if q.backend.exact else 1 / 3
    E, F, G = q.E, q.F, q.G
    return {
        "clo_1": theta4(F, w7) + w3 * q.a + w4 * q.c - theta4(E, w3) + w3b * third,
        "clo_2": theta4(G, w7) + w3 * q.b + w4 * q.d - theta4(E, w4),
        "clo_3": theta4(F, w4) - theta4(G, w3),
    }


def ricci_identities(q: Quadruple) -> dict[str, np.ndarray]:
    backend = q.backend
    third = EXACT.scalar(Fraction(1, 3)) if backend.exact else 1 / 3
    half = EXACT.scalar(Fraction(1, 2)) if backend.exact else 0.5
    A1, A, B, C = q.blocks
    SA1, SA, SB, SC = sym(A1), sym(A), sym(B), sym(C)
    trA1 = tr(A1)
    i = np.array([tr(matmul(SA1, SA1)) + tr(matmul(SA, SA)) - third], dtype=A.dtype)
    ii = (comm(A, A.T) + comm(B, B.T) + comm(C, C.T)) * half - SA * trA1
    iii = np.array([tr(matmul(SA, SB)), tr(matmul(SA, SC))], dtype=A.dtype)
    gram = backend.zeros((2, 2))
    gram[0, 0] = tr(matmul(SB, SB))
    gram[0, 1] = gram[1, 0] = tr(matmul(SB, SC))
    gram[1, 1] = tr(matmul(SC, SC))
    iv = gram - comm(A1, A1.T) * half + SA1 * trA1 - backend.eye(2) * third
    return {"ricci_i": i, "ricci_ii": ii, "ricci_iii": iii, "ricci_iv": iv}


def check_structure(q: Quadruple, cross_check: bool = True) -> StructureVerdict:
    backend = q.backend
    tau = _forms(backend)[0]
    flags = {
        "sp_E": sp_membership(q.E),
        "sp_F": sp_membership(q.F),
        "sp_G": sp_membership(q.G),
        "torsion_condition": torsion_condition(q).is_zero(backend),
    }
    jac = jacobi_identities(q)
    failures = [k for k, v in jac.items() if not backend.is_zero(v)]
    for k in jac:
        flags[k] = k not in failures
    for k, v in closedness_identities(q).items():
        flags[k] = v.is_zero(backend)
    for k, v in ricci_identities(q).items():
        flags[k] = backend.is_zero(v)
    verdict = StructureVerdict(flags, failures)
    if cross_check:
        mu = to_bracket(q)
        report = torsion(mu)
        verdict.erp = report.erp
        verdict.tau_is_normal = report.tau is not None and backend.is_zero((report.tau - tau).coeffs)
        erp_normal = verdict.erp and verdict.tau_is_normal
        verdict.consistent = erp_normal == verdict.all_pass
        if check_jacobi(mu) and verdict.all_pass:
            verdict.nilradical_dim = nilradical(q)[0].dim
    return verdict


# -- nilradical and the unimodular case -----------------------------------------------


def _nilpotent(M: np.ndarray, backend: Backend) -> bool:
    return backend.is_zero(_fourth_power(M, backend))


def _fourth_power(M: np.ndarray, backend: Backend) -> np.ndarray:
    """M^4, scaled to unit Frobenius norm first in float so the test is scale free."""
    if not backend.exact:
        scale = float(np.linalg.norm(M))
        M = M / scale if scale else M
    P = M
    for _ in range(M.shape[0] - 1):
        P = matmul(P, M)
    return P


def nilradical_candidate(q: Quadruple) -> Subspace:
    """g1 plus the directions x e3 + y e4 with xB + yC nilpotent.

    Two independent nilpotent directions are kept only when the whole plane is
    nilpotent; otherwise the best single direction is used, which matters for
    float input where a nearly nilpotent block can pass the tolerance test.
    """
    backend = q.backend
    B, C = q.B, q.C
    one = ONE if backend.exact else 1.0
    zero = backend.scalar(0)
    trials = [(one, zero), (zero, one)]
    gram = [tr(matmul(B, B)), tr(matmul(B, C)), tr(matmul(C, C))]
    if not backend.is_zero(gram[0]):
        trials.append((gram[1], -gram[0]))
    if not backend.is_zero(gram[2]):
        trials.append((gram[2], -gram[1]))
    passing = [(x, y) for x, y in trials if _nilpotent(B * x + C * y, backend)]
    if all(_nilpotent(M, backend) for M in (B, C, B + C)):
        directions = [(one, zero), (zero, one)]
    elif passing:
        defect = lambda t: float(np.max(np.abs(to_float_array(_fourth_power(B * t[0] + C * t[1], backend)))))
        directions = [passing[0] if backend.exact else min(passing, key=defect)]
    else:
        directions = []
    extra = []
    for x, y in directions:
        v = backend.zeros(7)
        v[2], v[3] = x, y
        extra.append(v)
    vecs = list(coordinate_span(G1, backend).basis) + extra
    return Subspace(np.array(vecs, dtype=object if backend.exact else float), 7, backend)


def nilradical(q: Quadruple) -> tuple[Subspace, NilradicalVerdict]:
    cand = nilradical_candidate(q)
    return cand, verify_nilradical(to_bracket(q), cand)


def is_normal(M: np.ndarray, backend: Backend) -> bool:
    return backend.is_zero(comm(M, M.T))


def is_symmetric(M: np.ndarray, backend: Backend) -> bool:
    return backend.is_zero(M - M.T)


@dataclass
class UnimodularReport:
    unimodular: bool
    checks: dict
    data: dict
    nilradical_dim: int
    nilradical_status: str

    @property
    def ok(self) -> bool:
        return all(self.checks.values()) and self.nilradical_status == "PASS"


def unimodular_specialization(q: Quadruple) -> UnimodularReport:
    backend = q.backend
    A1, A, B, C = q.blocks
    third = EXACT.scalar(Fraction(1, 3)) if backend.exact else 1 / 3
    cand, verdict = nilradical(q)
    unimodular = backend.is_zero(tr(A1))
    checks: dict[str, bool] = {}
    data: dict[str, bool] = {}
    if unimodular:
        checks["A1_zero"] = backend.is_zero(A1)
        for label, M in (("A", A), ("B", B), ("C", C)):
            checks[f"{label}_symmetric"] = is_symmetric(M, backend)
        checks["commuting"] = all(backend.is_zero(comm(X, Y)) for X, Y in ((A, B), (A, C), (B, C)))
        mats = (A, B, C)
        gram_ok = True
        for i in range(3):
            for j in range(3):
                target = third if i == j else backend.scalar(0)
                gram_ok &= backend.eq(frob(mats[i], mats[j]), target)
        checks["sqrt3_orthonormal"] = gram_ok
        checks["nilradical_g1"] = cand.dim == 4
    else:
        data["A1_normal"] = is_normal(A1, backend)
        data["A_normal"] = is_normal(A, backend)
        data["B_nilpotent"] = _nilpotent(B, backend)
        data["C_nilpotent"] = _nilpotent(C, backend)
        data["AB_commute"] = backend.is_zero(comm(A, B))
        data["A_symmetric"] = is_symmetric(A, backend)
        data["B_symmetric"] = is_symmetric(B, backend)
        data["abc_zero"] = all(backend.is_zero(v) for v in (q.a, q.b, q.c))
    return UnimodularReport(unimodular, checks, data, cand.dim, verdict.status)


__all__ = [
    "CATALOG_NAMES",
    "EXAMPLE_J_H",
    "Quadruple",
    "SP_LABELS",
    "StructureVerdict",
    "T3",
    "T4",
    "T7",
    "UnimodularReport",
    "catalog",
    "catalog_text",
    "chart",
    "check_structure",
    "closedness_identities",
    "from_bracket",
    "from_chart",
    "jacobi_identities",
    "load_quadruple_text",
    "nilradical",
    "nilradical_candidate",
    "torsion_condition",
    "ricci_identities",
    "sp_from_params",
    "sp_membership",
    "sp_params",
    "theta4",
    "to_bracket",
    "unimodular_specialization",
]
