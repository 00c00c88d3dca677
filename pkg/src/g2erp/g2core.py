"""G2-structures on a Lie algebra: metric, torsion, ERP predicate, Q and flow."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .exterior import (
    COMBOS,
    N,
    OMEGA,
    PHI,
    RHO_MINUS,
    RHO_PLUS,
    KForm,
    E7,
    gl7_action,
    inner,
    interior,
    star6,
    star7,
    theta,
    wedge,
)
from .liealg import Bracket, check_jacobi, ricci
from .linalg import InconsistentSystem, Subspace, matmul, nullspace, solve
from .scalars import EXACT, FLOAT, ONE, Backend, backend_of, to_float_array


class NotPositive(ValueError):
    """The 3-form does not define a G2-structure for the standard orientation."""


class NotERP(ValueError):
    pass


def _frac(p: int, q: int, backend: Backend):
    return EXACT.scalar(Fraction(p, q)) if backend.exact else p / q


# -- metric ---------------------------------------------------------------------


def phi_bilinear(phi: KForm) -> np.ndarray:
    """B_ij with (1/6) i_{e_i}phi ^ i_{e_j}phi ^ phi = B_ij e^{1..7}."""
    backend = phi.backend
    contractions = [interior(i, phi) for i in range(N)]
    B = backend.zeros((N, N))
    sixth = _frac(1, 6, backend)
    for i in range(N):
        for j in range(i, N):
            top = wedge(wedge(contractions[i], contractions[j]), phi)
            v = top.coeffs[0] * sixth
            B[i, j] = v
            B[j, i] = v
    return B


@dataclass
class G2Structure:
    """A positive 3-form with its metric, volume form and orthonormal frame.

    ``frame`` has g-orthonormal, positively oriented columns.
    """

    phi: KForm
    metric: np.ndarray
    volume: KForm
    frame: np.ndarray
    standard: bool = False

    @property
    def backend(self) -> Backend:
        return self.phi.backend

    def pull(self, a: KForm) -> KForm:
        """Coefficients of ``a`` in the coframe dual to ``frame``."""
        if self.standard:
            return a
        return gl7_action(np.linalg.inv(self.frame), a.to_float())

    def push(self, a: KForm) -> KForm:
        if self.standard:
            return a
        return gl7_action(self.frame, a)

    def star(self, a: KForm) -> KForm:
        if self.standard:
            return star7(a)
        return self.push(star7(self.pull(a)))

    def norm_sq(self, a: KForm):
        b = self.pull(a)
        return inner(b, b)


def standard_structure(backend: Backend = EXACT) -> G2Structure:
    phi = PHI if backend.exact else PHI.to_float()
    vol = KForm(7, backend.array([1]))
    return G2Structure(phi, backend.eye(N), vol, backend.eye(N), standard=True)


def induce_metric(phi: KForm) -> G2Structure:
    """Metric and orientation of a 3-form, raising NotPositive if it is not positive."""
    backend = phi.backend
    B = phi_bilinear(phi)
    if backend.exact and backend.is_zero(B - backend.eye(N)):
        return G2Structure(phi, backend.eye(N), KForm(7, backend.array([1])), backend.eye(N), standard=True)
    Bf = to_float_array(B)
    det_b = float(np.linalg.det(Bf))
    if not det_b > 0:
        raise NotPositive(f"det B = {det_b:.3g} is not positive")
    g = Bf * det_b ** (-1.0 / 9.0)
    g = (g + g.T) / 2
    try:
        L = np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise NotPositive("induced bilinear form is indefinite") from exc
    frame = np.linalg.inv(L).T
    vol = KForm(7, np.array([math.sqrt(np.linalg.det(g))]))
    return G2Structure(phi.to_float(), g, vol, frame)


# -- torsion --------------------------------------------------------------------


@dataclass
class TorsionReport:
    tau: KForm | None
    tau_norm_sq: object
    closed: bool
    erp: bool
    residuals: dict = field(default_factory=dict)
    split_agrees: bool | None = None

    def __post_init__(self):
        if self.erp and not self.closed:
            raise AssertionError("ERP report for a non-closed structure")


def _align(mu: Bracket, structure: G2Structure) -> Bracket:
    if structure.backend.exact or not mu.backend.exact:
        return mu
    return mu.to_float()


def _max_abs(a: KForm) -> float:
    c = to_float_array(a.coeffs)
    return float(np.max(np.abs(c), initial=0.0))


def split_torsion(lam: Bracket, A: np.ndarray) -> KForm:
    """tau_lambda + tau_A for a closed split bracket and the standard phi."""
    exact = lam.backend.exact
    om, rp, rm, e7 = (f if exact else f.to_float() for f in (OMEGA, RHO_PLUS, RHO_MINUS, E7))
    trA = np.trace(A)
    tau_lam = -(wedge(star6(wedge(lam.d(om), om)), e7)) - star6(lam.d(rm))
    tau_A = om * trA + theta(A.T.copy(), om)
    return tau_lam + tau_A


def delta_la(lam: Bracket, A: np.ndarray) -> KForm:
    """Expansion of d_mu tau through lambda and A for a closed split bracket."""
    exact = lam.backend.exact
    om, rp, rm, e7 = (f if exact else f.to_float() for f in (OMEGA, RHO_PLUS, RHO_MINUS, E7))
    trA = np.trace(A)
    At = A.T.copy()
    dlo = lam.d(om)
    terms = [
        -wedge(lam.d(star6(wedge(dlo, om))), e7),
        -lam.d(star6(lam.d(star6(rp)))),
        -wedge(theta(A, star6(lam.d(rm))), e7),
        dlo * trA,
        wedge(theta(A, om), e7) * trA,
        wedge(theta(A, theta(At, om)), e7),
        lam.d(theta(At, om)),
    ]
    out = terms[0]
    for t in terms[1:]:
        out = out + t
    return out


def torsion(mu: Bracket, structure: G2Structure | None = None) -> TorsionReport:
    structure = structure or standard_structure(mu.backend)
    mu = _align(mu, structure)
    backend = structure.backend
    phi = structure.phi
    residuals = {}
    if not check_jacobi(mu):
        return TorsionReport(None, None, False, False, {"jacobi": check_jacobi(mu).triple})
    dphi = mu.d(phi)
    residuals["dphi"] = _max_abs(dphi)
    closed = backend.is_zero(dphi.coeffs)
    if not closed:
        return TorsionReport(None, None, False, False, residuals)
    tau = -structure.star(mu.d(structure.star(phi)))
    norm = structure.norm_sq(tau)
    lhs = mu.d(tau) * 6
    rhs = phi * norm + structure.star(wedge(tau, tau))
    diff = lhs - rhs
    residuals["erp"] = _max_abs(diff)
    erp = (not backend.is_zero(tau.coeffs)) and backend.is_zero(diff.coeffs)
    split_agrees = None
    if structure.standard and mu.is_split():
        lam, A = mu.split()
        other = split_torsion(lam, A)
        residuals["split"] = _max_abs(other - tau)
        split_agrees = backend.is_zero((other - tau).coeffs)
    return TorsionReport(tau, norm, True, erp, residuals, split_agrees)


# -- Q, Ricci scalars -----------------------------------------------------------


def _sym_basis(backend: Backend) -> list[np.ndarray]:
    out = []
    for i in range(N):
        for j in range(i, N):
            E = backend.zeros((N, N))
            one = ONE if backend.exact else 1.0
            E[i, j] = one
            E[j, i] = one
            out.append(E)
    return out


def solve_Q(mu: Bracket, structure: G2Structure | None = None) -> np.ndarray:
    """The symmetric Q with theta(Q) phi = d_mu tau."""
    report = torsion(mu, structure)
    if not report.closed:
        raise ValueError("solve_Q needs a closed structure")
    backend = backend_of(report.tau.coeffs)
    phi = PHI if backend.exact else PHI.to_float()
    basis = _sym_basis(backend)
    M = np.array([theta(E, phi).coeffs for E in basis], dtype=object if backend.exact else float).T
    mu = mu if backend.exact else mu.to_float()
    rhs = mu.d(report.tau).coeffs
    x = solve(M, rhs, backend)
    Q = backend.zeros((N, N))
    for coef, E in zip(x, basis):
        Q = Q + E * coef
    return Q


@dataclass
class BryantEquality:
    scal_sq: object
    three_ric_sq: object
    equal: bool

    def __iter__(self):
        return iter((self.scal_sq, self.three_ric_sq, self.equal))


def bryant_equality(mu: Bracket) -> BryantEquality:
    report = torsion(mu)
    if not report.closed:
        raise ValueError("Bryant's pinching equality is stated for closed structures")
    R = ricci(mu)
    scal = np.trace(R)
    ric_sq = np.trace(matmul(R, R))
    lhs, rhs = scal * scal, ric_sq * 3
    return BryantEquality(lhs, rhs, mu.backend.eq(lhs, rhs))


# -- ERP flow ---------------------------------------------------------------------


def flow_coefficient(t: float, tau_norm_sq: float) -> float:
    s = tau_norm_sq / 6.0
    return math.expm1(s * t) / s


@dataclass
class FlowSample:
    t: float
    c: float
    structure: G2Structure
    report: TorsionReport


def erp_flow(mu: Bracket, t: float) -> FlowSample:
    """phi(t) = phi + c(t) d tau, with metric and torsion re-derived at time t."""
    base = torsion(mu)
    if not base.erp:
        raise NotERP("the flow line is only defined from ERP data")
    if t == 0:
        return FlowSample(0.0, 0.0, standard_structure(mu.backend), base)
    muf = mu.to_float()
    norm = float(base.tau_norm_sq)
    c = flow_coefficient(t, norm)
    dtau = muf.d(base.tau.to_float())
    phi_t = PHI.to_float() + dtau * c
    structure = induce_metric(phi_t)
    return FlowSample(t, c, structure, torsion(muf, structure))


# -- consequences of the ERP condition ----------------------------------------------


@dataclass
class ERPDiagnostics:
    checks: dict
    P: Subspace
    Q: Subspace

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def _kernel_of_contraction(a: KForm, backend: Backend) -> Subspace:
    cols = []
    e = backend.eye(N)
    for i in range(N):
        cols.append(interior(e[i], a).coeffs)
    M = np.array(cols, dtype=object if backend.exact else float).T
    return Subspace(nullspace(M, backend), N, backend)


def _acts_as(R: np.ndarray, S: Subspace, value, backend: Backend) -> bool:
    for v in S.basis:
        if not backend.is_zero(matmul(R, v) - v * value):
            return False
    return True


def erp_diagnostics(mu: Bracket) -> ERPDiagnostics:
    report = torsion(mu)
    if not report.erp:
        raise NotERP("diagnostics require an ERP structure")
    backend = mu.backend
    tau = report.tau
    tt = wedge(tau, tau)
    stt = star7(tt)
    checks = {
        "tau3_zero": backend.is_zero(wedge(tt, tau).coeffs),
        "d_tau2_zero": backend.is_zero(mu.d(tt).coeffs),
        "d_star_tau2_zero": backend.is_zero(mu.d(stt).coeffs),
    }
    P = _kernel_of_contraction(tt, backend)
    Q = _kernel_of_contraction(stt, backend)
    checks["dim_P_3"] = P.dim == 3
    checks["dim_Q_4"] = Q.dim == 4
    R = ricci(mu)
    checks["ric_P"] = _acts_as(R, P, -report.tau_norm_sq * _frac(1, 6, backend), backend)
    checks["ric_Q"] = _acts_as(R, Q, _frac(0, 1, backend), backend)
    return ERPDiagnostics(checks, P, Q)


__all__ = [
    "BryantEquality",
    "ERPDiagnostics",
    "FlowSample",
    "G2Structure",
    "InconsistentSystem",
    "NotERP",
    "NotPositive",
    "TorsionReport",
    "bryant_equality",
    "delta_la",
    "erp_diagnostics",
    "erp_flow",
    "flow_coefficient",
    "induce_metric",
    "phi_bilinear",
    "solve_Q",
    "split_torsion",
    "standard_structure",
    "torsion",
]

_ = (COMBOS, FLOAT)
