"""Numerical search for ERP quadruples by damped Gauss-Newton.

The unknown is the 34-coordinate chart point x = (A1, E, F, G).  Zeros of the
residual (Jacobi identities plus the torsion condition on E, F, G) are exactly
the ERP quadruples with tau = e12 - e56.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm
from scipy.optimize import least_squares

from .exterior import G1, INDEX
from .g2core import torsion
from .liealg import check_jacobi
from .quad import (
    T3,
    T4,
    T7,
    Quadruple,
    from_chart,
    torsion_condition,
    ricci_identities,
    sp_from_params,
    to_bracket,
)
from .scalars import FLOAT, to_float_array

log = logging.getLogger(__name__)

N_CHART = 34
N_RESIDUAL = 54
CONVERGED = 1e-10

_T7, _T3, _T4 = (to_float_array(T).reshape(-1) for T in (T7, T3, T4))
_I4 = np.eye(4)
_I16 = np.eye(16)

# vec(E) = SP @ params (row-major vec)
SP = np.stack([sp_from_params(np.eye(10)[j], FLOAT).reshape(-1) for j in range(10)], axis=1)


def g1_coeffs(f) -> np.ndarray:
    """Coefficients of a 2-form on the six monomials e^{ij}, i < j in g1."""
    return np.array([f.coeffs[INDEX[2][(i, j)]] for n, i in enumerate(G1) for j in G1[n + 1:]])


def _torsion_matrix() -> np.ndarray:
    cols = []
    for j in range(N_CHART):
        e = np.zeros(N_CHART)
        e[j] = 1.0
        cols.append(g1_coeffs(torsion_condition(from_chart(e, FLOAT))))
    return np.array(cols).T


L45 = _torsion_matrix()

CONSTRAINTS = {
    "none": {},
    "unimodular": {0: 0.0, 1: 0.0, 2: 0.0, 3: 0.0},
    "a1_diag0d": {0: 0.0, 1: 0.0, 2: 0.0},
    "a1_diagonal": {1: 0.0, 2: 0.0},
}


def unpack(x: np.ndarray):
    A1 = x[:4].reshape(2, 2)
    A = (SP @ x[4:14] + _T7).reshape(4, 4)
    B = (SP @ x[14:24] + _T3).reshape(4, 4)
    C = (SP @ x[24:34] + _T4).reshape(4, 4)
    return A1, A, B, C


def residual(x: np.ndarray) -> np.ndarray:
    """[Jac(A,B), Jac(A,C), [B,C], torsion condition] stacked (16+16+16+6)."""
    x = np.asarray(x, dtype=float)
    A1, A, B, C = unpack(x)
    a, b, c, d = A1.reshape(-1)
    r_ab = A @ B - B @ A - a * B - c * C
    r_ac = A @ C - C @ A - b * B - d * C
    r_bc = B @ C - C @ B
    return np.concatenate([r_ab.reshape(-1), r_ac.reshape(-1), r_bc.reshape(-1), L45 @ x])


def jacobian(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    A1, A, B, C = unpack(x)
    a, b, c, d = A1.reshape(-1)
    vB, vC = B.reshape(-1), C.reshape(-1)

    def left(M):  # d vec(M X) / d vec(X)
        return np.kron(M, _I4)

    def right(M):  # d vec(X M) / d vec(X)
        return np.kron(_I4, M.T)

    J = np.zeros((N_RESIDUAL, N_CHART))
    # Jac(A, B) = AB - BA - aB - cC
    J[0:16, 4:14] = (right(B) - left(B)) @ SP
    J[0:16, 14:24] = (left(A) - right(A) - a * _I16) @ SP
    J[0:16, 24:34] = -c * SP
    J[0:16, 0] = -vB
    J[0:16, 2] = -vC
    # Jac(A, C) = AC - CA - bB - dC
    J[16:32, 4:14] = (right(C) - left(C)) @ SP
    J[16:32, 14:24] = -b * SP
    J[16:32, 24:34] = (left(A) - right(A) - d * _I16) @ SP
    J[16:32, 1] = -vB
    J[16:32, 3] = -vC
    # [B, C]
    J[32:48, 14:24] = (right(C) - left(C)) @ SP
    J[32:48, 24:34] = (left(B) - right(B)) @ SP
    J[48:54] = L45
    return J


# -- Levenberg-Marquardt -----------------------------------------------------------------


@dataclass
class LMTrace:
    x: np.ndarray
    norm: float
    iterations: int
    converged: bool
    costs: list = field(default_factory=list)
    last_step: float = 0.0


def levenberg_marquardt(x0: np.ndarray, max_iters: int = 500, fixed: dict | None = None,
                        tol: float = 1e-13, lam0: float = 1e-3) -> LMTrace:
    """Minimize 0.5 |r|^2; the damping is divided by 10 on success and multiplied by 10 otherwise."""
    fixed = fixed or {}
    x = np.array(x0, dtype=float)
    for i, v in fixed.items():
        x[i] = v
    free = np.array([i for i in range(N_CHART) if i not in fixed])
    lam = lam0
    r = residual(x)
    cost = 0.5 * float(r @ r)
    costs = [cost]
    step_norm = 0.0
    it = 0
    for it in range(1, max_iters + 1):
        if np.sqrt(2 * cost) <= tol:
            break
        J = jacobian(x)[:, free]
        g = J.T @ r
        H = J.T @ J
        accepted = False
        while lam < 1e16:
            try:
                step = np.linalg.solve(H + lam * np.eye(len(free)), -g)
            except np.linalg.LinAlgError:
                lam *= 10
                continue
            x_new = x.copy()
            x_new[free] += step
            r_new = residual(x_new)
            cost_new = 0.5 * float(r_new @ r_new)
            if cost_new < cost:
                x, r, cost = x_new, r_new, cost_new
                step_norm = float(np.linalg.norm(step))
                lam = max(lam / 10, 1e-15)
                costs.append(cost)
                accepted = True
                break
            lam *= 10
        if not accepted:
            step_norm = 0.0
            break
        if step_norm < 1e-16:
            break
    norm = float(np.sqrt(2 * cost))
    return LMTrace(x, norm, it, norm <= CONVERGED, costs, step_norm)


# -- initialization, filters, invariants -----------------------------------------------------


def project_sp(M: np.ndarray) -> np.ndarray:
    """Orthogonal projection of a 4x4 matrix onto the sp(g1, tau) parameters."""
    params, *_ = np.linalg.lstsq(SP, M.reshape(-1), rcond=None)
    return params


def random_start(rng: np.random.Generator) -> np.ndarray:
    x = np.empty(N_CHART)
    x[:4] = rng.uniform(-1, 1, 4)
    for k in range(3):
        x[4 + 10 * k: 14 + 10 * k] = project_sp(rng.uniform(-1, 1, (4, 4)))
    return x


def _spectral(q: Quadruple) -> np.ndarray:
    A1, A, B, C = (to_float_array(M) for M in q.blocks)
    ev = lambda M: np.sort_complex(np.round(np.linalg.eigvals(M), 9))
    parts = [
        ev(A1).real, ev(A1).imag, ev(A).real, ev(A).imag,
        np.sort(np.linalg.svd(B + 1j * C, compute_uv=False)),
    ]
    return np.concatenate(parts)


def invariants(q: Quadruple) -> np.ndarray:
    """Spectral data constant along the U0 orbits and symmetric under the g coset."""
    from .deform import G_MATRIX

    own = _spectral(q)
    flipped = _spectral(_quadruple_from_blocks(_act_float(to_float_array(G_MATRIX), q)))
    return min(own, flipped, key=lambda v: tuple(np.round(v, 6)))


def trace_defect(q: Quadruple) -> float:
    return float(abs(ricci_identities(q.to_float())["ricci_i"][0]))


@dataclass
class SearchHit:
    x: np.ndarray
    quadruple: Quadruple
    residual_norm: float
    iterations: int
    restart: int
    erp: bool
    trace_defect: float
    invariants: np.ndarray
    duplicates: int = 0


@dataclass
class SearchResult:
    hits: list
    attempts: int
    converged: int
    rejected: int
    duplicates: int
    diagnostics: list = field(default_factory=list)


def _assess(trace: LMTrace, restart: int) -> tuple[SearchHit | None, str]:
    if not trace.converged:
        return None, f"restart {restart}: no convergence (|r| = {trace.norm:.3e} after {trace.iterations} iterations)"
    q = from_chart(trace.x, FLOAT, name=f"hit{restart}")
    defect = trace_defect(q)
    if defect > 1e-8:
        return None, f"restart {restart}: rejected by trace condition (defect {defect:.2e})"
    mu = to_bracket(q)
    if not check_jacobi(mu):
        return None, f"restart {restart}: rejected, bracket fails Jacobi"
    rep = torsion(mu)
    tau_ok = rep.tau is not None and rep.tau.close_to(_TAU_F, 1e-8)
    if not (rep.erp and tau_ok):
        return None, f"restart {restart}: rejected by the ERP predicate"
    hit = SearchHit(trace.x, q, trace.norm, trace.iterations, restart, True, defect, invariants(q))
    return hit, f"restart {restart}: converged (|r| = {trace.norm:.3e}, {trace.iterations} iterations)"


from .exterior import TAU  # noqa: E402

_TAU_F = TAU.to_float()


# -- orbit-aware deduplication ----------------------------------------------------------------


_G1 = list(G1)


def _act_constants(M: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Quadruple blocks of h.mu from the structure constants of mu."""
    hinv = np.linalg.inv(M)
    cc = np.einsum("kl,abl,ai,bj->ijk", M, c, hinv, hinv)
    blocks = [cc[6].T[np.ix_([2, 3], [2, 3])], cc[6].T[np.ix_(_G1, _G1)],
              cc[2].T[np.ix_(_G1, _G1)], cc[3].T[np.ix_(_G1, _G1)]]
    return np.concatenate([b.reshape(-1) for b in blocks])


def _act_float(M: np.ndarray, q: Quadruple) -> np.ndarray:
    return _act_constants(M, to_bracket(q.to_float()).c)


def _quadruple_from_blocks(v: np.ndarray) -> Quadruple:
    return Quadruple(v[:4].reshape(2, 2), v[4:20].reshape(4, 4), v[20:36].reshape(4, 4), v[36:52].reshape(4, 4))


def _blocks(q: Quadruple) -> np.ndarray:
    return np.concatenate([to_float_array(M).reshape(-1) for M in q.blocks])


def _u0_float(t: np.ndarray) -> np.ndarray:
    M = np.eye(7)
    for angle, (i, j) in zip((t[0], t[1], -t[0] - t[1]), ((2, 3), (0, 1), (4, 5))):
        cs, sn = np.cos(angle), np.sin(angle)
        M[np.ix_([i, j], [i, j])] = [[cs, sn], [-sn, cs]]
    return M


def orbit_distance(p: Quadruple, q: Quadruple, unimodular: bool, starts: int = 8, seed: int = 0) -> float:
    """min over the symmetry group of |h.p - q| (block entries).

    The U0 torus and its g coset are scanned on a grid and the best points are
    polished by least squares; the four-parameter unimodular group uses random
    starts.
    """
    from .deform import G_MATRIX, ug1_tau_matrix

    c = to_bracket(p.to_float()).c
    target = _blocks(q)
    if unimodular:
        gens = [to_float_array(ug1_tau_matrix(*np.eye(4)[k], FLOAT)) for k in range(4)]
        elem = lambda t: expm(sum(tk * Dk for tk, Dk in zip(t, gens)))
        cosets = [np.eye(7)]
        rng = np.random.default_rng(seed)
        candidates = [(None, rng.uniform(-2, 2, 4)) for _ in range(starts)]
        candidates.insert(0, (None, np.zeros(4)))
    else:
        elem = _u0_float
        gm = to_float_array(G_MATRIX)
        cosets = [np.eye(7), gm]
        grid = np.linspace(-np.pi, np.pi, 24, endpoint=False)
        candidates = []
        for k, coset in enumerate(cosets):
            scored = sorted(
                (float(np.linalg.norm(_act_constants(_u0_float((a, b)) @ coset, c) - target)), (a, b))
                for a in grid for b in grid
            )
            candidates += [(k, np.array(t)) for _, t in scored[:3]]
    best = np.inf
    for k, t0 in candidates:
        coset = cosets[k or 0]
        fun = lambda t: _act_constants(elem(t) @ coset, c) - target
        res = least_squares(fun, t0, xtol=1e-15, ftol=1e-15, gtol=1e-15)
        best = min(best, float(np.linalg.norm(res.fun)))
        if best < 1e-9:
            break
    return best


def _is_unimodular(q: Quadruple, tol: float = 1e-6) -> bool:
    return bool(np.all(np.abs(to_float_array(q.A1)) < tol))


def deduplicate(hits: list, tol: float = 1e-4, orbit_check: bool = True) -> tuple[list, int]:
    """Group hits into symmetry classes.

    Away from the unimodular case the spectral invariants must agree (loosely,
    since eigenvalues of defective matrices are only sqrt(eps) accurate) before the
    orbit distance is tried.  When A1 = 0 the larger symmetry group moves the
    spectrum of A, so only the orbit distance is used.
    """
    classes: list[SearchHit] = []
    dups = 0
    for h in hits:
        uni = _is_unimodular(h.quadruple)
        for rep in classes:
            if uni != _is_unimodular(rep.quadruple):
                continue
            if not uni and not np.allclose(h.invariants, rep.invariants, atol=tol):
                continue
            if not orbit_check or orbit_distance(h.quadruple, rep.quadruple, uni) < 1e-5:
                rep.duplicates += 1
                dups += 1
                break
        else:
            classes.append(h)
    return classes, dups


# -- driver ----------------------------------------------------------------------------------


def _run_restart(seed: int, index: int, max_iters: int, fixed: dict, x0, noise: float) -> tuple[SearchHit | None, str]:
    rng = np.random.default_rng([seed, index])
    if x0 is None:
        start = random_start(rng)
    else:
        start = np.asarray(x0, dtype=float) + noise * rng.uniform(-1, 1, N_CHART)
    trace = levenberg_marquardt(start, max_iters=max_iters, fixed=fixed)
    return _assess(trace, index)


def find_erp(seed: int = 0, restarts: int = 10, max_iters: int = 500, constraint: str = "none",
             x0=None, noise: float = 1e-3, workers: int = 4, dedup: bool = True,
             orbit_check: bool = True) -> SearchResult:
    """Run independent LM restarts and return deduplicated, filtered ERP hits.

    Each restart draws from a generator seeded by (seed, restart index), so the
    results do not depend on scheduling.
    """
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    if constraint not in CONSTRAINTS:
        raise ValueError(f"unknown constraint {constraint!r}; choose from {sorted(CONSTRAINTS)}")
    fixed = CONSTRAINTS[constraint]
    args = [(seed, i, max_iters, fixed, x0, noise) for i in range(restarts)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(lambda a: _run_restart(*a), args))
    else:
        outcomes = [_run_restart(*a) for a in args]
    hits = [h for h, _ in outcomes if h is not None]
    diagnostics = [msg for _, msg in outcomes]
    for msg in diagnostics:
        log.debug(msg)
    converged = sum(1 for msg in diagnostics if "converged" in msg or "rejected" in msg)
    rejected = sum(1 for msg in diagnostics if "rejected" in msg)
    dups = 0
    if dedup:
        hits, dups = deduplicate(hits, orbit_check=orbit_check)
    return SearchResult(hits, restarts, converged, rejected, dups, diagnostics)


__all__ = [
    "CONSTRAINTS",
    "LMTrace",
    "SearchHit",
    "SearchResult",
    "deduplicate",
    "find_erp",
    "invariants",
    "jacobian",
    "levenberg_marquardt",
    "orbit_distance",
    "project_sp",
    "random_start",
    "residual",
    "unpack",
]
