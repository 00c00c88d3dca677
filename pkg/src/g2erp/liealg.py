"""Lie brackets on R^7 as structure constants.

``c[i, j, k] = <mu(e_i, e_j), e_k>`` (0-based).  Matrices follow the column
convention ``(ad e_i)[k, j] = c[i, j, k]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

import numpy as np

from .exterior import (
    COMBOS,
    G1,
    H,
    H1,
    INDEX,
    N,
    OMEGA,
    RHO_PLUS,
    KForm,
    sort_sign,
    theta,
)
from .linalg import Subspace, _nz, inverse, matmul, nullspace, rank
from .scalars import EXACT, FLOAT, ONE, ZERO, Backend, backend_of, to_float_array


class NotJacobi(ValueError):
    pass


class NotSolvable(ValueError):
    pass


def _half(backend: Backend):
    return EXACT.scalar(Fraction(1, 2)) if backend.exact else 0.5


@lru_cache(maxsize=None)
def _d_pattern(k: int) -> tuple[np.ndarray, ...]:
    """Index pattern of d on k-forms: entry (row, col) receives -sign * c[i, j, m].

    Uses de^m = -sum_{i<j} c[i, j, m] e^{ij} substituted into slot s of each monomial.
    """
    out = []
    for col, I in enumerate(COMBOS[k]):
        for s, m in enumerate(I):
            for i, j in combinations(range(N), 2):
                sign, K = sort_sign(I[:s] + (i, j) + I[s + 1:])
                if sign:
                    out.append((INDEX[k + 1][K], col, i, j, m, -sign if s % 2 else sign))
    return tuple(np.array(v, dtype=int) for v in zip(*out))


class Bracket:
    """Antisymmetric bilinear map on R^7 given by structure constants."""

    def __init__(self, c: np.ndarray, name: str = ""):
        if c.shape != (N, N, N):
            raise ValueError("structure constants must have shape (7, 7, 7)")
        backend = backend_of(c)
        for i in range(N):
            if not backend.is_zero(c[i, i]):
                raise ValueError("bracket is not antisymmetric")
            for j in range(i + 1, N):
                if not backend.is_zero(c[i, j] + c[j, i]):
                    raise ValueError("bracket is not antisymmetric")
        self.c = c
        self.name = name
        self._d: dict[int, np.ndarray] = {}
        self._jacobi = None

    @classmethod
    def from_constants(cls, constants: dict, backend: Backend = EXACT, name: str = "") -> Bracket:
        """{(i, j, k): value} with 1-based i < j meaning <mu(e_i, e_j), e_k> = value."""
        c = backend.zeros((N, N, N))
        for (i, j, k), value in constants.items():
            if not (1 <= i <= N and 1 <= j <= N and 1 <= k <= N):
                raise ValueError(f"index out of range in {(i, j, k)}")
            if i == j:
                raise ValueError(f"diagonal structure constant {(i, j, k)}")
            v = backend.scalar(value)
            c[i - 1, j - 1, k - 1] = c[i - 1, j - 1, k - 1] + v
            c[j - 1, i - 1, k - 1] = c[j - 1, i - 1, k - 1] - v
        return cls(c, name)

    @classmethod
    def abelian(cls, backend: Backend = EXACT) -> Bracket:
        return cls(backend.zeros((N, N, N)), "abelian")

    @classmethod
    def from_split(cls, lam: Bracket | None, A: np.ndarray, name: str = "") -> Bracket:
        """mu = lambda + mu_A with lambda on e1..e6 and mu_A(e7, v) = A v."""
        backend = backend_of(A)
        c = lam.c.copy() if lam is not None else backend.zeros((N, N, N))
        for i in H:
            for k in H:
                v = A[k, i]
                c[6, i, k] = c[6, i, k] + v
                c[i, 6, k] = c[i, 6, k] - v
        return cls(c, name)

    @property
    def backend(self) -> Backend:
        return backend_of(self.c)

    def astype(self, backend: Backend) -> Bracket:
        return Bracket(backend.convert(self.c), self.name)

    def to_float(self) -> Bracket:
        return Bracket(to_float_array(self.c), self.name)

    def constants(self) -> dict[tuple[int, int, int], object]:
        out = {}
        for i in range(N):
            for j in range(i + 1, N):
                for k in range(N):
                    if _nz(self.c[i, j, k]):
                        out[(i + 1, j + 1, k + 1)] = self.c[i, j, k]
        return out

    def ad(self, i: int) -> np.ndarray:
        return self.c[i].T.copy()

    def ad_vec(self, x) -> np.ndarray:
        backend = self.backend
        out = backend.zeros((N, N))
        for i in range(N):
            if _nz(x[i]):
                out = out + self.ad(i) * x[i]
        return out

    def __call__(self, x, y) -> np.ndarray:
        backend = self.backend
        out = backend.zeros(N)
        for a in range(N):
            if not _nz(x[a]):
                continue
            for b in range(N):
                if a == b or not _nz(y[b]):
                    continue
                f = x[a] * y[b]
                for k in range(N):
                    v = self.c[a, b, k]
                    if _nz(v):
                        out[k] = out[k] + f * v
        return out

    def is_zero(self) -> bool:
        return self.backend.is_zero(self.c)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Bracket):
            return NotImplemented
        return self.backend.is_zero(self.c - other.c)

    __hash__ = None

    # -- Chevalley-Eilenberg differential ----------------------------------
    def d_matrix(self, k: int) -> np.ndarray:
        """Matrix of d: Lambda^k -> Lambda^{k+1} in the monomial bases."""
        if k in self._d:
            return self._d[k]
        backend = self.backend
        rows, cols = len(COMBOS.get(k + 1, [])), len(COMBOS[k])
        M = backend.zeros((rows, cols))
        if k + 1 <= N:
            r, col, i, j, m, sign = _d_pattern(k)
            vals = self.c[i, j, m]
            if backend.exact:
                for n in range(len(r)):
                    v = vals[n]
                    if _nz(v):
                        M[r[n], col[n]] = M[r[n], col[n]] - v if sign[n] > 0 else M[r[n], col[n]] + v
            else:
                np.add.at(M, (r, col), -sign * vals)
        self._d[k] = M
        return M

    def d(self, a: KForm) -> KForm:
        if a.degree == N:
            return KForm.zero(N, self.backend)
        coeffs = a.coeffs
        M = self.d_matrix(a.degree)
        if (coeffs.dtype == object) != (M.dtype == object):
            coeffs, M = to_float_array(coeffs), to_float_array(M)
        return KForm(a.degree + 1, matmul(M, coeffs))

    # -- actions ------------------------------------------------------------
    def act(self, D: np.ndarray) -> Bracket:
        """Infinitesimal action D.mu = D mu(.,.) - mu(D.,.) - mu(.,D.)."""
        c = self.c
        if (D.dtype == object) != (c.dtype == object):
            D, c = to_float_array(D), to_float_array(c)
        if c.dtype != object:
            out = (np.einsum("kl,ijl->ijk", D, c)
                   - np.einsum("li,ljk->ijk", D, c)
                   - np.einsum("lj,ilk->ijk", D, c))
            return Bracket(out)
        backend = EXACT
        out = backend.zeros((N, N, N))
        Dnz = [(a, b, D[a, b]) for a in range(N) for b in range(N) if _nz(D[a, b])]
        for i in range(N):
            for j in range(N):
                if i == j:
                    continue
                acc = [ZERO] * N
                for k, l, v in Dnz:
                    w = c[i, j, l]
                    if _nz(w):
                        acc[k] = acc[k] + v * w
                    if l == i:
                        for kk in range(N):
                            w2 = c[k, j, kk]
                            if _nz(w2):
                                acc[kk] = acc[kk] - v * w2
                    if l == j:
                        for kk in range(N):
                            w3 = c[i, k, kk]
                            if _nz(w3):
                                acc[kk] = acc[kk] - v * w3
                out[i, j] = acc
        return Bracket(out)

    def transform(self, h: np.ndarray) -> Bracket:
        """Group action h.mu = h mu(h^-1 ., h^-1 .)."""
        hinv = inverse(h)
        c = self.c
        if c.dtype != object or h.dtype != object:
            hf, hinvf, cf = to_float_array(h), to_float_array(hinv), to_float_array(c)
            out = np.einsum("kl,abl,ai,bj->ijk", hf, cf, hinvf, hinvf)
            return Bracket((out - out.transpose(1, 0, 2)) / 2, self.name)
        out = EXACT.zeros((N, N, N))
        for i in range(N):
            for j in range(i + 1, N):
                v = self(hinv[:, i], hinv[:, j])
                w = matmul(h, v)
                out[i, j] = w
                out[j, i] = -w
        return Bracket(out, self.name)

    # -- structure of h = span(e1..e6) ---------------------------------------
    def is_split(self) -> bool:
        """True when span(e1..e6) is an ideal, so mu = lambda + mu_A."""
        backend = self.backend
        for i in H:
            for j in range(N):
                if not backend.is_zero(self.c[i, j, 6]):
                    return False
        return True

    def split(self) -> tuple[Bracket, np.ndarray]:
        if not self.is_split():
            raise ValueError("span(e1..e6) is not an ideal of this bracket")
        lam_c = self.c.copy()
        backend = self.backend
        for i in range(N):
            for k in range(N):
                lam_c[6, i, k] = ZERO if backend.exact else 0.0
                lam_c[i, 6, k] = ZERO if backend.exact else 0.0
        A = self.ad(6)[:6, :6].copy()
        return Bracket(lam_c, self.name + ":lambda"), A


# -- Jacobi -------------------------------------------------------------------


@dataclass
class JacobiResult:
    ok: bool
    triple: tuple[int, int, int] | None = None
    value: np.ndarray | None = None

    def __bool__(self) -> bool:
        return self.ok


def jacobiator(mu: Bracket, i: int, j: int, k: int) -> np.ndarray:
    backend = mu.backend
    e = backend.eye(N)
    x, y, z = e[i], e[j], e[k]
    return mu(x, mu(y, z)) + mu(y, mu(z, x)) + mu(z, mu(x, y))


def check_jacobi(mu: Bracket) -> JacobiResult:
    """Jacobi identity on basis triples; reports the first failing 1-based triple."""
    if mu._jacobi is not None:
        return mu._jacobi
    backend = mu.backend
    result = JacobiResult(True)
    if not backend.exact:
        # T[i, j, k] = mu(e_i, mu(e_j, e_k)); the Jacobiator is its cyclic sum
        T = np.einsum("jkl,ilm->ijkm", mu.c, mu.c)
        full = T + T.transpose(2, 0, 1, 3) + T.transpose(1, 2, 0, 3)
    for i, j, k in combinations(range(N), 3):
        v = jacobiator(mu, i, j, k) if backend.exact else full[i, j, k]
        if not backend.is_zero(v):
            result = JacobiResult(False, (i + 1, j + 1, k + 1), v)
            break
    mu._jacobi = result
    return result


def d_squared_zero(mu: Bracket) -> bool:
    """d o d = 0 on every basis 1-form."""
    D1, D2 = mu.d_matrix(1), mu.d_matrix(2)
    return mu.backend.is_zero(matmul(D2, D1))


def _require_jacobi(mu: Bracket) -> None:
    res = check_jacobi(mu)
    if not res:
        raise NotJacobi(f"Jacobi identity fails at {res.triple}")


# -- structure queries --------------------------------------------------------


def unimodular(mu: Bracket) -> bool:
    _require_jacobi(mu)
    backend = mu.backend
    return all(backend.is_zero(np.trace(mu.ad(i))) for i in range(N))


def bracket_of_spaces(mu: Bracket, a: np.ndarray, b: np.ndarray) -> Subspace:
    vecs = [mu(x, y) for x in a for y in b]
    return Subspace(np.array(vecs, dtype=mu.c.dtype).reshape(-1, N), N, mu.backend)


def full_space(backend: Backend) -> Subspace:
    return Subspace(backend.eye(N), N, backend)


def derived_algebra(mu: Bracket) -> Subspace:
    _require_jacobi(mu)
    e = mu.backend.eye(N)
    return bracket_of_spaces(mu, e, e)


def derived_series(mu: Bracket) -> list[Subspace]:
    series = [full_space(mu.backend)]
    while series[-1].dim:
        nxt = bracket_of_spaces(mu, series[-1].basis, series[-1].basis)
        if nxt.dim == series[-1].dim:
            break
        series.append(nxt)
    return series


def is_solvable(mu: Bracket) -> bool:
    return derived_series(mu)[-1].dim == 0


def span(vectors, backend: Backend = EXACT) -> Subspace:
    return Subspace(backend.array(vectors) if not isinstance(vectors, np.ndarray) else vectors, N, backend)


def coordinate_span(indices, backend: Backend = EXACT) -> Subspace:
    """Span of the 0-based basis vectors e_i, i in ``indices``."""
    e = backend.eye(N)
    return Subspace(e[list(indices)], N, backend)


def is_ideal(mu: Bracket, s: Subspace) -> bool:
    e = mu.backend.eye(N)
    return bracket_of_spaces(mu, e, s.basis).issubset(s)


def lower_central_series(mu: Bracket, s: Subspace) -> list[Subspace]:
    series = [s]
    while series[-1].dim:
        nxt = bracket_of_spaces(mu, s.basis, series[-1].basis)
        if nxt.dim == series[-1].dim:
            break
        series.append(nxt)
    return series


def is_nilpotent_ideal(mu: Bracket, s: Subspace) -> bool:
    _require_jacobi(mu)
    if not is_ideal(mu, s):
        return False
    return lower_central_series(mu, s)[-1].dim == 0


def is_nilpotent_matrix(M: np.ndarray, backend: Backend) -> bool:
    P = M
    for _ in range(M.shape[0] - 1):
        P = matmul(P, M)
    return backend.is_zero(P)


@dataclass
class NilradicalVerdict:
    status: str  # PASS, FAIL or INCONCLUSIVE
    dim: int
    reasons: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status == "PASS"


def _grid_points(backend: Backend):
    vals = [(1, -2), (1, Fraction(-1, 2)), (1, 3), (2, -1), (2, 1), (2, 5), (3, -1), (3, 2), (3, Fraction(1, 3))]
    if backend.exact:
        return [(EXACT.scalar(s), EXACT.scalar(t)) for s, t in vals]
    return [(float(s), float(t)) for s, t in vals]


def verify_nilradical(mu: Bracket, candidate: Subspace) -> NilradicalVerdict:
    """Check that ``candidate`` is the nilradical of a solvable bracket.

    Maximality is tested on sampled complement directions: for solvable
    algebras the nilradical is the set of ad-nilpotent elements.
    """
    _require_jacobi(mu)
    if not is_solvable(mu):
        raise NotSolvable("bracket is not solvable")
    backend = mu.backend
    reasons = []
    if not is_ideal(mu, candidate):
        reasons.append("candidate is not an ideal")
    elif lower_central_series(mu, candidate)[-1].dim:
        reasons.append("candidate is not nilpotent")
    if not derived_algebra(mu).issubset(candidate):
        reasons.append("candidate does not contain [g,g]")
    if reasons:
        return NilradicalVerdict("FAIL", candidate.dim, reasons)

    comp = candidate.complement_basis()
    e = backend.eye(N)
    w = [e[i] for i in comp]
    samples = []
    for i in range(len(w)):
        samples += [w[i], -w[i]]
        for j in range(i + 1, len(w)):
            samples += [w[i] + w[j], w[i] - w[j]]
            samples += [w[i] * s + w[j] * t for s, t in _grid_points(backend)]
    for x in samples:
        if is_nilpotent_matrix(mu.ad_vec(x), backend):
            bigger = Subspace(np.concatenate([candidate.basis, x.reshape(1, -1)]), N, backend)
            if is_nilpotent_ideal(mu, bigger):
                return NilradicalVerdict("FAIL", candidate.dim,
                                         [f"ad-nilpotent complement direction {list(x)} enlarges the ideal"])
            return NilradicalVerdict("INCONCLUSIVE", candidate.dim,
                                     ["sampled complement direction is ad-nilpotent"])
    return NilradicalVerdict("PASS", candidate.dim)


# -- derivations --------------------------------------------------------------


def _unit(a: int, b: int, backend: Backend) -> np.ndarray:
    E = backend.zeros((N, N))
    E[a, b] = ONE if backend.exact else 1.0
    return E


def derivation_equations(mu: Bracket) -> np.ndarray:
    """Matrix of D -> D.mu on gl7 (unknowns D[a, b] at position 7a + b)."""
    backend = mu.backend
    cols = []
    for a in range(N):
        for b in range(N):
            act = mu.act(_unit(a, b, backend)).c
            cols.append([act[i, j, k] for i in range(N) for j in range(i + 1, N) for k in range(N)])
    return np.array(cols, dtype=mu.c.dtype).T


def form_equations(forms: list[KForm], backend: Backend) -> np.ndarray:
    """Matrix of D -> (theta(D) f for f in forms) on gl7."""
    cols = []
    for a in range(N):
        for b in range(N):
            E = _unit(a, b, backend)
            col = []
            for f in forms:
                col.extend(theta(E, f.astype(backend) if not backend.exact else f).coeffs)
            cols.append(col)
    return np.array(cols, dtype=object if backend.exact else float).T


def _selector(positions: list[tuple[int, int]], backend: Backend) -> np.ndarray:
    M = backend.zeros((len(positions), N * N))
    for r, (a, b) in enumerate(positions):
        M[r, N * a + b] = ONE if backend.exact else 1.0
    return M


def skew_equations(backend: Backend) -> np.ndarray:
    rows = []
    for a in range(N):
        for b in range(a, N):
            row = backend.zeros(N * N)
            one = ONE if backend.exact else 1.0
            row[N * a + b] = row[N * a + b] + one
            row[N * b + a] = row[N * b + a] + one
            rows.append(row)
    return np.array(rows, dtype=object if backend.exact else float)


BLOCKS = ((6,), H1, G1)


def block_diag_positions() -> list[tuple[int, int]]:
    where = {}
    for n, blk in enumerate(BLOCKS):
        for i in blk:
            where[i] = n
    return [(a, b) for a in range(N) for b in range(N) if where[a] != where[b]]


def derivations(mu: Bracket, block_diag: bool = False, fix_e7: bool = False, su3: bool = False) -> Subspace:
    """Derivations of mu, optionally intersected with linear constraints.

    ``block_diag`` keeps e7, span(e3, e4) and span(e1, e2, e5, e6) invariant;
    ``fix_e7`` imposes D e7 = 0; ``su3`` imposes D skew with
    theta(D) omega = theta(D) rho+ = 0.
    """
    _require_jacobi(mu)
    backend = mu.backend
    blocks = [derivation_equations(mu)]
    if block_diag:
        blocks.append(_selector(block_diag_positions(), backend))
    if fix_e7:
        blocks.append(_selector([(a, 6) for a in range(N)], backend))
    if su3:
        blocks.append(skew_equations(backend))
        blocks.append(form_equations([OMEGA, RHO_PLUS], backend))
    M = np.concatenate(blocks, axis=0)
    return Subspace(nullspace(M, backend), N * N, backend)


def is_derivation(mu: Bracket, D: np.ndarray) -> bool:
    return mu.act(D).is_zero()


# -- Ricci curvature ----------------------------------------------------------


def levi_civita(mu: Bracket) -> np.ndarray:
    """Gamma[i, j, k] = <nabla_{e_i} e_j, e_k> for the metric making e_i orthonormal."""
    c = mu.c
    half = _half(mu.backend)
    G = mu.backend.zeros((N, N, N))
    for i in range(N):
        for j in range(N):
            for k in range(N):
                v = c[i, j, k] - c[j, k, i] + c[k, i, j]
                if _nz(v):
                    G[i, j, k] = v * half
    return G


def ricci(mu: Bracket) -> np.ndarray:
    """Ricci operator of the left-invariant metric with e1..e7 orthonormal."""
    _require_jacobi(mu)
    backend = mu.backend
    G = levi_civita(mu)
    nab = [G[i].T.copy() for i in range(N)]  # nab[i][k, j] = Gamma[i, j, k]
    prod = [[matmul(nab[i], nab[x]) for x in range(N)] for i in range(N)]
    ric = backend.zeros((N, N))
    for x in range(N):
        for i in range(N):
            R = prod[i][x] - prod[x][i]
            for l in range(N):
                v = mu.c[i, x, l]
                if _nz(v):
                    R = R - nab[l] * v
            for y in range(N):
                ric[x, y] = ric[x, y] + R[i, y]
    return ric


def scalar_curvature(mu: Bracket):
    return np.trace(ricci(mu))


__all__ = [
    "Bracket",
    "JacobiResult",
    "NilradicalVerdict",
    "NotJacobi",
    "NotSolvable",
    "check_jacobi",
    "coordinate_span",
    "d_squared_zero",
    "derivations",
    "derived_algebra",
    "derived_series",
    "is_ideal",
    "is_nilpotent_ideal",
    "is_solvable",
    "levi_civita",
    "ricci",
    "scalar_curvature",
    "unimodular",
    "verify_nilradical",
]

_ = (FLOAT, rank)
