"""Rank, null spaces and subspaces over either backend.

Exact matrices are reduced by Gaussian elimination over ExactScalar; float
matrices go through the SVD with the profile's ``rank_tol``.
"""

from __future__ import annotations

import numpy as np

from .scalars import EXACT, ONE, ZERO, Backend, ExactScalar, backend_of, check_finite


class InconsistentSystem(ValueError):
    pass


class SingularMatrix(ValueError):
    pass


def _nz(v) -> bool:
    return not v.is_zero() if isinstance(v, ExactScalar) else v != 0


def _pivot_cost(v) -> int:
    if isinstance(v, ExactScalar):
        return sum(1 for c in v.coords if c)
    return 1


def rref_exact(m: np.ndarray) -> tuple[list[list], list[int]]:
    """Reduced row echelon form of an exact matrix; returns (rows, pivot columns)."""
    rows = [list(r) for r in m]
    n_rows = len(rows)
    n_cols = m.shape[1] if m.ndim == 2 else 0
    pivots: list[int] = []
    r = 0
    for c in range(n_cols):
        if r >= n_rows:
            break
        best, best_cost = None, None
        for i in range(r, n_rows):
            v = rows[i][c]
            if _nz(v):
                cost = _pivot_cost(v)
                if best is None or cost < best_cost:
                    best, best_cost = i, cost
                    if cost == 1:
                        break
        if best is None:
            continue
        rows[r], rows[best] = rows[best], rows[r]
        inv = ONE / rows[r][c]
        rows[r] = [v * inv if _nz(v) else ZERO for v in rows[r]]
        prow = rows[r]
        nz_cols = [j for j in range(c, n_cols) if _nz(prow[j])]
        for i in range(n_rows):
            if i == r:
                continue
            f = rows[i][c]
            if not _nz(f):
                continue
            row = rows[i]
            for j in nz_cols:
                row[j] = row[j] - f * prow[j]
        pivots.append(c)
        r += 1
    return rows[:r], pivots


def _svd_tol(s: np.ndarray, backend: Backend) -> float:
    scale = max(1.0, float(s[0])) if s.size else 1.0
    return backend.profile.rank_tol * scale


def rank(m: np.ndarray, backend: Backend | None = None) -> int:
    backend = backend or backend_of(m)
    if m.size == 0:
        return 0
    if backend.exact:
        return len(rref_exact(m)[1])
    m = np.asarray(m, dtype=float)
    check_finite(m)
    s = np.linalg.svd(m, compute_uv=False)
    return int(np.sum(s > _svd_tol(s, backend)))


def nullspace(m: np.ndarray, backend: Backend | None = None) -> np.ndarray:
    """Basis of {x : m x = 0} as the rows of the returned array."""
    backend = backend or backend_of(m)
    n = m.shape[1]
    if backend.exact:
        rows, pivots = rref_exact(m) if m.shape[0] else ([], [])
        free = [j for j in range(n) if j not in pivots]
        basis = backend.zeros((len(free), n))
        for k, f in enumerate(free):
            basis[k, f] = ONE
            for row, p in zip(rows, pivots):
                basis[k, p] = -row[f]
        return basis
    m = np.asarray(m, dtype=float)
    check_finite(m)
    if m.shape[0] == 0:
        return np.eye(n)
    u, s, vt = np.linalg.svd(m)
    r = int(np.sum(s > _svd_tol(s, backend))) if s.size else 0
    return vt[r:].copy()


def solve(m: np.ndarray, b: np.ndarray, backend: Backend | None = None) -> np.ndarray:
    """One solution of m x = b; raises InconsistentSystem if there is none."""
    backend = backend or backend_of(m)
    if backend.exact:
        aug = np.concatenate([m, b.reshape(-1, 1)], axis=1)
        rows, pivots = rref_exact(aug)
        n = m.shape[1]
        if pivots and pivots[-1] == n:
            raise InconsistentSystem("linear system has no solution")
        x = backend.zeros(n)
        for row, p in zip(rows, pivots):
            x[p] = row[n]
        return x
    m = np.asarray(m, dtype=float)
    b = np.asarray(b, dtype=float)
    x, *_ = np.linalg.lstsq(m, b, rcond=None)
    if np.max(np.abs(m @ x - b), initial=0.0) > backend.profile.eq_tol * max(1.0, np.max(np.abs(b), initial=0.0)):
        raise InconsistentSystem("linear system has no solution")
    return x


def inverse(m: np.ndarray, backend: Backend | None = None) -> np.ndarray:
    backend = backend or backend_of(m)
    n = m.shape[0]
    if backend.exact:
        aug = np.concatenate([m, backend.eye(n)], axis=1)
        rows, pivots = rref_exact(aug)
        if pivots[:n] != list(range(n)):
            raise SingularMatrix("matrix is singular")
        out = backend.zeros((n, n))
        for i in range(n):
            out[i] = rows[i][n:]
        return out
    m = np.asarray(m, dtype=float)
    if rank(m, backend) < n:
        raise SingularMatrix("matrix is singular")
    return np.linalg.inv(m)


def det(m: np.ndarray, backend: Backend | None = None):
    backend = backend or backend_of(m)
    if not backend.exact:
        return float(np.linalg.det(np.asarray(m, dtype=float)))
    rows = [list(r) for r in m]
    n = len(rows)
    result = ONE
    for c in range(n):
        p = next((i for i in range(c, n) if _nz(rows[i][c])), None)
        if p is None:
            return ZERO
        if p != c:
            rows[c], rows[p] = rows[p], rows[c]
            result = -result
        piv = rows[c][c]
        result = result * piv
        inv = ONE / piv
        for i in range(c + 1, n):
            f = rows[i][c]
            if _nz(f):
                f = f * inv
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[c])]
    return result


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product that skips exact zeros (object arrays are slow otherwise)."""
    if a.dtype != object and b.dtype != object:
        return a @ b
    backend = EXACT
    if b.ndim == 1:
        out = backend.zeros(a.shape[0])
        nzb = [(k, b[k]) for k in range(b.shape[0]) if _nz(b[k])]
        for i in range(a.shape[0]):
            acc = ZERO
            for k, bv in nzb:
                av = a[i, k]
                if _nz(av):
                    acc = acc + av * bv
            out[i] = acc
        return out
    out = backend.zeros((a.shape[0], b.shape[1]))
    b_rows = [[(j, b[k, j]) for j in range(b.shape[1]) if _nz(b[k, j])] for k in range(b.shape[0])]
    for i in range(a.shape[0]):
        row = [ZERO] * b.shape[1]
        for k in range(a.shape[1]):
            av = a[i, k]
            if not _nz(av):
                continue
            for j, bv in b_rows[k]:
                row[j] = row[j] + av * bv
        out[i] = row
    return out


class Subspace:
    """Span of row vectors in a coordinate space, with exact or tolerance rank."""

    def __init__(self, vectors, ambient: int, backend: Backend = EXACT):
        self.ambient = ambient
        self.backend = backend
        vecs = np.asarray(vectors, dtype=object if backend.exact else float)
        if vecs.size == 0:
            vecs = backend.zeros((0, ambient))
        vecs = vecs.reshape(-1, ambient)
        self.spanning = vecs
        if backend.exact:
            rows, _ = rref_exact(vecs) if vecs.shape[0] else ([], [])
            basis = backend.zeros((len(rows), ambient))
            for i, row in enumerate(rows):
                basis[i] = row
            self.basis = basis
        else:
            if vecs.shape[0] == 0:
                self.basis = np.zeros((0, ambient))
            else:
                u, s, vt = np.linalg.svd(vecs, full_matrices=False)
                r = int(np.sum(s > _svd_tol(s, backend)))
                self.basis = vt[:r].copy()

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def __len__(self) -> int:
        return self.dim

    def contains(self, v) -> bool:
        v = np.asarray(v, dtype=object if self.backend.exact else float).reshape(1, -1)
        stacked = np.concatenate([self.basis, v], axis=0)
        return rank(stacked, self.backend) == self.dim

    __contains__ = contains

    def issubset(self, other: Subspace) -> bool:
        return all(other.contains(v) for v in self.basis)

    def __le__(self, other: Subspace) -> bool:
        return self.issubset(other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.dim == other.dim and self.issubset(other)

    def __add__(self, other: Subspace) -> Subspace:
        return Subspace(np.concatenate([self.basis, other.basis], axis=0), self.ambient, self.backend)

    def complement_basis(self) -> list[int]:
        """Standard basis indices completing this subspace to the whole space."""
        chosen: list[int] = []
        current = self.basis
        for i in range(self.ambient):
            e = self.backend.zeros((1, self.ambient))
            e[0, i] = ONE if self.backend.exact else 1.0
            trial = np.concatenate([current, e], axis=0)
            if rank(trial, self.backend) > current.shape[0]:
                current = trial
                chosen.append(i)
        return chosen

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, ambient={self.ambient}, backend={self.backend.name})"


def null_subspace(m: np.ndarray, backend: Backend | None = None) -> Subspace:
    backend = backend or backend_of(m)
    return Subspace(nullspace(m, backend), m.shape[1], backend)


__all__ = [
    "InconsistentSystem",
    "SingularMatrix",
    "Subspace",
    "det",
    "inverse",
    "matmul",
    "null_subspace",
    "nullspace",
    "rank",
    "rref_exact",
    "solve",
]
