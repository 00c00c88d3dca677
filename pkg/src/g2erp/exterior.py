"""Alternating forms on R^7 with the oriented orthonormal basis e1..e7.

Indices are 0-based internally; every string interface (``form("e12-e56")``,
``KForm.terms()``) uses the 1-based labels e1..e7.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

from .linalg import _nz, inverse
from .scalars import EXACT, FLOAT, ONE, ZERO, Backend, backend_of, parse_surd, to_float_array

N = 7
COMBOS = {k: list(combinations(range(N), k)) for k in range(N + 1)}
INDEX = {k: {I: n for n, I in enumerate(COMBOS[k])} for k in range(N + 1)}

# Named index subsets (0-based).
H = (0, 1, 2, 3, 4, 5)
H1 = (2, 3)
G1 = (0, 1, 4, 5)
G0 = (6, 2, 3)
ORDER_G0G1 = G0 + G1  # e7, e3, e4, e1, e2, e5, e6


class DegreeError(ValueError):
    pass


def sort_sign(seq) -> tuple[int, tuple[int, ...]]:
    """Sign of the permutation sorting ``seq``, or (0, ()) if it repeats an index."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return 0, ()
    sign = 1
    arr = seq[:]
    for i in range(len(arr)):
        for j in range(len(arr) - 1 - i):
            if arr[j] > arr[j + 1]:
                arr[j], arr[j + 1] = arr[j + 1], arr[j]
                sign = -sign
    return sign, tuple(arr)


@lru_cache(maxsize=None)
def _merge(I: tuple[int, ...], J: tuple[int, ...]) -> tuple[int, int]:
    sign, K = sort_sign(I + J)
    if not sign:
        return 0, -1
    return sign, INDEX[len(K)][K]


class KForm:
    """A k-form with dense coefficients on increasing multi-indices."""

    __slots__ = ("degree", "coeffs")

    def __init__(self, degree: int, coeffs: np.ndarray):
        if not 0 <= degree <= N:
            raise DegreeError(f"degree {degree} outside 0..{N}")
        if coeffs.shape != (comb(N, degree),):
            raise ValueError(f"expected {comb(N, degree)} coefficients for degree {degree}")
        self.degree = degree
        self.coeffs = coeffs

    @classmethod
    def zero(cls, degree: int, backend: Backend = EXACT) -> KForm:
        return cls(degree, backend.zeros(comb(N, degree)))

    @classmethod
    def from_terms(cls, terms: dict, degree: int | None = None, backend: Backend = EXACT) -> KForm:
        """Build from {index: value}; an index is a 1-based tuple or a digit string."""
        items = []
        for key, value in terms.items():
            idx = tuple(int(c) for c in key) if isinstance(key, str) else tuple(key)
            items.append(([i - 1 for i in idx], backend.scalar(value)))
        if degree is None:
            if not items:
                raise ValueError("degree required for an empty form")
            degree = len(items[0][0])
        out = backend.zeros(comb(N, degree))
        for idx, value in items:
            if len(idx) != degree or not all(0 <= i < N for i in idx):
                raise ValueError(f"bad multi-index {idx}")
            sign, K = sort_sign(idx)
            if sign:
                pos = INDEX[degree][K]
                out[pos] = out[pos] + value * sign
        return cls(degree, out)

    @property
    def backend(self) -> Backend:
        return backend_of(self.coeffs)

    def astype(self, backend: Backend) -> KForm:
        return KForm(self.degree, backend.convert(self.coeffs))

    def to_float(self) -> KForm:
        return KForm(self.degree, to_float_array(self.coeffs))

    def terms(self) -> dict[str, object]:
        out = {}
        for I, v in zip(COMBOS[self.degree], self.coeffs):
            if _nz(v):
                out["".join(str(i + 1) for i in I)] = v
        return out

    def indices(self) -> set[int]:
        """0-based indices appearing in a monomial with nonzero coefficient."""
        used: set[int] = set()
        for I, v in zip(COMBOS[self.degree], self.coeffs):
            if _nz(v):
                used.update(I)
        return used

    def _check(self, other: KForm) -> None:
        if other.degree != self.degree:
            raise DegreeError(f"degree mismatch {self.degree} vs {other.degree}")

    def __add__(self, other: KForm) -> KForm:
        self._check(other)
        return KForm(self.degree, _promote_add(self.coeffs, other.coeffs, 1))

    def __sub__(self, other: KForm) -> KForm:
        self._check(other)
        return KForm(self.degree, _promote_add(self.coeffs, other.coeffs, -1))

    def __neg__(self) -> KForm:
        return KForm(self.degree, -self.coeffs)

    def __mul__(self, scalar) -> KForm:
        if isinstance(scalar, KForm):
            return NotImplemented
        return KForm(self.degree, self.coeffs * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> KForm:
        return KForm(self.degree, self.coeffs * (ONE / scalar if self.coeffs.dtype == object else 1.0 / scalar))

    def __xor__(self, other: KForm) -> KForm:
        return wedge(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, KForm):
            return NotImplemented
        if self.degree != other.degree:
            return False
        return EXACT.is_zero((self - other).coeffs) if (self.coeffs.dtype == object and other.coeffs.dtype == object) \
            else bool(np.all(to_float_array(self.coeffs) == to_float_array(other.coeffs)))

    __hash__ = None

    def is_zero(self, backend: Backend | None = None) -> bool:
        return (backend or self.backend).is_zero(self.coeffs)

    def close_to(self, other: KForm, tol: float = 1e-9) -> bool:
        self._check(other)
        diff = to_float_array(self.coeffs) - to_float_array(other.coeffs)
        return float(np.max(np.abs(diff), initial=0.0)) <= tol

    def norm_sq(self):
        """Squared norm for the standard metric (sum of squared coefficients)."""
        total = ZERO if self.coeffs.dtype == object else 0.0
        for v in self.coeffs:
            if _nz(v):
                total = total + v * v
        return total

    def __repr__(self) -> str:
        t = self.terms()
        if not t:
            return f"KForm({self.degree}, 0)"
        return "KForm(" + " + ".join(f"({v})e{k}" for k, v in t.items()) + ")"


def _promote_add(a: np.ndarray, b: np.ndarray, sign: int) -> np.ndarray:
    if (a.dtype == object) != (b.dtype == object):
        a, b = to_float_array(a), to_float_array(b)
    return a + b if sign > 0 else a - b


_TERM = re.compile(r"^(?P<coef>.*?)\*?e(?P<idx>[1-7]+)$")


def form(text: str, backend: Backend = EXACT) -> KForm:
    """Parse ``"e127 + e347 - 1/3*e146"``-style text into a form."""
    s = text.replace(" ", "")
    chunks, depth, start = [], 0, 0
    for i, ch in enumerate(s):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch in "+-" and depth == 0 and i > start and s[i - 1] not in "*/(":
            chunks.append(s[start:i])
            start = i
    chunks.append(s[start:])
    terms: dict[tuple[int, ...], object] = {}
    degree = None
    for chunk in chunks:
        if not chunk:
            continue
        sign = 1
        if chunk[0] in "+-":
            sign = -1 if chunk[0] == "-" else 1
            chunk = chunk[1:]
        m = _TERM.match(chunk)
        if not m:
            raise ValueError(f"cannot parse form term {chunk!r}")
        coef = m.group("coef")
        value = parse_surd(coef) if coef else ONE
        idx = tuple(int(c) for c in m.group("idx"))
        degree = len(idx) if degree is None else degree
        if len(idx) != degree:
            raise DegreeError(f"mixed degrees in {text!r}")
        prev = terms.get(idx, ZERO)
        terms[idx] = prev + value * sign
    if degree is None:
        raise ValueError("empty form")
    return KForm.from_terms(terms, degree, backend)


def basis_form(idx: str, backend: Backend = EXACT) -> KForm:
    return KForm.from_terms({idx: 1}, len(idx), backend)


# -- products -----------------------------------------------------------------


def wedge(a: KForm, b: KForm) -> KForm:
    k = a.degree + b.degree
    if k > N:
        raise DegreeError(f"wedge degree {k} exceeds {N}")
    ca, cb = a.coeffs, b.coeffs
    if (ca.dtype == object) != (cb.dtype == object):
        ca, cb = to_float_array(ca), to_float_array(cb)
    backend = backend_of(ca)
    out = backend.zeros(comb(N, k))
    nb = [(J, v) for J, v in zip(COMBOS[b.degree], cb) if _nz(v)]
    for I, u in zip(COMBOS[a.degree], ca):
        if not _nz(u):
            continue
        for J, v in nb:
            sign, pos = _merge(I, J)
            if sign:
                out[pos] = out[pos] + (u * v if sign > 0 else -(u * v))
    return KForm(k, out)


def wedge_all(*forms: KForm) -> KForm:
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    return out


def interior(X, a: KForm) -> KForm:
    """Contraction i_X a in the first slot; ``X`` is a vector or a 0-based index."""
    if a.degree < 1:
        raise DegreeError("interior product of a 0-form")
    backend = a.backend
    if isinstance(X, (int, np.integer)):
        vec = backend.zeros(N)
        vec[X] = ONE if backend.exact else 1.0
        X = vec
    X = np.asarray(X)
    out = backend.zeros(comb(N, a.degree - 1))
    for I, v in zip(COMBOS[a.degree], a.coeffs):
        if not _nz(v):
            continue
        for s, i in enumerate(I):
            x = X[i]
            if not _nz(x):
                continue
            pos = INDEX[a.degree - 1][I[:s] + I[s + 1:]]
            term = v * x
            out[pos] = out[pos] + (term if s % 2 == 0 else -term)
    return KForm(a.degree - 1, out)


# -- Hodge stars --------------------------------------------------------------


@lru_cache(maxsize=None)
def _star_table(n: int, k: int) -> tuple[tuple[int, int, int], ...]:
    """(source position, target position, sign) for the Hodge star on R^n."""
    full = tuple(range(n))
    rows = []
    for I in combinations(full, k):
        J = tuple(i for i in full if i not in I)
        sign, _ = sort_sign(I + J)
        rows.append((INDEX[k][I], INDEX[n - k][J], sign))
    return tuple(rows)


def star7(a: KForm) -> KForm:
    backend = a.backend
    out = backend.zeros(comb(N, N - a.degree))
    for src, dst, sign in _star_table(N, a.degree):
        v = a.coeffs[src]
        if _nz(v):
            out[dst] = v if sign > 0 else -v
    return KForm(N - a.degree, out)


def star6(a: KForm) -> KForm:
    """Hodge star of span{e1..e6}; the input must not involve e7."""
    if 6 in a.indices():
        raise DegreeError("star6 applied to a form containing e7")
    if a.degree > 6:
        raise DegreeError("star6 of a 7-form")
    backend = a.backend
    out = backend.zeros(comb(N, 6 - a.degree))
    for src, dst, sign in _star_table(6, a.degree):
        v = a.coeffs[src]
        if _nz(v):
            out[dst] = v if sign > 0 else -v
    return KForm(6 - a.degree, out)


# -- endomorphisms ------------------------------------------------------------


@dataclass(frozen=True)
class Endo:
    """A square matrix acting on the span of the 0-based ``indices``."""

    matrix: np.ndarray
    indices: tuple[int, ...]

    def __post_init__(self):
        n = len(self.indices)
        if self.matrix.shape != (n, n):
            raise ValueError(f"matrix shape {self.matrix.shape} does not match {n} indices")

    def embed(self) -> np.ndarray:
        backend = backend_of(self.matrix)
        out = backend.zeros((N, N))
        for a, i in enumerate(self.indices):
            for b, j in enumerate(self.indices):
                out[i, j] = self.matrix[a, b]
        return out


def as_full(B) -> np.ndarray:
    """7x7 matrix from an Endo, a 7x7 array or a 6x6 array on e1..e6."""
    if isinstance(B, Endo):
        return B.embed()
    B = np.asarray(B)
    if B.shape == (N, N):
        return B
    if B.shape == (6, 6):
        return Endo(B, H).embed()
    raise ValueError(f"cannot interpret matrix of shape {B.shape} without an index set")


def restrict(M: np.ndarray, indices) -> np.ndarray:
    idx = list(indices)
    return M[np.ix_(idx, idx)]


def from_g0g1_order(M: np.ndarray) -> np.ndarray:
    """Re-express a 7x7 matrix written in the basis (e7, e3, e4, e1, e2, e5, e6)."""
    out = np.empty_like(M)
    for a, i in enumerate(ORDER_G0G1):
        for b, j in enumerate(ORDER_G0G1):
            out[i, j] = M[a, b]
    return out


def to_g0g1_order(M: np.ndarray) -> np.ndarray:
    idx = list(ORDER_G0G1)
    return M[np.ix_(idx, idx)]


def theta(B, a: KForm) -> KForm:
    """Derivative of the GL action: theta(B)a = -(a(B.,...) + ... + a(...,B.))."""
    M = as_full(B)
    cm, ca = M, a.coeffs
    if (cm.dtype == object) != (ca.dtype == object):
        cm, ca = to_float_array(cm), to_float_array(ca)
    backend = backend_of(ca)
    rows = [[(j, cm[i, j]) for j in range(N) if _nz(cm[i, j])] for i in range(N)]
    out = backend.zeros(ca.shape[0])
    k = a.degree
    for I, v in zip(COMBOS[k], ca):
        if not _nz(v):
            continue
        for s, i in enumerate(I):
            for j, bij in rows[i]:
                sign, K = sort_sign(I[:s] + (j,) + I[s + 1:])
                if sign:
                    pos = INDEX[k][K]
                    term = v * bij
                    out[pos] = out[pos] - term if sign > 0 else out[pos] + term
    return KForm(k, out)


def gl7_action(h: np.ndarray, a: KForm) -> KForm:
    """h.a = a(h^-1 ., ..., h^-1 .) for invertible 7x7 ``h``."""
    h = as_full(h)
    hinv = inverse(h)
    backend = backend_of(hinv)
    one_forms = [KForm(1, np.array(hinv[i], dtype=hinv.dtype)) for i in range(N)]
    out = KForm.zero(a.degree, backend)
    ca = a.coeffs if (a.coeffs.dtype == object) == backend.exact else backend.convert(a.coeffs)
    if a.degree == 0:
        return KForm(0, ca.copy())
    for I, v in zip(COMBOS[a.degree], ca):
        if not _nz(v):
            continue
        out = out + wedge_all(*[one_forms[i] for i in I]) * v
    return out


def inner(a: KForm, b: KForm):
    """Standard inner product of same-degree forms."""
    if a.degree != b.degree:
        raise DegreeError("inner product of forms of different degree")
    total = ZERO if a.coeffs.dtype == object and b.coeffs.dtype == object else 0.0
    for u, v in zip(a.coeffs, b.coeffs):
        if _nz(u) and _nz(v):
            total = total + u * v
    return total


def project_2forms(a: KForm) -> tuple[KForm, KForm]:
    """Split a 2-form into its Lambda^2_7 and Lambda^2_14 parts.

    The map a -> *(a ^ phi) is 2 on Lambda^2_7 and -1 on Lambda^2_14.
    """
    if a.degree != 2:
        raise DegreeError("project_2forms needs a 2-form")
    phi = PHI if a.coeffs.dtype == object else PHI.to_float()
    t = star7(wedge(a, phi))
    if a.coeffs.dtype == object:
        p7 = (t + a) * (ONE / 3)
    else:
        p7 = (t + a) * (1.0 / 3.0)
    return p7, a - p7


# -- fixtures -----------------------------------------------------------------

PHI = form("e127+e347+e567+e135-e146-e236-e245")
STAR_PHI = form("e3456+e1256+e1234-e2467+e2357+e1457+e1367")
OMEGA = form("e12+e34+e56")
RHO_PLUS = form("e135-e146-e236-e245")
RHO_MINUS = form("e145+e136+e235-e246")
OMEGA7 = form("e12+e56")
OMEGA3 = form("e26-e15")
OMEGA4 = form("e16+e25")
OMEGA3_BAR = form("e26+e15")
OMEGA4_BAR = form("e16-e25")
TAU = form("e12-e56")
VOL = form("e1234567")
E7 = form("e7")

FIXTURES = {
    "phi": PHI,
    "star_phi": STAR_PHI,
    "omega": OMEGA,
    "rho_plus": RHO_PLUS,
    "rho_minus": RHO_MINUS,
    "omega7": OMEGA7,
    "omega3": OMEGA3,
    "omega4": OMEGA4,
    "omega3_bar": OMEGA3_BAR,
    "omega4_bar": OMEGA4_BAR,
    "tau": TAU,
    "vol": VOL,
}


def fixture(name: str, backend: Backend = EXACT) -> KForm:
    f = FIXTURES[name]
    return f if backend.exact else f.astype(backend)


def float_form(f: KForm) -> KForm:
    return f.astype(FLOAT)
