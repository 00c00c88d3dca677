"""Scalars: exact arithmetic in Q(sqrt2, sqrt3, sqrt5) and a float profile.

Every downstream module works on numpy arrays whose entries are either
``ExactScalar`` objects (``dtype=object``) or ``float64``.  The two are tied
together by :class:`Backend`, which knows how to build, compare and test
arrays of either kind.
"""

from __future__ import annotations

import decimal
import math
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable

import numpy as np

# Square-free radicands of the basis 1, sqrt2, sqrt3, sqrt5, sqrt6, sqrt10, sqrt15, sqrt30.
RADICANDS: tuple[int, ...] = (1, 2, 3, 5, 6, 10, 15, 30)
_SLOT = {n: i for i, n in enumerate(RADICANDS)}


def _product_table() -> list[list[tuple[int, int]]]:
    table = []
    for m in RADICANDS:
        row = []
        for n in RADICANDS:
            g = math.gcd(m, n)
            row.append((_SLOT[m * n // (g * g)], g))
        table.append(row)
    return table


_MUL = _product_table()
_ZERO_COORDS = (Fraction(0),) * 8


class ExactScalar:
    """An element of Q(sqrt2, sqrt3, sqrt5) stored as 8 rational coordinates."""

    __slots__ = ("coords", "_hash")

    def __init__(self, coords: Iterable = _ZERO_COORDS):
        c = tuple(Fraction(x) for x in coords)
        if len(c) != 8:
            raise ValueError(f"expected 8 coordinates, got {len(c)}")
        self.coords = c
        self._hash = None

    @classmethod
    def _make(cls, coords: tuple) -> ExactScalar:
        """Trusted constructor for a tuple of 8 Fractions (skips conversion)."""
        out = object.__new__(cls)
        out.coords = coords
        out._hash = None
        return out

    @classmethod
    def rational(cls, q) -> ExactScalar:
        return cls((Fraction(q),) + _ZERO_COORDS[1:])

    @classmethod
    def sqrt(cls, n: int) -> ExactScalar:
        """sqrt(n) for a non-negative integer whose square-free part divides 30."""
        if n < 0:
            raise ValueError("negative radicand")
        if n == 0:
            return cls()
        square, free = _split_square(n)
        if free not in _SLOT:
            raise ValueError(f"square-free part {free} of {n} does not divide 30")
        coords = list(_ZERO_COORDS)
        coords[_SLOT[free]] = Fraction(square)
        return cls(coords)

    # -- predicates -------------------------------------------------------
    def is_zero(self) -> bool:
        return not any(self.coords)

    def is_rational(self) -> bool:
        return not any(self.coords[1:])

    def __bool__(self) -> bool:
        return not self.is_zero()

    # -- arithmetic -------------------------------------------------------
    @staticmethod
    def _coerce(other) -> ExactScalar | None:
        if isinstance(other, ExactScalar):
            return other
        if isinstance(other, (int, Rational)):
            return ExactScalar.rational(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return ExactScalar._make(tuple(a + b if b else a for a, b in zip(self.coords, o.coords)))

    __radd__ = __add__

    def __neg__(self) -> ExactScalar:
        return ExactScalar._make(tuple(-a if a else a for a in self.coords))

    def __pos__(self) -> ExactScalar:
        return self

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return ExactScalar._make(tuple(a - b if b else a for a, b in zip(self.coords, o.coords)))

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        if isinstance(other, (int, Rational)):
            if other == 0:
                return ExactScalar()
            q = Fraction(other)
            return ExactScalar._make(tuple(a * q if a else a for a in self.coords))
        if not isinstance(other, ExactScalar):
            return NotImplemented
        out = [Fraction(0)] * 8
        for i, a in enumerate(self.coords):
            if not a:
                continue
            row = _MUL[i]
            for j, b in enumerate(other.coords):
                if b:
                    k, g = row[j]
                    out[k] += a * b if g == 1 else g * a * b
        return ExactScalar._make(tuple(out))

    __rmul__ = __mul__

    def inverse(self) -> ExactScalar:
        if self.is_zero():
            raise ZeroDivisionError("division by zero in Q(sqrt2, sqrt3, sqrt5)")
        if self.is_rational():
            return ExactScalar.rational(1 / self.coords[0])
        return ExactScalar(_inverse_coords(self.coords))

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, n: int) -> ExactScalar:
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = ExactScalar.rational(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- comparison -------------------------------------------------------
    def __eq__(self, other) -> bool:
        if isinstance(other, float):
            return float(self) == other
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.coords == o.coords

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.coords) if not self.is_rational() else hash(self.coords[0])
        return self._hash

    def sign(self) -> int:
        if self.is_zero():
            return 0
        return 1 if to_float(self) > 0 else -1

    def __lt__(self, other) -> bool:
        return (self - other).sign() < 0

    def __le__(self, other) -> bool:
        return (self - other).sign() <= 0

    def __gt__(self, other) -> bool:
        return (self - other).sign() > 0

    def __ge__(self, other) -> bool:
        return (self - other).sign() >= 0

    def __abs__(self) -> ExactScalar:
        return -self if self.sign() < 0 else self

    # -- conversion -------------------------------------------------------
    def __float__(self) -> float:
        return to_float(self)

    def __str__(self) -> str:
        return format_surd(self)

    def __repr__(self) -> str:
        return f"ExactScalar({format_surd(self)!r})"


def _split_square(n: int) -> tuple[int, int]:
    """Write n = s**2 * f with f square-free; return (s, f)."""
    s, f = 1, 1
    p = 2
    while p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        s *= p ** (e // 2)
        if e % 2:
            f *= p
        p += 1
    return s, f * n


@lru_cache(maxsize=4096)
def _inverse_coords(y: tuple[Fraction, ...]) -> tuple[Fraction, ...]:
    # Column j of the multiplication-by-y matrix is y * basis_j; solve M z = 1.
    m = [[Fraction(0)] * 8 for _ in range(8)]
    for i, a in enumerate(y):
        if not a:
            continue
        for j in range(8):
            k, g = _MUL[i][j]
            m[k][j] += g * a
    rhs = [Fraction(1)] + [Fraction(0)] * 7
    aug = [row + [r] for row, r in zip(m, rhs)]
    for col in range(8):
        piv = next(r for r in range(col, 8) if aug[r][col])
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(8):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [v - f * w for v, w in zip(aug[r], aug[col])]
    return tuple(row[8] for row in aug)


def _decimal_value(x: ExactScalar, prec: int) -> decimal.Decimal:
    with decimal.localcontext() as ctx:
        ctx.prec = prec
        total = decimal.Decimal(0)
        for n, q in zip(RADICANDS, x.coords):
            if not q:
                continue
            term = decimal.Decimal(q.numerator) / decimal.Decimal(q.denominator)
            if n != 1:
                term *= decimal.Decimal(n).sqrt()
            total += term
        return total


def to_float(x) -> float:
    """Nearest double to an exact scalar (a few ulp at worst)."""
    if isinstance(x, (float, int, np.floating, np.integer)):
        return float(x)
    if isinstance(x, Fraction):
        return float(x)
    if x.is_zero():
        return 0.0
    if x.is_rational():
        return float(x.coords[0])
    prec = 40
    prev = None
    while True:
        val = float(_decimal_value(x, prec))
        if val == prev and val != 0.0:
            return val
        prev = val
        prec *= 2
        if prec > 5000:
            return val


# -- surd literals ------------------------------------------------------------


class SurdSyntaxError(ValueError):
    """Malformed surd literal; ``pos`` is the 0-based offset of the problem."""

    def __init__(self, message: str, text: str, pos: int):
        super().__init__(f"{message} at position {pos} in {text!r}")
        self.text = text
        self.pos = pos


class _SurdParser:
    def __init__(self, text: str):
        self.text = text
        self.s = text.replace(" ", "")
        self.i = 0

    def error(self, msg: str):
        raise SurdSyntaxError(msg, self.text, self.i)

    def peek(self) -> str:
        return self.s[self.i] if self.i < len(self.s) else ""

    def eat(self, tok: str) -> bool:
        if self.s.startswith(tok, self.i):
            self.i += len(tok)
            return True
        return False

    def uint(self) -> int:
        start = self.i
        while self.peek().isdigit():
            self.i += 1
        if start == self.i:
            self.error("expected unsigned integer")
        return int(self.s[start:self.i])

    def sqrt(self) -> ExactScalar:
        start = self.i
        if not self.eat("sqrt("):
            self.error("expected 'sqrt('")
        n = self.uint()
        if not self.eat(")"):
            self.error("expected ')'")
        try:
            return ExactScalar.sqrt(n)
        except ValueError as exc:
            raise SurdSyntaxError(str(exc), self.text, start) from None

    def rat(self) -> Fraction:
        num = self.uint()
        if self.eat("/"):
            den = self.uint()
            if den == 0:
                self.error("zero denominator")
            return Fraction(num, den)
        return Fraction(num)

    def term(self) -> ExactScalar:
        if self.s.startswith("sqrt(", self.i):
            value = self.sqrt()
            if self.eat("/"):
                den = self.uint()
                if den == 0:
                    self.error("zero denominator")
                value = value * Fraction(1, den)
            return value
        if not self.peek().isdigit():
            self.error("expected number or sqrt")
        q = self.rat()
        if self.eat("*") or self.s.startswith("sqrt(", self.i):
            return self.sqrt() * q
        return ExactScalar.rational(q)

    def expr(self) -> ExactScalar:
        sign = -1 if self.eat("-") else 1
        total = self.term() * sign
        while True:
            if self.eat("+"):
                total = total + self.term()
            elif self.eat("-"):
                total = total - self.term()
            else:
                return total

    def parse(self) -> ExactScalar:
        if not self.s:
            self.error("empty literal")
        if self.peek() == "(" or self.s.startswith("-(", self.i):
            sign = -1 if self.eat("-") else 1
            self.eat("(")
            value = self.expr()
            if not self.eat(")"):
                self.error("expected ')'")
            if self.eat("/"):
                den = self.uint()
                if den == 0:
                    self.error("zero denominator")
                value = value * Fraction(1, den)
            value = value * sign
        else:
            value = self.expr()
        if self.i != len(self.s):
            self.error("unexpected character")
        return value


def parse_surd(text: str) -> ExactScalar:
    """Parse a literal such as ``-1/6``, ``sqrt(2)/6`` or ``(-10-sqrt(30))/60``."""
    return _SurdParser(text).parse()


def _format_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_surd(x: ExactScalar) -> str:
    """Canonical literal; ``parse_surd(format_surd(x)) == x``."""
    parts = []
    for n, q in zip(RADICANDS, x.coords):
        if not q:
            continue
        mag = abs(q)
        if n == 1:
            body = _format_rational(mag)
        elif mag == 1:
            body = f"sqrt({n})"
        elif mag.numerator == 1:
            body = f"sqrt({n})/{mag.denominator}"
        else:
            body = f"{_format_rational(mag)}*sqrt({n})"
        parts.append(("-" if q < 0 else "+", body))
    if not parts:
        return "0"
    first_sign, first = parts[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        out += sign + body
    return out


# -- backends -----------------------------------------------------------------


@dataclass(frozen=True)
class FloatProfile:
    eq_tol: float = 1e-9
    rank_tol: float = 1e-8


DEFAULT_PROFILE = FloatProfile()


@dataclass(frozen=True)
class Backend:
    """Arithmetic context: ``exact`` (ExactScalar objects) or ``float``."""

    name: str
    profile: FloatProfile = DEFAULT_PROFILE

    @property
    def exact(self) -> bool:
        return self.name == "exact"

    def scalar(self, value):
        if self.exact:
            if isinstance(value, ExactScalar):
                return value
            if isinstance(value, str):
                return parse_surd(value)
            if isinstance(value, float):
                raise TypeError("float value given to the exact backend")
            return ExactScalar.rational(value)
        if isinstance(value, str):
            return to_float(parse_surd(value))
        return to_float(value)

    def zeros(self, shape) -> np.ndarray:
        if self.exact:
            out = np.empty(shape, dtype=object)
            out.fill(ZERO)
            return out
        return np.zeros(shape)

    def eye(self, n: int) -> np.ndarray:
        out = self.zeros((n, n))
        for i in range(n):
            out[i, i] = ONE if self.exact else 1.0
        return out

    def array(self, data) -> np.ndarray:
        arr = np.array(data, dtype=object)
        if self.exact:
            flat = [self.scalar(v) for v in arr.ravel()]
            out = np.empty(arr.shape, dtype=object)
            out.ravel()[:] = flat if flat else []
            return out
        out = np.array([to_float(v) if not isinstance(v, str) else to_float(parse_surd(v))
                        for v in arr.ravel()], dtype=float).reshape(arr.shape)
        check_finite(out)
        return out

    def convert(self, arr: np.ndarray) -> np.ndarray:
        """Convert an array of either kind into this backend."""
        if self.exact:
            if arr.dtype != object:
                raise TypeError("cannot convert a float array to the exact backend")
            return arr
        return to_float_array(arr)

    def is_zero(self, x) -> bool:
        if isinstance(x, np.ndarray):
            if x.size == 0:
                return True
            if self.exact:
                return all(_is_exact_zero(v) for v in x.ravel())
            return float(np.max(np.abs(x))) <= self.profile.eq_tol
        if self.exact:
            return _is_exact_zero(x)
        return abs(float(x)) <= self.profile.eq_tol

    def eq(self, a, b) -> bool:
        return self.is_zero(a - b)


def _is_exact_zero(v) -> bool:
    if isinstance(v, ExactScalar):
        return v.is_zero()
    return v == 0


ZERO = ExactScalar()
ONE = ExactScalar.rational(1)
EXACT = Backend("exact")
FLOAT = Backend("float")


def check_finite(arr) -> None:
    if not np.all(np.isfinite(arr)):
        raise FloatingPointError("non-finite value in float computation")


def to_float_array(arr: np.ndarray) -> np.ndarray:
    if arr.dtype != object:
        return np.asarray(arr, dtype=float)
    out = np.array([to_float(v) for v in arr.ravel()], dtype=float).reshape(arr.shape)
    check_finite(out)
    return out


def backend_of(arr: np.ndarray, profile: FloatProfile = DEFAULT_PROFILE) -> Backend:
    if arr.dtype == object:
        return EXACT
    return FLOAT if profile == DEFAULT_PROFILE else Backend("float", profile)


def exact_array(data) -> np.ndarray:
    return EXACT.array(data)


@contextmanager
def float_tolerances(eq_tol: float | None = None, rank_tol: float | None = None):
    """Temporarily change the tolerances of the shared float backend."""
    old = FLOAT.profile
    new = FloatProfile(eq_tol if eq_tol is not None else old.eq_tol,
                       rank_tol if rank_tol is not None else old.rank_tol)
    object.__setattr__(FLOAT, "profile", new)
    try:
        yield new
    finally:
        object.__setattr__(FLOAT, "profile", old)
