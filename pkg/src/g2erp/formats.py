"""Text formats for quadruples and raw brackets.

Quadruple files::

    # comment
    name = J
    notes = free text
    [A1]
    0 0
    0 0
    [A]
    ...

Entries are surd literals (exact) or decimals (the whole file then becomes
float).  Bracket files list ``i j k value`` lines meaning <mu(e_i, e_j), e_k>.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .scalars import EXACT, FLOAT, ExactScalar, SurdSyntaxError, format_surd, parse_surd

SECTIONS = {"A1": 2, "A": 4, "B": 4, "C": 4}

_DECIMAL = re.compile(r"^[+-]?(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?$")
_INTEGER = re.compile(r"^[+-]?\d+$")


class FormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def parse_entry(token: str, line: int | None = None):
    """An exact scalar for surd literals, a float for decimals."""
    if _DECIMAL.match(token) and not _INTEGER.match(token):
        return float(token)
    try:
        return parse_surd(token)
    except SurdSyntaxError as exc:
        raise FormatError(f"bad entry {token!r}: {exc}", line) from exc


def _strip(raw: str) -> str:
    return raw.split("#", 1)[0].strip()


def _to_array(rows: list[list], exact: bool) -> np.ndarray:
    if exact:
        return np.array(rows, dtype=object)
    return np.array([[float(v) for v in r] for r in rows], dtype=float)


@dataclass
class QuadrupleText:
    A1: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    name: str = ""
    notes: str = ""
    exact: bool = True
    meta: dict = field(default_factory=dict)


def parse_quadruple(text: str) -> QuadrupleText:
    blocks: dict[str, list[list]] = {}
    meta: dict[str, str] = {}
    current = None
    exact = True
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip(raw)
        if not line:
            continue
        m = re.fullmatch(r"\[\s*(\w+)\s*\]", line)
        if m:
            current = m.group(1)
            if current not in SECTIONS:
                raise FormatError(f"unknown section [{current}]", lineno)
            if current in blocks:
                raise FormatError(f"duplicate section [{current}]", lineno)
            blocks[current] = []
            continue
        if "=" in line and current is None:
            key, value = (s.strip() for s in line.split("=", 1))
            meta[key] = value
            continue
        if current is None:
            raise FormatError("matrix row outside of a section", lineno)
        size = SECTIONS[current]
        tokens = line.split()
        if len(tokens) != size:
            raise FormatError(f"[{current}] rows need {size} entries, got {len(tokens)}", lineno)
        if len(blocks[current]) >= size:
            raise FormatError(f"[{current}] has more than {size} rows", lineno)
        row = [parse_entry(t, lineno) for t in tokens]
        exact = exact and all(isinstance(v, ExactScalar) for v in row)
        blocks[current].append(row)
    for name, size in SECTIONS.items():
        if name not in blocks:
            raise FormatError(f"missing section [{name}]")
        if len(blocks[name]) != size:
            raise FormatError(f"[{name}] needs {size} rows, got {len(blocks[name])}")
    arrays = {k: _to_array(v, exact) for k, v in blocks.items()}
    return QuadrupleText(
        arrays["A1"], arrays["A"], arrays["B"], arrays["C"],
        name=meta.pop("name", ""), notes=meta.pop("notes", ""), exact=exact, meta=meta,
    )


def format_entry(v) -> str:
    if isinstance(v, ExactScalar):
        return format_surd(v)
    return repr(float(v))


def dump_quadruple(A1, A, B, C, name: str = "", notes: str = "", comments: list[str] | None = None) -> str:
    lines = [f"# {c}" for c in comments or []]
    if name:
        lines.append(f"name = {name}")
    if notes:
        lines.append(f"notes = {notes}")
    for label, M in (("A1", A1), ("A", A), ("B", B), ("C", C)):
        lines.append("")
        lines.append(f"[{label}]")
        for row in M:
            lines.append(" ".join(format_entry(v) for v in row))
    return "\n".join(lines) + "\n"


def parse_bracket(text: str) -> tuple[dict, bool]:
    """Structure constants {(i, j, k): value} with i < j, and an exactness flag."""
    constants: dict[tuple[int, int, int], object] = {}
    exact = True
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip(raw)
        if not line:
            continue
        tokens = line.split()
        if len(tokens) != 4:
            raise FormatError("expected 'i j k value'", lineno)
        try:
            i, j, k = (int(t) for t in tokens[:3])
        except ValueError as exc:
            raise FormatError("indices must be integers", lineno) from exc
        if not all(1 <= n <= 7 for n in (i, j, k)):
            raise FormatError("indices must lie in 1..7", lineno)
        if i >= j:
            raise FormatError("need i < j", lineno)
        if (i, j, k) in constants:
            raise FormatError(f"duplicate constant {(i, j, k)}", lineno)
        v = parse_entry(tokens[3], lineno)
        exact = exact and isinstance(v, ExactScalar)
        constants[(i, j, k)] = v
    if not exact:
        constants = {key: float(v) for key, v in constants.items()}
    return constants, exact


def dump_bracket(constants: dict) -> str:
    return "".join(f"{i} {j} {k} {format_entry(v)}\n" for (i, j, k), v in sorted(constants.items()))


def looks_like_quadruple(text: str) -> bool:
    return any(re.fullmatch(r"\[\s*\w+\s*\]", _strip(line)) for line in text.splitlines())


def backend_for(exact: bool):
    return EXACT if exact else FLOAT
