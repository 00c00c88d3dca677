"""Command-line interface: verify, deform, flow, search and catalog.

Reports are line-oriented ``key=value`` text in a fixed order.  Exit codes:
0 when every requested check passes, 1 when a check fails, 2 on malformed or
missing input.
"""

from __future__ import annotations

import argparse
import logging
import re
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .formats import FormatError, backend_for, looks_like_quadruple, parse_bracket, parse_entry
from .scalars import EXACT, FLOAT, ExactScalar, float_tolerances, format_surd, to_float_array

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

log = logging.getLogger("g2erp")


class InputError(Exception):
    """Malformed or missing input; mapped to exit code 2."""


# -- input loading ----------------------------------------------------------------------


@dataclass
class Loaded:
    label: str
    quadruple: object | None = None
    constants: dict | None = None
    exact: bool = True

    def bracket(self):
        from .liealg import Bracket
        from .quad import to_bracket

        if self.quadruple is not None:
            return to_bracket(self.quadruple)
        return Bracket.from_constants(self.constants, backend_for(self.exact), name=self.label)


def load_input(source: str) -> Loaded:
    from .quad import CATALOG_NAMES, catalog, load_quadruple_text

    if source.startswith("catalog:"):
        name = source.split(":", 1)[1]
        if name not in CATALOG_NAMES:
            raise InputError(f"unknown catalog entry {name!r}; known: {', '.join(CATALOG_NAMES)}")
        return Loaded(source, quadruple=catalog(name))
    path = Path(source)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {source}: {exc.strerror or exc}") from exc
    try:
        if looks_like_quadruple(text):
            q = load_quadruple_text(text)
            return Loaded(source, quadruple=q, exact=q.backend.exact)
        constants, exact = parse_bracket(text)
    except FormatError as exc:
        raise InputError(f"{source}: {exc}") from exc
    except ValueError as exc:
        raise InputError(f"{source}: {exc}") from exc
    if not constants:
        raise InputError(f"{source}: no structure constants found")
    return Loaded(source, constants=constants, exact=exact)


def set_backend(data: Loaded, backend: str | None) -> Loaded:
    if backend is None:
        return data
    if backend == "exact" and not data.exact:
        raise InputError("the exact backend needs surd entries; the input has decimals")
    if backend == "float" and data.exact:
        if data.quadruple is not None:
            data.quadruple = data.quadruple.to_float()
        else:
            data.constants = {k: float(v) for k, v in data.constants.items()}
        data.exact = False
    return data


_BLOCK_RE = re.compile(
    r"^\s*(?:(?P<block>A1|A|B|C)\s*(?:\(\s*(?P<p1>[^)]*)\)|:\s*(?P<p2>[^=]*)))?\s*(?P<plain>[^=]*?)\s*=\s*(?P<value>\S+)\s*$"
)


def parse_mutation(spec: str) -> tuple[str | None, tuple[int, ...], object]:
    """``A(3,3)=0``, ``A:3,3=0`` and ``3,3=0`` (block A) or ``i,j,k=v`` for brackets."""
    m = _BLOCK_RE.match(spec)
    if not m:
        raise InputError(f"bad --mutate {spec!r}")
    block = m.group("block")
    idx_text = m.group("p1") or m.group("p2") or m.group("plain")
    if block and m.group("plain"):
        raise InputError(f"bad --mutate {spec!r}")
    try:
        idx = tuple(int(t) for t in idx_text.split(","))
    except ValueError as exc:
        raise InputError(f"bad --mutate indices in {spec!r}") from exc
    try:
        value = parse_entry(m.group("value"))
    except FormatError as exc:
        raise InputError(f"bad --mutate value in {spec!r}") from exc
    if block is None and len(idx) == 2:
        block = "A"
    if block is not None and len(idx) != 2:
        raise InputError(f"block mutations need two indices: {spec!r}")
    if block is None and len(idx) != 3:
        raise InputError(f"bracket mutations need three indices: {spec!r}")
    return block, idx, value


def apply_mutations(data: Loaded, specs: list[str]) -> Loaded:
    for spec in specs or []:
        block, idx, value = parse_mutation(spec)
        if not isinstance(value, ExactScalar) and data.exact:
            data = set_backend(data, "float")
        if data.quadruple is not None:
            if block is None:
                raise InputError("quadruple inputs take block mutations such as A(3,3)=0")
            M = getattr(data.quadruple, block).copy()
            i, j = idx
            if not (1 <= i <= M.shape[0] and 1 <= j <= M.shape[1]):
                raise InputError(f"index out of range for block {block}: {spec!r}")
            M[i - 1, j - 1] = value if data.exact else float(value)
            data.quadruple = data.quadruple.replace(**{block: M})
        else:
            if block is not None:
                raise InputError("bracket inputs take mutations of the form i,j,k=value")
            i, j, k = idx
            if not all(1 <= n <= 7 for n in idx) or i >= j:
                raise InputError(f"bracket mutation needs 1 <= i < j <= 7: {spec!r}")
            data.constants = dict(data.constants)
            data.constants[(i, j, k)] = value if data.exact else float(value)
        data.label += f" [{spec}]"
    return data


# -- reports --------------------------------------------------------------------------------


class Report:
    def __init__(self):
        self.lines: list[str] = []
        self.checks: dict[str, bool] = {}

    def value(self, key: str, v) -> None:
        self.lines.append(f"{key}={fmt(v)}")

    def check(self, key: str, ok: bool) -> None:
        self.checks[key] = bool(ok)
        self.lines.append(f"check.{key}={'pass' if ok else 'fail'}")

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def emit(self, out) -> None:
        for line in self.lines:
            print(line, file=out)


def fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, ExactScalar):
        return format_surd(v)
    if isinstance(v, float):
        return f"{v:.12g}"
    if hasattr(v, "coeffs"):
        return fmt_form(v)
    return str(v)


def fmt_form(f) -> str:
    from .exterior import COMBOS

    terms = []
    for idx, c in zip(COMBOS[f.degree], f.coeffs):
        if isinstance(c, ExactScalar):
            if c.is_zero():
                continue
            s = format_surd(c)
        else:
            if abs(c) <= 1e-12:
                continue
            s = f"{c:.12g}"
        terms.append(f"({s})e{''.join(str(i + 1) for i in idx)}")
    return " + ".join(terms) if terms else "0"


def _ricci_normal(R: np.ndarray, backend) -> bool:
    from .exterior import G0

    third = EXACT.scalar("1/3") if backend.exact else 1 / 3
    target = backend.zeros((7, 7))
    for i in G0:
        target[i, i] = -third
    return backend.is_zero(R - target)


def verify_report(data: Loaded) -> Report:
    from .g2core import bryant_equality, erp_diagnostics, solve_Q, torsion
    from .liealg import check_jacobi, is_derivation, ricci
    from .quad import check_structure, unimodular_specialization

    rep = Report()
    rep.value("input", data.label)
    rep.value("backend", "exact" if data.exact else "float")
    rep.value("format", "quadruple" if data.quadruple is not None else "bracket")
    mu = data.bracket()
    backend = mu.backend

    if data.quadruple is not None:
        verdict = check_structure(data.quadruple)
        for k, v in verdict.flags.items():
            rep.check(f"quad.{k}", v)
        rep.check("quad.consistent", verdict.consistent)

    jac = check_jacobi(mu)
    rep.check("jacobi", bool(jac))
    if not jac:
        rep.value("jacobi.violation", jac.triple)
        return rep
    tor = torsion(mu)
    rep.check("closed", tor.closed)
    if not tor.closed:
        return rep
    rep.value("tau", tor.tau)
    rep.value("tau.norm_sq", tor.tau_norm_sq)
    rep.check("erp", tor.erp)
    if tor.split_agrees is not None:
        rep.check("torsion.split_agrees", tor.split_agrees)
    bry = bryant_equality(mu)
    rep.value("bryant.scal_sq", bry.scal_sq)
    rep.value("bryant.three_ric_sq", bry.three_ric_sq)
    rep.check("bryant.equality", bry.equal)
    if not tor.erp:
        return rep

    diag = erp_diagnostics(mu)
    for k, v in diag.checks.items():
        rep.check(f"erp.{k}", v)
    if data.quadruple is not None:
        R = ricci(mu)
        rep.check("ricci.spectrum", _ricci_normal(R, backend))
        third = EXACT.scalar("1/3") if backend.exact else 1 / 3
        rep.check("ricci.soliton_derivation", is_derivation(mu, R + backend.eye(7) * third))
        Q = solve_Q(mu)
        rep.check("ricci.q_relation", backend.is_zero(R - (backend.eye(7) * (-third) - Q * 2)))
        uni = unimodular_specialization(data.quadruple)
        rep.value("unimodular", uni.unimodular)
        for k, v in uni.checks.items():
            rep.check(f"unimodular.{k}", v)
        rep.value("nilradical.dim", uni.nilradical_dim)
        rep.check("nilradical.verified", uni.nilradical_status == "PASS")
    return rep


# -- commands ----------------------------------------------------------------------------------


def _prepare(args) -> Loaded:
    data = load_input(args.input)
    data = set_backend(data, args.backend)
    return apply_mutations(data, getattr(args, "mutate", None))


def cmd_verify(args, out) -> int:
    rep = verify_report(_prepare(args))
    rep.value("result", "pass" if rep.ok else "fail")
    rep.emit(out)
    failed = [k for k, v in rep.checks.items() if not v]
    print(f"# {len(rep.checks) - len(failed)}/{len(rep.checks)} checks passed"
          + (f"; failed: {', '.join(failed)}" if failed else ""), file=out)
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_deform(args, out) -> int:
    from .deform import NotERPQuadruple, rigidity

    data = _prepare(args)
    if data.quadruple is None:
        raise InputError("deform needs a quadruple file")
    try:
        r = rigidity(data.quadruple)
    except NotERPQuadruple as exc:
        print(f"input={data.label}", file=out)
        print(f"error={exc}", file=out)
        return EXIT_FAIL
    rep = Report()
    rep.value("input", data.label)
    rep.value("symmetry_group", r.kind)
    rep.value("tangent_dim", r.tangent_dim)
    rep.value("orbit_dim", r.orbit_dim)
    rep.value("derivation_dim", r.derivation_dim)
    rep.value("orbit_plus_derivation_dim", r.sum_dim)
    rep.check("orbit_in_tangent", r.orbit_in_tangent)
    rep.check("derivations_in_tangent", r.derivations_in_tangent)
    rep.value("rigid", r.rigid)
    rep.value("equivariantly_rigid", r.equivariantly_rigid)
    rep.emit(out)
    print(r.summary(), file=out)
    return EXIT_OK if rep.ok else EXIT_FAIL


def parse_times(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise InputError(f"bad time list {text!r}") from exc


def cmd_flow(args, out) -> int:
    from .g2core import NotERP, NotPositive, erp_flow

    data = _prepare(args)
    mu = data.bracket()
    times = parse_times(args.t)
    if not times:
        raise InputError("--t needs at least one time")
    rep = Report()
    rep.value("input", data.label)
    for t in times:
        key = f"flow[t={t:g}]"
        try:
            s = erp_flow(mu, t)
        except NotERP:
            rep.check("erp_start", False)
            break
        except NotPositive as exc:
            rep.check(f"{key}.positive", False)
            rep.value(f"{key}.error", exc)
            continue
        rep.value(f"{key}.c", float(s.c))
        rep.check(f"{key}.positive", True)
        rep.value(f"{key}.tau_norm_sq", float(s.report.tau_norm_sq))
        rep.value(f"{key}.residual", float(s.report.residuals.get("erp", 0.0)))
        rep.check(f"{key}.erp", s.report.erp)
    rep.value("result", "pass" if rep.ok else "fail")
    rep.emit(out)
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_search(args, out) -> int:
    from .formats import dump_quadruple
    from .quad import chart
    from .search import CONSTRAINTS, find_erp

    if args.restarts < 1:
        raise InputError("--restarts must be at least 1")
    x0 = None
    if args.near:
        data = load_input(args.near)
        if data.quadruple is None:
            raise InputError("--near needs a quadruple")
        x0 = to_float_array(chart(data.quadruple))
    if args.constraint not in CONSTRAINTS:
        raise InputError(f"unknown constraint {args.constraint!r}")
    res = find_erp(seed=args.seed, restarts=args.restarts, max_iters=args.max_iters,
                   constraint=args.constraint, x0=x0, noise=args.noise, workers=args.workers)
    outdir = Path(args.out) if args.out else None
    if outdir:
        outdir.mkdir(parents=True, exist_ok=True)
    print(f"restarts={res.attempts}", file=out)
    print(f"converged={res.converged}", file=out)
    print(f"rejected={res.rejected}", file=out)
    print(f"classes={len(res.hits)}", file=out)
    print(f"duplicates={res.duplicates}", file=out)
    for n, h in enumerate(res.hits):
        A1 = to_float_array(h.quadruple.A1)
        print(f"hit[{n}].restart={h.restart}", file=out)
        print(f"hit[{n}].residual={h.residual_norm:.3e}", file=out)
        print(f"hit[{n}].trace_A1={np.trace(A1):.12g}", file=out)
        print(f"hit[{n}].copies={h.duplicates + 1}", file=out)
        if outdir:
            comments = [f"search seed={args.seed} restart={h.restart}",
                        f"residual={h.residual_norm:.3e} iterations={h.iterations} copies={h.duplicates + 1}"]
            path = outdir / f"hit_{n}.quad"
            path.write_text(dump_quadruple(*(to_float_array(M) for M in h.quadruple.blocks),
                                           name=f"hit_{n}", comments=comments), encoding="utf-8")
            print(f"hit[{n}].file={path}", file=out)
    for msg in res.diagnostics:
        log.info(msg)
    return EXIT_OK if res.hits else EXIT_FAIL


def cmd_catalog(args, out) -> int:
    from .quad import CATALOG_NAMES, catalog, catalog_text

    if args.action == "list":
        for name in CATALOG_NAMES:
            q = catalog(name)
            print(f"{name}\t{q.notes}" if q.notes else name, file=out)
        return EXIT_OK
    if args.name not in CATALOG_NAMES:
        raise InputError(f"unknown catalog entry {args.name!r}; known: {', '.join(CATALOG_NAMES)}")
    out.write(catalog_text(args.name))
    return EXIT_OK


# -- argument parsing ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="g2erp", description="Extremally Ricci-pinched G2-structures on Lie algebras.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, mutate: bool = True):
        sp.add_argument("input", help="quadruple or bracket file, or catalog:NAME")
        sp.add_argument("--backend", choices=("exact", "float"), help="arithmetic backend (default: from the input)")
        sp.add_argument("--eq-tol", type=float, default=None, help="float equality tolerance")
        sp.add_argument("--rank-tol", type=float, default=None, help="float rank tolerance")
        if mutate:
            sp.add_argument("--mutate", action="append", metavar="SPEC",
                            help="change one entry: A(3,3)=0, B:1,2=1/3, 3,3=0 (block A) or i,j,k=v for brackets")

    v = sub.add_parser("verify", help="run every structural check on a bracket or quadruple")
    common(v)
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("deform", help="rigidity table of an ERP quadruple")
    common(d)
    d.set_defaults(func=cmd_deform)

    f = sub.add_parser("flow", help="ERP flow line at sample times")
    common(f)
    f.add_argument("--t", default="0,1", help="comma-separated times; write --t=-3,-1 for negatives")
    f.set_defaults(func=cmd_flow)

    s = sub.add_parser("search", help="numerical search for ERP quadruples")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--restarts", type=int, default=10)
    s.add_argument("--max-iters", type=int, default=500)
    s.add_argument("--constraint", default="none", help="none, unimodular, a1_diag0d or a1_diagonal")
    s.add_argument("--near", help="start near this quadruple (catalog:NAME or a file)")
    s.add_argument("--noise", type=float, default=1e-3)
    s.add_argument("--workers", type=int, default=4)
    s.add_argument("--out", help="directory for hit files")
    s.add_argument("--eq-tol", type=float, default=None)
    s.add_argument("--rank-tol", type=float, default=None)
    s.set_defaults(func=cmd_search)

    c = sub.add_parser("catalog", help="list or print the built-in quadruples")
    c.add_argument("action", choices=("list", "show"))
    c.add_argument("name", nargs="?")
    c.set_defaults(func=cmd_catalog)
    return p


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s")
    if args.command == "catalog" and args.action == "show" and not args.name:
        print("error: catalog show needs a name", file=sys.stderr)
        return EXIT_INPUT
    try:
        with float_tolerances(getattr(args, "eq_tol", None), getattr(args, "rank_tol", None)):
            return args.func(args, out)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
