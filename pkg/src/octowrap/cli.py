"""Command-line front end.

Exit codes: 0 success, 1 a check exceeded its tolerance, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import math
import re
import sys
from fractions import Fraction
from pathlib import Path as FsPath

import numpy as np

from octowrap import cartan as ct
from octowrap import eta_rep as er
from octowrap import wrap_virasoro as wv
from octowrap.cayley_dickson import CayleyNumber, Direction, exp_cd, inverse, ln_cd, make_table, moufang_check, mul
from octowrap.contour import (
    QuadratureError,
    ResidueRuleError,
    integrate,
    path_from_json,
    residue_numeric,
    residue_symbolic,
)
from octowrap.phrase import LEAF, MAX_EXP, BracketTree, D, Factor, Phrase, Term, derivative, normalize
from octowrap.suites import SUITES, run_suite


class UsageError(ValueError):
    """Bad command-line input; maps to exit code 2."""


# -- phrase grammar -----------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>-?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)|(?P<gen>i\d+)|(?P<zbar>zbar)|(?P<z>z)|(?P<op>[-+*^(),]))"
)


class PhraseSyntaxError(UsageError):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(src):
        if src[pos:].strip() == "":
            break
        m = _TOKEN.match(src, pos)
        if not m or m.end() == pos:
            raise PhraseSyntaxError(f"unexpected character {src[pos:].lstrip()[:1]!r}", pos)
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(("end", "", len(src)))
    return out


class _Parser:
    def __init__(self, src: str, r: int):
        self.toks = _tokenize(src)
        self.i = 0
        self.r = r

    def peek(self, k: int = 0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def take(self, value: str | None = None, kind: str | None = None):
        tok = self.peek()
        if (value is not None and tok[1] != value) or (kind is not None and tok[0] != kind):
            want = value or kind
            raise PhraseSyntaxError(f"expected {want!r}, found {tok[1] or 'end of input'!r}", tok[2])
        self.i += 1
        return tok

    def phrase(self) -> list:
        terms = [self.term()]
        while self.peek()[1] == "+":
            self.take("+")
            terms.append(self.term())
        tok = self.peek()
        if tok[0] != "end":
            raise PhraseSyntaxError(f"unexpected {tok[1]!r}", tok[2])
        return terms

    def term(self):
        node = self.unit()
        while self.peek()[1] == "*":
            self.take("*")
            node = (node, self.unit())
        return node

    def unit(self):
        kind, val, pos = self.peek()
        if val == "(":
            if self._is_tuple():
                return ("coeff", self.tuple_coeff())
            self.take("(")
            node = self.term()
            self.take(")")
            return node
        return self.atom()

    def _is_tuple(self) -> bool:
        # "(a, b, ...)" is a coefficient; "(x)" with a single entry is grouping
        return self.peek(1)[0] == "num" and self.peek(2)[1] == ","

    def tuple_coeff(self) -> CayleyNumber:
        start = self.take("(")[2]
        vals = [float(self.take(kind="num")[1])]
        while self.peek()[1] == ",":
            self.take(",")
            vals.append(float(self.take(kind="num")[1]))
        self.take(")")
        n = 1 << self.r
        if len(vals) > n:
            raise PhraseSyntaxError(f"coefficient has {len(vals)} components; level {self.r} allows {n}", start)
        return CayleyNumber(self.r, vals + [0.0] * (n - len(vals)))

    def atom(self):
        kind, val, pos = self.peek()
        if kind == "num":
            self.take()
            return ("coeff", CayleyNumber.real(self.r, float(val)))
        if kind == "gen":
            self.take()
            j = int(val[1:])
            if j >= 1 << self.r:
                raise PhraseSyntaxError(f"generator i{j} needs index < {1 << self.r} at level {self.r}", pos)
            return ("coeff", CayleyNumber.generator(self.r, j).to_float())
        if kind in ("z", "zbar"):
            self.take()
            n = 1
            if self.peek()[1] == "^":
                self.take("^")
                tok = self.take(kind="num")
                if not re.fullmatch(r"[-+]?\d+", tok[1]):
                    raise PhraseSyntaxError("exponent must be an integer", tok[2])
                n = int(tok[1])
                if abs(n) > MAX_EXP:
                    raise PhraseSyntaxError(f"exponent {n} outside the window |n| <= {MAX_EXP}", tok[2])
            return ("factor", Factor(n, kind == "zbar"))
        raise PhraseSyntaxError(f"expected an atom, found {val or 'end of input'!r}", pos)


def _leaves(node) -> list:
    if isinstance(node, tuple) and node and node[0] in ("coeff", "factor"):
        return [node]
    return _leaves(node[0]) + _leaves(node[1])


def _pad(node, r: int):
    """Insert 1 coefficients and z^0 factors so leaves alternate coefficient, factor, ..., coefficient."""
    one = ("coeff", CayleyNumber.real(r, 1.0))
    z0 = ("factor", Factor(0))
    state = {"want": "coeff"}

    def rec(nd):
        if isinstance(nd, tuple) and nd and nd[0] in ("coeff", "factor"):
            if nd[0] == state["want"]:
                state["want"] = "factor" if nd[0] == "coeff" else "coeff"
                return nd
            filler = one if nd[0] == "factor" else z0
            state["want"] = "factor" if nd[0] == "coeff" else "coeff"
            return (filler, nd)
        return (rec(nd[0]), rec(nd[1]))

    out = rec(node)
    if state["want"] == "coeff":
        out = (out, one)
    return out


def _shape(node):
    if isinstance(node, tuple) and node and node[0] in ("coeff", "factor"):
        return LEAF
    return (_shape(node[0]), _shape(node[1]))


def parse_phrase_text(src: str, r: int) -> Phrase:
    """Parse the phrase grammar; parentheses fix the bracketing tree, bare chains associate left."""
    if r not in (0, 1, 2, 3):
        raise UsageError("level must be 0..3")
    p = _Parser(src, r)
    terms = []
    for node in p.phrase():
        node = _pad(node, r)
        leaves = [v for _, v in _leaves(node)]
        terms.append(Term(tuple(leaves), BracketTree(_shape(node))))
    return Phrase(r, tuple(terms))


def _num_text(x: float) -> str:
    x = float(x)
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def format_coeff_text(c: CayleyNumber) -> str:
    v = c.to_float().coords
    nz = [k for k, x in enumerate(v) if x != 0]
    if not nz:
        return "0"
    if nz == [0]:
        return _num_text(v[0])
    if len(nz) == 1 and v[nz[0]] == 1.0:
        return f"i{nz[0]}"
    return "(" + ",".join(_num_text(x) for x in v) + ")"


def _factor_text(f: Factor) -> str:
    if f.center is not None and np.any(f.center.to_float().coords != 0):
        raise ValueError("the text grammar has no syntax for shifted centres; use JSON")
    base = "zbar" if f.conj else "z"
    return base if f.exp == 1 else f"{base}^{f.exp}"


def format_phrase_text(p: Phrase) -> str:
    """Inverse of parse_phrase_text on centred phrases."""
    if not p.terms:
        return "0"
    out = []
    for t in p.terms:
        it = iter(t.leaves)

        def rec(shape, top):
            if shape == LEAF:
                leaf = next(it)
                return format_coeff_text(leaf) if isinstance(leaf, CayleyNumber) else _factor_text(leaf)
            left = rec(shape[0], False)
            right = rec(shape[1], False)
            if shape[1] != LEAF:
                right = f"({right})"
            return f"{left} * {right}"

        out.append(rec(t.tree.shape, True))
    return " + ".join(out)


def load_phrase(src: str, r: int) -> Phrase:
    """Phrase from grammar text or a JSON file path."""
    path = FsPath(src)
    if src.endswith(".json") and path.exists():
        obj = json.loads(path.read_text())
        return Phrase.from_json(obj)
    return parse_phrase_text(src, r)


def parse_cd(src: str, r: int) -> CayleyNumber:
    """A single coefficient in the grammar: real, i<k>, (a,b,...) or a JSON list."""
    s = src.strip()
    if s.startswith("["):
        vals = json.loads(s)
        return CayleyNumber(r, [float(x) for x in vals] + [0.0] * ((1 << r) - len(vals)))
    p = _Parser(s, r)
    node = p.unit()
    if p.peek()[0] != "end" or not (isinstance(node, tuple) and node[0] == "coeff"):
        raise UsageError(f"not a coefficient: {src!r}")
    return node[1]


# -- output -------------------------------------------------------------------

def _jsonable(x):
    if isinstance(x, CayleyNumber):
        return [float(c) for c in x.to_float().coords]
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else {"num": x.numerator, "den": x.denominator}
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def emit(obj, out: str | None) -> None:
    text = json.dumps(_jsonable(obj), indent=2, allow_nan=True)
    if out:
        FsPath(out).write_text(text + "\n")
    else:
        sys.stdout.write(text + "\n")


# -- subcommands --------------------------------------------------------------

def cmd_cd(a) -> int:
    r = a.r
    x = parse_cd(a.x, r)
    y = parse_cd(a.y, r) if a.y is not None else None
    op = a.op
    if op in ("mul", "assoc", "moufang") and y is None:
        raise UsageError(f"{op} needs two operands")
    if op == "mul":
        res = {"product": mul(x, y)}
    elif op == "assoc":
        z = parse_cd(a.z, r) if a.z is not None else None
        if z is None:
            raise UsageError("assoc needs three operands")
        res = {"associator": mul(mul(x, y), z) - mul(x, mul(y, z))}
    elif op == "moufang":
        z = parse_cd(a.z, r) if a.z is not None else None
        if z is None:
            raise UsageError("moufang needs three operands")
        rep = moufang_check(x, y, z)
        res = {"m1": rep.m1, "m2": rep.m2, "m3": rep.m3}
    elif op == "inv":
        res = {"inverse": inverse(x)}
    elif op == "conj":
        res = {"conj": x.conj()}
    elif op == "norm":
        res = {"norm": x.norm()}
    elif op == "exp":
        res = {"exp": exp_cd(x)}
    elif op == "ln":
        res = {"ln": ln_cd(x)}
    else:  # table
        t = make_table(r)
        res = {"sign": t.sign.tolist(), "index": t.index.tolist()}
    emit(res, a.out)
    return 0


def cmd_phrase(a) -> int:
    p = load_phrase(a.phrase, a.r)
    res = {"text": format_phrase_text(p) if _centred(p) else None, "json": p.to_json()}
    if a.normalize:
        q = normalize(p)
        res["normalized"] = format_phrase_text(q) if _centred(q) else q.to_json()
    if a.derivative is not None:
        h = load_phrase(a.derivative, a.r)
        q = normalize(derivative(p, h))
        res["derivative"] = format_phrase_text(q) if _centred(q) else q.to_json()
    if a.D:
        q = D(p)
        res["D"] = format_phrase_text(q) if _centred(q) else q.to_json()
    if a.eval is not None:
        res["value"] = p.eval(parse_cd(a.eval, a.r))
    emit(res, a.out)
    return 0


def _centred(p: Phrase) -> bool:
    return all(f.center is None or not np.any(f.center.to_float().coords != 0) for t in p.terms for f in t.factors)


def cmd_integrate(a) -> int:
    p = load_phrase(a.phrase, a.r)
    src = a.path
    obj = json.loads(FsPath(src).read_text()) if FsPath(src).exists() else json.loads(src)
    path = path_from_json(obj)
    if path.level != p.level:
        raise UsageError("phrase and path levels differ")
    val = integrate(p, path, a.tol)
    emit({"integral": val}, a.out)
    return 0


def cmd_residue(a) -> int:
    p = load_phrase(a.phrase, a.r)
    z0 = parse_cd(a.at, a.r)
    M = parse_cd(a.M, a.r)
    res: dict = {}
    if a.mode in ("symbolic", "both"):
        try:
            res["symbolic"] = residue_symbolic(p, z0, M)
        except ResidueRuleError as exc:
            if a.mode == "symbolic":
                raise
            res["symbolic_error"] = str(exc)
    if a.mode in ("numeric", "both"):
        res["numeric"] = residue_numeric(p, z0, M, tol=a.tol)
    if a.mode == "both" and "symbolic" in res:
        d = (res["symbolic"] - res["numeric"]).norm()
        res["defect"] = d
        emit(res, a.out)
        return 0 if d <= max(a.tol * 10, 1e-8) else 1
    if a.mode != "both":
        emit(res[a.mode], a.out)
    else:
        emit(res, a.out)
    return 0


def _load_matrix(src: str) -> list[list[int]]:
    if src in ct.AFFINE_CORPUS:
        return ct.AFFINE_CORPUS[src]
    text = FsPath(src).read_text() if FsPath(src).exists() else src
    try:
        A = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"matrix must be JSON, a file, or a corpus name: {exc}") from None
    if isinstance(A, dict):
        A = A.get("A") or A.get("matrix")
    if not (isinstance(A, list) and A and all(isinstance(row, list) and len(row) == len(A) for row in A)):
        raise UsageError("matrix must be a square list of lists")
    return A


def cmd_cartan(a) -> int:
    A = _load_matrix(a.matrix)
    problems = ct.validate_gcm(A)
    if problems:
        emit({"gcm": False, "violations": problems}, a.out)
        return 2
    R = ct.realize(A)
    res = {
        "gcm": True,
        "n": len(A),
        "rank": R.l,
        "determinant": ct.det_q(A),
        "affine": ct.classify_affine(A),
        "realization": R.to_json(),
        "pairing_exact": ct.verify_realization(R),
        "center": ct.center_basis(A, R),
        "components": ct.components(A),
    }
    try:
        S = ct.symmetrize(A)
        F = ct.form_on_h(R, S)
        res["symmetrization"] = S.to_json()
        res["cartan_from_form"] = ct.cartan_from_form(F)
        res["rho"] = ct.rho(R)
    except ct.NotSymmetrizable as exc:
        res["symmetrization"] = {"error": str(exc)}
    emit(res, a.out)
    return 0


def cmd_eta(a) -> int:
    A = _load_matrix(a.matrix)
    R = ct.realize(A)
    G = er.build_module(A, R, D=a.depth)
    rep = er.check_relations(G, R)
    res = {"words": G.module.size, "relations": rep.to_json(), "relations_exact": rep.ok()}
    if a.height:
        for side in ("e", "f"):
            tab = er.root_grade(G, R, a.height, side)
            res[f"root_grade_{side}"] = {",".join(map(str, k)): v for k, v in tab.items()}
            res[f"mult_bound_{side}"] = er.mult_bound_holds(tab, len(A))
    emit(res, a.out)
    ok = rep.ok() and all(res.get(f"mult_bound_{s}", True) for s in ("e", "f"))
    return 0 if ok else 1


def _load_base(src: str | None) -> wv.BaseLieAlgebra:
    if src is None:
        return wv.sl2()
    text = FsPath(src).read_text() if FsPath(src).exists() else src
    base = wv.BaseLieAlgebra.from_json(json.loads(text))
    bad = {k: v for k, v in base.defects().items() if v > 1e-12}
    if bad:
        raise UsageError(f"base algebra fails its axioms: {bad}")
    return base


def cmd_wrap(a) -> int:
    r = a.r
    base = _load_base(a.base)
    if a.op == "witt":
        tab = wv.witt_bracket(a.k, a.j, a.m_max, r)
        ok = all(x == y for x, y in tab.values())
        emit({"k": a.k, "j": a.j, "holds": ok, "table": {m: {"lhs": x, "rhs": y} for m, (x, y) in tab.items()}}, a.out)
        return 0 if ok else 1
    if a.op == "virasoro":
        (idx, coef), cc = wv.virasoro_bracket(a.k, None, a.j, None)
        emit({"d_index": idx, "d_coeff": coef, "c_coeff": cc}, a.out)
        return 0
    if a.P is None or a.Q is None:
        raise UsageError(f"wrap {a.op} needs --P and --Q")
    xa = _base_vec(a.x, base)
    ya = _base_vec(a.y, base)
    A = wv.WrapElement.pure(parse_phrase_text(a.P, r), xa, a.ku)
    B = wv.WrapElement.pure(parse_phrase_text(a.Q, r), ya, a.kv)
    z0 = parse_cd(a.at, r)
    if a.op == "bracket":
        out = wv.wrap_bracket(A, B, base)
        emit({"states": [{"P": format_phrase_text(s.P), "x": list(s.x), "unit": [s.u.sign, s.u.k]} for s in out.states]}, a.out)
        return 0
    M = parse_cd(a.M, r)
    emit({"cocycle": wv.cocycle(z0, A, B, M, base)}, a.out)
    return 0


def _base_vec(src: str, base: wv.BaseLieAlgebra) -> list[float]:
    if src in base.names:
        return list(base.unit(base.names.index(src)))
    vals = json.loads(src)
    if len(vals) != base.dim:
        raise UsageError(f"base vector needs {base.dim} components")
    return [float(v) for v in vals]


def cmd_suite(a) -> int:
    if a.name not in SUITES:
        sys.stderr.write(f"unknown suite {a.name!r}; choose from {', '.join(SUITES)}\n")
        return 2
    kw = {}
    if a.cases is not None:
        if a.name not in ("residue-oracle", "residue-theorem", "cocycle"):
            raise UsageError("--cases applies to residue-oracle, residue-theorem and cocycle")
        kw["cases"] = a.cases
    res = run_suite(a.name, seed=a.seed, tol=a.tol, **kw)
    emit(res.to_json(), a.out)
    sys.stderr.write(f"{res.name}: {'PASS' if res.ok else 'FAIL'} ({res.seconds:.2f} s)\n")
    return 0 if res.ok else 1


# -- argument parsing ---------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="octowrap", description="Octonion residue calculus, Cartan data and wrap algebras.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, level=True):
        if level:
            p.add_argument("--r", type=int, default=3, choices=[0, 1, 2, 3], help="Cayley-Dickson level (default 3)")
        p.add_argument("--out", help="write JSON here instead of stdout")
        return p

    p = common(sub.add_parser("cd", help="arithmetic in A_r"))
    p.add_argument("op", choices=["mul", "inv", "conj", "norm", "exp", "ln", "assoc", "moufang", "table"])
    p.add_argument("x", nargs="?", default="1")
    p.add_argument("y", nargs="?")
    p.add_argument("z", nargs="?")
    p.set_defaults(fn=cmd_cd)

    p = common(sub.add_parser("phrase", help="parse, print, differentiate or evaluate a phrase"))
    p.add_argument("phrase")
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--derivative", metavar="H", help="directional derivative (dp/dz).H")
    p.add_argument("--D", action="store_true", help="(dp/dz).1")
    p.add_argument("--eval", metavar="Z")
    p.set_defaults(fn=cmd_phrase)

    p = common(sub.add_parser("integrate", help="line integral along a JSON path"))
    p.add_argument("phrase")
    p.add_argument("--path", required=True, help="path JSON or a file containing it")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(fn=cmd_integrate)

    p = common(sub.add_parser("residue", help="residue at a point along a direction M"))
    p.add_argument("phrase")
    p.add_argument("--at", default="0")
    p.add_argument("--M", required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--symbolic", dest="mode", action="store_const", const="symbolic")
    g.add_argument("--numeric", dest="mode", action="store_const", const="numeric")
    g.add_argument("--both", dest="mode", action="store_const", const="both")
    p.set_defaults(mode="symbolic")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(fn=cmd_residue)

    p = common(sub.add_parser("cartan", help="realization, symmetrization and form for a GCM"), level=False)
    p.add_argument("matrix", help="JSON matrix, file, or corpus name such as 'A1(1)'")
    p.set_defaults(fn=cmd_cartan)

    p = common(sub.add_parser("eta", help="relations of the truncated tensor representation"), level=False)
    p.add_argument("matrix")
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--height", type=int, default=0, help="also tabulate root grades up to this height")
    p.set_defaults(fn=cmd_eta)

    p = common(sub.add_parser("wrap", help="wrap bracket, cocycle, Witt and Virasoro tables"))
    p.add_argument("op", choices=["bracket", "cocycle", "witt", "virasoro"])
    p.add_argument("--P")
    p.add_argument("--Q")
    p.add_argument("--x", default="E")
    p.add_argument("--y", default="F")
    p.add_argument("--ku", type=int, default=0, help="unit index of the first state")
    p.add_argument("--kv", type=int, default=0, help="unit index of the second state")
    p.add_argument("--at", default="0")
    p.add_argument("--M", default="i1")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--j", type=int, default=-1)
    p.add_argument("--m-max", type=int, default=8)
    p.add_argument("--base", help="base algebra JSON {dim, struct_consts, form}; default sl2")
    p.set_defaults(fn=cmd_wrap)

    p = sub.add_parser("suite", help="run a named verification suite")
    p.add_argument("name", help=", ".join(SUITES))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float)
    p.add_argument("--cases", type=int)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_suite)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return a.fn(a)
    except (QuadratureError, ResidueRuleError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except (UsageError, ValueError, KeyError, FileNotFoundError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
