"""Named verification suites shared by the command line and the acceptance tests."""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from octowrap import cartan as ct
from octowrap import eta_rep as er
from octowrap import wrap_virasoro as wv
from octowrap.cayley_dickson import CayleyNumber, Direction, make_table, moufang_batch, mul_batch
from octowrap.contour import (
    PlaneCircle,
    Polyline,
    ResidueRuleError,
    cauchy_eval,
    closed_form_suite,
    global_residue_sum,
    residue_basis,
    residue_from_basis,
    residue_numeric,
    residue_symbolic,
    residue_theorem_check,
)
from octowrap.phrase import BracketTree, Factor, Phrase, Term

SUITES = ("moufang", "closed-forms", "residue-oracle", "residue-theorem", "cartan",
          "eta-relations", "casimir", "cocycle", "witt-virasoro")


@dataclass
class SuiteResult:
    name: str
    ok: bool
    rows: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    seconds: float = 0.0

    def to_json(self) -> dict:
        return {"suite": self.name, "ok": self.ok, "seconds": self.seconds, "summary": self.summary, "rows": self.rows}


def threads() -> int:
    try:
        return max(1, int(os.environ.get("OCTO_WRAP_THREADS", "1")))
    except ValueError:
        return 1


def pmap(fn: Callable, items: list) -> list:
    """Ordered map, optionally over a thread pool capped by OCTO_WRAP_THREADS."""
    n = threads()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


# -- random corpora -----------------------------------------------------------

def _unit_imag(rng: np.random.Generator, r: int) -> CayleyNumber:
    v = rng.normal(size=1 << r)
    v[0] = 0.0
    return CayleyNumber(r, v / np.linalg.norm(v))


def _coeff(rng: np.random.Generator, r: int, M: CayleyNumber, kind: str) -> CayleyNumber:
    v = rng.normal(size=1 << r)
    m = M.to_float().coords
    if kind == "plane":
        return CayleyNumber(r, v[0] * np.eye(1 << r)[0] + v[1] * m)
    if kind == "orth":
        v[0] = 0.0
        v = v - np.dot(v, m) * m
        return CayleyNumber(r, v)
    return CayleyNumber(r, v)


def _random_tree(rng: np.random.Generator, n: int) -> BracketTree:
    def build(k):
        if k == 1:
            return "."
        s = int(rng.integers(1, k))
        return (build(s), build(k - s))

    return BracketTree(build(n))


def random_reducible_phrase(rng: np.random.Generator, r: int, z0: CayleyNumber, M: CayleyNumber) -> Phrase:
    """Laurent phrase about z0 on which the symbolic residue rule applies.

    Terms are simple poles a (z - z0)^-1 b (optionally times a factor centred
    elsewhere) or products of powers centred at z0 with at most one
    coefficient mixing the plane of M and its orthogonal complement.
    """
    terms = []
    for _ in range(int(rng.integers(1, 4))):
        if rng.random() < 0.4:
            far = z0 + CayleyNumber(r, np.concatenate([[1.5], np.zeros((1 << r) - 1)])) if rng.random() < 0.5 else None
            if far is None:
                terms.append(Term.make([_coeff(rng, r, M, "gen"), _coeff(rng, r, M, "gen")], [Factor(-1, bool(rng.random() < 0.3), z0)]))
            else:
                cs = [_coeff(rng, r, M, "gen") for _ in range(3)]
                fs = [Factor(-1, False, z0), Factor(int(rng.choice([-1, 1, 2])), False, far)]
                if rng.random() < 0.5:
                    fs.reverse()
                terms.append(Term.make(cs, fs, _random_tree(rng, 5)))
            continue
        nf = int(rng.integers(1, 3))
        while True:
            exps = [int(rng.integers(-2, 3)) for _ in range(nf)]
            if -2 <= sum(exps) <= 3:
                break
        kinds = [str(rng.choice(["plane", "orth"])) for _ in range(nf + 1)]
        if rng.random() < 0.5:
            kinds[int(rng.integers(0, nf + 1))] = "gen"
        cs = [_coeff(rng, r, M, k) for k in kinds]
        fs = [Factor(e, bool(rng.random() < 0.3), z0) for e in exps]
        tree = _random_tree(rng, 2 * nf + 1) if rng.random() < 0.5 else None
        terms.append(Term.make(cs, fs, tree))
    return Phrase(r, tuple(terms))


def reducible_corpus(seed: int, count: int, levels=(2, 3)) -> list[tuple[Phrase, CayleyNumber, CayleyNumber]]:
    """(phrase, z0, M) triples accepted by residue_symbolic, alternating levels."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        r = levels[len(out) % len(levels)]
        z0 = CayleyNumber(r, rng.normal(scale=0.5, size=1 << r)) if rng.random() < 0.5 else CayleyNumber.zero(r)
        M = CayleyNumber.generator(r, int(rng.integers(1, 1 << r))) if rng.random() < 0.5 else _unit_imag(rng, r)
        p = random_reducible_phrase(rng, r, z0, M)
        try:
            residue_symbolic(p, z0, M)
        except ResidueRuleError:
            continue
        out.append((p, z0, M))
    return out


# -- suites -------------------------------------------------------------------

def suite_moufang(seed: int = 0, tol: float = 1e-12, n: int = 10_000) -> SuiteResult:
    rng = np.random.default_rng(seed)
    r = 3
    x, y, z = (rng.normal(size=(n, 8)) for _ in range(3))
    m = lambda a, b: mul_batch(a, b, r)
    moufang = float(np.max(moufang_batch(x, y, z, r)))
    alt_l = float(np.max(np.abs(m(m(x, x), y) - m(x, m(x, y)))))
    alt_r = float(np.max(np.abs(m(m(y, x), x) - m(y, m(x, x)))))
    nx, ny = np.linalg.norm(x, axis=1), np.linalg.norm(y, axis=1)
    norm = float(np.max(np.abs(np.linalg.norm(m(x, y), axis=1) - nx * ny)))
    # integer quaternions: float products are exact, so the associator must vanish exactly
    q = [rng.integers(-9, 10, size=(n, 4)).astype(float) for _ in range(3)]
    mq = lambda a, b: mul_batch(a, b, 2)
    qassoc = float(np.max(np.abs(mq(mq(q[0], q[1]), q[2]) - mq(q[0], mq(q[1], q[2])))))
    oct_t, quat_t = make_table(3), make_table(2)
    doubling = bool(np.array_equal(oct_t.sign[:4, :4], quat_t.sign) and np.array_equal(oct_t.index[:4, :4], quat_t.index))
    rows = [
        {"check": "moufang identities", "defect": moufang, "tol": tol},
        {"check": "left alternativity", "defect": alt_l, "tol": tol},
        {"check": "right alternativity", "defect": alt_r, "tol": tol},
        {"check": "norm multiplicativity", "defect": norm, "tol": tol},
        {"check": "quaternion associator (exact)", "defect": qassoc, "tol": 0.0},
        {"check": "octonion table restricted to quaternions", "defect": 0.0 if doubling else 1.0, "tol": 0.0},
    ]
    ok = all(row["defect"] <= row["tol"] for row in rows)
    return SuiteResult("moufang", ok, rows, {"triples": n})


def suite_closed_forms(tol: float = 1e-7, **_) -> SuiteResult:
    rows = closed_form_suite(tol=tol)
    ok = all(row.status == "pass" for row in rows)
    return SuiteResult("closed-forms", ok, [row.to_json() for row in rows], {"rows": len(rows)})


def suite_residue_oracle(seed: int = 0, tol: float = 1e-8, cases: int = 200, additivity_cases: int = 12) -> SuiteResult:
    corpus = reducible_corpus(seed, cases)

    def one(item):
        p, z0, M = item
        s = residue_symbolic(p, z0, M)
        nval = residue_numeric(p, z0, M)
        scale = max(1.0, s.norm())
        return {"level": p.level, "terms": len(p.terms), "defect": (s - nval).norm() / scale}

    rows = pmap(one, corpus)
    rng = np.random.default_rng(seed + 1)
    # R-homogeneity in f and I_r-additivity in M on generator combinations
    lin_rows = []
    for p, z0, M in corpus[:additivity_cases]:
        r = p.level
        lam = float(rng.uniform(-3, 3))
        h = (residue_numeric(p.scale(lam), z0, M) - residue_numeric(p, z0, M).scale(lam)).norm()
        basis = residue_basis(p, z0)
        W = _unit_imag(rng, r)
        a = (residue_numeric(p, z0, W) - residue_from_basis(basis, W)).norm()
        scale = max(1.0, max(b.norm() for b in basis))
        lin_rows.append({"level": r, "homogeneity": h / scale, "additivity": a / scale})
    worst = max(row["defect"] for row in rows)
    worst_lin = max(max(row["homogeneity"], row["additivity"]) for row in lin_rows) if lin_rows else 0.0
    ok = worst <= tol and worst_lin <= tol and len(rows) >= cases
    return SuiteResult("residue-oracle", ok, rows + lin_rows,
                       {"cases": len(rows), "max_defect": worst, "linearity_cases": len(lin_rows), "max_linearity_defect": worst_lin})


def _plane_test_function(rng: np.random.Generator, r: int, M: CayleyNumber, n_poles: int) -> Phrase:
    """Sum of a_j (z - p_j)^-1 b_j + a_j' (z - p_j)^-2 b_j' with poles in the plane R + M R."""
    terms = []
    for _ in range(n_poles):
        x, y = rng.uniform(-0.6, 0.6, size=2)
        p = CayleyNumber.real(r, float(x)) + M.scale(float(y))
        terms.append(Term.make([_coeff(rng, r, M, "gen"), _coeff(rng, r, M, "gen")], [Factor(-1, False, p)]))
        terms.append(Term.make([_coeff(rng, r, M, "plane"), _coeff(rng, r, M, "gen")], [Factor(-2, False, p)]))
    terms.append(Term.make([_coeff(rng, r, M, "gen"), _coeff(rng, r, M, "gen")], [Factor(2)]))
    return Phrase(r, tuple(terms))


def suite_residue_theorem(seed: int = 0, tol: float = 1e-7, cases: int = 4, cauchy_points: int = 20) -> SuiteResult:
    rng = np.random.default_rng(seed)
    rows = []
    for case in range(cases):
        r = 2 + case % 2
        M = CayleyNumber.generator(r, 1 + case % ((1 << r) - 1))
        f = _plane_test_function(rng, r, M, 3)
        loop = PlaneCircle(CayleyNumber.zero(r), 1.5, Direction(M), 1 if case % 2 == 0 else -1)
        rep = residue_theorem_check(f, loop)
        rows.append({"check": "residue theorem", "level": r, "defect": rep.defect, "tol": tol})
        sq = [CayleyNumber.real(r, a) + M.scale(b) for a, b in [(-1.4, -1.3), (1.3, -1.4), (1.4, 1.2), (-1.2, 1.4), (-1.4, -1.3)]]
        rep = residue_theorem_check(f, Polyline(tuple(sq)))
        rows.append({"check": "residue theorem (square)", "level": r, "defect": rep.defect, "tol": tol})
        rep = global_residue_sum(f, M)
        rows.append({"check": "global residue sum with infinity", "level": r, "defect": rep.defect, "tol": tol})
    # Cauchy-type reconstruction for a polynomial with plane coefficients
    r = 3
    M = CayleyNumber.generator(r, 5)
    poly = Phrase(r, tuple(Term.make([_coeff(rng, r, M, "plane"), _coeff(rng, r, M, "plane")], [Factor(k)]) for k in range(4)))
    circle = PlaneCircle(CayleyNumber.zero(r), 1.0, Direction(M))
    worst = 0.0
    for _ in range(cauchy_points):
        rad, th = rng.uniform(0, 0.8), rng.uniform(0, 2 * math.pi)
        z = CayleyNumber.real(r, rad * math.cos(th)) + M.scale(rad * math.sin(th))
        worst = max(worst, (cauchy_eval(poly, z, circle) - poly.eval(z)).norm())
    rows.append({"check": "cauchy formula", "level": r, "points": cauchy_points, "defect": worst, "tol": tol})
    ok = all(row["defect"] <= row["tol"] for row in rows)
    return SuiteResult("residue-theorem", ok, rows, {"cases": cases})


def suite_cartan(**_) -> SuiteResult:
    rows = []
    for name, A in ct.AFFINE_CORPUS.items():
        n = len(A)
        R = ct.realize(A)
        pairing = ct.verify_realization(R)
        det = ct.det_q(A)
        hand = det == 0 and all(m > 0 for m in ct.leading_minors(A)[:-1])
        classified = ct.classify_affine(A) and ct.classify_affine(A, minors="all")
        S = ct.symmetrize(A)
        DB = [[S.d[i] * S.B[i][j] for j in range(n)] for i in range(n)]
        sym = DB == [[Fraction(x) for x in row] for row in A] and [list(row) for row in S.B] == ct.transpose(S.B) and all(d > 0 for d in S.d)
        F = ct.form_on_h(R, S)
        roundtrip = ct.cartan_from_form(F) == [[Fraction(x) for x in row] for row in A]
        center = len(ct.center_basis(A, R)) == n - R.l
        row = {"matrix": name, "n": n, "pairing": pairing, "affine": classified == hand and hand,
               "symmetrization": sym, "form_roundtrip": roundtrip, "center_dim": center}
        row["ok"] = all(v for k, v in row.items() if isinstance(v, bool))
        rows.append(row)
    return SuiteResult("cartan", all(r["ok"] for r in rows), rows, {"matrices": len(rows)})


def suite_eta_relations(D: int = 4, max_n: int = 3, height: int = 3, **_) -> SuiteResult:
    rows = []
    for name, A in ct.AFFINE_CORPUS.items():
        n = len(A)
        if n > max_n:
            continue
        R = ct.realize(A)
        G = er.build_module(A, R, D=D)
        rep = er.check_relations(G, R)
        bound = True
        for side in ("e", "f"):
            bound = bound and er.mult_bound_holds(er.root_grade(G, R, min(height, D - 1), side), n)
        rows.append({"matrix": name, "n": n, "words": G.module.size, "defects": rep.to_json(),
                     "relations_exact": rep.ok(), "mult_bound": bound})
    ok = all(r["relations_exact"] and r["mult_bound"] for r in rows)
    return SuiteResult("eta-relations", ok, rows, {"depth": D})


def suite_casimir(D: int = 4, **_) -> SuiteResult:
    rows = []
    cases = [(1, [2], [3]), (1, [Fraction(1, 2)], [-1]), (2, [1, 2], [3, -1]), (2, [0, 1], [Fraction(5, 3), 2])]
    for n, lg, ld in cases:
        rep = er.heisenberg_casimir(n, lg, ld, D=D)
        rows.append({"n": n, "lambda_gamma": [str(x) for x in lg], "lambda_d": [str(x) for x in ld],
                     "commutator_defect": str(rep.commutator_defect), "vacuum": str(rep.vacuum_value),
                     "expected": str(rep.expected), "ok": rep.ok()})
    return SuiteResult("casimir", all(r["ok"] for r in rows), rows, {"depth": D})


def suite_cocycle(seed: int = 0, tol: float = 1e-9, cases: int = 100) -> SuiteResult:
    rows = wv.cocycle_identity_suite(cases=cases, seed=seed)
    summary = wv.suite_summary(rows)
    ok = all(v["max_defect"] <= tol and v["cases"] >= cases for v in summary.values())
    return SuiteResult("cocycle", ok, [row.to_json() for row in rows], summary)


def suite_witt_virasoro(kmax: int = 5, m_max: int = 8, **_) -> SuiteResult:
    rows = []
    for k in range(-kmax, kmax + 1):
        for j in range(-kmax, kmax + 1):
            rows.append({"k": k, "j": j, "witt": wv.witt_holds(k, j, m_max)})
    r = 3
    central = {}
    for j in range(-kmax, kmax + 1):
        out = wv.virasoro_element_bracket(wv.VirasoroElement.basis(r, j), wv.VirasoroElement.basis(r, -j))
        central[j] = out.central().re
    # Jacobi identity of the centrally extended bracket pins the central term
    jac = 0.0
    for a in range(-kmax, kmax + 1):
        for b in range(-kmax, kmax + 1):
            for c in range(-kmax, kmax + 1):
                jac = max(jac, _virasoro_jacobi(a, b, c))
    formula = all(abs(central[j] - (j ** 3 - j) / 12) == 0 for j in central)
    # real-scalar compatibility: [p beta d_j, d_k] = [p d_j, beta d_k]
    rng = np.random.default_rng(0)
    scal = 0.0
    for _ in range(20):
        p = float(rng.normal())
        beta = CayleyNumber(r, rng.normal(size=8))
        j, k = (int(x) for x in rng.integers(-kmax, kmax + 1, size=2))
        lhs = wv.virasoro_element_bracket(wv.VirasoroElement.basis(r, j, beta.scale(p)), wv.VirasoroElement.basis(r, k))
        rhs = wv.virasoro_element_bracket(wv.VirasoroElement.basis(r, j, p), wv.VirasoroElement.basis(r, k, beta))
        diff = (lhs.central() - rhs.central()).norm()
        for idx in set(lhs.coeffs()) | set(rhs.coeffs()):
            zero = CayleyNumber.zero(r)
            diff = max(diff, (lhs.coeffs().get(idx, zero) - rhs.coeffs().get(idx, zero)).norm())
        scal = max(scal, diff)
    ok = all(row["witt"] for row in rows) and formula and jac == 0 and central.get(2) == 0.5 and scal <= 1e-12
    summary = {"witt_pairs": len(rows), "central": {str(j): central[j] for j in central},
               "jacobi_defect": jac, "scalar_compat_defect": scal}
    return SuiteResult("witt-virasoro", ok, rows, summary)


def _virasoro_jacobi(a: int, b: int, c: int) -> float:
    """Central and d-parts of [[d_a,d_b],d_c] + cyclic, with exact rational coefficients."""

    def br(j, k):
        (idx, coef), cc = wv.virasoro_bracket(j, None, k, None)
        return idx, Fraction(coef), cc

    d_part: dict[int, Fraction] = {}
    cen = Fraction(0)
    for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
        i1, c1, _ = br(x, y)
        i2, c2, cc2 = br(i1, z)
        d_part[i2] = d_part.get(i2, Fraction(0)) + c1 * c2
        cen += c1 * cc2
    return float(max([abs(cen)] + [abs(v) for v in d_part.values()]))


RUNNERS: dict[str, Callable[..., SuiteResult]] = {
    "moufang": suite_moufang,
    "closed-forms": suite_closed_forms,
    "residue-oracle": suite_residue_oracle,
    "residue-theorem": suite_residue_theorem,
    "cartan": suite_cartan,
    "eta-relations": suite_eta_relations,
    "casimir": suite_casimir,
    "cocycle": suite_cocycle,
    "witt-virasoro": suite_witt_virasoro,
}


def run_suite(name: str, seed: int = 0, tol: float | None = None, **kw) -> SuiteResult:
    if name not in RUNNERS:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    fn = RUNNERS[name]
    args = dict(kw)
    if name in ("moufang", "residue-oracle", "residue-theorem", "cocycle"):
        args["seed"] = seed
    if tol is not None and name in ("moufang", "closed-forms", "residue-oracle", "residue-theorem", "cocycle"):
        args["tol"] = tol
    t0 = time.perf_counter()
    res = fn(**args)
    res.seconds = time.perf_counter() - t0
    return res
