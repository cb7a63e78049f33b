"""The auxiliary algebra eta(A) acting on a truncated tensor module.

Words v_{j_1} (x) ... (x) v_{j_k} with k <= D form the basis.  Generators act by
    f_j(a) = v_j (x) a,
    h(1) = <lam, h> 1,   h(v_j (x) a) = -<beta_j, h> v_j (x) a + v_j (x) h(a),
    e_j(1) = 0,          e_k(v_j (x) a) = delta_kj gamma_k(a) + v_j (x) e_k(a).
Only real generators are represented, so every matrix is rational and the
checks below are exact.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement, product
from typing import Iterable, Sequence

import numpy as np

from octowrap.cartan import Realization, realize

Q = Fraction
BASIS_BUDGET = 10 ** 5


# -- sparse exact matrices ----------------------------------------------------

class SparseQ:
    """Square sparse matrix with Fraction entries, stored as column -> {row: value}."""

    __slots__ = ("size", "cols")

    def __init__(self, size: int, cols: dict | None = None):
        self.size = size
        self.cols: dict[int, dict[int, Fraction]] = cols or {}

    @classmethod
    def diag(cls, values: Sequence) -> "SparseQ":
        return cls(len(values), {i: {i: Q(v)} for i, v in enumerate(values) if v != 0})

    @classmethod
    def identity(cls, size: int) -> "SparseQ":
        return cls.diag([1] * size)

    def add_entry(self, row: int, col: int, val) -> None:
        if val == 0:
            return
        c = self.cols.setdefault(col, {})
        v = c.get(row, 0) + val
        if v == 0:
            c.pop(row, None)
            if not c:
                del self.cols[col]
        else:
            c[row] = v

    def __matmul__(self, other: "SparseQ") -> "SparseQ":
        out: dict[int, dict[int, Fraction]] = {}
        for j, col in other.cols.items():
            acc: dict[int, Fraction] = {}
            for k, b in col.items():
                for i, a in self.cols.get(k, {}).items():
                    acc[i] = acc.get(i, 0) + a * b
            acc = {i: v for i, v in acc.items() if v != 0}
            if acc:
                out[j] = acc
        return SparseQ(self.size, out)

    def _combine(self, other: "SparseQ", s) -> "SparseQ":
        out = {j: dict(c) for j, c in self.cols.items()}
        res = SparseQ(self.size, out)
        for j, col in other.cols.items():
            for i, v in col.items():
                res.add_entry(i, j, s * v)
        return res

    def __add__(self, other: "SparseQ") -> "SparseQ":
        return self._combine(other, 1)

    def __sub__(self, other: "SparseQ") -> "SparseQ":
        return self._combine(other, -1)

    def scale(self, s) -> "SparseQ":
        s = Q(s)
        if s == 0:
            return SparseQ(self.size)
        return SparseQ(self.size, {j: {i: v * s for i, v in c.items()} for j, c in self.cols.items()})

    def restrict_cols(self, keep: Iterable[int]) -> "SparseQ":
        keep = set(keep)
        return SparseQ(self.size, {j: c for j, c in self.cols.items() if j in keep})

    def max_abs(self) -> Fraction:
        return max((abs(v) for c in self.cols.values() for v in c.values()), default=Q(0))

    def nnz(self) -> int:
        return sum(len(c) for c in self.cols.values())

    def entry(self, i: int, j: int) -> Fraction:
        return self.cols.get(j, {}).get(i, Q(0))

    def apply(self, vec: dict[int, Fraction]) -> dict[int, Fraction]:
        out: dict[int, Fraction] = {}
        for j, x in vec.items():
            for i, a in self.cols.get(j, {}).items():
                out[i] = out.get(i, 0) + a * x
        return {i: v for i, v in out.items() if v != 0}

    def to_dense(self) -> np.ndarray:
        M = np.zeros((self.size, self.size))
        for j, c in self.cols.items():
            for i, v in c.items():
                M[i, j] = float(v)
        return M

    def flat(self) -> dict[int, Fraction]:
        return {i * self.size + j: v for j, c in self.cols.items() for i, v in c.items()}

    def __eq__(self, other) -> bool:
        return isinstance(other, SparseQ) and (self - other).nnz() == 0


def commutator(a: SparseQ, b: SparseQ) -> SparseQ:
    return a @ b - b @ a


# -- tensor module ------------------------------------------------------------

@dataclass(frozen=True)
class TensorModule:
    n: int
    depth: int
    words: tuple
    index: dict = field(compare=False, hash=False)
    lam: tuple = ()

    @property
    def size(self) -> int:
        return len(self.words)

    def depth_of(self, i: int) -> int:
        return len(self.words[i])

    def interior(self, max_depth: int) -> list[int]:
        return [i for i, w in enumerate(self.words) if len(w) <= max_depth]


def _words(n: int, D: int) -> list[tuple]:
    out: list[tuple] = []
    for k in range(D + 1):
        out.extend(product(range(n), repeat=k))
    return out


@dataclass
class GeneratorAction:
    module: TensorModule
    R: Realization
    E: list
    F: list
    Hbasis: list

    def H(self, h: Sequence) -> SparseQ:
        """Action of h = sum_c h_c e_c (coordinate vector in h)."""
        acc = SparseQ(self.module.size)
        for c, x in enumerate(h):
            if x != 0:
                acc = acc + self.Hbasis[c].scale(x)
        return acc


def _pair(beta: Sequence, h: Sequence) -> Fraction:
    return sum((Q(a) * Q(b) for a, b in zip(beta, h)), Q(0))


def build_module(A, R: Realization | None = None, lam: Sequence | None = None, D: int = 3) -> GeneratorAction:
    """Matrices E_j, F_j and H(e_c) on words of length <= D.

    lam gives <lam, e_c> on the coordinate basis of h (default 0).
    """
    if D < 1:
        raise ValueError("depth must be at least 1")
    R = R or realize(A)
    n, dim = R.n, R.dim_h
    size = sum(n ** k for k in range(D + 1))
    if size > BASIS_BUDGET:
        raise ValueError(f"truncation budget: {size} basis words exceed {BASIS_BUDGET}")
    lam = tuple(Q(x) for x in (lam if lam is not None else [0] * dim))
    if len(lam) != dim:
        raise ValueError(f"lambda needs {dim} values, got {len(lam)}")
    words = _words(n, D)
    index = {w: i for i, w in enumerate(words)}
    M = TensorModule(n, D, tuple(words), index, lam)
    # weight of a word on each coordinate of h: lam_c - sum_t beta_{j_t}(e_c)
    roots = [[Q(x) for x in b] for b in R.roots]
    weight = []
    for w in words:
        wt = list(lam)
        for j in w:
            wt = [a - b for a, b in zip(wt, roots[j])]
        weight.append(wt)
    Hbasis = [SparseQ.diag([wt[c] for wt in weight]) for c in range(dim)]
    gamma_val = [[_pair(R.coroots[k], wt) for wt in weight] for k in range(n)]
    F = [SparseQ(size) for _ in range(n)]
    E = [SparseQ(size) for _ in range(n)]
    for i, w in enumerate(words):
        if len(w) < D:
            for j in range(n):
                F[j].add_entry(index[(j,) + w], i, Q(1))
        for t, k in enumerate(w):
            suffix = w[t + 1:]
            val = gamma_val[k][index[suffix]]
            if val:
                E[k].add_entry(index[w[:t] + suffix], i, val)
    return GeneratorAction(M, R, E, F, Hbasis)


@dataclass
class RelationReport:
    defects: dict

    @property
    def max_defect(self) -> Fraction:
        return max(self.defects.values(), default=Q(0))

    def ok(self) -> bool:
        return self.max_defect == 0

    def to_json(self) -> dict:
        return {k: float(v) for k, v in self.defects.items()}


def check_relations(G: GeneratorAction, R: Realization | None = None, max_depth: int | None = None) -> RelationReport:
    """Defining relations of eta(A) as matrix identities on words of length <= max_depth (default D-1)."""
    R = R or G.R
    n, dim = R.n, R.dim_h
    cols = G.module.interior(G.module.depth - 1 if max_depth is None else max_depth)
    units = [[Q(int(i == c)) for i in range(dim)] for c in range(dim)]
    d = {"[e,f]": Q(0), "[h,h]": Q(0), "[h,e]": Q(0), "[h,f]": Q(0)}

    def upd(key, m: SparseQ):
        d[key] = max(d[key], m.restrict_cols(cols).max_abs())

    for k in range(n):
        for j in range(n):
            lhs = commutator(G.E[k], G.F[j])
            rhs = G.H(R.coroots[j]) if k == j else SparseQ(G.module.size)
            upd("[e,f]", lhs - rhs)
    for a in range(dim):
        for b in range(a + 1, dim):
            upd("[h,h]", commutator(G.Hbasis[a], G.Hbasis[b]))
        for j in range(n):
            bj = _pair(R.roots[j], units[a])
            upd("[h,e]", commutator(G.Hbasis[a], G.E[j]) - G.E[j].scale(bj))
            upd("[h,f]", commutator(G.Hbasis[a], G.F[j]) + G.F[j].scale(bj))
    return RelationReport(d)


# -- root grading -------------------------------------------------------------

def _bracket_words(n: int, h: int) -> list[tuple]:
    return list(product(range(n), repeat=h))


def _left_normed(mats: list[SparseQ], word: tuple) -> SparseQ:
    acc = mats[word[0]]
    for j in word[1:]:
        acc = commutator(acc, mats[j])
    return acc


def _rank_sparse(vecs: list[dict]) -> int:
    """Exact rank of sparse rational vectors by incremental elimination."""
    basis: list[tuple[int, dict]] = []
    for v in vecs:
        v = dict(v)
        for piv, b in basis:
            c = v.get(piv)
            if c:
                for k, x in b.items():
                    y = v.get(k, 0) - c * x
                    if y:
                        v[k] = y
                    else:
                        v.pop(k, None)
        if v:
            piv = min(v)
            inv = 1 / v[piv]
            b = {k: x * inv for k, x in v.items()}
            basis.append((piv, b))
    return len(basis)


def root_grade(G: GeneratorAction, R: Realization | None = None, H_max: int = 2, side: str = "e") -> dict[tuple, int]:
    """Dimension of the span of left-normed brackets of height <= H_max, keyed by root coefficients."""
    if H_max > G.module.depth - 1:
        raise ValueError("H_max must not exceed depth - 1")
    mats = G.E if side == "e" else G.F
    n = G.module.n
    out: dict[tuple, int] = {}
    for h in range(1, H_max + 1):
        groups: dict[tuple, list[dict]] = {}
        for w in _bracket_words(n, h):
            key = tuple(w.count(j) for j in range(n))
            if side == "f":
                key = tuple(-k for k in key)
            groups.setdefault(key, []).append(_left_normed(mats, w).flat())
        for key, vecs in sorted(groups.items()):
            out[key] = _rank_sparse(vecs)
    return out


def mult_bound_holds(table: dict[tuple, int], n: int) -> bool:
    return all(dim <= (2 * n) ** abs(sum(k)) for k, dim in table.items())


# -- Chevalley involution on formal bracket words -----------------------------

@dataclass(frozen=True)
class Word:
    """coeff * tree, tree = ("e", j) | ("f", j) | ("h", label) | (left_tree, right_tree)."""

    coeff: Fraction
    tree: tuple

    def __str__(self) -> str:
        return f"{self.coeff}*{_tree_str(self.tree)}"


def _is_leaf(t) -> bool:
    return isinstance(t[0], str)


def _tree_str(t) -> str:
    if _is_leaf(t):
        return f"{t[0]}{t[1]}"
    return f"[{_tree_str(t[0])},{_tree_str(t[1])}]"


def _omega_tree(t) -> tuple[int, tuple]:
    if _is_leaf(t):
        kind, j = t
        return -1, ({"e": "f", "f": "e", "h": "h"}[kind], j)
    s1, a = _omega_tree(t[0])
    s2, b = _omega_tree(t[1])
    return s1 * s2, (a, b)


def chevalley_involution(word: Word) -> Word:
    """e_j -> -f_j, f_j -> -e_j, h -> -h, extended as a bracket homomorphism."""
    s, t = _omega_tree(word.tree)
    return Word(word.coeff * s, t)


def word_matrix(word: Word, G: GeneratorAction) -> SparseQ:
    def rec(t):
        if _is_leaf(t):
            kind, j = t
            if kind == "e":
                return G.E[j]
            if kind == "f":
                return G.F[j]
            return G.H(j)
        return commutator(rec(t[0]), rec(t[1]))

    return rec(word.tree).scale(word.coeff)


# -- Casimir for A = 0 --------------------------------------------------------

@dataclass
class CasimirReport:
    commutator_defect: Fraction
    vacuum_value: Fraction
    expected: Fraction
    highest_weight_ok: bool

    def ok(self) -> bool:
        return self.commutator_defect == 0 and self.vacuum_value == self.expected and self.highest_weight_ok


def heisenberg_data(n: int, lam_gamma: Sequence, lam_d: Sequence) -> tuple[Realization, list[list[Fraction]], list[list[Fraction]], tuple]:
    """Realization of the zero n x n matrix with gamma_j = e_{n+j} and d_j = e_j.

    Returns (R, gammas, ds, lam) with lam the coordinate vector of the weight.
    """
    A = [[0] * n for _ in range(n)]
    R = realize(A)
    dim = R.dim_h
    gammas = [list(map(Q, g)) for g in R.coroots]
    ds = [[Q(int(c == j)) for c in range(dim)] for j in range(n)]
    lam = [Q(0)] * dim
    # solve <lam, gamma_j>, <lam, d_j> for the coordinate values
    for j in range(n):
        lam[j] = Q(lam_d[j])
    for j in range(n):
        c = next(i for i, x in enumerate(gammas[j]) if x != 0)
        lam[c] = Q(lam_gamma[j]) / gammas[j][c]
    return R, gammas, ds, tuple(lam)


def heisenberg_module(n: int, lam: Sequence, R: Realization, D: int = 4) -> GeneratorAction:
    """Symmetric quotient of T(V) for A = 0: monomials in v_1..v_n of degree <= D.

    In g(0) the f_j commute, so the words collapse to sorted tuples; e_k acts as
    <lam, gamma_k> times differentiation in v_k.
    """
    size = sum(_multisets(n, k) for k in range(D + 1))
    if size > BASIS_BUDGET:
        raise ValueError(f"truncation budget: {size} basis words exceed {BASIS_BUDGET}")
    words = [w for k in range(D + 1) for w in combinations_with_replacement(range(n), k)]
    index = {w: i for i, w in enumerate(words)}
    lam = tuple(Q(x) for x in lam)
    M = TensorModule(n, D, tuple(words), index, lam)
    roots = [[Q(x) for x in b] for b in R.roots]
    weight = []
    for w in words:
        wt = list(lam)
        for j in w:
            wt = [a - b for a, b in zip(wt, roots[j])]
        weight.append(wt)
    Hbasis = [SparseQ.diag([wt[c] for wt in weight]) for c in range(R.dim_h)]
    F = [SparseQ(size) for _ in range(n)]
    E = [SparseQ(size) for _ in range(n)]
    for i, w in enumerate(words):
        if len(w) < D:
            for j in range(n):
                F[j].add_entry(index[tuple(sorted((j,) + w))], i, Q(1))
        for k in set(w):
            rest = list(w)
            rest.remove(k)
            val = w.count(k) * _pair(R.coroots[k], weight[index[tuple(rest)]])
            if val:
                E[k].add_entry(index[tuple(rest)], i, val)
    return GeneratorAction(M, R, E, F, Hbasis)


def _multisets(n: int, k: int) -> int:
    from math import comb

    return comb(n + k - 1, k)


def heisenberg_casimir(n: int, lam_gamma: Sequence, lam_d: Sequence, D: int = 4) -> CasimirReport:
    """Omega = 2 sum_j gamma_j d_j + 2 sum_j f_j e_j on the A = 0 module.

    Commutators with every E_k, F_k and basis H are checked on words of length
    <= D-2.  On the vacuum Omega(1) = (lam | lam) with (gamma_j | d_j) = 1 and rho = 0.
    """
    R, gammas, ds, lam = heisenberg_data(n, lam_gamma, lam_d)
    G = heisenberg_module(n, lam, R, D)
    size = G.module.size
    Om = SparseQ(size)
    for j in range(n):
        Om = Om + (G.H(gammas[j]) @ G.H(ds[j])).scale(2) + (G.F[j] @ G.E[j]).scale(2)
    cols = G.module.interior(D - 2)
    defect = Q(0)
    for X in list(G.E) + list(G.F) + list(G.Hbasis):
        defect = max(defect, commutator(Om, X).restrict_cols(cols).max_abs())
    vac = G.module.index[()]
    value = Om.entry(vac, vac)
    expected = casimir_on_highest(lam_gamma, lam_d)
    hw = all(not E.cols.get(vac) for E in G.E) and set(Om.cols.get(vac, {})) <= {vac}
    return CasimirReport(defect, value, expected, hw)


def casimir_on_highest(lam_gamma: Sequence, lam_d: Sequence) -> Fraction:
    """(b + 2 rho | b) with rho = 0 under the pairing (gamma_j | d_j) = 1."""
    return 2 * sum((Q(a) * Q(b) for a, b in zip(lam_gamma, lam_d)), Q(0))


# -- Omega_2 ------------------------------------------------------------------

@dataclass(frozen=True)
class BaseAlgebra:
    """Finite-dimensional real Lie algebra with structure constants and an invariant form."""

    names: tuple
    struct: tuple  # struct[a][b] = coordinates of [x_a, x_b]
    gram: tuple

    @property
    def dim(self) -> int:
        return len(self.names)

    def bracket(self, x: Sequence, y: Sequence) -> list[Fraction]:
        out = [Q(0)] * self.dim
        for a, xa in enumerate(x):
            if not xa:
                continue
            for b, yb in enumerate(y):
                if not yb:
                    continue
                s = Q(xa) * Q(yb)
                for c, v in enumerate(self.struct[a][b]):
                    if v:
                        out[c] += s * v
        return out

    def form(self, x: Sequence, y: Sequence) -> Fraction:
        return sum((Q(x[a]) * self.gram[a][b] * Q(y[b]) for a in range(self.dim) for b in range(self.dim)), Q(0))

    def unit(self, a: int) -> list[Fraction]:
        return [Q(int(i == a)) for i in range(self.dim)]


def _algebra(names, brackets: dict, gram_pairs: dict) -> BaseAlgebra:
    m = len(names)
    idx = {nm: i for i, nm in enumerate(names)}
    S = [[[Q(0)] * m for _ in range(m)] for _ in range(m)]
    for (a, b), res in brackets.items():
        for nm, v in res.items():
            S[idx[a]][idx[b]][idx[nm]] += v
            S[idx[b]][idx[a]][idx[nm]] -= v
    Gm = [[Q(0)] * m for _ in range(m)]
    for (a, b), v in gram_pairs.items():
        Gm[idx[a]][idx[b]] = Gm[idx[b]][idx[a]] = Q(v)
    return BaseAlgebra(tuple(names), tuple(tuple(tuple(c) for c in row) for row in S), tuple(tuple(r) for r in Gm))


def heisenberg_algebra(n: int = 1) -> BaseAlgebra:
    """Real part of g(0): e_j, f_j, gamma_j, d_j with (e_j|f_j) = (gamma_j|d_j) = 1."""
    names = [f"{k}{j}" for j in range(1, n + 1) for k in ("e", "f", "g", "d")]
    br: dict = {}
    gp: dict = {}
    for j in range(1, n + 1):
        br[(f"e{j}", f"f{j}")] = {f"g{j}": 1}
        br[(f"d{j}", f"e{j}")] = {f"e{j}": 1}
        br[(f"d{j}", f"f{j}")] = {f"f{j}": -1}
        gp[(f"e{j}", f"f{j}")] = 1
        gp[(f"g{j}", f"d{j}")] = 1
    return _algebra(names, br, gp)


def sl2_algebra() -> BaseAlgebra:
    """sl_2 with the trace form: (e|f) = 1, (h|h) = 2."""
    return _algebra(
        ["e", "f", "h"],
        {("h", "e"): {"e": 2}, ("h", "f"): {"f": -2}, ("e", "f"): {"h": 1}},
        {("e", "f"): 1, ("h", "h"): 2},
    )


def dual_basis(alg: BaseAlgebra, xs: Sequence[Sequence]) -> list[list[Fraction]]:
    """y_k with (x_j | y_k) = delta_jk."""
    from octowrap.cartan import inv_q

    M = [[alg.form(x, alg.unit(b)) for b in range(alg.dim)] for x in xs]
    Mi = inv_q(M)
    return [[Mi[b][k] for b in range(alg.dim)] for k in range(len(xs))]


@dataclass
class Omega2Report:
    defect: Fraction

    def ok(self) -> bool:
        return self.defect == 0


def omega2_check(alg: BaseAlgebra, xs: Sequence[Sequence], ys: Sequence[Sequence]) -> Omega2Report:
    """sum_j [z, x_j] (x) y_j + x_j (x) [z, y_j] = 0 for every basis element z."""
    m = alg.dim
    if len(xs) != m or len(ys) != m:
        raise ValueError("dual bases must have dim elements each")
    for j in range(m):
        for k in range(m):
            if alg.form(xs[j], ys[k]) != (1 if j == k else 0):
                raise ValueError("non-dual bases: (x_j | y_k) is not the identity")
    worst = Q(0)
    for a in range(m):
        z = alg.unit(a)
        T = [[Q(0)] * m for _ in range(m)]
        for x, y in zip(xs, ys):
            zx = alg.bracket(z, x)
            zy = alg.bracket(z, y)
            for p in range(m):
                for q in range(m):
                    T[p][q] += zx[p] * Q(y[q]) + Q(x[p]) * zy[q]
        worst = max(worst, max(abs(v) for row in T for v in row))
    return Omega2Report(worst)
