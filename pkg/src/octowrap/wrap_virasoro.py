"""Wrap algebra over a real base Lie algebra, the residue cocycle, d_l and Witt/Virasoro brackets.

A pure state P (x) x u carries a phrase P, a real base vector x and a signed
unit u = +-i_k.  Brackets multiply phrases, bracket base vectors and multiply
units; the cocycle is
    omega(z0; P x u, Q y v) = (Res(z0, (D P) Q).M) ((x|y) u v).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from typing import Sequence

import numpy as np

from octowrap.cayley_dickson import CayleyNumber, Direction, make_table, mul
from octowrap.contour import ResidueRuleError, residue_numeric, residue_symbolic
from octowrap.phrase import D, Factor, _center_eq, Phrase, Term, d_l, derivative, mul_phrases, normalize


# -- base algebra -------------------------------------------------------------

@dataclass(frozen=True)
class BaseLieAlgebra:
    names: tuple
    struct: np.ndarray  # struct[a, b, c]: coefficient of x_c in [x_a, x_b]
    form: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.names)

    def bracket(self, x, y) -> np.ndarray:
        return np.einsum("a,b,abc->c", np.asarray(x, float), np.asarray(y, float), self.struct)

    def pair(self, x, y) -> float:
        return float(np.asarray(x, float) @ self.form @ np.asarray(y, float))

    def unit(self, a: int) -> np.ndarray:
        e = np.zeros(self.dim)
        e[a] = 1.0
        return e

    def defects(self) -> dict[str, float]:
        """Antisymmetry, Jacobi and invariance defects of the structure data."""
        S, G = self.struct, self.form
        anti = float(np.max(np.abs(S + S.transpose(1, 0, 2))))
        jac = 0.0
        inv = 0.0
        for a in range(self.dim):
            for b in range(self.dim):
                for c in range(self.dim):
                    x, y, z = self.unit(a), self.unit(b), self.unit(c)
                    j = self.bracket(x, self.bracket(y, z)) + self.bracket(y, self.bracket(z, x)) + self.bracket(z, self.bracket(x, y))
                    jac = max(jac, float(np.max(np.abs(j))))
                    inv = max(inv, abs(self.pair(self.bracket(x, y), z) - self.pair(x, self.bracket(y, z))))
        return {"antisymmetry": anti, "jacobi": jac, "invariance": inv, "form_symmetry": float(np.max(np.abs(G - G.T)))}

    def to_json(self) -> dict:
        return {"dim": self.dim, "names": list(self.names), "struct_consts": self.struct.tolist(), "form": self.form.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "BaseLieAlgebra":
        S = np.asarray(obj["struct_consts"], float)
        G = np.asarray(obj["form"], float)
        m = int(obj["dim"])
        if S.shape != (m, m, m) or G.shape != (m, m):
            raise ValueError("struct_consts must be dim^3 and form dim^2")
        names = tuple(obj.get("names", [f"x{i}" for i in range(m)]))
        return cls(names, S, G)


def sl2() -> BaseLieAlgebra:
    """Basis (E, H, F): [H,E] = 2E, [H,F] = -2F, [E,F] = H; (E|F) = 1, (H|H) = 2."""
    S = np.zeros((3, 3, 3))
    E, H, F = 0, 1, 2
    for a, b, c, v in [(H, E, E, 2.0), (H, F, F, -2.0), (E, F, H, 1.0)]:
        S[a, b, c] = v
        S[b, a, c] = -v
    G = np.zeros((3, 3))
    G[E, F] = G[F, E] = 1.0
    G[H, H] = 2.0
    return BaseLieAlgebra(("E", "H", "F"), S, G)


# -- units --------------------------------------------------------------------

@dataclass(frozen=True)
class Unit:
    """sign * i_k."""

    k: int
    sign: int = 1

    def value(self, r: int) -> CayleyNumber:
        return CayleyNumber.generator(r, self.k).scale(self.sign) if self.k else CayleyNumber.real(r, float(self.sign))


def unit_mul(u: Unit, v: Unit, r: int) -> Unit:
    t = make_table(r)
    return Unit(int(t.index[u.k, v.k]), u.sign * v.sign * int(t.sign[u.k, v.k]))


def eta_sign(k: int, j: int) -> int:
    """0 if k = 0, j = 0 or k = j, else 1."""
    return 0 if (k == 0 or j == 0 or k == j) else 1


def xi_sign(k: int, j: int, s: int, r: int) -> int:
    """xi with i_k (i_j i_s) = (-1)^xi i_j (i_s i_k)."""
    lhs = unit_mul(Unit(k), unit_mul(Unit(j), Unit(s), r), r)
    rhs = unit_mul(Unit(j), unit_mul(Unit(s), Unit(k), r), r)
    if lhs.k != rhs.k:
        raise ValueError("units do not match")
    return 0 if lhs.sign == rhs.sign else 1


# -- wrap elements ------------------------------------------------------------

@dataclass(frozen=True)
class PureState:
    P: Phrase
    x: tuple
    u: Unit = Unit(0)

    def scaled(self, s: float) -> "PureState":
        return PureState(self.P.scale(s), self.x, self.u)


@dataclass(frozen=True)
class WrapElement:
    level: int
    states: tuple = ()

    @classmethod
    def pure(cls, P: Phrase, x: Sequence[float], k: int = 0, sign: int = 1) -> "WrapElement":
        return cls(P.level, (PureState(P, tuple(float(v) for v in x), Unit(k, sign)),))

    def __add__(self, other: "WrapElement") -> "WrapElement":
        _same_level(self.level, other.level)
        return WrapElement(self.level, self.states + other.states)

    def scale(self, s: float) -> "WrapElement":
        return WrapElement(self.level, tuple(st.scaled(s) for st in self.states))

    def __neg__(self) -> "WrapElement":
        return self.scale(-1.0)

    def __sub__(self, other: "WrapElement") -> "WrapElement":
        return self + (-other)

    def value(self, z: CayleyNumber, dim: int) -> np.ndarray:
        """Tensor sum_s (P_s(z) u_s) (x) x_s as a (dim, 2^r) array."""
        out = np.zeros((dim, 1 << self.level))
        for st in self.states:
            pv = mul(st.P.eval(z), st.u.value(self.level)).to_float().coords
            out += np.outer(np.asarray(st.x, float), pv)
        return out


def _same_level(a: int, b: int) -> None:
    if a != b:
        raise ValueError(f"level mismatch: {a} vs {b}")


def wrap_bracket(a: WrapElement, b: WrapElement, base: BaseLieAlgebra) -> WrapElement:
    """[P x u, Q y v]_0 = PQ (x) [x, y] uv, extended bilinearly."""
    _same_level(a.level, b.level)
    r = a.level
    out = []
    for s in a.states:
        for t in b.states:
            xy = base.bracket(s.x, t.x)
            if not np.any(xy):
                continue
            out.append(PureState(normalize(mul_phrases(s.P, t.P)), tuple(xy), unit_mul(s.u, t.u, r)))
    return WrapElement(r, tuple(out))


def _residue(f: Phrase, z0: CayleyNumber, M: CayleyNumber) -> CayleyNumber:
    try:
        return residue_symbolic(f, z0, M)
    except ResidueRuleError:
        return residue_numeric(f, z0, M)


def cocycle(z0: CayleyNumber, a: WrapElement, b: WrapElement, M: "Direction | CayleyNumber", base: BaseLieAlgebra) -> CayleyNumber:
    """omega(z0; a, b) = sum over state pairs of (Res(z0, (D P) Q).M) ((x|y) u v)."""
    _same_level(a.level, b.level)
    r = a.level
    m = M.value if isinstance(M, Direction) else M
    acc = CayleyNumber.zero(r)
    for s in a.states:
        for t in b.states:
            g = base.pair(s.x, t.x)
            if g == 0:
                continue
            res = _residue(mul_phrases(D(s.P), t.P), z0, m)
            acc = acc + mul(res, unit_mul(s.u, t.u, r).value(r)).scale(g)
    return acc


def d_l_wrap(l: int, a: WrapElement) -> WrapElement:
    """d_l(P (x) x u) = (d_l P) (x) x u with d_l P = -(dP/dz).z^(l+1)."""
    return WrapElement(a.level, tuple(PureState(d_l(s.P, l), s.x, s.u) for s in a.states))


def sf_d(P: Phrase) -> Phrase:
    """(dP/dz).z = -d_0 P."""
    return normalize(derivative(P, Phrase.monomial(P.level, 1)))


# -- extension by K and d -----------------------------------------------------

def _point_key(z0: CayleyNumber) -> tuple:
    return tuple(float(c) for c in z0.to_float().coords)


@dataclass(frozen=True)
class ExtendedElement:
    """wrap + sum_w kappa(w) K + delta d, with kappa a finite table on marked points."""

    wrap: WrapElement
    kappa: tuple = ()  # ((point_key, CayleyNumber), ...)
    delta: CayleyNumber | None = None

    @property
    def level(self) -> int:
        return self.wrap.level

    def kappa_at(self, z0: CayleyNumber) -> CayleyNumber:
        key = _point_key(z0)
        for k, v in self.kappa:
            if k == key:
                return v
        return CayleyNumber.zero(self.level)

    def delta_value(self) -> CayleyNumber:
        return self.delta if self.delta is not None else CayleyNumber.zero(self.level)


def extended_bracket(A: ExtendedElement, B: ExtendedElement, z0: CayleyNumber, M, base: BaseLieAlgebra) -> ExtendedElement:
    """Bracket with K central and d acting by (dQ/dz).z on the partner's phrases.

    For a d-part e i_k against a state Q y i_j the result is e (sf_d Q) y (i_k i_j);
    for t i_j against P x i_k it is -(-1)^eta(k,j) t (sf_d P) x (i_j i_k).
    """
    r = A.level
    _same_level(r, B.level)
    wrap = wrap_bracket(A.wrap, B.wrap, base)
    extra = []
    for k, e in enumerate(A.delta_value().to_float().coords):
        if e == 0:
            continue
        for t in B.wrap.states:
            u = unit_mul(Unit(k), t.u, r)
            extra.append(PureState(sf_d(t.P).scale(e), t.x, u))
    for j, tc in enumerate(B.delta_value().to_float().coords):
        if tc == 0:
            continue
        for s in A.wrap.states:
            sgn = -((-1) ** eta_sign(s.u.k, j))
            u = unit_mul(Unit(j), s.u, r)
            extra.append(PureState(sf_d(s.P).scale(sgn * tc), s.x, u))
    kappa = cocycle(z0, A.wrap, B.wrap, M, base)
    return ExtendedElement(WrapElement(r, wrap.states + tuple(extra)), ((_point_key(z0), kappa),), CayleyNumber.zero(r))


# -- Witt and Virasoro --------------------------------------------------------

def _mono(r: int, m: int) -> Phrase:
    return Phrase.monomial(r, m)


def _coeff_table(p: Phrase) -> dict[int, float]:
    """Exponent -> real coefficient for a real Laurent phrase in normal form."""
    out: dict[int, float] = {}
    for t in normalize(p).terms:
        if any(f.conj or not _center_eq(f.center, None) for f in t.factors):
            raise ValueError("phrase is not a real Laurent polynomial about 0")
        if any(np.any(c.coords[1:] != 0) for c in t.coeffs):
            raise ValueError("phrase has non-real coefficients")
        n = t.degree
        out[n] = out.get(n, 0.0) + math.prod(float(c.coords[0]) for c in t.coeffs)
    return {n: c for n, c in out.items() if c != 0}


@lru_cache(maxsize=None)
def _d_l_monomial(r: int, l: int, n: int) -> tuple:
    return tuple(sorted(_coeff_table(d_l(_mono(r, n), l)).items()))


def _apply_d(r: int, l: int, table: dict[int, float]) -> dict[int, float]:
    """d_l on a coefficient table, by linearity over monomial images."""
    out: dict[int, float] = {}
    for n, c in table.items():
        for e, v in _d_l_monomial(r, l, n):
            out[e] = out.get(e, 0.0) + c * v
    return {e: v for e, v in out.items() if v != 0}


def witt_bracket(k: int, j: int, m_max: int = 8, r: int = 2) -> dict[int, tuple[dict, dict]]:
    """For each |m| <= m_max: ((d_k d_j - d_j d_k) z^m, (k - j) d_{j+k} z^m) as coefficient tables."""
    out = {}
    for m in range(-m_max, m_max + 1):
        z = {m: 1.0}
        a, b = _apply_d(r, k, _apply_d(r, j, z)), _apply_d(r, j, _apply_d(r, k, z))
        lhs = {e: a.get(e, 0.0) - b.get(e, 0.0) for e in set(a) | set(b)}
        rhs = {e: (k - j) * v for e, v in _apply_d(r, j + k, z).items() if k != j}
        out[m] = ({e: v for e, v in lhs.items() if v != 0}, rhs)
    return out


def witt_holds(k: int, j: int, m_max: int = 8, r: int = 2) -> bool:
    return all(a == b for a, b in witt_bracket(k, j, m_max, r).values())


@dataclass(frozen=True)
class VirasoroElement:
    """sum_j a_j d_j + c_coeff c with A_r coefficients."""

    level: int
    d: tuple = ()  # ((j, CayleyNumber), ...)
    c: CayleyNumber | None = None

    @classmethod
    def basis(cls, r: int, j: int, coeff: CayleyNumber | float = 1.0) -> "VirasoroElement":
        a = coeff if isinstance(coeff, CayleyNumber) else CayleyNumber.real(r, coeff)
        return cls(r, ((j, a),))

    def coeffs(self) -> dict[int, CayleyNumber]:
        out: dict[int, CayleyNumber] = {}
        for j, a in self.d:
            out[j] = out[j] + a if j in out else a
        return out

    def central(self) -> CayleyNumber:
        return self.c if self.c is not None else CayleyNumber.zero(self.level)


def virasoro_bracket(j: int, s, k: int, t) -> tuple[tuple[int, int], Fraction]:
    """[d_j + s c, d_k + t c] = (j - k) d_{j+k} + (j^3 - j) delta_{j,-k} / 12 c.

    Returns ((j + k, j - k), central coefficient); s and t drop out.
    """
    cc = Fraction(j ** 3 - j, 12) if j == -k else Fraction(0)
    return (j + k, j - k), cc


def virasoro_element_bracket(a: VirasoroElement, b: VirasoroElement) -> VirasoroElement:
    """Bilinear extension with coefficient products in the order (alpha beta)."""
    _same_level(a.level, b.level)
    r = a.level
    terms: dict[int, CayleyNumber] = {}
    cen = CayleyNumber.zero(r)
    for j, al in a.coeffs().items():
        for k, be in b.coeffs().items():
            ab = mul(al, be)
            (idx, coef), cc = virasoro_bracket(j, None, k, None)
            if coef:
                v = ab.scale(coef)
                terms[idx] = terms[idx] + v if idx in terms else v
            if cc:
                cen = cen + ab.scale(float(cc))
    return VirasoroElement(r, tuple(sorted(terms.items())), cen)


# -- identity suite -----------------------------------------------------------

@dataclass
class IdentityRow:
    identity: str
    inputs: str
    defect: float
    nontrivial: bool = True  # some term of the identity was nonzero

    def to_json(self) -> dict:
        return {"identity": self.identity, "inputs-hash": self.inputs, "defect": self.defect}


def random_real_phrase(r: int, rng: np.random.Generator, n_terms: int = 3, exp_range: int = 3) -> Phrase:
    """Sum of real-coefficient terms with one or two factors centred at 0."""
    terms = []
    for _ in range(n_terms):
        nf = int(rng.integers(1, 3))
        coeffs = [CayleyNumber.real(r, float(rng.integers(-3, 4) or 1)) for _ in range(nf + 1)]
        exps = [int(rng.integers(-exp_range, exp_range + 1)) for _ in range(nf)]
        terms.append(Term.make(coeffs, [Factor(n) for n in exps]))
    return Phrase(r, tuple(terms))


def random_pure(r: int, base: BaseLieAlgebra, rng: np.random.Generator) -> WrapElement:
    P = random_real_phrase(r, rng)
    x = rng.integers(-2, 3, size=base.dim).astype(float)
    k = int(rng.integers(0, 1 << r))
    return WrapElement.pure(P, x, k)


def _fmt(*els: WrapElement) -> str:
    import hashlib

    text = "|".join(
        ";".join(f"{s.P.to_json()}:{s.x}:{s.u}" for s in e.states) for e in els
    )
    return hashlib.sha1(text.encode()).hexdigest()[:12]


def cocycle_identity_suite(base: BaseLieAlgebra | None = None, cases: int = 100, seed: int = 0,
                           r: int = 3, z0: CayleyNumber | None = None) -> list[IdentityRow]:
    """Graded antisymmetry, graded cyclic identity, psi(f',g) = -psi(f,g') and d_l compatibility."""
    base = base or sl2()
    rng = np.random.default_rng(seed)
    z0 = z0 if z0 is not None else CayleyNumber.zero(r)
    dirs = [CayleyNumber.generator(r, j) for j in range(1, 1 << r)]
    rows: list[IdentityRow] = []
    for case in range(cases):
        M = dirs[case % len(dirs)]
        a, b, c = (random_pure(r, base, rng) for _ in range(3))
        k, j, s = (e.states[0].u.k for e in (a, b, c))
        h = _fmt(a, b)
        # graded antisymmetry
        w1 = cocycle(z0, a, b, M, base)
        w2 = cocycle(z0, b, a, M, base)
        rows.append(IdentityRow("antisymmetry", h, (w1 - w2.scale((-1) ** (eta_sign(k, j) + 1))).norm(), w1.norm() > 0))
        # graded cyclic identity
        x1 = xi_sign(k, j, s, r)
        x2 = xi_sign(j, s, k, r)
        t1 = cocycle(z0, wrap_bracket(a, b, base), c, M, base)
        t2 = cocycle(z0, wrap_bracket(b, c, base), a, M, base)
        t3 = cocycle(z0, wrap_bracket(c, a, base), b, M, base)
        cyc = t1 + t2.scale((-1) ** x1) + t3.scale((-1) ** (x1 + x2))
        rows.append(IdentityRow("cyclic", _fmt(a, b, c), cyc.norm(), max(t1.norm(), t2.norm(), t3.norm()) > 0))
        # psi(f', g) = -psi(f, g')
        P, Q = a.states[0].P, b.states[0].P
        lhs = _residue(mul_phrases(D(P), Q), z0, M)
        rhs = _residue(mul_phrases(P, D(Q)), z0, M)
        rows.append(IdentityRow("psi", h, (lhs + rhs).norm(), lhs.norm() > 0))
        # omega(d_l a, b) + omega(a, d_l b) = 0
        l = int(rng.integers(-3, 4))
        o1 = cocycle(z0, d_l_wrap(l, a), b, M, base)
        dl = o1 + cocycle(z0, a, d_l_wrap(l, b), M, base)
        rows.append(IdentityRow(f"d_l-cocycle(l={l})", h, dl.norm(), o1.norm() > 0))
        # d_l is a derivation of [,]_0, checked by evaluation
        zp = CayleyNumber(r, rng.normal(size=1 << r))
        lhs_v = d_l_wrap(l, wrap_bracket(a, b, base)).value(zp, base.dim)
        rhs_v = (wrap_bracket(d_l_wrap(l, a), b, base) + wrap_bracket(a, d_l_wrap(l, b), base)).value(zp, base.dim)
        scale = max(1.0, float(np.max(np.abs(lhs_v))))
        rows.append(IdentityRow(f"d_l-derivation(l={l})", h, float(np.max(np.abs(lhs_v - rhs_v))) / scale,
                                bool(np.any(lhs_v))))
    return rows


def suite_summary(rows: list[IdentityRow]) -> dict[str, dict]:
    """Per identity: case count, nontrivial count and max defect."""
    out: dict[str, dict] = {}
    for row in rows:
        key = row.identity.split("(")[0]
        e = out.setdefault(key, {"cases": 0, "nontrivial": 0, "max_defect": 0.0})
        e["cases"] += 1
        e["nontrivial"] += int(row.nontrivial)
        e["max_defect"] = max(e["max_defect"], row.defect)
    return out
