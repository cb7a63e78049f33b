"""Non-commutative Laurent phrases with explicit bracketing trees.

A term {a_1 z^{n_1} a_2 ... a_k z^{n_k} a_{k+1}} is stored as its ordered leaf
sequence (coefficients and power factors alternate, starting and ending with a
coefficient) together with a full binary tree saying how the leaves multiply.
A factor may be conjugated (z~^n) and may carry a center c, in which case it
stands for (z - c)^n.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import product as iproduct
from typing import Callable, Iterable, Sequence

import numpy as np

from octowrap.cayley_dickson import (
    CayleyNumber,
    Direction,
    _check_level,
    inverse,
    mul,
    mul_batch,
)

MAX_EXP = 64
LEAF = "."


# -- bracketing trees ---------------------------------------------------------

class BracketTree:
    """Full binary tree over n ordered leaves; shape is nested 2-tuples of LEAF."""

    __slots__ = ("shape", "n")

    def __init__(self, shape):
        self.shape = shape
        self.n = _count(shape)

    @classmethod
    def left(cls, n: int) -> "BracketTree":
        """((..(l_1 l_2) l_3)..) l_n."""
        if n < 1:
            raise ValueError("a tree needs at least one leaf")
        s = LEAF
        for _ in range(n - 1):
            s = (s, LEAF)
        return cls(s)

    @classmethod
    def parse(cls, text: str) -> "BracketTree":
        """'.' is a leaf, parentheses group, unbracketed runs associate left."""
        toks = [c for c in text if not c.isspace()]
        pos = 0

        def chain():
            nonlocal pos
            items = []
            while pos < len(toks) and toks[pos] != ")":
                c = toks[pos]
                if c == LEAF:
                    items.append(LEAF)
                    pos += 1
                elif c == "(":
                    pos += 1
                    items.append(chain())
                    if pos >= len(toks) or toks[pos] != ")":
                        raise ValueError(f"unbalanced tree string {text!r}")
                    pos += 1
                else:
                    raise ValueError(f"bad tree character {c!r} in {text!r}")
            if not items:
                raise ValueError(f"empty group in tree string {text!r}")
            node = items[0]
            for it in items[1:]:
                node = (node, it)
            return node

        shape = chain()
        if pos != len(toks):
            raise ValueError(f"unbalanced tree string {text!r}")
        return cls(shape)

    def to_string(self) -> str:
        def rec(s):
            return LEAF if s == LEAF else "(" + rec(s[0]) + rec(s[1]) + ")"

        return rec(self.shape)

    def mirror(self) -> "BracketTree":
        def rec(s):
            return s if s == LEAF else (rec(s[1]), rec(s[0]))

        return BracketTree(rec(self.shape))

    def fold(self, values: Sequence, op: Callable):
        it = iter(values)

        def rec(s):
            if s == LEAF:
                return next(it)
            a = rec(s[0])
            return op(a, rec(s[1]))

        return rec(self.shape)

    def spans(self) -> list[tuple[int, int, tuple]]:
        """(start, stop, path) for every node; path is a tuple of 0/1 child choices."""
        out = []

        def rec(s, start, path):
            if s == LEAF:
                out.append((start, start + 1, path))
                return start + 1
            mid = rec(s[0], start, path + (0,))
            stop = rec(s[1], mid, path + (1,))
            out.append((start, stop, path))
            return stop

        rec(self.shape, 0, ())
        return out

    def minimal_span(self, i: int, j: int) -> tuple[int, int, tuple]:
        """Smallest subtree covering leaves i..j-1."""
        best = None
        for a, b, p in self.spans():
            if a <= i and j <= b and (best is None or b - a < best[1] - best[0]):
                best = (a, b, p)
        return best

    def replace_at(self, path: tuple, sub) -> "BracketTree":
        def rec(s, p):
            if not p:
                return sub
            if p[0] == 0:
                return (rec(s[0], p[1:]), s[1])
            return (s[0], rec(s[1], p[1:]))

        return BracketTree(rec(self.shape, path))

    def subtree(self, path: tuple):
        s = self.shape
        for c in path:
            s = s[c]
        return s

    def __eq__(self, other):
        return isinstance(other, BracketTree) and self.shape == other.shape

    def __hash__(self):
        return hash(self.shape)

    def __repr__(self):
        return f"BracketTree({self.to_string()!r})"


def _count(shape) -> int:
    return 1 if shape == LEAF else _count(shape[0]) + _count(shape[1])


def _left_shape(n: int):
    return BracketTree.left(n).shape


# -- leaves and terms ---------------------------------------------------------

@dataclass(frozen=True)
class Factor:
    """(z - center)^exp, or its conjugate power when conj is set."""

    exp: int
    conj: bool = False
    center: CayleyNumber | None = None

    def __post_init__(self):
        if abs(self.exp) > MAX_EXP:
            raise ValueError(f"exponent {self.exp} outside the window |n| <= {MAX_EXP}")

    def same_base(self, other: "Factor") -> bool:
        return self.conj == other.conj and _center_eq(self.center, other.center)

    def with_exp(self, n: int) -> "Factor":
        return replace(self, exp=n)


def _center_eq(a: CayleyNumber | None, b: CayleyNumber | None) -> bool:
    za = a is None or not np.any(a.coords != 0)
    zb = b is None or not np.any(b.coords != 0)
    if za or zb:
        return za and zb
    return a == b


def _is_real(c: CayleyNumber) -> bool:
    return not np.any(c.coords[1:] != 0)


@dataclass(frozen=True)
class Term:
    leaves: tuple
    tree: BracketTree

    def __post_init__(self):
        lv = self.leaves
        if len(lv) % 2 != 1:
            raise ValueError("a term alternates coefficients and factors, starting and ending with a coefficient")
        for idx, leaf in enumerate(lv):
            want = CayleyNumber if idx % 2 == 0 else Factor
            if not isinstance(leaf, want):
                raise TypeError(f"leaf {idx} should be a {want.__name__}")
        if self.tree.n != len(lv):
            raise ValueError(f"tree has {self.tree.n} leaves, term has {len(lv)}")
        levels = {c.level for c in lv[0::2]}
        if len(levels) != 1:
            raise ValueError("coefficients of a term must share one level")

    @classmethod
    def make(cls, coeffs: Sequence[CayleyNumber], factors: Sequence[Factor | int], tree: BracketTree | None = None) -> "Term":
        fs = [f if isinstance(f, Factor) else Factor(int(f)) for f in factors]
        if len(coeffs) != len(fs) + 1:
            raise ValueError("need exactly one more coefficient than factors")
        leaves = []
        for c, f in zip(coeffs, fs):
            leaves += [c, f]
        leaves.append(coeffs[-1])
        return cls(tuple(leaves), tree or BracketTree.left(len(leaves)))

    @property
    def level(self) -> int:
        return self.leaves[0].level

    @property
    def coeffs(self) -> tuple:
        return self.leaves[0::2]

    @property
    def factors(self) -> tuple:
        return self.leaves[1::2]

    @property
    def exps(self) -> tuple:
        return tuple(f.exp for f in self.factors)

    @property
    def degree(self) -> int:
        return sum(self.exps)

    def is_zero(self) -> bool:
        return any(not np.any(c.coords != 0) for c in self.coeffs)

    def scaled(self, s) -> "Term":
        lv = list(self.leaves)
        lv[0] = lv[0].scale(s)
        return Term(tuple(lv), self.tree)

    def conj(self) -> "Term":
        """Term whose value is the conjugate of this one's."""
        lv = []
        for leaf in reversed(self.leaves):
            lv.append(leaf.conj() if isinstance(leaf, CayleyNumber) else replace(leaf, conj=not leaf.conj))
        return Term(tuple(lv), self.tree.mirror())

    def eval(self, z: CayleyNumber) -> CayleyNumber:
        vals = [leaf if isinstance(leaf, CayleyNumber) else _factor_value(leaf, z) for leaf in self.leaves]
        return self.tree.fold(vals, mul)

    def eval_batch(self, Z: np.ndarray) -> np.ndarray:
        r = self.level
        m = Z.shape[0]
        cache: dict = {}
        vals = []
        for leaf in self.leaves:
            if isinstance(leaf, CayleyNumber):
                vals.append(np.broadcast_to(leaf.coords.astype(float), (m, 1 << r)))
            else:
                vals.append(_factor_batch(leaf, Z, r, cache))
        return self.tree.fold(vals, lambda a, b: mul_batch(a, b, r))

    def to_json(self) -> dict:
        out = {
            "coeffs": [c.to_json()["coords"] for c in self.coeffs],
            "exps": list(self.exps),
            "conj": [f.conj for f in self.factors],
            "tree": self.tree.to_string(),
        }
        if any(f.center is not None and np.any(f.center.coords != 0) for f in self.factors):
            out["centers"] = [
                (f.center.to_json()["coords"] if f.center is not None else [0.0] * (1 << self.level)) for f in self.factors
            ]
        return out

    @classmethod
    def from_json(cls, obj: dict, r: int) -> "Term":
        from octowrap.cayley_dickson import _rational_from_json

        coeffs = [CayleyNumber(r, [_rational_from_json(v) for v in c]) for c in obj["coeffs"]]
        exps = list(obj.get("exps", []))
        conj = list(obj.get("conj", [False] * len(exps)))
        centers = obj.get("centers")
        fs = []
        for j, n in enumerate(exps):
            ctr = CayleyNumber(r, [_rational_from_json(v) for v in centers[j]]) if centers else None
            fs.append(Factor(int(n), bool(conj[j]), ctr))
        tree = BracketTree.parse(obj["tree"]) if obj.get("tree") else None
        return cls.make(coeffs, fs, tree)


def _shifted(f: Factor, z: CayleyNumber) -> CayleyNumber:
    w = z if f.center is None else z - f.center
    return w.conj() if f.conj else w


def _power(w: CayleyNumber, n: int) -> CayleyNumber:
    if n == 0:
        return CayleyNumber.real(w.level, 1, exact=w.exact)
    if n < 0:
        if w.norm2() == 0:
            raise ZeroDivisionError(f"pole: factor with exponent {n} evaluated at its center")
        w = inverse(w)
        n = -n
    out = None
    base = w
    while n:
        if n & 1:
            out = base if out is None else mul(out, base)
        n >>= 1
        if n:
            base = mul(base, base)
    return out


def _factor_value(f: Factor, z: CayleyNumber) -> CayleyNumber:
    return _power(_shifted(f, z), f.exp)


def _power_batch(W: np.ndarray, n: int, r: int) -> np.ndarray:
    if n == 0:
        out = np.zeros_like(W)
        out[:, 0] = 1.0
        return out
    if n < 0:
        n2 = np.einsum("ij,ij->i", W, W)
        if np.any(n2 == 0):
            raise ZeroDivisionError(f"pole: factor with exponent {n} evaluated at its center")
        W = W * -1.0
        W[:, 0] *= -1.0
        W = W / n2[:, None]
        n = -n
    out = None
    base = W
    while n:
        if n & 1:
            out = base if out is None else mul_batch(out, base, r)
        n >>= 1
        if n:
            base = mul_batch(base, base, r)
    return out


def _factor_batch(f: Factor, Z: np.ndarray, r: int, cache: dict) -> np.ndarray:
    key = (f.exp, f.conj, None if f.center is None else tuple(f.center.coords.astype(float)))
    if key in cache:
        return cache[key]
    W = Z if f.center is None else Z - f.center.coords.astype(float)
    if f.conj:
        W = W * -1.0
        W[:, 0] *= -1.0
    v = _power_batch(W, f.exp, r)
    cache[key] = v
    return v


# -- phrases ------------------------------------------------------------------

@dataclass(frozen=True)
class Phrase:
    level: int
    terms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        _check_level(self.level)
        for t in self.terms:
            if t.level != self.level:
                raise ValueError(f"term at level {t.level} in a level-{self.level} phrase")

    # constructors
    @classmethod
    def constant(cls, c: CayleyNumber) -> "Phrase":
        return cls(c.level, (Term((c,), BracketTree(LEAF)),))

    @classmethod
    def monomial(cls, r: int, n: int, a: CayleyNumber | None = None, b: CayleyNumber | None = None,
                 center: CayleyNumber | None = None, conj: bool = False) -> "Phrase":
        one = CayleyNumber.real(r, 1)
        return cls(r, (Term.make([a or one, b or one], [Factor(n, conj, center)]),))

    @classmethod
    def zero(cls, r: int) -> "Phrase":
        return cls(r, ())

    # algebra
    def __add__(self, other: "Phrase") -> "Phrase":
        if other.level != self.level:
            raise ValueError("level mismatch")
        return Phrase(self.level, self.terms + other.terms)

    def __neg__(self) -> "Phrase":
        return self.scale(-1)

    def __sub__(self, other: "Phrase") -> "Phrase":
        return self + (-other)

    def scale(self, s) -> "Phrase":
        return Phrase(self.level, tuple(t.scaled(s) for t in self.terms))

    def conj(self) -> "Phrase":
        return Phrase(self.level, tuple(t.conj() for t in self.terms))

    def __mul__(self, other: "Phrase") -> "Phrase":
        return mul_phrases(self, other)

    # evaluation
    def eval(self, z: CayleyNumber) -> CayleyNumber:
        if z.level != self.level:
            raise ValueError("level mismatch")
        acc = CayleyNumber.zero(self.level, exact=z.exact)
        for t in self.terms:
            acc = acc + t.eval(z)
        return acc

    __call__ = eval

    def eval_batch(self, Z: np.ndarray) -> np.ndarray:
        Z = np.asarray(Z, dtype=float)
        acc = np.zeros_like(Z)
        for t in self.terms:
            acc = acc + t.eval_batch(Z)
        return acc

    def to_json(self) -> dict:
        return {"r": self.level, "terms": [t.to_json() for t in self.terms]}

    @classmethod
    def from_json(cls, obj: dict) -> "Phrase":
        r = int(obj["r"])
        return cls(r, tuple(Term.from_json(t, r) for t in obj["terms"]))

    def __str__(self):
        return format_phrase(self)


def format_term(t: Term) -> str:
    from octowrap.cayley_dickson import format_cd

    def leaf_str(leaf):
        if isinstance(leaf, CayleyNumber):
            s = format_cd(leaf, 8)
            return s if " " not in s else f"[{s}]"
        base = "zbar" if leaf.conj else "z"
        if leaf.center is not None and np.any(leaf.center.coords != 0):
            base = f"({base}-[{format_cd(leaf.center.conj() if leaf.conj else leaf.center, 8)}])"
        return base if leaf.exp == 1 else f"{base}^{leaf.exp}"

    parts = [leaf_str(x) for x in t.leaves]
    return t.tree.fold(parts, lambda a, b: f"({a} {b})")


def format_phrase(p: Phrase) -> str:
    return " + ".join(format_term(t) for t in p.terms) if p.terms else "0"


# -- products -----------------------------------------------------------------

def _zero_factor() -> Factor:
    return Factor(0)


def mul_terms(s: Term, t: Term, tree_policy: str = "product") -> Term:
    leaves = s.leaves + (_zero_factor(),) + t.leaves
    if tree_policy == "product":
        tree = BracketTree(((s.tree.shape, LEAF), t.tree.shape))
    elif tree_policy == "left":
        tree = BracketTree.left(len(leaves))
    else:
        raise ValueError(f"unknown tree policy {tree_policy!r}")
    return Term(leaves, tree)


def mul_phrases(p: Phrase, q: Phrase, tree_policy: str = "product") -> Phrase:
    """Product p*q term by term.

    The default policy keeps both trees and multiplies the two values, so
    eval(p*q) = eval(p)*eval(q) at every level.  "left" re-brackets the
    concatenated leaves to the left, which agrees only on associative levels.
    """
    if p.level != q.level:
        raise ValueError("level mismatch")
    return Phrase(p.level, tuple(mul_terms(s, t, tree_policy) for s in p.terms for t in q.terms))


# -- derivatives --------------------------------------------------------------

def _as_phrase(h, r: int) -> Phrase:
    if isinstance(h, Phrase):
        return h
    if isinstance(h, CayleyNumber):
        return Phrase.constant(h)
    return Phrase.constant(CayleyNumber.real(r, h))


def _splice(t: Term, i: int, pieces: list[tuple[float, tuple, object]]) -> list[Term]:
    """Replace leaf i of t by each (scale, leaves, shape) piece."""
    out = []
    path = t.tree.minimal_span(i, i + 1)[2]
    for s, lv, shape in pieces:
        leaves = t.leaves[:i] + lv + t.leaves[i + 1:]
        out.append(Term(leaves, t.tree.replace_at(path, shape)).scaled(s))
    return out


def _factor_derivative_pieces(f: Factor, h: Phrase) -> list[tuple[float, tuple, object]]:
    n = f.exp
    if n == 0:
        return []
    hh = h.conj() if f.conj else h
    pieces = []
    if n > 0:
        pairs = [(j, n - j - 1, 1) for j in range(n)]
    else:
        m = -n
        pairs = [(j - m, -1 - j, -1) for j in range(m)]
    for a, b, sign in pairs:
        for ht in hh.terms:
            lv = (f.with_exp(a),) + ht.leaves + (f.with_exp(b),)
            shape = ((LEAF, ht.tree.shape), LEAF)
            pieces.append((sign, lv, shape))
    return pieces


def derivative(p: Phrase, h) -> Phrase:
    """(dp/dz).h as a phrase; h may be a CayleyNumber, a real, or a Phrase.

    Each factor z^n contributes sum_j z^j h z^(n-j-1); negative powers use
    dz^(-m).h = -z^(-m) ((dz^m).h) z^(-m), and conjugated factors receive the
    conjugate of h.
    """
    hp = _as_phrase(h, p.level)
    out = []
    for t in p.terms:
        for i in range(1, len(t.leaves), 2):
            out += _splice(t, i, _factor_derivative_pieces(t.leaves[i], hp))
    return Phrase(p.level, tuple(out))


def derivative_op(p: Phrase) -> Callable:
    """h -> (dp/dz).h as a phrase."""
    return lambda h: derivative(p, h)


def D(p: Phrase) -> Phrase:
    """(dp/dz).1, folded to simplest form."""
    return normalize(derivative(p, 1))


def derivative_at_1(p: Phrase) -> Phrase:
    return D(p)


def d_l(p: Phrase, l: int) -> Phrase:
    """d_l p = -(dp/dz).z^(l+1)."""
    h = Phrase.monomial(p.level, l + 1)
    return normalize(derivative(p, h).scale(-1))


def derivative_value(p: Phrase, z: CayleyNumber, h: CayleyNumber) -> CayleyNumber:
    return derivative(p, h).eval(z)


def derivative_batch(p: Phrase, Z: np.ndarray, H: np.ndarray) -> np.ndarray:
    """(dp/dz).h evaluated row-wise for points Z and directions H."""
    r = p.level
    acc = np.zeros_like(Z, dtype=float)
    for t in p.terms:
        cache: dict = {}
        base_vals = []
        for leaf in t.leaves:
            if isinstance(leaf, CayleyNumber):
                base_vals.append(np.broadcast_to(leaf.coords.astype(float), Z.shape))
            else:
                base_vals.append(None)
        for i in range(1, len(t.leaves), 2):
            f = t.leaves[i]
            if f.exp == 0:
                continue
            dv = _dpow_batch(f, Z, H, r, cache)
            vals = [
                dv if j == i else (v if v is not None else _factor_batch(t.leaves[j], Z, r, cache))
                for j, v in enumerate(base_vals)
            ]
            acc = acc + t.tree.fold(vals, lambda a, b: mul_batch(a, b, r))
    return acc


def _conj_rows(A: np.ndarray) -> np.ndarray:
    B = -A
    B[:, 0] = A[:, 0]
    return B


def _dpow_batch(f: Factor, Z: np.ndarray, H: np.ndarray, r: int, cache: dict) -> np.ndarray:
    W = Z if f.center is None else Z - f.center.coords.astype(float)
    Hh = H
    if f.conj:
        W = _conj_rows(W)
        Hh = _conj_rows(H)
    return dpow_batch(W, Hh, f.exp, r)


def dpow_batch(W: np.ndarray, H: np.ndarray, n: int, r: int) -> np.ndarray:
    """(d w^n / dw).h row-wise, any integer n."""
    if n == 0:
        return np.zeros_like(W)
    m = abs(n)
    # D_k = d(w^k).h via D_{k+1} = D_k w + w^k h
    P = np.zeros_like(W)
    P[:, 0] = 1.0
    Dk = np.zeros_like(W)
    for _ in range(m):
        Dk = mul_batch(Dk, W, r) + mul_batch(P, H, r)
        P = mul_batch(P, W, r)
    if n > 0:
        return Dk
    n2 = np.einsum("ij,ij->i", P, P)
    Pinv = _conj_rows(P) / n2[:, None]
    return -mul_batch(mul_batch(Pinv, Dk, r), Pinv, r)


# -- normalization ------------------------------------------------------------

def _fold_reals(t: Term) -> Term:
    lv = list(t.leaves)
    scale = Fraction(1) if all(c.exact for c in t.coeffs) else 1.0
    for i in range(2, len(lv), 2):
        c = lv[i]
        if _is_real(c) and c.re != 1:
            scale = scale * c.re
            lv[i] = CayleyNumber.real(c.level, 1, exact=c.exact)
    if scale != 1:
        lv[0] = lv[0].scale(scale)
    return Term(tuple(lv), t.tree)


def _assoc_safe(leaves: Sequence) -> bool:
    """True when all leaves lie in an associative subalgebra (Artin's theorem)."""
    ims = [c.coords[1:].astype(float) for c in leaves if isinstance(c, CayleyNumber) and not _is_real(c)]
    factors = [f for f in leaves if isinstance(f, Factor)]
    if factors and not all(_center_eq(factors[0].center, f.center) for f in factors):
        centers_real = all(f.center is None or _is_real(f.center) for f in factors)
        if not centers_real:
            return False
    if len(ims) <= 1:
        return True
    return np.linalg.matrix_rank(np.array(ims), tol=1e-12) <= 1


def _try_merge(t: Term) -> Term | None:
    lv = t.leaves
    # drop z^0 between two coefficients
    for i in range(1, len(lv), 2):
        f = lv[i]
        if f.exp == 0:
            a, b, path = t.tree.minimal_span(i - 1, i + 2)
            if b - a == 3 or _assoc_safe(lv[a:b]):
                merged = lv[a:i - 1] + (mul(lv[i - 1], lv[i + 1]),) + lv[i + 2:b]
                return Term(lv[:a] + merged + lv[b:], t.tree.replace_at(path, _left_shape(len(merged))))
    # merge z^l c z^n with c real
    for i in range(2, len(lv) - 1, 2):
        c = lv[i]
        fl, fr = lv[i - 1], lv[i + 1]
        if _is_real(c) and fl.same_base(fr):
            a, b, path = t.tree.minimal_span(i - 1, i + 2)
            if b - a == 3 or _assoc_safe(lv[a:b]):
                ff = fl.with_exp(fl.exp + fr.exp)
                merged = lv[a:i - 1] + (ff,) + lv[i + 2:b]
                new = Term(lv[:a] + merged + lv[b:], t.tree.replace_at(path, _left_shape(len(merged))))
                return new.scaled(c.re) if c.re != 1 else new
    return None


def normalize_term(t: Term) -> Term:
    t = _fold_reals(t)
    while True:
        nt = _try_merge(t)
        if nt is None:
            return _fold_reals(t)
        t = _fold_reals(nt)


def _term_key(t: Term):
    rest = tuple(
        (tuple(x.coords) if isinstance(x, CayleyNumber) else (x.exp, x.conj, None if x.center is None else tuple(x.center.coords)))
        for x in t.leaves[1:]
    )
    return (t.tree.shape, rest)


def normalize(p: Phrase) -> Phrase:
    """Fold real scalars into a_1, merge z^l 1 z^n, combine like terms, drop zeros.

    Only rewrites valid at every level are applied: a merge happens when the
    smallest subtree holding z^l, 1, z^n is that triple itself or lives in an
    associative subalgebra.  Other equalities are left to evaluation.
    """
    groups: dict = {}
    order = []
    for t in p.terms:
        if t.is_zero():
            continue
        nt = normalize_term(t)
        if nt.is_zero():
            continue
        k = _term_key(nt)
        if k in groups:
            old = groups[k]
            lv = list(old.leaves)
            lv[0] = lv[0] + nt.leaves[0]
            groups[k] = Term(tuple(lv), old.tree)
        else:
            groups[k] = nt
            order.append(k)
    terms = tuple(groups[k] for k in order if not groups[k].is_zero())
    return Phrase(p.level, terms)


# -- left antiderivative ------------------------------------------------------

def _falling(n: int, s: int) -> int:
    out = 1
    for j in range(s):
        out *= n - j
    return out


def _rising_inv(n: int, t: int) -> Fraction:
    """1 / ((n+1)(n+2)...(n+t)); raises on a zero factor."""
    den = 1
    for j in range(1, t + 1):
        if n + j == 0:
            raise ValueError("logarithmic primitive: antiderivative of z^-1 is not a phrase")
        den *= n + j
    return Fraction(1, den)


def antiderivative_term(t: Term, l: int = 1) -> list[Term]:
    """l-th left antiderivative of a single term (left algorithm: the first factor absorbs the integration)."""
    if l < 1:
        raise ValueError("antiderivative order must be >= 1")
    fs = t.factors
    if not fs:
        # a constant c integrates to c z^l / l!
        c = t.leaves[0]
        one = CayleyNumber.real(t.level, 1, exact=c.exact)
        tt = Term((c, Factor(l), one), BracketTree(((LEAF, LEAF), LEAF)))
        return [tt.scaled(Fraction(1, math.factorial(l)) if c.exact else 1.0 / math.factorial(l))]
    if any(f.conj for f in fs):
        raise ValueError("algorithm precondition: conjugated factors have no left antiderivative")
    if any(f.exp < 0 for f in fs[1:]):
        raise ValueError("algorithm precondition: factors after the first must be polynomial")
    n1 = fs[0].exp
    rest = [f.exp for f in fs[1:]]
    exact = all(c.exact for c in t.coeffs)
    out = []
    for ss in iproduct(*[range(n + 1) for n in rest]):
        # coefficient: prod over j from k down to 2 of binom(s_j + ... + s_k + l - 1, s_j), signs, falling factorials
        coef = Fraction(1)
        acc = 0
        for n, s in zip(reversed(rest), reversed(ss)):
            coef *= math.comb(s + acc + l - 1, s) * _falling(n, s) * (-1) ** s
            acc += s
        tt = l + acc
        coef *= _rising_inv(n1, tt)
        if coef == 0:
            continue
        newf = [fs[0].with_exp(n1 + tt)] + [f.with_exp(f.exp - s) for f, s in zip(fs[1:], ss)]
        lv = list(t.leaves)
        for j, f in enumerate(newf):
            lv[2 * j + 1] = f
        out.append(Term(tuple(lv), t.tree).scaled(coef if exact else float(coef)))
    return out


def antiderivative_left(p: Phrase, l: int = 1) -> Phrase:
    """Phrase F with D^l F = p."""
    out = []
    for t in p.terms:
        out += antiderivative_term(t, l)
    return Phrase(p.level, tuple(out))


# -- plane restriction --------------------------------------------------------

@dataclass(frozen=True)
class PlaneForm:
    """{b_1 ... b_{k+1} (w^s w~^m)} with w = z - center and the power on the right."""

    b: tuple
    s: int
    m: int
    tree: BracketTree
    center: CayleyNumber | None

    def constant(self) -> CayleyNumber:
        return self.tree.fold(list(self.b), mul)

    def eval(self, z: CayleyNumber) -> CayleyNumber:
        w = z if self.center is None else z - self.center
        return mul(self.constant(), mul(_power(w, self.s), _power(w.conj(), self.m)))


def _split_coeff(c: CayleyNumber, M: CayleyNumber) -> tuple[CayleyNumber, CayleyNumber]:
    """c = (in-plane part) + (part orthogonal to R + M R)."""
    cf = c.to_float()
    t = float(np.dot(cf.coords, M.coords))
    inplane = CayleyNumber.real(c.level, float(cf.re)) + M.scale(t)
    return inplane, cf - inplane


def _kind(c: CayleyNumber, M: CayleyNumber, tol: float = 1e-13) -> str:
    inp, orth = _split_coeff(c, M)
    scale = max(1.0, c.to_float().norm())
    if orth.norm() <= tol * scale:
        return "plane"
    if inp.norm() <= tol * scale:
        return "orth"
    return "mixed"


def slot_index(t: Term) -> int:
    """Factor carrying the differential in slot integrals: most negative exponent, leftmost."""
    exps = t.exps
    return int(np.argmin(exps)) if exps else -1


def restrict_to_plane(t: Term, M: "Direction | CayleyNumber", n_check: int = 10,
                      rng: np.random.Generator | None = None, tol: float = 1e-12) -> list[PlaneForm] | None:
    """Plane normal forms of t on z in center + C_M, or None when not reducible.

    In-plane coefficients commute with w in C_M and pure orthogonal ones satisfy
    N w = w~ N, so every factor ends on the right of all coefficients, conjugated
    once per orthogonal coefficient it passes.  A term with one mixed coefficient
    is split into two.  Candidates involving orthogonal coefficients are checked
    by evaluation at n_check random points of the plane.
    """
    m = Direction.of(M).value.to_float()
    fs = t.factors
    center = fs[0].center if fs else None
    if any(not _center_eq(f.center, center) for f in fs):
        return None
    kinds = [_kind(c, m) for c in t.coeffs]
    mixed = [i for i, k in enumerate(kinds) if k == "mixed"]
    if len(mixed) > 1:
        return None
    variants = [list(t.coeffs)]
    kind_variants = [kinds]
    if mixed:
        i = mixed[0]
        inp, orth = _split_coeff(t.coeffs[i], m)
        v1, v2 = list(t.coeffs), list(t.coeffs)
        v1[i], v2[i] = inp, orth
        k1, k2 = list(kinds), list(kinds)
        k1[i], k2[i] = "plane", "orth"
        variants, kind_variants = [v1, v2], [k1, k2]
    rng = rng or np.random.default_rng(12345)
    forms = []
    b_tree = _contract_tree(t.tree)
    for coeffs, ks in zip(variants, kind_variants):
        s = mm = 0
        for j, f in enumerate(fs):
            flips = sum(1 for q in ks[j + 1:] if q == "orth")
            if f.conj ^ (flips % 2 == 1):
                mm += f.exp
            else:
                s += f.exp
        form = PlaneForm(tuple(coeffs), s, mm, b_tree, center)
        if all(q == "plane" for q in ks):
            # everything lies in the commutative associative plane: form is exact
            forms.append(form)
            continue
        sub = Term(tuple(coeffs[i // 2] if i % 2 == 0 else t.leaves[i] for i in range(len(t.leaves))), t.tree)
        if not _check_plane_form(sub, form, m, n_check, rng, tol):
            alt = replace(form, tree=BracketTree.left(len(coeffs)))
            if not _check_plane_form(sub, alt, m, n_check, rng, tol):
                return None
            form = alt
        forms.append(form)
    return forms


def _contract_tree(tree: BracketTree) -> BracketTree:
    """Tree over the coefficient leaves only (power leaves removed)."""
    counter = iter(range(tree.n))

    def rec(s):
        if s == LEAF:
            idx = next(counter)
            return LEAF if idx % 2 == 0 else None
        a, b = rec(s[0]), rec(s[1])
        if a is None:
            return b
        if b is None:
            return a
        return (a, b)

    return BracketTree(rec(tree.shape))


def _check_plane_form(t: Term, form: PlaneForm, m: CayleyNumber, n: int, rng, tol) -> bool:
    r = t.level
    base = CayleyNumber.zero(r) if form.center is None else form.center.to_float()
    for _ in range(n):
        rho = rng.uniform(0.5, 1.5)
        th = rng.uniform(0, 2 * math.pi)
        z = base + CayleyNumber.real(r, rho * math.cos(th)) + m.scale(rho * math.sin(th))
        lhs = t.eval(z.to_float() if not z.exact else z)
        rhs = form.eval(z)
        if (lhs - rhs).norm() > tol * max(1.0, lhs.norm()):
            return False
    return True
