"""Cayley-Dickson algebras A_1 (complex), A_2 (quaternions), A_3 (octonions).

Elements carry 2^r real coordinates over the generators i_0..i_{2^r-1}.
Coordinates are float64 by default; passing ``fractions.Fraction`` values
(or ``exact=True``) keeps all ring operations exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

LEVELS = (1, 2, 3)


def _check_level(r: int) -> int:
    if r not in LEVELS:
        raise ValueError(f"level out of range: {r!r} (supported: 1, 2, 3)")
    return r


# -- reference product by recursive doubling ---------------------------------

def _conj_rec(x: list) -> list:
    return [x[0]] + [-c for c in x[1:]]


def doubling_product(x: Sequence, y: Sequence) -> list:
    """Product of two coordinate lists by the recursive doubling rule.

    Writing x = u + v l and y = w + t l with halves u, v, w, t,
    the product is (u w - conj(t) v) + (t u + v conj(w)) l.
    Works for any power-of-two length and any numeric coefficient type.
    """
    n = len(x)
    if n != len(y):
        raise ValueError("operands have different lengths")
    if n == 1:
        return [x[0] * y[0]]
    h = n // 2
    u, v, w, t = list(x[:h]), list(x[h:]), list(y[:h]), list(y[h:])
    a = doubling_product(u, w)
    b = doubling_product(_conj_rec(t), v)
    c = doubling_product(t, u)
    d = doubling_product(v, _conj_rec(w))
    return [p - q for p, q in zip(a, b)] + [p + q for p, q in zip(c, d)]


@dataclass(frozen=True)
class MulTable:
    """i_j i_k = sign[j, k] * i_{index[j, k]}."""

    level: int
    sign: np.ndarray
    index: np.ndarray

    @property
    def dim(self) -> int:
        return 1 << self.level

    @property
    def structure(self) -> np.ndarray:
        """Structure constants T[j, k, c] with i_j i_k = sum_c T[j,k,c] i_c."""
        return _structure(self.level)


@lru_cache(maxsize=None)
def make_table(r: int) -> MulTable:
    """Multiplication table of A_r built from the doubling rule."""
    _check_level(r)
    n = 1 << r
    sign = np.zeros((n, n), dtype=np.int8)
    index = np.zeros((n, n), dtype=np.int64)
    for j in range(n):
        for k in range(n):
            ej = [0] * n
            ek = [0] * n
            ej[j] = 1
            ek[k] = 1
            prod = doubling_product(ej, ek)
            (c,) = [m for m, val in enumerate(prod) if val != 0]
            index[j, k] = c
            sign[j, k] = prod[c]
    sign.setflags(write=False)
    index.setflags(write=False)
    return MulTable(r, sign, index)


@lru_cache(maxsize=None)
def _structure(r: int) -> np.ndarray:
    t = make_table(r)
    n = t.dim
    out = np.zeros((n, n, n))
    for j in range(n):
        for k in range(n):
            out[j, k, t.index[j, k]] = t.sign[j, k]
    out.setflags(write=False)
    return out


# -- elements -----------------------------------------------------------------

def _is_exact(values) -> bool:
    return all(isinstance(v, (int, Fraction)) and not isinstance(v, bool) for v in values) and any(
        isinstance(v, Fraction) for v in values
    )


class CayleyNumber:
    """An element of A_r, immutable."""

    __slots__ = ("level", "coords", "exact")

    def __init__(self, level: int, coords: Sequence, exact: bool | None = None):
        _check_level(level)
        vals = list(coords)
        if len(vals) != 1 << level:
            raise ValueError(f"level {level} needs {1 << level} coordinates, got {len(vals)}")
        if exact is None:
            exact = _is_exact(vals)
        if exact:
            arr = np.empty(len(vals), dtype=object)
            arr[:] = [Fraction(v) for v in vals]
        else:
            arr = np.asarray(vals, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "level", level)
        object.__setattr__(self, "coords", arr)
        object.__setattr__(self, "exact", bool(exact))

    def __setattr__(self, name, value):
        raise AttributeError("CayleyNumber is immutable")

    # constructors
    @classmethod
    def zero(cls, level: int, exact: bool = False) -> "CayleyNumber":
        return cls(level, [0] * (1 << level), exact=exact)

    @classmethod
    def real(cls, level: int, value=1, exact: bool = False) -> "CayleyNumber":
        c = [0] * (1 << level)
        c[0] = value
        return cls(level, c, exact=exact)

    @classmethod
    def generator(cls, level: int, j: int, exact: bool = False) -> "CayleyNumber":
        n = 1 << _check_level(level)
        if not 0 <= j < n:
            raise ValueError(f"generator index {j} outside 0..{n - 1}")
        c = [0] * n
        c[j] = 1
        return cls(level, c, exact=exact)

    @classmethod
    def from_json(cls, obj: dict) -> "CayleyNumber":
        r = int(obj["r"])
        coords = [_rational_from_json(c) for c in obj["coords"]]
        return cls(r, coords)

    def to_json(self) -> dict:
        if self.exact:
            coords = [{"num": c.numerator, "den": c.denominator} for c in self.coords]
        else:
            coords = [float(c) for c in self.coords]
        return {"r": self.level, "coords": coords}

    # basic accessors
    @property
    def dim(self) -> int:
        return 1 << self.level

    @property
    def re(self):
        return self.coords[0]

    def im(self) -> "CayleyNumber":
        c = list(self.coords)
        c[0] = 0
        return CayleyNumber(self.level, c, exact=self.exact)

    def conj(self) -> "CayleyNumber":
        c = [-v for v in self.coords]
        c[0] = self.coords[0]
        return CayleyNumber(self.level, c, exact=self.exact)

    def norm2(self):
        return sum(v * v for v in self.coords) if self.exact else float(np.dot(self.coords, self.coords))

    def norm(self) -> float:
        return math.sqrt(self.norm2())

    def to_float(self) -> "CayleyNumber":
        return self if not self.exact else CayleyNumber(self.level, [float(v) for v in self.coords])

    # arithmetic
    def _coerce(self, other) -> "CayleyNumber":
        if isinstance(other, CayleyNumber):
            if other.level != self.level:
                raise ValueError(f"level mismatch: {self.level} vs {other.level}")
            return other
        if isinstance(other, (int, float, Fraction, np.floating, np.integer)):
            return CayleyNumber.real(self.level, other, exact=self.exact and not isinstance(other, float))
        return NotImplemented

    def _combine(self, other, op):
        exact = self.exact and other.exact
        a = self.coords if exact else self.coords.astype(float)
        b = other.coords if exact else other.coords.astype(float)
        return CayleyNumber(self.level, op(a, b), exact=exact)

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self._combine(o, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self._combine(o, lambda a, b: a - b)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o._combine(self, lambda a, b: a - b)

    def __neg__(self):
        return CayleyNumber(self.level, [-v for v in self.coords], exact=self.exact)

    def __mul__(self, other):
        if isinstance(other, CayleyNumber):
            return mul(self, other)
        if isinstance(other, (int, float, Fraction, np.floating, np.integer)):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, Fraction, np.floating, np.integer)):
            return self.scale(other)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, CayleyNumber):
            return mul(self, inverse(other))
        if other == 0:
            raise ZeroDivisionError("division by zero")
        if self.exact and isinstance(other, (int, Fraction)):
            return self.scale(Fraction(1) / Fraction(other))
        return self.scale(1.0 / other)

    def scale(self, s) -> "CayleyNumber":
        exact = self.exact and isinstance(s, (int, Fraction)) and not isinstance(s, bool)
        if exact:
            return CayleyNumber(self.level, [v * s for v in self.coords], exact=True)
        return CayleyNumber(self.level, self.coords.astype(float) * float(s))

    def __eq__(self, other):
        if not isinstance(other, CayleyNumber):
            return NotImplemented
        return self.level == other.level and all(a == b for a, b in zip(self.coords, other.coords))

    def __hash__(self):
        return hash((self.level, tuple(self.coords)))

    def allclose(self, other: "CayleyNumber", tol: float = 1e-12) -> bool:
        return distance(self, other) <= tol

    def __repr__(self):
        return f"CayleyNumber({self.level}, {format_cd(self)!r})"

    def __str__(self):
        return format_cd(self)


def _rational_from_json(c):
    if isinstance(c, dict):
        return Fraction(int(c["num"]), int(c["den"]))
    return c


def format_cd(z: CayleyNumber, digits: int = 12) -> str:
    parts = []
    for j, v in enumerate(z.coords):
        if v == 0:
            continue
        s = str(v) if z.exact else f"{float(v):.{digits}g}"
        parts.append(s if j == 0 else f"{s}*i{j}")
    return " + ".join(parts).replace("+ -", "- ") if parts else "0"


def distance(x: CayleyNumber, y: CayleyNumber) -> float:
    d = x.coords.astype(float) - y.coords.astype(float)
    return float(np.sqrt(np.dot(d, d)))


# -- ring operations ----------------------------------------------------------

def mul(x: CayleyNumber, y: CayleyNumber) -> CayleyNumber:
    """Product x*y through the generated table."""
    if x.level != y.level:
        raise ValueError(f"level mismatch: {x.level} vs {y.level}")
    if x.exact and y.exact:
        t = make_table(x.level)
        out = [Fraction(0)] * x.dim
        for j, a in enumerate(x.coords):
            if a == 0:
                continue
            for k, b in enumerate(y.coords):
                if b:
                    out[t.index[j, k]] += int(t.sign[j, k]) * a * b
        return CayleyNumber(x.level, out, exact=True)
    T = _structure(x.level)
    return CayleyNumber(x.level, np.einsum("j,k,jkc->c", x.coords.astype(float), y.coords.astype(float), T))


def mul_batch(x: np.ndarray, y: np.ndarray, r: int) -> np.ndarray:
    """Row-wise product of coordinate arrays of shape (m, 2^r)."""
    return np.einsum("nj,nk,jkc->nc", x, y, _structure(_check_level(r)), optimize=True)


def inverse(x: CayleyNumber) -> CayleyNumber:
    """Two-sided inverse conj(x)/|x|^2."""
    n2 = x.norm2()
    if n2 == 0:
        raise ZeroDivisionError("division by zero: zero has no inverse")
    c = x.conj()
    return c.scale(Fraction(1) / n2) if x.exact else c.scale(1.0 / n2)


def commutator(x: CayleyNumber, y: CayleyNumber) -> CayleyNumber:
    return mul(x, y) - mul(y, x)


def associator(x: CayleyNumber, y: CayleyNumber, z: CayleyNumber) -> CayleyNumber:
    return mul(mul(x, y), z) - mul(x, mul(y, z))


class MoufangReport(NamedTuple):
    m1: float
    m2: float
    m3: float

    @property
    def max_deviation(self) -> float:
        return max(self.m1, self.m2, self.m3)


def moufang_check(x: CayleyNumber, y: CayleyNumber, z: CayleyNumber) -> MoufangReport:
    """Deviations of M1 (xyx)z = x(y(xz)), M2 z(xyx) = ((zx)y)x, M3 (xy)(zx) = x(yz)x."""
    xyx = mul(mul(x, y), x)
    m1 = distance(mul(xyx, z), mul(x, mul(y, mul(x, z))))
    m2 = distance(mul(z, xyx), mul(mul(mul(z, x), y), x))
    m3 = distance(mul(mul(x, y), mul(z, x)), mul(mul(x, mul(y, z)), x))
    return MoufangReport(m1, m2, m3)


def moufang_batch(x: np.ndarray, y: np.ndarray, z: np.ndarray, r: int) -> np.ndarray:
    """Per-row max deviation over the three Moufang identities for coordinate arrays of shape (m, 2^r)."""
    def m(a, b):
        return mul_batch(a, b, r)

    xyx = m(m(x, y), x)
    d1 = np.linalg.norm(m(xyx, z) - m(x, m(y, m(x, z))), axis=1)
    d2 = np.linalg.norm(m(z, xyx) - m(m(m(z, x), y), x), axis=1)
    d3 = np.linalg.norm(m(m(x, y), m(z, x)) - m(m(x, m(y, z)), x), axis=1)
    return np.maximum(np.maximum(d1, d2), d3)


# -- directions, polar form, exp/log ------------------------------------------

@dataclass(frozen=True)
class Direction:
    """A purely imaginary unit element M."""

    value: CayleyNumber

    def __post_init__(self):
        v = self.value.to_float()
        if abs(v.re) > 1e-12 or abs(v.norm() - 1.0) > 1e-12:
            raise ValueError("direction must be purely imaginary with unit norm")

    @classmethod
    def of(cls, m: "Direction | CayleyNumber") -> "Direction":
        return m if isinstance(m, Direction) else cls(m)

    @property
    def level(self) -> int:
        return self.value.level


def _as_cd(m: "Direction | CayleyNumber") -> CayleyNumber:
    return m.value if isinstance(m, Direction) else m


class Polar(NamedTuple):
    rho: float
    theta: float
    M: Direction


def polar(z: CayleyNumber) -> Polar:
    """z = rho (cos 2 pi theta + M sin 2 pi theta), theta in [0, 1/2)."""
    z = z.to_float()
    a = float(z.re)
    im = z.im()
    s = im.norm()
    if s == 0.0:
        if a > 0:
            return Polar(a, 0.0, Direction(CayleyNumber.generator(z.level, 1)))
        if a == 0:
            raise ValueError("polar form undefined at zero")
        raise ValueError("on branch cut: negative real axis, direction M undetermined")
    return Polar(z.norm(), math.atan2(s, a) / (2 * math.pi), Direction(im.scale(1.0 / s)))


def exp_cd(z: CayleyNumber) -> CayleyNumber:
    z = z.to_float()
    a = float(z.re)
    im = z.im()
    s = im.norm()
    ea = math.exp(a)
    if s == 0.0:
        return CayleyNumber.real(z.level, ea)
    return CayleyNumber.real(z.level, ea * math.cos(s)) + im.scale(ea * math.sin(s) / s)


def ln_cd(z: CayleyNumber) -> CayleyNumber:
    """Principal logarithm, Arg in (0, pi) along Im(z)/|Im(z)|."""
    z = z.to_float()
    a = float(z.re)
    im = z.im()
    s = im.norm()
    if s == 0.0:
        if a > 0:
            return CayleyNumber.real(z.level, math.log(a))
        if a == 0:
            raise ValueError("logarithm undefined at zero")
        raise ValueError("on branch cut: Ln is not defined on the negative real axis")
    return CayleyNumber.real(z.level, math.log(z.norm())) + im.scale(math.atan2(s, a) / s)


def pow_real(z: CayleyNumber, alpha: float) -> CayleyNumber:
    """Principal real power exp(alpha Ln z)."""
    return exp_cd(ln_cd(z).scale(alpha))


# -- plane decomposition ------------------------------------------------------

class PlaneSplit(NamedTuple):
    x: CayleyNumber
    y: float
    N: CayleyNumber | None
    defined: bool


def canonical_orthogonal(M: "Direction | CayleyNumber") -> CayleyNumber | None:
    """Lowest-index generator orthogonal to M, or None when there is none."""
    m = _as_cd(M).to_float()
    for j in range(1, m.dim):
        if abs(m.coords[j]) <= 1e-12:
            return CayleyNumber.generator(m.level, j)
    # no coordinate axis is orthogonal; project i_1 or i_2 off M
    for j in range(1, m.dim):
        g = CayleyNumber.generator(m.level, j)
        w = g - m.scale(float(m.coords[j]))
        if w.norm() > 1e-12:
            return w.scale(1.0 / w.norm())
    return None


def plane_decompose(z: CayleyNumber, M: "Direction | CayleyNumber", tol: float = 1e-14) -> PlaneSplit:
    """Split z = x + y N with x in R + M R, y >= 0 and N a direction orthogonal to M."""
    m = Direction.of(M).value.to_float()
    z = z.to_float()
    t = float(np.dot(z.coords, m.coords))
    x = CayleyNumber.real(z.level, float(z.re)) + m.scale(t)
    w = z - x
    y = w.norm()
    if y <= tol * max(1.0, z.norm()):
        return PlaneSplit(x, 0.0, canonical_orthogonal(m), False)
    return PlaneSplit(x, y, w.scale(1.0 / y), True)


def random_cd(rng: np.random.Generator, r: int, scale: float = 1.0) -> CayleyNumber:
    return CayleyNumber(r, rng.normal(scale=scale, size=1 << _check_level(r)))


def random_direction(rng: np.random.Generator, r: int) -> Direction:
    v = rng.normal(size=1 << _check_level(r))
    v[0] = 0.0
    return Direction(CayleyNumber(r, v / np.linalg.norm(v)))
