"""Line integrals, residues, divisors and closed-form integral checks in A_r.

A line integral is the parameter integral of f^(gamma(t)).gamma'(t), where f^
is an operator (z, h) -> value.  For phrases f^ is the derivative of the left
antiderivative when that exists; otherwise the differential is slotted right
after the term's most singular factor, (w^n h), which is the derivative of the
logarithmic primitive along plane paths.

Residues use the value functional
    Res(z0, f).M = lim_{rho -> 0} (2 pi)^-1 int f(gamma(t)) (gamma' + gamma'~) dt
over circles gamma(t) = z0 + rho exp(2 pi t M).  It depends only on the values
of f and reduces to (2 pi)^-1 int f dz for functions holomorphic in the plane.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from octowrap.analytic import SeriesIntegrand, plane_apply, plane_value, series
from octowrap.cayley_dickson import (
    CayleyNumber,
    Direction,
    inverse,
    ln_cd,
    mul,
    mul_batch,
)
from octowrap.phrase import (
    BracketTree,
    Factor,
    Phrase,
    Term,
    _center_eq,
    _conj_rows,
    _dpow_batch,
    _factor_batch,
    antiderivative_term,
    derivative_batch,
    mul_phrases,
    normalize,
    restrict_to_plane,
    slot_index,
    D,
)

# 7-point Gauss-Legendre on [-1, 1]
_GL_X, _GL_W = np.polynomial.legendre.leggauss(7)


# -- paths --------------------------------------------------------------------

class Path:
    """Piecewise smooth map [0, 1] -> A_r."""

    level: int

    def breakpoints(self) -> list[float]:
        return [0.0, 1.0]

    def points(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def tangents(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def start(self) -> CayleyNumber:
        return CayleyNumber(self.level, self.points(np.array([0.0]))[0])

    def end(self) -> CayleyNumber:
        return CayleyNumber(self.level, self.points(np.array([1.0]))[0])

    def is_closed(self, tol: float = 1e-12) -> bool:
        return (self.start() - self.end()).norm() <= tol

    def length(self) -> float:
        t = np.linspace(0, 1, 2049)
        p = self.points(t)
        return float(np.linalg.norm(np.diff(p, axis=0), axis=1).sum())


@dataclass(frozen=True)
class Polyline(Path):
    vertices: tuple

    def __post_init__(self):
        if len(self.vertices) < 2:
            raise ValueError("a polyline needs at least two vertices")
        if len({v.level for v in self.vertices}) != 1:
            raise ValueError("vertices must share one level")

    @property
    def level(self) -> int:
        return self.vertices[0].level

    @property
    def _arr(self) -> np.ndarray:
        return np.array([v.to_float().coords for v in self.vertices])

    def breakpoints(self):
        k = len(self.vertices) - 1
        return [j / k for j in range(k + 1)]

    def _seg(self, t):
        k = len(self.vertices) - 1
        s = np.clip(np.asarray(t) * k, 0, k)
        j = np.minimum(np.floor(s).astype(int), k - 1)
        return j, s - j, k

    def points(self, t):
        V = self._arr
        j, u, _ = self._seg(t)
        return V[j] + u[:, None] * (V[j + 1] - V[j])

    def tangents(self, t):
        V = self._arr
        j, _, k = self._seg(t)
        return k * (V[j + 1] - V[j])

    def to_json(self) -> dict:
        return {"kind": "polyline", "vertices": [list(map(float, v.to_float().coords)) for v in self.vertices]}


@dataclass(frozen=True)
class Parametric(Polyline):
    """Sampled control points joined piecewise linearly."""

    def to_json(self) -> dict:
        return {"kind": "parametric", "points": [list(map(float, v.to_float().coords)) for v in self.vertices]}


@dataclass(frozen=True)
class PlaneCircle(Path):
    center: CayleyNumber
    radius: float
    M: Direction
    winding: int = 1

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.winding == 0:
            raise ValueError("winding must be a nonzero integer")
        object.__setattr__(self, "M", Direction.of(self.M))
        if self.M.level != self.center.level:
            raise ValueError("level mismatch between center and direction")

    @property
    def level(self) -> int:
        return self.center.level

    def breakpoints(self):
        k = 4 * abs(self.winding)
        return [j / k for j in range(k + 1)]

    def points(self, t):
        th = 2 * math.pi * self.winding * np.asarray(t, dtype=float)
        c = self.center.to_float().coords
        m = self.M.value.to_float().coords
        out = np.tile(c, (len(th), 1))
        out[:, 0] += self.radius * np.cos(th)
        out += (self.radius * np.sin(th))[:, None] * m
        return out

    def tangents(self, t):
        w = 2 * math.pi * self.winding
        th = w * np.asarray(t, dtype=float)
        m = self.M.value.to_float().coords
        out = np.zeros((len(th), len(m)))
        out[:, 0] = -self.radius * w * np.sin(th)
        out += (self.radius * w * np.cos(th))[:, None] * m
        return out

    def to_json(self) -> dict:
        return {
            "kind": "circle",
            "center": list(map(float, self.center.to_float().coords)),
            "radius": float(self.radius),
            "M": list(map(float, self.M.value.to_float().coords)),
            "winding": int(self.winding),
        }


def path_from_json(obj: dict) -> Path:
    kind = obj.get("kind")
    if kind == "circle":
        c = list(obj["center"])
        r = {2: 1, 4: 2, 8: 3}.get(len(c))
        if r is None:
            raise ValueError("circle center must have 2, 4 or 8 coordinates")
        return PlaneCircle(CayleyNumber(r, c), float(obj["radius"]), Direction(CayleyNumber(r, obj["M"])), int(obj.get("winding", 1)))
    if kind in ("polyline", "parametric"):
        pts = obj["vertices"] if kind == "polyline" else obj["points"]
        r = {2: 1, 4: 2, 8: 3}.get(len(pts[0]))
        if r is None:
            raise ValueError("vertices must have 2, 4 or 8 coordinates")
        verts = tuple(CayleyNumber(r, v) for v in pts)
        return Polyline(verts) if kind == "polyline" else Parametric(verts)
    raise ValueError(f"unknown path kind {kind!r}")


# -- integrands ---------------------------------------------------------------

@dataclass(frozen=True)
class Integrand:
    """Operator (Z, H) -> f^(z).h evaluated row-wise."""

    level: int
    op: Callable
    poles: tuple = ()

    def __call__(self, Z, H):
        return self.op(Z, H)


def _slot_term_op(t: Term, r: int) -> Callable:
    i = 2 * slot_index(t) + 1

    def op(Z, H):
        cache: dict = {}
        vals = []
        for j, leaf in enumerate(t.leaves):
            if isinstance(leaf, CayleyNumber):
                vals.append(np.broadcast_to(leaf.coords.astype(float), Z.shape))
            elif j == i:
                Hh = _conj_rows(H) if leaf.conj else H
                vals.append(mul_batch(_factor_batch(leaf, Z, r, cache), Hh, r))
            else:
                vals.append(_factor_batch(leaf, Z, r, cache))
        return t.tree.fold(vals, lambda a, b: mul_batch(a, b, r))

    return op


def phrase_poles(p: Phrase) -> list[CayleyNumber]:
    out: list[CayleyNumber] = []
    for t in p.terms:
        for f in t.factors:
            if f.exp < 0:
                c = f.center if f.center is not None else CayleyNumber.zero(p.level)
                if not any(_center_eq(c, q) for q in out):
                    out.append(c)
    return out


def phrase_integrand(p: Phrase) -> Integrand:
    r = p.level
    ops = []
    prims = []
    for t in p.terms:
        try:
            prims += antiderivative_term(t, 1)
        except ValueError:
            ops.append(_slot_term_op(t, r))
    F = Phrase(r, tuple(prims))

    def op(Z, H):
        acc = derivative_batch(F, Z, H) if F.terms else np.zeros_like(Z)
        for o in ops:
            acc = acc + o(Z, H)
        return acc

    return Integrand(r, op, tuple(phrase_poles(p)))


def function_integrand(f: Callable, r: int) -> Integrand:
    """f^(z).h = f(z) h for a row-wise value function f(Z)."""
    return Integrand(r, lambda Z, H: mul_batch(f(Z), H, r))


def series_integrand(s: SeriesIntegrand, r: int) -> Integrand:
    poles = (CayleyNumber.real(r, s.center),) if any(n < 0 for n in s.coeffs) else ()
    return Integrand(r, lambda Z, H: s.op_batch(Z, H, r), poles)


def as_integrand(f, r: int) -> Integrand:
    if isinstance(f, Integrand):
        return f
    if isinstance(f, Phrase):
        return phrase_integrand(f)
    if isinstance(f, SeriesIntegrand):
        return series_integrand(f, r)
    if callable(f):
        return function_integrand(f, r)
    raise TypeError(f"cannot integrate object of type {type(f).__name__}")


# -- quadrature ---------------------------------------------------------------

class QuadratureError(RuntimeError):
    def __init__(self, msg: str, estimate=None, error: float | None = None):
        super().__init__(msg)
        self.estimate = estimate
        self.error = error


@dataclass
class QuadResult:
    value: CayleyNumber
    error: float
    evaluations: int


def _gl(f: Integrand, path: Path, a: float, b: float) -> np.ndarray:
    t = 0.5 * (b - a) * _GL_X + 0.5 * (a + b)
    vals = f(path.points(t), path.tangents(t))
    return 0.5 * (b - a) * (_GL_W @ vals)


def quad_path(f: Integrand, path: Path, tol: float = 1e-9, max_depth: int = 40, max_intervals: int = 200000) -> QuadResult:
    """Adaptive composite 7-point Gauss-Legendre with bisection.

    Each interval's estimate is compared with the sum over its two halves; an
    interval is accepted when they differ by at most its share of tol.  The
    left-to-right stack order makes the summation order fixed.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    bps = path.breakpoints()
    total = np.zeros(1 << path.level)
    err = 0.0
    nev = 0
    span = bps[-1] - bps[0]
    for a0, b0 in zip(bps[:-1], bps[1:]):
        stack = [(a0, b0, _gl(f, path, a0, b0), 0)]
        nev += 7
        while stack:
            a, b, whole, depth = stack.pop()
            m = 0.5 * (a + b)
            left = _gl(f, path, a, m)
            right = _gl(f, path, m, b)
            nev += 14
            both = left + right
            e = float(np.linalg.norm(both - whole))
            share = tol * (b - a) / span
            if e <= max(share, 1e-15 * float(np.linalg.norm(both))):
                total = total + both
                err += e / 63.0
            elif depth >= max_depth or nev > 7 * max_intervals:
                raise QuadratureError(
                    f"quadrature did not converge near t in [{a:.6g}, {b:.6g}]", CayleyNumber(path.level, total + both), err + e
                )
            else:
                stack.append((m, b, right, depth + 1))
                stack.append((a, m, left, depth + 1))
    return QuadResult(CayleyNumber(path.level, total), err, nev)


def _check_poles(f: Integrand, path: Path, tol: float):
    if not f.poles:
        return
    t = np.linspace(0, 1, 4097)
    P = path.points(t)
    scale = max(1.0, path.length())
    for p in f.poles:
        d = float(np.min(np.linalg.norm(P - p.to_float().coords, axis=1)))
        if d <= math.sqrt(tol) * scale * 1e-2:
            raise ValueError(f"path passes within {d:.3g} of a pole at {p}")


def integrate(f, path: Path, tol: float = 1e-9) -> CayleyNumber:
    """Line integral of f along path to absolute tolerance tol."""
    g = as_integrand(f, path.level)
    _check_poles(g, path, tol)
    return quad_path(g, path, tol).value


# -- mean direction -----------------------------------------------------------

def _canonical_sign(v: np.ndarray) -> int:
    for c in v:
        if abs(c) > 1e-12:
            return 1 if c > 0 else -1
    return 1


def mean_direction(path: Path, z0: CayleyNumber, samples: int = 4096) -> tuple[Direction, int]:
    """(M, j) with M = (2 pi j)^-1 times the accumulated Ln increment of path - z0."""
    if isinstance(path, PlaneCircle):
        if (path.center - z0).norm() > 1e-12:
            # a circle not centred at z0: winding by angle accumulation below
            pass
        else:
            m = path.M.value.to_float()
            sgn = _canonical_sign(m.coords[1:])
            return Direction(m.scale(sgn)), path.winding * sgn
    if not path.is_closed(1e-9):
        raise ValueError("mean direction needs a closed path")
    bps = path.breakpoints()
    ts = np.unique(np.concatenate([np.linspace(a, b, samples + 1) for a, b in zip(bps[:-1], bps[1:])]))
    W = path.points(ts) - z0.to_float().coords
    norms = np.linalg.norm(W, axis=1)
    if np.min(norms) <= 1e-12:
        raise ValueError("path passes through z0")
    r = path.level
    # imaginary parts of Ln(a^-1 b) for consecutive samples a, b
    Q = mul_batch(_conj_rows(W[:-1]), W[1:], r) / (norms[:-1] ** 2)[:, None]
    U = Q[:, 1:]
    s = np.linalg.norm(U, axis=1)
    if np.any((s == 0) & (Q[:, 0] <= 0)):
        raise ValueError("path sampling too coarse: step crosses the branch cut")
    ang = np.divide(np.arctan2(s, Q[:, 0]), s, out=np.zeros_like(s), where=s > 0)
    v = (U * ang[:, None]).sum(axis=0)
    total = float(np.linalg.norm(v))
    j = int(round(total / (2 * math.pi)))
    if j == 0:
        raise ValueError("winding number about z0 is zero; mean direction undefined")
    vec = np.concatenate([[0.0], v / total])
    sgn = _canonical_sign(vec[1:])
    return Direction(CayleyNumber(r, vec * sgn)), j * sgn


def winding_about(path: Path, z0: CayleyNumber) -> tuple[Direction | None, int]:
    try:
        return mean_direction(path, z0)
    except ValueError as exc:
        if "zero" in str(exc):
            return None, 0
        raise


# -- residues -----------------------------------------------------------------

@dataclass
class ResidueEstimate:
    value: CayleyNumber
    defect: float
    radii: tuple
    estimates: tuple


def _value_functional(f, z0: CayleyNumber, M: Direction, rho: float, tol: float, orient: int = 1) -> np.ndarray:
    r = z0.level
    circle = PlaneCircle(z0.to_float(), rho, M, orient)
    vf = _value_fn(f, r)
    g = Integrand(r, lambda Z, H: mul_batch(vf(Z), 2.0 * np.column_stack([H[:, 0], np.zeros((len(H), H.shape[1] - 1))]), r))
    # tolerance relative to the size of the integrand on the circle
    ts = np.linspace(0.0, 1.0, 65)[:-1]
    mag = float(np.max(np.linalg.norm(g(circle.points(ts), circle.tangents(ts)), axis=1)))
    return quad_path(g, circle, tol * max(1.0, mag)).value.coords / (2 * math.pi)


def _value_fn(f, r: int) -> Callable:
    if isinstance(f, Phrase):
        return f.eval_batch
    if isinstance(f, SeriesIntegrand):
        return lambda Z: f.value_batch(Z, r)
    if callable(f):
        return f
    raise TypeError(f"cannot take residues of {type(f).__name__}")


def _neville_zero(xs: Sequence[float], ys: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Extrapolated values at x = 0 using the first k+1 points, k = 0..n-1."""
    out = []
    table: list[np.ndarray] = []
    for k in range(len(xs)):
        new = [ys[k]]
        for j in range(1, k + 1):
            xa, xb = xs[k - j], xs[k]
            prev = table[j - 1] if j - 1 < len(table) else None
            # P_{k-j..k}(0) from P_{k-j..k-1} and P_{k-j+1..k}
            p_left = prev
            p_right = new[j - 1]
            new.append((0 - xa) * p_right / (xb - xa) - (0 - xb) * p_left / (xb - xa))
        table = new
        out.append(new[-1])
    return out


def _limit(estimates: list[np.ndarray], xs: list[float], tol: float) -> tuple[np.ndarray, float]:
    ext = _neville_zero(xs, estimates)
    defect = float(np.linalg.norm(ext[-1] - ext[-2])) if len(ext) > 1 else math.inf
    return ext[-1], defect


def residue_numeric(f, z0: CayleyNumber, M: "Direction | CayleyNumber", radii: Sequence[float] | None = None,
                    rho: float = 0.5, tol: float = 1e-9, report: bool = False):
    """Residue as the rho -> 0 limit of the value functional on shrinking circles.

    Estimates at radii rho 2^-k (k = 0..6) are extrapolated in rho^2; the limit
    is accepted when the last two extrapolants differ by less than 10 tol.
    A non-unit M is handled by homogeneity.
    """
    m = M.value if isinstance(M, Direction) else M
    m = m.to_float()
    scale = m.norm()
    if scale == 0:
        return CayleyNumber.zero(z0.level)
    md = Direction(m.scale(1.0 / scale))
    radii = list(radii) if radii is not None else [rho * 2.0 ** -k for k in range(7)]
    est = [_value_functional(f, z0, md, rr, tol * 1e-2) for rr in radii]
    val, defect = _limit(est, [rr * rr for rr in radii], tol)
    if defect > 10 * tol * max(1.0, float(np.linalg.norm(val))):
        raise QuadratureError(
            f"limit not reached: defect {defect:.3g} (possible branch point or non-isolated singularity)",
            CayleyNumber(z0.level, val), defect,
        )
    out = CayleyNumber(z0.level, val * scale)
    if report:
        return ResidueEstimate(out, defect, tuple(radii), tuple(CayleyNumber(z0.level, e * scale) for e in est))
    return out


def residue_at_infinity(f, M: "Direction | CayleyNumber", radii: Sequence[float] | None = None,
                        tol: float = 1e-9, R: float = 10.0):
    """Res(inf, f).M: the value functional on reversed large circles, R -> inf."""
    m = M.value if isinstance(M, Direction) else M
    m = m.to_float()
    scale = m.norm()
    md = Direction(m.scale(1.0 / scale))
    r = m.level
    radii = list(radii) if radii is not None else [R * 2.0 ** k for k in range(5)]
    z0 = CayleyNumber.zero(r)
    est = [-_value_functional(f, z0, md, rr, tol * 1e-2) for rr in radii]
    growth = [float(np.linalg.norm(e)) for e in est]
    if growth[-1] > 4 * max(growth[0], 1e-300) and growth[-1] > 1e-6:
        raise QuadratureError("residue at infinity diverges: f does not decay", CayleyNumber(r, est[-1]), growth[-1])
    val, defect = _limit(est, [1.0 / (rr * rr) for rr in radii], tol)
    if defect > 10 * tol * max(1.0, float(np.linalg.norm(val))):
        raise QuadratureError(f"limit not reached at infinity: defect {defect:.3g}", CayleyNumber(r, val), defect)
    return CayleyNumber(r, val * scale)


class ResidueRuleError(ValueError):
    pass


def _plane_rule(form, M: CayleyNumber) -> CayleyNumber:
    n = form.s + form.m
    p = form.s - form.m
    B = form.constant().to_float()
    if abs(p) != 1:
        return CayleyNumber.zero(B.level)
    if n == -1:
        return mul(B, M) if p == -1 else mul(B, M.conj())
    if n <= -3:
        raise ResidueRuleError(
            f"residue does not exist: plane form w^{form.s} w~^{form.m} has a divergent first harmonic"
        )
    return CayleyNumber.zero(B.level)


def residue_symbolic(p: Phrase, z0: CayleyNumber, M: "Direction | CayleyNumber") -> CayleyNumber:
    """Residue from the monomial rules.

    A term with a single singular factor (w^-1 or w~^-1 at z0) and all other
    factors regular at z0 gives the term with that factor replaced by M (or M~)
    and the rest evaluated at z0.  A term all of whose factors are centred at z0
    is brought to its plane form b (w^s w~^m) and contributes b M for
    (s, m) = (-1, 0), b M~ for (0, -1) and zero for the other convergent cases.
    """
    m = (M.value if isinstance(M, Direction) else M).to_float()
    r = p.level
    acc = CayleyNumber.zero(r)
    for t in p.terms:
        here = [j for j, f in enumerate(t.factors) if _center_eq(f.center, z0)]
        singular = [j for j in here if t.factors[j].exp < 0]
        if not singular:
            continue
        if len(singular) == 1 and t.factors[singular[0]].exp == -1:
            j = singular[0]
            f = t.factors[j]
            vals = []
            for i, leaf in enumerate(t.leaves):
                if isinstance(leaf, CayleyNumber):
                    vals.append(leaf.to_float())
                elif i == 2 * j + 1:
                    vals.append(m.conj() if f.conj else m)
                elif _center_eq(leaf.center, z0):
                    vals.append(CayleyNumber.real(r, 1.0 if leaf.exp == 0 else 0.0))
                else:
                    vals.append(_factor_at(leaf, z0))
            acc = acc + t.tree.fold(vals, mul)
            continue
        if len(here) == len(t.factors):
            forms = restrict_to_plane(t, m)
            if forms is None:
                raise ResidueRuleError("residue rule inapplicable; use residue_numeric")
            for form in forms:
                acc = acc + _plane_rule(form, m)
            continue
        raise ResidueRuleError("residue rule inapplicable; use residue_numeric")
    return acc


def _factor_at(f: Factor, z: CayleyNumber) -> CayleyNumber:
    from octowrap.phrase import _factor_value

    return _factor_value(f, z.to_float())


def residue_basis(f, z0: CayleyNumber, method: str = "numeric", **kw) -> list[CayleyNumber]:
    """Residue values on the imaginary generators i_1..i_{2^r-1}."""
    r = z0.level
    out = []
    for j in range(1, 1 << r):
        g = Direction(CayleyNumber.generator(r, j))
        out.append(residue_numeric(f, z0, g, **kw) if method == "numeric" else residue_symbolic(f, z0, g))
    return out


def residue_from_basis(basis: Sequence[CayleyNumber], M: CayleyNumber) -> CayleyNumber:
    """Extend basis values R-linearly to M = sum_j m_j i_j."""
    acc = CayleyNumber.zero(M.level)
    for j, v in enumerate(basis, start=1):
        acc = acc + v.scale(float(M.to_float().coords[j]))
    return acc


# -- residue theorem and Cauchy formula ---------------------------------------

@dataclass
class Report:
    lhs: CayleyNumber
    rhs: CayleyNumber
    defect: float
    details: dict = field(default_factory=dict)

    def ok(self, tol: float) -> bool:
        return self.defect <= tol


def residue_theorem_check(f: Phrase, loop: Path, tol: float = 1e-10) -> Report:
    """Compare int_loop f with 2 pi sum_j winding_j Res(p_j, f).M_j."""
    lhs = integrate(f, loop, tol)
    rhs = CayleyNumber.zero(f.level)
    poles = []
    for p in phrase_poles(f):
        M, j = winding_about(loop, p)
        if j == 0:
            poles.append((str(p), 0, None))
            continue
        try:
            res = residue_symbolic(f, p, M)
        except ResidueRuleError:
            res = residue_numeric(f, p, M, tol=tol)
        rhs = rhs + res.scale(2 * math.pi * j)
        poles.append((str(p), j, str(res)))
    return Report(lhs, rhs, (lhs - rhs).norm(), {"poles": poles})


def global_residue_sum(f: Phrase, M: "Direction | CayleyNumber", tol: float = 1e-9) -> Report:
    """Sum of finite residues in the plane of M plus the residue at infinity."""
    finite = CayleyNumber.zero(f.level)
    for p in phrase_poles(f):
        try:
            finite = finite + residue_symbolic(f, p, M)
        except ResidueRuleError:
            finite = finite + residue_numeric(f, p, M, tol=tol)
    inf = residue_at_infinity(f, M, tol=tol)
    total = finite + inf
    return Report(finite, -inf, total.norm(), {"infinity": str(inf)})


def cauchy_eval(f, z: CayleyNumber, circle: PlaneCircle, tol: float = 1e-11) -> CayleyNumber:
    """(2 pi j)^-1 (int f(zeta) (zeta - z)^-1 dzeta) M* over a plane circle."""
    r = circle.level
    c = circle.center.to_float()
    m = circle.M.value.to_float()
    w = z.to_float() - c
    along = float(np.dot(w.coords, m.coords))
    off = w - CayleyNumber.real(r, float(w.re)) - m.scale(along)
    if off.norm() > 1e-12:
        raise ValueError("point is not in the plane of the circle")
    if w.norm() >= circle.radius:
        raise ValueError("point lies outside the circle's disc")
    vf = _value_fn(f, r)
    zc = z.to_float().coords

    def op(Z, H):
        W = Z - zc
        n2 = np.einsum("ij,ij->i", W, W)
        inv = _conj_rows(W) / n2[:, None]
        return mul_batch(vf(Z), mul_batch(inv, H, r), r)

    val = quad_path(Integrand(r, op), circle, tol).value
    return mul(val, m.conj()).scale(1.0 / (2 * math.pi * circle.winding))


# -- divisors -----------------------------------------------------------------

@dataclass(frozen=True)
class Divisor:
    value: float  # an int, or +/- math.inf

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)

    def __add__(self, other: "Divisor") -> "Divisor":
        return Divisor(self.value + other.value)

    def __int__(self):
        return int(self.value)


def _term_degree_at(t: Term, z0) -> int:
    if z0 == "inf":
        return t.degree
    return sum(f.exp for f in t.factors if _center_eq(f.center, z0))


def divisor(p: Phrase, at) -> Divisor:
    """Least total degree of nonzero terms at a finite point, or minus the largest at infinity."""
    q = normalize(p)
    if not q.terms:
        return Divisor(math.inf)
    if isinstance(at, str):
        if at != "inf":
            raise ValueError("point must be a CayleyNumber or 'inf'")
        return Divisor(-max(t.degree for t in q.terms))
    return Divisor(min(_term_degree_at(t, at) for t in q.terms))


def classify_singularity(p: Phrase, at) -> tuple[str, int]:
    d = divisor(p, at)
    if not d.finite:
        return ("removable", 0)
    v = int(d.value)
    if v < 0:
        return ("pole", -v)
    return ("removable", 0)


# -- closed forms -------------------------------------------------------------

@dataclass
class ClosedFormRow:
    formula: str
    lhs: CayleyNumber | None
    rhs: CayleyNumber | None
    defect: float
    status: str
    note: str = ""

    def to_json(self) -> dict:
        return {
            "formula": self.formula,
            "lhs": None if self.lhs is None else self.lhs.to_json(),
            "rhs": None if self.rhs is None else self.rhs.to_json(),
            "defect": self.defect,
            "status": self.status,
            "note": self.note,
        }


def _cd(r: int, d: dict) -> CayleyNumber:
    c = [0.0] * (1 << r)
    for k, v in d.items():
        c[k] = v
    return CayleyNumber(r, c)


def _pv(fc, z):
    return plane_value(fc, z)


def closed_form_suite(tol: float = 1e-7, r: int = 3, quad_tol: float = 1e-11) -> list[ClosedFormRow]:
    """Quadrature against the closed-form table, one row per formula."""
    rows: list[ClosedFormRow] = []
    one = CayleyNumber.real(r, 1.0)

    def run(name, f, path, rhs, domain_ok=True, note=""):
        if not domain_ok:
            rows.append(ClosedFormRow(name, None, None, math.nan, "skipped", note or "path outside validity domain"))
            return
        lhs = integrate(f, path, quad_tol)
        d = (lhs - rhs).norm()
        rows.append(ClosedFormRow(name, lhs, rhs, d, "pass" if d <= tol else "fail", note))

    a = _cd(r, {0: 0.1, 1: 0.2, 4: -0.1})
    b = _cd(r, {0: 0.3, 2: 0.25, 5: 0.15})
    bend = _cd(r, {0: 0.2, 3: 0.3, 6: -0.2})
    gen_path = Polyline((a, bend, b))

    def S(name, **kw):
        return SeriesIntegrand(series(name, **kw))

    # z^n
    n = 3
    z0 = CayleyNumber.zero(r)
    bb = _cd(r, {0: 1.0, 2: 1.0})
    run("z^3", Phrase.monomial(r, n), Polyline((z0, bb)), (_pow(bb, 4) - _pow(z0, 4)).scale(0.25))
    run("z^5 off-plane", Phrase.monomial(r, 5), gen_path, (_pow(b, 6) - _pow(a, 6)).scale(1 / 6))
    # exp
    run("e^z", S("exp"), gen_path, _pv(np.exp, b) - _pv(np.exp, a))
    # (1+y)^-1 for |y| < 1
    run("1/(1+y)", S("recip_shift"), Polyline((a.scale(0.5), b.scale(0.5))),
        _pv(np.log, one + b.scale(0.5)) - _pv(np.log, one + a.scale(0.5)))
    # z^-1 along an arc in a plane avoiding the cut
    M1 = CayleyNumber.generator(r, 1)
    arc_pts = tuple(CayleyNumber.real(r, math.cos(th)) + M1.scale(math.sin(th)) for th in np.linspace(-1.0, 1.0, 3))
    arc = Polyline(arc_pts)
    run("dLn = z^-1 dz", Phrase.monomial(r, -1), arc, ln_cd(arc_pts[-1]) - ln_cd(arc_pts[0]),
        note="plane path; slot operator w^-1 h")
    # generic real power series: exp(z) + cos(2z) coefficients
    coeffs = series("exp")
    for k, v in series("cos").items():
        coeffs[k] = coeffs.get(k, 0.0) + v * 2.0 ** k
    run("sum a_n z^n", SeriesIntegrand(coeffs), gen_path,
        (_pv(np.exp, b) + _pv(lambda x: np.sin(2 * x) / 2, b)) - (_pv(np.exp, a) + _pv(lambda x: np.sin(2 * x) / 2, a)))
    run("sin", S("sin"), gen_path, _pv(np.cos, a) - _pv(np.cos, b))
    run("cos", S("cos"), gen_path, _pv(np.sin, b) - _pv(np.sin, a))
    # negative integer power, path avoiding 0
    pa, pb = _cd(r, {0: 1.0, 3: 0.5}), _cd(r, {0: 0.4, 1: 1.2, 7: -0.3})
    run("z^-3", Phrase.monomial(r, -3), Polyline((pa, _cd(r, {0: 1.1, 1: 0.9}), pb)),
        (_pow(pb, -2) - _pow(pa, -2)).scale(-0.5))
    # real power, binomial series about 1
    alpha = 0.37
    qa, qb = _cd(r, {0: 0.8, 2: 0.2}), _cd(r, {0: 1.2, 2: -0.1, 6: 0.25})
    run("z^0.37", SeriesIntegrand(series("pow", alpha=alpha, center=1.0), 1.0), Polyline((qa, qb)),
        (_pv(lambda x: x ** (alpha + 1), qb) - _pv(lambda x: x ** (alpha + 1), qa)).scale(1 / (alpha + 1)))
    # arcsin, Re != 0 along the path, |y| < 1
    sa, sb = _cd(r, {0: 0.1, 1: 0.2}), _cd(r, {0: 0.35, 4: 0.3, 2: -0.1})
    run("1/sqrt(1-y^2)", S("arcsin_d"), Polyline((sa, sb)), _pv(np.arcsin, sb) - _pv(np.arcsin, sa))
    run("cos^-2", S("sec2"), gen_path, _pv(np.tan, b) - _pv(np.tan, a))
    # sin^-2 on a path avoiding 0 with |z| < pi
    ca, cb = _cd(r, {0: 0.6, 1: 0.3}), _cd(r, {0: 1.1, 5: -0.4})
    cpath = Polyline((ca, _cd(r, {0: 0.9, 3: 0.5}), cb))
    cot = lambda x: np.cos(x) / np.sin(x)
    run("sin^-2", S("csc2"), cpath, _pv(cot, ca) - _pv(cot, cb))
    run("cosh", S("cosh"), gen_path, _pv(np.sinh, b) - _pv(np.sinh, a))
    run("sinh", S("sinh"), gen_path, _pv(np.cosh, b) - _pv(np.cosh, a))
    coth = lambda x: np.cosh(x) / np.sinh(x)
    run("sinh^-2", S("csch2"), cpath, _pv(coth, ca) - _pv(coth, cb))
    run("cosh^-2", S("sech2"), gen_path, _pv(np.tanh, b) - _pv(np.tanh, a))
    run("1/(1+z^2)", S("arctan_d"), Polyline((a.scale(1.2), b.scale(1.2))),
        _pv(np.arctan, b.scale(1.2)) - _pv(np.arctan, a.scale(1.2)))
    al = 2.0
    ha, hb = _cd(r, {0: 0.2, 1: 0.3, 7: 0.1}), _cd(r, {0: 0.5, 3: -0.4})
    F34 = lambda x: np.log(x + np.sqrt(x * x + al))
    run("1/sqrt(z^2+2)", S("asinh_d", alpha=al), Polyline((ha, hb)), _pv(F34, hb) - _pv(F34, ha))
    # conjugation covariance for a real-coefficient integrand
    g = _cd(r, {0: 0.7, 1: -0.4, 3: 0.5, 6: 0.2})
    gi = inverse(g)
    conj_path = Polyline(tuple(mul(mul(g, v), gi) for v in (a, bend, b)))
    lhs0 = integrate(S("sin"), gen_path, quad_tol)
    run("conjugation covariance", S("sin"), conj_path, mul(mul(g, lhs0), gi))
    return rows


def _pow(z: CayleyNumber, n: int) -> CayleyNumber:
    from octowrap.phrase import _power

    return _power(z.to_float(), n)


# -- integration by parts -----------------------------------------------------

def integration_by_parts_check(f1: Phrase, f2: Phrase, path: Path, tol: float = 1e-11) -> Report:
    """int f1 (f2'.1) against f1 f2 |_a^b - int (f1'.1) f2."""
    lhs = integrate(mul_phrases(f1, D(f2)), path, tol)
    a, b = path.start(), path.end()
    boundary = mul(f1.eval(b), f2.eval(b)) - mul(f1.eval(a), f2.eval(a))
    rhs = boundary - integrate(mul_phrases(D(f1), f2), path, tol)
    return Report(lhs, rhs, (lhs - rhs).norm(), {"boundary": str(boundary)})
