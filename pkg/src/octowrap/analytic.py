"""Real-analytic functions on A_r: plane evaluation and truncated series integrands.

A function with real Taylor coefficients maps each plane R + M R into itself,
so its value at z is read off from the complex function at x + i|Im z|.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from octowrap.cayley_dickson import CayleyNumber, mul_batch
from octowrap.phrase import _conj_rows, dpow_batch

SERIES_ORDER = 40


def plane_apply(fc: Callable, Z: np.ndarray) -> np.ndarray:
    """Apply a complex function with real coefficients row-wise to A_r points."""
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    x = Z[:, 0]
    u = Z[:, 1:]
    s = np.linalg.norm(u, axis=1)
    w = fc(x + 1j * s)
    out = np.zeros_like(Z)
    out[:, 0] = w.real
    nz = s > 0
    out[nz, 1:] = (w.imag[nz] / s[nz])[:, None] * u[nz]
    return out


def plane_value(fc: Callable, z: CayleyNumber) -> CayleyNumber:
    return CayleyNumber(z.level, plane_apply(fc, z.to_float().coords[None, :])[0])


# -- coefficient generators ---------------------------------------------------

def _binom(a: float, n: int) -> float:
    out = 1.0
    for j in range(n):
        out *= (a - j) / (j + 1)
    return out


def _riccati(sign: int, order: int) -> list[Fraction]:
    """Taylor coefficients of T with T' = 1 + sign*T^2, T(0) = 0 (tan or tanh)."""
    t = [Fraction(0)] * (order + 2)
    for n in range(order + 1):
        sq = sum((t[i] * t[n - i] for i in range(n + 1)), Fraction(0))
        t[n + 1] = (Fraction(1 if n == 0 else 0) + sign * sq) / (n + 1)
    return t


def _zcot(sign: int, order: int) -> list[Fraction]:
    """Coefficients c_k of z cot z (sign=-1) or z coth z (sign=+1)."""
    c = [Fraction(0)] * (order + 1)
    c[0] = Fraction(1)
    for k in range(1, order + 1):
        acc = -sum((c[i] * c[k - i] for i in range(1, k)), Fraction(0))
        if k == 2:
            acc += sign
        c[k] = acc / (k + 1)
    return c


def series(name: str, order: int = SERIES_ORDER, **kw) -> dict[int, float]:
    """Truncated real Laurent coefficients {n: a_n} of a named integrand."""
    N = order
    if name == "exp":
        return {n: 1.0 / math.factorial(n) for n in range(N + 1)}
    if name == "sin":
        return {n: (-1) ** ((n - 1) // 2) / math.factorial(n) for n in range(1, N + 1, 2)}
    if name == "cos":
        return {n: (-1) ** (n // 2) / math.factorial(n) for n in range(0, N + 1, 2)}
    if name == "sinh":
        return {n: 1.0 / math.factorial(n) for n in range(1, N + 1, 2)}
    if name == "cosh":
        return {n: 1.0 / math.factorial(n) for n in range(0, N + 1, 2)}
    if name in ("sec2", "sech2"):
        t = _riccati(1 if name == "sec2" else -1, N + 1)
        return {n: float((n + 1) * t[n + 1]) for n in range(N + 1) if t[n + 1] != 0}
    if name in ("csc2", "csch2"):
        c = _zcot(-1 if name == "csc2" else 1, N + 2)
        return {k - 2: float(-c[k] * (k - 1)) for k in range(N + 3) if c[k] != 0 and k != 1}
    if name == "arcsin_d":
        return {2 * n: _binom(-0.5, n) * (-1) ** n for n in range(N // 2 + 1)}
    if name == "arctan_d":
        return {2 * n: float((-1) ** n) for n in range(N // 2 + 1)}
    if name == "asinh_d":
        alpha = float(kw["alpha"])
        return {2 * n: _binom(-0.5, n) * alpha ** (-0.5 - n) for n in range(N // 2 + 1)}
    if name == "recip_shift":
        return {n: float((-1) ** n) for n in range(N + 1)}
    if name == "pow":
        alpha, c = float(kw["alpha"]), float(kw["center"])
        return {n: _binom(alpha, n) * c ** (alpha - n) for n in range(N + 1)}
    if name == "recip":
        c = float(kw["center"])
        return {n: (-1) ** n * c ** (-n - 1) for n in range(N + 1)}
    if name == "monomial":
        return {int(kw["n"]): 1.0}
    raise ValueError(f"unknown series {name!r}")


@dataclass(frozen=True)
class SeriesIntegrand:
    """f(z) = sum_n a_n (z - c)^n with real a_n and real center c.

    The line-integral operator is the derivative of the termwise primitive,
    f^.h = sum_n a_n (d w^(n+1)/dw).h / (n+1), which is exact along any path.
    """

    coeffs: dict
    center: float = 0.0

    def __post_init__(self):
        if -1 in self.coeffs and self.coeffs[-1] != 0:
            raise ValueError("logarithmic primitive: series contains a w^-1 term")

    def value_batch(self, Z: np.ndarray, r: int) -> np.ndarray:
        W = Z.copy()
        W[:, 0] -= self.center
        out = np.zeros_like(W)
        for n, a in self.coeffs.items():
            out += a * _pow_rows(W, n, r)
        return out

    def op_batch(self, Z: np.ndarray, H: np.ndarray, r: int) -> np.ndarray:
        W = Z.copy()
        W[:, 0] -= self.center
        pos = {n: a for n, a in self.coeffs.items() if n >= 0}
        out = np.zeros_like(W)
        if pos:
            top = max(pos) + 1
            P = np.zeros_like(W)
            P[:, 0] = 1.0
            Dk = np.zeros_like(W)
            for k in range(1, top + 1):
                Dk = mul_batch(Dk, W, r) + mul_batch(P, H, r)
                P = mul_batch(P, W, r)
                a = pos.get(k - 1)
                if a:
                    out += (a / k) * Dk
        for n, a in self.coeffs.items():
            if n < -1 and a:
                out += (a / (n + 1)) * dpow_batch(W, H, n + 1, r)
        return out


def _pow_rows(W: np.ndarray, n: int, r: int) -> np.ndarray:
    if n >= 0:
        P = np.zeros_like(W)
        P[:, 0] = 1.0
        for _ in range(n):
            P = mul_batch(P, W, r)
        return P
    n2 = np.einsum("ij,ij->i", W, W)
    inv = _conj_rows(W) / n2[:, None]
    return _pow_rows(inv, -n, r)
