"""Independent reference implementations used by the tests.

Nothing here imports the package; the code is deliberately naive.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np


def cd_mul(x, y):
    """Recursive doubling (u + v l)(w + x l) = (u w - conj(x) v) + (x u + v conj(w)) l."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    if n == 1:
        return x * y
    h = n // 2
    u, v = x[:h], x[h:]
    w, xx = y[:h], y[h:]
    first = cd_mul(u, w) - cd_mul(cd_conj(xx), v)
    second = cd_mul(xx, u) + cd_mul(v, cd_conj(w))
    return np.concatenate([first, second])


def cd_conj(x):
    x = np.asarray(x, dtype=float).copy()
    x[1:] = -x[1:]
    return x


def hamilton(p, q):
    """Quaternion product with i j = k, j k = i, k i = j."""
    a1, b1, c1, d1 = p
    a2, b2, c2, d2 = q
    return np.array([
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    ])


def basis(n, j):
    e = np.zeros(n)
    e[j] = 1.0
    return e


def exp_series(z, terms: int = 60):
    """exp by its Taylor series using cd_mul."""
    z = np.asarray(z, dtype=float)
    out = basis(len(z), 0)
    term = basis(len(z), 0)
    for k in range(1, terms):
        term = cd_mul(term, z) / k
        out = out + term
    return out


def complex_residue_coeff(coeffs: dict[int, float]) -> float:
    """Coefficient of z^-1 in a Laurent polynomial."""
    return coeffs.get(-1, 0.0)


def det_fraction(A):
    """Determinant by cofactor expansion, exact."""
    A = [[Fraction(x) for x in row] for row in A]
    n = len(A)
    if n == 1:
        return A[0][0]
    total = Fraction(0)
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in A[1:]]
        total += (-1) ** j * A[0][j] * det_fraction(minor)
    return total


def witt_dimension(n_gen: int, word_len: int) -> int:
    """Dimension of the degree-k part of the free Lie algebra on n generators."""
    k = word_len
    total = 0
    for d in range(1, k + 1):
        if k % d == 0:
            total += _mobius(d) * n_gen ** (k // d)
    return total // k


def _mobius(n: int) -> int:
    out, m, p = 1, n, 2
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                return 0
            out = -out
        p += 1
    return -out if m > 1 else out


def laurent_d_l(coeffs: dict[int, float], l: int) -> dict[int, float]:
    """d_l z^m = -m z^(m+l) on a coefficient table."""
    out: dict[int, float] = {}
    for m, c in coeffs.items():
        if m:
            out[m + l] = out.get(m + l, 0.0) - m * c
    return {k: v for k, v in out.items() if v}


def circle_mean(fn, z0: complex, rho: float, n: int = 4096) -> complex:
    """(2 pi i)^-1 int f dz over a circle by the periodic trapezoid rule."""
    th = 2 * math.pi * np.arange(n) / n
    z = z0 + rho * np.exp(1j * th)
    dz = 1j * rho * np.exp(1j * th)
    return complex(np.mean(fn(z) * dz) / 1j)
