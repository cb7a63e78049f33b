import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from octowrap.cayley_dickson import (
    CayleyNumber,
    Direction,
    associator,
    commutator,
    exp_cd,
    inverse,
    ln_cd,
    make_table,
    moufang_check,
    mul,
    plane_decompose,
    polar,
)
from oracles import basis, cd_mul, exp_series, hamilton

coord = st.floats(-3, 3, allow_nan=False)


def octonions(r=3):
    return st.lists(coord, min_size=1 << r, max_size=1 << r).map(lambda v: CayleyNumber(r, v))


def g(r, j):
    return CayleyNumber.generator(r, j)


# frozen from the recursive doubling oracle
FROZEN_I1I2_I4 = basis(8, 7)
FROZEN_I1_I2I4 = -basis(8, 7)


class TestTable:
    def test_quaternion_index_convention(self):
        assert mul(g(2, 1), g(2, 2)) == g(2, 3)

    @pytest.mark.parametrize("r", [1, 2, 3])
    def test_identity_generator(self, r):
        for k in range(1 << r):
            assert mul(g(r, 0), g(r, k)) == g(r, k)
            assert mul(g(r, k), g(r, 0)) == g(r, k)

    @pytest.mark.parametrize("r", [1, 2, 3])
    def test_squares_and_anticommutation(self, r):
        n = 1 << r
        for j in range(1, n):
            assert mul(g(r, j), g(r, j)) == g(r, 0).scale(-1)
            for k in range(1, n):
                if j != k:
                    assert mul(g(r, j), g(r, k)) + mul(g(r, k), g(r, j)) == CayleyNumber.zero(r)

    def test_octonion_nonassociative_triple(self):
        a = mul(mul(g(3, 1), g(3, 2)), g(3, 4))
        b = mul(g(3, 1), mul(g(3, 2), g(3, 4)))
        assert np.array_equal(a.coords, FROZEN_I1I2_I4)
        assert np.array_equal(b.coords, FROZEN_I1_I2I4)
        assert associator(g(3, 1), g(3, 2), g(3, 4)).norm() == 2.0

    @pytest.mark.parametrize("r", [1, 2, 3])
    def test_table_matches_doubling_oracle(self, r):
        n = 1 << r
        t = make_table(r)
        for j in range(n):
            for k in range(n):
                ref = cd_mul(basis(n, j), basis(n, k))
                assert ref[t.index[j, k]] == t.sign[j, k]

    def test_quaternions_match_hamilton(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            p, q = rng.normal(size=4), rng.normal(size=4)
            assert np.allclose(mul(CayleyNumber(2, p), CayleyNumber(2, q)).coords, hamilton(p, q), atol=1e-13)

    def test_doubling_consistency(self):
        t3, t2 = make_table(3), make_table(2)
        assert np.array_equal(t3.sign[:4, :4], t2.sign)
        assert np.array_equal(t3.index[:4, :4], t2.index)


class TestArithmetic:
    def test_conjugate_product(self):
        x = CayleyNumber(3, [1, 1, 0, 0, 0, 0, 0, 0])
        assert mul(x, x.conj()) == CayleyNumber.real(3, 2)

    def test_inverse_examples(self):
        assert inverse(g(3, 1)) == g(3, 1).scale(-1)
        assert inverse(CayleyNumber.real(3, 2.0)) == CayleyNumber.real(3, 0.5)
        with pytest.raises(ZeroDivisionError):
            inverse(CayleyNumber.zero(3))

    def test_exact_mode(self):
        x = CayleyNumber(2, [Fraction(1, 2), 1, 0, 3])
        inv = inverse(x)
        assert inv.exact
        assert mul(x, inv) == CayleyNumber.real(2, 1, exact=True)

    @given(octonions(), octonions())
    def test_matches_oracle(self, x, y):
        assert np.allclose(mul(x, y).coords, cd_mul(x.coords, y.coords), atol=1e-12)

    @given(octonions(), octonions())
    def test_norm_multiplicative(self, x, y):
        assert abs(mul(x, y).norm() - x.norm() * y.norm()) <= 1e-12 * max(1.0, x.norm() * y.norm())

    @given(octonions(), octonions())
    def test_alternative(self, x, y):
        assert (mul(mul(x, x), y) - mul(x, mul(x, y))).norm() <= 1e-12 * max(1.0, x.norm() ** 2 * y.norm())
        assert (mul(y, mul(x, x)) - mul(mul(y, x), x)).norm() <= 1e-12 * max(1.0, x.norm() ** 2 * y.norm())

    @given(octonions(), octonions())
    def test_left_inverse_property(self, x, y):
        if x.norm() < 1e-3:
            return
        assert (mul(x, mul(inverse(x), y)) - y).norm() <= 1e-11 * max(1.0, y.norm())

    @given(octonions(), octonions(), octonions())
    def test_moufang(self, x, y, z):
        scale = max(1.0, x.norm() ** 2 * y.norm() * z.norm())
        assert moufang_check(x, y, z).max_deviation <= 1e-12 * scale

    @given(st.floats(-5, 5, allow_nan=False), octonions(), octonions())
    def test_reals_central(self, b, x, y):
        B = CayleyNumber.real(3, b)
        lhs = mul(mul(B, x), y)
        assert (lhs - mul(x, mul(B, y))).norm() <= 1e-12 * max(1.0, lhs.norm())
        assert (lhs - mul(mul(x, y), B)).norm() <= 1e-12 * max(1.0, lhs.norm())

    @given(octonions(2), octonions(2), octonions(2))
    def test_quaternions_associative(self, x, y, z):
        assert associator(x, y, z).norm() <= 1e-12 * max(1.0, x.norm() * y.norm() * z.norm())

    def test_commutator_of_generators(self):
        assert commutator(g(3, 1), g(3, 2)) == g(3, 3).scale(2)

    def test_level_mismatch(self):
        with pytest.raises(ValueError):
            mul(g(2, 1), g(3, 1))


class TestPolarExpLog:
    def test_polar_examples(self):
        p = polar(g(3, 1))
        assert p.rho == pytest.approx(1) and p.theta == pytest.approx(0.25) and p.M.value == g(3, 1)
        p = polar(CayleyNumber.real(3, 3))
        assert p.rho == 3 and p.theta == 0 and p.M.value == g(3, 1)
        p = polar(CayleyNumber(3, [1, 0, 1, 0, 0, 0, 0, 0]))
        assert p.rho == pytest.approx(math.sqrt(2)) and p.theta == pytest.approx(1 / 8) and p.M.value == g(3, 2)

    def test_euler(self):
        assert exp_cd(g(3, 1).scale(math.pi)).allclose(CayleyNumber.real(3, -1), 1e-15)

    def test_log_of_generator(self):
        assert ln_cd(g(3, 3)).allclose(g(3, 3).scale(math.pi / 2), 1e-15)

    def test_exp_matches_series(self):
        z = CayleyNumber(3, [0.3, -0.2, 0.5, 0.1, 0, 0.4, -0.3, 0.2])
        assert np.allclose(exp_cd(z).coords, exp_series(z.coords), atol=1e-13)

    def test_exp_log_roundtrip(self):
        z = CayleyNumber(3, [2, 0, 0, 0, 0, 1, 0, 0])
        assert exp_cd(ln_cd(z)).allclose(z, 1e-12)

    def test_branch_cut_is_an_error(self):
        with pytest.raises(ValueError, match="branch cut"):
            ln_cd(CayleyNumber.real(3, -2))


class TestPlaneDecompose:
    def test_in_plane(self):
        z = CayleyNumber(3, [1, 2, 0, 0, 0, 0, 0, 0])
        s = plane_decompose(z, Direction(g(3, 1)))
        assert s.x == z and s.y == 0 and not s.defined

    def test_orthogonal_generator(self):
        s = plane_decompose(g(3, 2), Direction(g(3, 1)))
        assert s.x.norm() == 0 and s.y == 1 and s.N == g(3, 2)

    @given(octonions())
    def test_reconstruction(self, z):
        s = plane_decompose(z, Direction(g(3, 3)))
        back = s.x + s.N.scale(s.y)
        assert (back - z).norm() <= 1e-12 * max(1.0, z.norm())
        assert abs(float(np.dot(s.N.coords, g(3, 3).coords))) <= 1e-12

    def test_direction_validation(self):
        with pytest.raises(ValueError):
            Direction(CayleyNumber(3, [1, 1, 0, 0, 0, 0, 0, 0]))
