from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from octowrap import wrap_virasoro as wv
from octowrap.cayley_dickson import CayleyNumber
from octowrap.phrase import Phrase
from oracles import basis, cd_mul, laurent_d_l

E, H, F = np.eye(3)
seeds = st.integers(0, 2**31 - 1)


def zero(r):
    return CayleyNumber.zero(r)


def g(r, j):
    return CayleyNumber.generator(r, j)


class TestBase:
    def test_sl2_is_lie_with_invariant_form(self):
        assert all(v == 0 for v in wv.sl2().defects().values())

    def test_json_roundtrip(self):
        b = wv.sl2()
        c = wv.BaseLieAlgebra.from_json(b.to_json())
        assert np.array_equal(c.struct, b.struct) and np.array_equal(c.form, b.form)

    def test_broken_algebra_detected(self):
        b = wv.sl2()
        S = b.struct.copy()
        S[0, 2, 1] = 2.0
        assert wv.BaseLieAlgebra(b.names, S, b.form).defects()["antisymmetry"] > 0


class TestUnits:
    @pytest.mark.parametrize("r", [2, 3])
    def test_unit_mul_matches_oracle(self, r):
        n = 1 << r
        for k in range(n):
            for j in range(n):
                u = wv.unit_mul(wv.Unit(k, -1), wv.Unit(j), r)
                ref = -cd_mul(basis(n, k), basis(n, j))
                assert np.array_equal(u.value(r).coords, ref)

    def test_eta(self):
        assert wv.eta_sign(0, 3) == wv.eta_sign(3, 0) == wv.eta_sign(2, 2) == 0
        assert wv.eta_sign(1, 2) == 1

    def test_xi_against_oracle(self):
        r, n = 3, 8
        for k in range(n):
            for j in range(n):
                for s in range(n):
                    lhs = cd_mul(basis(n, k), cd_mul(basis(n, j), basis(n, s)))
                    rhs = cd_mul(basis(n, j), cd_mul(basis(n, s), basis(n, k)))
                    assert np.array_equal(lhs, (-1) ** wv.xi_sign(k, j, s, r) * rhs)


class TestWrapBracket:
    def test_example(self):
        r = 3
        a = wv.WrapElement.pure(Phrase.monomial(r, 1), E, 1)
        b = wv.WrapElement.pure(Phrase.monomial(r, 2), F, 2)
        out = wv.wrap_bracket(a, b, wv.sl2())
        z = CayleyNumber(r, [0.5, 0.1, 0, 0, 0, 0, 0, 0])
        want = np.outer(H, cd_mul(cd_mul(z.coords, cd_mul(z.coords, z.coords)), basis(8, 3)))
        assert np.allclose(out.value(z, 3), want, atol=1e-14)

    @settings(max_examples=30)
    @given(seeds)
    def test_graded_antisymmetry(self, seed):
        rng = np.random.default_rng(seed)
        r, base = 3, wv.sl2()
        a, b = wv.random_pure(r, base, rng), wv.random_pure(r, base, rng)
        k, j = a.states[0].u.k, b.states[0].u.k
        z = CayleyNumber(r, rng.normal(size=8))
        ab = wv.wrap_bracket(a, b, base).value(z, 3)
        ba = wv.wrap_bracket(b, a, base).value(z, 3)
        assert np.allclose(ba, (-1) ** (wv.eta_sign(k, j) + 1) * ab, rtol=1e-9, atol=1e-9)

    def test_level_mismatch(self):
        a = wv.WrapElement.pure(Phrase.monomial(2, 1), E)
        b = wv.WrapElement.pure(Phrase.monomial(3, 1), F)
        with pytest.raises(ValueError):
            wv.wrap_bracket(a, b, wv.sl2())


class TestCocycle:
    def test_example(self):
        r = 3
        a = wv.WrapElement.pure(Phrase.monomial(r, 1), E)
        b = wv.WrapElement.pure(Phrase.monomial(r, -1), F)
        assert wv.cocycle(zero(r), a, b, g(r, 3), wv.sl2()) == g(r, 3)

    def test_units_enter_on_the_right(self):
        r = 3
        a = wv.WrapElement.pure(Phrase.monomial(r, 1), E, 1)
        b = wv.WrapElement.pure(Phrase.monomial(r, -1), F, 2)
        # Res = i4, then (i4)(i1 i2) = i4 i3
        got = wv.cocycle(zero(r), a, b, g(r, 4), wv.sl2())
        assert np.array_equal(got.coords, cd_mul(basis(8, 4), basis(8, 3)))

    def test_orthogonal_base_vectors(self):
        r = 2
        a = wv.WrapElement.pure(Phrase.monomial(r, 1), E)
        b = wv.WrapElement.pure(Phrase.monomial(r, -1), E)
        assert wv.cocycle(zero(r), a, b, g(r, 1), wv.sl2()).norm() == 0

    @pytest.mark.parametrize("seed", [1, 2])
    def test_identity_suite(self, seed):
        rows = wv.cocycle_identity_suite(cases=20, seed=seed)
        summary = wv.suite_summary(rows)
        assert set(summary) == {"antisymmetry", "cyclic", "psi", "d_l-cocycle", "d_l-derivation"}
        for name, v in summary.items():
            assert v["max_defect"] <= 1e-9, name
            assert v["nontrivial"] > 0, name

    def test_wrong_sign_is_detected(self):
        # flipping the grading sign must break antisymmetry on some case
        rng = np.random.default_rng(0)
        r, base = 3, wv.sl2()
        worst = 0.0
        for _ in range(40):
            a, b = wv.random_pure(r, base, rng), wv.random_pure(r, base, rng)
            k, j = a.states[0].u.k, b.states[0].u.k
            w1 = wv.cocycle(zero(r), a, b, g(r, 1), base)
            w2 = wv.cocycle(zero(r), b, a, g(r, 1), base)
            worst = max(worst, (w1 - w2.scale((-1) ** wv.eta_sign(k, j))).norm())
        assert worst > 1e-3


class TestExtension:
    def test_d_acts_by_euler_operator(self):
        r = 3
        P = Phrase.monomial(r, 3)
        A = wv.ExtendedElement(wv.WrapElement(r), (), CayleyNumber.real(r, 2.0))
        B = wv.ExtendedElement(wv.WrapElement.pure(P, E))
        out = wv.extended_bracket(A, B, zero(r), g(r, 1), wv.sl2())
        z = CayleyNumber(r, [0.4, 0.2, 0, 0.1, 0, 0, 0, 0])
        # 2 (dP/dz).z = 6 z^3
        want = np.outer(E, 6 * Phrase.monomial(r, 3).eval(z).coords)
        assert np.allclose(out.wrap.value(z, 3), want, atol=1e-13)
        assert out.delta_value().norm() == 0

    @settings(max_examples=20)
    @given(seeds)
    def test_graded_antisymmetry_with_d(self, seed):
        rng = np.random.default_rng(seed)
        r, base = 3, wv.sl2()
        a, b = wv.random_pure(r, base, rng), wv.random_pure(r, base, rng)
        k, j = a.states[0].u.k, b.states[0].u.k
        A = wv.ExtendedElement(a, (), g(r, k).scale(float(rng.normal())) if k else CayleyNumber.real(r, float(rng.normal())))
        B = wv.ExtendedElement(b, (), g(r, j).scale(float(rng.normal())) if j else CayleyNumber.real(r, float(rng.normal())))
        M = g(r, 5)
        ab = wv.extended_bracket(A, B, zero(r), M, base)
        ba = wv.extended_bracket(B, A, zero(r), M, base)
        sgn = (-1) ** (wv.eta_sign(k, j) + 1)
        z = CayleyNumber(r, rng.normal(size=8))
        assert np.allclose(ba.wrap.value(z, 3), sgn * ab.wrap.value(z, 3), rtol=1e-9, atol=1e-9)
        assert ba.kappa_at(zero(r)).allclose(ab.kappa_at(zero(r)).scale(sgn), 1e-9)

    def test_kappa_keyed_by_point(self):
        r = 2
        a = wv.WrapElement.pure(Phrase.monomial(r, 1), E)
        b = wv.WrapElement.pure(Phrase.monomial(r, -1), F)
        out = wv.extended_bracket(wv.ExtendedElement(a), wv.ExtendedElement(b), zero(r), g(r, 1), wv.sl2())
        assert out.kappa_at(zero(r)) == g(r, 1)
        assert out.kappa_at(g(r, 2)).norm() == 0


class TestWittVirasoro:
    @pytest.mark.parametrize("k,j", [(0, 1), (2, -3), (-1, 1), (4, 4), (5, -5)])
    def test_witt(self, k, j):
        for m, (lhs, rhs) in wv.witt_bracket(k, j, 8).items():
            assert lhs == rhs
            a = laurent_d_l(laurent_d_l({m: 1.0}, j), k)
            b = laurent_d_l(laurent_d_l({m: 1.0}, k), j)
            oracle = {e: a.get(e, 0.0) - b.get(e, 0.0) for e in set(a) | set(b)}
            assert {e: v for e, v in oracle.items() if v} == lhs

    def test_d_l_on_wrap_states(self):
        r = 2
        a = wv.WrapElement.pure(Phrase.monomial(r, 3), H)
        out = wv.d_l_wrap(2, a)
        z = CayleyNumber(r, [0.3, 0.2, -0.1, 0.4])
        assert np.allclose(out.value(z, 3), np.outer(H, -3 * Phrase.monomial(r, 5).eval(z).coords), atol=1e-13)

    @pytest.mark.parametrize("j", range(-5, 6))
    def test_central_term(self, j):
        (idx, coef), cc = wv.virasoro_bracket(j, None, -j, None)
        assert idx == 0 and coef == 2 * j
        assert cc == Fraction(j ** 3 - j, 12)

    def test_no_central_term_off_diagonal(self):
        assert wv.virasoro_bracket(2, None, 3, None) == ((5, -1), 0)

    def test_element_bracket(self):
        r = 3
        out = wv.virasoro_element_bracket(wv.VirasoroElement.basis(r, 2), wv.VirasoroElement.basis(r, -2))
        assert out.coeffs()[0] == CayleyNumber.real(r, 4)
        assert out.central() == CayleyNumber.real(r, 0.5)

    def test_coefficient_order(self):
        r = 3
        a = wv.VirasoroElement.basis(r, 1, g(r, 1))
        b = wv.VirasoroElement.basis(r, 2, g(r, 2))
        out = wv.virasoro_element_bracket(a, b)
        assert out.coeffs()[3] == g(r, 3).scale(-1)
