import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from octowrap.cayley_dickson import CayleyNumber, Direction, mul
from octowrap.contour import (
    PlaneCircle,
    Polyline,
    ResidueRuleError,
    cauchy_eval,
    classify_singularity,
    closed_form_suite,
    divisor,
    global_residue_sum,
    integrate,
    integration_by_parts_check,
    path_from_json,
    residue_at_infinity,
    residue_numeric,
    residue_symbolic,
    residue_theorem_check,
)
from octowrap.phrase import Factor, Phrase, Term
from oracles import circle_mean


def g(r, j):
    return CayleyNumber.generator(r, j)


def re(r, x):
    return CayleyNumber.real(r, x)


def laurent(r, coeffs, center=None):
    """Real-coefficient Laurent phrase sum c_n (z - center)^n."""
    return Phrase(r, tuple(Term.make([re(r, c), re(r, 1)], [Factor(n, False, center)]) for n, c in coeffs.items()))


class TestIntegrate:
    def test_segment(self):
        r = 1
        path = Polyline((CayleyNumber.zero(r), CayleyNumber(r, [1, 1])))
        got = integrate(Phrase.monomial(r, 1), path)
        assert got.allclose(CayleyNumber(r, [0, 1]), 1e-12)

    def test_polynomial_is_path_independent(self):
        r = 3
        a = CayleyNumber(r, [0.2, 0.1, 0, 0.3, 0, 0, 0.1, 0])
        b = CayleyNumber(r, [1.0, -0.2, 0.5, 0, 0.1, 0, 0, 0.3])
        mid = CayleyNumber(r, [0.5, 0.8, -0.4, 0.2, 0, 0.6, 0, 0])
        p = laurent(r, {0: 1.0, 2: -0.5, 3: 2.0})
        i1 = integrate(p, Polyline((a, b)))
        i2 = integrate(p, Polyline((a, mid, b)))
        assert (i1 - i2).norm() <= 1e-10

    @given(st.integers(0, 2**31 - 1), st.sampled_from([1, 2, 3, 5, 7]))
    def test_circle_against_complex_oracle(self, seed, k):
        rng = np.random.default_rng(seed)
        r = 3
        coeffs = {n: float(rng.normal()) for n in range(-3, 3)}
        M = g(r, k)
        val = integrate(laurent(r, coeffs), PlaneCircle(CayleyNumber.zero(r), 0.7, Direction(M)))
        fn = lambda z: sum(c * z ** n for n, c in coeffs.items())
        want = circle_mean(fn, 0, 0.7) * 2j * math.pi
        expect = re(r, want.real) + M.scale(want.imag)
        assert (val - expect).norm() <= 1e-9

    def test_winding_scales(self):
        r = 2
        p = Phrase.monomial(r, -1)
        one = integrate(p, PlaneCircle(CayleyNumber.zero(r), 1.0, Direction(g(r, 2))))
        three = integrate(p, PlaneCircle(CayleyNumber.zero(r), 1.0, Direction(g(r, 2)), -3))
        assert three.allclose(one.scale(-3), 1e-10)
        assert one.allclose(g(r, 2).scale(2 * math.pi), 1e-10)

    def test_pole_on_path_raises(self):
        r = 1
        path = Polyline((CayleyNumber(r, [-1, 0]), CayleyNumber(r, [1, 0])))
        with pytest.raises(ValueError, match="pole"):
            integrate(Phrase.monomial(r, -1), path)

    def test_path_json(self):
        c = PlaneCircle(CayleyNumber.zero(2), 0.5, Direction(g(2, 3)), 2)
        assert path_from_json(c.to_json()).to_json() == c.to_json()
        with pytest.raises(ValueError):
            path_from_json({"kind": "spiral"})

    def test_integration_by_parts(self):
        r = 2
        f1 = Phrase(r, (Term.make([g(r, 1), g(r, 2)], [2]),))
        f2 = Phrase(r, (Term.make([g(r, 3), re(r, 1)], [1]), Term.make([re(r, 2), g(r, 1)], [3])))
        path = Polyline((CayleyNumber(r, [0.1, 0.2, 0, 0]), CayleyNumber(r, [1, -0.3, 0.4, 0.2])))
        assert integration_by_parts_check(f1, f2, path).defect <= 1e-10


class TestResidue:
    def test_simple_pole(self):
        r = 3
        got = residue_symbolic(Phrase.monomial(r, -1), CayleyNumber.zero(r), g(r, 1))
        assert got == g(r, 1)

    def test_frozen_sandwich(self):
        # Res {i1 z^-1 i2} at 0 along i3 over H; frozen from the doubling oracle
        r = 2
        p = Phrase.monomial(r, -1, g(r, 1), g(r, 2))
        assert residue_symbolic(p, CayleyNumber.zero(r), g(r, 3)).allclose(re(r, 1), 1e-14)
        assert residue_numeric(p, CayleyNumber.zero(r), g(r, 3)).allclose(re(r, 1), 1e-9)

    def test_conjugate_pole_gives_conjugate_direction(self):
        r = 3
        p = Phrase.monomial(r, -1, conj=True)
        assert residue_symbolic(p, CayleyNumber.zero(r), g(r, 4)) == g(r, 4).conj()

    def test_higher_poles_vanish_for_plane_terms(self):
        r = 3
        z0 = CayleyNumber(r, [0.3, 0, 0.2, 0, 0, 0, 0, 0])
        for n in (-2, -3, -4):
            p = Phrase.monomial(r, n, center=z0)
            assert residue_symbolic(p, z0, g(r, 1)).norm() == 0

    def test_divergent_mixed_term_raises(self):
        r = 2
        t = Term.make([re(r, 1), re(r, 1), re(r, 1)], [Factor(-2), Factor(-1, True)])
        with pytest.raises(ResidueRuleError):
            residue_symbolic(Phrase(r, (t,)), CayleyNumber.zero(r), g(r, 1))

    @settings(max_examples=15)
    @given(st.integers(0, 2**31 - 1))
    def test_symbolic_matches_numeric(self, seed):
        rng = np.random.default_rng(seed)
        r = 3
        M = CayleyNumber(r, np.concatenate([[0], rng.normal(size=7)]))
        M = M.scale(1 / M.norm())
        a, b = CayleyNumber(r, rng.normal(size=8)), CayleyNumber(r, rng.normal(size=8))
        p = Phrase.monomial(r, -1, a, b) + laurent(r, {1: 0.5, -2: 1.5})
        s = residue_symbolic(p, CayleyNumber.zero(r), M)
        n = residue_numeric(p, CayleyNumber.zero(r), M)
        assert (s - n).norm() <= 1e-8 * max(1.0, s.norm())

    @settings(max_examples=15)
    @given(st.floats(-3, 3, allow_nan=False).filter(lambda x: abs(x) > 1e-3))
    def test_homogeneous_in_M(self, lam):
        r = 2
        p = Phrase.monomial(r, -1, g(r, 1) + re(r, 0.5), g(r, 2))
        base = residue_numeric(p, CayleyNumber.zero(r), g(r, 3))
        scaled = residue_numeric(p, CayleyNumber.zero(r), g(r, 3).scale(lam))
        assert scaled.allclose(base.scale(lam), 1e-8)

    def test_agrees_with_complex_laurent_coefficient(self):
        r = 3
        coeffs = {-1: 2.5, -2: 1.0, 0: 3.0, 1: -1.0}
        got = residue_symbolic(laurent(r, coeffs), CayleyNumber.zero(r), g(r, 6))
        assert got == g(r, 6).scale(2.5)

    def test_at_infinity(self):
        r = 2
        got = residue_at_infinity(Phrase.monomial(r, -1), g(r, 1))
        assert got.allclose(g(r, 1).scale(-1), 1e-9)
        assert residue_at_infinity(Phrase.monomial(r, 2), g(r, 1)).norm() <= 1e-9


class TestTheorems:
    def _f(self, r, M):
        p1 = re(r, 0.3) + M.scale(0.2)
        p2 = re(r, -0.4) + M.scale(-0.1)
        return Phrase(r, (
            Term.make([g(r, 1), g(r, 2) + re(r, 1)], [Factor(-1, False, p1)]),
            Term.make([re(r, 2) + M, g(r, 3)], [Factor(-2, False, p2)]),
            Term.make([g(r, 2), re(r, 1)], [Factor(-1, False, p2)]),
        ))

    def test_residue_theorem_circle(self):
        r = 2
        M = g(r, 1)
        f = self._f(r, M)
        rep = residue_theorem_check(f, PlaneCircle(CayleyNumber.zero(r), 1.0, Direction(M)))
        assert rep.defect <= 1e-8

    def test_residue_theorem_partial_enclosure(self):
        r = 3
        M = g(r, 5)
        f = self._f(r, M)
        small = PlaneCircle(re(r, 0.3) + M.scale(0.2), 0.2, Direction(M))
        rep = residue_theorem_check(f, small)
        assert rep.defect <= 1e-8
        assert sum(1 for _, j, _ in rep.details["poles"] if j) == 1

    def test_global_sum(self):
        r = 3
        M = g(r, 2)
        assert global_residue_sum(self._f(r, M), M).defect <= 1e-7

    def test_cauchy(self):
        r = 3
        M = g(r, 5)
        f = laurent(r, {0: 1.0, 1: -2.0, 3: 0.5})
        circle = PlaneCircle(CayleyNumber.zero(r), 1.0, Direction(M))
        z = re(r, 0.2) + M.scale(-0.4)
        assert (cauchy_eval(f, z, circle) - f.eval(z)).norm() <= 1e-9

    def test_cauchy_rejects_points(self):
        r = 3
        M = g(r, 5)
        circle = PlaneCircle(CayleyNumber.zero(r), 1.0, Direction(M))
        with pytest.raises(ValueError):
            cauchy_eval(Phrase.monomial(r, 1), g(r, 1).scale(0.2), circle)
        with pytest.raises(ValueError):
            cauchy_eval(Phrase.monomial(r, 1), re(r, 2), circle)


class TestDivisor:
    def test_orders(self):
        r = 2
        p = laurent(r, {-2: 1.0, 1: 3.0})
        assert int(divisor(p, CayleyNumber.zero(r))) == -2
        assert int(divisor(p, "inf")) == -1
        assert classify_singularity(p, CayleyNumber.zero(r)) == ("pole", 2)
        assert classify_singularity(p, re(r, 1)) == ("removable", 0)

    def test_zero_phrase(self):
        r = 2
        assert not divisor(Phrase.zero(r), CayleyNumber.zero(r)).finite

    def test_cancellation_is_seen(self):
        r = 2
        p = laurent(r, {-1: 1.0, 2: 1.0}) + laurent(r, {-1: -1.0})
        assert int(divisor(p, CayleyNumber.zero(r))) == 2


def test_closed_forms_all_pass():
    rows = closed_form_suite()
    bad = [row.formula for row in rows if row.status != "pass"]
    assert not bad, bad
