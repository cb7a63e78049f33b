from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from octowrap import cartan as ct
from octowrap import eta_rep as er
from oracles import witt_dimension

SMALL = [(k, A) for k, A in ct.AFFINE_CORPUS.items() if len(A) <= 3]


def sparse_from(dense):
    n = len(dense)
    S = er.SparseQ(n)
    for i in range(n):
        for j in range(n):
            S.add_entry(i, j, Fraction(int(dense[i][j])))
    return S


class TestSparse:
    @given(st.integers(0, 2**31 - 1), st.integers(1, 6))
    def test_products_match_dense(self, seed, n):
        rng = np.random.default_rng(seed)
        a = rng.integers(-3, 4, size=(n, n)) * (rng.random((n, n)) < 0.5)
        b = rng.integers(-3, 4, size=(n, n)) * (rng.random((n, n)) < 0.5)
        A, B = sparse_from(a), sparse_from(b)
        assert np.array_equal((A @ B).to_dense(), a @ b)
        assert np.array_equal(er.commutator(A, B).to_dense(), a @ b - b @ a)
        assert np.array_equal((A - B.scale(2)).to_dense(), a - 2 * b)

    def test_entries_cancel(self):
        S = er.SparseQ(2)
        S.add_entry(0, 1, Fraction(1, 2))
        S.add_entry(0, 1, Fraction(-1, 2))
        assert S.cols == {}


class TestModule:
    def test_word_count(self):
        G = er.build_module([[2, -1], [-1, 2]], D=3)
        assert G.module.size == 1 + 2 + 4 + 8

    def test_budget(self):
        with pytest.raises(ValueError, match="budget"):
            er.build_module([[2, -1, 0, 0], [-1, 2, -1, 0], [0, -1, 2, -1], [0, 0, -1, 2]], D=9)

    def test_lambda_length_checked(self):
        with pytest.raises(ValueError):
            er.build_module([[2, -2], [-2, 2]], lam=[1], D=2)

    @pytest.mark.parametrize("name,A", SMALL)
    def test_relations_exact_on_corpus(self, name, A):
        R = ct.realize(A)
        G = er.build_module(A, R, D=4)
        rep = er.check_relations(G, R)
        assert rep.ok(), rep.defects

    @settings(max_examples=25)
    @given(st.integers(0, 2**31 - 1), st.integers(1, 3))
    def test_relations_for_random_gcm_and_weight(self, seed, n):
        rng = np.random.default_rng(seed)
        A = [[2 if i == j else 0 for j in range(n)] for i in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                if rng.random() < 0.7:
                    A[i][j], A[j][i] = -int(rng.integers(1, 4)), -int(rng.integers(1, 4))
        R = ct.realize(A)
        lam = [Fraction(int(x), 2) for x in rng.integers(-4, 5, size=R.dim_h)]
        G = er.build_module(A, R, lam=lam, D=3)
        assert er.check_relations(G, R).ok()

    def test_boundary_depth_is_excluded(self):
        A = [[2, -1], [-1, 2]]
        G = er.build_module(A, D=3)
        # the truncation makes [e, f] fail on the longest words
        assert not er.check_relations(G, max_depth=3).ok()


class TestRootGrade:
    @pytest.mark.parametrize("n,h", [(1, 1), (2, 1), (2, 2), (2, 3), (3, 2), (3, 3)])
    def test_f_side_is_free(self, n, h):
        A = [[2 if i == j else -1 for j in range(n)] for i in range(n)]
        G = er.build_module(A, D=h + 1)
        table = er.root_grade(G, H_max=h, side="f")
        total = sum(d for k, d in table.items() if -sum(k) == h)
        assert total == witt_dimension(n, h)

    @pytest.mark.parametrize("name,A", SMALL)
    def test_multiplicity_bound(self, name, A):
        G = er.build_module(A, D=4)
        for side in ("e", "f"):
            assert er.mult_bound_holds(er.root_grade(G, H_max=3, side=side), len(A))

    def test_serre_type_vanishing(self):
        # [e_1, e_1] = 0 so the 2 alpha_1 space is empty
        G = er.build_module([[2, -1], [-1, 2]], D=3)
        assert er.root_grade(G, H_max=2, side="e")[(2, 0)] == 0

    def test_height_limit(self):
        G = er.build_module([[2, -1], [-1, 2]], D=2)
        with pytest.raises(ValueError):
            er.root_grade(G, H_max=2)


class TestChevalley:
    def test_involution(self):
        w = er.Word(Fraction(3), ((("e", 0), ("f", 1)), ("h", 0)))
        om = er.chevalley_involution(w)
        assert om.tree == ((("f", 0), ("e", 1)), ("h", 0))
        assert om.coeff == -3
        assert er.chevalley_involution(om) == w

    def test_word_matrix_is_bracket(self):
        G = er.build_module([[2, -1], [-1, 2]], D=3)
        w = er.Word(Fraction(1), (("e", 0), ("f", 0)))
        M = er.word_matrix(w, G)
        assert (M - er.commutator(G.E[0], G.F[0])).max_abs() == 0


class TestCasimir:
    @pytest.mark.parametrize("n,lg,ld", [
        (1, [2], [3]),
        (1, [Fraction(1, 2)], [-1]),
        (2, [1, 2], [3, -1]),
        (2, [0, 1], [Fraction(5, 3), 2]),
    ])
    def test_commutes_and_vacuum(self, n, lg, ld):
        rep = er.heisenberg_casimir(n, lg, ld, D=4)
        assert rep.commutator_defect == 0
        assert rep.vacuum_value == rep.expected
        assert rep.ok()

    def test_vacuum_value(self):
        assert er.casimir_on_highest([2], [3]) == 12
        assert er.casimir_on_highest([1, 2], [3, -1]) == 2


class TestOmega2:
    @pytest.mark.parametrize("alg", [er.sl2_algebra(), er.heisenberg_algebra(1), er.heisenberg_algebra(2)])
    def test_invariant(self, alg):
        xs = [alg.unit(a) for a in range(alg.dim)]
        ys = er.dual_basis(alg, xs)
        assert er.omega2_check(alg, xs, ys).ok()

    def test_non_dual_rejected(self):
        alg = er.sl2_algebra()
        xs = [alg.unit(a) for a in range(alg.dim)]
        with pytest.raises(ValueError):
            er.omega2_check(alg, xs, xs)

    def test_sl2_bracket(self):
        alg = er.sl2_algebra()
        names = list(alg.names)
        e, h, f = (alg.unit(names.index(x)) for x in ("e", "h", "f"))
        assert alg.bracket(h, e) == [2 * x for x in e]
        assert alg.bracket(e, f) == h
