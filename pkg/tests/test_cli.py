import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from octowrap.cayley_dickson import CayleyNumber
from octowrap.cli import PhraseSyntaxError, format_phrase_text, main, parse_phrase_text
from octowrap.phrase import BracketTree, Factor, Phrase, Term


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def js(text):
    return json.loads(text)


class TestGrammar:
    def test_left_default(self):
        p = parse_phrase_text("i1 * z^-1 * i2", 3)
        (t,) = p.terms
        assert t.exps == (-1,)
        assert t.tree == BracketTree.left(3)
        assert t.coeffs[0] == CayleyNumber.generator(3, 1) and t.coeffs[1] == CayleyNumber.generator(3, 2)

    def test_parentheses_fix_tree(self):
        p = parse_phrase_text("(i1 * (z * i2)) * z", 3)
        (t,) = p.terms
        assert t.exps == (1, 1)
        # a trailing unit coefficient closes the last factor
        assert t.tree.to_string() == "(((.(..)).).)"

    def test_tuple_coefficient_and_zbar(self):
        p = parse_phrase_text("(1, 2, 0, 3) * zbar^2", 2)
        (t,) = p.terms
        assert t.coeffs[0] == CayleyNumber(2, [1, 2, 0, 3])
        assert t.factors[0].conj and t.exps == (2,)

    def test_grouping_is_not_a_tuple(self):
        p = parse_phrase_text("(2) * z", 2)
        assert p.terms[0].coeffs[0] == CayleyNumber.real(2, 2)

    @pytest.mark.parametrize("src,pos", [("z^999", None), ("i9 * z", 0), ("z * * z", 4), ("(z", None), ("z ^", None)])
    def test_errors(self, src, pos):
        with pytest.raises(PhraseSyntaxError) as info:
            parse_phrase_text(src, 3)
        if pos is not None:
            assert info.value.pos == pos

    def test_generator_bound_depends_on_level(self):
        parse_phrase_text("i3 * z", 2)
        with pytest.raises(PhraseSyntaxError):
            parse_phrase_text("i4 * z", 2)

    def test_value_matches_json_form(self):
        p = parse_phrase_text("i1 * z * i2", 2)
        assert p.eval(CayleyNumber.generator(2, 3)) == CayleyNumber.real(2, 1)


def _random_shape(rng, n):
    if n == 1:
        return "."
    s = int(rng.integers(1, n))
    return (_random_shape(rng, s), _random_shape(rng, n - s))


@given(st.integers(0, 2**31 - 1))
def test_print_parse_roundtrip(seed):
    rng = np.random.default_rng(seed)
    r = int(rng.integers(1, 4))
    terms = []
    for _ in range(int(rng.integers(1, 4))):
        nf = int(rng.integers(0, 4))
        cs = [CayleyNumber(r, rng.integers(-3, 4, size=1 << r) / 2) for _ in range(nf + 1)]
        fs = [Factor(int(rng.integers(-5, 6)), bool(rng.random() < 0.3)) for _ in range(nf)]
        terms.append(Term.make(cs, fs, BracketTree(_random_shape(rng, 2 * nf + 1))))
    p = Phrase(r, tuple(terms))
    q = parse_phrase_text(format_phrase_text(p), r)
    assert q.to_json() == p.to_json()


class TestCommands:
    def test_cd_mul(self, capsys):
        code, out, _ = run(capsys, "cd", "mul", "i1", "i2")
        assert code == 0 and js(out)["product"] == [0, 0, 0, 1, 0, 0, 0, 0]

    def test_cd_json_operand(self, capsys):
        code, out, _ = run(capsys, "cd", "norm", "[3, 4]", "--r", "1")
        assert code == 0 and js(out)["norm"] == 5

    def test_residue_examples(self, capsys):
        code, out, _ = run(capsys, "residue", "z^-1", "--at", "0", "--M", "i1")
        assert code == 0 and js(out) == [0, 1, 0, 0, 0, 0, 0, 0]
        code, out, _ = run(capsys, "residue", "z^2", "--at", "0", "--M", "i1")
        assert code == 0 and not any(js(out))
        code, out, _ = run(capsys, "residue", "i1*z^-1*i2", "--at", "0", "--M", "i3", "--both")
        rep = js(out)
        assert code == 0 and rep["defect"] <= 1e-8
        assert np.allclose(rep["symbolic"], rep["numeric"], atol=1e-8)

    def test_residue_rule_failure_exits_1(self, capsys):
        code, _, err = run(capsys, "residue", "z^-2 * zbar^-1", "--at", "0", "--M", "i1")
        assert code == 1 and err

    def test_phrase_eval(self, capsys):
        code, out, _ = run(capsys, "phrase", "i1 * z * i2", "--r", "2", "--eval", "i3")
        assert code == 0 and js(out)["value"] == [1, 0, 0, 0]

    def test_phrase_from_json_file(self, capsys, tmp_path):
        f = tmp_path / "p.json"
        f.write_text(json.dumps(Phrase.monomial(2, 3).to_json()))
        code, out, _ = run(capsys, "phrase", str(f), "--r", "2", "--D")
        assert code == 0 and js(out)["D"] == "3 * z^2 * 1"

    def test_integrate(self, capsys):
        path = json.dumps({"kind": "polyline", "vertices": [[0, 0], [1, 1]]})
        code, out, _ = run(capsys, "integrate", "z", "--r", "1", "--path", path)
        assert code == 0 and np.allclose(js(out)["integral"], [0, 1], atol=1e-12)

    def test_cartan_corpus_name(self, capsys):
        code, out, _ = run(capsys, "cartan", "A2(1)")
        rep = js(out)
        assert code == 0 and rep["affine"] and rep["pairing_exact"] and rep["rank"] == 2

    def test_eta(self, capsys):
        code, out, _ = run(capsys, "eta", "[[2,-2],[-2,2]]", "--depth", "3", "--height", "2")
        rep = js(out)
        assert code == 0 and rep["relations_exact"]

    def test_wrap(self, capsys):
        code, out, _ = run(capsys, "wrap", "virasoro", "--k", "2", "--j", "-2")
        rep = js(out)
        assert code == 0 and rep["d_coeff"] == 4 and rep["c_coeff"] == {"num": 1, "den": 2}
        code, out, _ = run(capsys, "wrap", "cocycle", "--P", "z", "--Q", "z^-1", "--M", "i3")
        assert code == 0 and js(out)["cocycle"] == [0, 0, 0, 1, 0, 0, 0, 0]
        code, out, _ = run(capsys, "wrap", "witt", "--k", "1", "--j", "2")
        assert code == 0 and js(out)["holds"]

    def test_suite(self, capsys, tmp_path):
        dest = tmp_path / "rep.json"
        code, _, _ = run(capsys, "suite", "witt-virasoro", "--out", str(dest))
        rep = json.loads(dest.read_text())
        assert code == 0 and rep["ok"] and rep["suite"] == "witt-virasoro"

    def test_suite_seed_is_deterministic(self, capsys):
        _, a, _ = run(capsys, "suite", "moufang", "--seed", "3")
        _, b, _ = run(capsys, "suite", "moufang", "--seed", "3")
        ra, rb = js(a), js(b)
        assert ra["rows"] == rb["rows"]


class TestExitCodes:
    @pytest.mark.parametrize("argv", [
        ["suite", "unknown"],
        ["phrase", "z^999"],
        ["phrase", "i9 * z"],
        ["cd", "mul", "i1"],
        ["cd", "frobnicate"],
        ["residue", "z", "--bogus"],
        ["cartan", "[[2, 1], [0, 2]]"],
        [],
    ])
    def test_usage_errors(self, capsys, argv):
        code, _, _ = run(capsys, *argv)
        assert code == 2
