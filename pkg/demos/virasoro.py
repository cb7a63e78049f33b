"""Witt relations on Laurent monomials, the Virasoro central term and the residue cocycle on sl2 states."""
from octowrap import wrap_virasoro as wv
from octowrap.cayley_dickson import CayleyNumber
from octowrap.phrase import Phrase

print("Witt [d_k, d_j] = (k - j) d_{j+k} on |m| <= 8:",
      all(wv.witt_holds(k, j) for k in range(-5, 6) for j in range(-5, 6)))
for j in range(-3, 4):
    (idx, coef), cc = wv.virasoro_bracket(j, None, -j, None)
    print(f"[d_{j}, d_{-j}] = {coef} d_{idx} + {cc} c")

r = 3
base = wv.sl2()
a = wv.WrapElement.pure(Phrase.monomial(r, 2), [1, 0, 0], k=1)
b = wv.WrapElement.pure(Phrase.monomial(r, -2), [0, 0, 1], k=2)
z0 = CayleyNumber.zero(r)
print("omega(a, b) =", wv.cocycle(z0, a, b, CayleyNumber.generator(r, 4), base))
print("omega(b, a) =", wv.cocycle(z0, b, a, CayleyNumber.generator(r, 4), base))

rows = wv.cocycle_identity_suite(base, cases=30, seed=1)
for name, s in wv.suite_summary(rows).items():
    print(f"{name:>15}: cases={s['cases']} nontrivial={s['nontrivial']} max_defect={s['max_defect']:.1e}")
