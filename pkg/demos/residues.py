"""Residues of a non-commutative Laurent phrase, symbolic against numeric, and the residue theorem on a circle."""
from octowrap.cayley_dickson import CayleyNumber, Direction
from octowrap.contour import PlaneCircle, residue_numeric, residue_symbolic, residue_theorem_check
from octowrap.cli import parse_phrase_text

r = 3
p = parse_phrase_text("i1 * z^-1 * i2 + (i4 * z^-2) * i5 + 3 * z^2", r)
z0 = CayleyNumber.zero(r)
for k in (1, 3, 6):
    M = CayleyNumber.generator(r, k)
    s = residue_symbolic(p, z0, M)
    n = residue_numeric(p, z0, M)
    print(f"M = i{k}: symbolic {s}  numeric {n}  defect {(s - n).norm():.2e}")

M = CayleyNumber.generator(r, 3)
rep = residue_theorem_check(p, PlaneCircle(z0, 1.0, Direction(M)))
print("loop integral    ", rep.lhs)
print("2 pi sum of Res  ", rep.rhs)
print(f"defect {rep.defect:.2e}")
