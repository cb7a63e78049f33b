"""Octonion arithmetic: the multiplication table, a non-associative triple, polar form and exp/ln."""
import math

from octowrap.cayley_dickson import CayleyNumber, associator, exp_cd, ln_cd, make_table, mul, polar

r = 3
i = [CayleyNumber.generator(r, k) for k in range(8)]

t = make_table(r)
print("sign table (row j, column k gives the sign of i_j i_k):")
for row in t.sign:
    print(" ".join(f"{int(s):+d}" for s in row))

print("(i1 i2) i4 =", mul(mul(i[1], i[2]), i[4]))
print("i1 (i2 i4) =", mul(i[1], mul(i[2], i[4])))
print("associator  =", associator(i[1], i[2], i[4]))

z = CayleyNumber(r, [1, 0, 1, 0, 0, 0, 0, 0])
p = polar(z)
print(f"polar(1 + i2): rho={p.rho:.6f} theta={p.theta} turns, M={p.M.value}")
print("exp(pi i1) =", exp_cd(i[1].scale(math.pi)))
print("ln(i3)     =", ln_cd(i[3]))
