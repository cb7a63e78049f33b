"""Realization, symmetrization and invariant form for an affine matrix, then the tensor representation checks."""
from octowrap import cartan as ct
from octowrap import eta_rep as er

A = ct.AFFINE_CORPUS["A2(2)"]
R = ct.realize(A)
S = ct.symmetrize(A)
F = ct.form_on_h(R, S)
print("A =", A, " affine:", ct.classify_affine(A))
print("dim h =", R.dim_h, " coroots:", [[str(x) for x in g] for g in R.coroots])
print("d =", [str(x) for x in S.d], " B =", [[str(x) for x in row] for row in S.B])
print("cartan_from_form roundtrip:", ct.cartan_from_form(F) == A)

G = er.build_module(A, R, D=4)
print("module words:", G.module.size, " relations:", er.check_relations(G, R).to_json())
print("f-side root multiplicities:", er.root_grade(G, R, H_max=3, side="f"))
rep = er.heisenberg_casimir(2, [1, 2], [3, -1], D=4)
print("Casimir commutator defect:", rep.commutator_defect, " vacuum:", rep.vacuum_value, "expected:", rep.expected)
