"""
Linearizing a differential graded symplectic field
==================================================

A degree-1 square-zero vector field with an invariant pairing, expanded
around a base point, becomes a codifferential on the fiber generators.
Its components by fiber degree are the n-ary bracket coefficients; a
symbolic expansion point keeps them polynomial in the parameters.
"""

from formalexp import (GradedChart, QPStructure, check_cyclic,
                       linearize_at_point, validate_qp)

# degree-1 field encoding the quadratic bivector z1^2 d/dz1 ^ d/dz2
# on the shifted cotangent chart of the plane
ch = GradedChart([("z1", 0), ("z2", 0), ("p1", 1), ("p2", 1)], nres=6, nform=4)
qp = QPStructure(ch, 1, {
    "z1": ch.parse("z1^2*p2"),
    "z2": ch.parse("-z1^2*p1"),
    "p1": ch.parse("2*z1*p1*p2"),
}, {("z1", "p1"): 1, ("p1", "z1"): 1, ("z2", "p2"): 1, ("p2", "z2"): 1})
print(validate_qp(qp).render())

# expanding at the point z1 = 1 gives unary, binary and ternary brackets
linf = linearize_at_point(qp, {"z1": 1, "z2": 0})
print("arities:", linf.arities(), " curved:", linf.curved)
for n in linf.arities():
    for fib in sorted(linf.brackets[n]):
        print("  l%d[%s] = %s" % (n, fib, linf.brackets[n][fib].to_str()))

# the brackets stay cyclic against the pairing, arity by arity
print(check_cyclic(qp, linf).render())

# a symbolic point turns the coefficients into polynomials in a1, a2
sym = linearize_at_point(qp, {"z1": "a1", "z2": "a2"}, params=["a1", "a2"])
print("symbolic l1[ez1] =", sym.bracket_component(1, "ez1").to_str())
print("symbolic l2[ez1] =", sym.bracket_component(2, "ez1").to_str())
