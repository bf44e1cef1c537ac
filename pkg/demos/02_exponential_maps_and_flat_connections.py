"""
Exponential maps, their flat connections, and lifting
=====================================================

A formal exponential map is stored through its pullbacks z^a -> z^a +
eps^a + higher fiber terms.  It generates a unique flat connection, the
connection reconstructs the map, and flat sections of the connection
reproduce pullbacks of base functions.
"""

from formalexp import (FormalExpMap, GradedChart, canonicalize,
                       check_flatness, cohomology_lift,
                       fexp_from_grothendieck, grothendieck_from_fexp,
                       validate_fexp)

ch = GradedChart([("z1", 0), ("z2", 0)], nres=6, nform=4)

# a proper map: identity at fiber degree one, plus one quadratic term
F = FormalExpMap(ch, {
    "z1": ch.parse("z1 + ez1 + z2*ez1^2"),
    "z2": ch.parse("z2 + ez2"),
})
print(validate_fexp(F).render())

# the generated connection is flat: its square leaves no residual at
# any determined resolution degree
G = grothendieck_from_fexp(F)
print("D(ez1) =", G.d.image("ez1").to_str())
print(check_flatness(G).render())

# reconstruction inverts the construction exactly
back = fexp_from_grothendieck(G)
print("round trip exact:", back.pullbacks == F.pullbacks)

# a fiber substitution straightens the quadratic term away; inverting
# u + c u^2 brings in signed Catalan numbers order by order
images, canon = canonicalize(F)
print("canonical pullback of z1:", canon.pullbacks["z1"].to_str())
print("straightening image of ez1:", images["ez1"].to_str())

# lifting a base function along the connection equals pulling it back
g = ch.parse("z1*z2^2")
lift = cohomology_lift(G, g)
print("lift equals pullback:", lift == F.apply(g))
print("lift starts as      :", lift.grade_project("resdeg", 1).to_str())
