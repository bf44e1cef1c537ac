"""
Two independent routes to the same Taylor jets
==============================================

The exponential map of a connection can be computed homologically, by
completing the symbols and inverting the flat connection, or directly,
by integrating the geodesic equation order by order.  The two routes
agree coefficient for coefficient.
"""

from fractions import Fraction

from formalexp import (Connection, GradedChart, fexp_from_grothendieck,
                       geodesic_taylor_oracle, hpt_complete)

ch = GradedChart([("z1", 0), ("z2", 0)], nres=6, nform=4)
A = Connection(ch, {
    ("z1", "z1", "z1"): ch.gen("z2"),
    ("z2", "z1", "z2"): ch.gen("z1"),
    ("z2", "z2", "z1"): ch.gen("z1"),
})

# homological route: complete, then invert the flat connection
F = fexp_from_grothendieck(hpt_complete(A).connection)

# direct route: recursive Taylor coefficients of the geodesic equation
jets = geodesic_taylor_oracle(A, 6)

for a in ("z1", "z2"):
    same = jets[a] == F.pullbacks[a]
    print("jets of %s agree to order 6: %s" % (a, same))

# at second order both routes must produce -1/2 A^a_{bc} eps^b eps^c
for a in ("z1", "z2"):
    want = ch.zero()
    for b in ("z1", "z2"):
        for c in ("z1", "z2"):
            want = want - (A.symbol(a, b, c) * ch.gen("e" + b)
                           * ch.gen("e" + c)).scale(Fraction(1, 2))
    got = F.pullbacks[a].grade_project("resdeg", 2)
    print("order-2 jet of %s: %s" % (a, got.to_str()))
    assert got == want

# the quartic coefficients are already nontrivial and still exact
print("order-4 jet of z2:", F.pullbacks["z2"].grade_project("resdeg", 4).to_str())
