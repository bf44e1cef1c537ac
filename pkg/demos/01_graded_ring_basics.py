"""
Truncated series on a graded coordinate chart
=============================================

Every coefficient is an exact rational; odd generators anticommute and
square to zero, and the sign bookkeeping follows each factor across the
others as products are sorted.
"""

from fractions import Fraction

from formalexp import GradedChart

# a chart holds base generators z^a plus a paired form dz^a (degree +1)
# and fiber eps^a (same degree) for each of them
ch = GradedChart([("x", 0), ("th", 1)], nres=6, nform=4)
print("generators:", ", ".join("%s(deg %d)" % (g.name, g.zdeg) for g in ch.gens))

# parsing understands the generator names, ^ powers and rational coefficients
f = ch.parse("3/2 * x^2 * th - dx * eth")
print("f        =", f.to_str())

# th and dx are odd: swapping two odd factors flips the sign
print("dx * th  =", (ch.gen("dx") * ch.gen("th")).to_str())
print("th * dx  =", (ch.gen("th") * ch.gen("dx")).to_str())
print("th * th  =", (ch.gen("th") * ch.gen("th")).to_str())

# the left derivative picks up a sign for each odd factor it passes
g = ch.parse("x * th * eth")
print("d/dth(x * th * eth) =", g.partial("th").to_str())

# products beyond the stored orders are dropped; nres bounds the fiber
# degree and nform the form degree
h = ch.gen("ex") ** 5
print("ex^5     =", h.to_str())
print("ex^5 * ex^2 =", (h * ch.gen("ex") ** 2).to_str(), "(beyond order 6)")

# any series splits into homogeneous components of a chosen grading
k = ch.parse("x + x*ex^2 + dx*ex")
for lev, comp in sorted(k.components("resdeg").items()):
    print("resdeg %d component: %s" % (lev, comp.to_str()))

# coefficients stay exact no matter how they are combined
q = ch.const(Fraction(1, 3)) * ch.const(Fraction(3, 7))
print("1/3 * 3/7 =", q.to_str())
