"""Torsion-free affine connections and their flat completion.

A connection is stored through its symbol array A[a][c][b] with
nabla(eps^a) = -dz^b eps^c A^a_{cb}(z).  Starting from the canonical
weight -1 piece plus that covariant derivative, the square of the
differential is killed weight by weight with the contracting homotopy;
the result is a flat connection whose exponential map can then be
rebuilt.  A Taylor-series geodesic integrator provides an independent
route to the same jets on plain charts.
"""

from __future__ import annotations

from fractions import Fraction

from .ring import ChartError, frac
from .vecfield import Derivation, canonical_delta, de_rham
from .fexp import ConsistencyError, GrothendieckConnection, _ensure
from .homotopy import HomotopyData


class Connection:
    """Symbol data A^a_{cb}(z), graded-symmetric in the lower indices.

    symbols maps (upper, lower_fiber, lower_form) name triples to
    base-generator Series; missing triples are zero.  Degree
    homogeneity is enforced; the torsion check is a reported property
    since extraction from an arbitrary map can produce torsion.
    """

    __slots__ = ("chart", "symbols", "nres", "nform")

    def __init__(self, chart, symbols, nres=None, nform=None):
        self.chart = chart
        self.nres = chart._tr(nres)
        self.nform = chart._tf(nform)
        base = {g.name for g in chart.base_gens}
        clean = {}
        for key, s in symbols.items():
            a, c, b = key
            if a not in base or c not in base or b not in base:
                raise ChartError("symbol %r must use base generator names" % (key,))
            if s.chart is not chart:
                raise ChartError("symbol %r lives on another chart" % (key,))
            if s.is_zero():
                continue
            _ensure(all(chart.mono_resdeg(k) == 0 and chart.mono_formdeg(k) == 0
                        for k in s.terms),
                    "symbol %r must be a function of the base generators" % (key,))
            want = (chart.gen_named(a).zdeg - chart.gen_named(c).zdeg
                    - chart.gen_named(b).zdeg)
            _ensure(s.is_homogeneous_of(want),
                    "symbol %r must be homogeneous of degree %d" % (key, want))
            clean[key] = s.with_truncation(self.nres, self.nform)
        self.symbols = clean

    def symbol(self, a, c, b):
        s = self.symbols.get((a, c, b))
        if s is None:
            return self.chart.zero(self.nres, self.nform)
        return s

    def is_torsion_free(self):
        ch = self.chart
        for g_a in ch.base_gens:
            for g_c in ch.base_gens:
                for g_b in ch.base_gens:
                    sign = -1 if (g_c.zdeg % 2) and (g_b.zdeg % 2) else 1
                    lhs = self.symbol(g_a.name, g_c.name, g_b.name)
                    rhs = self.symbol(g_a.name, g_b.name, g_c.name)
                    if lhs != rhs.scale(sign):
                        return False
        return True

    def __eq__(self, other):
        if not isinstance(other, Connection):
            return NotImplemented
        if self.chart is not other.chart:
            return False
        keys = set(self.symbols) | set(other.symbols)
        return all(self.symbol(*k) == other.symbol(*k) for k in keys)

    def __repr__(self):
        items = ", ".join("A[%s;%s,%s] = %s" % (a, c, b, s.to_str())
                          for (a, c, b), s in sorted(self.symbols.items()))
        return "Connection(%s)" % (items or "flat coordinates")


def nabla_superconnection(connection):
    """Starting differential delta + d + covariant term of the symbols.

    The fiber image is -dz^b eps^c A^a_{cb} added on top of the
    canonical eps^a -> -dz^a piece; base generators go to their forms.
    """
    ch = connection.chart
    nres, nform = connection.nres, connection.nform
    images = {}
    for g in ch.base_gens:
        images[g.name] = ch.gen(ch.form_of(g).name, nres, nform)
    for g_a in ch.base_gens:
        acc = -ch.gen(ch.form_of(g_a).name, nres, nform)
        for g_c in ch.base_gens:
            for g_b in ch.base_gens:
                s = connection.symbols.get((g_a.name, g_c.name, g_b.name))
                if s is None:
                    continue
                term = (ch.gen(ch.form_of(g_b).name, nres, nform)
                        * ch.gen(ch.fiber_of(g_c).name, nres, nform) * s)
                acc = acc - term
        images[ch.fiber_of(g_a).name] = acc
    return Derivation(ch, 1, images, nres, nform)


class HptStep:
    """One completion step: the defect found and the repair added."""

    __slots__ = ("defect", "repair")

    def __init__(self, defect, repair):
        self.defect = defect
        self.repair = repair


class HptResult:
    """Flat completion together with the steps that built it."""

    __slots__ = ("connection", "steps", "start")

    def __init__(self, connection, steps, start):
        self.connection = connection
        self.steps = steps
        self.start = start


def hpt_complete(connection):
    """Complete a torsion-free connection to a flat one.

    The starting differential squares to a curvature of weight raise 2
    and higher; each defect S_k (raise k+2) annihilates base and form
    generators, commutes with the canonical weight -1 piece, and gets
    repaired by the homotopy image -h(S_k(eps^a)) placed on the fiber
    generators.  All three facts are asserted, as is the vanishing of
    the repaired weight afterwards.  Runs through every raise
    representable under the resolution truncation.
    """
    _ensure(connection.is_torsion_free(),
            "completion needs a torsion-free connection")
    ch = connection.chart
    nres, nform = connection.nres, connection.nform
    _ensure(nform >= 2, "completion needs form truncation order >= 2")
    data = HomotopyData.canonical(ch, nres, nform)
    d = nabla_superconnection(connection)
    steps = {}

    for k in range(0, nres - 1):
        raise_w = k + 2
        defect = d.square().ht_decompose()
        for low in range(0, raise_w):
            _ensure(low not in defect,
                    "square has an unrepaired piece of weight raise %d" % low)
        s_k = defect.get(raise_w)
        if s_k is None:
            zero2 = Derivation(ch, 2, {}, nres, nform, validate=False)
            zero1 = Derivation(ch, 1, {}, nres, nform, validate=False)
            steps[k] = HptStep(zero2, zero1)
            continue
        for g in ch.base_gens:
            _ensure(s_k.image(g.name).is_zero(),
                    "defect hits the base generator %s" % g.name)
            _ensure(s_k.image(ch.form_of(g).name).is_zero(),
                    "defect hits the form generator %s" % ch.form_of(g).name)
        anti = data.delta.commutator(s_k)
        _ensure(anti.is_zero(),
                "defect at weight raise %d is not closed" % raise_w)
        repair_images = {}
        for g in ch.base_gens:
            fib = ch.fiber_of(g).name
            img = s_k.image(fib)
            if img.is_zero():
                continue
            repair_images[fib] = -data.h(img)
        repair = Derivation(ch, 1, repair_images, nres, nform)
        check = data.delta.commutator(repair) + s_k
        _ensure(check.is_zero(),
                "repair at weight raise %d fails to cancel the defect" % raise_w)
        steps[k] = HptStep(s_k, repair)
        d = d + repair

    conn = GrothendieckConnection(d)
    return HptResult(conn, steps, nabla_superconnection(connection))


def connection_from_fexp(fexp, conn=None):
    """Extract the symbols from the weight-0 covariant part of the map.

    The rebuilt covariant term is asserted to reproduce that part
    exactly, so the extraction loses nothing.  Torsion of the result is
    the caller's to inspect.
    """
    from .fexp import grothendieck_from_fexp

    if conn is None:
        conn = grothendieck_from_fexp(fexp)
    ch = conn.chart
    nres, nform = conn.nres, conn.nform
    c0 = conn.weight_piece(0)
    symbols = {}
    for g_a in ch.base_gens:
        img = c0.image(ch.fiber_of(g_a).name)
        for g_c in ch.base_gens:
            for g_b in ch.base_gens:
                s = -img.partial(ch.form_of(g_b).name).partial(ch.fiber_of(g_c).name)
                if not s.is_zero():
                    symbols[(g_a.name, g_c.name, g_b.name)] = s
    out = Connection(ch, symbols, nres, nform)
    rebuilt = nabla_superconnection(out)
    for g in ch.base_gens:
        fib = ch.fiber_of(g).name
        got = rebuilt.image(fib) + ch.gen(ch.form_of(g).name, nres, nform)
        _ensure(got == c0.image(fib),
                "symbol extraction does not reproduce the covariant term of %s" % fib)
    return out


def geodesic_taylor_oracle(connection, order):
    """Jets of the geodesic flow by direct Taylor recursion.

    Solves z''^a + A^a_{bc}(z) z'^b z'^c = 0 with z(0) = z, z'(0) =
    eps, coefficient by coefficient; the order-k coefficient times k!
    over k! is returned in place, i.e. the pullback z^a -> sum_k Z_k^a
    with Z_k the t^k Taylor coefficient.  Only plain charts qualify:
    every base generator must have degree 0.  This is a deliberately
    independent route that never touches the differential machinery.
    """
    ch = connection.chart
    for g in ch.base_gens:
        if g.zdeg != 0:
            raise ChartError("geodesic integration needs all base degrees 0")
    _ensure(order >= 1, "order must be at least 1")
    nres = max(ch.nres, order)
    nform = ch.nform
    bases = [g.name for g in ch.base_gens]

    # truncated polynomials in t with Series coefficients
    def tmul(p, q):
        out = {}
        for i, a in p.items():
            for j, b in q.items():
                if i + j > order:
                    continue
                prod = a * b
                if (i + j) in out:
                    out[i + j] = out[i + j] + prod
                else:
                    out[i + j] = prod
        return out

    def tadd(p, q):
        out = dict(p)
        for j, b in q.items():
            out[j] = out[j] + b if j in out else b
        return out

    def tscale(p, c):
        return {i: a.scale(c) for i, a in p.items()}

    def tsubst(series):
        # substitute the evolving path into a base-only polynomial
        out = {0: ch.const(series.terms.get((), Fraction(0)), nres, nform)}
        out = {k: v for k, v in out.items() if not v.is_zero()}
        for key, coeff in series.terms.items():
            if not key:
                continue
            term = {0: ch.const(coeff, nres, nform)}
            for pos, exp in key:
                name = ch.gens[pos].name
                for _ in range(exp):
                    term = tmul(term, path[name])
            out = tadd(out, term)
        return out

    path = {a: {0: ch.gen(a, nres, nform), 1: ch.gen(ch.fiber_of(a).name, nres, nform)}
            for a in bases}
    for k in range(0, order - 1):
        # t^k coefficient of A^a_{bc}(z(t)) z'^b z'^c fixes Z_{k+2}
        for a in bases:
            acc = {}
            for b in bases:
                for c in bases:
                    s = connection.symbols.get((a, b, c))
                    if s is None:
                        continue
                    vb = {i - 1: coeff.scale(i) for i, coeff in path[b].items() if i >= 1}
                    vc = {i - 1: coeff.scale(i) for i, coeff in path[c].items() if i >= 1}
                    acc = tadd(acc, tmul(tmul(tsubst(s), vb), vc))
            rhs = acc.get(k, ch.zero(nres, nform))
            znew = rhs.scale(Fraction(-1, (k + 1) * (k + 2)))
            if not znew.is_zero():
                path[a][k + 2] = znew

    jets = {}
    for a in bases:
        acc = ch.zero(nres, nform)
        for kk, coeff in sorted(path[a].items()):
            acc = acc + coeff
        jets[a] = acc
    return jets
