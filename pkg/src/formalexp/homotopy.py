"""Contracting homotopy for the weight -1 piece of a flat connection.

The fiber part delta of a connection pairs with a degree -1 derivation
zeta (form generators to fiber generators through the inverse
coefficient matrix) so that delta zeta + zeta delta counts the combined
resolution and form weight.  Rescaling zeta by that weight gives the
homotopy h used everywhere: primitives of closed elements, lifts of
base functions to flat sections, and the completion of a connection to
a flat one.
"""

from __future__ import annotations

from fractions import Fraction

from .ring import ChartError
from .vecfield import Derivation, canonical_delta, eps_ht
from .fexp import ConsistencyError, _ensure


class HomotopyData:
    """delta, zeta and the weight counter, with the contraction identity.

    delta zeta + zeta delta = weight is asserted on every generator at
    construction time; both sides are derivations, so that settles the
    identity on the whole ring.
    """

    __slots__ = ("chart", "delta", "zeta", "weight_counter", "nres", "nform")

    def __init__(self, delta, zeta):
        if delta.chart is not zeta.chart:
            raise ChartError("delta and zeta live on different charts")
        self.chart = delta.chart
        self.delta = delta
        self.zeta = zeta
        self.nres = delta.nres
        self.nform = delta.nform
        _ensure(delta.zdeg == 1, "delta must have degree 1")
        _ensure(zeta.zdeg == -1, "zeta must have degree -1")
        self.weight_counter = eps_ht(self.chart, self.nres, self.nform)
        for g in self.chart.gens:
            lhs = delta.apply(zeta.image(g.name)) + zeta.apply(delta.image(g.name))
            rhs = self.weight_counter.image(g.name)
            _ensure(lhs == rhs,
                    "contraction identity fails on %s: got %s, want %s"
                    % (g.name, lhs.to_str(), rhs.to_str()))

    @classmethod
    def canonical(cls, chart, nres=None, nform=None):
        """Homotopy of the canonical pair delta(eps^a) = -dz^a, zeta(dz^a) = -eps^a."""
        delta = canonical_delta(chart, nres, nform)
        nres = chart._tr(nres)
        nform = chart._tf(nform)
        images = {}
        for g in chart.base_gens:
            images[chart.form_of(g).name] = -chart.gen(chart.fiber_of(g).name, nres, nform)
        zeta = Derivation(chart, -1, images, nres, nform)
        return cls(delta, zeta)

    def h(self, f):
        """Weight-rescaled homotopy: zeta/w on the weight-w part, 0 at w = 0."""
        if f.chart is not self.chart:
            raise ChartError("series lives on another chart")
        out = self.chart.zero(f.nres, f.nform)
        for w, comp in f.components("deg_ht").items():
            if w == 0:
                continue
            out = out + self.zeta.apply(comp).scale(Fraction(1, w))
        return out


def build_zeta(conn):
    """zeta for a connection: dz^a -> eps^b Zhat[b][a] with Zhat the
    inverse of the weight -1 coefficient matrix."""
    ch = conn.chart
    nres, nform = conn.nres, conn.nform
    zhat = conn.chat_inverse()
    fibers = conn.fiber_names()
    images = {}
    for a_i, a in enumerate(conn.base_names()):
        acc = ch.zero(nres, nform)
        for b_i, b in enumerate(fibers):
            acc = acc + ch.gen(b, nres, nform) * zhat[b_i][a_i]
        images[ch.form_of(a).name] = acc
    return Derivation(ch, -1, images, nres, nform)


def homotopy_from_connection(conn):
    """HomotopyData for a connection's weight -1 piece."""
    return HomotopyData(conn.delta(), build_zeta(conn))


def homotopy_h(data, f):
    return data.h(f)


def find_primitive(data, f):
    """Solve delta(p) = f for a delta-closed f of positive weight.

    Raises ConsistencyError when f is not closed, has a weight-0 part,
    or runs into the truncation order (a primitive raises the
    resolution degree by one, so f must stay strictly below the cap).
    Returns p with delta(p) = f asserted.
    """
    if f.chart is not data.chart:
        raise ChartError("series lives on another chart")
    closed = data.delta.apply(f)
    _ensure(closed.is_zero(),
            "no primitive: input is not closed, delta(f) = %s" % closed.to_str())
    w0 = f.grade_project("deg_ht", 0)
    _ensure(w0.is_zero(),
            "no primitive: weight-0 part %s cannot be exact" % w0.to_str())
    _ensure(f.max_resdeg() < f.nres,
            "truncation order %d too small: input reaches resolution degree %d"
            % (f.nres, f.max_resdeg()))
    p = data.h(f)
    defect = data.delta.apply(p) - f
    _ensure(defect.is_zero(), "primitive defect %s" % defect.to_str())
    return p


def cohomology_lift(conn, f, data=None):
    """Extend a base function to a section annihilated by the connection.

    f must only use base generators.  The lift adds, weight by weight,
    the homotopy of the already-built part's differential; flatness
    makes each step solvable.  The result agrees with f along the zero
    section and is annihilated by D up to the resolution truncation,
    which is asserted; products lift to products.
    """
    ch = conn.chart
    if f.chart is not ch:
        raise ChartError("series lives on another chart")
    for k in f.terms:
        _ensure(ch.mono_resdeg(k) == 0 and ch.mono_formdeg(k) == 0,
                "lift input must be a function of the base generators only")
    if data is None:
        data = homotopy_from_connection(conn)
    nres, nform = conn.nres, conn.nform
    f = f.with_truncation(nres, nform)
    lift = f
    for w in range(1, nres + 1):
        obstruction = conn.d.apply(lift).grade_project("deg_ht", w)
        lift = lift - data.h(obstruction)
    resid = conn.d.apply(lift)
    for lev in range(0, nres):
        comp = resid.grade_project("resdeg", lev)
        _ensure(comp.is_zero(),
                "lift is not flat at resolution degree %d: %s" % (lev, comp.to_str()))
    _ensure(lift.zero_section() == f, "lift does not restrict to the input")
    return lift
