"""Left derivations of the chart ring, given by their generator images."""

from __future__ import annotations

from fractions import Fraction

from .ring import ChartError, DegreeError, Series, frac


class Derivation:
    """Degree-homogeneous left derivation V with V(g) = images[g].

    Applying V to a series follows V(f) = sum_g V(g) * d_g(f) with the
    left derivative d_g, which gives the signed Leibniz rule
    V(fg) = V(f) g + (-1)^(|V||f|) f V(g).
    Generators absent from images map to zero.
    """

    __slots__ = ("chart", "zdeg", "images", "nres", "nform")

    def __init__(self, chart, zdeg, images, nres=None, nform=None, validate=True):
        self.chart = chart
        self.zdeg = int(zdeg)
        self.nres = chart._tr(nres)
        self.nform = chart._tf(nform)
        clean = {}
        for name, im in images.items():
            g = chart.gen_named(name)
            if im.chart is not chart:
                raise ChartError("image of %r lives on another chart" % name)
            im = im.with_truncation(self.nres, self.nform)
            if im.is_zero():
                continue
            if validate and not im.is_homogeneous_of(g.zdeg + self.zdeg):
                raise DegreeError(
                    "image of %r is not homogeneous of degree %d"
                    % (name, g.zdeg + self.zdeg))
            clean[name] = im
        self.images = clean

    @property
    def parity(self):
        return self.zdeg & 1

    def image(self, name):
        im = self.images.get(name)
        if im is None:
            return self.chart.zero(self.nres, self.nform)
        return im

    def is_zero(self):
        return not self.images

    def __eq__(self, other):
        if not isinstance(other, Derivation):
            return NotImplemented
        if self.chart is not other.chart:
            return False
        if self.images != other.images:
            return False
        return self.is_zero() or self.zdeg == other.zdeg

    __hash__ = None

    def apply(self, f):
        if f.chart is not self.chart:
            raise ChartError("series lives on another chart")
        out = self.chart.zero(f.nres, f.nform)
        for name, im in self.images.items():
            p = f.partial(name)
            if p.is_zero():
                continue
            out = out + im.with_truncation(f.nres, f.nform) * p
        return out

    def __add__(self, other):
        if not isinstance(other, Derivation):
            return NotImplemented
        if self.chart is not other.chart:
            raise ChartError("derivations live on different charts")
        if not self.is_zero() and not other.is_zero() and self.zdeg != other.zdeg:
            raise DegreeError("adding derivations of different degrees")
        zdeg = other.zdeg if self.is_zero() else self.zdeg
        images = dict(self.images)
        for name, im in other.images.items():
            cur = images.get(name)
            images[name] = im if cur is None else cur + im
        return Derivation(self.chart, zdeg, images, self.nres, self.nform,
                          validate=False)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = frac(c)
        images = {name: im.scale(c) for name, im in self.images.items()}
        return Derivation(self.chart, self.zdeg, images, self.nres, self.nform,
                          validate=False)

    def commutator(self, other):
        """Graded commutator [V, W] = V W - (-1)^(|V||W|) W V."""
        if self.chart is not other.chart:
            raise ChartError("derivations live on different charts")
        sign = -1 if (self.parity and other.parity) else 1
        images = {}
        for g in self.chart.gens:
            a = self.apply(other.image(g.name)) if g.name in other.images else None
            b = other.apply(self.image(g.name)) if g.name in self.images else None
            if a is None and b is None:
                continue
            if a is None:
                im = b.scale(-sign)
            elif b is None:
                im = a
            else:
                im = a - b.scale(sign)
            if not im.is_zero():
                images[g.name] = im
        return Derivation(self.chart, self.zdeg + other.zdeg, images,
                          self.nres, self.nform, validate=False)

    def square(self):
        """V o V as a derivation; for odd V this is (1/2)[V, V]."""
        images = {}
        for g in self.chart.gens:
            im = self.images.get(g.name)
            if im is None:
                continue
            sq = self.apply(im)
            if not sq.is_zero():
                images[g.name] = sq
        return Derivation(self.chart, 2 * self.zdeg, images,
                          self.nres, self.nform, validate=False)

    def resdeg_decompose(self):
        """Split into pieces of homogeneous resolution weight.

        The weight-k piece takes the resdeg-r part of a function to
        resdeg r+k.  Returns {weight: Derivation} with zero pieces
        dropped.
        """
        buckets = {}
        for name, im in self.images.items():
            g = self.chart.gen_named(name)
            for r, comp in im.components("resdeg").items():
                buckets.setdefault(r - g.resdeg, {})[name] = comp
        return {k: Derivation(self.chart, self.zdeg, imgs, self.nres,
                              self.nform, validate=False)
                for k, imgs in sorted(buckets.items())}

    def ht_decompose(self):
        """Split into pieces of homogeneous homotopy-weight raise.

        The raise-w piece takes the (resdeg+formdeg)-u part of a
        function to weight u+w.  Returns {raise: Derivation} with zero
        pieces dropped.
        """
        buckets = {}
        for name, im in self.images.items():
            g = self.chart.gen_named(name)
            gw = g.resdeg + g.formdeg
            for w, comp in im.components("deg_ht").items():
                buckets.setdefault(w - gw, {})[name] = comp
        return {k: Derivation(self.chart, self.zdeg, imgs, self.nres,
                              self.nform, validate=False)
                for k, imgs in sorted(buckets.items())}

    def res_weight(self):
        """Resolution weight if homogeneous, None for zero, else raises."""
        pieces = self.resdeg_decompose()
        if not pieces:
            return None
        if len(pieces) > 1:
            raise DegreeError("derivation mixes resolution weights %s"
                              % sorted(pieces))
        return next(iter(pieces))

    def ht_weight(self):
        """Total homotopy weight (resdeg + formdeg) if homogeneous."""
        chart = self.chart
        weights = set()
        for name, im in self.images.items():
            g = chart.gen_named(name)
            gw = g.resdeg + g.formdeg
            for key in im.terms:
                weights.add(chart.mono_deg_ht(key) - gw)
        if not weights:
            return None
        if len(weights) > 1:
            raise DegreeError("derivation mixes homotopy weights %s"
                              % sorted(weights))
        return weights.pop()

    def __repr__(self):
        items = ", ".join("%s -> %s" % (n, im.to_str())
                          for n, im in sorted(self.images.items()))
        return "<Derivation deg=%d: %s>" % (self.zdeg, items or "0")


def de_rham(chart, nres=None, nform=None):
    """d: z^a -> dz^a, killing form and fiber generators."""
    images = {g.name: chart.gen(chart.form_of(g).name, nres, nform)
              for g in chart.base_gens}
    return Derivation(chart, 1, images, nres, nform)


def canonical_delta(chart, nres=None, nform=None):
    """delta: eps^a -> -dz^a, the weight -1 piece of the canonical connection."""
    images = {}
    for g in chart.base_gens:
        images[chart.fiber_of(g).name] = -chart.gen(chart.form_of(g).name,
                                                    nres, nform)
    return Derivation(chart, 1, images, nres, nform)


def eps_ht(chart, nres=None, nform=None):
    """Weight counter dz^a d/d(dz^a) + eps^a d/d(eps^a)."""
    images = {}
    for g in chart.base_gens:
        fo = chart.form_of(g).name
        fi = chart.fiber_of(g).name
        images[fo] = chart.gen(fo, nres, nform)
        images[fi] = chart.gen(fi, nres, nform)
    return Derivation(chart, 0, images, nres, nform)
