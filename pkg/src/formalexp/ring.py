"""Truncated graded-commutative polynomial series with exact rational coefficients.

A chart carries three classes of generators: base coordinates z^a of
arbitrary integer degree, form generators dz^a of degree deg(z^a)+1, and
fiber generators eps^a of the same degree as z^a.  Generators of odd
degree anticommute and square to zero; even generators commute with
everything.  Each series tracks the polynomial degree in the fiber class
(resdeg) and in the form class (formdeg) and silently drops terms beyond
the configured truncation orders.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

BASE = "base"
FORM = "form"
FIBER = "fiber"

DEFAULT_RES_ORDER = 6
DEFAULT_FORM_ORDER = 4


class ChartError(ValueError):
    pass


class DegreeError(ValueError):
    pass


class ParseError(ValueError):
    pass


def frac(x):
    """Coerce ints, strings like '3/2' and Fractions to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError("not an exact rational: %r" % (x,))


@dataclass(frozen=True)
class Generator:
    name: str
    zdeg: int
    klass: str
    index: int
    pos: int

    @property
    def parity(self):
        return self.zdeg & 1

    @property
    def resdeg(self):
        return 1 if self.klass == FIBER else 0

    @property
    def formdeg(self):
        return 1 if self.klass == FORM else 0

    def __repr__(self):
        return "Generator(%s, deg=%d, %s)" % (self.name, self.zdeg, self.klass)


class GradedChart:
    """Generators of a chart, ordered base block, form block, fiber block.

    base: sequence of (name, degree) pairs.  The paired form and fiber
    generators are named by prefixing (default 'd' and 'e').  base_point
    assigns a rational to each degree-0 base generator; every base
    generator of nonzero degree sits at 0 and may not be reassigned.
    """

    def __init__(self, base, point=None, nres=DEFAULT_RES_ORDER,
                 nform=DEFAULT_FORM_ORDER, form_prefix="d", fiber_prefix="e"):
        if not base:
            raise ChartError("chart needs at least one base generator")
        gens = []
        names = set()
        specs = []
        for i, item in enumerate(base):
            if len(item) == 2:
                name, deg = item
                fo, fi = form_prefix + name, fiber_prefix + name
            else:
                name, deg, fo, fi = item
            specs.append((name, int(deg), fo, fi))
        for i, (name, deg, fo, fi) in enumerate(specs):
            gens.append(Generator(name, deg, BASE, i, i))
        n = len(specs)
        for i, (name, deg, fo, fi) in enumerate(specs):
            gens.append(Generator(fo, deg + 1, FORM, i, n + i))
        for i, (name, deg, fo, fi) in enumerate(specs):
            gens.append(Generator(fi, deg, FIBER, i, 2 * n + i))
        for g in gens:
            if g.name in names:
                raise ChartError("duplicate generator name %r" % g.name)
            names.add(g.name)
        self.gens = tuple(gens)
        # flat per-position lookups for the multiplication hot path
        self._parity = tuple(g.zdeg & 1 for g in gens)
        self._is_fiber = tuple(g.klass == FIBER for g in gens)
        self._is_form = tuple(g.klass == FORM for g in gens)
        self.n_base = n
        self.base_gens = self.gens[:n]
        self.form_gens = self.gens[n:2 * n]
        self.fiber_gens = self.gens[2 * n:]
        self._pos = {g.name: g.pos for g in self.gens}
        self.nres = int(nres)
        self.nform = int(nform)
        self.base_point = {}
        for g in self.base_gens:
            self.base_point[g.name] = Fraction(0)
        if point:
            for name, val in point.items():
                g = self.gen_named(name)
                if g.klass != BASE:
                    raise ChartError("base point assigns non-base generator %r" % name)
                if g.zdeg != 0 and frac(val) != 0:
                    raise ChartError("nonzero base point at generator %r of degree %d"
                                     % (name, g.zdeg))
                self.base_point[name] = frac(val)

    def gen_named(self, name):
        try:
            return self.gens[self._pos[name]]
        except KeyError:
            raise ChartError("unknown generator %r" % name) from None

    def has_gen(self, name):
        return name in self._pos

    def form_of(self, base_gen):
        if isinstance(base_gen, str):
            base_gen = self.gen_named(base_gen)
        return self.gens[self.n_base + base_gen.index]

    def fiber_of(self, base_gen):
        if isinstance(base_gen, str):
            base_gen = self.gen_named(base_gen)
        return self.gens[2 * self.n_base + base_gen.index]

    def base_of(self, gen):
        if isinstance(gen, str):
            gen = self.gen_named(gen)
        return self.gens[gen.index]

    # monomial keys are tuples ((pos, exp), ...) sorted by pos

    def mono_zdeg(self, key):
        return sum(self.gens[p].zdeg * e for p, e in key)

    def mono_resdeg(self, key):
        fib = self._is_fiber
        total = 0
        for p, e in key:
            if fib[p]:
                total += e
        return total

    def mono_formdeg(self, key):
        form = self._is_form
        total = 0
        for p, e in key:
            if form[p]:
                total += e
        return total

    def mono_deg_ht(self, key):
        return self.mono_resdeg(key) + self.mono_formdeg(key)

    def zero(self, nres=None, nform=None):
        return Series(self, {}, self._tr(nres), self._tf(nform))

    def const(self, c, nres=None, nform=None):
        c = frac(c)
        terms = {} if c == 0 else {(): c}
        return Series(self, terms, self._tr(nres), self._tf(nform))

    def one(self, nres=None, nform=None):
        return self.const(1, nres, nform)

    def gen(self, name, nres=None, nform=None):
        g = self.gen_named(name)
        return Series(self, {((g.pos, 1),): Fraction(1)}, self._tr(nres), self._tf(nform))

    def _tr(self, nres):
        return self.nres if nres is None else int(nres)

    def _tf(self, nform):
        return self.nform if nform is None else int(nform)

    def point_images(self, point=None):
        """Morphism images sending base generators to their point values.

        Degree-0 base generators go to rationals, every other base
        generator to 0; form and fiber generators are kept.
        """
        pt = dict(self.base_point)
        if point:
            for name, val in point.items():
                g = self.gen_named(name)
                if g.klass != BASE:
                    raise ChartError("point assigns non-base generator %r" % name)
                pt[name] = frac(val)
        images = {}
        for g in self.base_gens:
            v = pt[g.name] if g.zdeg == 0 else Fraction(0)
            images[g.name] = self.const(v)
        return images

    def parse(self, text, nres=None, nform=None):
        return _parse_series(self, text, self._tr(nres), self._tf(nform))

    def __repr__(self):
        return "GradedChart(%s)" % ", ".join(
            "%s:%d" % (g.name, g.zdeg) for g in self.base_gens)


def koszul_sign(chart, m1, m2):
    """Sign that sorts the concatenation m1*m2 into canonical order.

    Every transposition of two odd generators flips the sign; even
    generators move freely.  Raises if an odd generator occurs in both
    monomials, since the product vanishes and no sign is defined.
    """
    odd1 = [p for p, e in m1 if chart.gens[p].parity]
    flips = 0
    for p, e in m2:
        g = chart.gens[p]
        if not g.parity:
            continue
        if g.parity and e > 1:
            raise ValueError("odd generator %r with exponent %d" % (g.name, e))
        crossed = 0
        for q in odd1:
            if q > p:
                crossed += 1
            elif q == p:
                raise ValueError("odd generator %r in both factors" % g.name)
        flips += crossed
    return -1 if flips & 1 else 1


def _merge_keys(parity, m1, m2, odd1):
    """Merged key and Koszul sign for m1*m2, or (None, 0) if it dies.

    odd1 is the number of odd factors of m1; the caller checks the
    truncation caps before merging.
    """
    merged = []
    i = j = 0
    flips = 0
    n1, n2 = len(m1), len(m2)
    # count, for each odd factor of m2, the odd factors of m1 it must cross
    oi = 0
    while i < n1 or j < n2:
        if j >= n2 or (i < n1 and m1[i][0] < m2[j][0]):
            item = m1[i]
            merged.append(item)
            if parity[item[0]]:
                oi += 1
            i += 1
        elif i >= n1 or m2[j][0] < m1[i][0]:
            p, e = m2[j]
            if parity[p]:
                if e > 1:
                    return None, 0
                flips += odd1 - oi
            merged.append((p, e))
            j += 1
        else:
            p = m1[i][0]
            e = m1[i][1] + m2[j][1]
            if parity[p]:
                return None, 0
            merged.append((p, e))
            i += 1
            j += 1
    sign = -1 if flips & 1 else 1
    return tuple(merged), sign


def _merge_monomials(chart, m1, m2, nres, nform):
    """Merged key and Koszul sign for m1*m2, or (None, 0) if it dies."""
    if chart.mono_resdeg(m1) + chart.mono_resdeg(m2) > nres:
        return None, 0
    if chart.mono_formdeg(m1) + chart.mono_formdeg(m2) > nform:
        return None, 0
    parity = chart._parity
    odd1 = sum(1 for p, e in m1 if parity[p])
    return _merge_keys(parity, m1, m2, odd1)


class Series:
    """Immutable truncated series over a chart."""

    __slots__ = ("chart", "terms", "nres", "nform")

    def __init__(self, chart, terms, nres, nform):
        self.chart = chart
        self.terms = terms
        self.nres = nres
        self.nform = nform

    @classmethod
    def from_terms(cls, chart, terms, nres=None, nform=None):
        nres = chart._tr(nres)
        nform = chart._tf(nform)
        clean = {}
        for key, c in terms.items():
            c = frac(c)
            if c == 0:
                continue
            key = tuple(sorted(key))
            for p, e in key:
                g = chart.gens[p]
                if e <= 0:
                    raise ValueError("nonpositive exponent on %r" % g.name)
                if g.parity and e > 1:
                    raise ValueError("odd generator %r squared" % g.name)
            if chart.mono_resdeg(key) > nres or chart.mono_formdeg(key) > nform:
                continue
            clean[key] = clean.get(key, Fraction(0)) + c
        clean = {k: v for k, v in clean.items() if v != 0}
        return cls(chart, clean, nres, nform)

    def _compat(self, other):
        if self.chart is not other.chart:
            raise ChartError("series live on different charts")
        if self.nres != other.nres or self.nform != other.nform:
            raise ChartError("series have different truncation orders")

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        return self.chart is other.chart and self.terms == other.terms

    def __ne__(self, other):
        eq = self.__eq__(other)
        return NotImplemented if eq is NotImplemented else not eq

    __hash__ = None

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.chart.const(other, self.nres, self.nform)
        self._compat(other)
        terms = dict(self.terms)
        for k, c in other.terms.items():
            s = terms.get(k, Fraction(0)) + c
            if s == 0:
                terms.pop(k, None)
            else:
                terms[k] = s
        return Series(self.chart, terms, self.nres, self.nform)

    __radd__ = __add__

    def __neg__(self):
        return Series(self.chart, {k: -c for k, c in self.terms.items()},
                      self.nres, self.nform)

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.chart.const(other, self.nres, self.nform)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        c = frac(c)
        if c == 0:
            return Series(self.chart, {}, self.nres, self.nform)
        return Series(self.chart, {k: c * v for k, v in self.terms.items()},
                      self.nres, self.nform)

    def __mul__(self, other):
        if isinstance(other, (int, str, Fraction)):
            return self.scale(other)
        self._compat(other)
        chart = self.chart
        nres, nform = self.nres, self.nform
        parity = chart._parity
        # degrees are computed once per key, not once per term pair
        right = [(k2, c2, chart.mono_resdeg(k2), chart.mono_formdeg(k2))
                 for k2, c2 in other.terms.items()]
        out = {}
        for k1, c1 in self.terms.items():
            res_room = nres - chart.mono_resdeg(k1)
            form_room = nform - chart.mono_formdeg(k1)
            odd1 = 0
            for p, e in k1:
                if parity[p]:
                    odd1 += 1
            for k2, c2, r2, f2 in right:
                if r2 > res_room or f2 > form_room:
                    continue
                key, sign = _merge_keys(parity, k1, k2, odd1)
                if key is None:
                    continue
                c = c1 * c2 if sign > 0 else -(c1 * c2)
                s = out.get(key)
                if s is None:
                    out[key] = c
                else:
                    s = s + c
                    if s == 0:
                        del out[key]
                    else:
                        out[key] = s
        return Series(chart, out, nres, nform)

    def __rmul__(self, other):
        if isinstance(other, (int, str, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, k):
        if k < 0:
            raise ValueError("negative power")
        result = self.chart.one(self.nres, self.nform)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    def partial(self, name):
        """Left derivative with respect to a generator.

        d_g(f1 f2 ... fn) picks up (-1)^(|g| * parity of the factors to
        the left of the one hit).
        """
        chart = self.chart
        parity = chart._parity
        g = chart.gen_named(name)
        gp = parity[g.pos]
        gpos = g.pos
        out = {}
        for key, c in self.terms.items():
            prefix_parity = 0
            for idx, (p, e) in enumerate(key):
                if p == gpos:
                    sign = -1 if (gp and prefix_parity & 1) else 1
                    coeff = c * e * sign
                    if e == 1:
                        new_key = key[:idx] + key[idx + 1:]
                    else:
                        new_key = key[:idx] + ((p, e - 1),) + key[idx + 1:]
                    s = out.get(new_key, Fraction(0)) + coeff
                    if s == 0:
                        out.pop(new_key, None)
                    else:
                        out[new_key] = s
                    break
                if p > gpos:
                    break
                prefix_parity ^= (parity[p] * e) & 1
        return Series(chart, out, self.nres, self.nform)

    def grade_project(self, which, k):
        sel = self._selector(which)
        terms = {key: c for key, c in self.terms.items() if sel(key) == k}
        return Series(self.chart, terms, self.nres, self.nform)

    def components(self, which):
        """Nonzero homogeneous components keyed by the chosen grading."""
        sel = self._selector(which)
        buckets = {}
        for key, c in self.terms.items():
            buckets.setdefault(sel(key), {})[key] = c
        return {k: Series(self.chart, t, self.nres, self.nform)
                for k, t in sorted(buckets.items())}

    def _selector(self, which):
        chart = self.chart
        if which == "resdeg":
            return chart.mono_resdeg
        if which == "formdeg":
            return chart.mono_formdeg
        if which == "deg_ht":
            return chart.mono_deg_ht
        if which == "zdeg":
            return chart.mono_zdeg
        raise ValueError("unknown grading %r" % (which,))

    def is_homogeneous_of(self, zdeg):
        return all(self.chart.mono_zdeg(k) == zdeg for k in self.terms)

    def zdeg_or_none(self):
        """Z-degree if homogeneous and nonzero, else None."""
        degs = {self.chart.mono_zdeg(k) for k in self.terms}
        if len(degs) == 1:
            return degs.pop()
        return None

    def max_resdeg(self):
        return max((self.chart.mono_resdeg(k) for k in self.terms), default=0)

    def zero_section(self):
        """Image under the zero section: drop every dz and eps term."""
        chart = self.chart
        terms = {k: c for k, c in self.terms.items()
                 if chart.mono_resdeg(k) == 0 and chart.mono_formdeg(k) == 0}
        return Series(chart, terms, self.nres, self.nform)

    def constant_value(self):
        """The rational value if the series is a constant, else None."""
        if not self.terms:
            return Fraction(0)
        if len(self.terms) == 1 and () in self.terms:
            return self.terms[()]
        return None

    def with_truncation(self, nres=None, nform=None):
        nres = self.nres if nres is None else int(nres)
        nform = self.nform if nform is None else int(nform)
        if nres == self.nres and nform == self.nform:
            return self
        chart = self.chart
        terms = {k: c for k, c in self.terms.items()
                 if chart.mono_resdeg(k) <= nres and chart.mono_formdeg(k) <= nform}
        return Series(chart, terms, nres, nform)

    def _dense(self, key):
        vec = [0] * len(self.chart.gens)
        for p, e in key:
            vec[p] = e
        return tuple(vec)

    def sorted_keys(self):
        return sorted(self.terms, key=self._dense)

    def to_str(self):
        if not self.terms:
            return "0"
        parts = []
        for key in self.sorted_keys():
            c = self.terms[key]
            factors = ["%s^%d" % (self.chart.gens[p].name, e) if e > 1
                       else self.chart.gens[p].name for p, e in key]
            if not factors:
                parts.append(str(c))
            elif c == 1:
                parts.append(" * ".join(factors))
            elif c == -1:
                parts.append("-" + " * ".join(factors))
            else:
                parts.append(" * ".join([str(c)] + factors))
        out = parts[0]
        for p in parts[1:]:
            if p.startswith("-"):
                out += " - " + p[1:]
            else:
                out += " + " + p
        return out

    def __repr__(self):
        return "<Series %s>" % self.to_str()


def ring_morphism(images, f, target=None, validate=True):
    """Apply the degree-preserving ring morphism given by generator images.

    images maps source generator names to Series over the target chart.
    Generators absent from images are kept fixed, which requires the
    target chart to be the source chart.  Each image must be homogeneous
    of its generator's degree; the image of an odd generator must square
    to zero (automatic for homogeneous images, checked anyway).
    """
    chart = f.chart
    if target is None:
        for im in images.values():
            target = im.chart
            break
        else:
            target = chart
    nres, nform = f.nres, f.nform
    img = {}
    for name, im in images.items():
        g = chart.gen_named(name)
        if im.chart is not target:
            raise ChartError("image of %r lives on the wrong chart" % name)
        if validate:
            if not im.is_homogeneous_of(g.zdeg):
                raise DegreeError("image of %r is not homogeneous of degree %d"
                                  % (name, g.zdeg))
            if g.parity and not (im * im).is_zero():
                raise DegreeError("image of odd generator %r has nonzero square"
                                  % name)
        img[g.pos] = im.with_truncation(nres, nform)
    identity_ok = target is chart
    out = target.zero(nres, nform)
    pow_cache = {}
    for key, c in f.terms.items():
        term = target.const(c, nres, nform)
        for p, e in key:
            if p in img:
                factor = pow_cache.get((p, e))
                if factor is None:
                    factor = img[p] ** e
                    pow_cache[(p, e)] = factor
            elif identity_ok:
                factor = pow_cache.get((p, e))
                if factor is None:
                    factor = target.gen(target.gens[p].name, nres, nform) ** e
                    pow_cache[(p, e)] = factor
            else:
                raise ChartError("no image for generator %r in cross-chart morphism"
                                 % chart.gens[p].name)
            term = term * factor
            if term.is_zero():
                break
        out = out + term
    return out


# ---------------------------------------------------------------------------
# text form: sum of terms  coeff * gen^k * gen ...,  rationals as p/q


def _tokenize(text):
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in "+-*/^":
            tokens.append((ch, i))
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(("int", text[i:j], i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("name", text[i:j], i))
            i = j
            continue
        raise ParseError("unexpected character %r at column %d" % (ch, i))
    return tokens


def _parse_series(chart, text, nres, nform):
    tokens = _tokenize(text)
    if not tokens:
        raise ParseError("empty series text")
    terms = {}
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else None

    def take():
        nonlocal pos
        t = tokens[pos]
        pos += 1
        return t

    def parse_int():
        t = take()
        if t[0] != "int":
            raise ParseError("expected integer at column %d" % t[-1])
        return int(t[1])

    def parse_factor():
        # returns (coefficient or None, (pos, exp) or None)
        t = peek()
        if t is None:
            raise ParseError("unexpected end of input")
        if t[0] == "int":
            take()
            num = int(t[1])
            if peek() and peek()[0] == "/":
                take()
                den = parse_int()
                if den == 0:
                    raise ParseError("zero denominator at column %d" % t[-1])
                return Fraction(num, den), None
            return Fraction(num), None
        if t[0] == "name":
            take()
            if not chart.has_gen(t[1]):
                raise ParseError("unknown generator %r at column %d" % (t[1], t[-1]))
            g = chart.gen_named(t[1])
            exp = 1
            if peek() and peek()[0] == "^":
                take()
                exp = parse_int()
                if exp <= 0:
                    raise ParseError("nonpositive exponent on %r" % g.name)
            return None, (g.pos, exp)
        raise ParseError("expected a factor at column %d" % t[-1])

    def parse_term(sign):
        coeff = Fraction(sign)
        factors = []
        while True:
            c, f = parse_factor()
            if c is not None:
                coeff *= c
            else:
                factors.append(f)
            t = peek()
            if t and t[0] == "*":
                take()
                continue
            break
        # sort the written factors into generator order; each crossing of
        # two odd generators flips the sign
        seq = []
        for p, e in factors:
            seq.extend([p] * e)
        n = len(seq)
        for i in range(n):
            for j in range(n - 1 - i):
                if seq[j] > seq[j + 1]:
                    if chart.gens[seq[j]].parity and chart.gens[seq[j + 1]].parity:
                        coeff = -coeff
                    seq[j], seq[j + 1] = seq[j + 1], seq[j]
        merged = {}
        for p in seq:
            merged[p] = merged.get(p, 0) + 1
        key = tuple(sorted(merged.items()))
        for p, e in key:
            g = chart.gens[p]
            if g.parity and e > 1:
                raise ParseError("odd generator %r squared" % g.name)
        return key, coeff

    sign = 1
    t = peek()
    if t and t[0] in "+-":
        take()
        sign = -1 if t[0] == "-" else 1
    while True:
        key, coeff = parse_term(sign)
        if chart.mono_resdeg(key) <= nres and chart.mono_formdeg(key) <= nform:
            s = terms.get(key, Fraction(0)) + coeff
            if s == 0:
                terms.pop(key, None)
            else:
                terms[key] = s
        t = peek()
        if t is None:
            break
        if t[0] not in "+-":
            raise ParseError("expected + or - at column %d" % t[-1])
        take()
        sign = -1 if t[0] == "-" else 1
    return Series(chart, terms, nres, nform)
