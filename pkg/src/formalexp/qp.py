"""Differential-graded symplectic charts and their linearization.

A QP structure is a degree-1 vector field Q with Q^2 = 0 together with
a constant graded-antisymmetric pairing omega of total degree P on the
base generators, invariant under Q.  Substituting z -> point + eps
turns Q into a codifferential on the fiber generators; its components
by fiber degree are the n-ary bracket coefficients, with a nonzero
0-ary part flagging a curved expansion point.  Cyclicity of the
brackets against omega is checked independently on a chart whose base
generators are the fiber directions themselves.
"""

from __future__ import annotations

from fractions import Fraction

from .ring import ChartError, GradedChart, Series, frac, ring_morphism
from .vecfield import Derivation, de_rham
from .fexp import ConsistencyError, _ensure
from ._linalg import unimodular_inverse, UnimodularityError
from .report import Report


class QPStructure:
    """Vector field images and pairing coefficients on one chart.

    q_images maps base names to base-only Series of degree one higher;
    omega maps name pairs to rationals, nonzero only when the degrees
    add up to `degree`.  Use validate_qp for the full battery.
    """

    __slots__ = ("chart", "degree", "q_images", "omega", "nres", "nform")

    def __init__(self, chart, degree, q_images, omega, nres=None, nform=None):
        self.chart = chart
        self.degree = int(degree)
        self.nres = chart._tr(nres)
        self.nform = chart._tf(nform)
        base = {g.name for g in chart.base_gens}
        imgs = {}
        for name, s in q_images.items():
            if name not in base:
                raise ChartError("image given for non-base name %r" % name)
            if s.chart is not chart:
                raise ChartError("image of %r lives on another chart" % name)
            if not s.is_zero():
                imgs[name] = s.with_truncation(self.nres, self.nform)
        self.q_images = imgs
        om = {}
        for (a, b), c in omega.items():
            if a not in base or b not in base:
                raise ChartError("pairing entry (%r, %r) must use base names" % (a, b))
            c = frac(c)
            if c != 0:
                om[(a, b)] = c
        self.omega = om

    def pairing(self, a, b):
        return self.omega.get((a, b), Fraction(0))

    def q_derivation(self):
        return Derivation(self.chart, 1, dict(self.q_images), self.nres, self.nform)

    def q_tangent_lift(self):
        """Q plus its action d(Q^a) on the form generators."""
        ch = self.chart
        d = de_rham(ch, self.nres, self.nform)
        images = dict(self.q_images)
        for g in ch.base_gens:
            img = self.q_images.get(g.name)
            images[ch.form_of(g).name] = (d.apply(img) if img is not None
                                          else ch.zero(self.nres, self.nform))
        return Derivation(ch, 1, images, self.nres, self.nform)

    def omega_series(self):
        """(1/2) omega_ab dz^a dz^b as a Series."""
        ch = self.chart
        acc = ch.zero(self.nres, self.nform)
        for (a, b), c in self.omega.items():
            term = ch.gen(ch.form_of(a).name, self.nres, self.nform) \
                * ch.gen(ch.form_of(b).name, self.nres, self.nform)
            acc = acc + term.scale(c / 2)
        return acc

    def omega_matrix(self):
        names = [g.name for g in self.chart.base_gens]
        return [[self.chart.const(self.pairing(a, b), self.nres, self.nform)
                 for b in names] for a in names]


def validate_qp(qp):
    """Structural checks: degrees, Q^2 = 0, pairing shape, invariance."""
    ch = qp.chart
    rep = Report("dg symplectic structure of degree %d" % qp.degree)
    for g in ch.base_gens:
        img = qp.q_images.get(g.name)
        if img is None:
            continue
        zonly = all(ch.mono_resdeg(k) == 0 and ch.mono_formdeg(k) == 0
                    for k in img.terms)
        rep.add("base-only[%s]" % g.name, zonly,
                "" if zonly else "image leaves the base generators")
        homog = img.is_homogeneous_of(g.zdeg + 1)
        rep.add("degree[%s]" % g.name, homog,
                "" if homog else "image not homogeneous of degree %d" % (g.zdeg + 1))
    if not rep.ok:
        return rep
    q = qp.q_derivation()
    sq = q.square()
    rep.add("square-zero", sq.is_zero(),
            "" if sq.is_zero() else "; ".join(
                "%s -> %s" % (n, im.to_str()) for n, im in sorted(sq.images.items())))
    deg_ok = all(ch.gen_named(a).zdeg + ch.gen_named(b).zdeg == qp.degree
                 for (a, b) in qp.omega)
    rep.add("pairing-degree", deg_ok,
            "" if deg_ok else "an entry pairs degrees not summing to %d" % qp.degree)
    sym_ok = True
    detail = ""
    names = [g.name for g in ch.base_gens]
    for a in names:
        for b in names:
            sa = (ch.gen_named(a).zdeg + 1) * (ch.gen_named(b).zdeg + 1)
            want = qp.pairing(b, a) * (-1 if sa % 2 else 1)
            if qp.pairing(a, b) != want:
                sym_ok = False
                detail = "entry (%s, %s) breaks graded antisymmetry" % (a, b)
                break
        if not sym_ok:
            break
    rep.add("pairing-antisymmetry", sym_ok, detail)
    try:
        unimodular_inverse(qp.omega_matrix())
        rep.add("pairing-nondegenerate", True)
    except UnimodularityError as exc:
        rep.add("pairing-nondegenerate", False, str(exc))
    if rep.ok:
        lie = qp.q_tangent_lift().apply(qp.omega_series())
        rep.add("pairing-invariance", lie.is_zero(),
                "" if lie.is_zero() else "Lie derivative is %s" % lie.to_str())
    return rep


def _require_valid_qp(qp):
    rep = validate_qp(qp)
    if not rep.ok:
        lines = "; ".join(c.render() for c in rep.failures())
        raise ConsistencyError("invalid dg symplectic structure: %s" % lines)
    return rep


class LInftyPackage:
    """Linearized bracket data at an expansion point.

    q is the codifferential on the fiber generators; brackets[n] maps
    each fiber name to the fiber-degree-n component of its image.  A
    nonzero 0-ary component marks the point as curved.  Parameters (for
    symbolic points) are extra degree-0 base generators that all maps
    treat as constants.
    """

    __slots__ = ("chart", "point", "q", "brackets", "curved", "dynamical", "params")

    def __init__(self, chart, point, q, dynamical, params):
        self.chart = chart
        self.point = point
        self.q = q
        self.dynamical = list(dynamical)
        self.params = list(params)
        self.brackets = {}
        for name in self.dynamical:
            fib = chart.fiber_of(name).name
            for n, comp in q.image(fib).components("resdeg").items():
                self.brackets.setdefault(n, {})[fib] = comp
        self.curved = 0 in self.brackets

    def arities(self):
        return sorted(self.brackets)

    def bracket_component(self, arity, fiber_name):
        comp = self.brackets.get(arity, {}).get(fiber_name)
        if comp is None:
            return self.chart.zero(self.q.nres, self.q.nform)
        return comp


def linearize_at_point(qp, point, params=None, nres=None, nform=None):
    """Expand Q around a base point into bracket data on the fibers.

    point maps base names to rationals (nonzero only at degree 0) or,
    when `params` lists extra degree-0 parameter names, to strings
    parsed in those parameters.  The codifferential property of the
    result is asserted; everything else about the input is validated
    first.
    """
    _require_valid_qp(qp)
    src = qp.chart
    nres = qp.nres if nres is None else int(nres)
    nform = qp.nform if nform is None else int(nform)
    dyn_specs = [(g.name, g.zdeg) for g in src.base_gens]
    if params:
        params = list(params)
        for p in params:
            if src.has_gen(p):
                raise ChartError("parameter %r collides with a chart generator" % p)
        ch = GradedChart([(p, 0) for p in params] + dyn_specs, nres=nres, nform=nform)
        carry = {g.name: ch.gen(g.name, nres, nform) for g in src.base_gens}
        q_images = {a: ring_morphism(carry, s.with_truncation(nres, nform), target=ch)
                    for a, s in qp.q_images.items()}
    else:
        params = []
        ch = src
        q_images = {a: s.with_truncation(nres, nform) for a, s in qp.q_images.items()}

    subst = {p: ch.gen(p, nres, nform) for p in params}
    point_used = {}
    for g in src.base_gens:
        raw = point.get(g.name, 0)
        if isinstance(raw, str):
            val = ch.parse(raw, nres, nform)
            bad = any(ch.mono_resdeg(k) or ch.mono_formdeg(k) or ch.mono_zdeg(k)
                      for k in val.terms)
            _ensure(not bad, "point value for %s must be a degree-0 base expression"
                    % g.name)
            only_params = all(all(ch.gens[p].name in params for p, _ in k)
                              for k in val.terms)
            _ensure(only_params, "point value for %s must only use parameters" % g.name)
        else:
            val = ch.const(frac(raw), nres, nform)
            _ensure(val.is_zero() or g.zdeg == 0,
                    "nonzero point value at %s of degree %d" % (g.name, g.zdeg))
        point_used[g.name] = val
        subst[g.name] = val + ch.gen(ch.fiber_of(g.name).name, nres, nform)

    fib_images = {}
    for g in src.base_gens:
        img = q_images.get(g.name)
        if img is None:
            continue
        fib_images[ch.fiber_of(g.name).name] = ring_morphism(subst, img, target=ch)
    q_x = Derivation(ch, 1, fib_images, nres, nform)
    sq = q_x.square()
    _ensure(sq.is_zero(), "expansion is not a codifferential: %s" % (
        "; ".join("%s -> %s" % (n, im.to_str()) for n, im in sorted(sq.images.items()))))
    return LInftyPackage(ch, point_used, q_x, [g.name for g in src.base_gens], params)


def _poly_degree_project(series, positions, k):
    """Part of a series with total exponent k in the given positions."""
    terms = {}
    for key, c in series.terms.items():
        deg = sum(e for p, e in key if p in positions)
        if deg == k:
            terms[key] = c
    return Series(series.chart, terms, series.nres, series.nform)


def check_cyclic(qp, linf):
    """Closedness of the pairing contracted with the expanded field.

    On a chart whose base generators are the fiber directions (plus the
    frozen parameters), the contraction of omega with the expanded
    vector field must be closed in those directions.  Differentiation
    eats one fiber factor, so the n-ary bracket's cyclicity shows up in
    the component of polynomial degree n - 1; the 0-ary row is closed
    for free since its contraction has constant coefficients.  Returns
    a Report with one row per arity.
    """
    ch = linf.chart
    nres, nform = linf.q.nres, linf.q.nform
    eta_specs = [(ch.fiber_of(a).name, ch.gen_named(a).zdeg) for a in linf.dynamical]
    espace = GradedChart([(p, 0) for p in linf.params] + eta_specs,
                         nres=nres, nform=max(nform, 2))
    rename = {p: espace.gen(p) for p in linf.params}
    for a in linf.dynamical:
        fib = ch.fiber_of(a).name
        rename[fib] = espace.gen(fib)

    q_e_images = {}
    for a in linf.dynamical:
        fib = ch.fiber_of(a).name
        img = linf.q.image(fib)
        q_e_images[fib] = ring_morphism(rename, img, target=espace)

    omega_e = espace.zero()
    for (a, b), c in qp.omega.items():
        fa = espace.form_of(ch.fiber_of(a).name).name
        fb = espace.form_of(ch.fiber_of(b).name).name
        omega_e = omega_e + (espace.gen(fa) * espace.gen(fb)).scale(c / 2)

    iota_images = {}
    for a in linf.dynamical:
        fib = ch.fiber_of(a).name
        iota_images[espace.form_of(fib).name] = q_e_images.get(fib, espace.zero())
    iota = Derivation(espace, 0, iota_images)
    lam = iota.apply(omega_e)

    d_dyn_images = {}
    for a in linf.dynamical:
        fib = ch.fiber_of(a).name
        d_dyn_images[fib] = espace.gen(espace.form_of(fib).name)
    d_dyn = Derivation(espace, 1, d_dyn_images)
    dlam = d_dyn.apply(lam)

    eta_positions = {espace.gen_named(ch.fiber_of(a).name).pos for a in linf.dynamical}
    rep = Report("cyclicity of the linearized brackets")
    max_arity = max([0] + linf.arities())
    leftover = dlam
    for n in range(0, max_arity + 1):
        comp = _poly_degree_project(dlam, eta_positions, n - 1) if n >= 1 \
            else espace.zero()
        rep.add("cyclic[arity %d]" % n, comp.is_zero(),
                "" if comp.is_zero() else "defect %s" % comp.to_str())
        leftover = leftover - comp
    rep.add("no-extra-terms", leftover.is_zero(),
            "" if leftover.is_zero() else "defect %s" % leftover.to_str())
    return rep
