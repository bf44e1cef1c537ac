"""Formal exponential maps and the flat connections they induce.

A formal exponential map on a chart is stored through its pullbacks
z^a -> z^a + e_1^a + e_2^a + ..., where e_l^a is the piece of resolution
degree l.  The induced differential D = d + C is a degree-1 derivation
with D(z^a) = dz^a, D(dz^a) = 0 and fiber images of form degree 1; it is
determined by, and determines, the pullbacks through an order-by-order
recursion.  Both directions are implemented here together with flatness
checking, normalization to the canonical gauge, and transfer along a
base diffeomorphism.
"""

from __future__ import annotations

from fractions import Fraction

from .ring import BASE, FORM, ring_morphism
from .vecfield import Derivation, de_rham
from ._linalg import UnimodularityError, unimodular_inverse
from .report import Report


class ConsistencyError(RuntimeError):
    pass


def _ensure(cond, msg):
    if not cond:
        raise ConsistencyError(msg)


class FormalExpMap:
    """Pullback data of a formal exponential map on one chart.

    pullbacks maps each base generator name to a Series over the same
    chart with no form generators.  The resolution-degree-0 part of the
    image of z^a must be z^a itself; use validate_fexp for the full set
    of structural checks.
    """

    __slots__ = ("chart", "pullbacks", "nres", "nform", "_e1", "_e1_inv", "_e1_det")

    def __init__(self, chart, pullbacks, nres=None, nform=None):
        self.chart = chart
        self.nres = chart._tr(nres)
        self.nform = chart._tf(nform)
        imgs = {}
        for g in chart.base_gens:
            if g.name not in pullbacks:
                raise ConsistencyError("missing pullback for %s" % g.name)
            s = pullbacks[g.name]
            if s.chart is not chart:
                raise ConsistencyError("pullback of %s lives on a different chart" % g.name)
            imgs[g.name] = s.with_truncation(self.nres, self.nform)
        extra = set(pullbacks) - set(imgs)
        if extra:
            raise ConsistencyError("pullbacks given for non-base names: %s" % sorted(extra))
        self.pullbacks = imgs
        self._e1 = None
        self._e1_inv = None
        self._e1_det = None

    def base_names(self):
        return [g.name for g in self.chart.base_gens]

    def fiber_names(self):
        return [g.name for g in self.chart.fiber_gens]

    def res_component(self, base_name, level):
        return self.pullbacks[base_name].grade_project("resdeg", level)

    def e1_matrix(self):
        """Matrix of the resolution-degree-1 part: e_1^a = sum_b eps^b E[b][a]."""
        if self._e1 is None:
            rows = self.fiber_names()
            cols = self.base_names()
            self._e1 = [[self.res_component(a, 1).partial(b) for a in cols] for b in rows]
        return self._e1

    def e1_inverse(self):
        if self._e1_inv is None:
            self._e1_inv, self._e1_det = unimodular_inverse(self.e1_matrix())
        return self._e1_inv

    def e1_det(self):
        self.e1_inverse()
        return self._e1_det

    @property
    def proper(self):
        mat = self.e1_matrix()
        n = len(mat)
        ch = self.chart
        for i in range(n):
            for j in range(n):
                want = ch.one(self.nres, self.nform) if i == j else ch.zero(self.nres, self.nform)
                if mat[i][j] != want:
                    return False
        return True

    def apply(self, f):
        """Pull back a function of the base and fiber variables along the map."""
        return ring_morphism(self.pullbacks, f.with_truncation(self.nres, self.nform))

    def __eq__(self, other):
        if not isinstance(other, FormalExpMap):
            return NotImplemented
        return self.chart is other.chart and self.pullbacks == other.pullbacks

    def __repr__(self):
        names = ", ".join("%s -> %s" % (k, v.to_str()) for k, v in sorted(self.pullbacks.items()))
        return "FormalExpMap(%s)" % names


class GrothendieckConnection:
    """Degree-1 derivation D with D(z^a) = dz^a, D(dz^a) = 0.

    Fiber images must carry form degree exactly 1 in every monomial and
    the resolution-weight -1 piece must have an invertible coefficient
    matrix over the base polynomials.
    """

    __slots__ = ("chart", "d", "nres", "nform", "_chat", "_chat_inv", "_pieces")

    def __init__(self, derivation, check=True):
        _ensure(isinstance(derivation, Derivation), "expected a Derivation")
        _ensure(derivation.zdeg == 1, "connection derivation must have degree 1")
        self.chart = derivation.chart
        self.d = derivation
        self.nres = derivation.nres
        self.nform = derivation.nform
        self._chat = None
        self._chat_inv = None
        self._pieces = None
        if check:
            self._check_shape()

    @classmethod
    def from_fiber_images(cls, chart, eps_images, nres=None, nform=None, check=True):
        nres = chart._tr(nres)
        nform = chart._tf(nform)
        images = {}
        for g in chart.base_gens:
            images[g.name] = chart.gen(chart.form_of(g).name, nres, nform)
        for g in chart.fiber_gens:
            img = eps_images.get(g.name)
            images[g.name] = img if img is not None else chart.zero(nres, nform)
        d = Derivation(chart, 1, images, nres=nres, nform=nform)
        return cls(d, check=check)

    def _check_shape(self):
        ch = self.chart
        for g in ch.gens:
            img = self.d.image(g.name)
            if g.klass == BASE:
                _ensure(img == ch.gen(ch.form_of(g).name, self.nres, self.nform),
                        "image of %s must be %s" % (g.name, ch.form_of(g).name))
            elif g.klass == FORM:
                _ensure(img.is_zero(), "image of %s must vanish" % g.name)
            else:
                for key in img.terms:
                    _ensure(ch.mono_formdeg(key) == 1,
                            "image of %s has a term of form degree != 1" % g.name)
        self.chat_inverse()

    def fiber_names(self):
        return [g.name for g in self.chart.fiber_gens]

    def base_names(self):
        return [g.name for g in self.chart.base_gens]

    def weight_pieces(self):
        """Pure fiber pieces C_n keyed by resolution weight n >= -1.

        The de Rham part (z^a -> dz^a) is kept out; each piece only has
        fiber images.  C_n raises the resolution degree of a fiber
        generator by n.
        """
        if self._pieces is None:
            buckets = {}
            for name in self.fiber_names():
                for w, comp in self.d.image(name).components("resdeg").items():
                    buckets.setdefault(w - 1, {})[name] = comp
            out = {}
            for n, imgs in buckets.items():
                out[n] = Derivation(self.chart, 1, imgs, nres=self.nres,
                                    nform=self.nform, validate=False)
            self._pieces = out
        return self._pieces

    def weight_piece(self, n):
        pieces = self.weight_pieces()
        if n in pieces:
            return pieces[n]
        return Derivation(self.chart, 1, {}, nres=self.nres, nform=self.nform,
                          validate=False)

    def delta(self):
        """The resolution-weight -1 piece as a derivation."""
        return self.weight_piece(-1)

    def chat_matrix(self):
        """Chat[c][b] with delta(eps^b) = sum_c dz^c Chat[c][b]."""
        if self._chat is None:
            delta = self.delta()
            forms = [self.chart.form_of(a).name for a in self.base_names()]
            self._chat = [[delta.image(b).partial(c) for b in self.fiber_names()]
                          for c in forms]
        return self._chat

    def chat_inverse(self):
        if self._chat_inv is None:
            try:
                self._chat_inv, _ = unimodular_inverse(self.chat_matrix())
            except UnimodularityError as exc:
                raise ConsistencyError(
                    "weight -1 coefficient matrix is not invertible: %s" % exc) from exc
        return self._chat_inv

    def __eq__(self, other):
        if not isinstance(other, GrothendieckConnection):
            return NotImplemented
        return self.chart is other.chart and self.d == other.d

    def __repr__(self):
        names = ", ".join("%s -> %s" % (n, self.d.image(n).to_str())
                          for n in self.fiber_names())
        return "GrothendieckConnection(%s)" % names


def validate_fexp(fexp):
    """Structural checks for a formal exponential map.

    Returns a Report whose checks cover: images free of form generators,
    degree homogeneity, zero-section property (resolution-degree-0 part
    of the image of z^a equals z^a), and invertibility of the linear
    fiber coefficient matrix.  The report carries a `proper` attribute
    telling whether that matrix is the identity.
    """
    ch = fexp.chart
    rep = Report("formal exponential map checks")
    for a in fexp.base_names():
        img = fexp.pullbacks[a]
        bad_form = any(ch.mono_formdeg(k) > 0 for k in img.terms)
        rep.add("no-form-generators[%s]" % a, not bad_form,
                "" if not bad_form else "image contains form generators")
        g = ch.gen_named(a)
        homog = img.is_homogeneous_of(g.zdeg)
        rep.add("degree[%s]" % a, homog,
                "" if homog else "image not homogeneous of degree %d" % g.zdeg)
        zs = img.grade_project("resdeg", 0)
        ok0 = zs == ch.gen(a, fexp.nres, fexp.nform)
        rep.add("zero-section[%s]" % a, ok0,
                "" if ok0 else "resolution-degree-0 part is %s" % zs.to_str())
    rep.proper = False
    try:
        fexp.e1_inverse()
        rep.add("fiber-linear-part", True, "determinant %s" % fexp.e1_det())
        rep.proper = fexp.proper
        rep.add("proper", True, "yes" if rep.proper else "no (still unimodular)")
    except UnimodularityError as exc:
        rep.add("fiber-linear-part", False, str(exc))
    return rep


def _require_valid(fexp):
    rep = validate_fexp(fexp)
    if not rep.ok:
        lines = "; ".join(c.render() for c in rep.failures())
        raise ConsistencyError("invalid formal exponential map: %s" % lines)
    return rep


def grothendieck_from_fexp(fexp):
    """Build the induced flat connection from the pullbacks.

    Solves, order by order in resolution degree, the requirement that
    the total differential annihilates every pullback.  Level 0 pins
    the weight -1 piece against the linear fiber coefficients; level l
    pins the weight l-1 piece from the lower ones.  The defining
    identity D(pullback) = 0 is asserted at the end.
    """
    _require_valid(fexp)
    ch = fexp.chart
    nres, nform = fexp.nres, fexp.nform
    bases = fexp.base_names()
    fibers = fexp.fiber_names()
    inv_e1 = fexp.e1_inverse()
    d = de_rham(ch, nres, nform)

    e = {a: {m: fexp.res_component(a, m) for m in range(1, nres + 2)} for a in bases}

    def solve_level(rhs_by_base):
        # sum_b v^b E1[b][a] = -rhs^a  =>  v^c = sum_a (-rhs^a) inv[a][c]
        out = {}
        for c_i, c in enumerate(fibers):
            acc = ch.zero(nres, nform)
            for a_i, a in enumerate(bases):
                acc = acc + rhs_by_base[a].scale(-1) * inv_e1[a_i][c_i]
            out[c] = acc
        return out

    pieces = {}
    rhs0 = {a: ch.gen(ch.form_of(a).name, nres, nform) for a in bases}
    imgs = solve_level(rhs0)
    pieces[-1] = Derivation(ch, 1, imgs, nres=nres, nform=nform, validate=False)
    eps_images = dict(imgs)

    for level in range(1, nres + 1):
        rhs = {}
        for a in bases:
            r = d.apply(e[a][level]) + pieces[-1].apply(e[a][level + 1])
            for m in range(2, level + 1):
                r = r + pieces[level - m].apply(e[a][m])
            rhs[a] = r
        imgs = solve_level(rhs)
        pieces[level - 1] = Derivation(ch, 1, imgs, nres=nres, nform=nform, validate=False)
        for c in fibers:
            eps_images[c] = eps_images[c] + imgs[c]

    conn = GrothendieckConnection.from_fiber_images(ch, eps_images, nres=nres, nform=nform)
    for a in bases:
        resid = conn.d.apply(fexp.pullbacks[a])
        _ensure(resid.is_zero(),
                "connection does not annihilate the pullback of %s: %s" % (a, resid.to_str()))
    return conn


def fexp_from_grothendieck(conn):
    """Rebuild the pullbacks from a flat connection.

    The linear fiber part inverts the weight -1 coefficients; each
    higher piece is produced by stripping the form generator off the
    known part of the order-l identity, applying the inverse weight -1
    matrix, and reconstructing through the Euler scaling 1/(l+1).  The
    order-l identity itself is asserted after each step, which is
    exactly where non-integrable input fails.
    """
    ch = conn.chart
    nres, nform = conn.nres, conn.nform
    bases = conn.base_names()
    fibers = conn.fiber_names()
    delta = conn.delta()
    inv_chat = conn.chat_inverse()
    d = de_rham(ch, nres, nform)
    forms = [ch.form_of(a).name for a in bases]

    e = {a: {} for a in bases}
    for a_i, a in enumerate(bases):
        acc = ch.zero(nres, nform)
        for b_i, b in enumerate(fibers):
            acc = acc + ch.gen(b, nres, nform) * inv_chat[b_i][a_i].scale(-1)
        e[a][1] = acc

    for level in range(1, nres):
        for a in bases:
            r = d.apply(e[a][level])
            for m in range(1, level + 1):
                r = r + conn.weight_piece(level - m).apply(e[a][m])
            # strip the form generator: -r = sum_c dz^c S[c]
            strip = [r.partial(c).scale(-1) for c in forms]
            nxt = ch.zero(nres, nform)
            for b_i, b in enumerate(fibers):
                xb = ch.zero(nres, nform)
                for c_i in range(len(bases)):
                    xb = xb + inv_chat[b_i][c_i] * strip[c_i]
                nxt = nxt + ch.gen(b, nres, nform) * xb
            nxt = nxt.scale(Fraction(1, level + 1))
            defect = delta.apply(nxt) + r
            _ensure(defect.is_zero(),
                    "connection is not integrable at order %d for %s (defect %s)"
                    % (level, a, defect.to_str()))
            e[a][level + 1] = nxt

    pullbacks = {}
    for a in bases:
        acc = ch.gen(a, nres, nform)
        for m in range(1, nres + 1):
            acc = acc + e[a][m]
        pullbacks[a] = acc
    fexp = FormalExpMap(ch, pullbacks, nres=nres, nform=nform)
    _require_valid(fexp)
    for a in bases:
        resid = conn.d.apply(fexp.pullbacks[a])
        for lev in range(0, nres):
            comp = resid.grade_project("resdeg", lev)
            _ensure(comp.is_zero(),
                    "rebuilt pullback of %s fails the defining identity at order %d"
                    % (a, lev))
    return fexp


def check_flatness(conn):
    """Evaluate D(D(eps^a)) and report the residual by resolution degree.

    Residual components of resolution degree up to the truncation order
    minus one are fully determined by the stored weights; those are the
    ones reported.  Returns a Report with an `is_flat` attribute and a
    `residuals` dict {fiber name: {resdeg: Series}} of nonzero pieces.
    """
    rep = Report("flatness (residual components up to resolution degree %d)"
                 % (conn.nres - 1))
    residuals = {}
    for name in conn.fiber_names():
        sq = conn.d.apply(conn.d.image(name))
        bad = {}
        for lev in range(0, conn.nres):
            comp = sq.grade_project("resdeg", lev)
            if not comp.is_zero():
                bad[lev] = comp
        if bad:
            residuals[name] = bad
        detail = "" if not bad else "; ".join(
            "degree %d: %s" % (lev, s.to_str()) for lev, s in sorted(bad.items()))
        rep.add("square-zero[%s]" % name, not bad, detail)
    rep.is_flat = not residuals
    rep.residuals = residuals
    return rep


def canonicalize(fexp):
    """Fiber substitution taking the map to the canonical gauge.

    Returns (images, canonical_fexp) where images maps every generator
    name to its substitution image (base and form generators map to
    themselves).  Composing the pullbacks with the substitution yields
    z^a + eps^a exactly, which is asserted.  Non-proper maps are first
    straightened by the inverse of their linear fiber coefficient
    matrix.
    """
    _require_valid(fexp)
    ch = fexp.chart
    nres, nform = fexp.nres, fexp.nform
    bases = fexp.base_names()
    fibers = fexp.fiber_names()

    images = {g.name: ch.gen(g.name, nres, nform) for g in ch.gens}
    if not fexp.proper:
        inv_e1 = fexp.e1_inverse()
        for b_i, b in enumerate(fibers):
            acc = ch.zero(nres, nform)
            for c_i, c in enumerate(fibers):
                acc = acc + ch.gen(c, nres, nform) * inv_e1[c_i][b_i]
            images[b] = acc

    def current(a):
        return ring_morphism(images, fexp.pullbacks[a])

    for level in range(2, nres + 1):
        for a_i, a in enumerate(bases):
            resid = current(a) - ch.gen(a, nres, nform) - ch.gen(fibers[a_i], nres, nform)
            for low in range(0, level):
                _ensure(resid.grade_project("resdeg", low).is_zero(),
                        "normalization residual for %s survives at degree %d" % (a, low))
            corr = resid.grade_project("resdeg", level)
            if corr.is_zero():
                continue
            images[fibers[a_i]] = images[fibers[a_i]] - corr

    canon = {}
    for a_i, a in enumerate(bases):
        want = ch.gen(a, nres, nform) + ch.gen(fibers[a_i], nres, nform)
        _ensure(current(a) == want, "normalization failed for %s" % a)
        canon[a] = want
    return images, FormalExpMap(ch, canon, nres=nres, nform=nform)


class Diffeo:
    """Invertible polynomial base change between two charts.

    images maps each base name of `source` to a Series over `target`
    (base generators only); inverse_images goes the other way.  Both
    composites are asserted to be the identity on base generators.
    """

    __slots__ = ("source", "target", "images", "inverse_images")

    def __init__(self, source, target, images, inverse_images):
        self.source = source
        self.target = target
        self.images = {}
        self.inverse_images = {}
        src_bases = [g.name for g in source.base_gens]
        tgt_bases = [g.name for g in target.base_gens]
        if sorted(images) != sorted(src_bases):
            raise ConsistencyError("images must cover exactly the source base generators")
        if sorted(inverse_images) != sorted(tgt_bases):
            raise ConsistencyError("inverse images must cover exactly the target base generators")
        for a in src_bases:
            s = images[a]
            _ensure(s.chart is target, "image of %s must live on the target chart" % a)
            _ensure(all(target.mono_resdeg(k) == 0 and target.mono_formdeg(k) == 0
                        for k in s.terms), "image of %s must only use base generators" % a)
            _ensure(s.is_homogeneous_of(source.gen_named(a).zdeg),
                    "image of %s must be homogeneous of its degree" % a)
            self.images[a] = s
        for a in tgt_bases:
            s = inverse_images[a]
            _ensure(s.chart is source, "inverse image of %s must live on the source chart" % a)
            _ensure(all(source.mono_resdeg(k) == 0 and source.mono_formdeg(k) == 0
                        for k in s.terms), "inverse image of %s must only use base generators" % a)
            _ensure(s.is_homogeneous_of(target.gen_named(a).zdeg),
                    "inverse image of %s must be homogeneous of its degree" % a)
            self.inverse_images[a] = s
        for a in tgt_bases:
            back = ring_morphism(self.images, self.inverse_images[a], target=target)
            _ensure(back == target.gen(a), "composite is not the identity on %s" % a)
        for a in src_bases:
            back = ring_morphism(self.inverse_images, self.images[a], target=source)
            _ensure(back == source.gen(a), "composite is not the identity on %s" % a)

    def tangent_lift_images(self):
        """Pullback images of the lifted substitution, source gens -> target Series.

        Base: z^a -> the image polynomial.  Form: dz^a -> dz^b d_b(image).
        Fiber: eps^a -> eps^b d_b(image).
        """
        return _lift_images(self.source, self.target, self.images)

    def inverse_tangent_lift_images(self):
        return _lift_images(self.target, self.source, self.inverse_images)


def _lift_images(src, tgt, base_images):
    out = {}
    tgt_bases = [g.name for g in tgt.base_gens]
    for g in src.base_gens:
        img = base_images[g.name]
        out[g.name] = img
        eps_img = tgt.zero()
        form_img = tgt.zero()
        for b in tgt_bases:
            jac = img.partial(b)
            eps_img = eps_img + tgt.gen(tgt.fiber_of(b).name) * jac
            form_img = form_img + tgt.gen(tgt.form_of(b).name) * jac
        out[src.fiber_of(g).name] = eps_img
        out[src.form_of(g).name] = form_img
    return out


def transfer_diffeo(diffeo, fexp=None, conn=None):
    """Transport a formal exponential map and/or its connection along a diffeo.

    The pullbacks transform by conjugation with the lifted substitution;
    the connection transforms by conjugation with the full tangent lift.
    Returns (new_fexp, new_conn) with None in slots not supplied.
    """
    src, tgt = diffeo.source, diffeo.target
    lift = diffeo.tangent_lift_images()
    lift_inv = diffeo.inverse_tangent_lift_images()

    new_fexp = None
    if fexp is not None:
        _ensure(fexp.chart is src, "map lives on the wrong chart for this diffeo")
        nres, nform = fexp.nres, fexp.nform
        pulled = {}
        for g in tgt.base_gens:
            step = ring_morphism(fexp.pullbacks,
                                 diffeo.inverse_images[g.name].with_truncation(nres, nform))
            pulled[g.name] = ring_morphism(lift, step, target=tgt)
        new_fexp = FormalExpMap(tgt, pulled, nres=nres, nform=nform)
        _require_valid(new_fexp)

    new_conn = None
    if conn is not None:
        _ensure(conn.chart is src, "connection lives on the wrong chart for this diffeo")
        nres, nform = conn.nres, conn.nform
        images = {}
        for g in tgt.gens:
            pre = ring_morphism(lift_inv, tgt.gen(g.name, nres, nform), target=src)
            mid = conn.d.apply(pre)
            images[g.name] = ring_morphism(lift, mid, target=tgt)
        dbar = Derivation(tgt, 1, images, nres=nres, nform=nform)
        new_conn = GrothendieckConnection(dbar)

    return new_fexp, new_conn


def fexp_from_polynomial_exp(chart, jet_images, jet_chart=None, var_names=None):
    """Adopt an externally computed exponential jet as a formal map.

    jet_images maps base names to polynomials in the base and velocity
    variables; velocities are renamed to the fiber generators of
    `chart`.  When the jet lives on a separate chart, `jet_chart` names
    it and var_names maps its generator names onto those of `chart`
    (defaulting to position-wise matching).  The result is validated
    before being returned.
    """
    nres, nform = chart._tr(None), chart._tf(None)
    if jet_chart is None or jet_chart is chart:
        pullbacks = {a: s.with_truncation(nres, nform) for a, s in jet_images.items()}
    else:
        if var_names is None:
            src_bases = [g.name for g in jet_chart.base_gens]
            tgt_bases = [g.name for g in chart.base_gens]
            if len(src_bases) != len(tgt_bases):
                raise ConsistencyError("charts have different numbers of base generators")
            var_names = {}
            for s, t in zip(src_bases, tgt_bases):
                var_names[s] = t
                var_names[jet_chart.fiber_of(s).name] = chart.fiber_of(t).name
                var_names[jet_chart.form_of(s).name] = chart.form_of(t).name
        images = {s: chart.gen(t, nres, nform) for s, t in var_names.items()}
        pullbacks = {}
        for a, s in jet_images.items():
            pullbacks[var_names[a]] = ring_morphism(images, s.with_truncation(nres, nform),
                                                    target=chart)
    fexp = FormalExpMap(chart, pullbacks, nres=nres, nform=nform)
    _require_valid(fexp)
    return fexp
