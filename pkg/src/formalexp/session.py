"""Canonical JSON session files.

A session file is a single JSON document holding a chart plus any of
the structures built on it.  Serialization is canonical: keys sorted,
two-space indent, one trailing newline, rationals as "p/q" strings,
monomials as name/exponent pairs in generator order.  Writing the same
mathematical content therefore always produces identical bytes, so
pipelines can be checked with a plain file comparison.

Loading goes through the ordinary constructors, so every structural
check those run (invertibility, composites, degree bookkeeping) also
guards file input.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .ring import GradedChart, frac
from .vecfield import Derivation
from .fexp import Diffeo, FormalExpMap, GrothendieckConnection
from .connection import Connection
from .qp import LInftyPackage, QPStructure

FORMAT = "graded-fexp-session-v1"

_BLOCKS = ("fexp", "connection", "christoffel", "qp", "linf", "diffeo", "series")


class SessionError(RuntimeError):
    pass


def _req(cond, msg):
    if not cond:
        raise SessionError(msg)


def frac_to_str(c):
    c = frac(c)
    if c.denominator == 1:
        return str(c.numerator)
    return "%d/%d" % (c.numerator, c.denominator)


def frac_from_str(s):
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise SessionError("bad rational %r: %s" % (s, exc))


def series_to_json(s):
    """Sorted [[monomial, coefficient], ...] with named monomials."""
    ch = s.chart
    out = []
    for key, c in s.terms.items():
        mono = [[ch.gens[p].name, e] for p, e in key]
        out.append([mono, frac_to_str(c)])
    out.sort()
    return out


def series_from_json(chart, obj, nres=None, nform=None):
    """Rebuild a series by multiplying out each monomial.

    Going through actual products keeps sign and truncation handling in
    one place; terms beyond the truncation orders are simply dropped.
    """
    _req(isinstance(obj, list), "series must be a list of terms")
    acc = chart.zero(nres, nform)
    for item in obj:
        _req(isinstance(item, list) and len(item) == 2,
             "series term must be [monomial, coefficient]")
        mono, cs = item
        term = chart.const(frac_from_str(cs), nres, nform)
        _req(isinstance(mono, list), "monomial must be a list of [name, exp] pairs")
        for pair in mono:
            _req(isinstance(pair, list) and len(pair) == 2,
                 "monomial entry must be [name, exp]")
            name, exp = pair
            _req(isinstance(exp, int) and exp >= 1,
                 "exponent of %r must be a positive integer" % name)
            g = chart.gen(name, nres, nform)
            for _ in range(exp):
                term = term * g
        acc = acc + term
    return acc


def chart_to_json(chart):
    base = []
    for i, g in enumerate(chart.base_gens):
        base.append([g.name, g.zdeg, chart.form_gens[i].name,
                     chart.fiber_gens[i].name])
    point = {name: frac_to_str(val)
             for name, val in chart.base_point.items() if val != 0}
    doc = {"base": base, "nres": chart.nres, "nform": chart.nform}
    if point:
        doc["point"] = point
    return doc


def chart_from_json(obj):
    _req(isinstance(obj, dict), "chart block must be an object")
    extra = set(obj) - {"base", "nres", "nform", "point"}
    _req(not extra, "unknown chart keys: %s" % ", ".join(sorted(extra)))
    _req("base" in obj and "nres" in obj and "nform" in obj,
         "chart block needs base, nres and nform")
    base = []
    for item in obj["base"]:
        _req(isinstance(item, list) and len(item) == 4,
             "chart base entry must be [name, degree, form, fiber]")
        base.append((item[0], int(item[1]), item[2], item[3]))
    point = {name: frac_from_str(val)
             for name, val in obj.get("point", {}).items()}
    return GradedChart(base, point=point, nres=int(obj["nres"]),
                       nform=int(obj["nform"]))


def fexp_to_json(fexp):
    return {"pullbacks": {a: series_to_json(s) for a, s in fexp.pullbacks.items()}}


def fexp_from_json(chart, obj):
    _req(isinstance(obj, dict) and set(obj) == {"pullbacks"},
         "fexp block must hold exactly a pullbacks map")
    pullbacks = {a: series_from_json(chart, sj) for a, sj in obj["pullbacks"].items()}
    return FormalExpMap(chart, pullbacks)


def connection_to_json(conn):
    images = {}
    for g in conn.chart.fiber_gens:
        images[g.name] = series_to_json(conn.d.image(g.name))
    return {"eps_images": images}


def connection_from_json(chart, obj):
    _req(isinstance(obj, dict) and set(obj) == {"eps_images"},
         "connection block must hold exactly an eps_images map")
    images = {a: series_from_json(chart, sj) for a, sj in obj["eps_images"].items()}
    return GrothendieckConnection.from_fiber_images(chart, images)


def christoffel_to_json(conn):
    entries = []
    for (a, b, c), s in conn.symbols.items():
        entries.append([a, b, c, series_to_json(s)])
    entries.sort()
    return {"entries": entries}


def christoffel_from_json(chart, obj):
    _req(isinstance(obj, dict) and set(obj) == {"entries"},
         "christoffel block must hold exactly an entries list")
    symbols = {}
    for item in obj["entries"]:
        _req(isinstance(item, list) and len(item) == 4,
             "christoffel entry must be [upper, lower, lower, series]")
        a, b, c, sj = item
        _req((a, b, c) not in symbols, "duplicate symbol (%s, %s, %s)" % (a, b, c))
        symbols[(a, b, c)] = series_from_json(chart, sj)
    return Connection(chart, symbols)


def qp_to_json(qp):
    omega = [[a, b, frac_to_str(c)] for (a, b), c in qp.omega.items()]
    omega.sort()
    return {"degree": qp.degree,
            "q_images": {a: series_to_json(s) for a, s in qp.q_images.items()},
            "omega": omega}


def qp_from_json(chart, obj):
    _req(isinstance(obj, dict) and set(obj) == {"degree", "q_images", "omega"},
         "qp block must hold degree, q_images and omega")
    q_images = {a: series_from_json(chart, sj) for a, sj in obj["q_images"].items()}
    omega = {}
    for item in obj["omega"]:
        _req(isinstance(item, list) and len(item) == 3,
             "omega entry must be [name, name, coefficient]")
        a, b, cs = item
        _req((a, b) not in omega, "duplicate pairing entry (%s, %s)" % (a, b))
        omega[(a, b)] = frac_from_str(cs)
    return QPStructure(chart, int(obj["degree"]), q_images, omega)


def linf_to_json(linf):
    return {"params": list(linf.params),
            "point": {a: series_to_json(s) for a, s in linf.point.items()},
            "q_images": {fib: series_to_json(linf.q.image(fib))
                         for fib in sorted(linf.q.images)}}


def linf_from_json(chart, obj):
    _req(isinstance(obj, dict) and set(obj) == {"params", "point", "q_images"},
         "linf block must hold params, point and q_images")
    params = list(obj["params"])
    point = {a: series_from_json(chart, sj) for a, sj in obj["point"].items()}
    images = {fib: series_from_json(chart, sj)
              for fib, sj in obj["q_images"].items()}
    q = Derivation(chart, 1, images)
    dynamical = [g.name for g in chart.base_gens if g.name not in params]
    return LInftyPackage(chart, point, q, dynamical, params)


def diffeo_to_json(diffeo):
    return {"target": chart_to_json(diffeo.target),
            "images": {a: series_to_json(s) for a, s in diffeo.images.items()},
            "inverse_images": {a: series_to_json(s)
                               for a, s in diffeo.inverse_images.items()}}


def diffeo_from_json(chart, obj):
    _req(isinstance(obj, dict) and set(obj) == {"target", "images", "inverse_images"},
         "diffeo block must hold target, images and inverse_images")
    target = chart_from_json(obj["target"])
    images = {a: series_from_json(target, sj) for a, sj in obj["images"].items()}
    inverse = {a: series_from_json(chart, sj)
               for a, sj in obj["inverse_images"].items()}
    return Diffeo(chart, target, images, inverse)


def session_bytes(chart, fexp=None, connection=None, christoffel=None, qp=None,
                  linf=None, diffeo=None, series=None):
    doc = {"format": FORMAT, "chart": chart_to_json(chart)}
    if fexp is not None:
        doc["fexp"] = fexp_to_json(fexp)
    if connection is not None:
        doc["connection"] = connection_to_json(connection)
    if christoffel is not None:
        doc["christoffel"] = christoffel_to_json(christoffel)
    if qp is not None:
        doc["qp"] = qp_to_json(qp)
    if linf is not None:
        doc["linf"] = linf_to_json(linf)
    if diffeo is not None:
        doc["diffeo"] = diffeo_to_json(diffeo)
    if series is not None:
        doc["series"] = {label: series_to_json(s) for label, s in series.items()}
    return (json.dumps(doc, sort_keys=True, indent=2) + "\n").encode("utf-8")


def save_session(path, chart, **blocks):
    data = session_bytes(chart, **blocks)
    with open(path, "wb") as fh:
        fh.write(data)
    return data


def loads_session(data):
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SessionError("not valid JSON: %s" % exc)
    _req(isinstance(doc, dict), "session must be a JSON object")
    _req(doc.get("format") == FORMAT,
         "unsupported format %r (want %r)" % (doc.get("format"), FORMAT))
    extra = set(doc) - set(_BLOCKS) - {"format", "chart"}
    _req(not extra, "unknown blocks: %s" % ", ".join(sorted(extra)))
    _req("chart" in doc, "session has no chart block")
    chart = chart_from_json(doc["chart"])
    out = {"chart": chart}
    if "fexp" in doc:
        out["fexp"] = fexp_from_json(chart, doc["fexp"])
    if "connection" in doc:
        out["connection"] = connection_from_json(chart, doc["connection"])
    if "christoffel" in doc:
        out["christoffel"] = christoffel_from_json(chart, doc["christoffel"])
    if "qp" in doc:
        out["qp"] = qp_from_json(chart, doc["qp"])
    if "linf" in doc:
        out["linf"] = linf_from_json(chart, doc["linf"])
    if "diffeo" in doc:
        out["diffeo"] = diffeo_from_json(chart, doc["diffeo"])
    if "series" in doc:
        out["series"] = {label: series_from_json(chart, sj)
                         for label, sj in doc["series"].items()}
    return out


def load_session(path):
    with open(path, "rb") as fh:
        return loads_session(fh.read())
