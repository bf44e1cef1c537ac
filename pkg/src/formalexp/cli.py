"""Command line driver over session files.

Check commands (validate, flatness, check-homotopy) print their report
to stdout and exit 0 when every row passes.  Producing commands read a
session file, compute, and write a fresh canonical session holding the
chart plus exactly the blocks they produced, to --out or stdout; their
one-line key=value trailer goes to stderr so piped output stays clean.
Exit codes: 0 success, 1 a check or consistency guard failed, 2 usage
or input file trouble.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .ring import ChartError, DegreeError, ParseError
from .fexp import (ConsistencyError, UnimodularityError, canonicalize,
                   check_flatness, fexp_from_grothendieck,
                   grothendieck_from_fexp, transfer_diffeo, validate_fexp)
from .homotopy import (HomotopyData, cohomology_lift, find_primitive,
                       homotopy_from_connection)
from .connection import (connection_from_fexp, geodesic_taylor_oracle,
                         hpt_complete)
from .qp import check_cyclic, linearize_at_point, validate_qp
from .session import (SessionError, load_session, loads_session,
                      session_bytes)

_ERRORS = (SessionError, ChartError, DegreeError, ParseError,
           ConsistencyError, UnimodularityError)


def _emit(args, chart, **blocks):
    data = session_bytes(chart, **blocks)
    if args.out and args.out != "-":
        with open(args.out, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.write(data.decode("utf-8"))


def _trailer(args, **kv):
    line = " ".join("%s=%s" % (k, v) for k, v in kv.items())
    stream = sys.stderr if hasattr(args, "out") else sys.stdout
    print(line, file=stream)


def _need(sess, block, command):
    if block not in sess:
        raise SessionError("%s needs a %s block in the session" % (command, block))
    return sess[block]


def _homotopy_data(sess):
    if "connection" in sess:
        return homotopy_from_connection(sess["connection"])
    return HomotopyData.canonical(sess["chart"])


def cmd_validate(args):
    sess = load_session(args.session)
    reports = []
    if "fexp" in sess:
        reports.append(validate_fexp(sess["fexp"]))
    if "qp" in sess:
        reports.append(validate_qp(sess["qp"]))
    ok = all(r.ok for r in reports)
    for r in reports:
        print(r.render())
    loaded = ",".join(k for k in sorted(sess) if k != "chart")
    _trailer(args, ok=str(ok).lower(), blocks=loaded or "none")
    return 0 if ok else 1


def cmd_g_from_f(args):
    sess = load_session(args.session)
    fexp = _need(sess, "fexp", "g-from-f")
    conn = grothendieck_from_fexp(fexp)
    _emit(args, sess["chart"], connection=conn)
    _trailer(args, ok="true")
    return 0


def cmd_f_from_g(args):
    sess = load_session(args.session)
    conn = _need(sess, "connection", "f-from-g")
    fexp = fexp_from_grothendieck(conn)
    _emit(args, sess["chart"], fexp=fexp)
    _trailer(args, ok="true")
    return 0


def cmd_flatness(args):
    sess = load_session(args.session)
    if "connection" in sess:
        conn = sess["connection"]
    else:
        conn = grothendieck_from_fexp(_need(sess, "fexp", "flatness"))
    rep = check_flatness(conn)
    print(rep.render())
    _trailer(args, flat=str(rep.is_flat).lower())
    return 0 if rep.is_flat else 1


def cmd_canonicalize(args):
    sess = load_session(args.session)
    fexp = _need(sess, "fexp", "canonicalize")
    images, canon = canonicalize(fexp)
    _emit(args, sess["chart"], fexp=canon, series=images)
    _trailer(args, ok="true", proper=str(fexp.proper).lower())
    return 0


def cmd_transfer(args):
    sess = load_session(args.session)
    diffeo = _need(sess, "diffeo", "transfer")
    fexp = sess.get("fexp")
    conn = sess.get("connection")
    if fexp is None and conn is None:
        raise SessionError("transfer needs an fexp or connection block")
    new_fexp, new_conn = transfer_diffeo(diffeo, fexp=fexp, conn=conn)
    blocks = {}
    if new_fexp is not None:
        blocks["fexp"] = new_fexp
    if new_conn is not None:
        blocks["connection"] = new_conn
    _emit(args, diffeo.target, **blocks)
    _trailer(args, ok="true")
    return 0


def _labels(args, sess, command):
    series = _need(sess, "series", command)
    labels = args.label or sorted(series)
    for label in labels:
        if label not in series:
            raise SessionError("no series labeled %r in the session" % label)
    return series, labels


def cmd_lift(args):
    sess = load_session(args.session)
    conn = _need(sess, "connection", "lift")
    series, labels = _labels(args, sess, "lift")
    out = {label: cohomology_lift(conn, series[label]) for label in labels}
    _emit(args, sess["chart"], series=out)
    _trailer(args, ok="true", labels=",".join(labels))
    return 0


def cmd_primitive(args):
    sess = load_session(args.session)
    data = _homotopy_data(sess)
    series, labels = _labels(args, sess, "primitive")
    out = {label: find_primitive(data, series[label]) for label in labels}
    _emit(args, sess["chart"], series=out)
    _trailer(args, ok="true", labels=",".join(labels))
    return 0


def cmd_check_homotopy(args):
    sess = load_session(args.session)
    _homotopy_data(sess)
    print("ok   contraction identity holds on every generator")
    _trailer(args, ok="true")
    return 0


def cmd_hpt(args):
    sess = load_session(args.session)
    conn = _need(sess, "christoffel", "hpt")
    result = hpt_complete(conn)
    _emit(args, sess["chart"], connection=result.connection)
    _trailer(args, ok="true", steps=len(result.steps))
    return 0


def cmd_extract_connection(args):
    sess = load_session(args.session)
    fexp = _need(sess, "fexp", "extract-connection")
    conn = connection_from_fexp(fexp)
    _emit(args, sess["chart"], christoffel=conn)
    _trailer(args, ok="true", torsion_free=str(conn.is_torsion_free()).lower())
    return 0


def cmd_geodesic_oracle(args):
    with open(args.session, "rb") as fh:
        doc = json.loads(fh.read().decode("utf-8"))
    order = args.order
    if order is not None and isinstance(doc.get("chart"), dict):
        if order > int(doc["chart"].get("nres", 0)):
            doc["chart"]["nres"] = order
    sess = loads_session(json.dumps(doc))
    conn = _need(sess, "christoffel", "geodesic-oracle")
    chart = sess["chart"]
    if order is None:
        order = chart.nres
    jets = geodesic_taylor_oracle(conn, order)
    from .fexp import FormalExpMap
    fexp = FormalExpMap(chart, jets)
    _emit(args, chart, fexp=fexp)
    _trailer(args, ok="true", order=order)
    return 0


def _parse_point(pairs):
    point = {}
    for item in pairs or []:
        if "=" not in item:
            raise SessionError("--point needs name=value, got %r" % item)
        name, _, val = item.partition("=")
        try:
            point[name] = Fraction(val)
        except (ValueError, ZeroDivisionError):
            point[name] = val
    return point


def cmd_linearize(args):
    sess = load_session(args.session)
    qp = _need(sess, "qp", "linearize")
    point = _parse_point(args.point)
    linf = linearize_at_point(qp, point, params=args.param or None)
    cyc = check_cyclic(qp, linf)
    _emit(args, linf.chart, linf=linf)
    arities = ",".join(str(n) for n in linf.arities())
    _trailer(args, ok="true", curved=str(linf.curved).lower(),
             arities=arities or "none", cyclic=str(cyc.ok).lower())
    return 0 if cyc.ok else 1


def build_parser():
    p = argparse.ArgumentParser(
        prog="formalexp",
        description="exact computations with formal exponential maps on "
                    "graded charts, driven by JSON session files")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, out=True):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("session", help="path to the session file")
        if out:
            sp.add_argument("--out", default="-",
                            help="output session path (default: stdout)")
        sp.set_defaults(func=func)
        return sp

    add("validate", cmd_validate,
        "run the structural checks on the blocks in a session", out=False)
    add("g-from-f", cmd_g_from_f,
        "compute the flat connection generated by a formal exponential map")
    add("f-from-g", cmd_f_from_g,
        "reconstruct the formal exponential map from a flat connection")
    add("flatness", cmd_flatness,
        "check that the connection in a session squares to zero", out=False)
    add("canonicalize", cmd_canonicalize,
        "normalize a formal exponential map by a fiber substitution")
    add("transfer", cmd_transfer,
        "transport the session's map and connection along its diffeo")
    sp = add("lift", cmd_lift,
             "lift labeled base series to flat sections of the connection")
    sp.add_argument("--label", action="append",
                    help="series label to lift (repeatable; default: all)")
    sp = add("primitive", cmd_primitive,
             "solve delta p = f for labeled closed series")
    sp.add_argument("--label", action="append",
                    help="series label to integrate (repeatable; default: all)")
    add("check-homotopy", cmd_check_homotopy,
        "verify the contraction identity of the session's homotopy data",
        out=False)
    add("hpt", cmd_hpt,
        "complete torsion-free symbols to a flat connection")
    add("extract-connection", cmd_extract_connection,
        "read the quadratic fiber part of a map back as symbols")
    sp = add("geodesic-oracle", cmd_geodesic_oracle,
             "integrate the geodesic jets of the session's symbols directly")
    sp.add_argument("--order", type=int, default=None,
                    help="jet order (default: the chart's series order)")
    sp = add("linearize", cmd_linearize,
             "expand the session's dg symplectic field around a base point")
    sp.add_argument("--point", action="append", metavar="NAME=VALUE",
                    help="base point entry, rational or parameter expression")
    sp.add_argument("--param", action="append", metavar="NAME",
                    help="declare a formal parameter for symbolic points")
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _ERRORS as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
