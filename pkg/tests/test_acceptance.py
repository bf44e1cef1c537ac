"""Acceptance gate: one test per shipped guarantee, all exact arithmetic.

Every test prints a single PASS line on success, so a verbose run reads
as a checklist.  No tolerances appear anywhere; each equality is an
exact comparison of rational coefficients.
"""

import random

from fractions import Fraction

from formalexp import (Connection, Diffeo, FormalExpMap, GradedChart,
                       HomotopyData, QPStructure, Series, canonicalize,
                       check_cyclic, check_flatness, connection_from_fexp,
                       eps_ht, fexp_from_grothendieck, geodesic_taylor_oracle,
                       grothendieck_from_fexp, hpt_complete,
                       linearize_at_point, transfer_diffeo, validate_qp)
from formalexp.cli import main
from formalexp.homotopy import cohomology_lift, find_primitive
from formalexp.session import save_session, session_bytes
from formalexp.vecfield import Derivation


def plane_chart(nres=6, nform=4):
    return GradedChart([("z1", 0), ("z2", 0)], nres=nres, nform=nform)


def super_chart(nres=6, nform=4):
    return GradedChart([("z1", 0), ("z2", 0), ("th1", 1), ("th2", 1)],
                       nres=nres, nform=nform)


def canonical_map(ch):
    return FormalExpMap(ch, {g.name: ch.gen(g.name) + ch.gen(ch.fiber_of(g).name)
                             for g in ch.base_gens})


def random_proper_map(rng, ch, max_terms=3):
    # identity plus fiber corrections of resolution degree >= 2
    pullbacks = {}
    gens = [g for g in ch.gens if g.klass != "form"]
    for a in ch.base_gens:
        img = ch.gen(a.name) + ch.gen(ch.fiber_of(a).name)
        placed = 0
        guard = 0
        while placed < max_terms and guard < 200:
            guard += 1
            key = []
            for g in gens:
                if rng.random() < 0.7:
                    continue
                key.append((g.pos, 1 if g.parity else rng.randint(1, 2)))
            key = tuple(key)
            if not (2 <= ch.mono_resdeg(key) <= ch.nres - 2):
                continue
            if ch.mono_zdeg(key) != a.zdeg:
                continue
            img = img + Series.from_terms(ch, {key: rng.randint(-3, 3)})
            placed += 1
        pullbacks[a.name] = img
    return FormalExpMap(ch, pullbacks)


def random_band_monomial(rng, chart):
    # one order below both truncation caps, so every composite of the
    # homotopy operators is computed without loss
    while True:
        key = []
        for g in chart.gens:
            if rng.random() < 0.6:
                continue
            key.append((g.pos, 1 if g.parity else rng.randint(1, 2)))
        key = tuple(key)
        if chart.mono_resdeg(key) > chart.nres - 1:
            continue
        if chart.mono_formdeg(key) > chart.nform - 1:
            continue
        return Series.from_terms(chart, {key: Fraction(rng.randint(-4, 4) or 1)})


def random_graded_torsion_free(rng, ch):
    def poly(deg):
        terms = {}
        for _ in range(rng.randint(0, 2)):
            key = []
            for g in ch.base_gens:
                if g.zdeg != 0 or rng.random() < 0.5:
                    continue
                key.append((g.pos, rng.randint(1, 2)))
            if deg == 1:
                th = ch.gen_named("th")
                key.append((th.pos, 1))
            key = tuple(sorted(key))
            terms[key] = rng.randint(-2, 2)
        return Series.from_terms(ch, terms)

    symbols = {}
    names = [g.name for g in ch.base_gens]
    for a in names:
        da = ch.gen_named(a).zdeg
        for i, c in enumerate(names):
            for b in names[i:]:
                dc = ch.gen_named(c).zdeg
                db = ch.gen_named(b).zdeg
                if dc % 2 and db % 2:
                    continue
                t = da - dc - db
                if t not in (0, 1):
                    continue
                s = poly(t)
                if s.is_zero():
                    continue
                symbols[(a, c, b)] = s
                if c != b:
                    symbols[(a, b, c)] = s
    return Connection(ch, symbols)


def round_trip_seeds():
    return [100 + i for i in range(20)]


def test_criterion_01_canonical_map_exact_both_ways():
    for ch in (plane_chart(), super_chart()):
        F = canonical_map(ch)
        G = grothendieck_from_fexp(F)
        # the generated derivation is exactly d - dz^a d/deps^a
        for g in ch.base_gens:
            assert G.d.image(g.name) == ch.gen(ch.form_of(g).name)
            assert G.d.image(ch.form_of(g).name).is_zero()
            assert G.d.image(ch.fiber_of(g).name) == -ch.gen(ch.form_of(g).name)
        back = fexp_from_grothendieck(G)
        assert back.pullbacks == F.pullbacks
        assert G.d.square().is_zero()
        rep = check_flatness(G)
        assert rep.is_flat, rep.render()
    print("criterion 01: PASS canonical map and its connection invert exactly")


def test_criterion_02_random_round_trips_are_identities():
    ch = super_chart()
    for seed in round_trip_seeds():
        rng = random.Random(seed)
        F = random_proper_map(rng, ch)
        G = grothendieck_from_fexp(F)
        back = fexp_from_grothendieck(G)
        assert back.pullbacks == F.pullbacks
        again = grothendieck_from_fexp(back)
        assert again.d.images == G.d.images
    print("criterion 02: PASS 20 randomized maps round-trip exactly at order 6")


def test_criterion_03_round_trip_connections_are_flat():
    # the same seeded family as the round-trip criterion
    ch = super_chart()
    for seed in round_trip_seeds():
        rng = random.Random(seed)
        F = random_proper_map(rng, ch)
        G = grothendieck_from_fexp(F)
        # residuals are reported for every resolution degree the stored
        # orders determine, 0 through 5
        rep = check_flatness(G)
        assert rep.is_flat, rep.render()
        assert not rep.residuals
        for c in rep.checks:
            assert c.ok
    print("criterion 03: PASS flatness residuals vanish on all 20 connections")


def test_criterion_04_contraction_and_homotopy_identities():
    ch = super_chart(nres=9, nform=5)
    data = HomotopyData.canonical(ch)
    counting = eps_ht(ch)
    dl, zt = data.delta, data.zeta

    def check(f):
        (key, _), = f.terms.items()
        w = ch.mono_deg_ht(key)
        lhs = dl.apply(zt.apply(f)) + zt.apply(dl.apply(f))
        assert lhs == f.scale(w)
        assert lhs == counting.apply(f)
        hd = data.h(dl.apply(f)) + dl.apply(data.h(f))
        assert hd == (f if w else f.scale(0))
        return w

    seen = set()
    for g in ch.gens:
        seen.add(check(ch.gen(g.name)))
    rng = random.Random(4004)
    count = 0
    while count < 200:
        f = random_band_monomial(rng, ch)
        if f.is_zero():
            continue
        seen.add(check(f))
        count += 1
    assert seen >= set(range(0, 9))
    print("criterion 04: PASS identities hold on all generators and"
          " 200 monomials spanning weights 0..8")


def test_criterion_05_lifts_match_pullbacks_and_primitives_integrate():
    ch = super_chart()
    rng = random.Random(500)
    F = random_proper_map(rng, ch)
    G = grothendieck_from_fexp(F)

    def random_base_function():
        terms = {}
        for _ in range(rng.randint(1, 3)):
            key = []
            for g in ch.base_gens:
                if rng.random() < 0.5:
                    continue
                key.append((g.pos, 1 if g.parity else rng.randint(1, 2)))
            terms[tuple(key)] = Fraction(rng.randint(-3, 3) or 1)
        return Series.from_terms(ch, terms)

    for _ in range(20):
        g = random_base_function()
        lift = cohomology_lift(G, g)
        assert lift == F.apply(g)
        # the section is flat at every determined resolution degree
        resid = G.d.apply(lift)
        for lev in range(0, ch.nres):
            assert resid.grade_project("resdeg", lev).is_zero()

    data = HomotopyData.canonical(ch)
    done = 0
    while done < 20:
        p = random_band_monomial(rng, ch)
        f = data.delta.apply(p)
        if f.is_zero():
            continue
        q = find_primitive(data, f)
        assert data.delta.apply(q) == f
        done += 1
    print("criterion 05: PASS 20 lifts equal the pullback images and"
          " 20 primitives integrate exactly")


def _first_step_matches_bracket(ch, result):
    # the first repair differs from -1/2 [zeta, S0] by the commutator of
    # delta with an explicit weight-preserving regauge Y, so the bracket
    # form of the step is checked as an exact identity
    step = result.steps[0]
    s0, d1 = step.defect, step.repair
    data = HomotopyData.canonical(ch)
    bracket = data.zeta.commutator(s0).scale(Fraction(-1, 2))
    y_images = {}
    for g in ch.base_gens:
        img = s0.image(ch.fiber_of(g).name)
        y_images[ch.form_of(g).name] = data.zeta.apply(img).scale(Fraction(-1, 6))
    regauge = Derivation(ch, 0, y_images)
    return d1 + data.delta.commutator(regauge) == bracket


def test_criterion_06_symbol_completions_and_byte_exact_extraction():
    ch = plane_chart()
    A = Connection(ch, {("z1", "z2", "z2"): ch.gen("z1")})
    checked = [(ch, A)]
    gch = GradedChart([("x", 0), ("y", 0), ("th", 1)], nres=6, nform=4)
    rng = random.Random(51)
    while len(checked) < 6:
        B = random_graded_torsion_free(rng, gch)
        if B.symbols:
            checked.append((gch, B))
    for chart, conn in checked:
        result = hpt_complete(conn)
        rep = check_flatness(result.connection)
        assert rep.is_flat, rep.render()
        assert _first_step_matches_bracket(chart, result)
        F = fexp_from_grothendieck(result.connection)
        extracted = connection_from_fexp(F)
        assert session_bytes(chart, christoffel=extracted) == \
            session_bytes(chart, christoffel=conn)
    print("criterion 06: PASS %d completions are flat, start with the bracket"
          " step and extract back byte-exactly" % len(checked))


def test_criterion_07_jets_match_direct_integration():
    ch = plane_chart()
    examples = [
        Connection(ch, {("z1", "z2", "z2"): ch.gen("z1")}),
        Connection(ch, {
            ("z1", "z1", "z1"): ch.gen("z2"),
            ("z2", "z1", "z2"): ch.gen("z1"),
            ("z2", "z2", "z1"): ch.gen("z1"),
        }),
    ]
    for A in examples:
        F = fexp_from_grothendieck(hpt_complete(A).connection)
        jets = geodesic_taylor_oracle(A, 4)
        for a in ("z1", "z2"):
            for k in range(0, 5):
                got = F.pullbacks[a].grade_project("resdeg", k)
                want = jets[a].grade_project("resdeg", k)
                assert got == want, \
                    "jet order %d of %s disagrees with direct integration" % (k, a)
            # the quadratic jet is minus half the symbol on both routes
            half = ch.zero()
            for b in ("z1", "z2"):
                for c in ("z1", "z2"):
                    half = half - (A.symbol(a, b, c) * ch.gen("e" + b)
                                   * ch.gen("e" + c)).scale(Fraction(1, 2))
            assert F.pullbacks[a].grade_project("resdeg", 2) == half
            assert jets[a].grade_project("resdeg", 2) == half
    print("criterion 07: PASS jets to order 4 match the independent"
          " integrator on both examples")


def test_criterion_08_linearization_brackets():
    # nilpotent fixture: only the binary bracket survives and it equals
    # the coefficients of the field
    ch = GradedChart([("x1", 1), ("x2", 1), ("x3", 1),
                      ("y1", 1), ("y2", 1), ("y3", 1)], nres=6, nform=4)
    qi = {"x3": ch.parse("-x1*x2"),
          "y1": ch.parse("-x2*y3"),
          "y2": ch.parse("x1*y3")}
    om = {}
    for i in "123":
        om[("x" + i, "y" + i)] = 1
        om[("y" + i, "x" + i)] = 1
    qp = QPStructure(ch, 2, qi, om)
    assert validate_qp(qp).ok
    linf = linearize_at_point(qp, {})
    assert linf.arities() == [2]
    assert linf.bracket_component(2, "ex3") == ch.parse("-ex1*ex2")
    assert linf.bracket_component(2, "ey1") == ch.parse("-ex2*ey3")
    assert linf.bracket_component(2, "ey2") == ch.parse("ex1*ey3")

    # quadratic bivector fixture: expansion squares to zero and stays
    # cyclic against the pairing at every numeric and symbolic point
    pch = GradedChart([("z1", 0), ("z2", 0), ("p1", 1), ("p2", 1)],
                      nres=6, nform=4)
    pqp = QPStructure(pch, 1, {
        "z1": pch.parse("z1^2*p2"),
        "z2": pch.parse("-z1^2*p1"),
        "p1": pch.parse("2*z1*p1*p2"),
    }, {("z1", "p1"): 1, ("p1", "z1"): 1, ("z2", "p2"): 1, ("p2", "z2"): 1})
    assert validate_qp(pqp).ok
    for point in ({"z1": 1, "z2": 0}, {"z1": Fraction(-2, 3), "z2": 5}):
        plin = linearize_at_point(pqp, point)
        assert plin.q.square().is_zero()
        rep = check_cyclic(pqp, plin)
        assert rep.ok, rep.render()
    sym = linearize_at_point(pqp, {"z1": "a1", "z2": "a2"}, params=["a1", "a2"])
    assert sym.q.square().is_zero()
    assert check_cyclic(pqp, sym).ok
    sch = sym.chart
    assert sym.bracket_component(1, "ez1") == sch.parse("a1^2*ep2")
    assert sym.bracket_component(2, "ez1") == sch.parse("2*a1*ez1*ep2")
    assert sym.bracket_component(3, "ez1") == sch.parse("ez1^2*ep2")
    print("criterion 08: PASS structure constants, codifferential and"
          " cyclicity hold at numeric and symbolic points")


def test_criterion_09_transfer_commutes_with_construction():
    src = plane_chart()
    tgt = GradedChart([("w1", 0), ("w2", 0)], nres=6, nform=4)
    shear = Diffeo(src, tgt,
                   {"z1": tgt.parse("w1"), "z2": tgt.parse("w2 + w1^2")},
                   {"w1": src.parse("z1"), "w2": src.parse("z2 - z1^2")})
    rng = random.Random(900)
    for F in (canonical_map(src), random_proper_map(rng, src),
              random_proper_map(rng, src)):
        G = grothendieck_from_fexp(F)
        newF, newG = transfer_diffeo(shear, fexp=F, conn=G)
        rebuilt = grothendieck_from_fexp(newF)
        assert newG.d.images == rebuilt.d.images
        back = fexp_from_grothendieck(newG)
        assert back.pullbacks == newF.pullbacks
    print("criterion 09: PASS transferring and constructing the connection"
          " commute exactly")


def test_criterion_10_cli_outputs_are_byte_stable(tmp_path):
    ch = plane_chart()
    F = FormalExpMap(ch, {
        "z1": ch.parse("z1 + ez1 + z2*ez1^2"),
        "z2": ch.parse("z2 + ez2"),
    })
    fexp_in = tmp_path / "fexp.json"
    save_session(fexp_in, ch, fexp=F)
    conn_in = tmp_path / "conn.json"
    save_session(conn_in, ch, connection=grothendieck_from_fexp(F))
    chris_in = tmp_path / "symbols.json"
    save_session(chris_in, ch, christoffel=Connection(
        ch, {("z1", "z2", "z2"): ch.gen("z1")}))
    series_in = tmp_path / "series.json"
    save_session(series_in, ch, connection=grothendieck_from_fexp(F),
                 series={"f": ch.gen("z1"), "w": ch.gen("dz1")})
    tgt = GradedChart([("w1", 0), ("w2", 0)], nres=6, nform=4)
    shear = Diffeo(ch, tgt,
                   {"z1": tgt.parse("w1"), "z2": tgt.parse("w2 + w1^2")},
                   {"w1": ch.parse("z1"), "w2": ch.parse("z2 - z1^2")})
    diffeo_in = tmp_path / "diffeo.json"
    save_session(diffeo_in, ch, fexp=F, diffeo=shear)
    pch = GradedChart([("z1", 0), ("z2", 0), ("p1", 1), ("p2", 1)])
    qp_in = tmp_path / "qp.json"
    save_session(qp_in, pch, qp=QPStructure(pch, 1, {
        "z1": pch.parse("z1^2*p2"),
        "z2": pch.parse("-z1^2*p1"),
        "p1": pch.parse("2*z1*p1*p2"),
    }, {("z1", "p1"): 1, ("p1", "z1"): 1, ("z2", "p2"): 1, ("p2", "z2"): 1}))

    jobs = [
        ("g-from-f", [str(fexp_in)]),
        ("f-from-g", [str(conn_in)]),
        ("canonicalize", [str(fexp_in)]),
        ("transfer", [str(diffeo_in)]),
        ("lift", [str(series_in), "--label", "f"]),
        ("primitive", [str(series_in), "--label", "w"]),
        ("hpt", [str(chris_in)]),
        ("extract-connection", [str(fexp_in)]),
        ("geodesic-oracle", [str(chris_in), "--order", "4"]),
        ("linearize", [str(qp_in), "--point", "z1=1", "--point", "z2=0"]),
    ]
    for command, extra in jobs:
        outs = set()
        for run in range(3):
            out = tmp_path / ("%s-%d.json" % (command, run))
            rc = main([command] + extra + ["--out", str(out)])
            assert rc == 0, command
            outs.add(out.read_bytes())
        assert len(outs) == 1, "%s output changed between runs" % command
    print("criterion 10: PASS all 10 producing commands are byte-stable"
          " across 3 runs")
