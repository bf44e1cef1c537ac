import math

from fractions import Fraction

import pytest

from formalexp import (ChartError, ConsistencyError, GradedChart, QPStructure,
                       check_cyclic, linearize_at_point, validate_qp)


def curved_qp(nres=6, nform=4):
    # u of degree -1 paired with x of degree 0; Q(u) = x squares to zero
    ch = GradedChart([("u", -1), ("x", 0)], nres=nres, nform=nform)
    return QPStructure(ch, -1, {"u": ch.gen("x")},
                       {("u", "x"): 1, ("x", "u"): 1})


def heisenberg_qp(nres=6, nform=4):
    # all six coordinates sit in degree 1; x1, x2, x3 span a nilpotent
    # algebra with the single relation picked out by Q(x3), and y1, y2,
    # y3 carry the dual action
    ch = GradedChart([("x1", 1), ("x2", 1), ("x3", 1),
                      ("y1", 1), ("y2", 1), ("y3", 1)], nres=nres, nform=nform)
    qi = {
        "x3": ch.parse("-x1*x2"),
        "y1": ch.parse("-x2*y3"),
        "y2": ch.parse("x1*y3"),
    }
    om = {}
    for i in "123":
        om[("x" + i, "y" + i)] = 1
        om[("y" + i, "x" + i)] = 1
    return QPStructure(ch, 2, qi, om)


def poisson_qp(nres=6, nform=4):
    # degree-1 structure for the quadratic bivector z1^2 d/dz1 ^ d/dz2
    ch = GradedChart([("z1", 0), ("z2", 0), ("p1", 1), ("p2", 1)],
                     nres=nres, nform=nform)
    qi = {
        "z1": ch.parse("z1^2*p2"),
        "z2": ch.parse("-z1^2*p1"),
        "p1": ch.parse("2*z1*p1*p2"),
    }
    om = {("z1", "p1"): 1, ("p1", "z1"): 1, ("z2", "p2"): 1, ("p2", "z2"): 1}
    return QPStructure(ch, 1, qi, om)


def test_fixtures_validate():
    for qp in (curved_qp(), heisenberg_qp(), poisson_qp()):
        rep = validate_qp(qp)
        assert rep.ok, rep.render()


def test_curved_point_gives_zero_arity_bracket():
    qp = curved_qp()
    ch = qp.chart
    linf = linearize_at_point(qp, {"x": 1})
    assert linf.curved
    assert linf.arities() == [0, 1]
    assert linf.bracket_component(0, "eu").constant_value() == 1
    assert linf.bracket_component(1, "eu") == ch.gen("ex")
    assert check_cyclic(qp, linf).ok


def test_curved_point_symbolic_value():
    qp = curved_qp()
    linf = linearize_at_point(qp, {"x": "p1"}, params=["p1"])
    assert linf.curved
    assert linf.bracket_component(0, "eu") == linf.chart.gen("p1")
    assert check_cyclic(qp, linf).ok


def test_flat_point_is_plain_differential():
    qp = curved_qp()
    linf = linearize_at_point(qp, {"x": 0})
    assert not linf.curved
    assert linf.arities() == [1]
    assert linf.bracket_component(1, "eu") == qp.chart.gen("ex")


def test_binary_brackets_are_structure_constants():
    qp = heisenberg_qp()
    ch = qp.chart
    linf = linearize_at_point(qp, {})
    assert not linf.curved
    # expanding at the origin just renames coordinates to fibers, so the
    # quadratic coefficients of Q come back verbatim as binary brackets
    assert linf.arities() == [2]
    assert linf.bracket_component(2, "ex3") == ch.parse("-ex1*ex2")
    assert linf.bracket_component(2, "ey1") == ch.parse("-ex2*ey3")
    assert linf.bracket_component(2, "ey2") == ch.parse("ex1*ey3")
    assert linf.bracket_component(2, "ex1").is_zero()
    assert linf.bracket_component(2, "ey3").is_zero()
    assert linf.bracket_component(1, "ex3").is_zero()
    rep = check_cyclic(qp, linf)
    assert rep.ok, rep.render()


def test_poisson_brackets_at_numeric_point():
    qp = poisson_qp()
    ch = qp.chart
    linf = linearize_at_point(qp, {"z1": 1, "z2": 0})
    assert not linf.curved
    assert linf.arities() == [1, 2, 3]
    assert linf.bracket_component(1, "ez1") == ch.gen("ep2")
    assert linf.bracket_component(1, "ez2") == -ch.gen("ep1")
    assert linf.bracket_component(2, "ez1") == ch.parse("2*ez1*ep2")
    assert linf.bracket_component(2, "ez2") == ch.parse("-2*ez1*ep1")
    assert linf.bracket_component(2, "ep1") == ch.parse("2*ep1*ep2")
    assert linf.bracket_component(3, "ez1") == ch.parse("ez1^2*ep2")
    assert linf.bracket_component(3, "ez2") == ch.parse("-ez1^2*ep1")
    assert linf.bracket_component(3, "ep1") == ch.parse("2*ez1*ep1*ep2")
    assert linf.bracket_component(1, "ep2").is_zero()
    rep = check_cyclic(qp, linf)
    assert rep.ok, rep.render()


def test_expansion_matches_binomial_shift():
    # Q(z1) = z1^2 p2 expanded at z1 = c + ez1, p2 = 0 + ep2 must give
    # sum_j C(2,j) c^(2-j) ez1^j ep2, computed here without the engine
    qp = poisson_qp()
    ch = qp.chart
    c = Fraction(3, 2)
    linf = linearize_at_point(qp, {"z1": c, "z2": 0})
    for j in range(3):
        want = (ch.gen("ez1") ** j * ch.gen("ep2")).scale(
            math.comb(2, j) * c ** (2 - j))
        assert linf.bracket_component(j + 1, "ez1") == want
    assert check_cyclic(qp, linf).ok


def test_symbolic_point_gives_polynomial_coefficients():
    qp = poisson_qp()
    linf = linearize_at_point(qp, {"z1": "a1", "z2": "a2"}, params=["a1", "a2"])
    ch = linf.chart
    assert linf.arities() == [1, 2, 3]
    assert linf.bracket_component(1, "ez1") == ch.parse("a1^2*ep2")
    assert linf.bracket_component(1, "ez2") == ch.parse("-a1^2*ep1")
    assert linf.bracket_component(2, "ez1") == ch.parse("2*a1*ez1*ep2")
    rep = check_cyclic(qp, linf)
    assert rep.ok, rep.render()


def test_validate_rejects_broken_square():
    # flipping the sign of the p1 image breaks Q^2 = 0 but nothing else
    ch = GradedChart([("z1", 0), ("z2", 0), ("p1", 1), ("p2", 1)])
    qi = {
        "z1": ch.parse("z1^2*p2"),
        "z2": ch.parse("-z1^2*p1"),
        "p1": ch.parse("-2*z1*p1*p2"),
    }
    om = {("z1", "p1"): 1, ("p1", "z1"): 1, ("z2", "p2"): 1, ("p2", "z2"): 1}
    rep = validate_qp(QPStructure(ch, 1, qi, om))
    assert not rep.ok
    bad = {c.name for c in rep.failures()}
    assert "square-zero" in bad


def test_validate_rejects_wrong_image_degree():
    # the image of u must be homogeneous of degree 0, not -1
    ch = GradedChart([("u", -1), ("x", 0)])
    rep = validate_qp(QPStructure(ch, -1, {"u": ch.gen("u")},
                                  {("u", "x"): 1, ("x", "u"): 1}))
    assert not rep.ok
    assert any(c.name == "degree[u]" for c in rep.failures())


def test_validate_rejects_non_base_image():
    ch = GradedChart([("u", -1), ("x", 0)])
    rep = validate_qp(QPStructure(ch, -1, {"u": ch.gen("ex")},
                                  {("u", "x"): 1, ("x", "u"): 1}))
    assert not rep.ok
    assert any(c.name == "base-only[u]" for c in rep.failures())


def test_validate_rejects_bad_pairing():
    ch = GradedChart([("u", -1), ("x", 0)])
    q = {"u": ch.gen("x")}
    # wrong total degree
    rep = validate_qp(QPStructure(ch, -1, q, {("u", "u"): 1}))
    assert any(c.name == "pairing-degree" for c in rep.failures())
    # broken graded antisymmetry: degree product is even, so the two
    # orders must agree
    rep = validate_qp(QPStructure(ch, -1, q, {("u", "x"): 1, ("x", "u"): -1}))
    assert any(c.name == "pairing-antisymmetry" for c in rep.failures())
    # degenerate matrix
    rep = validate_qp(QPStructure(ch, -1, q, {}))
    assert any(c.name == "pairing-nondegenerate" for c in rep.failures())


def test_validate_rejects_non_invariant_pairing():
    # flip one dual-action sign: Q stays square-zero but no longer
    # preserves the pairing
    ch = GradedChart([("x1", 1), ("x2", 1), ("x3", 1),
                      ("y1", 1), ("y2", 1), ("y3", 1)])
    qi = {
        "x3": ch.parse("-x1*x2"),
        "y1": ch.parse("-x2*y3"),
        "y2": ch.parse("-x1*y3"),
    }
    om = {}
    for i in "123":
        om[("x" + i, "y" + i)] = 1
        om[("y" + i, "x" + i)] = 1
    rep = validate_qp(QPStructure(ch, 2, qi, om))
    assert not rep.ok
    bad = {c.name for c in rep.failures()}
    assert bad == {"pairing-invariance"}


def test_linearize_rejects_invalid_input():
    ch = GradedChart([("u", -1), ("x", 0)])
    qp = QPStructure(ch, -1, {"u": ch.gen("x")}, {("u", "x"): 1, ("x", "u"): -1})
    with pytest.raises(ConsistencyError):
        linearize_at_point(qp, {"x": 0})


def test_linearize_rejects_bad_points():
    qp = curved_qp()
    # nonzero value at a generator of nonzero degree
    with pytest.raises(ConsistencyError):
        linearize_at_point(qp, {"u": 1})
    # parameter name already on the chart
    with pytest.raises(ChartError):
        linearize_at_point(qp, {"x": "u"}, params=["u"])
    # symbolic value may only use the declared parameters
    with pytest.raises(ConsistencyError):
        linearize_at_point(qp, {"x": "p1 + x"}, params=["p1"])


def test_structure_rejects_foreign_names():
    ch = GradedChart([("u", -1), ("x", 0)])
    other = GradedChart([("u", -1), ("x", 0)])
    with pytest.raises(ChartError):
        QPStructure(ch, -1, {"eu": ch.gen("x")}, {})
    with pytest.raises(ChartError):
        QPStructure(ch, -1, {"u": other.gen("x")}, {})
    with pytest.raises(ChartError):
        QPStructure(ch, -1, {"u": ch.gen("x")}, {("u", "dx"): 1})
