import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import interval_green, line_green

from graphpotential.domain import ball, whole_graph
from graphpotential.errors import (
    LambdaAboveSpectrum,
    NonConverged,
    PoleCollision,
    PoleInsideEnlargedBall,
    SpectralBarrier,
)
from graphpotential.graph import cayley_ball, path, regular_tree, star
from graphpotential.green import (
    GreenField,
    ball_operator,
    global_green,
    green_between,
    green_columns,
    green_derivative_check,
    harnack_report,
    martin_kernel,
    relative_green,
)
from graphpotential.mesh import assemble_operator, build_mesh


def interval():
    g = path(2)
    return g, assemble_operator(build_mesh(whole_graph(g, [0, 1]), 1 / 200))


# -- relative Green functions ------------------------------------------------------------------
def test_interval_green_is_nodally_exact():
    g, op = interval()
    for y in (0.25, 0.5, 0.8):
        fld = relative_green(op, 0.0, op.mesh.node_at(g.point(0, y)))
        assert fld.residual <= 1e-10
        s = op.mesh.distances_from(g.vertex_point(0))
        ref = np.array([interval_green(float(x), y) for x in s])
        assert np.allclose(fld.values, ref, atol=1e-10)
    assert green_between(op, 0.0, g.point(0, 0.5), g.point(0, 0.5)) == pytest.approx(0.25, abs=1e-10)


def test_line_resolvent():
    g = path(41)
    op = ball_operator(g, g.vertex_point(20), 20.0, 0.05)
    val = green_between(op, -1.0, g.vertex_point(20), g.vertex_point(21))
    assert val == pytest.approx(line_green(1.0, 1.0), abs=1e-3)


def test_green_blows_up_at_the_barrier():
    g, op = interval()
    x, y = g.point(0, 0.3), g.point(0, 0.6)
    base = green_between(op, 0.0, x, y)
    lam1 = op.lambda1
    vals = [green_between(op, f * lam1, x, y) for f in (0.0, 0.5, 0.9, 0.99)]
    assert np.all(np.diff(vals) > 0) and vals[-1] > 10 * base
    with pytest.raises(SpectralBarrier):
        relative_green(op, lam1, op.mesh.node_at(y))


DOMAINS = [
    ("star", star(3, 2.0), lambda g: whole_graph(g, [1, 2, 3])),
    ("tree", regular_tree(3, 4), lambda g: ball(g, g.vertex_point(0), 4.0)),
    ("cayley", cayley_ball("Z2*Z3", 5), lambda g: ball(g, g.vertex_point(0), 5.0)),
]


@pytest.mark.parametrize("name,g,dom", DOMAINS, ids=[d[0] for d in DOMAINS])
def test_green_symmetry_positivity_monotonicity(name, g, dom):
    op = assemble_operator(build_mesh(dom(g), 0.25))
    rng = np.random.default_rng(5)
    nodes = op.nodes
    poles = [int(v) for v in rng.choice(nodes, 12, replace=False)]
    lam1 = op.lambda1
    G0 = green_columns(op, 0.0, poles)
    G1 = green_columns(op, 0.5 * lam1, poles)
    # every ordered pair among the poles: 132 pairs per domain
    sub0 = G0[poles]
    assert np.allclose(sub0, sub0.T, rtol=1e-9, atol=0)
    assert np.all(G0[nodes] > 0)
    assert np.all(G0[op.mesh.boundary] == 0)
    assert np.all(G1[poles] > sub0)


def test_green_zero_off_the_pole_component():
    g = path(7)
    c = g.vertex_point(3)
    from graphpotential.domain import make_domain

    op = assemble_operator(build_mesh(make_domain(g, [(c, 3.0)], [(c, 1.0)]), 0.25))
    fld = relative_green(op, 0.0, op.mesh.node_at(g.vertex_point(1)))
    assert fld[op.mesh.node_at(g.vertex_point(5))] == 0.0
    assert fld[op.mesh.node_at(g.vertex_point(1))] > 0


def test_domain_monotonicity_of_green():
    g = regular_tree(3, 6)
    x, y = g.vertex_point(1), g.vertex_point(5)
    vals = [green_between(ball_operator(g, g.vertex_point(0), R, 0.25), 0.05, x, y) for R in (3, 4, 5, 6)]
    assert np.all(np.diff(vals) >= 0)


@settings(max_examples=10)
@given(frac=st.floats(0.0, 0.95))
def test_green_increases_with_lambda(frac):
    g = regular_tree(3, 3)
    op = ball_operator(g, g.vertex_point(0), 3.0, 0.25)
    x, y = g.vertex_point(1), g.vertex_point(4)
    lam = frac * op.lambda1
    assert green_between(op, lam + 0.01 * op.lambda1, x, y) > green_between(op, lam, x, y)


# -- global Green function ---------------------------------------------------------------------
def test_global_green_on_tree_converges():
    g = regular_tree(3, 16)
    x, y = g.vertex_point(0), g.vertex_point(4)
    # d(x, y) = 2; stable to 0.5% by R = 12
    val, rep = global_green(g, 0.0, x, y, 0.5, tol=5e-3, radii=[4, 6, 8, 10, 12])
    assert rep.converged_at is not None
    assert all(i >= 0 for i in rep.increments)
    ref = green_between(ball_operator(g, x, 16.0, 0.5), 0.0, x, y)
    assert val == pytest.approx(ref, rel=5e-3)


def test_global_green_nonconverged_on_the_line():
    g = path(41)
    with pytest.raises(NonConverged) as info:
        global_green(g, 0.0, g.vertex_point(20), g.vertex_point(21), 0.25, radii=[4, 8, 12, 16, 20])
    rep = info.value.report
    assert rep.converged_at is None and len(rep.values) == 5
    assert all(i > 1e-3 for i in rep.increments)


def test_global_green_refuses_lambda_above_estimate():
    g = regular_tree(3, 6)
    with pytest.raises(LambdaAboveSpectrum):
        global_green(g, 0.2, g.vertex_point(0), g.vertex_point(1), 0.5, radii=[4, 6], lambda0=0.1155)


# -- Martin kernels ------------------------------------------------------------------------------
def test_martin_kernel_identities():
    g = regular_tree(3, 8)
    x0, x, y, x0b = g.vertex_point(0), g.vertex_point(1), g.vertex_point(100), g.vertex_point(2)
    assert martin_kernel(g, 0.05, x0, x0, y, 0.5, 8.0) == 1.0
    k = martin_kernel(g, 0.05, x0, x, y, 0.5, 8.0, center=x0)
    kb = martin_kernel(g, 0.05, x0b, x, y, 0.5, 8.0, center=x0)
    op = ball_operator(g, x0, 8.0, 0.5)
    Gy = relative_green(op, 0.05, op.mesh.node_at(y))
    assert k / kb == pytest.approx(Gy.at(x0b) / Gy.at(x0), rel=1e-9)
    with pytest.raises(PoleCollision):
        martin_kernel(g, 0.0, x0, x, x0, 0.5, 8.0)


def test_martin_kernel_on_tree_factorises():
    # x on the geodesic from x0 to y: the cut vertex x gives G(x0,y) = G(x0,x) G(x,y) / G(x,x)
    g = regular_tree(3, 8)
    x0, y = g.vertex_point(0), g.vertex_point(100)
    d = g.vertex_distances(0)
    x = g.vertex_point(next(v for v in range(g.n_vertices) if d[v] == 1
                            and g.vertex_distances(v)[100] == d[100] - 1))
    op = ball_operator(g, x0, 8.0, 0.5)
    Gx = relative_green(op, 0.05, op.mesh.node_at(x))
    expected = Gx.at(x) / Gx.at(x0)
    assert martin_kernel(g, 0.05, x0, x, y, 0.5, 8.0) == pytest.approx(expected, rel=1e-2)


# -- derivative in lambda --------------------------------------------------------------------------
def test_green_derivative_identity():
    g, op = interval()
    x, y = g.point(0, 0.3), g.point(0, 0.6)
    errs = [green_derivative_check(g, 2.0, x, y, d, 1 / 200, op=op).rel_error for d in (1e-1, 5e-2)]
    assert errs[1] < 1e-4 or green_derivative_check(g, 2.0, x, y, 1e-3, 1 / 200, op=op).rel_error < 1e-4
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.15)
    t = regular_tree(3, 8)
    chk = green_derivative_check(t, 0.05, t.vertex_point(1), t.vertex_point(5), 1e-3, 0.25, R=8.0,
                                 center=t.vertex_point(0))
    assert chk.rel_error < 1e-3
    with pytest.raises(SpectralBarrier):
        green_derivative_check(g, op.lambda1, x, y, 1e-3, 1 / 200, op=op)


# -- Harnack ---------------------------------------------------------------------------------------
def test_harnack_on_a_long_edge():
    g = path(2, 12.0)
    op = assemble_operator(build_mesh(whole_graph(g, [0, 1]), 0.05))
    fld = relative_green(op, 0.0, op.mesh.node_at(g.point(0, 10.0)))
    rep = harnack_report(fld, g.point(0, 4.0), 1.0, 1.0)
    assert rep.sphere_count == 2
    assert rep.ratio_ok and rep.gradient_ok
    # Green function to the left of the pole is linear: ratio is 5/3
    assert rep.ratio == pytest.approx(5 / 3, rel=1e-9)


def test_harnack_on_tree_and_errors():
    g = regular_tree(3, 6)
    op = ball_operator(g, g.vertex_point(0), 6.0, 0.125)
    pole = op.mesh.node_at(g.vertex_point(93))
    fld = relative_green(op, 0.0, pole)
    rep = harnack_report(fld, g.vertex_point(0), 1.0, 1.0)
    assert rep.ratio_ok and rep.gradient_ok and rep.ratio > 1
    with pytest.raises(PoleInsideEnlargedBall):
        harnack_report(fld, g.vertex_point(0), 4.5, 1.0)


def test_harnack_constant_field():
    g = star(3)
    op = assemble_operator(build_mesh(whole_graph(g, []), 0.1), dirichlet=False)
    fld = GreenField(op, 0.0, None, np.ones(op.mesh.n_nodes))
    rep = harnack_report(fld, g.vertex_point(0), 0.3, 0.5)
    assert rep.ratio == 1.0 and rep.gradient_integral == 0.0
