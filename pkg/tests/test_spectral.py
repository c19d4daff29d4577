import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import (
    interval_eigenvalue,
    interval_ground_state_of_ball,
    interval_heat_images,
    regular_tree_bottom,
)

from graphpotential.domain import ball, whole_graph
from graphpotential.errors import PreconditionError, RadiusExceedsTruncation
from graphpotential.graph import cayley_ball, path, regular_tree, star, theta_tree
from graphpotential.mesh import assemble_operator, build_mesh
from graphpotential.spectral import (
    default_count,
    dirichlet_eigensystem,
    ground_state,
    heat_kernel,
    heat_kernel_rows,
    heat_mass,
    lambda0_exhaustion,
    maximum_principle_check,
    radial_ground_state,
    radial_lambda0_exhaustion,
    tree_bottom_of_spectrum,
)


def interval_op(h):
    g = path(2)
    return g, assemble_operator(build_mesh(whole_graph(g, [0, 1]), h))


@pytest.fixture(scope="module")
def interval_basis():
    g, op = interval_op(1 / 100)
    return g, op, dirichlet_eigensystem(op, op.size)


# -- eigensystems ---------------------------------------------------------------------------
def test_basis_invariants_dense_and_lanczos():
    for h in (1 / 50, 1 / 600):
        _, op = interval_op(h)
        b = dirichlet_eigensystem(op, 6)
        gram = b.vectors.T @ (op.M[:, None] * b.vectors)
        assert np.allclose(gram, np.eye(6), atol=1e-8)
        assert np.all(np.diff(b.eigenvalues) > 0)
        assert np.all(b.vectors[:, 0] > 0)
    for k in range(1, 4):
        # only the fine step is inside the 0.2% band for k = 3
        assert b.eigenvalues[k - 1] == pytest.approx(interval_eigenvalue(k), rel=2e-3)


def test_eigensystem_preconditions():
    g = star(3)
    free = assemble_operator(build_mesh(whole_graph(g, []), 0.25), dirichlet=False)
    with pytest.raises(PreconditionError):
        dirichlet_eigensystem(free, 1)
    b = dirichlet_eigensystem(free, 2, require_dirichlet=False)
    assert abs(b.eigenvalues[0]) < 1e-10
    _, op = interval_op(0.25)
    with pytest.raises(PreconditionError):
        dirichlet_eigensystem(op, op.size + 1)
    assert default_count(op) == 1


def test_spectrum_csv(tmp_path):
    _, op = interval_op(0.1)
    b = dirichlet_eigensystem(op, 3)
    b.to_csv(tmp_path / "s.csv")
    rows = np.loadtxt(tmp_path / "s.csv", delimiter=",", skiprows=1)
    assert np.array_equal(rows[:, 1], b.eigenvalues)


@pytest.mark.parametrize("g", [path(9), regular_tree(3, 5), cayley_ball("Z2*Z3", 6), theta_tree(6, 2)],
                         ids=lambda g: g.name)
def test_domain_monotonicity_nested_balls(g):
    c = g.vertex_point(0) if g.truncation is None else g.vertex_point(g.truncation.center)
    if g.name.startswith("path"):
        c = g.vertex_point(4)
    radii = [1.0, 1.5, 2.0, 2.5, 3.0, 3.5]
    vals = [ground_state(g, c, r, 0.25) for r in radii]
    assert np.all(np.diff(vals) < 0)


# -- heat kernel --------------------------------------------------------------------------------
def test_heat_kernel_matches_image_series(interval_basis):
    g, op, b = interval_basis
    mid = op.mesh.node_at(g.point(0, 0.5))
    for t in (0.01, 0.05, 0.2):
        val, tail = heat_kernel(b, t, mid, mid)
        assert val == pytest.approx(interval_heat_images(t, 0.5, 0.5), rel=1e-3)
        assert tail == 0.0


def test_heat_kernel_symmetry_and_positivity(interval_basis):
    _, op, b = interval_basis
    nodes = op.nodes
    rng = np.random.default_rng(2)
    for _ in range(30):
        x, y = (int(v) for v in rng.choice(nodes, 2))
        for t in (0.1, 0.5, 1.0):
            pxy, _ = heat_kernel(b, t, x, y)
            pyx, _ = heat_kernel(b, t, y, x)
            assert pxy == pyx and pxy > 0


@settings(max_examples=15)
@given(t=st.floats(0.02, 0.5), s=st.floats(0.02, 0.5))
def test_chapman_kolmogorov(interval_basis, t, s):
    _, op, b = interval_basis
    x, y = int(op.nodes[10]), int(op.nodes[60])
    px = heat_kernel_rows(b, t, x)
    py = heat_kernel_rows(b, s, y)
    lhs = float(np.sum(px * py * op.M))
    rhs, _ = heat_kernel(b, t + s, x, y)
    assert lhs == pytest.approx(rhs, rel=1e-6)


def test_heat_mass_bounds(interval_basis):
    g, op, b = interval_basis
    mid = op.mesh.node_at(g.point(0, 0.5))
    for t in (0.001, 0.1, 1.0):
        assert 0 < heat_mass(b, t, mid) <= 1 + 1e-8
    assert heat_mass(b, 1e-4, mid) == pytest.approx(1.0, abs=1e-3)
    with pytest.raises(PreconditionError):
        heat_mass(b, 0.0, mid)


def test_heat_mass_and_kernel_grow_under_exhaustion():
    g = path(17)
    c = g.vertex_point(8)
    y = g.vertex_point(9)
    masses, kernels = [], []
    for R in (2.0, 4.0, 8.0):
        op = assemble_operator(build_mesh(ball(g, c, R), 0.1))
        b = dirichlet_eigensystem(op, op.size)
        nx, ny = op.mesh.node_at(c), op.mesh.node_at(y)
        masses.append(heat_mass(b, 0.5, nx))
        kernels.append(heat_kernel(b, 0.5, nx, ny)[0])
    assert np.all(np.diff(masses) > 0) and masses[-1] == pytest.approx(1.0, abs=1e-2)
    assert np.all(np.diff(kernels) >= -1e-9)


# -- bottom of the spectrum --------------------------------------------------------------------
def test_path_exhaustion_matches_interval():
    g = path(41)
    rep = lambda0_exhaustion(g, g.vertex_point(20), [2, 4, 8, 16], 0.05)
    assert rep.monotone
    for R, v in zip(rep.radii, rep.values):
        assert v == pytest.approx(interval_ground_state_of_ball(R), rel=1e-2)
    assert rep.estimate < 0.01
    with pytest.raises(RadiusExceedsTruncation):
        lambda0_exhaustion(regular_tree(3, 4), regular_tree(3, 4).vertex_point(0), [2, 5], 0.25)
    with pytest.raises(PreconditionError):
        lambda0_exhaustion(g, g.vertex_point(20), [4, 2], 0.05)


def test_radial_reduction_equals_full_mesh():
    g = regular_tree(3, 6)
    for R in (2.0, 3.5, 6.0):
        full = ground_state(g, g.vertex_point(0), R, 0.25)
        assert radial_ground_state(3, 1.0, R, 0.25) == pytest.approx(full, rel=1e-10)


def test_tree_bottom_of_spectrum():
    assert tree_bottom_of_spectrum(3) == pytest.approx(regular_tree_bottom(3), rel=1e-14)
    assert tree_bottom_of_spectrum(3) == pytest.approx(0.1155, abs=1e-4)
    rep = radial_lambda0_exhaustion(3, 1.0, [20, 40, 80, 160], 0.25)
    assert rep.monotone
    assert rep.estimate == pytest.approx(regular_tree_bottom(3), rel=0.02)
    assert rep.decrement >= 0


# -- maximum principle ------------------------------------------------------------------------
def test_maximum_principle_bump():
    g = star(3)
    op = assemble_operator(build_mesh(whole_graph(g, [1, 2, 3]), 0.05))
    d = op.mesh.distances_from(g.vertex_point(0))
    u0 = np.clip(1 - 2 * d, 0, None)
    rep = maximum_principle_check(op, u0, 1.0, 50)
    assert rep.passed and rep.violation <= 1e-10
    assert rep.min_value >= -1e-12


def test_constant_is_stationary_without_boundary():
    g = theta_tree(6, 1)
    op = assemble_operator(build_mesh(whole_graph(g, []), 0.1), dirichlet=False)
    rep = maximum_principle_check(op, np.full(op.mesh.n_nodes, 0.7), 2.0, 20)
    assert rep.interior_max == pytest.approx(0.7, abs=1e-12)
    assert rep.min_value == pytest.approx(0.7, abs=1e-12)


@settings(max_examples=10)
@given(seed=st.integers(0, 2**31))
def test_nonnegative_data_stay_nonnegative(seed):
    g = regular_tree(3, 2)
    op = assemble_operator(build_mesh(ball(g, g.vertex_point(0), 2.0), 0.2))
    u0 = np.random.default_rng(seed).random(op.mesh.n_nodes)
    rep = maximum_principle_check(op, u0, 0.5, 10)
    assert rep.min_value >= -1e-12 and rep.violation <= 1e-10
