import itertools
import json
from collections import deque

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from graphpotential.errors import Disconnected, InvalidLength, InvalidPoint, SampleTooSmall, UnsupportedFamily
from graphpotential.graph import (
    GraphSpec,
    MetricGraph,
    all_vertex_points,
    build_graph,
    cayley_ball,
    cycle,
    delta_estimate,
    distance,
    edge_midpoints,
    explicit,
    geodesic,
    geodesic_ray,
    gromov_product,
    pairwise_distances,
    path,
    path_length,
    regular_tree,
    star,
    theta_tree,
)

TEST_GRAPHS = [
    path(5),
    cycle(7, 0.5),
    star(4, 1.5),
    regular_tree(3, 3),
    theta_tree(6, 2),
    cayley_ball("Z2*Z3", 4),
    explicit(4, [(0, 1, 1.0), (1, 2, 2.5), (2, 3, 0.7), (3, 0, 1.3), (0, 2, 3.0)]),
]


def random_point(g, data):
    e = data.draw(st.integers(0, g.n_edges - 1))
    s = data.draw(st.floats(0, 1))
    return g.point(e, s * g.lengths[e])


# -- oracles ------------------------------------------------------------------------------
def words_z2_z3(radius):
    """Normal forms of Z/2 * Z/3 with generators a, b, b^-1: alternating syllables a and b^(+-1)."""
    seen = {()}
    frontier = [()]
    for _ in range(radius):
        nxt = []
        for w in frontier:
            for s in ("a", "b", "B"):
                if w and (w[-1] == "a") == (s == "a"):
                    continue  # same factor twice would merge or cancel
                nxt.append(w + (s,))
        seen.update(nxt)
        frontier = nxt
    return seen


def brute_delta(D):
    n = len(D)
    best = 0.0
    for w, x, y, z in itertools.product(range(n), repeat=4):
        gp = lambda a, b: 0.5 * (D[w, a] + D[w, b] - D[a, b])  # noqa: E731
        best = max(best, min(gp(x, z), gp(y, z)) - gp(x, y))
    return best


def bfs_distances(adj, s):
    d = {s: 0}
    q = deque([s])
    while q:
        u = q.popleft()
        for v in adj[u]:
            if v not in d:
                d[v] = d[u] + 1
                q.append(v)
    return d


# -- construction -------------------------------------------------------------------------
def test_path_counts():
    g = path(3, 1.0)
    assert (g.n_vertices, g.n_edges, g.l_min, g.l_max) == (3, 2, 1.0, 1.0)


def test_regular_tree_vertex_count():
    for depth in range(1, 6):
        g = regular_tree(3, depth)
        assert g.n_vertices == 1 + 3 * (2**depth - 1)
        adj = {v: [] for v in range(g.n_vertices)}
        for i, t in g.ends:
            adj[int(i)].append(int(t))
            adj[int(t)].append(int(i))
        assert max(bfs_distances(adj, 0).values()) == depth


def test_cayley_ball_matches_word_enumeration():
    for r in (1, 2, 3, 4, 6):
        g = cayley_ball("Z2*Z3", r)
        assert g.n_vertices == len(words_z2_z3(r))
        assert g.truncation.radius == r
    assert cayley_ball("Z2*Z3", 4).n_edges == 25


def test_cayley_free_group_is_a_tree():
    g = cayley_ball("F2", 3)
    assert g.n_vertices == 1 + 4 * (3**3 - 1) // 2
    assert g.n_edges == g.n_vertices - 1


def test_builder_errors():
    with pytest.raises(InvalidLength):
        path(3, 0.0)
    with pytest.raises(InvalidLength):
        explicit(2, [(0, 1, -1.0)])
    with pytest.raises(Disconnected):
        explicit(4, [(0, 1, 1.0), (2, 3, 1.0)])
    with pytest.raises(UnsupportedFamily):
        cayley_ball("SL2Z", 3)
    with pytest.raises(UnsupportedFamily):
        build_graph("hypercube:n=3")


def test_spec_round_trip():
    spec = GraphSpec.parse("regular_tree:degree=3,depth=4,length=0.5")
    assert str(GraphSpec.parse(str(spec))) == str(spec)
    g = build_graph(spec)
    assert g.l_min == 0.5 and g.n_vertices == 46


def test_json_round_trip(tmp_path):
    g = TEST_GRAPHS[-1]
    text = g.to_json()
    assert set(json.loads(text)) >= {"vertices", "edges"}
    h = MetricGraph.from_json(text)
    assert np.array_equal(h.ends, g.ends) and np.array_equal(h.lengths, g.lengths)
    f = tmp_path / "g.json"
    f.write_text(text)
    assert build_graph(f"file:path={f}").n_edges == g.n_edges


# -- points and distances -------------------------------------------------------------------
def test_vertex_points_canonicalise():
    g = star(3)
    assert g.point(0, 0.0) == g.point(1, 0.0) == g.vertex_point(0)
    assert g.point(2, 1.0) == g.vertex_point(3)
    with pytest.raises(InvalidPoint):
        g.point(0, 1.5)
    with pytest.raises(InvalidPoint):
        g.vertex_point(9)


def test_distance_examples():
    g = path(3, 1.0)
    assert distance(g, g.point(0, 0.25), g.point(1, 0.5)) == pytest.approx(1.25, abs=1e-15)
    p = g.point(1, 0.3)
    assert distance(g, p, p) == 0.0
    tri = cycle(3, 1.0)
    assert distance(tri, tri.point(0, 0.5), tri.point(1, 0.5)) == pytest.approx(1.0, abs=1e-15)
    # both points on one edge of a cycle: the short way round can leave the edge
    c = cycle(3, 1.0)
    assert distance(c, c.point(0, 0.1), c.point(0, 0.9)) == pytest.approx(0.8)


@pytest.mark.parametrize("g", TEST_GRAPHS, ids=lambda g: g.name)
def test_metric_axioms_on_random_triples(g):
    rng = np.random.default_rng(1)
    pts = [g.point(int(e), float(s * g.lengths[e])) for e, s in zip(rng.integers(0, g.n_edges, 60), rng.random(60))]
    D = pairwise_distances(g, pts)
    assert np.array_equal(D, D.T)
    idx = rng.integers(0, len(pts), size=(1500, 3))
    i, j, k = idx.T
    assert np.all(D[i, k] <= D[i, j] + D[j, k] + 1e-12)
    assert np.all(np.diag(D) == 0)


@given(data=st.data(), gi=st.integers(0, len(TEST_GRAPHS) - 1))
def test_geodesic_length_equals_distance(data, gi):
    g = TEST_GRAPHS[gi]
    p, q = random_point(g, data), random_point(g, data)
    way = geodesic(g, p, q)
    assert way[0] == p and way[-1] == q
    assert path_length(g, way) == pytest.approx(distance(g, p, q), abs=1e-12)


def test_geodesic_examples():
    g = path(5)
    way = geodesic(g, g.point(0, 0.5), g.point(3, 0.5))
    assert [w.vertex for w in way[1:-1]] == [1, 2, 3]
    p = g.point(2, 0.4)
    assert geodesic(g, p, p) == [p]
    t = regular_tree(3, 5)
    leaves = [v for v in range(t.n_vertices) if t.degree(v) == 1]
    a, b = leaves[0], leaves[-1]
    way = geodesic(t, t.vertex_point(a), t.vertex_point(b))
    assert 0 in [w.vertex for w in way]  # leaves in different root branches meet at the root
    assert path_length(t, way) == 10.0


def test_geodesic_ray_is_geodesic():
    g = cayley_ball("Z2*Z3", 8)
    ray = geodesic_ray(g, 0, 8)
    d = g.vertex_distances(0)
    assert [d[v] for v in ray] == list(range(9))


# -- Gromov geometry -----------------------------------------------------------------------
def test_gromov_product_examples():
    g = path(6)
    x, y, z = g.vertex_point(0), g.vertex_point(5), g.vertex_point(2)
    assert gromov_product(g, x, y, z) == pytest.approx(distance(g, x, z))
    assert gromov_product(g, x, x, z) == 0.0
    c = cayley_ball("Z2*Z3", 4)
    rng = np.random.default_rng(3)
    adj = {v: [] for v in range(c.n_vertices)}
    for i, t in c.ends:
        adj[int(i)].append(int(t))
        adj[int(t)].append(int(i))
    for _ in range(20):
        a, b, w = (int(v) for v in rng.integers(0, c.n_vertices, 3))
        da, db = bfs_distances(adj, w), bfs_distances(adj, a)
        ref = 0.5 * (da[a] + da[b] - db[b])
        assert gromov_product(c, c.vertex_point(w), c.vertex_point(a), c.vertex_point(b)) == pytest.approx(ref)


def test_delta_trees_are_zero():
    t = regular_tree(3, 3)
    assert delta_estimate(t, all_vertex_points(t)) == 0.0
    with pytest.raises(SampleTooSmall):
        delta_estimate(t, all_vertex_points(t)[:3])


def test_delta_cycle_matches_exhaustive_oracle():
    g = cycle(12, 1.0)
    pts = all_vertex_points(g) + edge_midpoints(g)
    # independent distances: 24 equally spaced points on a circle of length 12
    pos = np.array([v * 1.0 for v in range(12)] + [e + 0.5 for e in range(12)])
    diff = np.abs(pos[:, None] - pos[None, :])
    D = np.minimum(diff, 12 - diff)
    assert np.allclose(pairwise_distances(g, pts), D)
    assert delta_estimate(g, pts) == pytest.approx(brute_delta(D), abs=1e-12)


def test_delta_theta_tree_matches_exhaustive_oracle():
    g = theta_tree(6, 1)
    pts = all_vertex_points(g)
    D = pairwise_distances(g, pts)
    assert delta_estimate(g, pts) == pytest.approx(brute_delta(D), abs=1e-12)


@given(data=st.data())
def test_four_point_condition_with_measured_delta(data):
    g = theta_tree(6, 1)
    pts = all_vertex_points(g)
    delta = delta_estimate(g, pts)
    w, x, y, z = (pts[data.draw(st.integers(0, len(pts) - 1))] for _ in range(4))
    lhs = gromov_product(g, w, x, y)
    assert lhs >= min(gromov_product(g, w, x, z), gromov_product(g, w, y, z)) - delta - 1e-12
