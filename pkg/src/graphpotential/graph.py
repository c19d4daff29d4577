"""Metric graphs, points on them, the path metric and Gromov geometry.

A :class:`MetricGraph` is a combinatorial graph whose edges carry positive
lengths.  Points live on edges as ``(edge, offset)`` pairs and are
canonicalised at vertices, so a vertex has exactly one representation no
matter which incident edge was used to reach it.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components, dijkstra

from .errors import (
    Disconnected,
    InvalidLength,
    InvalidPoint,
    PreconditionError,
    SampleTooSmall,
    UnsupportedFamily,
)

SNAP = 1e-12


@dataclass(frozen=True)
class Truncation:
    """Finite ball standing in for an infinite graph: ``B(center, radius)``."""

    center: int
    radius: float


@dataclass(frozen=True, order=True)
class GraphPoint:
    """A location on a metric graph.

    Build points through :meth:`MetricGraph.point` or
    :meth:`MetricGraph.vertex_point`; both canonicalise vertex locations to
    the lowest-id incident edge so that equality is representation free.
    """

    edge: int
    offset: float
    vertex: int | None = field(default=None, compare=False)

    @property
    def is_vertex(self) -> bool:
        return self.vertex is not None


class MetricGraph:
    """Connected, locally finite graph with positive edge lengths.

    Parameters
    ----------
    n_vertices : int
        Vertices are ``0 .. n_vertices-1``.
    edges : sequence of (i, t, length)
        Initial vertex, terminal vertex and length of each edge.
    truncation : Truncation, optional
        Set when the graph is a finite ball cut out of an infinite family.
    name : str
        Free-form label, used in reports.
    """

    def __init__(self, n_vertices: int, edges, truncation: Truncation | None = None, name: str = ""):
        edges = list(edges)
        self.n_vertices = int(n_vertices)
        self.truncation = truncation
        self.name = name
        if self.n_vertices < 1:
            raise PreconditionError("a metric graph needs at least one vertex")
        if not edges:
            if self.n_vertices > 1:
                raise Disconnected("graph without edges has isolated vertices")
            raise PreconditionError("a metric graph needs at least one edge")
        ends = np.array([(int(i), int(t)) for i, t, _ in edges], dtype=np.int64)
        lengths = np.array([float(l) for _, _, l in edges], dtype=float)
        if not np.all(np.isfinite(lengths)) or np.any(lengths <= 0):
            raise InvalidLength("edge lengths must be positive and finite")
        if ends.min() < 0 or ends.max() >= self.n_vertices:
            raise PreconditionError("edge endpoint references a missing vertex")
        if np.any(ends[:, 0] == ends[:, 1]):
            raise PreconditionError("self-loops are not supported")
        self.ends = ends
        self.lengths = lengths
        self.ends.setflags(write=False)
        self.lengths.setflags(write=False)

        incident: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for e, (i, t) in enumerate(ends):
            incident[i].append(e)
            incident[t].append(e)
        self.incident = tuple(tuple(sorted(lst)) for lst in incident)

        # parallel edges: keep the shortest for the vertex metric
        w: dict[tuple[int, int], float] = {}
        for (i, t), l in zip(ends.tolist(), lengths.tolist()):
            key = (i, t) if i < t else (t, i)
            w[key] = min(l, w.get(key, math.inf))
        rows = [k[0] for k in w] + [k[1] for k in w]
        cols = [k[1] for k in w] + [k[0] for k in w]
        vals = list(w.values()) * 2
        self._csr = sp.csr_matrix((vals, (rows, cols)), shape=(self.n_vertices, self.n_vertices))
        ncomp, _ = connected_components(self._csr, directed=False)
        if ncomp != 1:
            raise Disconnected(f"graph has {ncomp} connected components")
        self._dist_cache: dict[int, np.ndarray] = {}

    # -- basic data -------------------------------------------------------
    @property
    def n_edges(self) -> int:
        return len(self.lengths)

    @property
    def l_min(self) -> float:
        return float(self.lengths.min())

    @property
    def l_max(self) -> float:
        return float(self.lengths.max())

    @property
    def total_length(self) -> float:
        return float(self.lengths.sum())

    def degree(self, v: int) -> int:
        return len(self.incident[v])

    def other_end(self, e: int, v: int) -> int:
        i, t = self.ends[e]
        return int(t) if v == i else int(i)

    def __repr__(self):
        return f"MetricGraph({self.name or 'explicit'}, V={self.n_vertices}, E={self.n_edges})"

    # -- points ----------------------------------------------------------
    def vertex_point(self, v: int) -> GraphPoint:
        if not 0 <= v < self.n_vertices:
            raise InvalidPoint(f"vertex {v} not in graph")
        e = self.incident[v][0]
        off = 0.0 if self.ends[e, 0] == v else float(self.lengths[e])
        return GraphPoint(e, off, v)

    def point(self, edge: int, offset: float) -> GraphPoint:
        if not 0 <= edge < self.n_edges:
            raise InvalidPoint(f"edge {edge} not in graph")
        l = float(self.lengths[edge])
        if not (-SNAP <= offset <= l + SNAP):
            raise InvalidPoint(f"offset {offset} outside [0, {l}] on edge {edge}")
        if abs(offset) <= SNAP:
            return self.vertex_point(int(self.ends[edge, 0]))
        if abs(offset - l) <= SNAP:
            return self.vertex_point(int(self.ends[edge, 1]))
        return GraphPoint(int(edge), float(offset))

    def check_point(self, p: GraphPoint) -> GraphPoint:
        if not isinstance(p, GraphPoint):
            raise InvalidPoint(f"not a GraphPoint: {p!r}")
        return self.point(p.edge, p.offset)

    def anchors(self, p: GraphPoint) -> list[tuple[int, float]]:
        """Vertices through which ``p`` reaches the rest of the graph, with distances."""
        p = self.check_point(p)
        if p.is_vertex:
            return [(p.vertex, 0.0)]
        i, t = self.ends[p.edge]
        return [(int(i), p.offset), (int(t), float(self.lengths[p.edge]) - p.offset)]

    # -- metric ----------------------------------------------------------
    def vertex_distances(self, v: int) -> np.ndarray:
        """Distances from vertex ``v`` to every vertex (cached)."""
        d = self._dist_cache.get(v)
        if d is None:
            d = dijkstra(self._csr, directed=False, indices=v)
            d.setflags(write=False)
            self._dist_cache[v] = d
        return d

    def point_vertex_distances(self, p: GraphPoint) -> np.ndarray:
        """Distances from the point ``p`` to every vertex."""
        out = None
        for v, s in self.anchors(p):
            d = self.vertex_distances(v) + s
            out = d if out is None else np.minimum(out, d)
        return out

    def along_edge(self, p: GraphPoint, e: int, s: np.ndarray | float, dv: np.ndarray | None = None):
        """Distance from ``p`` to the points at offsets ``s`` on edge ``e``."""
        if dv is None:
            dv = self.point_vertex_distances(p)
        i, t = self.ends[e]
        l = self.lengths[e]
        s = np.asarray(s, dtype=float)
        d = np.minimum(dv[i] + s, dv[t] + l - s)
        if not p.is_vertex and p.edge == e:
            d = np.minimum(d, np.abs(s - p.offset))
        return d

    def sphere_points(self, x: GraphPoint, rho: float, tol: float = 1e-9) -> list[GraphPoint]:
        """All points at distance exactly ``rho`` from ``x``."""
        dv = self.point_vertex_distances(x)
        found = set()
        for e in range(self.n_edges):
            i, t = self.ends[e]
            l = self.lengths[e]
            cands = [rho - dv[i], l - (rho - dv[t])]
            if not x.is_vertex and x.edge == e:
                cands += [x.offset - rho, x.offset + rho]
            for s in cands:
                if -tol <= s <= l + tol:
                    s = min(max(s, 0.0), l)
                    if abs(self.along_edge(x, e, s, dv) - rho) <= tol:
                        p = self.point(e, s)
                        found.add((p.edge, round(p.offset, 9)))
        return sorted(GraphPoint(e, s) for e, s in found)

    def critical_radii(self, x: GraphPoint) -> np.ndarray:
        """Distances at which the sphere around ``x`` can change cardinality.

        These are the vertex distances plus the points where two geodesic
        fronts meet inside an edge.
        """
        dv = self.point_vertex_distances(x)
        radii = list(dv)
        i, t = self.ends[:, 0], self.ends[:, 1]
        meet = (dv[i] + dv[t] + self.lengths) / 2.0
        radii.extend(meet.tolist())
        if not x.is_vertex:
            radii.append(0.0)
        return np.unique(np.round(np.asarray(radii), 12))

    def max_sphere_count(self, x: GraphPoint, r0: float, r1: float) -> int:
        """Largest sphere cardinality on the midpoints between critical radii in ``[r0, r1]``."""
        crit = self.critical_radii(x)
        cuts = np.unique(np.concatenate([[r0, r1], crit[(crit > r0) & (crit < r1)]]))
        mids = 0.5 * (cuts[:-1] + cuts[1:])
        return max(len(self.sphere_points(x, float(m))) for m in mids)

    # -- serialisation ---------------------------------------------------
    def to_json(self) -> str:
        return json.dumps(
            {
                "vertices": self.n_vertices,
                "edges": [[int(i), int(t), float(l)] for (i, t), l in zip(self.ends, self.lengths)],
            }
        )

    @classmethod
    def from_json(cls, text: str, name: str = "file") -> "MetricGraph":
        data = json.loads(text)
        try:
            return cls(int(data["vertices"]), [tuple(e) for e in data["edges"]], name=name)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, PreconditionError):
                raise
            raise PreconditionError(f"malformed graph JSON: {exc}") from exc


# ---------------------------------------------------------------------------
# distances and geodesics


def distance(g: MetricGraph, p: GraphPoint, q: GraphPoint) -> float:
    """Length of a shortest path between two points."""
    p, q = g.check_point(p), g.check_point(q)
    if p == q:
        return 0.0
    best = math.inf
    for a, sa in g.anchors(p):
        da = g.vertex_distances(a)
        for b, sb in g.anchors(q):
            best = min(best, sa + da[b] + sb)
    if not p.is_vertex and not q.is_vertex and p.edge == q.edge:
        best = min(best, abs(p.offset - q.offset))
    return float(best)


def pairwise_distances(g: MetricGraph, points: Sequence[GraphPoint]) -> np.ndarray:
    pts = [g.check_point(p) for p in points]
    n = len(pts)
    D = np.zeros((n, n))
    for a in range(n):
        for b in range(a + 1, n):
            D[a, b] = D[b, a] = distance(g, pts[a], pts[b])
    return D


def common_edge(g: MetricGraph, p: GraphPoint, q: GraphPoint) -> int | None:
    """Id of an edge containing both points, or ``None``."""
    ep = {p.edge} if not p.is_vertex else set(g.incident[p.vertex])
    eq = {q.edge} if not q.is_vertex else set(g.incident[q.vertex])
    both = sorted(ep & eq)
    return both[0] if both else None


def _vertex_path(g: MetricGraph, a: int, b: int) -> list[int]:
    """Shortest vertex path a -> b; at each step back from ``b`` the lowest edge id wins."""
    da = g.vertex_distances(a)
    path = [b]
    v = b
    while v != a:
        tol = 1e-9 * max(1.0, da[v])
        for e in g.incident[v]:
            u = g.other_end(e, v)
            if abs(da[u] + g.lengths[e] - da[v]) <= tol:
                v = u
                break
        else:  # pragma: no cover - dijkstra guarantees a predecessor
            raise RuntimeError("broken shortest-path tree")
        path.append(v)
    return path[::-1]


def geodesic(g: MetricGraph, p: GraphPoint, q: GraphPoint) -> list[GraphPoint]:
    """Waypoints of a shortest path from ``p`` to ``q``.

    Consecutive waypoints share an edge.  Among equally short routes the
    choice is deterministic: anchor pairs are tried in order and vertex
    paths prefer the lowest edge id.
    """
    p, q = g.check_point(p), g.check_point(q)
    if p == q:
        return [p]
    target = distance(g, p, q)
    if not p.is_vertex and not q.is_vertex and p.edge == q.edge:
        if abs(abs(p.offset - q.offset) - target) <= 1e-12 * max(1.0, target):
            return [p, q]
    for a, sa in g.anchors(p):
        da = g.vertex_distances(a)
        for b, sb in g.anchors(q):
            if abs(sa + da[b] + sb - target) <= 1e-9 * max(1.0, target):
                pts = [p] + [g.vertex_point(v) for v in _vertex_path(g, a, b)] + [q]
                out = [pts[0]]
                for pt in pts[1:]:
                    if pt != out[-1]:
                        out.append(pt)
                return out
    raise RuntimeError("no geodesic found")  # pragma: no cover


def path_length(g: MetricGraph, waypoints: Sequence[GraphPoint]) -> float:
    total = 0.0
    for p, q in zip(waypoints, waypoints[1:]):
        e = common_edge(g, p, q)
        if e is None:
            raise InvalidPoint("consecutive waypoints do not share an edge")
        op = p.offset if p.edge == e else (0.0 if g.ends[e, 0] == p.vertex else g.lengths[e])
        oq = q.offset if q.edge == e else (0.0 if g.ends[e, 0] == q.vertex else g.lengths[e])
        total += abs(op - oq)
    return float(total)


def geodesic_ray(g: MetricGraph, start: int, steps: int) -> list[int]:
    """Vertex sequence of a geodesic ray leaving ``start``.

    Each step takes the lowest-id edge that increases the distance to
    ``start`` by its full length, so every prefix is a geodesic.
    """
    d = g.vertex_distances(start)
    ray = [start]
    v = start
    for _ in range(steps):
        for e in g.incident[v]:
            u = g.other_end(e, v)
            if abs(d[u] - d[v] - g.lengths[e]) <= 1e-9:
                v = u
                break
        else:
            raise PreconditionError(f"ray from {start} cannot be extended past {len(ray) - 1} steps")
        ray.append(v)
    return ray


# ---------------------------------------------------------------------------
# Gromov geometry


def gromov_product(g: MetricGraph, x: GraphPoint, y: GraphPoint, z: GraphPoint) -> float:
    """``(y|z)_x = (d(x,y) + d(x,z) - d(y,z)) / 2``."""
    val = 0.5 * (distance(g, x, y) + distance(g, x, z) - distance(g, y, z))
    return max(val, 0.0)


def _delta_from_matrix(D: np.ndarray) -> float:
    best = 0.0
    for w in range(len(D)):
        G = 0.5 * (D[w][:, None] + D[w][None, :] - D)
        # min((x|z)_w, (y|z)_w) over z, indexed [x, y, z]
        m = np.minimum(G[:, None, :], G[None, :, :]).max(axis=2)
        best = max(best, float((m - G).max()))
    return best


def delta_estimate(
    g: MetricGraph,
    sample: Sequence[GraphPoint],
    max_tuples: int | None = None,
    seed: int = 0,
) -> float:
    """Four-point hyperbolicity constant of a point sample.

    Returns the largest ``min((x|z)_w, (y|z)_w) - (x|y)_w`` over 4-tuples of
    the sample, floored at zero.  All tuples are used when there are at most
    ``max_tuples`` of them (default 2e7); otherwise that many are drawn.
    """
    if len(sample) < 4:
        raise SampleTooSmall("delta_estimate needs at least 4 points")
    D = pairwise_distances(g, sample)
    n = len(D)
    limit = 20_000_000 if max_tuples is None else max_tuples
    if n**4 <= limit:
        val = _delta_from_matrix(D)
    else:
        rng = np.random.default_rng(seed)
        w, x, y, z = rng.integers(0, n, size=(4, limit))
        gp = lambda a, b: 0.5 * (D[w, a] + D[w, b] - D[a, b])  # noqa: E731
        val = float((np.minimum(gp(x, z), gp(y, z)) - gp(x, y)).max())
    # exact arithmetic gives 0 on trees; drop roundoff
    return val if val > 1e-12 else 0.0


# ---------------------------------------------------------------------------
# builders


def path(n: int, length: float = 1.0) -> MetricGraph:
    if n < 2:
        raise PreconditionError("path needs at least 2 vertices")
    return MetricGraph(n, [(i, i + 1, length) for i in range(n - 1)], name=f"path({n})")


def cycle(n: int, length: float = 1.0) -> MetricGraph:
    if n < 3:
        raise PreconditionError("cycle needs at least 3 vertices")
    return MetricGraph(n, [(i, (i + 1) % n, length) for i in range(n)], name=f"cycle({n})")


def star(arms: int, length: float = 1.0) -> MetricGraph:
    """Center vertex 0 joined to ``arms`` leaves."""
    return MetricGraph(arms + 1, [(0, k + 1, length) for k in range(arms)], name=f"star({arms})")


def regular_tree(degree: int, depth: int, length: float = 1.0) -> MetricGraph:
    """Ball of combinatorial radius ``depth`` in the ``degree``-regular tree, rooted at 0."""
    if degree < 2 or depth < 1:
        raise PreconditionError("regular_tree needs degree >= 2 and depth >= 1")
    edges = []
    level = [0]
    n = 1
    for k in range(depth):
        nxt = []
        for v in level:
            for _ in range(degree if k == 0 else degree - 1):
                edges.append((v, n, length))
                nxt.append(n)
                n += 1
        level = nxt
    return MetricGraph(
        n, edges, truncation=Truncation(0, depth * length), name=f"regular_tree({degree},{depth})"
    )


def theta_tree(cycle_len: int = 6, depth: int = 2, length: float = 1.0) -> MetricGraph:
    """A cycle with a binary tree hanging from every cycle vertex.

    Equivalently a tree plus one extra edge closing a single cycle.
    """
    if cycle_len < 3:
        raise PreconditionError("theta_tree needs a cycle of length >= 3")
    edges = [(i, (i + 1) % cycle_len, length) for i in range(cycle_len)]
    n = cycle_len
    for root in range(cycle_len):
        level = [root]
        for k in range(depth):
            nxt = []
            for v in level:
                for _ in range(1 if k == 0 else 2):
                    edges.append((v, n, length))
                    nxt.append(n)
                    n += 1
            level = nxt
    return MetricGraph(n, edges, name=f"theta_tree({cycle_len},{depth})")


def _parse_group(group: str) -> tuple[int, ...]:
    """Factor orders of a free product; 0 stands for an infinite cyclic factor.

    Accepted forms: ``Z2*Z3``, ``Z/2*Z/3``, ``Z*Z``, ``F2``.
    """
    g = group.replace(" ", "").replace("/", "")
    if g.startswith("F") and g[1:].isdigit():
        k = int(g[1:])
        if k < 1:
            raise UnsupportedFamily(group)
        return (0,) * k
    orders = []
    for part in g.split("*"):
        if part == "Z":
            orders.append(0)
        elif part.startswith("Z") and part[1:].isdigit() and int(part[1:]) >= 2:
            orders.append(int(part[1:]))
        else:
            raise UnsupportedFamily(f"unsupported group factor {part!r} in {group!r}")
    if len(orders) < 1:
        raise UnsupportedFamily(group)
    return tuple(orders)


def _times(word: tuple, j: int, step: int, orders: tuple[int, ...]) -> tuple:
    """Right-multiply a normal form by the generator of factor ``j`` to the power ``step``."""
    p = orders[j]
    if word and word[-1][0] == j:
        e = word[-1][1] + step
        if p:
            e %= p
        return word[:-1] if e == 0 else word[:-1] + ((j, e),)
    e = step % p if p else step
    return word + ((j, e),)


def cayley_ball(group: str, radius: int, length: float = 1.0) -> MetricGraph:
    """Ball of radius ``radius`` around the identity in a Cayley graph.

    Supported groups are free products of cyclic groups (``Z2*Z3``) and free
    groups (``F2``), with one generator per factor.  Elements are handled
    as free-product normal forms: tuples of ``(factor, exponent)`` with no
    two adjacent syllables from the same factor.
    """
    orders = _parse_group(group)
    if radius < 1:
        raise PreconditionError("radius must be >= 1")
    index = {(): 0}
    dist = [0]
    frontier = [()]
    edges: dict[tuple, float] = {}
    for r in range(radius):
        nxt = []
        for w in frontier:
            for j, p in enumerate(orders):
                steps = (1,) if p == 2 else (1, -1)
                for s in steps:
                    u = _times(w, j, s, orders)
                    if u not in index:
                        index[u] = len(dist)
                        dist.append(r + 1)
                        nxt.append(u)
        frontier = nxt
    for w, a in index.items():
        for j, p in enumerate(orders):
            u = _times(w, j, 1, orders)
            b = index.get(u)
            if b is None or (dist[a] == radius and dist[b] == radius):
                continue
            key = (min(a, b), max(a, b), j) if p == 2 else (a, b, j)
            edges[key] = length
    return MetricGraph(
        len(dist),
        [(a, b, l) for (a, b, _), l in edges.items()],
        truncation=Truncation(0, radius * length),
        name=f"cayley_ball({group},{radius})",
    )


# ---------------------------------------------------------------------------
# spec strings


@dataclass(frozen=True)
class GraphSpec:
    """Declarative description of a graph: a family name plus parameters.

    String form: ``family:key=value,key=value`` e.g.
    ``regular_tree:degree=3,depth=4,length=1``.
    """

    family: str
    params: tuple[tuple[str, object], ...] = ()

    @classmethod
    def parse(cls, text: str) -> "GraphSpec":
        family, _, rest = text.strip().partition(":")
        params = []
        for item in filter(None, (s.strip() for s in rest.split(","))):
            key, eq, val = item.partition("=")
            if not eq:
                raise PreconditionError(f"bad graph parameter {item!r} in {text!r}")
            params.append((key.strip(), _coerce(val.strip())))
        return cls(family.strip(), tuple(params))

    @classmethod
    def from_dict(cls, data: dict) -> "GraphSpec":
        data = dict(data)
        family = data.pop("family")
        return cls(family, tuple(sorted(data.items())))

    def to_dict(self) -> dict:
        return {"family": self.family, **dict(self.params)}

    def __str__(self):
        body = ",".join(f"{k}={v}" for k, v in self.params)
        return f"{self.family}:{body}" if body else self.family


def _coerce(val: str):
    for conv in (int, float):
        try:
            return conv(val)
        except ValueError:
            pass
    return val


def build_graph(spec: GraphSpec | str) -> MetricGraph:
    """Build a test-family graph from a :class:`GraphSpec` or its string form."""
    if isinstance(spec, str):
        spec = GraphSpec.parse(spec)
    kw = dict(spec.params)
    fam = spec.family
    length = float(kw.pop("length", 1.0))
    if length <= 0:
        raise InvalidLength("length must be positive")
    known = {
        "path": ({"n"}, lambda: path(int(kw["n"]), length)),
        "cycle": ({"n"}, lambda: cycle(int(kw["n"]), length)),
        "star": ({"arms"}, lambda: star(int(kw.get("arms", 3)), length)),
        "regular_tree": ({"degree", "depth"}, lambda: regular_tree(int(kw["degree"]), int(kw["depth"]), length)),
        "theta_tree": ({"cycle_len", "depth"},
                       lambda: theta_tree(int(kw.get("cycle_len", 6)), int(kw.get("depth", 2)), length)),
        "cayley_ball": ({"group", "radius"}, lambda: cayley_ball(str(kw["group"]), int(kw["radius"]), length)),
        "file": ({"path"}, lambda: _from_file(str(kw["path"]))),
    }
    if fam not in known:
        raise UnsupportedFamily(f"unknown graph family {fam!r}")
    allowed, make = known[fam]
    extra = set(kw) - allowed
    if extra:
        raise PreconditionError(f"graph family {fam!r} does not take parameter(s) {sorted(extra)}")
    try:
        return make()
    except KeyError as exc:
        raise PreconditionError(f"graph family {fam!r} is missing parameter {exc}") from exc


def _from_file(path: str) -> MetricGraph:
    with open(path, encoding="utf-8") as fh:
        return MetricGraph.from_json(fh.read(), name=path)


def explicit(n_vertices: int, edges: Iterable[tuple[int, int, float]]) -> MetricGraph:
    return MetricGraph(n_vertices, list(edges), name="explicit")


def all_vertex_points(g: MetricGraph) -> list[GraphPoint]:
    return [g.vertex_point(v) for v in range(g.n_vertices)]


def edge_midpoints(g: MetricGraph) -> list[GraphPoint]:
    return [g.point(e, g.lengths[e] / 2) for e in range(g.n_edges)]


__all__ = [
    "GraphPoint",
    "GraphSpec",
    "MetricGraph",
    "Truncation",
    "all_vertex_points",
    "build_graph",
    "cayley_ball",
    "common_edge",
    "cycle",
    "delta_estimate",
    "distance",
    "edge_midpoints",
    "explicit",
    "geodesic",
    "geodesic_ray",
    "gromov_product",
    "pairwise_distances",
    "path",
    "path_length",
    "regular_tree",
    "star",
    "theta_tree",
]
