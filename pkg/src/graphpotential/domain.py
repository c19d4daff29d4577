"""Open subsets of a metric graph: unions of balls with closed balls removed.

A :class:`Domain` is stored in resolved form: on every edge a sorted tuple
of disjoint open offset intervals, plus the set of graph vertices that lie
inside the domain.  An interval endpoint at an offset of ``0`` or the edge
length is joined to the vertex there when that vertex is included, and is
a boundary (cut) point otherwise.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import EmptyDomain, PreconditionError, RadiusExceedsTruncation
from .graph import SNAP, GraphPoint, MetricGraph

Intervals = dict[int, tuple[tuple[float, float], ...]]


def _merge_open(ivs: Iterable[tuple[float, float]]) -> tuple[tuple[float, float], ...]:
    """Union of open intervals; touching intervals stay separate (the shared point is missing)."""
    out: list[list[float]] = []
    for lo, hi in sorted(ivs):
        if hi - lo <= SNAP:
            continue
        if out and lo < out[-1][1] - SNAP:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return tuple((a, b) for a, b in out)


def _subtract_closed(ivs, closed) -> tuple[tuple[float, float], ...]:
    pieces = list(ivs)
    for p, q in closed:
        nxt = []
        for lo, hi in pieces:
            if q <= lo - SNAP or p >= hi + SNAP:
                nxt.append((lo, hi))
                continue
            if p - lo > SNAP:
                nxt.append((lo, p))
            if hi - q > SNAP:
                nxt.append((q, hi))
        pieces = nxt
    return _merge_open(pieces)


@dataclass(frozen=True, eq=False)
class Domain:
    """Precompact open region of a metric graph.

    ``balls`` and ``holes`` record the constructive description (they are
    empty for domains produced by set operations); ``intervals`` and
    ``vertices`` are the resolved form everything else works from.
    """

    graph: MetricGraph
    intervals: Intervals
    vertices: frozenset
    balls: tuple = ()
    holes: tuple = ()
    anchor: GraphPoint | None = None
    _components: list = field(default=None, repr=False)

    def __post_init__(self):
        if not any(self.intervals.values()):
            raise EmptyDomain("domain has no interior")

    # -- geometry ------------------------------------------------------------
    @property
    def measure(self) -> float:
        return float(sum(hi - lo for ivs in self.intervals.values() for lo, hi in ivs))

    def _end_kind(self, e: int, off: float):
        """``('v', vertex)`` for an included vertex endpoint, else ``None``."""
        g = self.graph
        if off <= SNAP and int(g.ends[e, 0]) in self.vertices:
            return int(g.ends[e, 0])
        if off >= g.lengths[e] - SNAP and int(g.ends[e, 1]) in self.vertices:
            return int(g.ends[e, 1])
        return None

    @property
    def boundary(self) -> tuple[GraphPoint, ...]:
        """Cut points: interval endpoints that are not included vertices."""
        g = self.graph
        pts = {}
        for e, ivs in self.intervals.items():
            for lo, hi in ivs:
                for off in (lo, hi):
                    if self._end_kind(e, off) is None:
                        p = g.point(e, off)
                        pts[(p.edge, round(p.offset, 10))] = p
        return tuple(pts[k] for k in sorted(pts))

    def contains(self, p: GraphPoint) -> bool:
        p = self.graph.check_point(p)
        if p.is_vertex:
            return p.vertex in self.vertices
        return any(lo < p.offset < hi for lo, hi in self.intervals.get(p.edge, ()))

    def closure_contains(self, p: GraphPoint) -> bool:
        p = self.graph.check_point(p)
        g = self.graph
        if p.is_vertex:
            if p.vertex in self.vertices:
                return True
            for e in g.incident[p.vertex]:
                off = 0.0 if g.ends[e, 0] == p.vertex else g.lengths[e]
                if any(lo - SNAP <= off <= hi + SNAP for lo, hi in self.intervals.get(e, ())):
                    return True
            return False
        return any(lo - SNAP <= p.offset <= hi + SNAP for lo, hi in self.intervals.get(p.edge, ()))

    # -- connectivity ------------------------------------------------------
    def _resolve_components(self):
        labels: dict = {}
        for e, ivs in self.intervals.items():
            for k in range(len(ivs)):
                labels[("i", e, k)] = len(labels)
        for v in self.vertices:
            labels[("v", v)] = len(labels)
        rows, cols = [], []
        for e, ivs in self.intervals.items():
            for k, (lo, hi) in enumerate(ivs):
                for off in (lo, hi):
                    v = self._end_kind(e, off)
                    if v is not None:
                        rows.append(labels[("i", e, k)])
                        cols.append(labels[("v", v)])
        n = len(labels)
        adj = sp.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
        _, lab = connected_components(adj, directed=False)
        groups: dict = {}
        for key, idx in labels.items():
            groups.setdefault(int(lab[idx]), []).append(key)
        comps = [
            {
                "intervals": sorted((k[1], k[2]) for k in s if k[0] == "i"),
                "vertices": sorted(k[1] for k in s if k[0] == "v"),
            }
            for s in groups.values()
        ]
        comps.sort(key=lambda c: (c["intervals"][0] if c["intervals"] else (-1, -1)))
        return comps

    @property
    def components(self) -> list[dict]:
        if self._components is None:
            object.__setattr__(self, "_components", self._resolve_components())
        return self._components

    @property
    def connected(self) -> bool:
        return len(self.components) == 1

    def component_of(self, p: GraphPoint) -> int | None:
        p = self.graph.check_point(p)
        for k, c in enumerate(self.components):
            if p.is_vertex and p.vertex in c["vertices"]:
                return k
            if not p.is_vertex:
                for e, j in c["intervals"]:
                    lo, hi = self.intervals[e][j]
                    if e == p.edge and lo < p.offset < hi:
                        return k
        return None

    # -- set algebra ---------------------------------------------------------
    def union(self, other: "Domain") -> "Domain":
        edges = set(self.intervals) | set(other.intervals)
        ivs = {e: _merge_open(self.intervals.get(e, ()) + other.intervals.get(e, ())) for e in edges}
        return _finish(self.graph, ivs, self.vertices | other.vertices, anchor=self.anchor)

    def intersection(self, other: "Domain") -> "Domain":
        ivs = {}
        for e in set(self.intervals) & set(other.intervals):
            pieces = []
            for a, b in self.intervals[e]:
                for c, d in other.intervals[e]:
                    lo, hi = max(a, c), min(b, d)
                    if hi - lo > SNAP:
                        pieces.append((lo, hi))
            ivs[e] = _merge_open(pieces)
        return _finish(self.graph, ivs, self.vertices & other.vertices, anchor=self.anchor)

    def minus_closure(self, other: "Domain") -> "Domain":
        """``self`` with the closure of ``other`` removed."""
        ivs = {
            e: _subtract_closed(self.intervals[e], other.intervals.get(e, ()))
            for e in self.intervals
        }
        verts = frozenset(
            v for v in self.vertices if not other.closure_contains(self.graph.vertex_point(v))
        )
        return _finish(self.graph, ivs, verts, anchor=self.anchor)

    def describe(self) -> dict:
        return {
            "balls": [[p.edge, p.offset, r] for p, r in self.balls],
            "holes": [[p.edge, p.offset, r] for p, r in self.holes],
            "measure": self.measure,
            "components": len(self.components),
        }


def _finish(g, ivs, verts, anchor=None, balls=(), holes=()) -> Domain:
    ivs = {e: v for e, v in ivs.items() if v}
    return Domain(g, ivs, frozenset(verts), tuple(balls), tuple(holes), anchor)


def _ball_parts(g: MetricGraph, center: GraphPoint, r: float):
    """Open intervals and vertices of the open ball ``B(center, r)``."""
    dv = g.point_vertex_distances(center)
    ivs: Intervals = {}
    near = (dv[g.ends[:, 0]] < r) | (dv[g.ends[:, 1]] < r)
    if not center.is_vertex:
        near[center.edge] = True
    for e in np.flatnonzero(near).tolist():
        i, t = g.ends[e]
        l = float(g.lengths[e])
        pieces = []
        if r - dv[i] > 0:
            pieces.append((0.0, min(l, r - dv[i])))
        if r - dv[t] > 0:
            pieces.append((max(0.0, l - (r - dv[t])), l))
        if not center.is_vertex and center.edge == e:
            pieces.append((max(0.0, center.offset - r), min(l, center.offset + r)))
        if pieces:
            ivs[e] = _merge_open(pieces)
    verts = frozenset(int(v) for v in np.flatnonzero(dv < r - SNAP))
    return ivs, verts


def ball(g: MetricGraph, center: GraphPoint, r: float) -> Domain:
    if r <= 0:
        raise PreconditionError("ball radius must be positive")
    center = g.check_point(center)
    ivs, verts = _ball_parts(g, center, r)
    return _finish(g, ivs, verts, anchor=center, balls=((center, r),))


def make_domain(
    g: MetricGraph,
    balls: Sequence[tuple[GraphPoint, float]],
    holes: Sequence[tuple[GraphPoint, float]] = (),
) -> Domain:
    """Union of open balls minus a finite set of closed balls.

    The anchor (used for the connectivity flag) is the first ball center.
    """
    if not balls:
        raise EmptyDomain("at least one ball is required")
    dom = None
    for c, r in balls:
        b = ball(g, c, r)
        dom = b if dom is None else dom.union(b)
    for c, r in holes:
        if r <= 0:
            raise PreconditionError("hole radius must be positive")
        dom = dom.minus_closure(ball(g, c, r))
    anchor = g.check_point(balls[0][0])
    return Domain(
        g,
        dom.intervals,
        dom.vertices,
        tuple((g.check_point(c), float(r)) for c, r in balls),
        tuple((g.check_point(c), float(r)) for c, r in holes),
        anchor,
    )


def whole_graph(g: MetricGraph, boundary_vertices: Iterable[int] = ()) -> Domain:
    """The entire graph as a domain, optionally with some vertices cut out as boundary."""
    cut = set(boundary_vertices)
    ivs = {e: ((0.0, float(g.lengths[e])),) for e in range(g.n_edges)}
    verts = frozenset(set(range(g.n_vertices)) - cut)
    return Domain(g, ivs, verts, anchor=g.vertex_point(min(verts)) if verts else None)


def check_truncation(g: MetricGraph, center: GraphPoint, r: float, margin: float = 0.0) -> None:
    """Raise if ``B(center, r + margin)`` leaves the truncation ball of ``g``."""
    tr = g.truncation
    if tr is None:
        return
    d = g.point_vertex_distances(center)[tr.center]
    if d + r + margin > tr.radius + 1e-9:
        raise RadiusExceedsTruncation(
            f"ball of radius {r} (+margin {margin}) at distance {d} from the truncation center "
            f"exceeds truncation radius {tr.radius}"
        )
