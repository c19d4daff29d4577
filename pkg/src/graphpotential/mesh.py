"""Uniform 1-D meshes on domains and the stiffness/mass pair of the Kirchhoff Laplacian.

For mesh neighbours ``u, v`` joined by a segment of length ``h`` the stiffness
matrix has ``A[u, v] = -1/h`` and ``A[u, u] = sum 1/h``; the lumped mass of a
node is half the total length of its incident segments.  ``f @ A @ g`` is the
Dirichlet energy of the piecewise-linear interpolants and ``-M^{-1} A`` is the
discrete Laplacian.  At a graph vertex the row of ``A`` is the discrete flux
balance, which is how the Kirchhoff condition enters.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .domain import Domain
from .errors import (
    EmptyDomain,
    GridMismatch,
    NonUniformMesh,
    StepTooLarge,
    ZeroVector,
)
from .graph import SNAP, GraphPoint


@dataclass(frozen=True, eq=False)
class Mesh:
    """Nodes, segments and lumped masses of a subdivided domain.

    Attributes
    ----------
    node_edge, node_offset : arrays
        Geometric location of each node (vertex nodes use their canonical point).
    node_vertex : array
        Graph vertex of a node, ``-1`` for edge-interior nodes.
    seg_u, seg_v, seg_len : arrays
        Segments between consecutive nodes.
    mass : array
        Lumped node masses.
    boundary : bool array
        Dirichlet boundary flags (domain cut points).
    perturbation : float
        Largest per-interval change in length introduced by snapping to ``h``.
    """

    domain: Domain
    h: float
    node_edge: np.ndarray
    node_offset: np.ndarray
    node_vertex: np.ndarray
    seg_u: np.ndarray
    seg_v: np.ndarray
    seg_len: np.ndarray
    seg_edge: np.ndarray
    mass: np.ndarray
    boundary: np.ndarray
    snapped: bool = False
    perturbation: float = 0.0
    _lookup: dict = field(default_factory=dict, repr=False)

    @property
    def n_nodes(self) -> int:
        return len(self.mass)

    @property
    def interior(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary)

    @property
    def total_mass(self) -> float:
        return float(self.mass.sum())

    @property
    def uniform_step(self) -> float | None:
        """Common segment length if all segments agree to 1e-12, else ``None``."""
        s = self.seg_len
        return float(s[0]) if np.all(np.abs(s - s[0]) <= 1e-12) else None

    @cached_property
    def neighbors(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR-style adjacency ``(indptr, indices)``; neighbour lists sorted by node id."""
        n = self.n_nodes
        rows = np.concatenate([self.seg_u, self.seg_v])
        cols = np.concatenate([self.seg_v, self.seg_u])
        order = np.lexsort((cols, rows))
        rows, cols = rows[order], cols[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        return np.cumsum(indptr), cols.astype(np.int64)

    def node_at(self, p: GraphPoint, tol: float | None = None) -> int:
        """Index of the node sitting at ``p``; raises :class:`GridMismatch` otherwise."""
        g = self.domain.graph
        p = g.check_point(p)
        if p.is_vertex:
            k = self._lookup["vertex"].get(p.vertex)
            if k is None:
                raise GridMismatch(f"vertex {p.vertex} is not a mesh node")
            return k
        offs, ids = self._lookup["edge"].get(p.edge, (np.empty(0), np.empty(0, dtype=int)))
        if tol is None:
            tol = 1e-9 * max(1.0, float(g.lengths[p.edge]))
        j = np.searchsorted(offs, p.offset)
        for c in (j - 1, j):
            if 0 <= c < len(offs) and abs(offs[c] - p.offset) <= tol:
                return int(ids[c])
        raise GridMismatch(f"no mesh node at edge {p.edge} offset {p.offset}")

    def point_of(self, k: int) -> GraphPoint:
        g = self.domain.graph
        if self.node_vertex[k] >= 0:
            return g.vertex_point(int(self.node_vertex[k]))
        return g.point(int(self.node_edge[k]), float(self.node_offset[k]))

    def nodes_within(self, center: GraphPoint, r: float, closed: bool = False) -> np.ndarray:
        """Nodes whose distance to ``center`` is below ``r`` (at most ``r`` if ``closed``)."""
        d = self.distances_from(center)
        tol = 1e-9
        return np.flatnonzero(d <= r + tol) if closed else np.flatnonzero(d < r - tol)

    def distances_from(self, center: GraphPoint) -> np.ndarray:
        """Graph distance from ``center`` to every node."""
        g = self.domain.graph
        dv = g.point_vertex_distances(g.check_point(center))
        d = np.empty(self.n_nodes)
        for e in np.unique(self.node_edge):
            sel = self.node_edge == e
            d[sel] = g.along_edge(center, int(e), self.node_offset[sel], dv)
        vsel = self.node_vertex >= 0
        d[vsel] = dv[self.node_vertex[vsel]]
        return d


def build_mesh(domain: Domain, h_target: float, snap: bool = False) -> Mesh:
    """Subdivide every resolved interval of ``domain`` into equal segments.

    An interval of length ``L`` gets ``n = max(2, ceil(L / h_target))``
    segments.  With ``snap=False`` each has length ``L / n`` (exact measure);
    with ``snap=True`` each has length exactly ``h_target``, which makes the
    step globally uniform at the price of stretching the interval to
    ``n * h_target``.  The largest stretch is kept in ``perturbation``.
    """
    g = domain.graph
    if h_target <= 0 or h_target > g.l_min / 2 + SNAP:
        raise StepTooLarge(f"h={h_target} must be in (0, l_min/2 = {g.l_min / 2}]")
    if not domain.intervals:
        raise EmptyDomain("empty domain")

    node_edge: list[int] = []
    node_off: list[float] = []
    node_vert: list[int] = []
    keys: dict = {}

    def node(key, e, off, v):
        k = keys.get(key)
        if k is None:
            k = len(node_edge)
            keys[key] = k
            if v >= 0:
                p = g.vertex_point(v)
                e, off = p.edge, p.offset
            node_edge.append(e)
            node_off.append(off)
            node_vert.append(v)
        return k

    seg_u, seg_v, seg_len, seg_edge = [], [], [], []
    boundary_keys = set()
    perturb = 0.0
    for e in sorted(domain.intervals):
        l = float(g.lengths[e])
        i, t = int(g.ends[e, 0]), int(g.ends[e, 1])
        for lo, hi in domain.intervals[e]:
            L = hi - lo
            n = max(2, math.ceil(L / h_target - 1e-9))
            step = h_target if snap else L / n
            perturb = max(perturb, abs(n * step - L))
            ends = []
            for off, v in ((lo, i), (hi, t)):
                at_vertex = off <= SNAP or off >= l - SNAP
                if at_vertex:
                    key = ("v", v)
                    k = node(key, e, off, v)
                else:
                    key = ("p", e, round(off, 10))
                    k = node(key, e, off, -1)
                if not (at_vertex and v in domain.vertices):
                    boundary_keys.add(k)
                ends.append(k)
            prev = ends[0]
            for j in range(1, n):
                k = len(node_edge)
                node_edge.append(e)
                node_off.append(lo + j * L / n)
                node_vert.append(-1)
                seg_u.append(prev)
                seg_v.append(k)
                prev = k
            seg_u.append(prev)
            seg_v.append(ends[1])
            seg_len.extend([step] * n)
            seg_edge.extend([e] * n)

    nn = len(node_edge)
    seg_u_a = np.array(seg_u, dtype=np.int64)
    seg_v_a = np.array(seg_v, dtype=np.int64)
    seg_len_a = np.array(seg_len)
    mass = np.zeros(nn)
    np.add.at(mass, seg_u_a, seg_len_a / 2)
    np.add.at(mass, seg_v_a, seg_len_a / 2)
    boundary = np.zeros(nn, dtype=bool)
    boundary[list(boundary_keys)] = True

    node_edge_a = np.array(node_edge, dtype=np.int64)
    node_off_a = np.array(node_off)
    node_vert_a = np.array(node_vert, dtype=np.int64)
    lookup = {"vertex": {int(v): k for k, v in enumerate(node_vert) if v >= 0}, "edge": {}}
    # a vertex node also sits at offset 0 or l of its other meshed incident edges
    ex_e, ex_off, ex_id = [], [], []
    for v, k in lookup["vertex"].items():
        for e in g.incident[v]:
            if e in domain.intervals and node_edge[k] != e:
                ex_e.append(e)
                ex_off.append(0.0 if g.ends[e, 0] == v else float(g.lengths[e]))
                ex_id.append(k)
    all_e = np.concatenate([node_edge_a, np.array(ex_e, dtype=np.int64)])
    all_off = np.concatenate([node_off_a, np.array(ex_off)])
    all_id = np.concatenate([np.arange(nn), np.array(ex_id, dtype=np.int64)])
    order = np.lexsort((all_off, all_e))
    all_e, all_off, all_id = all_e[order], all_off[order], all_id[order]
    uniq, starts = np.unique(all_e, return_index=True)
    bounds = list(starts) + [len(all_e)]
    for e, a, b in zip(uniq.tolist(), bounds[:-1], bounds[1:]):
        lookup["edge"][e] = (all_off[a:b], all_id[a:b])

    return Mesh(
        domain=domain,
        h=float(h_target),
        node_edge=node_edge_a,
        node_offset=node_off_a,
        node_vertex=node_vert_a,
        seg_u=seg_u_a,
        seg_v=seg_v_a,
        seg_len=seg_len_a,
        seg_edge=np.array(seg_edge, dtype=np.int64),
        mass=mass,
        boundary=boundary,
        snapped=snap,
        perturbation=perturb,
        _lookup=lookup,
    )


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    """Stiffness matrix ``A`` and lumped mass ``M`` on the active nodes of a mesh.

    ``nodes`` lists the mesh nodes that carry a row (all nodes, or the
    interior ones when Dirichlet conditions are applied); ``row_of`` maps a
    mesh node to its row or ``-1``.
    """

    mesh: Mesh
    A: sp.csr_matrix
    M: np.ndarray
    dirichlet: bool
    nodes: np.ndarray
    row_of: np.ndarray
    A_full: sp.csr_matrix
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def size(self) -> int:
        return len(self.M)

    def row(self, node: int) -> int:
        r = int(self.row_of[node])
        if r < 0:
            raise GridMismatch(f"mesh node {node} is not an active (interior) node")
        return r

    def lift(self, f: np.ndarray) -> np.ndarray:
        """Extend a row vector to all mesh nodes, zero on removed (boundary) nodes."""
        out = np.zeros(self.mesh.n_nodes)
        out[self.nodes] = f
        return out

    @property
    def lambda1(self) -> float:
        """Smallest eigenvalue of the pencil ``(A, M)`` (computed once)."""
        if "lambda1" not in self._cache:
            from .spectral import dirichlet_eigensystem

            self._cache["lambda1"] = float(dirichlet_eigensystem(self, 1, require_dirichlet=False).eigenvalues[0])
        return self._cache["lambda1"]


def assemble_operator(mesh: Mesh, dirichlet: bool = True) -> DiscreteOperator:
    """Assemble ``A`` and ``M``; with ``dirichlet`` the boundary rows/columns are removed."""
    n = mesh.n_nodes
    w = 1.0 / mesh.seg_len
    u, v = mesh.seg_u, mesh.seg_v
    rows = np.concatenate([u, v, u, v])
    cols = np.concatenate([u, v, v, u])
    vals = np.concatenate([w, w, -w, -w])
    A_full = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    A_full.sum_duplicates()
    if dirichlet:
        nodes = mesh.interior
    else:
        nodes = np.arange(n)
    row_of = -np.ones(n, dtype=np.int64)
    row_of[nodes] = np.arange(len(nodes))
    A = A_full[nodes][:, nodes].tocsr()
    # exact symmetry: average away any assembly-order asymmetry
    A = ((A + A.T) * 0.5).tocsr()
    return DiscreteOperator(mesh, A, mesh.mass[nodes].copy(), dirichlet, nodes, row_of, A_full)


def rayleigh_quotient(op: DiscreteOperator, f: np.ndarray) -> float:
    """``f^T A f / f^T M f`` for a vector on the active nodes."""
    f = np.asarray(f, dtype=float)
    den = float(f @ (op.M * f))
    if den == 0.0:
        raise ZeroVector("Rayleigh quotient of the zero vector")
    return float(f @ (op.A @ f)) / den


def require_uniform(mesh: Mesh) -> float:
    h = mesh.uniform_step
    if h is None:
        raise NonUniformMesh("a globally uniform step is required; build the mesh with snap=True")
    return h


def export_coo(op: DiscreteOperator, matrix_path, mass_path) -> None:
    """Write ``A`` as ``row,col,value`` lines and ``M`` as one value per line."""
    coo = op.A.tocoo()
    with open(matrix_path, "w", encoding="utf-8") as fh:
        fh.write("row,col,value\n")
        for r, c, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{r},{c},{v:.17g}\n")
    with open(mass_path, "w", encoding="utf-8") as fh:
        fh.write("row,node,mass\n")
        for r, (node, m) in enumerate(zip(op.nodes, op.M)):
            fh.write(f"{r},{node},{m:.17g}\n")
