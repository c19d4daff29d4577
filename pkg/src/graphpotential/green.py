"""Relative and global lambda-Green functions, Martin kernels and Harnack measurements.

The discrete Green function with pole ``y`` solves ``(A - lam M) g = e_y``
with a unit source (no mass normalisation), which is the weak form
``E(g, f) - lam (g, f) = f(y)`` tested against mesh hat functions.
"""
from __future__ import annotations

import math
import weakref
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .domain import Domain, ball, check_truncation, make_domain
from .errors import (
    GridMismatch,
    LambdaAboveSpectrum,
    NonConverged,
    PoleCollision,
    PoleInsideEnlargedBall,
    PreconditionError,
    SolveFailure,
    SpectralBarrier,
)
from .graph import GraphPoint, MetricGraph, distance
from .mesh import DiscreteOperator, Mesh, assemble_operator, build_mesh

BARRIER_GAP = 1e-9


# -- operator cache -----------------------------------------------------------
_OPS: "weakref.WeakKeyDictionary[MetricGraph, OrderedDict]" = weakref.WeakKeyDictionary()
_OPS_PER_GRAPH = 6


def domain_operator(
    g: MetricGraph,
    balls: Sequence[tuple[GraphPoint, float]],
    h: float,
    holes: Sequence[tuple[GraphPoint, float]] = (),
) -> DiscreteOperator:
    """Dirichlet operator of ``make_domain(g, balls, holes)`` at step ``h``, memoised per graph."""
    key = (tuple((g.check_point(c), float(r)) for c, r in balls),
           tuple((g.check_point(c), float(r)) for c, r in holes), float(h))
    cache = _OPS.setdefault(g, OrderedDict())
    if key in cache:
        cache.move_to_end(key)
        return cache[key]
    op = assemble_operator(build_mesh(make_domain(g, balls, holes), h), dirichlet=True)
    cache[key] = op
    while len(cache) > _OPS_PER_GRAPH:
        cache.popitem(last=False)
    return op


def ball_operator(g: MetricGraph, center: GraphPoint, R: float, h: float) -> DiscreteOperator:
    check_truncation(g, center, R)
    return domain_operator(g, [(center, R)], h)


def snap_node(mesh: Mesh, p: GraphPoint) -> tuple[int, float]:
    """Mesh node at ``p``, or the nearest node on the same edge with its distance."""
    try:
        return mesh.node_at(p), 0.0
    except GridMismatch:
        pass
    g = mesh.domain.graph
    p = g.check_point(p)
    if p.is_vertex:
        raise GridMismatch(f"vertex {p.vertex} is not inside the meshed domain")
    sel = np.flatnonzero(mesh.node_edge == p.edge)
    if len(sel) == 0:
        raise GridMismatch(f"edge {p.edge} is not meshed")
    d = np.abs(mesh.node_offset[sel] - p.offset)
    j = int(np.argmin(d))
    return int(sel[j]), float(d[j])


# -- resolvent solves -----------------------------------------------------------
def check_barrier(op: DiscreteOperator, lam: float) -> None:
    """Raise :class:`SpectralBarrier` unless ``lam < lam_1 - 1e-9``."""
    if lam < 0 and op.dirichlet:
        return
    lam1 = op.lambda1
    if lam >= lam1 - BARRIER_GAP:
        raise SpectralBarrier(f"lambda={lam} is not below lambda_1={lam1} of the domain")


def _factor(op: DiscreteOperator, lam: float):
    key = ("lu", float(lam))
    lu = op._cache.get(key)
    if lu is None:
        check_barrier(op, lam)
        K = (op.A - lam * sp.diags(op.M)).tocsc()
        try:
            lu = spla.splu(K)
        except RuntimeError as exc:
            raise SolveFailure(f"factorisation failed at lambda={lam}") from exc
        # keep only a handful of factorizations per operator
        lus = [k for k in op._cache if isinstance(k, tuple) and k[0] == "lu"]
        for k in lus[:-3]:
            del op._cache[k]
        op._cache[key] = lu
    return lu


def resolvent_solve(op: DiscreteOperator, lam: float, rhs: np.ndarray) -> np.ndarray:
    """Solve ``(A - lam M) u = rhs`` on the active rows, with iterative refinement."""
    lu = _factor(op, lam)
    rhs = np.asarray(rhs, dtype=float)
    u = lu.solve(rhs)
    scale = max(float(np.linalg.norm(rhs)), 1e-300)
    for _ in range(3):
        r = rhs - (op.A @ u - lam * (op.M * u) if rhs.ndim == 1 else op.A @ u - lam * (op.M[:, None] * u))
        if np.linalg.norm(r) <= 1e-12 * scale:
            break
        u = u + lu.solve(r)
    if not np.all(np.isfinite(u)):
        raise SolveFailure("non-finite resolvent solution")
    return u


@dataclass(frozen=True, eq=False)
class GreenField:
    """Values of a Green function over all mesh nodes (zero on removed boundary nodes).

    ``pole`` is ``None`` for generic positive fields handed to
    :func:`harnack_report`.
    """

    op: DiscreteOperator
    lam: float
    pole: int | None
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def mesh(self) -> Mesh:
        return self.op.mesh

    def __getitem__(self, node: int) -> float:
        return float(self.values[node])

    def at(self, p: GraphPoint) -> float:
        return float(self.values[self.mesh.node_at(p)])

    @property
    def residual(self) -> float:
        g = self.values[self.op.nodes]
        r = self.op.A @ g - self.lam * (self.op.M * g)
        if self.pole is not None:
            r[self.op.row(self.pole)] -= 1.0
        return float(np.linalg.norm(r))

    def to_csv(self, path) -> None:
        m = self.mesh
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("node,edge,offset,value\n")
            for k in range(m.n_nodes):
                fh.write(f"{k},{m.node_edge[k]},{m.node_offset[k]:.17g},{self.values[k]:.17g}\n")


def relative_green(op: DiscreteOperator, lam: float, pole: int) -> GreenField:
    """Green function of ``-Delta - lam`` on the operator's domain with pole at mesh node ``pole``."""
    r = op.row(pole)
    e = np.zeros(op.size)
    e[r] = 1.0
    g = resolvent_solve(op, lam, e)
    return GreenField(op, float(lam), int(pole), op.lift(g))


def green_columns(op: DiscreteOperator, lam: float, poles: Sequence[int]) -> np.ndarray:
    """Green functions for several poles at once; column ``j`` is lifted to all mesh nodes."""
    rows = [op.row(p) for p in poles]
    E = np.zeros((op.size, len(rows)))
    E[rows, np.arange(len(rows))] = 1.0
    G = resolvent_solve(op, lam, E)
    out = np.zeros((op.mesh.n_nodes, len(rows)))
    out[op.nodes] = G
    return out


def green_between(op: DiscreteOperator, lam: float, x: GraphPoint, y: GraphPoint) -> float:
    """``G_lam(x, y : domain)`` for points that are mesh nodes."""
    mesh = op.mesh
    ny, nx = mesh.node_at(y), mesh.node_at(x)
    return relative_green(op, lam, ny)[nx]


# -- exhaustion ---------------------------------------------------------------------
@dataclass
class ConvergenceReport:
    radii: list
    values: list
    tol: float
    converged_at: float | None = None

    @property
    def increments(self) -> list:
        v = self.values
        return [(b - a) / b for a, b in zip(v, v[1:])]

    @property
    def value(self) -> float | None:
        if self.converged_at is None:
            return None
        return float(self.values[self.radii.index(self.converged_at)])

    def to_dict(self) -> dict:
        return {
            "radii": [float(r) for r in self.radii],
            "values": [float(v) for v in self.values],
            "relative_increments": [float(v) for v in self.increments],
            "tol": self.tol,
            "converged_at": self.converged_at,
            "value": self.value,
        }


def global_green(
    g: MetricGraph,
    lam: float,
    x: GraphPoint,
    y: GraphPoint,
    h: float,
    tol: float = 1e-3,
    R_max: float | None = None,
    radii: Sequence[float] | None = None,
    lambda0: float | None = None,
    center: GraphPoint | None = None,
) -> tuple[float, ConvergenceReport]:
    """``G_lam(x, y)`` on the whole graph as the limit over balls ``B(center, R)``.

    The first radius at which the relative increment drops below ``tol``
    certifies the value; otherwise :class:`NonConverged` carries the full
    sequence.  ``center`` defaults to ``x``.
    """
    if lambda0 is not None and lam > lambda0:
        raise LambdaAboveSpectrum(f"lambda={lam} exceeds the estimated bottom of the spectrum {lambda0}")
    center = g.check_point(x if center is None else center)
    if radii is None:
        if R_max is None:
            R_max = g.truncation.radius if g.truncation else None
        if R_max is None:
            raise PreconditionError("R_max or radii is required on untruncated graphs")
        d = distance(g, center, y) + distance(g, center, x)
        start = math.ceil(d) + 2
        radii = list(range(start, int(math.floor(R_max)) + 1, 2))
    radii = [float(r) for r in radii]
    if not radii:
        raise PreconditionError("no admissible exhaustion radius")
    vals: list[float] = []
    rep = ConvergenceReport([], vals, tol)
    for R in radii:
        op = ball_operator(g, center, R, h)
        try:
            vals.append(green_between(op, lam, x, y))
        except SpectralBarrier as exc:
            raise LambdaAboveSpectrum(str(exc)) from exc
        rep.radii.append(R)
        if len(vals) > 1 and (vals[-1] - vals[-2]) / vals[-1] < tol:
            rep.converged_at = R
            return vals[-1], rep
    raise NonConverged(f"relative increment {rep.increments[-1] if rep.increments else float('nan'):.3g} "
                       f"above tol={tol} at R={radii[-1]}", report=rep)


def martin_kernel_field(op: DiscreteOperator, lam: float, x0: GraphPoint, y: GraphPoint) -> GreenField:
    """``K(x0, ., y) = G(., y) / G(x0, y)`` over all mesh nodes (one solve, pole ``y``)."""
    mesh = op.mesh
    ny, n0 = mesh.node_at(y), mesh.node_at(x0)
    if ny == n0:
        raise PoleCollision("basepoint coincides with the pole")
    gy = relative_green(op, lam, ny)
    return GreenField(op, lam, ny, gy.values / gy.values[n0], {"basepoint": n0})


def martin_kernel(
    g: MetricGraph,
    lam: float,
    x0: GraphPoint,
    x: GraphPoint,
    y: GraphPoint,
    h: float,
    R: float,
    center: GraphPoint | None = None,
) -> float:
    """``G(x, y) / G(x0, y)`` on the ball ``B(center, R)`` (``center`` defaults to ``x0``)."""
    x0, x, y = g.check_point(x0), g.check_point(x), g.check_point(y)
    if y == x0 or y == x:
        raise PoleCollision("the pole must differ from x and x0")
    op = ball_operator(g, x0 if center is None else center, R, h)
    k = martin_kernel_field(op, lam, x0, y)
    return k.at(x)


@dataclass
class DerivativeCheck:
    lhs: float
    rhs: float
    rel_error: float


def green_derivative_check(
    g: MetricGraph,
    lam: float,
    x: GraphPoint,
    y: GraphPoint,
    dlam: float,
    h: float,
    R: float | None = None,
    center: GraphPoint | None = None,
    op: DiscreteOperator | None = None,
) -> DerivativeCheck:
    """Central difference in ``lam`` of ``G(x, y)`` against ``sum_z G(x,z) G(z,y) m_z``."""
    if op is None:
        if R is None:
            raise PreconditionError("either op or R is required")
        op = ball_operator(g, g.check_point(x if center is None else center), R, h)
    check_barrier(op, lam + dlam)
    mesh = op.mesh
    nx, ny = mesh.node_at(x), mesh.node_at(y)
    plus = relative_green(op, lam + dlam, ny)[nx]
    minus = relative_green(op, lam - dlam, ny)[nx]
    lhs = (plus - minus) / (2 * dlam)
    G = green_columns(op, lam, [nx, ny])
    rhs = float(G[op.nodes, 0] @ (op.M * G[op.nodes, 1]))
    return DerivativeCheck(float(lhs), rhs, abs(lhs - rhs) / abs(rhs))


# -- Harnack ------------------------------------------------------------------------
@dataclass
class HarnackReport:
    ratio: float
    ratio_bound: float
    D: float
    sphere_count: int
    ball_measure: float
    gradient_integral: float
    gradient_bound: float

    @property
    def ratio_ok(self) -> bool:
        return self.ratio <= self.ratio_bound

    @property
    def gradient_ok(self) -> bool:
        return self.gradient_integral <= self.gradient_bound * 1.05

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in (
            "ratio", "ratio_bound", "D", "sphere_count", "ball_measure",
            "gradient_integral", "gradient_bound")} | {"ratio_ok": self.ratio_ok, "gradient_ok": self.gradient_ok}


def harnack_report(fld: GreenField, center: GraphPoint, r: float, l: float) -> HarnackReport:
    """Oscillation of a positive harmonic field on ``B(center, r)`` against the explicit bound.

    ``S`` is the largest number of points on a sphere ``S(center, rho)``
    over the pieces of ``[r, r + l]`` between branching radii.  The bound on
    the energy of ``log f`` over the ball is ``4 S / l`` and the oscillation
    bound is ``exp(sqrt(4 S mu(B) / l))``.
    """
    mesh = fld.mesh
    g = mesh.domain.graph
    center = g.check_point(center)
    if fld.pole is not None:
        if distance(g, center, mesh.point_of(fld.pole)) < r + l:
            raise PoleInsideEnlargedBall("the pole lies inside B(center, r + l)")
    d = mesh.distances_from(center)
    if np.any(mesh.boundary & (d < r + l - 1e-9)):
        raise PreconditionError("B(center, r + l) must lie inside the field's domain")
    inside = d <= r + 1e-9
    vals = fld.values[inside]
    if np.any(vals <= 0):
        raise PreconditionError("the field must be positive on the ball")
    ratio = float(vals.max() / vals.min())
    logf = np.log(np.where(fld.values > 0, fld.values, 1.0))
    seg = inside[mesh.seg_u] & inside[mesh.seg_v]
    du = (logf[mesh.seg_v[seg]] - logf[mesh.seg_u[seg]]) / mesh.seg_len[seg]
    grad = float(np.sum(du * du * mesh.seg_len[seg]))
    S = g.max_sphere_count(center, r, r + l)
    mu = ball(g, center, r).measure
    D = math.sqrt(4 * S * mu / l)
    return HarnackReport(ratio, math.exp(D), D, S, mu, grad, 4 * S / l)
