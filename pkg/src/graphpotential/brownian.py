"""Monte Carlo for Brownian motion on a metric graph through the mesh random walk.

On a mesh with a single step ``h`` the walk that jumps to a uniformly chosen
mesh neighbour every ``tau = h**2 / 2`` time units has generator exactly
``-M^{-1} A``, including at graph vertices.  The variance of the motion is
``2 t`` because the Laplacian is ``f''`` without a factor one half.

Random numbers come from a counter-based generator keyed by
``(seed, stream, path index)``, so every path is reproducible on its own
and results do not depend on how paths are batched.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numba
import numpy as np

from .domain import Domain
from .errors import (
    ExcessTruncation,
    LambdaAboveSpectrum,
    NestingViolation,
    PreconditionError,
    StartMisplaced,
    StartOnBoundary,
)
from .graph import GraphPoint, distance
from .green import relative_green, snap_node
from .mesh import DiscreteOperator, Mesh, assemble_operator, build_mesh, require_uniform

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
CAP_FRACTION = 0.01
T_MAX_FACTOR = 50.0


@numba.njit(cache=True, inline="always")
def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@numba.njit(cache=True)
def _path_state(seed, stream, index):
    s = _mix(np.uint64(seed) + np.uint64(0x9E3779B97F4A7C15))
    s = _mix(s ^ (np.uint64(stream) * np.uint64(0xD1B54A32D192ED03)))
    return _mix(s ^ (np.uint64(index) * np.uint64(0xAEF17502108EF2D9)))


@numba.njit(cache=True)
def _walk_batch(indptr, indices, absorbing, starts, seed, stream, first_index, max_steps, f, growth):
    """Run one walk per entry of ``starts``.

    Returns the weighted occupation sum ``sum_k growth**k f(X_k)`` over the
    steps before absorption, the step count, and the absorbing node (``-1``
    when the cap was reached).
    """
    n = starts.shape[0]
    acc = np.zeros(n)
    steps = np.zeros(n, dtype=np.int64)
    exits = -np.ones(n, dtype=np.int64)
    golden = np.uint64(0x9E3779B97F4A7C15)
    for p in range(n):
        s = _path_state(seed, stream, first_index + p)
        u = starts[p]
        w = 1.0
        total = 0.0
        k = 0
        while True:
            if absorbing[u]:
                exits[p] = u
                break
            if k >= max_steps:
                break
            total += w * f[u]
            w *= growth
            a = indptr[u]
            deg = indptr[u + 1] - a
            s += golden
            r = _mix(s)
            j = ((r >> np.uint64(11)) * np.uint64(deg)) >> np.uint64(53)
            u = indices[a + np.int64(j)]
            k += 1
        acc[p] = total
        steps[p] = k
    return acc, steps, exits


@numba.njit(cache=True)
def _trace(indptr, indices, absorbing, start, seed, stream, index, max_steps):
    out = np.empty(max_steps + 1, dtype=np.int64)
    s = _path_state(seed, stream, index)
    golden = np.uint64(0x9E3779B97F4A7C15)
    u = start
    out[0] = u
    k = 0
    while not absorbing[u] and k < max_steps:
        a = indptr[u]
        deg = indptr[u + 1] - a
        s += golden
        r = _mix(s)
        j = ((r >> np.uint64(11)) * np.uint64(deg)) >> np.uint64(53)
        u = indices[a + np.int64(j)]
        k += 1
        out[k] = u
    return out[: k + 1]


# -- data types -------------------------------------------------------------------
@dataclass(frozen=True)
class PathSample:
    start: int
    nodes: np.ndarray
    tau: float
    exit_node: int | None
    reason: str

    @property
    def steps(self) -> int:
        return len(self.nodes) - 1

    @property
    def elapsed(self) -> float:
        return self.steps * self.tau


@dataclass(frozen=True)
class MCEstimate:
    """Sample mean of independent per-path values with its standard error."""

    mean: float
    stderr: float
    n: int
    seed: int
    truncated: float = 0.0
    quantity: str = ""

    @classmethod
    def from_samples(cls, values: np.ndarray, seed: int, truncated: float = 0.0, quantity: str = "") -> "MCEstimate":
        v = np.asarray(values, dtype=float)
        n = len(v)
        mean = float(np.sum(v) / n)
        sd = float(np.std(v, ddof=1)) if n > 1 else float("inf")
        return cls(mean, sd / math.sqrt(n), n, int(seed), float(truncated), quantity)

    def z(self, target: float) -> float:
        """Distance to ``target`` in standard errors."""
        if self.stderr == 0:
            return 0.0 if self.mean == target else float("inf")
        return abs(self.mean - target) / self.stderr

    def row(self) -> str:
        return f"{self.quantity},{self.mean:.17g},{self.stderr:.17g},{self.n},{self.seed},{self.truncated:.17g}"


def estimates_to_csv(path, estimates: Sequence[MCEstimate]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("quantity,mean,stderr,N,seed,truncation_fraction\n")
        for e in estimates:
            fh.write(e.row() + "\n")


@dataclass(frozen=True, eq=False)
class Walker:
    """Random-walk data extracted from a uniform mesh."""

    mesh: Mesh
    indptr: np.ndarray
    indices: np.ndarray
    absorbing: np.ndarray
    tau: float

    @classmethod
    def of(cls, mesh: Mesh) -> "Walker":
        h = require_uniform(mesh)
        indptr, indices = mesh.neighbors
        return cls(mesh, indptr, indices, mesh.boundary.copy(), h * h / 2)

    def run(self, start: int, n: int, seed: int, max_steps: int, f=None, lam: float = 0.0, stream: int = 0):
        if self.absorbing[start]:
            raise StartOnBoundary(f"start node {start} is on the Dirichlet boundary")
        f = np.zeros(self.mesh.n_nodes) if f is None else np.asarray(f, dtype=float)
        starts = np.full(n, start, dtype=np.int64)
        return _walk_batch(self.indptr, self.indices, self.absorbing, starts, np.uint64(seed),
                           np.uint64(stream), np.uint64(0), np.int64(max_steps), f, math.exp(lam * self.tau))


def _max_steps(op: DiscreteOperator, tau: float, t_max: float | None) -> int:
    if t_max is None:
        t_max = T_MAX_FACTOR / op.lambda1
    return int(math.ceil(t_max / tau))


def sample_path(mesh: Mesh, start: int, seed: int, t_max: float = 10.0, index: int = 0, stream: int = 0) -> PathSample:
    """One walk from mesh node ``start`` until it reaches the boundary or time ``t_max``."""
    w = Walker.of(mesh)
    if w.absorbing[start]:
        raise StartOnBoundary(f"start node {start} is on the Dirichlet boundary")
    cap = int(math.ceil(t_max / w.tau))
    nodes = _trace(w.indptr, w.indices, w.absorbing, np.int64(start), np.uint64(seed), np.uint64(stream),
                   np.uint64(index), np.int64(cap))
    last = int(nodes[-1])
    exited = bool(w.absorbing[last])
    return PathSample(int(start), nodes, w.tau, last if exited else None, "exited" if exited else "time cap")


def _check_lambda(op: DiscreteOperator, lam: float) -> None:
    if lam > 0 and lam >= op.lambda1:
        raise LambdaAboveSpectrum(f"lambda={lam} is not below lambda_1={op.lambda1} of the domain")


def _check_cap(steps: np.ndarray, exits: np.ndarray, n: int) -> float:
    frac = float(np.count_nonzero(exits < 0)) / n
    if frac > CAP_FRACTION:
        raise ExcessTruncation(f"{frac:.2%} of paths reached the time cap")
    return frac


def estimate_green_functional(
    mesh: Mesh,
    lam: float,
    x: int,
    f: np.ndarray,
    N: int,
    seed: int,
    t_max: float | None = None,
    stream: int = 0,
    op: DiscreteOperator | None = None,
) -> MCEstimate:
    """Estimate ``E_x[int_0^sigma exp(lam t) f(w(t)) dt]`` by ``sum_k exp(lam k tau) f(X_k) tau``.

    With ``f = delta_column(mesh, y)`` the target is ``G_lam(x, y : domain)``.
    """
    op = assemble_operator(mesh) if op is None else op
    _check_lambda(op, lam)
    w = Walker.of(mesh)
    acc, steps, exits = w.run(x, N, seed, _max_steps(op, w.tau, t_max), f, lam, stream)
    frac = _check_cap(steps, exits, N)
    return MCEstimate.from_samples(acc * w.tau, seed, frac, "green_functional")


def delta_column(mesh: Mesh, y: int) -> np.ndarray:
    """``1 / m_y`` at node ``y`` and zero elsewhere."""
    f = np.zeros(mesh.n_nodes)
    f[y] = 1.0 / mesh.mass[y]
    return f


def exit_time(mesh: Mesh, x: int, N: int, seed: int, t_max: float | None = None) -> MCEstimate:
    est = estimate_green_functional(mesh, 0.0, x, np.ones(mesh.n_nodes), N, seed, t_max)
    return MCEstimate(est.mean, est.stderr, est.n, est.seed, est.truncated, "exit_time")


def exit_distribution(mesh: Mesh, x: int, N: int, seed: int, t_max: float | None = None) -> dict[int, MCEstimate]:
    """Probability of leaving through each boundary node."""
    op = assemble_operator(mesh)
    w = Walker.of(mesh)
    _, steps, exits = w.run(x, N, seed, _max_steps(op, w.tau, t_max))
    frac = _check_cap(steps, exits, N)
    return {
        int(b): MCEstimate.from_samples((exits == b).astype(float), seed, frac, f"exit@{int(b)}")
        for b in np.flatnonzero(mesh.boundary)
    }


# -- harmonic measures --------------------------------------------------------------
def _annulus(O1: Domain, O2: Domain) -> Domain:
    return O1.minus_closure(O2)


def _inner_side(mesh: Mesh, O1: Domain, O2: Domain) -> np.ndarray:
    """Boundary nodes of ``O1 \\ cl(O2)`` that lie on ``O1 cap dO2``."""
    out = np.zeros(mesh.n_nodes, dtype=bool)
    for b in np.flatnonzero(mesh.boundary):
        p = mesh.point_of(int(b))
        out[b] = O2.closure_contains(p) and O1.contains(p)
    return out


@dataclass
class HarmonicMeasure:
    """Weights of ``eta_x`` on the mesh nodes of ``O1 cap dO2``."""

    mesh: Mesh
    nodes: np.ndarray
    weights: np.ndarray
    stderrs: np.ndarray
    total: MCEstimate
    exits: np.ndarray = field(repr=False)
    growth: np.ndarray = field(repr=False)

    def points(self) -> list[GraphPoint]:
        return [self.mesh.point_of(int(b)) for b in self.nodes]

    def pair(self, values: np.ndarray) -> np.ndarray:
        """Per-path samples of ``exp(lam tau) F(w(tau))`` for ``F`` given on all mesh nodes (0 off ``dO2``)."""
        vals = np.zeros(len(self.exits))
        hit = self.exits >= 0
        inner = np.zeros(self.mesh.n_nodes, dtype=bool)
        inner[self.nodes] = True
        hit &= inner[np.maximum(self.exits, 0)]
        vals[hit] = self.growth[hit] * values[self.exits[hit]]
        return vals


def harmonic_measure(
    g,
    lam: float,
    x: GraphPoint,
    O1: Domain,
    O2: Domain,
    h: float,
    N: int,
    seed: int,
    t_max: float | None = None,
    stream: int = 0,
) -> HarmonicMeasure:
    """Exit measure of ``O1 \\ cl(O2)`` from ``x`` restricted to ``O1 cap dO2``, weighted by ``exp(lam tau)``."""
    x = g.check_point(x)
    if not O1.contains(x) or O2.closure_contains(x):
        raise StartMisplaced("x must lie in O1 minus the closure of O2")
    D = _annulus(O1, O2)
    mesh = build_mesh(D, h, snap=True)
    op = assemble_operator(mesh)
    _check_lambda(op, lam)
    inner = _inner_side(mesh, O1, O2)
    w = Walker.of(mesh)
    start = mesh.node_at(x)
    _, steps, exits = w.run(start, N, seed, _max_steps(op, w.tau, t_max), None, 0.0, stream)
    frac = _check_cap(steps, exits, N)
    growth = np.exp(lam * w.tau * steps)
    nodes = np.flatnonzero(inner)
    hit = (exits >= 0) & inner[np.maximum(exits, 0)]
    weights = np.empty(len(nodes))
    ses = np.empty(len(nodes))
    for j, b in enumerate(nodes):
        e = MCEstimate.from_samples(np.where(exits == b, growth, 0.0), seed, frac)
        weights[j], ses[j] = e.mean, e.stderr
    total = MCEstimate.from_samples(np.where(hit, growth, 0.0), seed, frac, "harmonic_mass")
    return HarmonicMeasure(mesh, nodes, weights, ses, total, exits, growth)


@dataclass
class Residual:
    lhs: float
    rhs: float
    stderr: float

    @property
    def z(self) -> float:
        diff = abs(self.lhs - self.rhs)
        if self.stderr == 0:
            return 0.0 if diff <= 1e-12 * max(abs(self.lhs), 1.0) else float("inf")
        return diff / self.stderr

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "stderr": self.stderr, "z": self.z}


def strong_markov_residual(
    g,
    lam: float,
    x: GraphPoint,
    y: GraphPoint,
    O1: Domain,
    O2: Domain,
    h: float,
    N: int,
    seed: int,
) -> Residual:
    """Decomposition of ``G(x, y : O1)`` at the exit time of ``O1 \\ cl(O2)``.

    The left side and the Green function of ``O1 \\ cl(O2)`` are solved
    deterministically, the expectation over the exit point is sampled.
    """
    x, y = g.check_point(x), g.check_point(y)
    if not O1.contains(y) or (O2.closure_contains(y) and not O2.contains(y)):
        raise PreconditionError("y must lie in O1 and off the boundary of O2")
    op1 = assemble_operator(build_mesh(O1, h, snap=True))
    G1 = relative_green(op1, lam, op1.mesh.node_at(y))
    hm = harmonic_measure(g, lam, x, O1, O2, h, N, seed)
    D = hm.mesh
    # G(., y : O1) transported to the annulus mesh
    on_D = np.zeros(D.n_nodes)
    for b in hm.nodes:
        on_D[b] = G1[op1.mesh.node_at(D.point_of(int(b)))]
    first = MCEstimate.from_samples(hm.pair(on_D), seed)
    if D.domain.contains(y):
        opD = assemble_operator(D)
        second = relative_green(opD, lam, D.node_at(y))[D.node_at(x)]
    else:
        second = 0.0
    lhs = G1[op1.mesh.node_at(x)]
    return Residual(float(lhs), first.mean + second, first.stderr)


def _check_nesting(O1: Domain, O2: Domain, O3: Domain, h: float) -> bool:
    """Validate ``O3 <= O2 <= O1`` with boundaries at least ``2h`` apart; return True if ``O2 == O3``."""
    g = O1.graph
    tol = 1e-9
    for inner, outer in ((O3, O2), (O2, O1)):
        try:
            common = inner.intersection(outer).measure
        except PreconditionError:
            common = 0.0
        if abs(common - inner.measure) > tol:
            raise NestingViolation("domains are not nested")
    same = O2.intervals == O3.intervals and O2.vertices == O3.vertices
    pairs = [(O2, O1)] if same else [(O3, O2), (O2, O1)]
    for inner, outer in pairs:
        for p in inner.boundary:
            if not outer.contains(p):
                continue
            for q in outer.boundary:
                if distance(g, p, q) < 2 * h - tol:
                    raise NestingViolation("nested boundaries are closer than 2h")
    return same


def composition_residual(
    g,
    x: GraphPoint,
    O1: Domain,
    O2: Domain,
    O3: Domain,
    f: Callable[[GraphPoint], float],
    h: float,
    N: int,
    seed: int,
    lam: float = 0.0,
) -> Residual:
    """Harmonic measure of ``dO3`` seen from ``x`` against its composition through ``dO2``.

    ``f`` is evaluated at the points of ``O1 cap dO3``.  Each ``dO2`` node
    gets its own batch of ``N`` walks on a separate random stream.
    """
    _check_nesting(O1, O2, O3, h)
    direct = harmonic_measure(g, lam, x, O1, O3, h, N, seed, stream=0)
    m3 = direct.mesh
    fvals = np.zeros(m3.n_nodes)
    for b in direct.nodes:
        fvals[b] = f(m3.point_of(int(b)))
    lhs = MCEstimate.from_samples(direct.pair(fvals), seed)

    first = harmonic_measure(g, lam, x, O1, O2, h, N, seed, stream=1)
    m2 = first.mesh
    phi = np.zeros(m2.n_nodes)
    phi_var = np.zeros(m2.n_nodes)
    for j, b in enumerate(first.nodes):
        p = m2.point_of(int(b))
        k = m3.node_at(p)
        if m3.boundary[k]:
            phi[b] = fvals[k]
            continue
        inner = np.zeros(m3.n_nodes, dtype=bool)
        inner[direct.nodes] = True
        w = Walker.of(m3)
        op3 = assemble_operator(m3)
        _, steps, exits = w.run(k, N, seed, _max_steps(op3, w.tau, None), None, 0.0, stream=2 + j)
        _check_cap(steps, exits, N)
        growth = np.exp(lam * w.tau * steps)
        hit = (exits >= 0) & inner[np.maximum(exits, 0)]
        vals = np.where(hit, growth * fvals[np.maximum(exits, 0)], 0.0)
        est = MCEstimate.from_samples(vals, seed)
        phi[b], phi_var[b] = est.mean, est.stderr**2
    outer = MCEstimate.from_samples(first.pair(phi), seed)
    # first-stage sampling error plus the propagated error of the per-node estimates
    var_rhs = outer.stderr**2 + float(np.sum(first.weights**2 * phi_var[first.nodes]))
    return Residual(lhs.mean, outer.mean, math.sqrt(lhs.stderr**2 + var_rhs))
