"""Dirichlet eigensystems, spectral heat kernels, exhaustion limits of the ground state.

Everything is phrased for the pencil ``(A, M)`` of :mod:`graphpotential.mesh`.
Because ``M`` is diagonal the pencil is handled through the symmetric matrix
``M^{-1/2} A M^{-1/2}``; eigenvectors are returned ``M``-orthonormal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .domain import ball, check_truncation
from .errors import ConvergenceFailure, PreconditionError
from .graph import GraphPoint, MetricGraph
from .mesh import DiscreteOperator, assemble_operator, build_mesh

DENSE_LIMIT = 1500


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    """Lowest ``k`` eigenpairs of an operator, eigenvectors as columns of ``vectors``."""

    op: DiscreteOperator
    eigenvalues: np.ndarray
    vectors: np.ndarray

    @property
    def k(self) -> int:
        return len(self.eigenvalues)

    @property
    def complete(self) -> bool:
        return self.k == self.op.size

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("index,eigenvalue\n")
            for i, lam in enumerate(self.eigenvalues, start=1):
                fh.write(f"{i},{lam:.17g}\n")

    def vectors_to_csv(self, path, count: int | None = None) -> None:
        count = self.k if count is None else min(count, self.k)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("node," + ",".join(f"phi{i + 1}" for i in range(count)) + "\n")
            for r, node in enumerate(self.op.nodes):
                fh.write(f"{node}," + ",".join(f"{v:.17g}" for v in self.vectors[r, :count]) + "\n")


def default_count(op: DiscreteOperator) -> int:
    return max(1, min(200, op.size // 4))


def dirichlet_eigensystem(
    op: DiscreteOperator, k: int | None = None, require_dirichlet: bool = True, maxiter: int | None = None
) -> SpectralBasis:
    """Smallest ``k`` eigenpairs of ``A phi = lam M phi``.

    Small problems use a dense symmetric solver; larger ones use Lanczos in
    shift-invert mode.  The ground state is flipped to have positive
    mass-weighted mean.
    """
    if require_dirichlet and not op.dirichlet:
        raise PreconditionError("a Dirichlet operator is required")
    n = op.size
    k = default_count(op) if k is None else int(k)
    if not 1 <= k <= n:
        raise PreconditionError(f"k={k} must lie in [1, {n}]")
    s = 1.0 / np.sqrt(op.M)
    B = sp.diags(s) @ op.A @ sp.diags(s)
    if n <= DENSE_LIMIT or k >= n - 1:
        vals, vecs = la.eigh(B.toarray(), subset_by_index=(0, k - 1))
    else:
        # shift slightly below zero so that singular (Neumann-type) pencils factor too
        sigma = -1e-3 * float(B.diagonal().min())
        try:
            # fixed start vector keeps the result bit-reproducible
            v0 = np.sqrt(op.M / op.M.sum())
            vals, vecs = spla.eigsh(B.tocsc(), k=k, sigma=sigma, which="LM", maxiter=maxiter, tol=0, v0=v0)
        except spla.ArpackNoConvergence as exc:
            raise ConvergenceFailure(f"Lanczos did not converge for k={k}") from exc
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
    phi = vecs * s[:, None]
    if float(op.M @ phi[:, 0]) < 0:
        phi[:, 0] *= -1
    res = op.A @ phi - (op.M[:, None] * phi) * vals[None, :]
    # relative to ||A|| ||phi||, which stays meaningful for zero eigenvalues
    norm_a = float(abs(op.A).sum(axis=1).max())
    scale = norm_a * np.linalg.norm(phi, axis=0)
    if np.any(np.linalg.norm(res, axis=0) > 1e-8 * np.maximum(scale, 1e-300)):
        raise ConvergenceFailure("eigenpair residual above 1e-8 relative")
    return SpectralBasis(op, vals, phi)


def _rows(basis: SpectralBasis, nodes) -> np.ndarray:
    return np.array([basis.op.row(int(v)) for v in np.atleast_1d(nodes)], dtype=np.int64)


def heat_kernel(basis: SpectralBasis, t: float, x: int, y: int) -> tuple[float, float]:
    """``p(t, x, y) = sum exp(-lam_i t) phi_i(x) phi_i(y)`` between mesh nodes.

    Returns the truncated sum and a bound on the omitted modes.  Since every
    eigenvector is ``M``-normalised, ``|phi(x)| <= m_x^{-1/2}``, so each
    omitted term is at most ``exp(-lam_k t) / sqrt(m_x m_y)``.
    """
    if t <= 0:
        raise PreconditionError("t must be positive")
    rx, ry = basis.op.row(x), basis.op.row(y)
    w = np.exp(-basis.eigenvalues * t)
    px, py = basis.vectors[rx], basis.vectors[ry]
    # elementwise product is commutative, so the value is symmetric in (x, y) bit for bit
    value = float(np.sum(w * (px * py)))
    omitted = basis.op.size - basis.k
    tail = omitted * math.exp(-basis.eigenvalues[-1] * t) / math.sqrt(basis.op.M[rx] * basis.op.M[ry])
    return value, float(tail)


def heat_kernel_rows(basis: SpectralBasis, t: float, x: int) -> np.ndarray:
    """``p(t, x, .)`` over all active rows of the operator."""
    rx = basis.op.row(x)
    return basis.vectors @ (np.exp(-basis.eigenvalues * t) * basis.vectors[rx])


def heat_mass(basis: SpectralBasis, t: float, x: int) -> float:
    """Total heat ``sum_y p(t, x, y) m_y`` started from ``x``."""
    if t <= 0:
        raise PreconditionError("t must be positive")
    return float(heat_kernel_rows(basis, t, x) @ basis.op.M)


@dataclass
class ExhaustionReport:
    """Ground-state eigenvalues of an increasing family of balls."""

    radii: list
    values: list
    h: float
    method: str = "mesh"
    extra: dict = field(default_factory=dict)

    @property
    def estimate(self) -> float:
        return float(self.values[-1])

    @property
    def decrement(self) -> float:
        return float(self.values[-2] - self.values[-1]) if len(self.values) > 1 else float("nan")

    @property
    def monotone(self) -> bool:
        v = np.asarray(self.values)
        return bool(np.all(np.diff(v) <= 1e-12 * np.abs(v[:-1])))

    @property
    def aitken(self) -> float:
        """Aitken delta-squared extrapolation of the last three values (labelled as extrapolated)."""
        if len(self.values) < 3:
            return float("nan")
        a, b, c = self.values[-3:]
        den = c - 2 * b + a
        return float(c - (c - b) ** 2 / den) if den != 0 else float(c)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "h": self.h,
            "radii": list(map(float, self.radii)),
            "values": list(map(float, self.values)),
            "estimate": self.estimate,
            "last_decrement": self.decrement,
            "aitken_extrapolated": self.aitken,
            **self.extra,
        }


def ground_state(g: MetricGraph, center: GraphPoint, radius: float, h: float) -> float:
    """``lam_1`` of the Dirichlet ball ``B(center, radius)`` at step ``h``."""
    op = assemble_operator(build_mesh(ball(g, center, radius), h), dirichlet=True)
    return float(dirichlet_eigensystem(op, 1).eigenvalues[0])


def lambda0_exhaustion(g: MetricGraph, x0: GraphPoint, radii: Sequence[float], h: float) -> ExhaustionReport:
    """Ground states of the nested balls ``B(x0, R)`` for increasing ``R``."""
    radii = [float(r) for r in radii]
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise PreconditionError("radii must be strictly increasing")
    for r in radii:
        check_truncation(g, x0, r)
    vals = [ground_state(g, x0, r, h) for r in radii]
    return ExhaustionReport(radii, vals, h)


def radial_ground_state(degree: int, length: float, radius: float, h: float) -> float:
    """``lam_1`` of the ball of radius ``radius`` about the root of the ``degree``-regular tree.

    The ground state of a ball centred at a vertex is a function of the
    distance to the centre only, so it is the ground state of the 1-D
    problem ``-(w u')' = lam w u`` on ``[0, radius]`` with weight ``w`` equal
    to the number of edges at that distance (``degree (degree-1)^n`` on
    level ``n``), Neumann at 0 and Dirichlet at ``radius``.  The same
    finite-difference scheme as the full mesh is used, so the two agree to
    roundoff when the mesh steps match.
    """
    n = int(round(radius / h))
    if n < 2 or abs(n * h - radius) > 1e-9:
        raise PreconditionError("radius must be a multiple of h with at least two segments")
    starts = np.arange(n) * h
    level = np.floor(starts / length + 1e-9)
    # weights are only defined up to a common factor; work in logs to reach large radii
    logw = np.log(degree) + level * np.log(degree - 1)
    w = np.exp(logw - logw.max() / 2)
    m = np.zeros(n + 1)
    m[:-1] += w * h / 2
    m[1:] += w * h / 2
    d = np.zeros(n + 1)
    d[:-1] += w / h
    d[1:] += w / h
    m, d, off = m[:n], d[:n], -w[: n - 1] / h
    s = 1.0 / np.sqrt(m)
    vals = la.eigh_tridiagonal(d * s * s, off * s[:-1] * s[1:], select="i", select_range=(0, 0))[0]
    return float(vals[0])


def radial_lambda0_exhaustion(degree: int, length: float, radii: Sequence[float], h: float) -> ExhaustionReport:
    """Exhaustion of the regular tree by balls about a vertex through the radial reduction."""
    radii = [float(r) for r in radii]
    vals = [radial_ground_state(degree, length, r, h) for r in radii]
    return ExhaustionReport(radii, vals, h, method="radial")


def tree_bottom_of_spectrum(degree: int, length: float = 1.0) -> float:
    """Closed-form bottom of the spectrum of the equilateral ``degree``-regular tree.

    ``lam_0 = (k_0 / length)^2`` with ``cos k_0 = 2 sqrt(degree-1) / degree``,
    the top of the spectrum of the simple random walk on the tree.
    """
    return (math.acos(2 * math.sqrt(degree - 1) / degree) / length) ** 2


@dataclass
class MaxPrincipleReport:
    violation: float
    min_value: float
    parabolic_max: float
    interior_max: float
    steps: int
    dt: float

    @property
    def passed(self) -> bool:
        return self.violation <= 1e-10


def maximum_principle_check(
    op: DiscreteOperator,
    u0: np.ndarray,
    T: float,
    steps: int,
    boundary_values: np.ndarray | None = None,
) -> MaxPrincipleReport:
    """Implicit-Euler heat flow ``(M + dt A) u^{n+1} = M u^n`` with the parabolic-boundary check.

    ``u0`` lives on all mesh nodes; boundary nodes keep ``boundary_values``
    (default: their ``u0`` entries) for all times.  The violation is the
    largest interior value at positive times minus the largest value on the
    parabolic boundary (initial data and boundary data).
    """
    mesh = op.mesh
    u0 = np.asarray(u0, dtype=float)
    if u0.shape != (mesh.n_nodes,):
        raise PreconditionError("u0 must have one entry per mesh node")
    dt = T / steps
    active = op.nodes
    passive = np.setdiff1d(np.arange(mesh.n_nodes), active)
    gb = u0[passive] if boundary_values is None else np.asarray(boundary_values, dtype=float)
    coupling = op.A_full[active][:, passive] @ gb if len(passive) else np.zeros(len(active))
    lu = spla.splu((sp.diags(op.M) + dt * op.A).tocsc())
    u = u0[active].copy()
    parabolic = max(float(u0.max()), float(gb.max()) if len(gb) else -np.inf)
    interior_max = -np.inf
    lo = np.inf
    for _ in range(steps):
        u = lu.solve(op.M * u - dt * coupling)
        interior_max = max(interior_max, float(u.max()))
        lo = min(lo, float(u.min()))
    return MaxPrincipleReport(interior_max - parabolic, lo, parabolic, interior_max, steps, dt)
