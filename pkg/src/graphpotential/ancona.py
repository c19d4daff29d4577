"""Measured profiles of Green-function multiplicativity, decay and boundary convergence.

Every experiment takes a graph spec string plus plain parameters and returns
an :class:`~graphpotential.report.ExperimentReport` whose parameter block
regenerates it exactly.  A uniform constant cannot be certified from finitely
many numbers; where a statement is uniform in its parameters the reports
check that measured spreads stabilise as the scale grows.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .brownian import delta_column, estimate_green_functional
from .domain import check_truncation, make_domain
from .errors import (
    DisconnectedDomain,
    GraphPotentialError,
    PreconditionError,
    RadiusExceedsTruncation,
)
from .graph import GraphPoint, GraphSpec, MetricGraph, distance
from .green import ball_operator, domain_operator, green_columns
from .mesh import assemble_operator, build_mesh
from .report import ExperimentReport, decode_point, encode_point, graph_from_spec, spec_string
from .spectral import ExhaustionReport, lambda0_exhaustion, radial_lambda0_exhaustion

UNIFORM_C_NOTE = (
    "A uniform constant cannot be certified numerically; it is checked as stabilisation of the "
    "measured ratio spread across distance scales and over the lambda grid."
)
DEFAULT_FRACTIONS = (0.0, 0.25, 0.5, 0.75, 0.9, 0.99)


# -- bottom of the spectrum ---------------------------------------------------------------
def estimate_lambda0(graph: str, h: float = 0.25, radii: Sequence[float] | None = None) -> ExhaustionReport:
    """Exhaustion estimate of the bottom of the spectrum for a test-family spec.

    Regular trees use the radial reduction about the root, which reaches
    radii far beyond any explicit truncation.  Other graphs use Dirichlet
    balls about the truncation centre up to the truncation radius, so every
    sub-domain of that ball has ``lam_1`` at or above the estimate.
    """
    g = graph_from_spec(spec_string(graph))
    spec = GraphSpec.parse(spec_string(graph))
    kw = dict(spec.params)
    if spec.family == "regular_tree":
        radii = radii or (20.0, 40.0, 80.0, 160.0)
        rep = radial_lambda0_exhaustion(int(kw["degree"]), float(kw.get("length", 1.0)), radii, h)
        rep.extra["graph"] = str(spec)
        return rep
    if g.truncation is None:
        raise PreconditionError("bottom-of-spectrum estimates need a truncated infinite family")
    R = g.truncation.radius
    radii = radii or (R / 2, 3 * R / 4, R)
    rep = lambda0_exhaustion(g, g.vertex_point(g.truncation.center), radii, h)
    rep.extra["graph"] = str(spec)
    return rep


def lambda_grid(lambda0: float, fractions: Sequence[float] = DEFAULT_FRACTIONS) -> list[float]:
    return [float(f) * float(lambda0) for f in fractions]


# -- helpers --------------------------------------------------------------------------------
def _center(g: MetricGraph, center) -> GraphPoint:
    if center is None:
        if g.truncation is None:
            raise PreconditionError("a domain centre is required on untruncated graphs")
        return g.vertex_point(g.truncation.center)
    return decode_point(g, center)


def colinear_triples(
    graph: str, ys: Sequence, splits: Sequence[tuple[float, float]]
) -> list[list]:
    """Vertex triples ``(x, y, z)`` on a common geodesic with prescribed ``d(x,y), d(y,z)``.

    For each ``y`` and split ``(a, b)`` the lowest-id vertex ``x`` at
    distance ``a`` is paired with the lowest-id vertex ``z`` at distance
    ``b`` from ``y`` and ``a + b`` from ``x``.  Splits without such a pair
    are skipped.  Points are returned in the encoded form used by reports.
    """
    g = graph_from_spec(spec_string(graph))
    out = []
    for yo in ys:
        y = decode_point(g, yo)
        dy = g.point_vertex_distances(y)
        for a, b in splits:
            xs = np.flatnonzero(np.abs(dy - a) <= 1e-9)
            zs = np.flatnonzero(np.abs(dy - b) <= 1e-9)
            found = None
            for xv in xs:
                dx = g.vertex_distances(int(xv))
                ok = zs[np.abs(dx[zs] - (a + b)) <= 1e-9]
                if len(ok):
                    found = [int(xv), encode_point(y), int(ok[0])]
                    break
            if found is not None:
                out.append(found)
    return out


def _check_colinear(g, x, y, z):
    dxy, dyz, dxz = distance(g, x, y), distance(g, y, z), distance(g, x, z)
    if dxy < 1 - 1e-9 or dyz < 1 - 1e-9:
        raise PreconditionError("triples need d(x,y) >= 1 and d(y,z) >= 1")
    if abs(dxy + dyz - dxz) > 1e-9:
        raise PreconditionError("y must lie on a geodesic from x to z")
    return dxy, dyz, dxz


def _spread(values) -> float:
    v = np.asarray(values, dtype=float)
    return float(v.max() / v.min()) if len(v) else float("nan")


# -- Ancona ratios ---------------------------------------------------------------------------
def ancona_sweep(
    graph: str,
    h: float,
    lambdas: Sequence[float],
    triples: Sequence,
    R: float,
    center=None,
    identity_tol: float | None = None,
    identity_max_dxz: float = 8.0,
    spread_scales: Sequence[float] | None = None,
    spread_min_dxz: float = 4.0,
    spread_tol: float = 1.1,
) -> ExperimentReport:
    """Ratios ``A = G(x,z) / (G(x,y) G(y,z))`` over triples and a lambda grid.

    ``identity_tol`` enables the check ``|A G(y,y) - 1| <= tol`` (exact when
    ``y`` separates ``x`` from ``z``, as on trees).  ``spread_scales = (s1,
    s2)`` enables the check that the spread ``max A / min A`` over triples
    with ``spread_min_dxz <= d(x,z) <= s`` grows by at most ``spread_tol``
    from ``s1`` to ``s2`` at every lambda.
    """
    spec = spec_string(graph)
    g = graph_from_spec(spec)
    c = _center(g, center)
    params = dict(graph=spec, h=h, lambdas=[float(l) for l in lambdas], triples=[list(t) for t in triples],
                  R=R, center=encode_point(c), identity_tol=identity_tol, identity_max_dxz=identity_max_dxz,
                  spread_scales=list(spread_scales) if spread_scales else None, spread_min_dxz=spread_min_dxz,
                  spread_tol=spread_tol)
    rep = ExperimentReport("ancona", params, notes=[UNIFORM_C_NOTE])
    op = ball_operator(g, c, R, h)
    mesh = op.mesh
    pts = [tuple(decode_point(g, p) for p in t) for t in triples]
    geo = [_check_colinear(g, *t) for t in pts]
    poles = sorted({mesh.node_at(p) for t in pts for p in t[1:]})
    col = {p: j for j, p in enumerate(poles)}
    for lam in params["lambdas"]:
        try:
            G = green_columns(op, lam, poles)
        except GraphPotentialError as exc:
            for t in triples:
                rep.rows.append(dict(x=t[0], y=t[1], z=t[2], lam=lam, R=R, h=h, error=type(exc).__name__))
            continue
        for t, (x, y, z), (dxy, dyz, dxz) in zip(triples, pts, geo):
            nx, ny, nz = mesh.node_at(x), mesh.node_at(y), mesh.node_at(z)
            gxz, gxy, gyz, gyy = G[nx, col[nz]], G[nx, col[ny]], G[nz, col[ny]], G[ny, col[ny]]
            A = gxz / (gxy * gyz)
            rep.rows.append(dict(x=t[0], y=t[1], z=t[2], d_xy=dxy, d_yz=dyz, d_xz=dxz, lam=lam, R=R, h=h,
                                 G_xz=gxz, G_xy=gxy, G_yz=gyz, G_yy=gyy, A=A, A_G_yy=A * gyy, error=""))
    ok = [r for r in rep.rows if not r["error"]]
    rep.check("solves_succeeded", len(ok) == len(rep.rows), len(rep.rows) - len(ok),
              "every cell below the spectral barrier")
    rep.check("green_positive", all(r[k] > 0 for r in ok for k in ("G_xz", "G_xy", "G_yz", "G_yy")),
              min((min(r["G_xz"], r["G_xy"], r["G_yz"]) for r in ok), default=float("nan")))
    if identity_tol is not None:
        cells = [r for r in ok if r["d_xz"] <= identity_max_dxz + 1e-9]
        worst = max((abs(r["A_G_yy"] - 1) for r in cells), default=float("nan"))
        rep.check("separating_identity", bool(cells) and worst <= identity_tol, identity_tol - worst,
                  f"max |A G(y,y) - 1| = {worst:.3e} over {len(cells)} cells with d(x,z) <= {identity_max_dxz}")
    if spread_scales:
        s1, s2 = spread_scales
        for lam in params["lambdas"]:
            a1 = [r["A"] for r in ok if r["lam"] == lam and spread_min_dxz - 1e-9 <= r["d_xz"] <= s1 + 1e-9]
            a2 = [r["A"] for r in ok if r["lam"] == lam and spread_min_dxz - 1e-9 <= r["d_xz"] <= s2 + 1e-9]
            sp1, sp2 = _spread(a1), _spread(a2)
            ratio = sp2 / sp1
            rep.check(f"spread_stable@lam={lam:.6g}", ratio <= spread_tol, spread_tol - ratio,
                      f"spread over {spread_min_dxz}<=d(x,z)<={s1}: {sp1:.6g}; up to {s2}: {sp2:.6g}")
            e1 = [r["A"] for r in ok if r["lam"] == lam and abs(r["d_xz"] - s1) <= 1e-9]
            e2 = [r["A"] for r in ok if r["lam"] == lam and abs(r["d_xz"] - s2) <= 1e-9]
            if e1 and e2:
                ratio = _spread(e2) / _spread(e1)
                rep.check(f"spread_stable_at_scale@lam={lam:.6g}", ratio <= spread_tol, spread_tol - ratio,
                          f"spread at d(x,z)={s1}: {_spread(e1):.6g}; at {s2}: {_spread(e2):.6g}")
    return rep


# -- sphere sums ---------------------------------------------------------------------------
def sphere_green_sum(
    graph: str,
    v: int,
    n_list: Sequence[int],
    lam: float,
    h: float,
    R: float,
    center=None,
    margin: float = 1.0,
) -> ExperimentReport:
    """``S_n = sum over vertices w with n < d(v,w) <= n+1 of G(v,w)^2``."""
    spec = spec_string(graph)
    g = graph_from_spec(spec)
    c = _center(g, center)
    vp = g.vertex_point(int(v))
    n_list = [int(n) for n in n_list]
    dc = g.point_vertex_distances(c)[int(v)]
    if dc + max(n_list) + 1 + margin > R + 1e-9:
        raise RadiusExceedsTruncation(f"n={max(n_list)} + margin exceeds the domain radius {R}")
    params = dict(graph=spec, v=int(v), n_list=n_list, lam=float(lam), h=h, R=R, center=encode_point(c),
                  margin=margin)
    rep = ExperimentReport("sphere_sum", params)
    op = ball_operator(g, c, R, h)
    mesh = op.mesh
    G = green_columns(op, lam, [mesh.node_at(vp)])[:, 0]
    dv = g.vertex_distances(int(v))
    for n in n_list:
        ws = np.flatnonzero((dv > n + 1e-9) & (dv <= n + 1 + 1e-9))
        vals = np.array([G[mesh.node_at(g.vertex_point(int(w)))] for w in ws])
        rep.rows.append(dict(n=n, count=len(ws), S=float(np.sum(vals**2)), lam=float(lam), R=R, h=h))
    S = np.array([r["S"] for r in rep.rows])
    med = float(np.median(S))
    rep.check("bounded_no_growth", S[-1] <= 2 * med, 2 * med - S[-1],
              f"S(n={n_list[-1]})={S[-1]:.6g} against twice the median {2 * med:.6g}")
    return rep


# -- Martin kernels --------------------------------------------------------------------------
def martin_convergence(
    graph: str,
    lam: float,
    x0,
    x,
    ray: Sequence[int],
    h: float,
    R: float,
    center=None,
    floor: float = 1e-12,
) -> ExperimentReport:
    """Deviation ``D_n = |K(x0,x,y_n) / K(x0,x,y_{n+2}) - 1|`` along a geodesic ray ``y_n``.

    ``ray[n]`` is the vertex at distance ``n`` from ``x0``.  Deviations below
    ``floor`` are treated as converged (kernel constant to roundoff); the
    fitted rate ``rho`` of ``D_n ~ C rho^n`` uses only values above the floor
    and is reported as 0 when fewer than two remain.
    """
    spec = spec_string(graph)
    g = graph_from_spec(spec)
    c = _center(g, center)
    p0, px = decode_point(g, x0), decode_point(g, x)
    ray = [int(v) for v in ray]
    unit = _unit(g)
    for n, v in enumerate(ray):
        if abs(distance(g, p0, g.vertex_point(v)) - n * unit) > 1e-9:
            raise PreconditionError("ray[n] must be at distance n edges from x0 along a geodesic")
    check_truncation(g, c, R)
    params = dict(graph=spec, lam=float(lam), x0=encode_point(p0), x=encode_point(px), ray=ray, h=h, R=R,
                  center=encode_point(c), floor=floor)
    rep = ExperimentReport("martin", params)
    op = ball_operator(g, c, R, h)
    mesh = op.mesh
    n0, nx = mesh.node_at(p0), mesh.node_at(px)
    poles = [mesh.node_at(g.vertex_point(v)) for v in ray[1:]]
    G = green_columns(op, lam, poles)
    K = G[nx] / G[n0]
    for n in range(1, len(ray) - 2):
        D = abs(K[n - 1] / K[n + 1] - 1)
        rep.rows.append(dict(n=n, y=ray[n], K=float(K[n - 1]), D=float(D), lam=float(lam), R=R, h=h))
    D = {r["n"]: r["D"] for r in rep.rows}
    if 4 in D and 8 in D:
        rep.check("D8_half_D4", D[8] <= max(0.5 * D[4], floor), max(0.5 * D[4], floor) - D[8],
                  f"D_4={D[4]:.3e}, D_8={D[8]:.3e}, floor={floor:g}")
    tail = [(n, d) for n, d in D.items() if n >= 4 and n + 4 in D]
    worst = max((D[n + 4] - max(0.75 * d, floor) for n, d in tail), default=-1.0)
    rep.check("geometric_tail", worst <= 0, -worst, "D_{n+4} <= 0.75 D_n for n >= 4 (above the floor)")
    above = [(n, d) for n, d in sorted(D.items()) if d > floor]
    if len(above) >= 2:
        ns, ds = np.array([a for a, _ in above], float), np.log([b for _, b in above])
        rho = float(math.exp(np.polyfit(ns, ds, 1)[0]))
        rep.notes.append(f"fitted rho from {len(above)} deviations above the floor")
    else:
        rho = 0.0
        rep.notes.append("deviations vanish to roundoff beyond the projection of x on the ray; rho reported as 0")
    rep.rows.append(dict(n="fit", rho=rho))
    rep.check("rho_below_one", rho < 1, 1 - rho, f"rho={rho:.4g}")
    return rep


def _unit(g: MetricGraph) -> float:
    if np.ptp(g.lengths) > 1e-12:
        raise PreconditionError("geodesic rays by edge count need an equilateral graph")
    return float(g.lengths[0])


# -- Green decay along rays ---------------------------------------------------------------------
def green_decay_profile(
    graph: str,
    lambdas: Sequence[float],
    x,
    ray: Sequence[int],
    h: float,
    R: float,
    center=None,
    margin: float = 4.0,
    near: int = 2,
    far: int = 10,
    ratio_tol: float = 0.1,
    monotone_from: int = 3,
) -> ExperimentReport:
    """``G(x, y_n)`` along a geodesic ray for each lambda."""
    spec = spec_string(graph)
    g = graph_from_spec(spec)
    c = _center(g, center)
    px = decode_point(g, x)
    ray = [int(v) for v in ray]
    dc = g.point_vertex_distances(c)
    if max(dc[v] for v in ray) > R - margin + 1e-9:
        raise RadiusExceedsTruncation("the ray must stay inside the domain minus the margin")
    params = dict(graph=spec, lambdas=[float(l) for l in lambdas], x=encode_point(px), ray=ray, h=h, R=R,
                  center=encode_point(c), margin=margin, near=near, far=far, ratio_tol=ratio_tol,
                  monotone_from=monotone_from)
    rep = ExperimentReport("decay", params)
    op = ball_operator(g, c, R, h)
    mesh = op.mesh
    nx = mesh.node_at(px)
    ys = [(v, distance(g, px, g.vertex_point(v))) for v in ray]
    ys = [(v, d) for v, d in ys if d >= 1 - 1e-9]
    for lam in params["lambdas"]:
        G = green_columns(op, lam, [nx])[:, 0]
        vals = []
        for v, d in ys:
            val = float(G[mesh.node_at(g.vertex_point(v))])
            vals.append((d, val))
            rep.rows.append(dict(lam=lam, y=v, distance=d, G=val, R=R, h=h))
        tail = [val for d, val in vals if d >= monotone_from - 1e-9]
        steps = np.diff(tail)
        rep.check(f"strictly_decreasing@lam={lam:.6g}", bool(np.all(steps < 0)),
                  float(-steps.max()) if len(steps) else float("nan"))
        by_d = {round(d, 9): val for d, val in vals}
        if near in by_d and far in by_d:
            ratio = by_d[far] / by_d[near]
            rep.check(f"far_over_near@lam={lam:.6g}", ratio <= ratio_tol, ratio_tol - ratio,
                      f"G(d={far})/G(d={near}) = {ratio:.4g}")
    return rep


# -- Green functions outside a ball ------------------------------------------------------------
def punctured_green(g: MetricGraph, lam: float, x: GraphPoint, z: GraphPoint, y: GraphPoint, r: float,
                    h: float, R_trunc: float, anchor: GraphPoint):
    """``G(x, z : B(anchor, R_trunc) minus closed B(y, r))`` and its operator."""
    op = domain_operator(g, [(anchor, R_trunc)], h, holes=[(y, r)])
    dom = op.mesh.domain
    cx, cz = dom.component_of(x), dom.component_of(z)
    if cx is None or cz is None or cx != cz:
        raise DisconnectedDomain(f"removing the closed ball B(y, {r}) separates x from z")
    return green_columns(op, lam, [op.mesh.node_at(z)])[op.mesh.node_at(x), 0], op


def pre_ancona_profile(
    graph: str,
    lambdas: Sequence[float],
    x,
    y,
    z,
    r_list: Sequence[float],
    h: float,
    R_trunc: float,
    anchor=None,
    mc_N: int = 0,
    seed: int = 0,
) -> ExperimentReport:
    """``V_r = G(x, z)`` on ``B(anchor, R_trunc)`` with the closed ball ``B(y, r)`` removed.

    Checks that ``V_r`` is strictly decreasing in ``r`` and that ``log V_r``
    has a negative least-squares slope.  The faster-than-exponential rate of
    the underlying statement is not tested.  With ``mc_N > 0`` the smallest
    radius is cross-checked by Monte Carlo.
    """
    spec = spec_string(graph)
    g = graph_from_spec(spec)
    a = _center(g, anchor)
    px, py, pz = decode_point(g, x), decode_point(g, y), decode_point(g, z)
    r_list = [float(r) for r in r_list]
    if any(b <= a_ for a_, b in zip(r_list, r_list[1:])):
        raise PreconditionError("radii must be strictly increasing")
    dxy, dyz = distance(g, px, py), distance(g, py, pz)
    if max(r_list) > min(dxy, dyz) + 1e-9:
        raise PreconditionError("every radius must be at most min(d(x,y), d(y,z))")
    if abs(dxy + dyz - distance(g, px, pz)) > 1e-9:
        raise PreconditionError("y must lie on a geodesic from x to z")
    check_truncation(g, a, R_trunc)
    params = dict(graph=spec, lambdas=[float(l) for l in lambdas], x=encode_point(px), y=encode_point(py),
                  z=encode_point(pz), r_list=r_list, h=h, R_trunc=R_trunc, anchor=encode_point(a), mc_N=mc_N,
                  seed=seed)
    rep = ExperimentReport("pre_ancona", params,
                           notes=["the faster-than-exponential decay rate is not reproducible at this scale and "
                                  "is excluded from pass/fail"])
    for lam in params["lambdas"]:
        vals = []
        for r in r_list:
            try:
                V, _ = punctured_green(g, lam, px, pz, py, r, h, R_trunc, a)
                status = "ok"
            except DisconnectedDomain:
                V, status = 0.0, "disconnected"
            vals.append(V)
            rep.rows.append(dict(lam=lam, r=r, V=float(V), log_V=math.log(V) if V > 0 else float("-inf"),
                                 status=status, R=R_trunc, h=h))
        if all(v > 0 for v in vals):
            rep.check(f"strictly_decreasing@lam={lam:.6g}", bool(np.all(np.diff(vals) < 0)),
                      float(-np.max(np.diff(vals))))
            slope = float(np.polyfit(r_list, np.log(vals), 1)[0])
            rep.check(f"log_slope_negative@lam={lam:.6g}", slope < 0, -slope, f"slope={slope:.4g}")
        else:
            rep.check(f"connected@lam={lam:.6g}", False, 0.0,
                      "the puncture separates x from z; V_r = 0 recorded")
    if mc_N > 0:
        lam = params["lambdas"][0]
        r = r_list[0]
        try:
            V, op = punctured_green(g, lam, px, pz, py, r, h, R_trunc, a)
            mesh = build_mesh(op.mesh.domain, h, snap=True)
            est = estimate_green_functional(mesh, lam, mesh.node_at(px), delta_column(mesh, mesh.node_at(pz)),
                                            mc_N, seed, op=assemble_operator(mesh))
            rep.rows.append(dict(lam=lam, r=r, mc_mean=est.mean, mc_stderr=est.stderr, V=float(V),
                                 status="mc", R=R_trunc, h=h))
            rep.check("mc_crosscheck", est.z(V) <= 3, 3 - est.z(V), f"{est.z(V):.3g} standard errors")
        except DisconnectedDomain:
            rep.check("mc_crosscheck", False, 0.0, "disconnected")
    return rep


def tree_separation(graph: str, x, y, z, r: float, h: float, R_trunc: float, anchor=None) -> bool:
    """True when removing the closed ball ``B(y, r)`` separates ``x`` from ``z``."""
    g = graph_from_spec(spec_string(graph))
    dom = make_domain(g, [(_center(g, anchor), R_trunc)], [(decode_point(g, y), r)])
    cx, cz = dom.component_of(decode_point(g, x)), dom.component_of(decode_point(g, z))
    return cx is None or cz is None or cx != cz
