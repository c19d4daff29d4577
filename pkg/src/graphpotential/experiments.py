"""Registry of runnable experiments with JSON-serialisable parameters.

Domains in parameter blocks are dictionaries: ``{"balls": [[p, r], ...],
"holes": [[p, r], ...]}`` for unions of balls minus closed balls, or
``{"whole": true, "boundary": [v, ...] | "leaves"}`` for the whole graph with
Dirichlet vertices.  Points are vertex ids or ``[edge, offset]`` pairs.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

from . import ancona
from .brownian import (
    composition_residual,
    delta_column,
    estimate_green_functional,
    strong_markov_residual,
)
from .domain import Domain, check_truncation, make_domain, whole_graph
from .errors import PreconditionError
from .green import harnack_report, relative_green
from .mesh import assemble_operator, build_mesh
from .report import ExperimentReport, decode_point, encode_point, graph_from_spec, spec_string
from .spectral import dirichlet_eigensystem, heat_kernel, heat_kernel_rows, heat_mass, lambda0_exhaustion


def default_domain(g) -> dict:
    """The truncation ball for truncated families, else the graph with its leaves as boundary."""
    if g.truncation is not None:
        return {"balls": [[int(g.truncation.center), float(g.truncation.radius)]]}
    return {"whole": True, "boundary": "leaves"}


def domain_from_params(g, d: dict | None) -> Domain:
    if d is None:
        d = default_domain(g)
    if d.get("whole"):
        b = d.get("boundary", [])
        if b == "leaves":
            b = [v for v in range(g.n_vertices) if g.degree(v) == 1]
        return whole_graph(g, b)
    balls = [(decode_point(g, p), float(r)) for p, r in d["balls"]]
    holes = [(decode_point(g, p), float(r)) for p, r in d.get("holes", [])]
    for c, r in balls:
        check_truncation(g, c, r)
    return make_domain(g, balls, holes)


def _operator(g, domain: dict | None, h: float, snap: bool = False):
    return assemble_operator(build_mesh(domain_from_params(g, domain), h, snap=snap))


def spectrum(graph: str, h: float, domain: dict | None = None, k: int = 3, reference: list | None = None,
             rel_tol: float = 2e-3) -> ExperimentReport:
    """Lowest Dirichlet eigenvalues, optionally against reference values."""
    spec = spec_string(graph)
    g = graph_from_spec(spec)
    params = dict(graph=spec, h=h, domain=domain, k=k, reference=reference, rel_tol=rel_tol)
    rep = ExperimentReport("spectrum", params)
    basis = dirichlet_eigensystem(_operator(g, domain, h), k)
    for i, lam in enumerate(basis.eigenvalues, start=1):
        rep.rows.append(dict(index=i, eigenvalue=float(lam), h=h))
    rep.check("ground_state_positive", bool(np.all(basis.vectors[:, 0] > 0)), float(basis.vectors[:, 0].min()))
    if reference:
        for i, (lam, ref) in enumerate(zip(basis.eigenvalues, reference), start=1):
            err = abs(lam - ref) / abs(ref)
            rep.check(f"eigenvalue_{i}", err <= rel_tol, rel_tol - err, f"{lam:.10g} vs {ref:.10g}")
    return rep


def heat(graph: str, h: float, x, y, t_list: list, k: int | None = None, domain: dict | None = None) -> ExperimentReport:
    """Heat kernel values, symmetry, total mass and the semigroup identity."""
    spec = spec_string(graph)
    g = graph_from_spec(spec)
    params = dict(graph=spec, h=h, domain=domain, x=x, y=y, t_list=list(t_list), k=k)
    rep = ExperimentReport("heat", params)
    op = _operator(g, domain, h)
    basis = dirichlet_eigensystem(op, k if k is not None else op.size)
    nx, ny = op.mesh.node_at(decode_point(g, x)), op.mesh.node_at(decode_point(g, y))
    for t in t_list:
        pxy, tail = heat_kernel(basis, t, nx, ny)
        pyx, _ = heat_kernel(basis, t, ny, nx)
        mass = heat_mass(basis, t, nx)
        half = heat_kernel_rows(basis, t / 2, nx) @ (op.M * heat_kernel_rows(basis, t / 2, ny))
        rep.rows.append(dict(t=float(t), p_xy=pxy, p_yx=pyx, tail_bound=tail, mass=mass, ck=float(half), h=h))
    sym = max(abs(r["p_xy"] - r["p_yx"]) for r in rep.rows)
    rep.check("symmetry", sym <= 1e-14, 1e-14 - sym)
    top = max(r["mass"] for r in rep.rows)
    rep.check("mass_at_most_one", top <= 1 + 1e-8, 1 + 1e-8 - top)
    ck = max(abs(r["ck"] - r["p_xy"]) / abs(r["p_xy"]) for r in rep.rows)
    rep.check("chapman_kolmogorov", ck <= 1e-6, 1e-6 - ck)
    return rep


def lambda0(graph: str, h: float, radii: list, x0=None, reference: float | None = None,
            rel_tol: float = 0.02, radial: bool = False) -> ExperimentReport:
    """Ground states of nested balls and the resulting estimate."""
    spec = spec_string(graph)
    g = graph_from_spec(spec)
    c = ancona._center(g, x0)
    params = dict(graph=spec, h=h, radii=list(radii), x0=encode_point(c), reference=reference,
                  rel_tol=rel_tol, radial=radial)
    rep = ExperimentReport("lambda0", params)
    if radial:
        ex = ancona.estimate_lambda0(spec, h, radii)
    else:
        ex = lambda0_exhaustion(g, c, radii, h)
    for R, v in zip(ex.radii, ex.values):
        rep.rows.append(dict(R=R, lambda1=v, h=h, method=ex.method))
    rep.rows.append(dict(R="aitken", lambda1=ex.aitken, h=h, method=ex.method + " (extrapolated)"))
    rep.check("non_increasing", ex.monotone, -max(np.diff(ex.values), default=0.0))
    if reference is not None:
        err = abs(ex.estimate - reference) / reference
        rep.check("estimate_vs_reference", err <= rel_tol, rel_tol - err,
                  f"estimate {ex.estimate:.8g}, reference {reference:.8g}, last decrement {ex.decrement:.3g}")
    return rep


def green(graph: str, h: float, lam: float, pairs: list, domain: dict | None = None) -> ExperimentReport:
    """Relative Green values for point pairs, with symmetry and residual checks."""
    spec = spec_string(graph)
    g = graph_from_spec(spec)
    params = dict(graph=spec, h=h, domain=domain, lam=float(lam), pairs=[list(p) for p in pairs])
    rep = ExperimentReport("green", params)
    op = _operator(g, domain, h)
    worst_sym, worst_res = 0.0, 0.0
    for x, y in pairs:
        nx, ny = op.mesh.node_at(decode_point(g, x)), op.mesh.node_at(decode_point(g, y))
        gy, gx = relative_green(op, lam, ny), relative_green(op, lam, nx)
        a, b = gy[nx], gx[ny]
        worst_sym = max(worst_sym, abs(a - b) / abs(a))
        worst_res = max(worst_res, gy.residual, gx.residual)
        rep.rows.append(dict(x=x, y=y, lam=float(lam), G_xy=a, G_yx=b, h=h))
    rep.check("symmetry", worst_sym <= 1e-9, 1e-9 - worst_sym)
    rep.check("residual", worst_res <= 1e-10, 1e-10 - worst_res)
    rep.check("positive", all(r["G_xy"] > 0 for r in rep.rows), min(r["G_xy"] for r in rep.rows))
    return rep


def mc(graph: str, h: float, lambdas: list, x, y, N: int, seed: int, domain: dict | None = None) -> ExperimentReport:
    """Monte Carlo Green functional against the resolvent solve, per lambda."""
    spec = spec_string(graph)
    g = graph_from_spec(spec)
    params = dict(graph=spec, h=h, domain=domain, lambdas=[float(l) for l in lambdas], x=x, y=y, N=N, seed=seed)
    rep = ExperimentReport("mc", params)
    op = _operator(g, domain, h, snap=True)
    mesh = op.mesh
    nx, ny = mesh.node_at(decode_point(g, x)), mesh.node_at(decode_point(g, y))
    for j, lam in enumerate(params["lambdas"]):
        G = relative_green(op, lam, ny)[nx]
        est = estimate_green_functional(mesh, lam, nx, delta_column(mesh, ny), N, seed + j, op=op)
        z = est.z(G)
        rep.rows.append(dict(lam=lam, solver=G, mc_mean=est.mean, mc_stderr=est.stderr, z=z, N=N,
                             seed=seed + j, truncated=est.truncated, h=h))
        rep.check(f"mc_vs_solver@lam={lam:.6g}", z <= 3, 3 - z, f"{z:.3g} standard errors")
    return rep


def harnack(graph: str, h: float, lambdas: list, pole, centers: list, r: float, l: float,
            domain: dict | None = None) -> ExperimentReport:
    """Oscillation of Green fields on balls away from the pole against the explicit bound."""
    spec = spec_string(graph)
    g = graph_from_spec(spec)
    params = dict(graph=spec, h=h, domain=domain, lambdas=[float(v) for v in lambdas], pole=pole,
                  centers=list(centers), r=r, l=l)
    rep = ExperimentReport("harnack", params)
    op = _operator(g, domain, h)
    npole = op.mesh.node_at(decode_point(g, pole))
    for lam in params["lambdas"]:
        fld = relative_green(op, lam, npole)
        for c in centers:
            hr = harnack_report(fld, decode_point(g, c), r, l)
            rep.rows.append(dict(lam=lam, center=c, **hr.to_dict()))
            rep.check(f"ratio_bound@lam={lam:.6g},c={c}", hr.ratio_ok, hr.ratio_bound - hr.ratio,
                      f"ratio {hr.ratio:.4g} <= exp(D) = {hr.ratio_bound:.4g}")
            rep.check(f"gradient_bound@lam={lam:.6g},c={c}", hr.gradient_ok,
                      1.05 * hr.gradient_bound - hr.gradient_integral,
                      f"integral {hr.gradient_integral:.4g} <= 1.05 * {hr.gradient_bound:.4g}")
    return rep


def strong_markov(graph: str, h: float, lambdas: list, x, y, O1: dict, O2: dict, N: int,
                  seed: int) -> ExperimentReport:
    spec = spec_string(graph)
    g = graph_from_spec(spec)
    params = dict(graph=spec, h=h, lambdas=[float(v) for v in lambdas], x=x, y=y, O1=O1, O2=O2, N=N, seed=seed)
    rep = ExperimentReport("strong_markov", params)
    d1, d2 = domain_from_params(g, O1), domain_from_params(g, O2)
    for j, lam in enumerate(params["lambdas"]):
        res = strong_markov_residual(g, lam, decode_point(g, x), decode_point(g, y), d1, d2, h, N, seed + j)
        rep.rows.append(dict(lam=lam, **res.to_dict(), N=N, seed=seed + j, h=h))
        rep.check(f"residual@lam={lam:.6g}", res.z <= 3, 3 - res.z, f"{res.z:.3g} standard errors")
    return rep


def composition(graph: str, h: float, x, O1: dict, O2: dict, O3: dict, N: int, seed: int,
                lambdas: list = (0.0,), f: str | int = "one") -> ExperimentReport:
    """Harmonic measure of the innermost boundary, direct against composed through the middle one.

    ``f`` is ``"one"`` or the index (in sorted order) of a single boundary point to indicate.
    """
    spec = spec_string(graph)
    g = graph_from_spec(spec)
    params = dict(graph=spec, h=h, x=x, O1=O1, O2=O2, O3=O3, N=N, seed=seed,
                  lambdas=[float(v) for v in lambdas], f=f)
    rep = ExperimentReport("composition", params)
    d1, d2, d3 = (domain_from_params(g, d) for d in (O1, O2, O3))
    if f == "one":
        fn = lambda p: 1.0  # noqa: E731
    else:
        target = d3.boundary[int(f)]
        fn = lambda p: 1.0 if p == target else 0.0  # noqa: E731
    for j, lam in enumerate(params["lambdas"]):
        res = composition_residual(g, decode_point(g, x), d1, d2, d3, fn, h, N, seed + 7 * j, lam=lam)
        rep.rows.append(dict(lam=lam, **res.to_dict(), N=N, seed=seed + 7 * j, h=h))
        rep.check(f"residual@lam={lam:.6g}", res.z <= 3, 3 - res.z, f"{res.z:.3g} standard errors")
    return rep


EXPERIMENTS: dict[str, Callable[..., ExperimentReport]] = {
    "spectrum": spectrum,
    "heat": heat,
    "lambda0": lambda0,
    "green": green,
    "mc": mc,
    "harnack": harnack,
    "strong_markov": strong_markov,
    "composition": composition,
    "ancona": ancona.ancona_sweep,
    "sphere_sum": ancona.sphere_green_sum,
    "martin": ancona.martin_convergence,
    "decay": ancona.green_decay_profile,
    "pre_ancona": ancona.pre_ancona_profile,
}

DAT_COLUMNS = {
    "martin": ("n", ["D", "K"], None),
    "decay": ("distance", ["G"], "lam"),
    "pre_ancona": ("r", ["V", "log_V"], "lam"),
    "sphere_sum": ("n", ["S"], None),
    "lambda0": ("R", ["lambda1"], None),
}


def resolve(name: str) -> Callable[..., ExperimentReport]:
    if name not in EXPERIMENTS:
        raise PreconditionError(f"unknown experiment {name!r}; choose from {sorted(EXPERIMENTS)}")
    return EXPERIMENTS[name]
