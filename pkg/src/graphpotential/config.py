"""Run configurations: TOML text to a validated, serialisable :class:`RunConfig`.

A configuration looks like::

    graph = "regular_tree:degree=3,depth=14"
    h = 0.5
    seeds = [0]
    output = "out/tree"

    [lambda]
    fractions = [0.0, 0.5, 0.9]

    [tolerances]
    identity_tol = 0.05

    [[experiment]]
    name = "ancona"
    R = 14.0
    triples = [[1, 0, 6], [2, 0, 9]]

Experiment tables hold the keyword arguments of the registered experiment.
``graph`` and ``h`` default to the top-level values, ``lambdas`` to the
resolved grid, ``lam_fraction`` becomes ``lam = fraction * lambda0``, a
``seed`` argument is filled from each entry of ``seeds`` and tolerance
overrides fill any matching keyword not set in the table.
"""
from __future__ import annotations

import inspect
from dataclasses import asdict, dataclass, field
from typing import Any

import tomli
import tomli_w

from .errors import ConfigParse, GraphPotentialError
from .experiments import EXPERIMENTS, domain_from_params
from .graph import GraphSpec
from .report import decode_point, graph_from_spec

TOP_KEYS = {"graph", "h", "lambda", "experiment", "seeds", "output", "tolerances"}
LAMBDA_KEYS = {"fractions", "values", "lambda0", "lambda0_h"}
POINT_KEYS = ("x", "y", "z", "x0", "pole", "center", "anchor", "v")
POINT_LIST_KEYS = ("centers", "ray")


@dataclass
class LambdaGrid:
    """Either absolute ``values`` or ``fractions`` of the bottom-of-spectrum estimate.

    ``lambda0`` overrides the estimate, which is otherwise computed by
    exhaustion at mesh step ``lambda0_h``.
    """

    fractions: list[float] | None = None
    values: list[float] | None = None
    lambda0: float | None = None
    lambda0_h: float = 0.25

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


@dataclass
class ExperimentConfig:
    name: str
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, **self.params}


@dataclass
class RunConfig:
    graph: str
    h: float
    experiments: list[ExperimentConfig]
    lambdas: LambdaGrid = field(default_factory=LambdaGrid)
    seeds: list[int] = field(default_factory=lambda: [0])
    output: str = "out"
    tolerances: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"graph": self.graph, "h": self.h, "seeds": list(self.seeds), "output": self.output}
        grid = self.lambdas.to_dict()
        if grid:
            out["lambda"] = grid
        if self.tolerances:
            out["tolerances"] = dict(self.tolerances)
        out["experiment"] = [e.to_dict() for e in self.experiments]
        return out

    def to_toml(self) -> str:
        return tomli_w.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        unknown = set(d) - TOP_KEYS
        if unknown:
            raise ConfigParse(f"unknown top-level key(s) {sorted(unknown)}")
        for key in ("graph", "h"):
            if key not in d:
                raise ConfigParse(f"missing top-level key {key!r}")
        try:
            spec = str(GraphSpec.parse(d["graph"]))
            graph_from_spec(spec)
        except GraphPotentialError as exc:
            raise ConfigParse(f"graph: {exc}") from exc
        grid = d.get("lambda", {})
        bad = set(grid) - LAMBDA_KEYS
        if bad:
            raise ConfigParse(f"[lambda]: unknown key(s) {sorted(bad)}")
        if "fractions" in grid and "values" in grid:
            raise ConfigParse("[lambda]: give either fractions or values, not both")
        exps = []
        for i, e in enumerate(d.get("experiment", [])):
            e = dict(e)
            name = e.pop("name", None)
            if name not in EXPERIMENTS:
                raise ConfigParse(f"experiment[{i}]: unknown or missing name {name!r}; "
                                  f"choose from {sorted(EXPERIMENTS)}")
            accepted = set(inspect.signature(EXPERIMENTS[name]).parameters) | {"lam_fraction"}
            extra = set(e) - accepted
            if extra:
                raise ConfigParse(f"experiment[{i}] ({name}): unknown parameter(s) {sorted(extra)}")
            exps.append(ExperimentConfig(name, e))
        if not exps:
            raise ConfigParse("no [[experiment]] tables")
        seeds = d.get("seeds", [0])
        if not isinstance(seeds, list) or not all(isinstance(s, int) for s in seeds) or not seeds:
            raise ConfigParse("seeds must be a non-empty list of integers")
        return cls(
            graph=spec,
            h=float(d["h"]),
            experiments=exps,
            lambdas=LambdaGrid(**grid),
            seeds=list(seeds),
            output=str(d.get("output", "out")),
            tolerances={k: float(v) for k, v in d.get("tolerances", {}).items()},
        )

    @classmethod
    def from_toml(cls, text: str) -> "RunConfig":
        try:
            d = tomli.loads(text)
        except tomli.TOMLDecodeError as exc:
            # the decoder message already carries "(at line L, column C)"
            raise ConfigParse(str(exc)) from exc
        return cls.from_dict(d)

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_toml(fh.read())

    def needs_grid(self) -> bool:
        for e in self.experiments:
            sig = inspect.signature(EXPERIMENTS[e.name]).parameters
            if ("lambdas" in sig and "lambdas" not in e.params) or "lam_fraction" in e.params:
                return True
        return False

    def cells(self, lambda0: float | None) -> list[tuple[int, str, int, dict]]:
        """Fully resolved ``(index, name, seed, kwargs)`` tuples in deterministic order."""
        grid = self.grid(lambda0)
        out = []
        for i, e in enumerate(self.experiments):
            sig = inspect.signature(EXPERIMENTS[e.name]).parameters
            base = dict(e.params)
            if "lam_fraction" in base:
                base["lam"] = float(base.pop("lam_fraction")) * _need(lambda0, e.name)
            for key, val in (("graph", self.graph), ("h", self.h)):
                if key in sig:
                    base.setdefault(key, val)
            if "lambdas" in sig and "lambdas" not in base:
                base["lambdas"] = list(grid)
            for k, v in self.tolerances.items():
                if k in sig:
                    base.setdefault(k, v)
            if "seed" in sig and "seed" not in base:
                for s in self.seeds:
                    out.append((i, e.name, s, {**base, "seed": s}))
            else:
                out.append((i, e.name, int(base.get("seed", self.seeds[0])), base))
        return out

    def grid(self, lambda0: float | None) -> list[float]:
        if self.lambdas.values is not None:
            return [float(v) for v in self.lambdas.values]
        fr = self.lambdas.fractions if self.lambdas.fractions is not None else [0.0, 0.5, 0.9]
        if lambda0 is None:
            return []
        return [float(f) * lambda0 for f in fr]


def _need(lambda0, name):
    if lambda0 is None:
        raise ConfigParse(f"{name}: lam_fraction needs a lambda0 estimate")
    return lambda0


def validate(cfg: RunConfig) -> list[tuple[int, GraphPotentialError]]:
    """Check every referenced point and radius against the graph; returns ``(experiment index, error)``."""
    g = graph_from_spec(cfg.graph)
    errors = []
    from .domain import check_truncation

    for i, e in enumerate(cfg.experiments):
        p = e.params
        try:
            for k in POINT_KEYS:
                if k in p:
                    decode_point(g, p[k])
            for k in POINT_LIST_KEYS:
                for q in p.get(k, []):
                    decode_point(g, q)
            for trip in p.get("triples", []):
                for q in trip:
                    decode_point(g, q)
            for pair in p.get("pairs", []):
                for q in pair:
                    decode_point(g, q)
            for k in ("domain", "O1", "O2", "O3"):
                if k in p:
                    domain_from_params(g, p[k])
            for rk, ck in (("R", "center"), ("R_trunc", "anchor")):
                if rk in p:
                    if ck in p:
                        c = decode_point(g, p[ck])
                    elif g.truncation is not None:
                        c = g.vertex_point(g.truncation.center)
                    else:
                        continue
                    check_truncation(g, c, float(p[rk]))
        except GraphPotentialError as exc:
            errors.append((i, exc))
    return errors
