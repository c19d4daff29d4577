"""Self-describing experiment reports: parameter block, measured rows, verdicts."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Any

from .graph import GraphPoint, GraphSpec, MetricGraph, build_graph


@lru_cache(maxsize=16)
def graph_from_spec(spec: str) -> MetricGraph:
    """Build (and memoise) the graph for a spec string."""
    return build_graph(spec)


def graph_hash(spec: str) -> str:
    return hashlib.sha1(graph_from_spec(spec).to_json().encode()).hexdigest()[:10]


def encode_point(p: GraphPoint) -> int | list:
    """Vertices become their id, other points ``[edge, offset]``."""
    return int(p.vertex) if p.is_vertex else [int(p.edge), float(p.offset)]


def decode_point(g: MetricGraph, obj) -> GraphPoint:
    if isinstance(obj, GraphPoint):
        return g.check_point(obj)
    if isinstance(obj, (int,)) and not isinstance(obj, bool):
        return g.vertex_point(int(obj))
    edge, offset = obj
    return g.point(int(edge), float(offset))


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if hasattr(v, "item"):
        return v.item()
    return v


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return f"{v:.17g}"
    if isinstance(v, (list, tuple)):
        return "[" + " ".join(_fmt(x) for x in v) + "]"
    return str(v)


@dataclass
class Assertion:
    name: str
    passed: bool
    margin: float
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "margin": _jsonable(float(self.margin)),
                "detail": self.detail}


@dataclass
class ExperimentReport:
    """Rows of measurements plus the parameter block that regenerates them.

    ``params`` holds only JSON-serialisable values; passing them back to the
    experiment function registered under ``name`` reproduces the report.
    """

    name: str
    params: dict
    rows: list = field(default_factory=list)
    assertions: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)

    def check(self, name: str, passed: bool, margin: float, detail: str = "") -> Assertion:
        a = Assertion(name, bool(passed), float(margin), detail)
        self.assertions.append(a)
        return a

    def column(self, key: str, **where) -> list:
        return [r[key] for r in self.rows if all(r.get(k) == v for k, v in where.items())]

    @property
    def columns(self) -> list[str]:
        cols: list[str] = []
        for r in self.rows:
            for k in r:
                if k not in cols:
                    cols.append(k)
        return cols

    def to_csv(self, path) -> None:
        cols = self.columns
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(cols) + "\n")
            for r in self.rows:
                fh.write(",".join(_fmt(r.get(c, "")) for c in cols) + "\n")

    def to_json(self) -> dict:
        return {
            "experiment": self.name,
            "params": _jsonable(self.params),
            "assertions": [a.to_dict() for a in self.assertions],
            "notes": list(self.notes),
            "passed": self.passed,
        }

    def to_dat(self, path, x: str, ys: list[str], group: str | None = None) -> None:
        """Whitespace-separated columns for plotting; blank lines between groups."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("# " + " ".join([x, *ys]) + (f"  (blocks by {group})" if group else "") + "\n")
            last = None
            rows = [r for r in self.rows if isinstance(r.get(x), (int, float)) and not isinstance(r.get(x), bool)]
            for k, r in enumerate(rows):
                if group is not None and k > 0 and r.get(group) != last:
                    fh.write("\n")
                last = r.get(group) if group is not None else None
                fh.write(" ".join(_fmt(r.get(c, "nan")) for c in [x, *ys]) + "\n")

    def save(self, outdir, seed: int | None = None, dat: tuple | None = None, stem_name: str | None = None
             ) -> dict[str, Path]:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        spec = self.params.get("graph")
        tag = graph_hash(spec) if spec else "nograph"
        seed = self.params.get("seed", 0) if seed is None else seed
        stem = f"{stem_name or self.name}-{tag}-{seed}"
        paths = {"csv": outdir / f"{stem}.csv", "json": outdir / f"{stem}.json"}
        self.to_csv(paths["csv"])
        with open(paths["json"], "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        if dat is not None:
            paths["dat"] = outdir / f"{stem}.dat"
            self.to_dat(paths["dat"], *dat)
        return paths

    def rerun(self) -> "ExperimentReport":
        from .experiments import EXPERIMENTS

        return EXPERIMENTS[self.name](**self.params)

    def same_numbers(self, other: "ExperimentReport") -> bool:
        """Bit-for-bit equality of all measured rows."""
        return _jsonable(self.rows) == _jsonable(other.rows)


def spec_string(graph: Any) -> str:
    if isinstance(graph, GraphSpec):
        return str(graph)
    if isinstance(graph, str):
        return str(GraphSpec.parse(graph))
    raise TypeError("experiments take a graph spec string so that reports can be re-run")
