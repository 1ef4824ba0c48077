"""Run configuration: validation of JSON-compatible documents."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .expr import ExprError
from .geometry import ChartError, MetricDegenerateError, RiemannianChart

FORMATS = ("json", "text")


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


@dataclass
class ScenarioRef:
    catalog: str | None = None
    params: dict = field(default_factory=dict)
    inline: dict | None = None

    @property
    def label(self) -> str:
        return self.catalog if self.catalog else str(self.inline.get("label", "inline"))


@dataclass
class RunConfig:
    scenario: ScenarioRef
    checks: list[str]
    points: int = 200
    seed: int = 0
    tol: float = 1e-8
    fail_threshold: float = 0.1
    format: str = "json"
    workers: int = 1


def _int(doc, key, path, default, lo=None):
    v = doc.get(key, default)
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{path}.{key}", f"expected an integer, got {v!r}")
    if lo is not None and v < lo:
        raise ConfigError(f"{path}.{key}", f"must be >= {lo}")
    return v


def _real(doc, key, path, default):
    v = doc.get(key, default)
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not np.isfinite(v) or v <= 0:
        raise ConfigError(f"{path}.{key}", f"expected a positive real, got {v!r}")
    return float(v)


def _str_list(v, path) -> list[str]:
    if not isinstance(v, list) or not all(isinstance(s, str) for s in v):
        raise ConfigError(path, "expected a list of strings")
    return v


def _matrix(v, path, n) -> list[list[str]]:
    if not isinstance(v, list) or len(v) != n:
        raise ConfigError(path, f"expected a {n}x{n} matrix")
    for i, row in enumerate(v):
        if not isinstance(row, list) or len(row) != n:
            raise ConfigError(f"{path}[{i}]", f"expected a row of length {n}")
        for j, e in enumerate(row):
            if not isinstance(e, (str, int, float)) or isinstance(e, bool):
                raise ConfigError(f"{path}[{i}][{j}]", "expected an expression string or number")
    return [[str(e) for e in row] for row in v]


def _box(v, path, n):
    if v is None:
        return None
    if not isinstance(v, list) or len(v) != n:
        raise ConfigError(path, f"expected {n} intervals")
    out = []
    for i, b in enumerate(v):
        if (not isinstance(b, list) or len(b) != 2 or not all(isinstance(x, (int, float)) for x in b)
                or not b[0] < b[1]):
            raise ConfigError(f"{path}[{i}]", "expected [lo, hi] with lo < hi")
        out.append((float(b[0]), float(b[1])))
    return out


def build_chart(doc: dict, path: str, probe_points: int = 16) -> RiemannianChart:
    """Chart from ``{coords, metric, box?, params?}``, probed for symmetry and SPD."""
    coords = _str_list(doc.get("coords"), f"{path}.coords")
    if not coords or len(set(coords)) != len(coords):
        raise ConfigError(f"{path}.coords", "coordinates must be nonempty and distinct")
    n = len(coords)
    metric = _matrix(doc.get("metric"), f"{path}.metric", n)
    box = _box(doc.get("box"), f"{path}.box", n)
    params = doc.get("params", {})
    if not isinstance(params, dict) or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                                               for v in params.values()):
        raise ConfigError(f"{path}.params", "expected a mapping of names to numbers")
    try:
        chart = RiemannianChart(coords, metric, box=box, label=doc.get("label", ""), params=params)
    except (ExprError, ChartError) as e:
        raise ConfigError(f"{path}.metric", str(e)) from None
    lo, hi = np.asarray(chart.box).T
    probes = lo + (hi - lo) * np.asarray([np.random.default_rng([0, i]).random(n) for i in range(probe_points)])
    probes = np.vstack([chart.center()[None], probes])
    try:
        chart.check_spd(probes)
    except (MetricDegenerateError, ArithmeticError, ValueError) as e:
        raise ConfigError(f"{path}.metric", f"not a Riemannian metric on the box: {e}") from None
    return chart


def parse_scenario(v, path: str = "scenario") -> ScenarioRef:
    if isinstance(v, str):
        if not v.startswith("catalog:") or len(v) <= len("catalog:"):
            raise ConfigError(path, "string form must be 'catalog:<id>'")
        return ScenarioRef(catalog=v[len("catalog:"):])
    if isinstance(v, dict):
        if "catalog" in v:
            params = v.get("params", {})
            if not isinstance(params, dict):
                raise ConfigError(f"{path}.params", "expected a mapping")
            if not isinstance(v["catalog"], str):
                raise ConfigError(f"{path}.catalog", "expected a catalog id")
            return ScenarioRef(catalog=v["catalog"], params=params)
        if "inline" in v:
            inl = v["inline"]
            if not isinstance(inl, dict):
                raise ConfigError(f"{path}.inline", "expected an object")
            for key in ("coords", "metric", "target", "map"):
                if key not in inl:
                    raise ConfigError(f"{path}.inline.{key}", "missing")
            return ScenarioRef(inline=inl)
    raise ConfigError(path, "expected 'catalog:<id>', {catalog, params} or {inline: ...}")


def load_config(doc: Any) -> RunConfig:
    """Validate a JSON-compatible document into a :class:`RunConfig`."""
    from .checks import CHECKS

    if not isinstance(doc, dict):
        raise ConfigError("$", "expected an object")
    known = {"scenario", "checks", "points", "seed", "tol", "fail_threshold", "format", "workers"}
    extra = set(doc) - known
    if extra:
        raise ConfigError("$", f"unknown field(s) {sorted(extra)}")
    if "scenario" not in doc:
        raise ConfigError("$.scenario", "missing")
    scen = parse_scenario(doc["scenario"], "$.scenario")
    checks = doc.get("checks", list(CHECKS))
    checks = _str_list(checks, "$.checks")
    if not checks:
        raise ConfigError("$.checks", "check list is empty")
    for i, c in enumerate(checks):
        if c not in CHECKS:
            raise ConfigError(f"$.checks[{i}]", f"unknown check {c!r}")
    if len(set(checks)) != len(checks):
        raise ConfigError("$.checks", "duplicate check names")
    cfg = RunConfig(
        scenario=scen,
        checks=checks,
        points=_int(doc, "points", "$", 200, lo=1),
        seed=_int(doc, "seed", "$", 0),
        tol=_real(doc, "tol", "$", 1e-8),
        fail_threshold=_real(doc, "fail_threshold", "$", 0.1),
        format=doc.get("format", "json"),
        workers=_int(doc, "workers", "$", 1, lo=1),
    )
    if cfg.format not in FORMATS:
        raise ConfigError("$.format", f"expected one of {FORMATS}")
    if not cfg.tol < cfg.fail_threshold:
        raise ConfigError("$.tol", "tol must be below fail_threshold")
    if scen.inline is not None:
        build_inline(scen.inline, "$.scenario.inline")
    return cfg


def build_inline(inl: dict, path: str = "inline"):
    """Scenario from an inline description: source chart, Hermitian target, map components."""
    from .catalog import Scenario
    from .constructions import induced_almost_contact
    from .morphism import HermitianTarget, SmoothMap

    chart = build_chart(inl, path)
    tdoc = inl["target"]
    if not isinstance(tdoc, dict):
        raise ConfigError(f"{path}.target", "expected {coords, metric, J?}")
    tchart = build_chart(tdoc, f"{path}.target")
    if tchart.dim % 2:
        raise ConfigError(f"{path}.target.coords", "target must be even-dimensional")
    J = tdoc.get("J")
    if J is not None:
        J = _matrix(J, f"{path}.target.J", tchart.dim)
    try:
        target = HermitianTarget(tchart, J)
    except ExprError as e:
        raise ConfigError(f"{path}.target.J", str(e)) from None
    comps = inl["map"]
    if not isinstance(comps, list) or len(comps) != tchart.dim:
        raise ConfigError(f"{path}.map", f"expected {tchart.dim} component expressions")
    try:
        phi = SmoothMap(chart, target, [str(c) for c in comps], label=str(inl.get("label", "inline")))
    except ExprError as e:
        raise ConfigError(f"{path}.map", str(e)) from None
    except (ArithmeticError, ValueError) as e:
        raise ConfigError(f"{path}.map", f"map not submersive at the box centre: {e}") from None
    acs = None
    if phi.m - phi.k == 1:
        seed = inl.get("xi_seed")
        if seed is not None and seed not in chart.coords:
            raise ConfigError(f"{path}.xi_seed", "must name a source coordinate")
        acs = induced_almost_contact(phi, None if seed is None else chart.coords.index(seed))
    return Scenario(str(inl.get("label", "inline")), {}, phi, {}, "inline scenario", acs=acs)
