"""Chunked, deterministic evaluation of checks and report emission."""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .checks import CHECKS, Ctx, NotApplicable
from .config import RunConfig, ScenarioRef, build_inline

CHUNK = 25


class EngineError(RuntimeError):
    """Numerical failure inside the engine (rank drop, degenerate metric, route disagreement)."""


@dataclass
class CheckReport:
    name: str
    per_point: np.ndarray | None
    max: float | None
    mean: float | None
    verdict: str
    worst_index: int | None = None
    worst_coords: np.ndarray | None = None
    details: dict = field(default_factory=dict)
    reason: str = ""

    @property
    def applicable(self) -> bool:
        return self.verdict != "not_applicable"


def verdict_for(mx: float, tol: float, fail_threshold: float) -> str:
    if not math.isfinite(mx):
        return "fail"
    if mx < tol:
        return "pass"
    return "fail" if mx >= fail_threshold else "indeterminate"


def resolve_scenario(ref: ScenarioRef):
    from .catalog import catalog_lookup

    if ref.inline is not None:
        return build_inline(ref.inline, "$.scenario.inline")
    return catalog_lookup(ref.catalog, ref.params)


def _chunk_ranges(points: int):
    return [(s, min(CHUNK, points - s)) for s in range(0, points, CHUNK)]


def _eval_chunk(scenario, names, start, count, seed, tol, fail):
    X = scenario.sample(count, seed, start)
    ctx = Ctx(scenario, X, tol, fail)
    out = {}
    for name in names:
        chk = CHECKS[name]
        try:
            res = chk.fn(ctx)
        except (ArithmeticError, np.linalg.LinAlgError) as e:
            raise EngineError(f"{name}: {type(e).__name__}: {e}") from e
        res = {k: np.asarray(v, dtype=float) for k, v in res.items()}
        if chk.requires_phwc:
            res["_phwc"] = ctx.mp.phwc_defect()
        out[name] = res
    return X, out


def run_checks(config: RunConfig, scenario=None) -> list[CheckReport]:
    """Evaluate ``config.checks`` over ``config.points`` samples; independent of ``config.workers``."""
    scenario = scenario if scenario is not None else resolve_scenario(config.scenario)
    tol, fail = config.tol, config.fail_threshold
    reports: dict[str, CheckReport] = {}
    live = []
    for name in config.checks:
        reason = CHECKS[name].applicable(scenario)
        if reason is None:
            live.append(name)
        else:
            reports[name] = CheckReport(name, None, None, None, "not_applicable", reason=reason)
    if live:
        ranges = _chunk_ranges(config.points)
        job = lambda r: _eval_chunk(scenario, live, r[0], r[1], config.seed, tol, fail)
        if config.workers > 1 and len(ranges) > 1:
            with ThreadPoolExecutor(max_workers=config.workers) as ex:
                results = list(ex.map(job, ranges))
        else:
            results = [job(r) for r in ranges]
        X = np.vstack([r[0] for r in results])
        for name in live:
            arrays = {k: np.concatenate([r[1][name][k] for r in results]) for k in results[0][1][name]}
            reports[name] = _finalize(name, arrays, X, tol, fail)
    return [reports[n] for n in config.checks]


def _finalize(name, arrays, X, tol, fail) -> CheckReport:
    chk = CHECKS[name]
    if chk.requires_phwc:
        p = float(np.max(arrays.pop("_phwc")))
        if not p < tol:
            return CheckReport(name, None, None, None, "not_applicable",
                               reason=f"map is not PHWC on the sample (max defect {p:.3g})")
    from .morphism import RouteDisagreement

    try:
        if chk.finalize is not None:
            details = chk.finalize(arrays, tol, fail)
        else:
            details = {k: float(np.max(arrays[k])) for k in chk.details_max if k in arrays}
    except NotApplicable as e:
        return CheckReport(name, None, None, None, "not_applicable", reason=str(e))
    except RouteDisagreement as e:
        raise EngineError(f"{name}: structural and battery routes disagree") from e
    v = arrays["value"]
    if np.any(np.isnan(v)):
        raise EngineError(f"{name}: non-finite defect")
    idx = int(np.argmax(v))
    mx, mean = float(v[idx]), float(np.mean(v))
    return CheckReport(name, v, mx, mean, verdict_for(mx, tol, fail), idx, X[idx], details)


def exit_code(reports: list[CheckReport]) -> int:
    return 0 if all(r.verdict in ("pass", "not_applicable") for r in reports) else 1


# -- emission ---------------------------------------------------------------


def _num(x) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def _encode(v, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if v is None:
        return "null"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return _num(v)
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, np.ndarray):
        v = v.tolist()
    if isinstance(v, (list, tuple)):
        if not v:
            return "[]"
        items = [_encode(x, indent, level + 1) for x in v]
        if all(not isinstance(x, (dict, list, tuple, np.ndarray)) for x in v):
            return "[" + ", ".join(items) + "]"
        return "[\n" + ",\n".join(pad + s for s in items) + "\n" + end + "]"
    if isinstance(v, dict):
        if not v:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(x, indent, level + 1)}" for k, x in v.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    raise TypeError(f"cannot encode {type(v).__name__}")


def report_document(reports: list[CheckReport], config: RunConfig, scenario_label: str) -> dict:
    checks = []
    for r in reports:
        entry = {"name": r.name, "max": r.max, "mean": r.mean, "verdict": r.verdict,
                 "worst_point": None if r.worst_index is None else
                 {"index": r.worst_index, "coords": [float(c) for c in r.worst_coords]}}
        if r.reason:
            entry["reason"] = r.reason
        entry["details"] = r.details
        checks.append(entry)
    return {"scenario": scenario_label, "seed": config.seed, "points": config.points, "tol": config.tol,
            "checks": checks}


def emit_report(reports: list[CheckReport], format: str = "json", config: RunConfig | None = None,
                scenario_label: str | None = None) -> str:
    if not reports:
        raise ValueError("no reports to emit")
    if config is None:
        config = RunConfig(ScenarioRef(catalog=scenario_label or "unknown"), [r.name for r in reports])
    label = scenario_label or config.scenario.label
    if format == "json":
        return _encode(report_document(reports, config, label), 2, 0) + "\n"
    if format != "text":
        raise ValueError(f"unknown format {format!r}")
    rows = [("check", "verdict", "max", "mean", "worst")]
    for r in reports:
        if r.applicable:
            rows.append((r.name, r.verdict, f"{r.max:.6e}", f"{r.mean:.6e}", str(r.worst_index)))
        else:
            rows.append((r.name, r.verdict, "-", "-", r.reason))
    widths = [max(len(row[i]) for row in rows) for i in range(4)]
    head = f"scenario {label}  seed {config.seed}  points {config.points}  tol {config.tol:g}"
    lines = [head] + ["  ".join(c.ljust(w) for c, w in zip(row[:4], widths)) + "  " + row[4] for row in rows]
    return "\n".join(line.rstrip() for line in lines) + "\n"
