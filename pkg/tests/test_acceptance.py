"""Acceptance suite: ten criteria at 200 points, seed 7, tol 1e-8, fail_threshold 0.1.

Each test prints one PASS/FAIL line; ``conftest.py`` repeats them in the terminal summary.
"""

import json
import time

import numpy as np

from expr_corpus import INVALID, NAMES, VALID
from phmlab import morphism as M
from phmlab.catalog import catalog_ids, catalog_lookup
from phmlab.config import load_config
from phmlab.expr import ExprError, evaluate, parse_expression, to_text
from phmlab.jetcalc import Jet, Jet2, central_gradient, central_hessian
from phmlab.runner import emit_report, run_checks
from phmlab.structures import classify_acs, olszak_and_blair_residuals

POINTS, SEED, TOL, FAIL = 200, 7, 1e-8, 0.1
BUDGET = 30.0
LINES: list[str] = []

PHWC_ENTRIES = ["flat_projection", "hopf", "sasakian_r3", "sasakian_r5", "kenmotsu", "skewed_fibration",
                "composed_phm"]
TWO_FIBER = ["superminimal_product", "warped_twist", "cone_over_sasakian_r3"]
DETERMINISM = ["hopf", "sasakian_r5", "skewed_fibration", "warped_twist", "cone_over_sasakian_r3"]


def _run(scenario, checks, params=None, workers=1):
    cfg = load_config({"scenario": {"catalog": scenario, "params": params or {}}, "checks": checks,
                       "points": POINTS, "seed": SEED, "tol": TOL, "fail_threshold": FAIL, "workers": workers})
    return {r.name: r for r in run_checks(cfg)}


class Criterion:
    def __init__(self, number, title):
        self.number, self.title = number, title
        self.problems: list[str] = []
        self.t0 = time.perf_counter()

    def expect(self, ok, what):
        if not ok:
            self.problems.append(what)

    def finish(self):
        dt = time.perf_counter() - self.t0
        self.expect(dt < BUDGET, f"runtime {dt:.1f}s over budget")
        status = "PASS" if not self.problems else "FAIL"
        line = f"criterion {self.number:>2} {status}  {self.title}  ({dt:.2f}s)"
        if self.problems:
            line += "  [" + "; ".join(self.problems[:4]) + "]"
        LINES.append(line)
        print(line)
        assert not self.problems, line


def _expressions(s):
    maps = [s.map] + ([s.base_map] if s.base_map is not None else []) + list(s.variants.values())
    out = []
    for phi in maps:
        for chart in (phi.source, phi.target_chart):
            out += [(chart, e) for row in chart.metric for e in row]
        out += [(phi.source, c) for c in phi.components]
    return out


def _points(chart, s, count):
    if chart is s.source:
        return s.sample(count, SEED)
    lo, hi = np.asarray(chart.box, dtype=float).T
    return lo + (hi - lo) * np.asarray([np.random.default_rng([SEED, i]).random(chart.dim) for i in range(count)])


def _relative(ad, fd, axes):
    # per-point norm-relative error with the denominator floored at 1
    return np.max(np.linalg.norm(ad - fd, axis=axes) / np.maximum(1.0, np.linalg.norm(ad, axis=axes)))


def test_criterion_01_ad_matches_finite_differences():
    c = Criterion(1, "AD gradients/Hessians vs central differences (h=1e-4, rel 1e-6, 100 points)")
    checked = 0
    for cid in catalog_ids():
        s = catalog_lookup(cid, verify=False)
        for chart, e in _expressions(s):
            X = _points(chart, s, 100)
            env = {n: Jet2.variable(X[:, i], i, chart.dim) for i, n in enumerate(chart.coords)} | chart.params
            jet = evaluate(e, env)
            if not isinstance(jet, Jet2):
                continue

            def plain(Z, e=e, chart=chart):
                v = evaluate(e, {n: Z[:, i] for i, n in enumerate(chart.coords)} | chart.params)
                return np.broadcast_to(np.asarray(v, dtype=float), Z.shape[:1])

            grad = np.broadcast_to(jet.grad, X.shape)
            hess = np.broadcast_to(jet.hess, X.shape + (chart.dim,))
            rg = _relative(grad, central_gradient(plain, X, 1e-4), 1)
            rh = _relative(hess, central_hessian(plain, X, 1e-4), (1, 2))
            c.expect(rg < 1e-6 and rh < 1e-6, f"{cid}: {to_text(e)[:40]} grad {rg:.1e} hess {rh:.1e}")
            checked += 1
    c.expect(checked > 50, f"only {checked} expressions checked")
    c.finish()


def test_criterion_02_basic_f_structure():
    c = Criterion(2, "((L_V F)X)^H defect on PHWC entries")
    for cid in PHWC_ENTRIES:
        r = _run(cid, ["lemma21"])["lemma21"]
        c.expect(r.verdict == "pass" and r.max < TOL, f"{cid} {r.verdict} {r.max}")
    c.finish()


def test_criterion_03_nijenhuis_and_integrability():
    c = Criterion(3, "horizontal Nijenhuis, complex distribution, closed pulled-back Kaehler form")
    for cid in PHWC_ENTRIES:
        reps = _run(cid, ["lemma22", "integrability"])
        for name, r in reps.items():
            c.expect(r.max < TOL, f"{cid} {name} {r.max}")
        kp = reps["lemma22"].details.get("kahler_pullback_closedness")
        c.expect(kp is not None and kp < TOL, f"{cid} Kaehler pullback {kp}")
    c.finish()


def test_criterion_04_battery_equivalence():
    c = Criterion(4, "battery harmonic <=> PHWC and cosymplectic")
    seen = []
    for cid in catalog_ids():
        s = catalog_lookup(cid, verify=False)
        if not s.map.target.standard_J:
            continue
        d = _run(cid, ["phm"])["phm"].details
        structural = max(d["phwc_max"], d["cosymplectic_max"])
        c.expect((d["battery_max"] < TOL) == (structural < TOL), f"{cid} battery {d['battery_max']} vs {structural}")
        seen.append(cid)
        if cid in ("flat_projection", "hopf", "composed_phm"):
            c.expect(d["battery_max"] < TOL and structural < TOL, f"{cid} positive witness")
        if cid == "skewed_fibration":
            c.expect(abs(d["battery_max"] - 1) < 1e-6, f"battery {d['battery_max']}")
            c.expect(abs(d["cosymplectic_max"] - 1) < 1e-6, f"cosymplectic {d['cosymplectic_max']}")
    c.expect({"flat_projection", "hopf", "composed_phm", "skewed_fibration"} <= set(seen), "witness missing")
    c.finish()


def test_criterion_05_tension_decomposition():
    c = Criterion(5, "tension decomposition residual; skewed both sides (1,0)")
    for cid in PHWC_ENTRIES:
        r = _run(cid, ["decomposition"])["decomposition"]
        c.expect(r.max < TOL, f"{cid} residual {r.max}")
    s = catalog_lookup("skewed_fibration", verify=False)
    mp = M.MapPoint(s.map, s.sample(POINTS, SEED))
    want = np.tile([1.0, 0.0], (POINTS, 1))
    c.expect(np.max(np.abs(mp.tension() - want)) < 1e-6, "tension side")
    c.expect(np.max(np.abs(mp.decomposition_rhs() - want)) < 1e-6, "structural side")
    c.finish()


def test_criterion_06_normality_equivalence():
    c = Criterion(6, "three-way normality equivalence")
    keys = ("N1", "minimal_invariant", "xi_parallel")
    for cid in ("sasakian_r3", "sasakian_r5", "kenmotsu"):
        d = _run(cid, ["normality"])["normality"].details
        for k in keys:
            c.expect(d[k] < TOL, f"{cid} {k} {d[k]}")
    d = _run("skewed_fibration", ["normality"])["normality"].details
    for k in keys:
        c.expect(d[f"{k}_min"] >= 0.5, f"skewed {k} min {d[k + '_min']}")
    s = catalog_lookup("skewed_fibration", verify=False)
    X = s.sample(POINTS, SEED)
    p = s.acs.at(X)
    dx = Jet.const(np.tile([0.0, 1.0, 0.0], (POINTS, 1)), 3)
    n1 = p.N1(dx, p.xi)
    c.expect(np.max(np.abs(n1 - p.xi.val)) < 1e-6, "N1(d_x, xi) != xi")
    c.expect(np.max(np.abs(p.geo.norm(n1) - 1)) < 1e-6, "|N1(d_x, xi)| != 1")
    mu = M.MapPoint(s.map, X).mean_curvature_vertical()
    c.expect(np.max(np.abs(p.geo.norm(mu) - 1)) < 1e-6, "|mu^V| != 1")
    c.finish()


def test_criterion_07_contact_classes():
    c = Criterion(7, "Sasakian/Kenmotsu classes, W-form, Olszak and Blair")
    s = catalog_lookup("sasakian_r3", verify=False)
    X = s.sample(POINTS, SEED)
    rep = classify_acs(s.acs, X, TOL)
    for name in ("contact-metric", "K-contact", "Sasakian"):
        c.expect(rep.verdict(name), f"sasakian_r3 {name} {rep.max(name)}")
    c.expect(np.max(np.abs(rep.alpha - 1)) < 1e-6, "fitted alpha")
    w = _run("sasakian_r3", ["wform"])["wform"]
    c.expect(w.max < TOL, f"W-form {w.max}")
    k = catalog_lookup("kenmotsu", verify=False)
    Xk = k.sample(POINTS, SEED)
    c.expect(classify_acs(k.acs, Xk, TOL).verdict("Kenmotsu"), "kenmotsu class")
    mu = M.MapPoint(k.map, Xk).mean_curvature_vertical()
    c.expect(np.max(k.acs.at(Xk).geo.norm(mu)) < TOL, "kenmotsu mu^V")
    c.expect(np.max(k.acs.at(Xk).deta_norm()) < 1e-10, "kenmotsu d eta")
    for cid in ("sasakian_r3", "sasakian_r5"):
        e = catalog_lookup(cid, verify=False)
        r = olszak_and_blair_residuals(e.acs, e.sample(POINTS, SEED))
        c.expect(np.max(r["olszak"]) < TOL and np.max(r["blair"]) < TOL, f"{cid} Olszak/Blair")
        c.expect(np.max(r["h_norm"]) < 1e-9, f"{cid} h tensor")
    c.finish()


def test_criterion_08_cone_and_adapted_pairs():
    c = Criterion(8, "cone projection, cone equivalences, vertical parallelism, superminimality")
    d = _run("cone_over_sasakian_r3", ["cone"])["cone"].details
    c.expect(d["pi_tension"] < TOL and d["pi_dilation"] < TOL, "cone projection")
    c.expect(d["pi_geodesic_fibers"] < 1e-9, "radial geodesics")
    for key in ("holomorphic", "phwc_harmonic", "phm"):
        c.expect(d[f"pattern:{key}"] == "both-pass", f"{key} {d[f'pattern:{key}']}")
        c.expect(d[f"pattern:broken_{key}"] in ("both-pass", "both-fail"), f"broken {key}")
    c.expect(d["pattern:broken_holomorphic"] == "both-fail", "conjugated variant stays holomorphic")
    for cid in TWO_FIBER:
        reps = _run(cid, ["adapted_pair", "superminimal"])
        c.expect(reps["adapted_pair"].details["remark_vertical_parallel"] < TOL, f"{cid} vertical parallelism")
        sm = reps["superminimal"].details
        c.expect(max(sm["identity_plus"], sm["identity_minus"]) < TOL, f"{cid} proof identity")
        if cid == "superminimal_product":
            c.expect(sm["superminimality_plus"] < 1e-9 and sm["nijenhuis_plus"] < 1e-9, "product J+")
        if cid == "warped_twist":
            c.expect(sm["superminimality_plus"] >= FAIL, f"warped superminimality {sm['superminimality_plus']}")
            c.expect(sm["nijenhuis_plus"] < TOL, "warped Nijenhuis")
    c.finish()


def test_criterion_09_determinism():
    c = Criterion(9, "byte-identical reports across worker counts")
    for cid in DETERMINISM:
        texts = []
        for workers in (1, 4):
            cfg = load_config({"scenario": f"catalog:{cid}", "points": POINTS, "seed": SEED, "tol": TOL,
                               "fail_threshold": FAIL, "workers": workers})
            texts.append(emit_report(run_checks(cfg), "json", cfg))
        c.expect(texts[0] == texts[1], f"{cid} reports differ")
        c.expect(json.loads(texts[0])["points"] == POINTS, f"{cid} report malformed")
    c.finish()


def test_criterion_10_parser_corpus():
    c = Criterion(10, f"parser corpus ({len(VALID)} valid, {len(INVALID)} invalid) and round trip")
    c.expect(len(VALID) >= 50 and len(INVALID) >= 20, "corpus too small")
    for text in VALID:
        try:
            node = parse_expression(text, NAMES)
        except ExprError as e:
            c.expect(False, f"rejected {text!r}: {e}")
            continue
        c.expect(parse_expression(to_text(node), NAMES) == node, f"round trip {text!r}")
    for text, kind in INVALID:
        try:
            parse_expression(text, NAMES)
            c.expect(False, f"accepted {text!r}")
        except ExprError as e:
            c.expect(e.kind == kind, f"{text!r} gave {e.kind}")
    c.finish()
