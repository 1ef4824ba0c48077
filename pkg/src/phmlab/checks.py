"""Named checks run by the scenario runner.

A check evaluates one chunk of sample points and returns per-point arrays; the
key ``value`` holds the defect that drives the verdict.  ``finalize`` sees the
concatenated arrays of all chunks and produces the report details, or marks
the check not applicable.  Each check lists the library operations it
exercises (``operations``), which the registry test compares against the
set of core geometric operations.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import constructions as C
from . import morphism as M
from . import structures as S
from .jetcalc import Jet


class NotApplicable(Exception):
    pass


@dataclass
class Ctx:
    scenario: object
    X: np.ndarray
    tol: float
    fail_threshold: float
    _mp: M.MapPoint | None = None

    @property
    def mp(self) -> M.MapPoint:
        if self._mp is None:
            self._mp = M.MapPoint(self.scenario.map, self.X)
        return self._mp


@dataclass
class Check:
    name: str
    fn: Callable[[Ctx], dict]
    applicable: Callable[[object], str | None]
    operations: tuple[str, ...]
    requires_phwc: bool = False
    finalize: Callable[[dict, float, float], dict] | None = None
    details_max: tuple[str, ...] = ()


def _mx(a) -> float:
    return float(np.max(a))


def _default_details(arrays: dict, keys) -> dict:
    return {k: _mx(arrays[k]) for k in keys if k in arrays}


# -- applicability --------------------------------------------------------


def _always(s):
    return None


def _hermitian(s):
    return None if s.map.hermitian else "target carries no almost complex structure"


def _fibers(s):
    if (r := _hermitian(s)) is not None:
        return r
    return None if s.fiber_dim > 0 else "map has no fibers"


def _one_fiber(s):
    if (r := _hermitian(s)) is not None:
        return r
    if s.fiber_dim != 1:
        return f"needs one-dimensional fibers (fiber dimension {s.fiber_dim})"
    return None if s.acs is not None else "no almost contact structure"


def _two_fiber(s):
    if (r := _hermitian(s)) is not None:
        return r
    return None if s.fiber_dim == 2 else f"needs two-dimensional fibers (fiber dimension {s.fiber_dim})"


def _has_cone(s):
    return None if getattr(s, "cone", None) is not None else "scenario has no cone construction"


# -- chunk functions --------------------------------------------------------


def _phwc(c: Ctx) -> dict:
    mp = c.mp
    dphi, adj = M.differential_and_adjoint(c.scenario.map, c.X)
    # g(e_i, dphi* E_a) - h(dphi e_i, E_a) on coordinate bases
    ident = np.abs(np.einsum("nij,nja->nia", mp.geo.g.val, adj) - np.einsum("nai,nab->nib", dphi, mp.H.val))
    return {"value": M.phwc_defect(c.scenario.map, c.X), "adjoint_identity": np.max(ident, axis=(1, 2)),
            "hwc": mp.hwc_defect()}


def _phh(c: Ctx) -> dict:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        v = M.phh_defect(c.scenario.map, c.X)
    return {"value": v}


def _induced_f(c: Ctx) -> dict:
    mp = c.mp
    F = M.induced_f_structure(c.scenario.map, c.X)
    cube = np.sqrt(np.sum((F @ F @ F + F) ** 2, axis=(1, 2)))
    compat = mp.compatibility_defect()
    phwc = mp.phwc_defect()
    viol = np.where((phwc < c.tol) != (compat < c.tol), np.maximum(phwc, compat), 0.0)
    return {"value": np.maximum(cube, viol), "cube": cube, "compatibility": compat, "phwc": phwc}


def _tension(c: Ctx) -> dict:
    tau = M.tension_field(c.scenario.map, c.X)
    return {"value": c.mp.tension_norm(), "max_abs_component": np.max(np.abs(tau), axis=1)}


def _decomposition(c: Ctx) -> dict:
    mp = c.mp
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        r = M.tension_decomposition_residual(c.scenario.map, c.X)
    tau = mp.tension()
    h = mp.H.val
    hn = lambda v: np.sqrt(np.maximum(np.einsum("na,nab,nb->n", v, h, v), 0.0))
    return {"value": r, "phwc": mp.phwc_defect(), "tension_norm": hn(tau), "rhs_norm": hn(mp.decomposition_rhs()),
            "adapted_frame_residual": hn(tau - mp.adapted_frame_tension())}


def _cosymplectic(c: Ctx) -> dict:
    fdf, cos, split = M.f_div_f(c.scenario.map, c.X)
    out = {"value": cos}
    if split is not None:
        out["split_residual"] = split
    return out


def _phm_finalize(arrays, tol, fail):
    d = {"phwc_max": _mx(arrays["phwc"]), "cosymplectic_max": _mx(arrays["cosymplectic"])}
    if "battery" in arrays:
        b = _mx(arrays["battery"])
        s = _mx(arrays["value"])
        d["battery_max"] = b
        d["routes_agree"] = (b < tol) == (s < tol)
        if not d["routes_agree"]:
            rep = M.PHMReport(s < tol, d["phwc_max"], d["cosymplectic_max"], s, b, False)
            raise M.RouteDisagreement(rep)
    return d


def _phm(c: Ctx) -> dict:
    rep = M.phm_verdict(c.scenario.map, c.X, tol=c.tol, strict=False)
    out = {"value": rep.per_point["structural"], "phwc": rep.per_point["phwc"],
           "cosymplectic": rep.per_point["cosymplectic"]}
    if "battery" in rep.per_point:
        out["battery"] = rep.per_point["battery"]
    return out


def _lemma21(c: Ctx) -> dict:
    return {"value": S.lemma21_defect(c.mp)}


def _lemma22(c: Ctx) -> dict:
    mp = c.mp
    nij = S.horizontal_nijenhuis_defect(mp)
    # tensoriality of the bracket expression: scale X by a polynomial and compare
    hf = mp.horizontal_frame
    X, Y = hf[0], hf[1]
    coords = c.X
    fval = 1.0 + coords[:, 0] ** 2 + 0.5 * coords[:, -1]
    fgrad = np.zeros_like(coords)
    fgrad[:, 0] = 2 * coords[:, 0]
    fgrad[:, -1] = 0.5
    fX = Jet(fval[:, None] * X.val, fval[:, None, None] * X.d + np.einsum("ni,nj->nij", X.val, fgrad))
    tens = mp.geo.norm(S.nijenhuis_jet(mp.F, fX, Y) - fval[:, None] * S.nijenhuis_jet(mp.F, X, Y))
    anti = mp.geo.norm(S.nijenhuis_jet(mp.F, X, Y) + S.nijenhuis_jet(mp.F, Y, X))
    info = c.scenario.map.target.check(mp.Y)
    out = {"value": nij, "tensoriality": tens, "antisymmetry": anti}
    if info["d_kahler_form"] < 1e-8 and info["nijenhuis"] < 1e-8:
        k = S.pullback_kahler_closedness(mp)
        out["kahler_pullback_closedness"] = k
        out["value"] = np.maximum(nij, k)
    return out


def _prop21(c: Ctx) -> dict:
    r = S.prop21_residuals(c.mp)
    out = {f"relation_{k}": v for k, v in r.items()}
    out["value"] = np.maximum.reduce(list(r.values()))
    return out


def _cor21(c: Ctx) -> dict:
    r = S.cor21_residuals(c.mp)
    inv = S.foliation_invariants(c.mp)
    out = {k: v for k, v in r.items()}
    out["value"] = np.maximum.reduce(list(r.values()))
    out["phwc_foliation"] = S.phwc_foliation_defect(c.mp)
    out["mu_V_norm"] = c.mp.geo.norm(inv.mu_V)
    out["mu_H_norm"] = c.mp.geo.norm(inv.mu_H)
    out["I_H_norm"] = np.max(np.sqrt(np.sum(inv.I_H**2, axis=-1)), axis=(1, 2))
    return out


def _integrability(c: Ctx) -> dict:
    return {"value": S.induced_integrability_defect(c.mp)}


def _normality(c: Ctx) -> dict:
    s = c.scenario
    r = S.normality_equivalence(c.mp, s.acs)
    ct = S.contact_tensors(s.acs, c.X)
    n1 = np.max(np.sqrt(np.sum(ct["N1"] ** 2, axis=-1)), axis=(1, 2))
    out = {k: v for k, v in r.items()}
    out["value"] = np.maximum.reduce(list(r.values()))
    out["min_defect"] = np.minimum.reduce(list(r.values()))
    out["N1_table"] = n1
    out["N2_table"] = np.max(np.abs(ct["N2"]), axis=(1, 2))
    return out


def _normality_finalize(arrays, tol, fail):
    keys = ("N1", "minimal_invariant", "xi_parallel")
    d = {k: _mx(arrays[k]) for k in keys}
    d.update({f"{k}_min": float(np.min(arrays[k])) for k in keys})
    d["N1_table"] = _mx(arrays["N1_table"])
    d["N2_table"] = _mx(arrays["N2_table"])
    lows = [d[k] < tol for k in keys]
    highs = [d[f"{k}_min"] >= fail for k in keys]
    d["equivalence"] = "all-pass" if all(lows) else ("all-fail" if all(highs) else "mixed")
    return d


_IMPLICATIONS = (("Sasakian", "K-contact"), ("K-contact", "contact-metric"), ("Kenmotsu", "normal"),
                 ("quasi-Sasakian", "normal"), ("Sasakian", "normal"))


def _classify(c: Ctx) -> dict:
    rep = S.classify_acs(c.scenario.acs, c.X, c.tol)
    out = {f"class:{k}": v for k, v in rep.defects.items()}
    viol = np.zeros(len(c.X))
    for a, b in _IMPLICATIONS:
        da, db = rep.defects[a], rep.defects[b]
        viol = np.maximum(viol, np.where((da < c.tol) & (db >= c.tol), db, 0.0))
    out["value"] = viol
    out["alpha"] = rep.alpha
    return out


def _classify_finalize(arrays, tol, fail):
    d = {}
    for k, v in arrays.items():
        if k.startswith("class:"):
            name = k[len("class:"):]
            d[name] = {"max": _mx(v), "verdict": bool(_mx(v) < tol)}
    d["alpha_min"] = float(np.min(arrays["alpha"]))
    d["alpha_max"] = _mx(arrays["alpha"])
    return d


def _wform(c: Ctx) -> dict:
    w = S.w_form(c.scenario.map, c.X)
    return {"value": w["printed_norm"], "variant_norm": w["variant_norm"], "d_printed": w["printed_d_norm"],
            "d_variant": w["variant_d_norm"]}


def _cosymp_identity(c: Ctx) -> dict:
    r = S.cosymplectic_identity_residual(c.mp)
    return {"value": r["residual"], "plus": r["plus"], "minus": r["minus"], "f_div_f": r["f_div_f"]}


def _cosymp_identity_finalize(arrays, tol, fail):
    d = _default_details(arrays, ("plus", "minus", "f_div_f"))
    d["equivalent_to_f_div_f"] = (_mx(arrays["value"]) < tol) == (d["f_div_f"] < tol)
    return d


def _contact_gated(key):
    def fn(c: Ctx) -> dict:
        r = S.olszak_and_blair_residuals(c.scenario.acs, c.X, gate=np.inf)
        out = {"value": r[key], "contact": r["contact"]}
        if key == "olszak":
            out["h_norm"] = r["h_norm"]
            out["symplectic_12"] = r["symplectic_12"]
        return out
    return fn


def _contact_finalize(arrays, tol, fail):
    c = _mx(arrays["contact"])
    if c >= tol:
        raise NotApplicable(f"structure is not contact metric (|deta - Phi| = {c:.3g})")
    return _default_details(arrays, ("contact", "h_norm", "symplectic_12"))


def _cone(c: Ctx) -> dict:
    s = c.scenario
    cone = s.cone
    chk = cone.check(c.X)
    pd = cone.projection_defects(c.X)
    eq = C.cone_equivalences(cone, s.base_map, c.X, c.tol, c.fail_threshold)
    out = {f"pi_{k}": v for k, v in pd.items()}
    jstruct = np.full(len(c.X), max(chk["J_squared"], chk["compatibility"]))
    parts = [pd["tension"], pd["dilation"], pd["geodesic_fibers"], eq["mismatch"], jstruct]
    for key, (a, b) in eq["sides"].items():
        out[f"base_{key}"], out[f"lift_{key}"] = a, b
    for vname, vmap in s.variants.items():
        ev = C.cone_equivalences(cone, vmap, c.X, c.tol, c.fail_threshold)
        parts.append(ev["mismatch"])
        for key, (a, b) in ev["sides"].items():
            out[f"{vname}_base_{key}"], out[f"{vname}_lift_{key}"] = a, b
    out["J_structure"] = jstruct
    out["value"] = np.maximum.reduce(parts)
    return out


def _pattern(a, b, tol, fail):
    if _mx(a) < tol and _mx(b) < tol:
        return "both-pass"
    if float(np.min(a)) >= fail and float(np.min(b)) >= fail:
        return "both-fail"
    return "mixed"


def _cone_finalize(arrays, tol, fail):
    d = {k: _mx(arrays[k]) for k in ("pi_tension", "pi_dilation", "pi_geodesic_fibers", "J_structure")}
    for k in list(arrays):
        if k.startswith("base_") or "_base_" in k:
            lift = k.replace("base_", "lift_")
            d[f"pattern:{k.replace('base_', '')}"] = _pattern(arrays[k], arrays[lift], tol, fail)
            d[k] = _mx(arrays[k])
            d[lift] = _mx(arrays[lift])
    return d


def _adapted_pair(c: Ctx) -> dict:
    s = c.scenario
    pair = C.adapted_pair(s.map, c.X)
    flip = C.adapted_pair(s.map, c.X, orientation=-1)
    inv = pair.invariants()
    swap = np.maximum(np.max(np.abs(flip.J_plus.val - pair.J_minus.val), axis=(1, 2)),
                      np.max(np.abs(flip.J_V.val + pair.J_V.val), axis=(1, 2)))
    rem = pair.vertical_parallelism()
    orient = np.where(inv["orientation_det"] > 0, 0.0, 1.0)
    parts = [inv["plus_squared"], inv["plus_compat"], inv["minus_squared"], inv["minus_compat"],
             inv["rotation"], rem, swap, orient]
    return {"value": np.maximum.reduce(parts), "remark_vertical_parallel": rem, "orientation_swap": swap,
            "orientation_det_min": inv["orientation_det"], "pair_invariants": np.maximum.reduce(parts[:5])}


def _superminimal(c: Ctx) -> dict:
    pair = C.adapted_pair(c.scenario.map, c.X)
    out = {}
    parts = []
    for sign, tag in ((1, "plus"), (-1, "minus")):
        r = C.superminimality_and_integrability(pair, sign)
        for k, v in r.items():
            out[f"{k}_{tag}"] = v
        viol = np.where((r["superminimality"] < c.tol) & (r["nijenhuis"] >= c.tol), r["nijenhuis"], 0.0)
        parts += [r["identity"], viol]
    out["value"] = np.maximum.reduce(parts)
    return out


def _superminimal_finalize(arrays, tol, fail):
    d = {k: _mx(v) for k, v in arrays.items() if k != "value"}
    d["implication_holds"] = all(not (d[f"superminimality_{t}"] < tol) or d[f"nijenhuis_{t}"] < tol
                                 for t in ("plus", "minus"))
    return d


def _cr(c: Ctx) -> dict:
    r = C.cr_defect(c.scenario.map, c.X, c.scenario.acs, c.tol)
    out = {"value": r["cr"]}
    for k, v in r["normality"].items():
        out[f"normality_{k}"] = v
    return out


def _cr_finalize(arrays, tol, fail):
    d = {k: _mx(v) for k, v in arrays.items() if k.startswith("normality_")}
    cr = _mx(arrays["value"])
    nmax = max(d.values())
    d["cross_reference"] = ("not triggered" if cr >= tol else
                            ("consistent" if nmax < tol else "CR holds but normality defects are nonzero"))
    return d


def _phwc_finalize(arrays, tol, fail):
    return _default_details(arrays, ("adjoint_identity", "hwc"))


CHECKS: dict[str, Check] = {c.name: c for c in [
    Check("phwc", _phwc, _hermitian, ("differential_and_adjoint", "phwc_defect"), finalize=_phwc_finalize),
    Check("phh", _phh, _hermitian, ("phh_defect",), requires_phwc=True),
    Check("induced_f", _induced_f, _hermitian, ("induced_f_structure",),
          details_max=("cube", "compatibility", "phwc")),
    Check("tension", _tension, _always, ("tension_field",), details_max=("max_abs_component",)),
    Check("decomposition", _decomposition, _hermitian, ("tension_decomposition_residual",), requires_phwc=True,
          details_max=("tension_norm", "rhs_norm", "adapted_frame_residual")),
    Check("cosymplectic", _cosymplectic, _hermitian, ("f_div_f",), details_max=("split_residual",)),
    Check("phm", _phm, _hermitian, ("phm_verdict", "pullback_laplacian"), finalize=_phm_finalize),
    Check("lemma21", _lemma21, _fibers, ("lemma21_defect",), requires_phwc=True),
    Check("lemma22", _lemma22, _hermitian, ("nijenhuis", "horizontal_nijenhuis_defect", "pullback_kahler_closedness"),
          requires_phwc=True, details_max=("tensoriality", "antisymmetry", "kahler_pullback_closedness")),
    Check("prop21", _prop21, _fibers, ("prop21_residuals",), requires_phwc=True,
          details_max=("relation_i", "relation_ii", "relation_iii", "relation_iv")),
    Check("cor21", _cor21, _fibers, ("foliation_invariants", "phwc_foliation_defect", "cor21_residuals"),
          requires_phwc=True, details_max=("identity", "B_invariance", "L_invariance", "phwc_foliation",
                                           "mu_V_norm", "mu_H_norm", "I_H_norm")),
    Check("integrability", _integrability, _hermitian, ("complex_distribution_integrability",), requires_phwc=True),
    Check("normality", _normality, _one_fiber, ("normality_equivalence", "contact_tensors", "induced_almost_contact"),
          finalize=_normality_finalize),
    Check("classify", _classify, _one_fiber, ("classify_acs",), finalize=_classify_finalize),
    Check("wform", _wform, _fibers, ("w_form",), details_max=("variant_norm", "d_printed", "d_variant")),
    Check("cosymp_identity", _cosymp_identity, _hermitian, ("cosymplectic_identity_residual",),
          finalize=_cosymp_identity_finalize),
    Check("olszak", _contact_gated("olszak"), _one_fiber, ("olszak_and_blair_residuals",), finalize=_contact_finalize),
    Check("blair", _contact_gated("blair"), _one_fiber, ("olszak_and_blair_residuals",), finalize=_contact_finalize),
    Check("cone", _cone, _has_cone, ("build_cone", "cone_equivalences"), finalize=_cone_finalize),
    Check("adapted_pair", _adapted_pair, _two_fiber, ("adapted_pair",),
          details_max=("remark_vertical_parallel", "orientation_swap", "pair_invariants")),
    Check("superminimal", _superminimal, _two_fiber, ("superminimality_and_integrability",),
          finalize=_superminimal_finalize),
    Check("cr", _cr, _one_fiber, ("cr_defect",), finalize=_cr_finalize),
]}
