"""Derived geometries: induced almost contact structures, cones, adapted pairs.

Cone coordinates are ``(t, base...)`` with ``t`` the radial coordinate
(renamed ``r`` when the base already uses ``t``).  The complex structure on the
cone is the metric-compatible one for ``dt^2 + t^2 g``,

    Jc(X, f d/dt) = (phi X - (f/t) xi, t eta(X) d/dt),

which reduces to the unwarped formula at ``t = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
import numpy as np

from .expr import BinOp, Num, Pow, Var
from .geometry import Field, RiemannianChart, apply11, lie_derivative_11
from .jetcalc import DegenerateFrameError, Jet, jeinsum
from .morphism import MapPoint, SmoothMap
from .structures import AlmostContactStructure, nijenhuis_jet, normality_equivalence

SEED_FLOOR = 1e-8


def _mv(T, v):
    return np.einsum("nij,nj->ni", T, v)


def _unit(m: int, i: int, n: int) -> Jet:
    return Jet.const(np.broadcast_to(np.eye(m)[i], (n, m)).copy(), m)


# ---------------------------------------------------------------------------
# induced almost contact structure
# ---------------------------------------------------------------------------


def induced_almost_contact(phi: SmoothMap, seed=None, label: str = "") -> AlmostContactStructure:
    """``(F, xi, g(., xi))`` for a map with one-dimensional fibers.

    ``seed`` is a coordinate index, a list of component expressions, or ``None``
    for the map's own vertical seed coordinate.  Its vertical projection fixes
    the sign of ``xi``.
    """
    if phi.m - phi.k != 1:
        raise ValueError("induced almost contact structure needs one-dimensional fibers")
    chart = phi.source
    m = chart.dim
    if seed is None:
        seed = phi.vertical_seed_coords[0]
    seed_field = None if isinstance(seed, (int, np.integer)) else Field.from_exprs(chart, seed)

    def seed_jet(X):
        return _unit(m, int(seed), X.shape[0]) if seed_field is None else seed_field(X)

    def xi(X):
        mp = MapPoint(phi, X)
        v = jeinsum("nij,nj->ni", mp.P_V, seed_jet(X))
        nsq = jeinsum("ni,nij,nj->n", v, mp.geo.g, v)
        if np.any(nsq.val < SEED_FLOOR**2):
            k = int(np.argmin(nsq.val))
            raise DegenerateFrameError(f"seed has vanishing vertical projection at {X[k].tolist()}")
        return v * nsq.sqrt().reciprocal()

    def eta(X):
        return jeinsum("nij,nj->ni", chart.metric_jet(X), xi(X))

    acs = AlmostContactStructure(chart, lambda X: MapPoint(phi, X).F, xi, eta,
                                 frame_fn=lambda X: MapPoint(phi, X).horizontal_frame, label=label)
    acs.source_map = phi
    return acs


def holomorphy_defect(phi: SmoothMap, structure, X) -> np.ndarray:
    """``|dphi o T - J o dphi|`` for a (1,1)-field ``T`` on the source."""
    X = np.atleast_2d(X)
    return MapPoint(phi, X).holomorphy_defect(structure(X))


# ---------------------------------------------------------------------------
# cone
# ---------------------------------------------------------------------------


@dataclass
class ConeChart:
    base: RiemannianChart
    acs: AlmostContactStructure
    chart: RiemannianChart
    radial: str
    pi: SmoothMap

    def J(self, X) -> Jet:
        """Cone complex structure as a jet in cone coordinates."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        n, M = X.shape
        Xb = X[:, 1:]
        phi, xi, eta = self.acs.phi(Xb), self.acs.xi(Xb), self.acs.eta(Xb)
        t = X[:, 0]

        def lift_d(j: Jet) -> np.ndarray:
            d = np.zeros(j.val.shape + (M,))
            d[..., 1:] = j.d
            return d

        val = np.zeros((n, M, M))
        d = np.zeros((n, M, M, M))
        val[:, 1:, 1:] = phi.val
        d[:, 1:, 1:] = lift_d(phi)
        val[:, 1:, 0] = -xi.val / t[:, None]
        d[:, 1:, 0] = -lift_d(xi) / t[:, None, None]
        d[:, 1:, 0, 0] += xi.val / t[:, None] ** 2
        val[:, 0, 1:] = t[:, None] * eta.val
        d[:, 0, 1:] = t[:, None, None] * lift_d(eta)
        d[:, 0, 1:, 0] += eta.val
        return Jet(val, d)

    def lift_map(self, phi: SmoothMap, label: str = "") -> SmoothMap:
        """``phi o pi`` on the cone."""
        return SmoothMap(self.chart, phi.target, list(phi.components), label=label or f"{phi.label}_hat")

    def check(self, X) -> dict[str, float]:
        Jv = self.J(X).val
        g = self.chart.metric_values(np.atleast_2d(X))
        M = Jv.shape[-1]
        return {"J_squared": float(np.max(np.abs(Jv @ Jv + np.eye(M)))),
                "compatibility": float(np.max(np.abs(np.swapaxes(Jv, -1, -2) @ g @ Jv - g)))}

    def projection_defects(self, X) -> dict[str, np.ndarray]:
        """Harmonicity, horizontal homothety with dilation 1/t, geodesic radial fibers."""
        X = np.atleast_2d(X)
        mp = MapPoint(self.pi, X)
        k = self.pi.k
        lam2 = 1.0 / X[:, 0] ** 2
        dil = np.sqrt(np.sum((mp.M.val - lam2[:, None, None] * np.eye(k)) ** 2, axis=(1, 2)))
        geod = np.sqrt(np.sum(mp.geo.gamma[:, :, 0, 0] ** 2, axis=1))
        return {"tension": mp.tension_norm(), "dilation": dil, "geodesic_fibers": geod}


def build_cone(acs: AlmostContactStructure, t_interval=(0.5, 2.0)) -> ConeChart:
    lo, hi = float(t_interval[0]), float(t_interval[1])
    if not (0 < lo < hi):
        raise ValueError("cone t-interval must lie in (0, inf) and be bounded away from 0")
    base = acs.chart
    radial = "r" if "t" in base.coords else "t"
    if radial in base.coords:
        raise ValueError("no free radial coordinate name")
    names = [radial] + list(base.coords)
    m = base.dim
    t2 = Pow(Var(radial), 2)
    metric = [[Num(1.0)] + [Num(0.0)] * m]
    for i in range(m):
        metric.append([Num(0.0)] + [BinOp("*", t2, base.metric[i][j]) for j in range(m)])
    box = [(lo, hi)] + [tuple(b) for b in base.box]
    chart = RiemannianChart(names, metric, box=box, label=f"cone({base.label})", params=dict(base.params))
    pi = SmoothMap(chart, base, [Var(c) for c in base.coords], label="pi")
    return ConeChart(base, acs, chart, radial, pi)


def _structural(mp: MapPoint) -> dict[str, np.ndarray]:
    return {"phwc": mp.phwc_defect(), "tension": mp.tension_norm(), "cosymplectic": mp.cosymplectic_defect()}


def cone_equivalences(cone: ConeChart, phi: SmoothMap, X, tol: float = 1e-8, fail_threshold: float = 0.1) -> dict:
    """Both sides of the three cone equivalences at cone sample points ``X``.

    ``mismatch`` is, per point, the larger defect of any statement whose two
    sides fall on different sides of the tolerance, else zero.
    """
    X = np.atleast_2d(X)
    Xb = X[:, 1:]
    hat = cone.lift_map(phi)
    mb, mh = MapPoint(phi, Xb), MapPoint(hat, X)
    sb, sh = _structural(mb), _structural(mh)
    out = {
        "holomorphic": (mb.holomorphy_defect(cone.acs.phi(Xb)), mh.holomorphy_defect(cone.J(X))),
        "phwc_harmonic": (np.maximum(sb["phwc"], sb["tension"]), np.maximum(sh["phwc"], sh["tension"])),
        "phm": (np.maximum(sb["phwc"], sb["cosymplectic"]), np.maximum(sh["phwc"], sh["cosymplectic"])),
    }
    mismatch = np.zeros(len(X))
    pattern = {}
    for key, (a, b) in out.items():
        bad = (a < tol) != (b < tol)
        mismatch = np.maximum(mismatch, np.where(bad, np.maximum(a, b), 0.0))
        pa, pb = float(np.max(a)), float(np.max(b))
        if pa < tol and pb < tol:
            pattern[key] = "both-pass"
        elif float(np.min(a)) >= fail_threshold and float(np.min(b)) >= fail_threshold:
            pattern[key] = "both-fail"
        else:
            pattern[key] = "mixed"
    return {"sides": out, "mismatch": mismatch, "pattern": pattern}


# ---------------------------------------------------------------------------
# adapted pairs for two-dimensional fibers
# ---------------------------------------------------------------------------


class AdaptedPair:
    """``J+- = F +- J_V`` for a PHWC submersion with two-dimensional fibers."""

    def __init__(self, phi: SmoothMap, X, orientation: int = 1):
        if phi.m - phi.k != 2:
            raise ValueError("adapted pair needs two-dimensional fibers")
        if orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        self.map = phi
        self.mp = MapPoint(phi, X)
        self.orientation = orientation

    @cached_property
    def vertical(self) -> tuple[Jet, Jet]:
        v1, v2 = self.mp.vertical_frame
        cols = self.mp.frame_vals("h") + [v1.val, v2.val]
        s = np.sign(np.linalg.det(np.stack(cols, -1))) * self.orientation
        return v1, v2 * Jet.const(s, v2.m)

    @cached_property
    def J_V(self) -> Jet:
        v1, v2 = self.vertical
        g = self.mp.geo.g
        f1 = jeinsum("nij,nj->ni", g, v1)
        f2 = jeinsum("nij,nj->ni", g, v2)
        return jeinsum("ni,nj->nij", v2, f1) - jeinsum("ni,nj->nij", v1, f2)

    @cached_property
    def J_plus(self) -> Jet:
        return self.mp.F + self.J_V

    @cached_property
    def J_minus(self) -> Jet:
        return self.mp.F - self.J_V

    def structure(self, sign: int) -> Jet:
        return self.J_plus if sign > 0 else self.J_minus

    def invariants(self) -> dict[str, np.ndarray]:
        g = self.mp.geo.g.val
        m = self.mp.m
        out = {}
        for key, J in (("plus", self.J_plus), ("minus", self.J_minus)):
            Jv = J.val
            out[f"{key}_squared"] = np.max(np.abs(Jv @ Jv + np.eye(m)), axis=(1, 2))
            out[f"{key}_compat"] = np.max(np.abs(np.swapaxes(Jv, -1, -2) @ g @ Jv - g), axis=(1, 2))
        cols = self.mp.frame_vals("h") + [v.val for v in self.vertical]
        out["orientation_det"] = np.linalg.det(np.stack(cols, -1)) * self.orientation
        v1, v2 = self.vertical
        out["rotation"] = np.maximum(self.mp.geo.norm(_mv(self.J_V.val, v1.val) - v2.val),
                                     self.mp.geo.norm(_mv(self.J_V.val, v2.val) + v1.val))
        return out

    def vertical_parallelism(self) -> np.ndarray:
        """``|(nabla_E J_V)^V|`` on the vertical frame, E over the full frame."""
        mp = self.mp
        out = np.zeros(mp.n_pts)
        for E in mp.frame_vals():
            for v in self.vertical:
                Jv = apply11(self.J_V, v)
                r = mp.vproj(mp.geo.cov_vector(Jv, E)) - _mv(self.J_V.val, mp.vproj(mp.geo.cov_vector(v, E)))
                out = np.maximum(out, mp.geo.norm(r))
        return out


def adapted_pair(phi: SmoothMap, X, orientation: int = 1) -> AdaptedPair:
    return AdaptedPair(phi, X, orientation)


def superminimality_and_integrability(pair: AdaptedPair, sign: int = 1) -> dict[str, np.ndarray]:
    """Superminimality defect, Nijenhuis defect and the proof-identity residual."""
    mp = pair.mp
    J = pair.structure(sign)
    nJ = mp.geo.nabla_11(J)
    sm = np.zeros(mp.n_pts)
    for v in pair.vertical:
        D = np.einsum("nkji,ni->nkj", nJ, v.val)
        sq = np.einsum("nkl,nki,nlj,nij->n", mp.geo.g.val, D, D, mp.geo.ginv)
        sm = np.maximum(sm, np.sqrt(np.maximum(sq, 0.0)))
    fr = mp.horizontal_frame + list(pair.vertical)
    nij = np.zeros(mp.n_pts)
    for a in range(len(fr)):
        for b in range(a + 1, len(fr)):
            nij = np.maximum(nij, mp.geo.norm(nijenhuis_jet(J, fr[a], fr[b])))
    ident = np.zeros(mp.n_pts)
    g = mp.geo
    for X in mp.horizontal_frame:
        JX = apply11(J, X)
        for Y in fr:
            JY = _mv(J.val, Y.val)
            lhs_vec = g.cov_vector(X, JY) + g.cov_vector(JX, Y.val)
            for V in pair.vertical:
                LJ = lie_derivative_11(V, J)
                DJ = np.einsum("nkji,ni->nkj", nJ, V.val)
                rhs = g.inner(X.val, _mv(LJ - DJ, Y.val))
                ident = np.maximum(ident, np.abs(g.inner(lhs_vec, V.val) - rhs))
    return {"superminimality": sm, "nijenhuis": nij, "identity": ident}


def cr_defect(phi: SmoothMap, X, acs: AlmostContactStructure | None = None, tol: float = 1e-8) -> dict:
    """``[dphi o nabla_xi o dphi*, J]`` with a cross-reference to the normality defects."""
    X = np.atleast_2d(X)
    acs = acs or induced_almost_contact(phi)
    mp = MapPoint(phi, X)
    xi = acs.xi(X).val
    cr = mp.commutator_along(xi)
    normal = normality_equivalence(mp, acs)
    nmax = max(float(np.max(v)) for v in normal.values())
    consistent = bool(np.max(cr) >= tol or nmax < tol)
    return {"cr": cr, "normality": normal, "consistent": consistent}
