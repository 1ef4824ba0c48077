"""Analysis of a smooth map between charts.

:class:`MapPoint` is the workhorse: for a batch of source points it evaluates
the differential, the adjoint, the horizontal/vertical split and the induced
f-structure as first-order jets, so bracket and Lie-derivative identities can
be checked exactly.  The public functions below wrap it for single points or
batches.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .expr import Expr, as_expr
from .geometry import PointGeometry, RiemannianChart, eval_jet2, laplace_beltrami_jet
from .jetcalc import (
    Jet,
    Jet2,
    canonical_complex_structure,
    commutator_norm,
    gram_schmidt,
    jeinsum,
    jinv,
)

RANK_COND_MAX = 1e10
SUBMERSION_FLOOR = 1e-8


class RankDropError(ArithmeticError):
    pass


class RouteDisagreement(RuntimeError):
    """The two PHM routes disagree; engine bug or misflagged scenario."""

    def __init__(self, report: "PHMReport"):
        self.report = report
        super().__init__(
            f"PHM routes disagree: structural max {report.structural_max:.3g}, battery max {report.battery_max:.3g}"
        )


@dataclass
class HermitianTarget:
    """Target chart carrying an almost complex structure ``J`` (matrix of expressions).

    ``J=None`` means the canonical block rotation on pairs ``(x_k, y_k)``.
    """

    chart: RiemannianChart
    J: list[list[Expr]] | None = None
    standard_J: bool = True
    kahler_checked: bool | None = None

    def __post_init__(self):
        if self.chart.dim % 2:
            raise ValueError("Hermitian target must be even-dimensional")
        if self.J is not None:
            names = self.chart.names
            self.J = [[as_expr(e, names) for e in row] for row in self.J]
            self.standard_J = False

    @property
    def n(self) -> int:
        return self.chart.dim // 2

    def J_jet(self, env: dict, npts: int, m: int) -> Jet:
        """J evaluated through an environment of jets (target or composed)."""
        if self.J is None:
            return Jet.const(np.broadcast_to(canonical_complex_structure(self.n), (npts, 2 * self.n, 2 * self.n)).copy(), m)
        comps = [[eval_jet2(e, env, npts, m) for e in row] for row in self.J]
        val = np.stack([np.stack([c.val for c in row], -1) for row in comps], -2)
        d = np.stack([np.stack([c.grad for c in row], -2) for row in comps], -3)
        return Jet(val, d)

    def J_at(self, Y: np.ndarray) -> Jet:
        """J at target points, derivatives along target coordinates."""
        Y = np.atleast_2d(Y)
        return self.J_jet(self.chart.env(Y), Y.shape[0], self.chart.dim)

    def kahler_form_jet(self, Y: np.ndarray) -> Jet:
        """``Omega(E, E') = h(E, J E')`` at target points."""
        h = self.chart.metric_jet(Y)
        return jeinsum("nac,ncb->nab", h, self.J_at(Y))

    def check(self, Y: np.ndarray, tol: float = 1e-10) -> dict:
        """Verify J^2 = -I and h-compatibility; establish the Kahler flag on samples."""
        from .geometry import exterior_derivative_jet

        Y = np.atleast_2d(Y)
        Jv = self.J_at(Y).val
        h = self.chart.metric_values(Y)
        eye = np.eye(self.chart.dim)
        sq = float(np.max(np.abs(Jv @ Jv + eye)))
        compat = float(np.max(np.abs(np.swapaxes(Jv, -1, -2) @ h @ Jv - h)))
        dom = float(np.max(np.abs(exterior_derivative_jet(self.kahler_form_jet(Y), 2)), initial=0.0))
        nij = 0.0
        if self.J is not None:
            from .structures import nijenhuis_jet

            Jj = self.J_at(Y)
            for a in range(self.chart.dim):
                for b in range(a + 1, self.chart.dim):
                    ea = Jet.const(np.broadcast_to(eye[a], Y.shape).copy(), self.chart.dim)
                    eb = Jet.const(np.broadcast_to(eye[b], Y.shape).copy(), self.chart.dim)
                    nij = max(nij, float(np.max(np.abs(nijenhuis_jet(Jj, ea, eb)))))
        self.kahler_checked = dom < 1e-8 and nij < 1e-8
        return {"J_squared": sq, "compatibility": compat, "d_kahler_form": dom, "nijenhuis": nij}


@dataclass
class SmoothMap:
    """Map from ``source`` to ``target`` with one expression per target coordinate."""

    source: RiemannianChart
    target: object  # HermitianTarget or RiemannianChart
    components: list[Expr]
    label: str = ""
    vertical_seed_coords: tuple[int, ...] | None = None
    submersive: bool = True

    def __post_init__(self):
        names = self.source.names
        self.components = [as_expr(c, names) for c in self.components]
        if len(self.components) != self.target_chart.dim:
            raise ValueError("one component per target coordinate required")
        if self.vertical_seed_coords is None:
            self.vertical_seed_coords = self._choose_vertical_seeds()

    @property
    def target_chart(self) -> RiemannianChart:
        return self.target.chart if isinstance(self.target, HermitianTarget) else self.target

    @property
    def hermitian(self) -> bool:
        return isinstance(self.target, HermitianTarget)

    @property
    def m(self) -> int:
        return self.source.dim

    @property
    def k(self) -> int:
        return self.target_chart.dim

    def _choose_vertical_seeds(self) -> tuple[int, ...]:
        """Coordinate fields with the largest vertical projection at the box centre.

        Chosen once per map, so the vertical frame is a smooth function of the point.
        """
        r = self.m - self.k
        if r <= 0:
            return ()
        c = self.source.center()[None, :]
        mp = MapPoint(self, c, vertical_seeds=tuple(range(self.m)))
        pv = mp.P_V.val[0]
        g = mp.geo.g.val[0]
        chosen: list[int] = []
        basis: list[np.ndarray] = []
        for _ in range(r):
            best, best_val = None, -1.0
            for i in range(self.m):
                if i in chosen:
                    continue
                v = pv[:, i].copy()
                for b in basis:
                    v = v - (v @ g @ b) * b
                nv = float(np.sqrt(max(v @ g @ v, 0.0)))
                if nv > best_val + 1e-12:
                    best, best_val = i, nv
            chosen.append(best)
            v = pv[:, best].copy()
            for b in basis:
                v = v - (v @ g @ b) * b
            basis.append(v / np.sqrt(v @ g @ v))
        return tuple(chosen)

    def evaluate(self, X) -> np.ndarray:
        X = np.atleast_2d(X)
        env = self.source.env(X)
        return np.stack([eval_jet2(c, env, X.shape[0], self.m).val for c in self.components], -1)

    def compose_with(self, outer: "SmoothMap", label: str = "") -> "SmoothMap":
        """``outer . self`` by substituting this map's components into ``outer``."""
        from .expr import BinOp, Call, Neg, Num, Pow, Var

        subs = dict(zip(outer.source.coords, self.components))

        def sub(node):
            if isinstance(node, Var):
                return subs.get(node.name, node)
            if isinstance(node, Num):
                return node
            if isinstance(node, Neg):
                return Neg(sub(node.arg))
            if isinstance(node, Pow):
                return Pow(sub(node.base), node.exponent)
            if isinstance(node, Call):
                return Call(node.func, sub(node.arg))
            return BinOp(node.op, sub(node.left), sub(node.right))

        return SmoothMap(self.source, outer.target, [sub(c) for c in outer.components], label=label)


class MapPoint:
    """All first-order data of a map on a batch of source points."""

    def __init__(self, phi: SmoothMap, X, vertical_seeds: Sequence[int] | None = None,
                 geo: PointGeometry | None = None):
        self.map = phi
        self.X = np.atleast_2d(np.asarray(X, dtype=float))
        self.geo = geo or PointGeometry(phi.source, self.X)
        self.vertical_seeds = tuple(phi.vertical_seed_coords if vertical_seeds is None else vertical_seeds)

    # -- raw jets --------------------------------------------------------

    @property
    def n_pts(self) -> int:
        return self.X.shape[0]

    @property
    def m(self) -> int:
        return self.map.m

    @property
    def k(self) -> int:
        return self.map.k

    @cached_property
    def comp_jets(self) -> list[Jet2]:
        env = self.map.source.env(self.X)
        return [eval_jet2(c, env, self.n_pts, self.m) for c in self.map.components]

    @cached_property
    def Y(self) -> np.ndarray:
        return np.stack([c.val for c in self.comp_jets], -1)

    @cached_property
    def dphi(self) -> Jet:
        """Differential ``(N, k, m)`` with its derivative (second partials)."""
        return Jet(np.stack([c.grad for c in self.comp_jets], 1), np.stack([c.hess for c in self.comp_jets], 1))

    @cached_property
    def composed_env(self) -> dict:
        env = dict(zip(self.map.target_chart.coords, self.comp_jets))
        env.update(self.map.target_chart.params)
        return env

    @cached_property
    def H(self) -> Jet:
        """Target metric along the map, differentiated in source coordinates."""
        tc = self.map.target_chart
        comps = [[eval_jet2(e, self.composed_env, self.n_pts, self.m) for e in row] for row in tc.metric]
        val = np.stack([np.stack([c.val for c in row], -1) for row in comps], -2)
        d = np.stack([np.stack([c.grad for c in row], -2) for row in comps], -3)
        return Jet(0.5 * (val + np.swapaxes(val, -1, -2)), 0.5 * (d + np.swapaxes(d, -2, -3)))

    @cached_property
    def target_geo(self) -> PointGeometry:
        return PointGeometry(self.map.target_chart, self.Y)

    @cached_property
    def J(self) -> Jet:
        if not self.map.hermitian:
            raise TypeError("map target carries no almost complex structure")
        return self.map.target.J_jet(self.composed_env, self.n_pts, self.m)

    @cached_property
    def J_target(self) -> Jet:
        return self.map.target.J_at(self.Y)

    # -- adjoint and split -----------------------------------------------

    @cached_property
    def adjoint(self) -> Jet:
        """``dphi* = G^{-1} dphi^T H`` as an ``(N, m, k)`` jet."""
        ginv = jinv(self.geo.g)
        return jeinsum("nij,naj,nab->nib", ginv, self.dphi, self.H)

    @cached_property
    def M(self) -> Jet:
        """``dphi o dphi*`` as an endomorphism of the target, ``(N, k, k)``."""
        return jeinsum("nai,nib->nab", self.dphi, self.adjoint)

    @cached_property
    def lift(self) -> Jet:
        """Horizontal lift ``dphi^+ = dphi* (dphi dphi*)^{-1}``."""
        cond = np.linalg.cond(self.M.val)
        if np.any(~np.isfinite(cond)) or np.any(cond > RANK_COND_MAX):
            k = int(np.argmax(np.where(np.isfinite(cond), cond, np.inf)))
            raise RankDropError(f"rank drop at {self.X[k].tolist()} (cond {cond[k]:.3g})")
        return jeinsum("nia,nab->nib", self.adjoint, jinv(self.M))

    @cached_property
    def P_H(self) -> Jet:
        return jeinsum("nia,naj->nij", self.lift, self.dphi)

    @cached_property
    def P_V(self) -> Jet:
        eye = np.broadcast_to(np.eye(self.m), (self.n_pts, self.m, self.m))
        return Jet(eye - self.P_H.val, -self.P_H.d)

    @cached_property
    def F(self) -> Jet:
        """Induced f-structure ``dphi^+ J dphi``."""
        return jeinsum("nia,nab,nbj->nij", self.lift, self.J, self.dphi)

    def apply(self, T: Jet, v: Jet) -> Jet:
        return jeinsum("nij,nj->ni", T, v)

    @cached_property
    def horizontal_frame(self) -> list[Jet]:
        """g-orthonormal horizontal frame; J-adapted seeds ``dphi*(e), F dphi*(e)`` when hermitian."""
        seeds = []
        adj = self.adjoint
        if self.map.hermitian:
            for kk in range(self.k // 2):
                s = adj[:, :, 2 * kk]
                seeds.append(s)
                seeds.append(self.apply(self.F, s))
        else:
            seeds = [adj[:, :, a] for a in range(self.k)]
        return gram_schmidt(self.geo.g, seeds)

    @cached_property
    def vertical_frame(self) -> list[Jet]:
        if self.m == self.k:
            return []
        seeds = [self.P_V[:, :, i] for i in self.vertical_seeds]
        return gram_schmidt(self.geo.g, seeds)

    @cached_property
    def frame(self) -> list[Jet]:
        return self.horizontal_frame + self.vertical_frame

    def frame_vals(self, which: str = "all") -> list[np.ndarray]:
        fr = {"all": self.frame, "h": self.horizontal_frame, "v": self.vertical_frame}[which]
        return [f.val for f in fr]

    def hproj(self, v: np.ndarray) -> np.ndarray:
        return np.einsum("nij,nj->ni", self.P_H.val, v)

    def vproj(self, v: np.ndarray) -> np.ndarray:
        return np.einsum("nij,nj->ni", self.P_V.val, v)

    # -- scalar defects --------------------------------------------------

    def phwc_defect(self) -> np.ndarray:
        return commutator_norm(self.M.val, self.J.val)

    def hwc_defect(self) -> np.ndarray:
        """Distance of ``dphi dphi*`` from a multiple of the identity."""
        M = self.M.val
        lam2 = np.trace(M, axis1=-2, axis2=-1) / self.k
        return np.sqrt(np.sum((M - lam2[:, None, None] * np.eye(self.k)) ** 2, axis=(-2, -1)))

    def f_cubed_defect(self) -> np.ndarray:
        F = self.F.val
        return np.sqrt(np.sum((F @ F @ F + F) ** 2, axis=(-2, -1)))

    def compatibility_defect(self) -> np.ndarray:
        fr = self.frame_vals()
        F = self.F.val
        out = np.zeros(self.n_pts)
        for a in fr:
            Fa = np.einsum("nij,nj->ni", F, a)
            for b in fr:
                Fb = np.einsum("nij,nj->ni", F, b)
                out = np.maximum(out, np.abs(self.geo.inner(Fa, b) + self.geo.inner(a, Fb)))
        return out

    def holomorphy_defect(self, structure: Jet) -> np.ndarray:
        """``|| dphi o T - J o dphi ||`` for a source (1,1)-tensor ``T``."""
        diff = self.dphi.val @ structure.val - self.J.val @ self.dphi.val
        return np.sqrt(np.sum(diff**2, axis=(-2, -1)))

    def push_operator(self, v: np.ndarray) -> np.ndarray:
        """Matrix of ``E -> dphi(nabla_v dphi*(E))`` on target coordinate fields."""
        cols = []
        for b in range(self.k):
            cols.append(self.geo.cov_vector(self.adjoint[:, :, b], v))
        nab = np.stack(cols, -1)  # (N, m, k)
        return np.einsum("nai,nib->nab", self.dphi.val, nab)

    def commutator_along(self, v: np.ndarray) -> np.ndarray:
        return commutator_norm(self.push_operator(v), self.J.val)

    def phh_defect(self, v: np.ndarray | None = None) -> np.ndarray:
        if v is not None:
            return self.commutator_along(np.atleast_2d(v))
        out = np.zeros(self.n_pts)
        for X in self.frame_vals("h"):
            out = np.maximum(out, self.commutator_along(X))
        return out

    # -- second-order quantities -----------------------------------------

    def tension(self) -> np.ndarray:
        """``tau^c = g^{ij}(d_i d_j phi^c - Gamma^k_ij d_k phi^c + NGamma^c_ab d_i phi^a d_j phi^b)``."""
        hess = np.stack([c.hess for c in self.comp_jets], 1)
        grad = self.dphi.val
        gi = self.geo.ginv
        t = np.einsum("nij,ncij->nc", gi, hess) - np.einsum("nij,nkij,nck->nc", gi, self.geo.gamma, grad)
        t += np.einsum("nij,ncab,nai,nbj->nc", gi, self.target_geo.gamma, grad, grad)
        return t

    def tension_norm(self) -> np.ndarray:
        t = self.tension()
        return np.sqrt(np.maximum(np.einsum("na,nab,nb->n", t, self.H.val, t), 0.0))

    def nabla_F(self) -> np.ndarray:
        return self.geo.nabla_11(self.F)

    def div_F(self) -> np.ndarray:
        """``div F = trace nabla F``, frame independent."""
        return np.einsum("nij,nkji->nk", self.geo.ginv, self.nabla_F())

    def div_H_F(self) -> np.ndarray:
        nf = self.nabla_F()
        out = np.zeros((self.n_pts, self.m))
        for e in self.frame_vals("h"):
            out += np.einsum("nkji,ni,nj->nk", nf, e, e)
        return out

    def f_div_f(self) -> np.ndarray:
        return np.einsum("nij,nj->ni", self.F.val, self.div_F())

    def cosymplectic_defect(self) -> np.ndarray:
        return self.geo.norm(self.f_div_f())

    def mean_curvature_vertical(self) -> np.ndarray:
        """``mu^V = (1/(m-2n)) sum_a (nabla_{v_a} v_a)^H``."""
        fr = self.vertical_frame
        if not fr:
            return np.zeros((self.n_pts, self.m))
        acc = sum(self.geo.cov_vector(v, v.val) for v in fr)
        return self.hproj(acc) / len(fr)

    def mean_curvature_horizontal(self) -> np.ndarray:
        fr = self.horizontal_frame
        acc = sum(self.geo.cov_vector(h, h.val) for h in fr)
        return self.vproj(acc) / len(fr)

    def cosymplectic_split_residual(self) -> np.ndarray | None:
        r = self.m - self.k
        if r == 0:
            return None
        fdh = np.einsum("nij,nj->ni", self.F.val, self.div_H_F())
        return self.geo.norm(self.mean_curvature_vertical() + fdh / r)

    def div_phi_J(self) -> np.ndarray:
        """``trace_g phi* nabla^N J`` as a target vector."""
        tg = self.target_geo
        nJ = tg.nabla_11(self.J_target)  # (N, c, d, a) = (nabla_a J)^c_d in target coords
        return np.einsum("nij,ncda,nai,ndj->nc", self.geo.ginv, nJ, self.dphi.val, self.dphi.val)

    def decomposition_rhs(self) -> np.ndarray:
        jd = np.einsum("nab,nb->na", self.J_target.val, self.div_phi_J())
        return jd - np.einsum("nai,ni->na", self.dphi.val, self.f_div_f())

    def decomposition_residual(self) -> np.ndarray:
        diff = self.tension() - self.decomposition_rhs()
        return np.sqrt(np.maximum(np.einsum("na,nab,nb->n", diff, self.H.val, diff), 0.0))

    def adapted_frame_tension(self) -> np.ndarray:
        """Tension assembled over the adapted frame {e_i, F e_i, e_alpha}."""
        tg = self.target_geo
        nJ = tg.nabla_11(self.J_target)
        nF = self.nabla_F()
        hf = self.frame_vals("h")
        first = np.zeros((self.n_pts, self.k))
        inner = np.zeros((self.n_pts, self.m))
        for e in hf[0::2]:
            Fe = np.einsum("nij,nj->ni", self.F.val, e)
            for v in (e, Fe):
                dv = np.einsum("nai,ni->na", self.dphi.val, v)
                first += np.einsum("ncda,na,nd->nc", nJ, dv, dv)
                inner += np.einsum("nkji,ni,nj->nk", nF, v, v)
        outer = np.einsum("nij,nj->ni", self.F.val, inner) + (self.m - self.k) * self.mean_curvature_vertical()
        return (np.einsum("nab,nb->na", self.J_target.val, first)
                - np.einsum("nai,ni->na", self.dphi.val, outer))


# ---------------------------------------------------------------------------
# holomorphic battery
# ---------------------------------------------------------------------------


def complex_coordinates(jets: Sequence[Jet2]) -> list[Jet2]:
    return [jets[2 * k] + 1j * jets[2 * k + 1] for k in range(len(jets) // 2)]


def battery(n: int) -> list[tuple[str, Callable[[list[Jet2]], Jet2]]]:
    """First- and second-degree monomials plus ``exp(z1)``."""
    out: list[tuple[str, Callable]] = []
    for g in range(n):
        out.append((f"z{g + 1}", lambda z, g=g: z[g]))
    for g in range(n):
        for d in range(g, n):
            out.append((f"z{g + 1}*z{d + 1}", lambda z, g=g, d=d: z[g] * z[d]))
    out.append(("exp(z1)", lambda z: z[0].exp()))
    return out


def pullback_laplacian(phi: SmoothMap, f: Callable[[list[Jet2]], Jet2], x, mp: MapPoint | None = None) -> np.ndarray:
    """Laplacian of ``f o phi`` for ``f`` holomorphic in the target's complex coordinates."""
    if not (phi.hermitian and phi.target.standard_J):
        raise ValueError("holomorphic test functions need a target with the standard complex structure")
    mp = mp or MapPoint(phi, x)
    z = complex_coordinates(mp.comp_jets)
    out = laplace_beltrami_jet(mp.geo, f(z))
    return out[0] if np.asarray(x).ndim == 1 else out


def battery_max(mp: MapPoint) -> np.ndarray:
    out = np.zeros(mp.n_pts)
    for _, f in battery(mp.k // 2):
        out = np.maximum(out, np.abs(pullback_laplacian(mp.map, f, mp.X, mp)))
    return out


def f_holomorphic_defect(mp: MapPoint, f: Callable[[list[Jet2]], Jet2]) -> np.ndarray:
    """``|| d(f o phi) o F - i d(f o phi) ||`` for holomorphic ``f``."""
    z = complex_coordinates(mp.comp_jets)
    df = f(z).grad
    return np.sqrt(np.sum(np.abs(np.einsum("ni,nij->nj", df, mp.F.val) - 1j * df) ** 2, axis=-1))


@dataclass
class PHMReport:
    verdict: bool
    phwc_max: float
    cosymplectic_max: float
    structural_max: float
    battery_max: float | None
    routes_agree: bool | None
    per_point: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# point-level API
# ---------------------------------------------------------------------------


def _out(x, arr):
    return arr[0] if np.asarray(x).ndim == 1 else arr


def differential_and_adjoint(phi: SmoothMap, x):
    mp = MapPoint(phi, x)
    return _out(x, mp.dphi.val), _out(x, mp.adjoint.val)


@dataclass
class SplitFrame:
    P_H: np.ndarray
    P_V: np.ndarray
    horizontal: list[np.ndarray]
    vertical: list[np.ndarray]


def split(phi: SmoothMap, x) -> SplitFrame:
    mp = MapPoint(phi, x)
    _ = mp.lift
    sl = (lambda a: a[0]) if np.asarray(x).ndim == 1 else (lambda a: a)
    return SplitFrame(sl(mp.P_H.val), sl(mp.P_V.val), [sl(v) for v in mp.frame_vals("h")],
                      [sl(v) for v in mp.frame_vals("v")])


def phwc_defect(phi: SmoothMap, x):
    return _out(x, MapPoint(phi, x).phwc_defect())


def induced_f_structure(phi: SmoothMap, x):
    return _out(x, MapPoint(phi, x).F.val)


def phh_defect(phi: SmoothMap, x, X=None, tol: float = 1e-8):
    mp = MapPoint(phi, x)
    if np.max(mp.phwc_defect()) > tol:
        warnings.warn("PHH defect requested at a non-PHWC point; the commutator is not tensorial there")
    return _out(x, mp.phh_defect(X))


def tension_field(phi: SmoothMap, x):
    return _out(x, MapPoint(phi, x).tension())


def f_div_f(phi: SmoothMap, x):
    """Return ``(F div F, cosymplectic defect, split residual)``."""
    mp = MapPoint(phi, x)
    res = mp.cosymplectic_split_residual()
    return _out(x, mp.f_div_f()), _out(x, mp.cosymplectic_defect()), (None if res is None else _out(x, res))


def tension_decomposition_residual(phi: SmoothMap, x, tol: float = 1e-8):
    mp = MapPoint(phi, x)
    if np.max(mp.phwc_defect()) > tol:
        warnings.warn("tension decomposition is only claimed for PHWC maps")
    return _out(x, mp.decomposition_residual())


def phm_verdict(phi: SmoothMap, X, tol: float = 1e-8, strict: bool = True) -> PHMReport:
    """PHM verdict through the structural route, cross-checked with the battery."""
    mp = MapPoint(phi, X)
    phwc = mp.phwc_defect()
    cos = mp.cosymplectic_defect()
    structural = np.maximum(phwc, cos)
    per_point = {"phwc": phwc, "cosymplectic": cos, "structural": structural}
    bmax = None
    agree = None
    verdict = bool(np.max(structural) < tol)
    if phi.target.standard_J:
        b = battery_max(mp)
        per_point["battery"] = b
        bmax = float(np.max(b))
        agree = (bmax < tol) == verdict
    rep = PHMReport(verdict, float(np.max(phwc)), float(np.max(cos)), float(np.max(structural)), bmax, agree, per_point)
    if strict and agree is False:
        raise RouteDisagreement(rep)
    return rep
