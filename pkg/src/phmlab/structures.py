"""f-structures, almost contact metric structures and foliation invariants.

Forms are stored as full antisymmetric component arrays.  The exterior
derivative is the componentwise one, ``(dw)_ij = d_i w_j - d_j w_i``; the
contact formulas below use ``deta = d(eta)/2`` so that a contact metric
structure satisfies ``deta = Phi`` and ``N1 = [phi, phi] + 2 deta xi``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .geometry import (
    Field,
    PointGeometry,
    RiemannianChart,
    apply11,
    bracket,
    cbracket,
    codifferential_jet,
    exterior_derivative_jet,
    form_on,
    lie_derivative_11,
    lie_derivative_1form,
    lie_derivative_metric,
    wedge_1_2,
)
from .jetcalc import Jet, gram_schmidt, jeinsum
from .morphism import MapPoint, SmoothMap

CONTACT_GATE = 1e-8


def _mv(T: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.einsum("nij,nj->ni", T, v)


# ---------------------------------------------------------------------------
# Nijenhuis tensor and the complex distribution
# ---------------------------------------------------------------------------


def nijenhuis_jet(F: Jet, X: Jet, Y: Jet) -> np.ndarray:
    """``[F,F](X,Y) = F^2[X,Y] + [FX,FY] - F[FX,Y] - F[X,FY]``."""
    FX = apply11(F, X)
    FY = apply11(F, Y)
    F2 = F.val @ F.val
    return (_mv(F2, bracket(X, Y)) + bracket(FX, FY)
            - _mv(F.val, bracket(FX, Y)) - _mv(F.val, bracket(X, FY)))


def nijenhuis(F: Field, X: Field, Y: Field, x) -> np.ndarray:
    """Nijenhuis tensor of a (1,1)-field on two vector fields at ``x``."""
    from .geometry import same_chart

    same_chart(F, X, Y)
    out = nijenhuis_jet(F(x), X(x), Y(x))
    return out[0] if np.asarray(x).ndim == 1 else out


def plus_i_projector(F: np.ndarray) -> np.ndarray:
    """Projector onto the ``+i`` eigenbundle of an f-structure."""
    return -0.5 * (F @ F + 1j * F)


def complex_distribution_sections(F: Jet, horizontal: Sequence[Jet], vertical: Sequence[Jet]):
    """Real/imaginary jet pairs spanning the kernel plus the ``-i`` eigenbundle."""
    secs = [(v, Jet.const(np.zeros_like(v.val), v.m)) for v in vertical]
    for h in horizontal:
        secs.append((h, apply11(F, h)))
    return secs


def complex_distribution_integrability_jet(F: Jet, horizontal: Sequence[Jet], vertical: Sequence[Jet]) -> np.ndarray:
    Q = plus_i_projector(F.val)
    secs = complex_distribution_sections(F, horizontal, vertical)
    out = np.zeros(F.val.shape[0])
    for a in range(len(secs)):
        for b in range(a + 1, len(secs)):
            re, im = cbracket(secs[a], secs[b])
            w = np.einsum("nij,nj->ni", Q, re + 1j * im)
            out = np.maximum(out, np.sqrt(np.sum(np.abs(w) ** 2, axis=-1)))
    return out


def complex_distribution_integrability(F: Field, x, frame: tuple[Sequence[Field], Sequence[Field]]) -> np.ndarray:
    """Max ``|Q[A, B]|`` over sections of the kernel plus the ``-i`` eigenbundle.

    ``frame`` is ``(horizontal fields, kernel fields)``.
    """
    X = np.atleast_2d(x)
    hor, ver = frame
    Fj = F(X)
    cube = Fj.val @ Fj.val @ Fj.val + Fj.val
    if np.max(np.abs(cube)) > 1e-8:
        raise ValueError("not an f-structure: |F^3 + F| too large")
    out = complex_distribution_integrability_jet(Fj, [h(X) for h in hor], [v(X) for v in ver])
    return out[0] if np.asarray(x).ndim == 1 else out


@dataclass
class FStructureField:
    """(1,1)-field with ``F^3 + F = 0``."""

    chart: RiemannianChart
    F: Field

    def check(self, X) -> dict:
        Fv = self.F(X).val
        cube = float(np.max(np.abs(Fv @ Fv @ Fv + Fv)))
        ranks = np.linalg.matrix_rank(Fv, tol=1e-8)
        return {"cube_defect": cube, "rank_constant": bool(np.all(ranks == ranks[0])), "rank": int(ranks[0])}


# ---------------------------------------------------------------------------
# foliation invariants of a map's fibers
# ---------------------------------------------------------------------------


@dataclass
class FoliationInvariants:
    B_H: np.ndarray  # (N, a, b, m) on the horizontal frame
    I_H: np.ndarray
    mu_H: np.ndarray
    mu_V: np.ndarray
    bott: np.ndarray  # (N, alpha, a, m): [v_alpha, h_a]^H
    lie_identity_residual: np.ndarray


def second_fundamental_form_H(mp: MapPoint) -> np.ndarray:
    hf = mp.horizontal_frame
    geo = mp.geo
    B = np.zeros((mp.n_pts, len(hf), len(hf), mp.m))
    for a, X in enumerate(hf):
        for b, Y in enumerate(hf):
            B[:, a, b] = 0.5 * mp.vproj(geo.cov_vector(Y, X.val) + geo.cov_vector(X, Y.val))
    return B


def foliation_invariants(mp: MapPoint) -> FoliationInvariants:
    hf, vf = mp.horizontal_frame, mp.vertical_frame
    B = second_fundamental_form_H(mp)
    I = np.zeros_like(B)
    for a, X in enumerate(hf):
        for b, Y in enumerate(hf):
            I[:, a, b] = mp.vproj(bracket(X, Y))
    bott = np.zeros((mp.n_pts, len(vf), len(hf), mp.m))
    res = np.zeros(mp.n_pts)
    for al, V in enumerate(vf):
        Lg = lie_derivative_metric(V, mp.geo.g)
        for a, X in enumerate(hf):
            bott[:, al, a] = mp.hproj(bracket(V, X))
            for b, Y in enumerate(hf):
                lhs = np.einsum("nij,ni,nj->n", Lg, X.val, Y.val)
                rhs = -2 * mp.geo.inner(B[:, a, b], V.val)
                res = np.maximum(res, np.abs(lhs - rhs))
    return FoliationInvariants(B, I, mp.mean_curvature_horizontal(), mp.mean_curvature_vertical(), bott, res)


def bott_F_derivative(mp: MapPoint, V: Jet, X: Jet) -> np.ndarray:
    """``(Bott_V F) X = [V, FX]^H - F [V, X]^H`` which equals ``((L_V F) X)^H``."""
    return mp.hproj(_mv(lie_derivative_11(V, mp.F), X.val))


def lemma21_defect(mp: MapPoint) -> np.ndarray:
    out = np.zeros(mp.n_pts)
    for V in mp.vertical_frame:
        for X in mp.horizontal_frame:
            out = np.maximum(out, mp.geo.norm(bott_F_derivative(mp, V, X)))
    return out


def horizontal_nijenhuis_defect(mp: MapPoint) -> np.ndarray:
    hf = mp.horizontal_frame
    out = np.zeros(mp.n_pts)
    for a in range(len(hf)):
        for b in range(a + 1, len(hf)):
            out = np.maximum(out, mp.geo.norm(mp.hproj(nijenhuis_jet(mp.F, hf[a], hf[b]))))
    return out


def pullback_kahler_form(mp: MapPoint) -> Jet:
    omega = jeinsum("nac,ncb->nab", mp.H, mp.J)
    return jeinsum("nai,nab,nbj->nij", mp.dphi, omega, mp.dphi)


def pullback_kahler_closedness(mp: MapPoint) -> np.ndarray:
    d = exterior_derivative_jet(pullback_kahler_form(mp), 2)
    return np.sqrt(np.sum(d**2, axis=(1, 2, 3)))


def induced_integrability_defect(mp: MapPoint) -> np.ndarray:
    return complex_distribution_integrability_jet(mp.F, mp.horizontal_frame, mp.vertical_frame)


def prop21_residuals(mp: MapPoint) -> dict[str, np.ndarray]:
    """Residuals of the four transversally-almost-Hermitian relations.

    (i), (ii) use E over the full frame; (iii), (iv) the Bott derivative with V
    over the vertical frame.
    """
    F = mp.F.val
    nF = mp.nabla_F()
    z = np.zeros(mp.n_pts)
    r = {"i": z.copy(), "ii": z.copy(), "iii": z.copy(), "iv": z.copy()}
    inner = mp.geo.inner
    hf = mp.horizontal_frame
    for E in mp.frame_vals():
        DF = np.einsum("nkji,ni->nkj", nF, E)
        for X in hf:
            DX = mp.hproj(_mv(DF, X.val))
            r["i"] = np.maximum(r["i"], np.abs(inner(DX, X.val)))
            r["ii"] = np.maximum(r["ii"], np.abs(inner(DX, _mv(F, X.val))))
    for V in mp.vertical_frame:
        Lg = lie_derivative_metric(V, mp.geo.g)
        for X in hf:
            FX = _mv(F, X.val)
            bx = bott_F_derivative(mp, V, X)
            lg = lambda a, b: np.einsum("nij,ni,nj->n", Lg, a, b)
            r["iii"] = np.maximum(r["iii"], np.abs(inner(bx, X.val) + lg(X.val, FX)))
            r["iv"] = np.maximum(r["iv"], np.abs(inner(bx, FX) + 0.5 * lg(FX, FX) - 0.5 * lg(X.val, X.val)))
    return r


def cor21_residuals(mp: MapPoint) -> dict[str, np.ndarray]:
    """Lie-derivative identity, and both forms of the J-invariance of B^H / L_V g."""
    inv = foliation_invariants(mp)
    B = inv.B_H
    bdef = np.zeros(mp.n_pts)
    ldef = np.zeros(mp.n_pts)
    for a, X in enumerate(mp.horizontal_frame):
        FX = apply11(mp.F, X)
        for b, Y in enumerate(mp.horizontal_frame):
            FY = apply11(mp.F, Y)
            bfxy = 0.5 * mp.vproj(mp.geo.cov_vector(FY, FX.val) + mp.geo.cov_vector(FX, FY.val))
            bdef = np.maximum(bdef, mp.geo.norm(bfxy - B[:, a, b]))
            for V in mp.vertical_frame:
                Lg = lie_derivative_metric(V, mp.geo.g)
                d = (np.einsum("nij,ni,nj->n", Lg, FX.val, FY.val) - np.einsum("nij,ni,nj->n", Lg, X.val, Y.val))
                ldef = np.maximum(ldef, np.abs(d))
    return {"identity": inv.lie_identity_residual, "B_invariance": bdef, "L_invariance": ldef}


def phwc_foliation_defect(mp: MapPoint) -> np.ndarray:
    """Max of ``|B(FX,FY) - B(X,Y)|`` and ``|(Bott_V F) X|`` over the frames."""
    c = cor21_residuals(mp)
    return np.maximum(c["B_invariance"], lemma21_defect(mp))


def w_form_at(mp: MapPoint, coefficient: str = "printed") -> np.ndarray:
    n = mp.k // 2
    cV = mp.m - n if coefficient == "printed" else mp.m - 2 * n
    w = (2 * n - 2) * mp.mean_curvature_horizontal() - cV * mp.mean_curvature_vertical()
    return mp.geo.flat(w)


def w_form(phi: SmoothMap, X, h: float = 1e-4) -> dict[str, np.ndarray]:
    """W-flat with the printed coefficient and the ``m - 2n`` variant, plus ``|dW|``.

    ``dW`` comes from central differences of W-flat sampled as a field.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    mp = MapPoint(phi, X)
    out = {}
    for key in ("printed", "variant"):
        w = w_form_at(mp, key)
        grads = np.zeros(w.shape + (phi.m,))
        for i in range(phi.m):
            e = np.zeros(phi.m)
            e[i] = h
            wp = w_form_at(MapPoint(phi, X + e), key)
            wm = w_form_at(MapPoint(phi, X - e), key)
            grads[:, :, i] = (wp - wm) / (2 * h)
        dw = np.swapaxes(grads, 1, 2) - grads  # (N, i, j) = d_i w_j - d_j w_i
        out[key] = w
        out[f"{key}_norm"] = mp.geo.norm(mp.geo.sharp(w))
        out[f"{key}_d_norm"] = np.sqrt(np.sum(dw**2, axis=(1, 2)))
    return out


def fundamental_form_F(mp: MapPoint) -> Jet:
    return jeinsum("nik,nkj->nij", mp.geo.g, mp.F)


def cosymplectic_identity_residual(mp: MapPoint) -> dict[str, np.ndarray]:
    """Both orientations of ``2n mu_H - (m-2n) mu_V = sum dPhi(e_i, F e_i, .)``."""
    n = mp.k // 2
    lhs = mp.geo.flat(2 * n * mp.mean_curvature_horizontal() - (mp.m - 2 * n) * mp.mean_curvature_vertical())
    dPhi = exterior_derivative_jet(fundamental_form_F(mp), 2)
    rhs = np.zeros_like(lhs)
    for e in mp.frame_vals("h")[0::2]:
        rhs += np.einsum("nijk,ni,nj->nk", dPhi, e, _mv(mp.F.val, e))
    nrm = lambda w: mp.geo.norm(mp.geo.sharp(w))
    plus, minus = nrm(lhs - rhs), nrm(lhs + rhs)
    return {"lhs": lhs, "rhs": rhs, "plus": plus, "minus": minus, "residual": np.minimum(plus, minus),
            "f_div_f": mp.cosymplectic_defect()}


# ---------------------------------------------------------------------------
# almost contact metric structures
# ---------------------------------------------------------------------------


class NotContactMetric(ValueError):
    def __init__(self, defect: float):
        self.defect = defect
        super().__init__(f"structure is not contact metric (|deta - Phi| = {defect:.3g})")


@dataclass
class AlmostContactStructure:
    """``(phi, xi, eta)`` on a chart of odd dimension, given as jet-valued callables.

    ``frame_fn(X)`` may supply an adapted horizontal frame ``e1, phi e1, ...``;
    otherwise one is built from coordinate fields chosen once at the box centre.
    """

    chart: RiemannianChart
    phi: Callable[[np.ndarray], Jet]
    xi: Callable[[np.ndarray], Jet]
    eta: Callable[[np.ndarray], Jet]
    frame_fn: Callable[[np.ndarray], list[Jet]] | None = None
    label: str = ""
    seed_coords: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.chart.dim % 2 != 1:
            raise ValueError("almost contact structures live on odd-dimensional charts")

    @classmethod
    def from_exprs(cls, chart: RiemannianChart, phi, xi, eta, label: str = "") -> "AlmostContactStructure":
        return cls(chart, Field.from_exprs(chart, phi, "11"), Field.from_exprs(chart, xi),
                   Field.from_exprs(chart, eta, "form"), label=label)

    @property
    def n(self) -> int:
        return (self.chart.dim - 1) // 2

    def at(self, X) -> "ACSPoint":
        return ACSPoint(self, np.atleast_2d(np.asarray(X, dtype=float)))

    def check(self, X) -> dict[str, float]:
        p = self.at(X)
        m = self.chart.dim
        phi, xi, eta = p.phi.val, p.xi.val, p.eta.val
        sq = phi @ phi + np.eye(m) - np.einsum("ni,nj->nij", xi, eta)
        fr = p.frame_vals
        met = 0.0
        for a in fr:
            for b in fr:
                lhs = p.geo.inner(_mv(phi, a), _mv(phi, b))
                rhs = p.geo.inner(a, b) - np.einsum("ni,ni->n", eta, a) * np.einsum("ni,ni->n", eta, b)
                met = max(met, float(np.max(np.abs(lhs - rhs))))
        return {"phi_squared": float(np.max(np.abs(sq))),
                "eta_xi": float(np.max(np.abs(np.einsum("ni,ni->n", eta, xi) - 1))),
                "metric": met}

    def _choose_seeds(self) -> tuple[int, ...]:
        c = self.chart.center()[None, :]
        p = ACSPoint(self, c, build_frame=False)
        g = p.geo.g.val[0]
        phi, xi, eta = p.phi.val[0], p.xi.val[0], p.eta.val[0]
        basis: list[np.ndarray] = []
        chosen: list[int] = []

        def residual(v):
            v = v - (eta @ v) * xi
            for b in basis:
                v = v - (v @ g @ b) * b
            return v

        for _ in range(self.n):
            scores = [np.sqrt(max(residual(np.eye(self.chart.dim)[i]) @ g @ residual(np.eye(self.chart.dim)[i]), 0))
                      if i not in chosen else -1 for i in range(self.chart.dim)]
            i = int(np.argmax(scores))
            chosen.append(i)
            v = residual(np.eye(self.chart.dim)[i])
            v = v / np.sqrt(v @ g @ v)
            basis.append(v)
            w = residual(phi @ v)
            basis.append(w / np.sqrt(w @ g @ w))
        return tuple(chosen)


class ACSPoint:
    """Tensors of an almost contact structure on a batch, with derivatives."""

    def __init__(self, acs: AlmostContactStructure, X: np.ndarray, build_frame: bool = True):
        self.acs = acs
        self.X = X
        self.geo = PointGeometry(acs.chart, X)
        self.phi = acs.phi(X)
        self.xi = acs.xi(X)
        self.eta = acs.eta(X)
        self._build_frame = build_frame

    @property
    def n_pts(self) -> int:
        return self.X.shape[0]

    @property
    def m(self) -> int:
        return self.acs.chart.dim

    @cached_property
    def horizontal_frame(self) -> list[Jet]:
        if self.acs.frame_fn is not None:
            return self.acs.frame_fn(self.X)
        if self.acs.seed_coords is None:
            self.acs.seed_coords = self.acs._choose_seeds()
        m = self.m
        seeds = []
        for i in self.acs.seed_coords:
            e = Jet.const(np.broadcast_to(np.eye(m)[i], (self.n_pts, m)).copy(), m)
            s = e - jeinsum("ni,ni->n", self.eta, e) * self.xi
            seeds.append(s)
            seeds.append(apply11(self.phi, s))
        return gram_schmidt(self.geo.g, seeds)

    @cached_property
    def frame(self) -> list[Jet]:
        return self.horizontal_frame + [self.xi]

    @property
    def frame_vals(self) -> list[np.ndarray]:
        return [f.val for f in self.frame]

    @cached_property
    def Phi(self) -> Jet:
        """``Phi(X, Y) = g(X, phi Y)``."""
        return jeinsum("nik,nkj->nij", self.geo.g, self.phi)

    @cached_property
    def deta(self) -> np.ndarray:
        """Half the componentwise exterior derivative of eta."""
        return 0.5 * exterior_derivative_jet(self.eta, 1)

    @cached_property
    def dPhi(self) -> np.ndarray:
        return exterior_derivative_jet(self.Phi, 2)

    @cached_property
    def nabla_phi(self) -> np.ndarray:
        return self.geo.nabla_11(self.phi)

    def nabla_phi_along(self, v: np.ndarray) -> np.ndarray:
        return np.einsum("nkji,ni->nkj", self.nabla_phi, v)

    @cached_property
    def h_tensor(self) -> np.ndarray:
        return 0.5 * lie_derivative_11(self.xi, self.phi)

    def N1(self, X: Jet, Y: Jet) -> np.ndarray:
        return nijenhuis_jet(self.phi, X, Y) + 2 * form_on(self.deta, X.val, Y.val)[:, None] * self.xi.val

    def N2(self, X: Jet, Y: Jet) -> np.ndarray:
        a = lie_derivative_1form(apply11(self.phi, X), self.eta)
        b = lie_derivative_1form(apply11(self.phi, Y), self.eta)
        return np.einsum("ni,ni->n", a, Y.val) - np.einsum("ni,ni->n", b, X.val)

    def pairs(self, frame=None):
        fr = self.frame if frame is None else frame
        for a in range(len(fr)):
            for b in range(a + 1, len(fr)):
                yield fr[a], fr[b]

    # -- defects ---------------------------------------------------------

    def normal_defect(self) -> np.ndarray:
        out = np.zeros(self.n_pts)
        for X, Y in self.pairs():
            out = np.maximum(out, self.geo.norm(self.N1(X, Y)))
        return out

    def contact_defect(self) -> np.ndarray:
        diff = self.deta - self.Phi.val
        out = np.zeros(self.n_pts)
        for X, Y in self.pairs():
            out = np.maximum(out, np.abs(form_on(diff, X.val, Y.val)))
        return out

    def killing_defect(self) -> np.ndarray:
        Lg = lie_derivative_metric(self.xi, self.geo.g)
        out = np.zeros(self.n_pts)
        for a in self.frame_vals:
            for b in self.frame_vals:
                out = np.maximum(out, np.abs(np.einsum("nij,ni,nj->n", Lg, a, b)))
        return out

    def _dphi_pairs(self):
        fr = self.frame_vals
        A = {}
        for i, a in enumerate(fr):
            Na = self.nabla_phi_along(a)
            for j, b in enumerate(fr):
                A[i, j] = _mv(Na, b)
        return fr, A

    def alpha_sasakian(self) -> tuple[np.ndarray, np.ndarray]:
        """Least-squares ``alpha`` in ``(nabla_X phi) Y = alpha (g(X,Y) xi - eta(Y) X)`` and the residual."""
        fr, A = self._dphi_pairs()
        xi = self.xi.val
        eta = self.eta.val
        B = {}
        num = np.zeros(self.n_pts)
        den = np.zeros(self.n_pts)
        for (i, j), Aij in A.items():
            Bij = self.geo.inner(fr[i], fr[j])[:, None] * xi - np.einsum("ni,ni->n", eta, fr[j])[:, None] * fr[i]
            B[i, j] = Bij
            num += self.geo.inner(Aij, Bij)
            den += self.geo.inner(Bij, Bij)
        alpha = num / den
        res = np.zeros(self.n_pts)
        for key, Aij in A.items():
            res = np.maximum(res, self.geo.norm(Aij - alpha[:, None] * B[key]))
        return alpha, res

    def kenmotsu_defect(self) -> np.ndarray:
        fr, A = self._dphi_pairs()
        res = np.zeros(self.n_pts)
        for (i, j), Aij in A.items():
            pX = _mv(self.phi.val, fr[i])
            rhs = (self.geo.inner(pX, fr[j])[:, None] * self.xi.val
                   - np.einsum("ni,ni->n", self.eta.val, fr[j])[:, None] * pX)
            res = np.maximum(res, self.geo.norm(Aij - rhs))
        return res

    def nearly_cosymplectic_defect(self) -> np.ndarray:
        fr, A = self._dphi_pairs()
        res = np.zeros(self.n_pts)
        for (i, j), Aij in A.items():
            if j >= i:
                res = np.maximum(res, self.geo.norm(Aij + A[j, i]))
        return res

    def dPhi_norm(self) -> np.ndarray:
        fr = self.frame_vals
        out = np.zeros(self.n_pts)
        for a in range(len(fr)):
            for b in range(a + 1, len(fr)):
                for c in range(b + 1, len(fr)):
                    out = np.maximum(out, np.abs(form_on(self.dPhi, fr[a], fr[b], fr[c])))
        return out

    def deta_norm(self) -> np.ndarray:
        out = np.zeros(self.n_pts)
        for X, Y in self.pairs():
            out = np.maximum(out, np.abs(form_on(self.deta, X.val, Y.val)))
        return out

    def delta_Phi(self) -> np.ndarray:
        return codifferential_jet(self.geo, self.Phi, 2)

    def delta_eta(self) -> np.ndarray:
        return codifferential_jet(self.geo, self.eta, 1)

    def semi_cosymplectic_defect(self) -> np.ndarray:
        return self.geo.norm(self.geo.sharp(self.delta_Phi())) + np.abs(self.delta_eta())

    def kenmotsu_form_identity(self) -> np.ndarray:
        """``|dPhi - 2 eta ^ Phi|`` on frame triples."""
        diff = self.dPhi - 2 * wedge_1_2(self.eta.val, self.Phi.val)
        fr = self.frame_vals
        out = np.zeros(self.n_pts)
        for a in range(len(fr)):
            for b in range(a + 1, len(fr)):
                for c in range(b + 1, len(fr)):
                    out = np.maximum(out, np.abs(form_on(diff, fr[a], fr[b], fr[c])))
        return out

    def xi_parallel_defect(self) -> np.ndarray:
        D = self.nabla_phi_along(self.xi.val)
        out = np.zeros(self.n_pts)
        for a in self.frame_vals:
            out = np.maximum(out, self.geo.norm(_mv(D, a)))
        return out

    def h_norm(self) -> np.ndarray:
        out = np.zeros(self.n_pts)
        for a in self.frame_vals:
            out = np.maximum(out, self.geo.norm(_mv(self.h_tensor, a)))
        return out

    def olszak_residual(self) -> np.ndarray:
        fr, A = self._dphi_pairs()
        phi = self.phi.val
        xi, eta = self.xi.val, self.eta.val
        res = np.zeros(self.n_pts)
        for i, X in enumerate(fr):
            pX = _mv(phi, X)
            NpX = self.nabla_phi_along(pX)
            etaX = np.einsum("ni,ni->n", eta, X)[:, None]
            for j, Y in enumerate(fr):
                lhs = A[i, j] + _mv(NpX, _mv(phi, Y))
                etaY = np.einsum("ni,ni->n", eta, Y)[:, None]
                rhs = 2 * self.geo.inner(X, Y)[:, None] * xi - etaY * (X + _mv(self.h_tensor, X) + etaX * xi)
                res = np.maximum(res, self.geo.norm(lhs - rhs))
        return res

    def symplectic_12_defect(self) -> np.ndarray:
        """``|((nabla_X phi) Y + (nabla_{phi X} phi) phi Y)^H|`` on horizontal X, Y."""
        phi = self.phi.val
        eta, xi = self.eta.val, self.xi.val
        res = np.zeros(self.n_pts)
        hor = [h.val for h in self.horizontal_frame]
        for X in hor:
            NX = self.nabla_phi_along(X)
            NpX = self.nabla_phi_along(_mv(phi, X))
            for Y in hor:
                v = _mv(NX, Y) + _mv(NpX, _mv(phi, Y))
                v = v - np.einsum("ni,ni->n", eta, v)[:, None] * xi
                res = np.maximum(res, self.geo.norm(v))
        return res

    def blair_residual(self) -> np.ndarray:
        fr = self.frame
        phi = self.phi.val
        eta = self.eta.val
        res = np.zeros(self.n_pts)
        for X in fr:
            NX = self.nabla_phi_along(X.val)
            pX = _mv(phi, X.val)
            for Y in fr:
                pY = _mv(phi, Y.val)
                DY = _mv(NX, Y.val)
                etaY = np.einsum("ni,ni->n", eta, Y.val)
                for Z in fr:
                    pZ = _mv(phi, Z.val)
                    etaZ = np.einsum("ni,ni->n", eta, Z.val)
                    r = (2 * self.geo.inner(DY, Z.val) - self.geo.inner(self.N1(Y, Z), pX)
                         - 2 * form_on(self.deta, pY, X.val) * etaZ + 2 * form_on(self.deta, pZ, X.val) * etaY)
                    res = np.maximum(res, np.abs(r))
        return res


def contact_tensors(acs: AlmostContactStructure, x) -> dict:
    p = acs.at(x)
    fr = p.frame
    n1 = np.zeros((p.n_pts, len(fr), len(fr), p.m))
    n2 = np.zeros((p.n_pts, len(fr), len(fr)))
    for a in range(len(fr)):
        for b in range(len(fr)):
            if a != b:
                n1[:, a, b] = p.N1(fr[a], fr[b])
                n2[:, a, b] = p.N2(fr[a], fr[b])
    out = {"frame": p.frame_vals, "N1": n1, "N2": n2, "Phi": p.Phi.val, "deta": p.deta, "dPhi": p.dPhi,
           "h": p.h_tensor}
    if np.asarray(x).ndim == 1:
        out = {k: ([f[0] for f in v] if k == "frame" else v[0]) for k, v in out.items()}
    return out


CLASS_NAMES = ("contact-metric", "K-contact", "Sasakian", "alpha-Sasakian", "nearly-cosymplectic",
               "quasi-Sasakian", "Kenmotsu", "normal", "semi-cosymplectic", "cosymplectic")


@dataclass
class ClassReport:
    defects: dict[str, np.ndarray]
    alpha: np.ndarray
    tol: float = 1e-8

    def max(self, name: str) -> float:
        return float(np.max(self.defects[name]))

    def verdict(self, name: str, tol: float | None = None) -> bool:
        return self.max(name) < (self.tol if tol is None else tol)

    def summary(self, tol: float | None = None) -> dict[str, tuple[float, bool]]:
        return {k: (self.max(k), self.verdict(k, tol)) for k in self.defects}


def classify_acs(acs: AlmostContactStructure, samples, tol: float = 1e-8) -> ClassReport:
    p = acs.at(samples)
    contact = p.contact_defect()
    normal = p.normal_defect()
    alpha, ares = p.alpha_sasakian()
    d = {
        "contact-metric": contact,
        "K-contact": p.killing_defect() + contact,
        "Sasakian": np.maximum(np.maximum(contact, normal), np.maximum(np.abs(alpha - 1), ares)),
        "alpha-Sasakian": ares,
        "nearly-cosymplectic": p.nearly_cosymplectic_defect(),
        "quasi-Sasakian": normal + p.dPhi_norm(),
        "Kenmotsu": p.kenmotsu_defect(),
        "normal": normal,
        "semi-cosymplectic": p.semi_cosymplectic_defect(),
        "cosymplectic": normal + p.dPhi_norm() + p.deta_norm(),
    }
    return ClassReport(d, alpha, tol)


def olszak_and_blair_residuals(acs: AlmostContactStructure, x, gate: float = CONTACT_GATE) -> dict[str, np.ndarray]:
    p = acs.at(x)
    c = p.contact_defect()
    if np.max(c) >= gate:
        raise NotContactMetric(float(np.max(c)))
    return {"olszak": p.olszak_residual(), "blair": p.blair_residual(), "h_norm": p.h_norm(),
            "symplectic_12": p.symplectic_12_defect(), "contact": c}


def normality_equivalence(mp: MapPoint, acs: AlmostContactStructure) -> dict[str, np.ndarray]:
    """The three normality defects for a map with one-dimensional fibers."""
    if mp.m - mp.k != 1:
        raise ValueError("normality equivalence needs one-dimensional fibers")
    p = acs.at(mp.X)
    a = p.normal_defect()
    inv = np.zeros(mp.n_pts)
    hor = [h.val for h in p.horizontal_frame]
    for i in range(len(hor)):
        for j in range(i + 1, len(hor)):
            X, Y = hor[i], hor[j]
            pX, pY = _mv(p.phi.val, X), _mv(p.phi.val, Y)
            inv = np.maximum(inv, np.abs(form_on(p.deta, pX, pY) - form_on(p.deta, X, Y)))
    b = mp.geo.norm(mp.mean_curvature_vertical()) + inv
    c = p.xi_parallel_defect()
    return {"N1": a, "minimal_invariant": b, "xi_parallel": c}
