"""Charts, the Levi-Civita connection and first-order differential operators.

Fields are callables ``X -> Jet`` on a batch of chart points ``X`` of shape
``(N, m)``.  Tensors use coordinate components: vectors ``(N, m)``, 1-forms
``(N, m)``, (1,1)-tensors ``(N, m, m)`` with ``T[:, k, j] = T^k_j`` (column =
input), 2-forms as full antisymmetric ``(N, m, m)`` arrays.

Exterior derivatives use the determinant convention
``(d w)_{ij} = d_i w_j - d_j w_i``.  The codifferential is minus the trace of
the covariant derivative, so for a 1-form ``delta eta = -div(eta#)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from math import factorial
from typing import Callable, Mapping, Sequence

import numpy as np

from .expr import Expr, as_expr, evaluate
from .jetcalc import Jet, Jet2, JetDomainError

SPD_FLOOR = 1e-10


class ChartError(ValueError):
    pass


class MetricDegenerateError(ArithmeticError):
    pass


def _jet_env(coords: Sequence[str], X: np.ndarray, params: Mapping[str, float]) -> dict:
    m = len(coords)
    env = {name: Jet2.variable(X[:, i], i, m) for i, name in enumerate(coords)}
    env.update(params)
    return env


def eval_jet2(node: Expr, env: Mapping[str, object], n: int, m: int) -> Jet2:
    out = evaluate(node, env)
    if not isinstance(out, Jet2):
        out = Jet2.constant(np.full(n, float(out)), m)
    return out


@dataclass
class RiemannianChart:
    """A coordinate box with a metric given by a matrix of expressions."""

    coords: tuple[str, ...]
    metric: list[list[Expr]]
    box: np.ndarray
    label: str = ""
    params: dict[str, float] = field(default_factory=dict)

    def __init__(self, coords, metric, box=None, label="", params=None):
        self.coords = tuple(coords)
        self.params = dict(params or {})
        m = len(self.coords)
        names = set(self.coords) | set(self.params)
        if len(metric) != m or any(len(row) != m for row in metric):
            raise ChartError(f"metric must be {m}x{m}")
        self.metric = [[as_expr(e, names) for e in row] for row in metric]
        self.box = np.asarray(box if box is not None else [[-1.0, 1.0]] * m, dtype=float)
        if self.box.shape != (m, 2) or np.any(self.box[:, 0] >= self.box[:, 1]):
            raise ChartError("sample box must be m closed intervals with lo < hi")
        self.label = label

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def names(self) -> set[str]:
        return set(self.coords) | set(self.params)

    def center(self) -> np.ndarray:
        return self.box.mean(axis=1)

    def env(self, X: np.ndarray) -> dict:
        return _jet_env(self.coords, X, self.params)

    def component_jets(self, X: np.ndarray, env=None) -> list[list[Jet2]]:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        env = env or self.env(X)
        n, m = X.shape
        try:
            return [[eval_jet2(e, env, n, m) for e in row] for row in self.metric]
        except JetDomainError as err:
            raise JetDomainError(err.primitive, err.index, err.argument, X[err.index]) from None

    def metric_jet(self, X: np.ndarray) -> Jet:
        """Metric as a first-order jet, symmetrised."""
        comps = self.component_jets(X)
        val = np.stack([np.stack([c.val for c in row], -1) for row in comps], -2)
        d = np.stack([np.stack([c.grad for c in row], -2) for row in comps], -3)
        val = 0.5 * (val + np.swapaxes(val, -1, -2))
        d = 0.5 * (d + np.swapaxes(d, -2, -3))
        return Jet(val, d)

    def metric_values(self, X: np.ndarray) -> np.ndarray:
        return self.metric_jet(X).val

    def check_spd(self, X: np.ndarray, symmetry_tol: float = 1e-12) -> None:
        X = np.atleast_2d(X)
        comps = self.component_jets(X)
        raw = np.stack([np.stack([c.val for c in row], -1) for row in comps], -2)
        asym = np.max(np.abs(raw - np.swapaxes(raw, -1, -2)), initial=0.0)
        if asym > symmetry_tol * max(1.0, float(np.max(np.abs(raw)))):
            raise ChartError(f"{self.label or 'metric'}: not symmetric at probe points (defect {asym:.3g})")
        eig = np.linalg.eigvalsh(0.5 * (raw + np.swapaxes(raw, -1, -2)))
        if np.min(eig) <= SPD_FLOOR:
            k = int(np.argmin(np.min(eig, axis=-1)))
            raise ChartError(f"{self.label or 'metric'}: not positive definite at {X[k].tolist()}")


@dataclass
class Field:
    """A tensor field on a chart: ``fn(X) -> Jet`` with a variance tag."""

    chart: RiemannianChart
    fn: Callable[[np.ndarray], Jet]
    kind: str = "vector"

    def __call__(self, X) -> Jet:
        return self.fn(np.atleast_2d(np.asarray(X, dtype=float)))

    @classmethod
    def from_exprs(cls, chart: RiemannianChart, comps, kind: str = "vector") -> "Field":
        names = chart.names
        arr = np.empty(np.shape(comps), dtype=object)
        for idx in np.ndindex(arr.shape):
            arr[idx] = as_expr(np.asarray(comps, dtype=object)[idx], names)

        def fn(X):
            env = chart.env(X)
            n, m = X.shape
            jets = {idx: eval_jet2(arr[idx], env, n, m) for idx in np.ndindex(arr.shape)}
            val = np.empty((n,) + arr.shape)
            d = np.empty((n,) + arr.shape + (m,))
            for idx, j in jets.items():
                val[(slice(None),) + idx] = j.val
                d[(slice(None),) + idx] = j.grad
            return Jet(val, d)

        return cls(chart, fn, kind)


def same_chart(*fields: Field) -> RiemannianChart:
    charts = {id(f.chart) for f in fields}
    if len(charts) != 1:
        raise ChartError("fields live on different charts")
    return fields[0].chart


# ---------------------------------------------------------------------------
# pointwise geometry
# ---------------------------------------------------------------------------


class PointGeometry:
    """Metric, inverse metric and Christoffel symbols on a batch of points."""

    def __init__(self, chart: RiemannianChart, X: np.ndarray):
        self.chart = chart
        self.X = np.atleast_2d(np.asarray(X, dtype=float))
        self.g = chart.metric_jet(self.X)
        eig = np.linalg.eigvalsh(self.g.val)
        if np.min(eig) <= SPD_FLOOR:
            k = int(np.argmin(np.min(eig, axis=-1)))
            raise MetricDegenerateError(f"metric degenerate at {self.X[k].tolist()}")
        self.ginv = np.linalg.inv(self.g.val)
        dg = self.g.d  # dg[n, a, b, c] = d_c g_ab
        lower = 0.5 * (np.einsum("njli->nlij", dg) + np.einsum("nilj->nlij", dg) - np.einsum("nijl->nlij", dg))
        self.gamma = np.einsum("nkl,nlij->nkij", self.ginv, lower)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def m(self) -> int:
        return self.X.shape[1]

    def inner(self, a, b):
        return np.einsum("ni,nij,nj->n", a, self.g.val, b)

    def norm(self, a):
        return np.sqrt(np.maximum(self.inner(a, a), 0.0))

    def flat(self, v):
        return np.einsum("nij,nj->ni", self.g.val, v)

    def sharp(self, w):
        return np.einsum("nij,nj->ni", self.ginv, w)

    def nabla_vector(self, Y: Jet) -> np.ndarray:
        """Full covariant derivative ``out[n, k, i] = (nabla_i Y)^k``."""
        return Y.d + np.einsum("nkil,nl->nki", self.gamma, Y.val)

    def nabla_11(self, T: Jet) -> np.ndarray:
        """``out[n, k, j, i] = (nabla_i T)^k_j``."""
        return (T.d + np.einsum("nkil,nlj->nkji", self.gamma, T.val)
                - np.einsum("nlij,nkl->nkji", self.gamma, T.val))

    def nabla_covector(self, w: Jet) -> np.ndarray:
        """``out[n, j, i] = (nabla_i w)_j``."""
        return w.d - np.einsum("nlij,nl->nji", self.gamma, w.val)

    def nabla_2form(self, w: Jet) -> np.ndarray:
        """``out[n, a, b, i] = (nabla_i w)_{ab}``."""
        return (w.d - np.einsum("nlia,nlb->nabi", self.gamma, w.val)
                - np.einsum("nlib,nal->nabi", self.gamma, w.val))

    def cov_vector(self, Y: Jet, v: np.ndarray) -> np.ndarray:
        return np.einsum("nki,ni->nk", self.nabla_vector(Y), v)

    def cov_11(self, T: Jet, v: np.ndarray) -> np.ndarray:
        return np.einsum("nkji,ni->nkj", self.nabla_11(T), v)


def bracket(X: Jet, Y: Jet) -> np.ndarray:
    """Lie bracket ``[X, Y]^k = X^j d_j Y^k - Y^j d_j X^k`` at the batch."""
    return np.einsum("nj,nkj->nk", X.val, Y.d) - np.einsum("nj,nkj->nk", Y.val, X.d)


def cbracket(X: tuple[Jet, Jet], Y: tuple[Jet, Jet]) -> tuple[np.ndarray, np.ndarray]:
    """Bracket of complex fields given as (real, imaginary) jet pairs."""
    (a, b), (c, e) = X, Y
    return bracket(a, c) - bracket(b, e), bracket(a, e) + bracket(b, c)


def apply11(T: Jet, X: Jet) -> Jet:
    from .jetcalc import jeinsum

    return jeinsum("nij,nj->ni", T, X)


def lie_derivative_11(V: Jet, T: Jet) -> np.ndarray:
    """``(L_V T)^k_j = V^i d_i T^k_j - T^i_j d_i V^k + T^k_i d_j V^i``."""
    return (np.einsum("ni,nkji->nkj", V.val, T.d) - np.einsum("nij,nki->nkj", T.val, V.d)
            + np.einsum("nki,nij->nkj", T.val, V.d))


def lie_derivative_metric(V: Jet, g: Jet) -> np.ndarray:
    """``(L_V g)_ij = V^k d_k g_ij + g_kj d_i V^k + g_ik d_j V^k``."""
    return (np.einsum("nk,nijk->nij", V.val, g.d) + np.einsum("nkj,nki->nij", g.val, V.d)
            + np.einsum("nik,nkj->nij", g.val, V.d))


def lie_derivative_1form(V: Jet, w: Jet) -> np.ndarray:
    """``(L_V w)_j = V^i d_i w_j + w_i d_j V^i``."""
    return np.einsum("ni,nji->nj", V.val, w.d) + np.einsum("ni,nij->nj", w.val, V.d)


def exterior_derivative_jet(w: Jet, p: int) -> np.ndarray:
    """Exterior derivative (determinant convention) of a p-form stored as a full array."""
    if p == 0:
        return w.d
    # move derivative axis to the front of the form indices, then antisymmetrise
    arr = np.moveaxis(w.d, -1, 1)  # arr[n, i0, i1..ip] = d_{i0} w_{i1..ip}
    out = np.zeros(arr.shape)
    for perm in permutations(range(p + 1)):
        sign = _perm_sign(perm)
        out += sign * np.transpose(arr, (0,) + tuple(1 + q for q in perm))
    return out / factorial(p)


def _perm_sign(perm) -> int:
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def wedge_1_2(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``(a ^ b)_{ijk}`` for a 1-form and a 2-form, determinant convention."""
    return (np.einsum("ni,njk->nijk", a, b) + np.einsum("nj,nki->nijk", a, b)
            + np.einsum("nk,nij->nijk", a, b))


def form_on(w: np.ndarray, *vecs: np.ndarray) -> np.ndarray:
    """Evaluate a p-form (full component array) on p vectors."""
    letters = "abcdefgh"[: len(vecs)]
    spec = "n" + letters + "," + ",".join("n" + c for c in letters) + "->n"
    return np.einsum(spec, w, *vecs)


def laplace_beltrami_jet(geo: PointGeometry, f: Jet2) -> np.ndarray:
    """``g^{ij} (d_i d_j f - Gamma^k_ij d_k f)``; complex-valued jets allowed."""
    return (np.einsum("nij,nij->n", geo.ginv, f.hess)
            - np.einsum("nij,nkij,nk->n", geo.ginv, geo.gamma, f.grad))


def codifferential_jet(geo: PointGeometry, w: Jet, p: int) -> np.ndarray:
    if p == 1:
        return -np.einsum("nij,nji->n", geo.ginv, geo.nabla_covector(w))
    if p == 2:
        return -np.einsum("nij,njbi->nb", geo.ginv, geo.nabla_2form(w))
    raise NotImplementedError("codifferential implemented for degrees 1 and 2")


# ---------------------------------------------------------------------------
# field-level operations
# ---------------------------------------------------------------------------


def christoffel(chart: RiemannianChart, x) -> np.ndarray:
    """Levi-Civita symbols ``G[k, i, j]`` (or ``G[n, k, i, j]`` for a batch)."""
    x = np.asarray(x, dtype=float)
    geo = PointGeometry(chart, np.atleast_2d(x))
    return geo.gamma[0] if x.ndim == 1 else geo.gamma


def _single(x, out):
    return out[0] if np.asarray(x).ndim == 1 else out


def lie_bracket(X: Field, Y: Field, x) -> np.ndarray:
    same_chart(X, Y)
    return _single(x, bracket(X(x), Y(x)))


def covariant_derivative(T: Field, v, x) -> np.ndarray:
    geo = PointGeometry(T.chart, np.atleast_2d(x))
    v = np.atleast_2d(np.asarray(v, dtype=float))
    tj = T(x)
    if T.kind == "vector":
        out = geo.cov_vector(tj, v)
    elif T.kind == "covector":
        out = np.einsum("nji,ni->nj", geo.nabla_covector(tj), v)
    elif T.kind == "(1,1)":
        out = geo.cov_11(tj, v)
    else:
        raise ValueError(f"covariant derivative of {T.kind!r} fields not supported")
    return _single(x, out)


def lie_derivative(V: Field, T, x) -> np.ndarray:
    """Lie derivative of a (1,1)-tensor, vector, 1-form or metric (``T='metric'``)."""
    vj = V(x)
    if isinstance(T, str) and T == "metric":
        return _single(x, lie_derivative_metric(vj, V.chart.metric_jet(np.atleast_2d(x))))
    same_chart(V, T)
    tj = T(x)
    if T.kind == "(1,1)":
        out = lie_derivative_11(vj, tj)
    elif T.kind == "vector":
        out = bracket(vj, tj)
    elif T.kind == "covector":
        out = lie_derivative_1form(vj, tj)
    else:
        raise ValueError(f"Lie derivative of {T.kind!r} fields not supported")
    return _single(x, out)


def exterior_derivative(w: Field, x, p: int | None = None) -> np.ndarray:
    wj = w(x)
    p = wj.ndim - 1 if p is None else p
    if p >= w.chart.dim:
        raise ValueError("degree must be below the chart dimension")
    return _single(x, exterior_derivative_jet(wj, p))


def laplace_beltrami(chart: RiemannianChart, f: Callable, x) -> np.ndarray:
    """Laplacian of ``f``, a callable taking one :class:`Jet2` per coordinate."""
    X = np.atleast_2d(np.asarray(x, dtype=float))
    geo = PointGeometry(chart, X)
    env = chart.env(X)
    fj = f(*[env[c] for c in chart.coords])
    return _single(x, laplace_beltrami_jet(geo, fj))


def codifferential(w: Field, x, p: int | None = None) -> np.ndarray:
    geo = PointGeometry(w.chart, np.atleast_2d(x))
    wj = w(x)
    p = wj.ndim - 1 if p is None else p
    if p < 1:
        raise ValueError("codifferential needs degree >= 1")
    return _single(x, codifferential_jet(geo, wj, p))
