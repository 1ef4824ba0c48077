"""Catalog of explicit charts and maps used as positive and negative witnesses.

Every entry carries expected flags; :meth:`Scenario.verify_flags` re-derives
them with the engine, and :func:`catalog_lookup` runs that verification at load.

Global caveat for entries with one-dimensional fibers: a compact oriented
manifold only carries a nowhere-vanishing ``xi`` when its Euler characteristic
is zero.  Everything here lives in a single chart, so this never bites.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .constructions import ConeChart, build_cone, induced_almost_contact
from .geometry import RiemannianChart
from .morphism import HermitianTarget, MapPoint, SmoothMap, battery_max
from .structures import AlmostContactStructure, classify_acs

FLAG_TOL = 1e-8
FLAG_POINTS = 12


class ScenarioError(ValueError):
    def __init__(self, kind: str, message: str):
        self.kind = kind
        super().__init__(f"{kind}: {message}")


class FlagMismatch(AssertionError):
    pass


@dataclass
class Scenario:
    id: str
    params: dict
    map: SmoothMap
    expected: dict[str, bool]
    notes: str = ""
    acs: AlmostContactStructure | None = None
    reference_acs: AlmostContactStructure | None = None
    cone: ConeChart | None = None
    base_map: SmoothMap | None = None
    variants: dict[str, SmoothMap] = field(default_factory=dict)

    @property
    def source(self) -> RiemannianChart:
        return self.map.source

    @property
    def fiber_dim(self) -> int:
        return self.map.m - self.map.k

    def box_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        box = np.asarray(self.source.box, dtype=float)
        return box[:, 0], box[:, 1]

    def sample(self, count: int, seed: int, start: int = 0) -> np.ndarray:
        """Uniform samples keyed by ``(seed, index)``; any slice is reproducible alone."""
        lo, hi = self.box_arrays()
        pts = [np.random.default_rng([seed, i]).random(len(lo)) for i in range(start, start + count)]
        return lo + (hi - lo) * np.asarray(pts).reshape(count, len(lo))

    def observed_flags(self, X: np.ndarray, tol: float = FLAG_TOL) -> dict[str, bool]:
        mp = MapPoint(self.map, X)
        obs: dict[str, bool] = {}
        for key in self.expected:
            obs[key] = _FLAG_RULES[key](self, mp, X, tol)
        return obs

    def verify_flags(self, points: int = FLAG_POINTS, seed: int = 0, tol: float = FLAG_TOL) -> dict[str, tuple[bool, bool]]:
        X = self.sample(points, seed)
        obs = self.observed_flags(X, tol)
        return {k: (self.expected[k], obs[k]) for k in self.expected}

    def describe(self) -> dict:
        return {
            "id": self.id,
            "params": self.params,
            "coords": list(self.source.coords),
            "box": [list(map(float, b)) for b in self.source.box],
            "target_coords": list(self.map.target_chart.coords),
            "fiber_dim": self.fiber_dim,
            "expected": self.expected,
            "notes": self.notes,
            "variants": sorted(self.variants),
        }


def _cls(name):
    def rule(s, mp, X, tol):
        return classify_acs(s.acs, X, tol).verdict(name)
    return rule


def _cone_holomorphic(s, mp, X, tol):
    return bool(np.max(mp.holomorphy_defect(s.cone.J(X))) < tol)


def _pair_rule(key):
    def rule(s, mp, X, tol):
        from .constructions import adapted_pair, superminimality_and_integrability

        r = superminimality_and_integrability(adapted_pair(s.map, X))
        return bool(np.max(r[key]) < tol)
    return rule


_FLAG_RULES: dict[str, Callable] = {
    "phwc": lambda s, mp, X, tol: bool(np.max(mp.phwc_defect()) < tol),
    "hwc": lambda s, mp, X, tol: bool(np.max(mp.hwc_defect()) < tol),
    "phh": lambda s, mp, X, tol: bool(np.max(mp.phh_defect()) < tol),
    "harmonic": lambda s, mp, X, tol: bool(np.max(mp.tension_norm()) < tol),
    "cosymplectic": lambda s, mp, X, tol: bool(np.max(mp.cosymplectic_defect()) < tol),
    "phm": lambda s, mp, X, tol: bool(np.max(np.maximum(mp.phwc_defect(), mp.cosymplectic_defect())) < tol),
    "battery_harmonic": lambda s, mp, X, tol: bool(np.max(battery_max(mp)) < tol),
    "normal": lambda s, mp, X, tol: classify_acs(s.acs, X, tol).verdict("normal"),
    "contact-metric": _cls("contact-metric"),
    "K-contact": _cls("K-contact"),
    "Sasakian": _cls("Sasakian"),
    "Kenmotsu": _cls("Kenmotsu"),
    "holomorphic": _cone_holomorphic,
    "superminimal": _pair_rule("superminimality"),
    "integrable": _pair_rule("nijenhuis"),
}


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------


def flat_target(n: int, names: list[str] | None = None) -> HermitianTarget:
    names = names or [c for k in range(1, n + 1) for c in (f"X{k}", f"Y{k}")]
    return HermitianTarget(RiemannianChart(names, _diag(["1"] * (2 * n))))


def _diag(entries: list[str]) -> list[list[str]]:
    m = len(entries)
    return [[entries[i] if i == j else "0" for j in range(m)] for i in range(m)]


def _pairs(n: int, a: str = "x", b: str = "y") -> list[str]:
    return [c for k in range(1, n + 1) for c in (f"{a}{k}", f"{b}{k}")]


def _flat_projection(n: int = 2, k: int = 1) -> Scenario:
    coords = _pairs(n) + [f"s{j}" for j in range(1, k + 1)]
    chart = RiemannianChart(coords, _diag(["1"] * len(coords)), label="flat")
    phi = SmoothMap(chart, flat_target(n), _pairs(n), label="projection")
    exp = {"phwc": True, "hwc": True, "phh": True, "harmonic": True, "phm": True, "battery_harmonic": True}
    acs = None
    if k == 1:
        acs = induced_almost_contact(phi, len(coords) - 1)
        exp["normal"] = True
    return Scenario("flat_projection", {"n": n, "k": k}, phi, exp,
                    "Product projection of flat space onto C^n; every positive flag holds.", acs=acs)


def _hopf() -> Scenario:
    r2 = "(u1^2+u2^2+u3^2)"
    s = f"({r2}-1)"
    D = f"(4*u3^2+{s}^2)"
    chart = RiemannianChart(["u1", "u2", "u3"], _diag([f"4/(1+{r2})^2"] * 3),
                            box=[(0.1, 0.6), (0.1, 0.6), (0.2, 0.8)], label="S3 stereographic")
    tgt = HermitianTarget(RiemannianChart(["X", "Y"], _diag(["4/(1+X^2+Y^2)^2"] * 2), label="S2 stereographic"))
    phi = SmoothMap(chart, tgt, [f"(4*u1*u3+2*u2*{s})/{D}", f"(4*u2*u3-2*u1*{s})/{D}"], label="hopf")
    exp = {"phwc": True, "hwc": True, "phh": True, "harmonic": True, "phm": True, "battery_harmonic": True,
           "normal": True}
    return Scenario("hopf", {}, phi, exp,
                    "Hopf map S3 -> S2 in stereographic charts on both sides, round metrics; "
                    "the box avoids the poles and the fiber through the origin.",
                    acs=induced_almost_contact(phi))


def sasakian_chart(n: int) -> RiemannianChart:
    """``eta = (dz - sum y_i dx_i)/2`` and ``g = eta (x) eta + (sum dx_i^2 + dy_i^2)/4``."""
    coords = _pairs(n) + ["z"]
    m = 2 * n + 1
    g = [["0"] * m for _ in range(m)]
    for i in range(n):
        xi, yi = 2 * i, 2 * i + 1
        y = coords[yi]
        for j in range(n):
            yj = coords[2 * j + 1]
            g[xi][2 * j] = f"1/4+{y}^2/4" if i == j else f"{y}*{yj}/4"
        g[yi][yi] = "1/4"
        g[xi][m - 1] = g[m - 1][xi] = f"-{y}/4"
    g[m - 1][m - 1] = "1/4"
    return RiemannianChart(coords, g, label=f"sasakian R^{m}")


def sasakian_reference(chart: RiemannianChart) -> AlmostContactStructure:
    n = (chart.dim - 1) // 2
    m = chart.dim
    phi = [["0"] * m for _ in range(m)]
    for i in range(n):
        xi, yi = 2 * i, 2 * i + 1
        phi[yi][xi] = "-1"
        phi[xi][yi] = "1"
        phi[m - 1][yi] = chart.coords[yi]
    xi_v = ["0"] * (m - 1) + ["2"]
    eta = []
    for i in range(n):
        eta += [f"-{chart.coords[2 * i + 1]}/2", "0"]
    eta.append("1/2")
    return AlmostContactStructure.from_exprs(chart, phi, xi_v, eta, label="sasakian reference")


def _sasakian(n: int) -> tuple[SmoothMap, AlmostContactStructure, AlmostContactStructure]:
    chart = sasakian_chart(n)
    comps = [c for k in range(1, n + 1) for c in (f"y{k}", f"x{k}")]
    phi = SmoothMap(chart, flat_target(n), comps, label="sasakian projection")
    return phi, induced_almost_contact(phi, chart.dim - 1), sasakian_reference(chart)


def _sasakian_entry(n: int):
    def build() -> Scenario:
        phi, acs, ref = _sasakian(n)
        exp = {"phwc": True, "phh": True, "harmonic": True, "phm": True, "battery_harmonic": True,
               "normal": True, "contact-metric": True, "K-contact": True, "Sasakian": True, "Kenmotsu": False}
        return Scenario(f"sasakian_r{2 * n + 1}", {}, phi, exp,
                        "Standard Sasakian structure on R^{2n+1}; the map w = y + i x realizes phi on the "
                        "contact distribution.", acs=acs, reference_acs=ref)
    return build


def _kenmotsu() -> Scenario:
    chart = RiemannianChart(["t", "x", "y"], _diag(["1", "exp(2*t)", "exp(2*t)"]),
                            box=[(-0.5, 0.5), (-1, 1), (-1, 1)], label="kenmotsu warped product")
    phi = SmoothMap(chart, flat_target(1), ["x", "y"], label="kenmotsu projection")
    exp = {"phwc": True, "hwc": True, "phh": True, "harmonic": True, "phm": True, "battery_harmonic": True,
           "normal": True, "Kenmotsu": True, "K-contact": False}
    return Scenario("kenmotsu", {}, phi, exp,
                    "dt^2 + e^{2t}(dx^2 + dy^2) with xi = d/dt; umbilic horizontal distribution.",
                    acs=induced_almost_contact(phi, 0))


def _skewed() -> Scenario:
    chart = RiemannianChart(["t", "x", "y"], _diag(["exp(2*x)", "1", "1"]),
                            box=[(0, 1), (-0.4, 0), (-0.2, 0.2)], label="skewed fibration")
    phi = SmoothMap(chart, flat_target(1), ["x", "y"], label="skewed projection")
    exp = {"phwc": True, "hwc": True, "harmonic": False, "phm": False, "battery_harmonic": False,
           "cosymplectic": False, "normal": False}
    return Scenario("skewed_fibration", {}, phi, exp,
                    "Riemannian submersion with non-minimal fibers: tension (1, 0), mean curvature -d/dx; "
                    "the box makes f = z the battery maximiser with value exactly 1.",
                    acs=induced_almost_contact(phi, 0))


def _shear() -> Scenario:
    chart = RiemannianChart(["x", "y"], _diag(["1", "1"]), label="flat plane")
    phi = SmoothMap(chart, flat_target(1), ["x+y", "y"], label="shear", vertical_seed_coords=())
    exp = {"phwc": False, "phm": False, "battery_harmonic": False}
    return Scenario("shear", {}, phi, exp, "Linear shear, not PHWC; commutator norm sqrt(10).")


def _superminimal_product(n: int = 1) -> Scenario:
    coords = _pairs(n) + ["u", "v"]
    chart = RiemannianChart(coords, _diag(["1"] * len(coords)), label="flat product")
    phi = SmoothMap(chart, flat_target(n), _pairs(n), label="product projection")
    exp = {"phwc": True, "harmonic": True, "phm": True, "superminimal": True, "integrable": True}
    return Scenario("superminimal_product", {"n": n}, phi, exp,
                    "C^n x C -> C^n; fibers are totally geodesic and J+ is the product structure.")


def _warped_twist(c: float = 1.0) -> Scenario:
    w = f"exp(2*{c!r}*x)"
    chart = RiemannianChart(["x", "y", "u", "v"], _diag(["1", "1", w, w]),
                            box=[(-0.5, 0.5), (-1, 1), (-1, 1), (-1, 1)], label="warped product")
    phi = SmoothMap(chart, flat_target(1), ["x", "y"], label="warped projection")
    exp = {"phwc": True, "superminimal": False, "integrable": True, "phm": False, "harmonic": False}
    return Scenario("warped_twist", {"c": c}, phi, exp,
                    "dx^2 + dy^2 + e^{2cx}(du^2 + dv^2) onto C: J+ is constant in these coordinates, hence "
                    "integrable, while the fibers are not superminimal (defect 2|c| in the metric norm).")


def _cone(t_min: float = 0.5, t_max: float = 2.0) -> Scenario:
    base_map, acs, _ = _sasakian(1)
    cone = build_cone(acs, (t_min, t_max))
    hat = cone.lift_map(base_map, "cone projection")
    broken = SmoothMap(acs.chart, base_map.target, ["y1", "-x1"], label="conjugated")
    exp = {"phwc": True, "harmonic": True, "phm": True, "battery_harmonic": True, "holomorphic": True,
           "superminimal": True, "integrable": True}
    return Scenario("cone_over_sasakian_r3", {"t_min": t_min, "t_max": t_max}, hat, exp,
                    "Cone dt^2 + t^2 g over sasakian_r3 with the lifted projection; the conjugated variant "
                    "breaks holomorphy on both levels.", cone=cone, base_map=base_map,
                    variants={"broken": broken}, acs=None)


def _composed(n: int = 2) -> Scenario:
    coords = ["t"] + _pairs(n)
    chart = RiemannianChart(coords, _diag(["1"] + ["exp(2*t)"] * (2 * n)),
                            box=[(-0.5, 0.5), (0.5, 1.5), (-0.5, 0.5)] + [(-1, 1)] * (2 * n - 2),
                            label="kenmotsu warped product")
    comps = ["x1^2-y1^2", "2*x1*y1"] + _pairs(n)[2:]
    phi = SmoothMap(chart, flat_target(n), comps, label="composed")
    exp = {"phwc": True, "hwc": n == 1, "phm": True, "battery_harmonic": True}
    return Scenario("composed_phm", {"n": n}, phi, exp,
                    "Warped projection composed with z1 -> z1^2 (identity on the other factors); the box "
                    "excludes z1 = 0.  For n >= 2 the composite is PHM but not HWC; for n = 1 it is HWC "
                    "because holomorphic maps of C are conformal.", acs=induced_almost_contact(phi, 0) if n == 1 else None)


@dataclass(frozen=True)
class ParamSpec:
    kind: type
    default: object
    lo: float
    hi: float


CATALOG: dict[str, tuple[Callable[..., Scenario], dict[str, ParamSpec], str]] = {
    "flat_projection": (_flat_projection, {"n": ParamSpec(int, 2, 1, 3), "k": ParamSpec(int, 1, 0, 3)},
                        "R^{2n+k} -> C^n product projection"),
    "hopf": (_hopf, {}, "Hopf map S3 -> S2 (stereographic charts)"),
    "sasakian_r3": (_sasakian_entry(1), {}, "Sasakian R^3 with projection onto C"),
    "sasakian_r5": (_sasakian_entry(2), {}, "Sasakian R^5 with projection onto C^2"),
    "kenmotsu": (_kenmotsu, {}, "Kenmotsu warped product projection"),
    "skewed_fibration": (_skewed, {}, "Riemannian submersion with non-minimal fibers (negative witness)"),
    "shear": (_shear, {}, "linear shear R^2 -> C (not PHWC)"),
    "superminimal_product": (_superminimal_product, {"n": ParamSpec(int, 1, 1, 2)}, "C^n x C -> C^n"),
    "warped_twist": (_warped_twist, {"c": ParamSpec(float, 1.0, 0.5, 3.0)},
                     "warped C x_f C with integrable, non-superminimal J+"),
    "cone_over_sasakian_r3": (_cone, {"t_min": ParamSpec(float, 0.5, 0.05, 10.0),
                                      "t_max": ParamSpec(float, 2.0, 0.1, 20.0)},
                              "cone over sasakian_r3 with the lifted projection"),
    "composed_phm": (_composed, {"n": ParamSpec(int, 2, 1, 2)}, "warped projection composed with z^2"),
}


def catalog_ids() -> list[str]:
    return list(CATALOG)


def _coerce(name: str, spec: ParamSpec, value):
    try:
        if spec.kind is int:
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise ValueError
            v = int(value)
        else:
            v = float(value)
    except (TypeError, ValueError):
        raise ScenarioError("parameter out of range", f"{name}={value!r} is not a {spec.kind.__name__}") from None
    if not (spec.lo <= v <= spec.hi):
        raise ScenarioError("parameter out of range", f"{name}={v} outside [{spec.lo}, {spec.hi}]")
    return v


def catalog_lookup(id: str, params: dict | None = None, verify: bool = True) -> Scenario:
    """Build a catalog scenario; with ``verify`` its expected flags are re-derived."""
    if id not in CATALOG:
        raise ScenarioError("unknown id", f"no catalog entry {id!r}")
    builder, specs, _ = CATALOG[id]
    params = dict(params or {})
    unknown = set(params) - set(specs)
    if unknown:
        raise ScenarioError("parameter out of range", f"unknown parameter(s) {sorted(unknown)} for {id}")
    kwargs = {k: _coerce(k, s, params.get(k, s.default)) for k, s in specs.items()}
    if id == "cone_over_sasakian_r3" and not kwargs["t_min"] < kwargs["t_max"]:
        raise ScenarioError("parameter out of range", "t_min must be below t_max")
    scen = builder(**kwargs)
    if verify:
        bad = {k: v for k, v in scen.verify_flags().items() if v[0] != v[1]}
        if bad:
            raise FlagMismatch(f"{id}: expected flags not reproduced: {bad}")
    return scen
